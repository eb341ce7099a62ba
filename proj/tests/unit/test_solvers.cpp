#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "psdl/evaluation.hpp"
#include "psdl/solvers.hpp"

using namespace psdl;

namespace {

Problem sphere_problem(int size, int lights, unsigned seed,
                       int segments = 2) {
    const LightMatrix L = random_lights(lights, seed);
    const SphereScene scene = render_sphere(size, L);
    return make_problem(scene.images, L, Window{}, 4, segments);
}

PixelMask fully_lit(const SphereScene& scene, const LightMatrix& lights) {
    PixelMask mask = scene.mask;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        if (!mask(i)) continue;
        const Eigen::Vector3d n = scene.normals.vectors.row(i).transpose();
        for (Eigen::Index k = 0; k < lights.cols(); ++k) {
            if (lights.col(k).dot(n) <= 1e-9) {
                mask(i) = false;
                break;
            }
        }
    }
    return mask;
}

void check_monotone(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] + 1e-9 * std::max(1.0, trace[i - 1]));
    }
}

// Dense oracle for the proximal step: assemble every patch extraction matrix
// explicitly and solve the normal equation with a dense inverse.
NormalField dense_prox_oracle(const NormalField& normals, const Matrix& y_eff,
                              const LightMatrix& lights,
                              const Dictionary& dict, const SparseCodes& codes,
                              const PatchGrid& grid, double lambda,
                              double tau) {
    const Eigen::Index pixels = normals.vectors.rows();
    const Eigen::Index n_len = 3 * pixels;
    auto flat = [pixels](Eigen::Index pixel, int ch) {
        return ch * pixels + pixel;
    };

    Vector n(n_len);
    for (Eigen::Index i = 0; i < pixels; ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            n(flat(i, ch)) = normals.vectors(i, ch);
        }
    }

    // Gradient step on ||y - A n||^2 one pixel at a time.
    Vector n_tilde = n;
    for (Eigen::Index i = 0; i < pixels; ++i) {
        Eigen::Vector3d ni;
        for (int ch = 0; ch < 3; ++ch) ni(ch) = n(flat(i, ch));
        const Eigen::Vector3d grad =
            2.0 * lights *
            (lights.transpose() * ni - y_eff.row(i).transpose());
        for (int ch = 0; ch < 3; ++ch) {
            n_tilde(flat(i, ch)) -= tau * grad(ch);
        }
    }

    // Dense patch extraction matrices.
    const int patch_len = grid.window.size();
    Matrix lhs = Matrix::Identity(n_len, n_len);
    Vector rhs = n_tilde;
    for (int j = 0; j < grid.patch_count(); ++j) {
        Matrix P = Matrix::Zero(patch_len, n_len);
        const auto [r0, c0] = grid.origins[j];
        int out = 0;
        for (int ch = 0; ch < 3; ++ch) {
            for (int c = 0; c < grid.window.wy; ++c) {
                for (int r = 0; r < grid.window.wx; ++r) {
                    P(out++, flat(pixel_index(r0 + r, c0 + c, grid.rows), ch)) =
                        1.0;
                }
            }
        }
        lhs += 2.0 * tau * lambda * P.transpose() * P;
        rhs += 2.0 * tau * lambda * P.transpose() *
               (dict.atoms * codes.codes.col(j));
    }
    const Vector solved = lhs.ldlt().solve(rhs);

    NormalField result = NormalField::zero(grid.rows, grid.cols);
    for (Eigen::Index i = 0; i < pixels; ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            result.vectors(i, ch) = solved(flat(i, ch));
        }
    }
    return result;
}

double dlnv_cost(const Problem& problem, const NormalField& normals,
                 const Dictionary& dict, const SparseCodes& codes,
                 double lambda, double mu) {
    const double fit =
        (normals.vectors * problem.lights - problem.images.values)
            .squaredNorm();
    const Matrix patches = extract(problem.grid, normals);
    const double nnz =
        static_cast<double>((codes.codes.array() != 0.0).count());
    return fit + lambda * ((patches - dict.atoms * codes.codes).squaredNorm() +
                           mu * mu * nnz);
}

}  // namespace

TEST_CASE("spectral_norm matches a dense SVD") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        LightMatrix L(3, 5 + trial);
        for (Eigen::Index i = 0; i < L.size(); ++i) {
            L.data()[i] = dist(gen);
        }
        const double expected =
            Eigen::JacobiSVD<Matrix>(L).singularValues()(0);
        CHECK(spectral_norm(L) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("make_problem validates its inputs") {
    const LightMatrix L = random_lights(5, 1);
    const SphereScene scene = render_sphere(16, L);

    CHECK_NOTHROW(make_problem(scene.images, L));

    LightMatrix bad = L;
    bad.col(2) *= 1.5;
    CHECK_THROWS_AS(make_problem(scene.images, bad), std::invalid_argument);

    CHECK_THROWS_AS(make_problem(scene.images, L.leftCols(2)),
                    std::invalid_argument);
}

TEST_CASE("solve_ls") {
    SUBCASE("axis-aligned lights read the normals off directly") {
        ImageStack stack;
        stack.rows = 4;
        stack.cols = 4;
        stack.values = Matrix::Random(16, 3);
        Problem problem =
            make_problem(stack, LightMatrix(Eigen::Matrix3d::Identity()),
                         Window{4, 4, 3}, 4);
        const NormalField normals = solve_ls(problem);
        CHECK((normals.vectors - stack.values).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("d = 3 invertible lights solve exactly") {
        LightMatrix L(3, 3);
        L.col(0) = Eigen::Vector3d(1, 0, 0);
        L.col(1) = Eigen::Vector3d(0, 1, 0);
        L.col(2) = Eigen::Vector3d(0, 1, 1).normalized();
        ImageStack stack;
        stack.rows = 4;
        stack.cols = 5;
        const Matrix truth = Matrix::Random(20, 3);
        stack.values = truth * L;
        Problem problem = make_problem(stack, L, Window{4, 4, 3}, 4);
        const NormalField normals = solve_ls(problem);
        CHECK((normals.vectors - truth).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("noiseless sphere is recovered below 0.1 degrees") {
        const LightMatrix L = random_lights(10, 7);
        const SphereScene scene = render_sphere(64, L);
        Problem problem = make_problem(scene.images, L);
        const NormalField normals = solve_ls(problem);
        const ErrorSummary summary =
            angular_error(normals, scene.normals, fully_lit(scene, L));
        CHECK(summary.mean_deg < 0.1);
    }

    SUBCASE("rank-deficient lights are rejected") {
        LightMatrix L(3, 4);
        L.col(0) = Eigen::Vector3d(1, 0, 0);
        L.col(1) = Eigen::Vector3d(0, 1, 0);
        L.col(2) = Eigen::Vector3d(1, 1, 0).normalized();
        L.col(3) = Eigen::Vector3d(1, -1, 0).normalized();
        ImageStack stack;
        stack.rows = 4;
        stack.cols = 4;
        stack.values = Matrix::Zero(16, 4);
        Problem problem;
        problem.images = stack;
        problem.lights = L;
        problem.grid = build_grid(4, 4, Window{4, 4, 3}, 4);
        CHECK_THROWS_AS(solve_ls(problem), std::invalid_argument);
    }
}

TEST_CASE("solve_pls") {
    SUBCASE("p = 1 reduces to least squares") {
        const Problem problem = sphere_problem(24, 8, 5, 1);
        SolverConfig config;
        config.outer_iters = 10;
        const SolveReport report = solve_pls(problem, config);
        const NormalField ls = solve_ls(problem);

        // Compare directions on pixels with usable norms.
        double worst = 0.0;
        int compared = 0;
        for (Eigen::Index i = 0; i < ls.vectors.rows(); ++i) {
            const double na = ls.vectors.row(i).norm();
            const double nb = report.normals.vectors.row(i).norm();
            if (na < 1e-8 || nb < 1e-8) continue;
            const double cosine = std::clamp(
                ls.vectors.row(i).dot(report.normals.vectors.row(i)) /
                    (na * nb),
                -1.0, 1.0);
            worst = std::max(worst, std::acos(cosine) * 180.0 / M_PI);
            ++compared;
        }
        REQUIRE(compared > 0);
        CHECK(worst < 1e-6);
    }

    SUBCASE("objective trace is non-increasing") {
        const Problem problem = sphere_problem(20, 6, 11, 3);
        SolverConfig config;
        config.outer_iters = 15;
        const SolveReport report = solve_pls(problem, config);
        REQUIRE(report.cost_trace.size() == 16);
        check_monotone(report.cost_trace);
    }

    SUBCASE("planted two-segment reflectance is inverted") {
        // Forward-simulate a monotone piecewise-linear inverse reflectance
        // whose breakpoints match the equally spaced rule, then solve.
        const int size = 32;
        const LightMatrix L = random_lights(12, 21, 0.85);
        const SphereScene scene = render_sphere(size, L);
        const double a1 = 0.4, a2 = 0.6;  // planted slopes, sum 1

        ImageStack warped = scene.images;
        PixelMask lit = fully_lit(scene, L);
        for (Eigen::Index i = 0; i < warped.values.rows(); ++i) {
            if (!lit(i)) {
                warped.values.row(i).setZero();
                continue;
            }
            const double tmax = scene.images.values.row(i).maxCoeff();
            for (Eigen::Index k = 0; k < warped.values.cols(); ++k) {
                const double t = scene.images.values(i, k);
                // Invert g with breakpoints (0, tmax, 2 tmax): intensities
                // below the knee scale by 1/a1, above by 1/a2.
                warped.values(i, k) = t <= a1 * tmax
                                          ? t / a1
                                          : tmax + (t - a1 * tmax) / a2;
            }
        }

        Problem problem = make_problem(warped, L, Window{}, 4, 2);
        SolverConfig config;
        config.outer_iters = 60;
        config.gamma = 1e4;
        const SolveReport report = solve_pls(problem, config);
        const ErrorSummary summary =
            angular_error(report.normals, scene.normals, lit);
        CHECK(summary.mean_deg < 1.0);
    }
}

TEST_CASE("prox_normal_step") {
    const Problem problem = sphere_problem(16, 6, 2);
    const double norm = spectral_norm(problem.lights);
    const double tau = 1.0 / (2.0 * norm * norm);
    const Dictionary dict = dct_dictionary(problem.grid.window, 192);

    SUBCASE("lambda = 0 is a pure gradient step") {
        SparseCodes codes;
        codes.codes = Matrix::Zero(192, problem.grid.patch_count());
        const NormalField n0 = solve_ls(problem);
        NormalField shifted = n0;
        shifted.vectors.array() += 0.1;
        const NormalField stepped =
            prox_normal_step(shifted, problem.images.values, problem.lights,
                             dict, codes, problem.grid, 0.0, tau);
        const Matrix expected =
            shifted.vectors -
            2.0 * tau *
                (shifted.vectors * problem.lights - problem.images.values) *
                problem.lights.transpose();
        CHECK((stepped.vectors - expected).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("exact data and exact patches are a fixed point") {
        // Normals solving L^T n = y exactly; codes reproducing the patches
        // exactly (codes = D^T patches for the orthonormal square DCT).
        const NormalField n0 = solve_ls(problem);
        ImageStack consistent = problem.images;
        consistent.values = n0.vectors * problem.lights;
        SparseCodes codes;
        codes.codes = dict.atoms.transpose() * extract(problem.grid, n0);
        const NormalField stepped =
            prox_normal_step(n0, consistent.values, problem.lights, dict,
                             codes, problem.grid, 0.7, tau);
        CHECK((stepped.vectors - n0.vectors).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("objective decreases over 25 steps") {
        std::mt19937 gen(9);
        std::uniform_real_distribution<double> dist(-0.5, 0.5);
        SparseCodes codes;
        codes.codes = Matrix::Zero(192, problem.grid.patch_count());
        for (Eigen::Index i = 0; i < codes.codes.size(); ++i) {
            if (gen() % 7 == 0) codes.codes.data()[i] = dist(gen);
        }
        NormalField n = solve_ls(problem);
        n.vectors.array() += 0.25;  // move off the minimum
        const double lambda = 0.5;

        auto objective = [&](const NormalField& field) {
            const double fit =
                (field.vectors * problem.lights - problem.images.values)
                    .squaredNorm();
            const Matrix patches = extract(problem.grid, field);
            return fit +
                   lambda * (patches - dict.atoms * codes.codes).squaredNorm();
        };

        double previous = objective(n);
        for (int step = 0; step < 25; ++step) {
            n = prox_normal_step(n, problem.images.values, problem.lights,
                                 dict, codes, problem.grid, lambda, tau);
            const double current = objective(n);
            CHECK(current <= previous + 1e-9 * std::max(1.0, previous));
            previous = current;
        }
    }

    SUBCASE("matches the dense normal-equation oracle") {
        std::mt19937 gen(33);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        SparseCodes codes;
        codes.codes = Matrix::Zero(192, problem.grid.patch_count());
        for (Eigen::Index i = 0; i < codes.codes.size(); ++i) {
            if (gen() % 5 == 0) codes.codes.data()[i] = dist(gen);
        }
        NormalField n = NormalField::zero(16, 16);
        for (Eigen::Index i = 0; i < n.vectors.size(); ++i) {
            n.vectors.data()[i] = dist(gen);
        }
        const NormalField fast =
            prox_normal_step(n, problem.images.values, problem.lights, dict,
                             codes, problem.grid, 0.3, tau);
        const NormalField oracle =
            dense_prox_oracle(n, problem.images.values, problem.lights, dict,
                              codes, problem.grid, 0.3, tau);
        CHECK((fast.vectors - oracle.vectors).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("solve_dlnv") {
    SUBCASE("lambda = 0 stays at the least-squares solution") {
        const Problem problem = sphere_problem(24, 8, 13);
        SolverConfig config;
        config.lambda = 0.0;
        config.outer_iters = 3;
        const SolveReport report = solve_dlnv(problem, config);
        const NormalField ls = solve_ls(problem);
        const ErrorSummary summary = angular_error(report.normals, ls);
        CHECK(summary.mean_deg < 1e-4);
    }

    SUBCASE("cost trace is non-increasing on noisy data") {
        Problem problem = sphere_problem(32, 8, 17);
        problem.images = add_poisson_noise(problem.images, 10.0, 4);
        SolverConfig config;
        config.lambda = 5.0;
        config.mu = 0.05;
        config.outer_iters = 8;
        const SolveReport report = solve_dlnv(problem, config);
        REQUIRE(report.cost_trace.size() == 9);
        check_monotone(report.cost_trace);
        CHECK(report.normals.vectors.allFinite());
    }
}

TEST_CASE("solve_pdlnv") {
    SUBCASE("p = 1 with a huge gamma matches the Lambertian solver") {
        Problem problem = sphere_problem(24, 8, 19, 1);
        problem.images = add_poisson_noise(problem.images, 15.0, 6);
        SolverConfig config;
        config.lambda = 2.0;
        config.mu = 0.05;
        config.outer_iters = 10;
        config.gamma = 1e10;
        const SolveReport pdlnv = solve_pdlnv(problem, config);
        const SolveReport dlnv = solve_dlnv(problem, config);
        const ErrorSummary deviation =
            angular_error(pdlnv.normals, dlnv.normals);
        CHECK(deviation.mean_deg < 1e-4);
    }

    SUBCASE("cost trace is non-increasing") {
        Problem problem = sphere_problem(32, 10, 23, 2);
        problem.images = add_poisson_noise(problem.images, 8.0, 9);
        SolverConfig config;
        config.lambda = 5.0;
        config.mu = 0.05;
        config.outer_iters = 10;
        const SolveReport report = solve_pdlnv(problem, config);
        REQUIRE(report.cost_trace.size() == 11);
        check_monotone(report.cost_trace);
        CHECK(report.normals.vectors.allFinite());
    }
}

TEST_CASE("solver config round trip") {
    SolverConfig config;
    config.lambda = 2.5;
    config.mu = 0.05;
    config.gamma = 1e4;
    config.q = 5.0;
    config.tau = 0.125;
    config.outer_iters = 7;
    config.prox_steps = 13;
    config.dict_passes = 2;
    config.p = 3;
    config.atom_count = 64;
    config.seed = 99;

    const SolverConfig parsed = parse_solver_config(format_solver_config(config));
    CHECK(parsed.lambda == config.lambda);
    CHECK(parsed.mu == config.mu);
    CHECK(parsed.gamma == config.gamma);
    CHECK(parsed.q == config.q);
    CHECK(parsed.tau == config.tau);
    CHECK(parsed.outer_iters == config.outer_iters);
    CHECK(parsed.prox_steps == config.prox_steps);
    CHECK(parsed.dict_passes == config.dict_passes);
    CHECK(parsed.p == config.p);
    CHECK(parsed.atom_count == config.atom_count);
    CHECK(parsed.seed == config.seed);

    CHECK_THROWS_AS(parse_solver_config("lambda=0.1\nwhat=3\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_solver_config("lambda=abc\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_solver_config("lambda\n"), std::invalid_argument);
    CHECK_NOTHROW(parse_solver_config("# comment only\n\n"));
}
