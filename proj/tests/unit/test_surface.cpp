#include <doctest.h>

#include <cmath>
#include <random>

#include "psdl/evaluation.hpp"
#include "psdl/surface.hpp"

using namespace psdl;

namespace {

double masked_rmse(const Matrix& a, const Matrix& b,
                   const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& keep) {
    // Align the free additive constant on the compared region first.
    double mean_diff = 0.0;
    int count = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (!keep(r, c)) continue;
            mean_diff += a(r, c) - b(r, c);
            ++count;
        }
    }
    REQUIRE(count > 0);
    mean_diff /= count;
    double sq = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (!keep(r, c)) continue;
            sq += std::pow(a(r, c) - b(r, c) - mean_diff, 2);
        }
    }
    return std::sqrt(sq / count);
}

double rmse(const Matrix& a, const Matrix& b) {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> all(a.rows(), a.cols());
    all.setConstant(true);
    return masked_rmse(a, b, all);
}

}  // namespace

TEST_CASE("gradients_from_normals") {
    SUBCASE("straight-up normals give zero slopes") {
        NormalField f = NormalField::zero(6, 6);
        f.vectors.col(2).setOnes();
        const GradientField g = gradients_from_normals(f);
        CHECK(g.p.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.q.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.valid.all());
    }

    SUBCASE("a tilted plane gives constant slopes") {
        const double a = 0.4, b = -0.7;
        NormalField f = NormalField::zero(5, 7);
        const Eigen::Vector3d n =
            Eigen::Vector3d(a, b, 1.0).normalized();  // plane z = -a x - b y
        for (Eigen::Index i = 0; i < f.vectors.rows(); ++i) {
            f.vectors.row(i) = n.transpose();
        }
        const GradientField g = gradients_from_normals(f);
        CHECK((g.p.array() + a).abs().maxCoeff() < 1e-12);
        CHECK((g.q.array() + b).abs().maxCoeff() < 1e-12);
    }

    SUBCASE("near-zero nz marks pixels invalid with zero slopes") {
        NormalField f = NormalField::zero(4, 4);
        f.vectors.col(2).setOnes();
        f.vectors.row(5) << 1.0, 0.0, 1e-4;
        const GradientField g = gradients_from_normals(f);
        CHECK_FALSE(g.valid(1, 1));  // pixel 5 = (r 1, c 1)
        CHECK(g.p(1, 1) == 0.0);
        CHECK(g.valid.count() == 15);
    }

    SUBCASE("sphere slopes match the analytic derivative away from the rim") {
        const int size = 64;
        const LightMatrix lights = random_lights(4, 1);
        const SphereScene scene = render_sphere(size, lights);
        const GradientField g = gradients_from_normals(scene.normals);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const double x = (2.0 * c + 1.0 - size) / size;
                const double y = (2.0 * r + 1.0 - size) / size;
                const double rr = x * x + y * y;
                if (rr > 0.8) continue;  // stay away from the rim
                const double z = std::sqrt(1.0 - rr);
                CHECK(g.p(r, c) == doctest::Approx(-x / z).epsilon(1e-6));
                CHECK(g.q(r, c) == doctest::Approx(-y / z).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("integrate") {
    SUBCASE("zero gradients give a flat zero-mean map") {
        GradientField g;
        g.p = Matrix::Zero(8, 9);
        g.q = Matrix::Zero(8, 9);
        const HeightMap map = integrate(g);
        CHECK(map.heights.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("constant gradients reproduce a plane") {
        const double a = 0.3, b = -0.5;
        GradientField g;
        g.p = Matrix::Constant(16, 12, a);
        g.q = Matrix::Constant(16, 12, b);
        const HeightMap map = integrate(g);
        Matrix plane(16, 12);
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 12; ++c) {
                plane(r, c) = a * c + b * r;
            }
        }
        CHECK(rmse(map.heights, plane) < 1e-8);
    }

    SUBCASE("forward differences of any smooth surface invert exactly") {
        std::mt19937 gen(5);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const int size = 64;
        Matrix z(size, size);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                z(r, c) = 3.0 * std::cos(M_PI * (2.0 * c + 1.0) / 40.0) *
                              std::sin(M_PI * r / 17.0) +
                          0.5 * r - 0.2 * c;
            }
        }
        // A rough field exercises the inverse property just as well.
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z.data()[i] += 0.05 * dist(gen);
        }
        const HeightMap map = integrate(forward_gradients(z));
        const double range = z.maxCoeff() - z.minCoeff();
        CHECK(rmse(map.heights, z) < 1e-6 * range);
    }

    SUBCASE("adding a constant to p adds a linear ramp") {
        std::mt19937 gen(12);
        std::uniform_real_distribution<double> dist(-0.2, 0.2);
        GradientField g;
        g.p.resize(20, 20);
        g.q.resize(20, 20);
        for (Eigen::Index i = 0; i < g.p.size(); ++i) {
            g.p.data()[i] = dist(gen);
            g.q.data()[i] = dist(gen);
        }
        const HeightMap base = integrate(g);
        GradientField shifted = g;
        shifted.p.array() += 0.75;
        const HeightMap ramped = integrate(shifted);
        Matrix expected = base.heights;
        for (int c = 0; c < 20; ++c) {
            expected.col(c).array() += 0.75 * c;
        }
        CHECK(rmse(ramped.heights, expected) < 1e-10);
    }

    SUBCASE("hemisphere recovery within one percent of the radius") {
        const int size = 128;
        const double radius = size / 2.0;
        const LightMatrix lights = random_lights(4, 2);
        const SphereScene scene = render_sphere(size, lights);
        GradientField g = gradients_from_normals(scene.normals);
        const HeightMap map = integrate(g);

        Matrix truth(size, size);
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> keep(size, size);
        keep.setConstant(false);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const double x = (2.0 * c + 1.0 - size) / size;
                const double y = (2.0 * r + 1.0 - size) / size;
                const double rr = x * x + y * y;
                truth(r, c) = rr < 1.0 ? radius * std::sqrt(1.0 - rr) : 0.0;
                keep(r, c) = rr < 0.81;  // inside 0.9 radius
            }
        }
        // Slopes are in height-per-pixel units already.
        const double err = masked_rmse(map.heights, truth, keep);
        CHECK(err < 0.01 * radius);
    }

    SUBCASE("mismatched fields are rejected") {
        GradientField g;
        g.p = Matrix::Zero(4, 4);
        g.q = Matrix::Zero(4, 5);
        CHECK_THROWS_AS(integrate(g), std::invalid_argument);
    }
}
