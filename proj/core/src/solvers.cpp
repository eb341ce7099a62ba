/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/solvers.cpp
 *
 * Copyright 2026 The psdl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "psdl/solvers.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace psdl {

namespace {

constexpr int kDefaultItersDlnv = 20;
constexpr int kDefaultItersPiecewise = 50;

int resolve_iters(const SolverConfig& config, int fallback) {
    return config.outer_iters > 0 ? config.outer_iters : fallback;
}

int resolve_segments(const Problem& problem, const SolverConfig& config) {
    const int p = config.p > 0 ? config.p : problem.segments;
    if (p < 1) {
        throw std::invalid_argument("solver: segment count must be >= 1");
    }
    return p;
}

int resolve_atoms(const Problem& problem, const SolverConfig& config) {
    return config.atom_count > 0 ? config.atom_count
                                 : problem.grid.window.size();
}

double resolve_tau(const Problem& problem, const SolverConfig& config) {
    if (config.tau > 0.0) {
        return config.tau;
    }
    const double norm = spectral_norm(problem.lights);
    return 1.0 / (2.0 * norm * norm);
}

void check_weights(const SolverConfig& config) {
    if (config.lambda < 0.0 || config.mu < 0.0 || config.gamma < 0.0 ||
        config.q < 0.0 || config.tau < 0.0) {
        throw std::invalid_argument("solver: weights must be nonnegative");
    }
}

// Pseudoinverse of the 3 x d light matrix; throws when rank < 3.
Matrix light_pinv(const LightMatrix& lights) {
    Eigen::JacobiSVD<Matrix> svd(lights,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    if (sigma(2) <= 1e-10 * sigma(0)) {
        throw std::invalid_argument("solve_ls: light matrix is rank-deficient");
    }
    return svd.matrixV() * sigma.cwiseInverse().asDiagonal() *
           svd.matrixU().transpose();
}

NormalField normals_from(const Problem& problem, const Matrix& values) {
    NormalField field;
    field.rows = problem.images.rows;
    field.cols = problem.images.cols;
    field.vectors = values;
    return field;
}

// One proximal step with the patch back-projection and coverage counts
// already accumulated (they are constant while D and B are fixed).
void prox_step_precomputed(NormalField& normals, const Matrix& y_eff,
                           const LightMatrix& lights,
                           const NormalField& patch_back,
                           const NormalField& cover, double lambda,
                           double tau) {
    // Gradient of the data term, evaluated pixel-wise: 2 L (L^T n - y).
    normals.vectors -=
        2.0 * tau * (normals.vectors * lights - y_eff) * lights.transpose();
    if (lambda > 0.0) {
        const double scale = 2.0 * tau * lambda;
        normals.vectors =
            (normals.vectors + scale * patch_back.vectors).array() /
            (1.0 + scale * cover.vectors.array());
    }
}

// Per-pixel slope update; rebuilds the pixel's basis matrix from the stored
// breakpoints and returns the effective data row C a.
struct SlopeUpdateResult {
    double constraint_penalty = 0.0;  // gamma^2 sum (1^T a - 1)^2
};

SlopeUpdateResult update_all_slopes(const Problem& problem,
                                    PiecewiseReflectance& reflectance,
                                    const NormalField& normals, double gamma,
                                    Matrix& y_eff) {
    const Eigen::Index pixels = problem.images.values.rows();
    const Matrix targets = normals.vectors * problem.lights;  // pixels x d
    SlopeUpdateResult result;
    for (Eigen::Index i = 0; i < pixels; ++i) {
        const Matrix C = build_C(problem.images.values.row(i).transpose(),
                                 reflectance.breakpoints.row(i).transpose());
        const Vector a =
            update_slopes(C, targets.row(i).transpose(), gamma);
        reflectance.slopes.row(i) = a.transpose();
        y_eff.row(i) = (C * a).transpose();
        const double dev = a.sum() - 1.0;
        result.constraint_penalty += gamma * gamma * dev * dev;
    }
    return result;
}

PiecewiseReflectance init_reflectance(const Problem& problem, int segments) {
    const Eigen::Index pixels = problem.images.values.rows();
    PiecewiseReflectance model;
    model.segments = segments;
    model.breakpoints.resize(pixels, segments + 1);
    model.slopes =
        Matrix::Constant(pixels, segments, 1.0 / segments);  // Lambertian start
    for (Eigen::Index i = 0; i < pixels; ++i) {
        model.breakpoints.row(i) =
            make_breakpoints(problem.images.values.row(i).transpose(), segments)
                .transpose();
    }
    return model;
}

double data_fit(const NormalField& normals, const Matrix& y_eff,
                const LightMatrix& lights) {
    return (normals.vectors * lights - y_eff).squaredNorm();
}

double patch_term(const PatchGrid& grid, const NormalField& normals,
                  const Dictionary& dictionary, const SparseCodes& codes,
                  double mu) {
    const Matrix patches = extract(grid, normals);
    const double fit =
        (patches - dictionary.atoms * codes.codes).squaredNorm();
    const double nonzeros =
        static_cast<double>((codes.codes.array() != 0.0).count());
    return fit + mu * mu * nonzeros;
}

}  // namespace

Problem make_problem(ImageStack images, LightMatrix lights,
                     const Window& window, int stride, int segments) {
    if (images.values.cols() != lights.cols()) {
        throw std::invalid_argument(
            "make_problem: image count does not match light count");
    }
    if (lights.cols() < 3) {
        throw std::invalid_argument("make_problem: need at least 3 images");
    }
    if (images.values.rows() !=
        static_cast<Eigen::Index>(images.rows) * images.cols) {
        throw std::invalid_argument("make_problem: image stack shape mismatch");
    }
    for (Eigen::Index k = 0; k < lights.cols(); ++k) {
        if (std::abs(lights.col(k).norm() - 1.0) > 1e-8) {
            throw std::invalid_argument(
                "make_problem: light direction " + std::to_string(k) +
                " is not unit-norm");
        }
    }
    if (segments < 1) {
        throw std::invalid_argument("make_problem: segments must be >= 1");
    }
    Problem problem;
    problem.grid = build_grid(images.rows, images.cols, window, stride);
    problem.images = std::move(images);
    problem.lights = std::move(lights);
    problem.segments = segments;
    return problem;
}

double spectral_norm(const LightMatrix& lights) {
    const Eigen::Matrix3d gram = lights * lights.transpose();
    Eigen::Vector3d v = Eigen::Vector3d::Ones().normalized();
    double value = 0.0;
    for (int it = 0; it < 30; ++it) {
        const Eigen::Vector3d w = gram * v;
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        if (std::abs(next - value) <= 1e-10 * std::max(1.0, std::abs(next))) {
            value = next;
            break;
        }
        value = next;
    }
    return std::sqrt(value);
}

NormalField solve_ls(const Problem& problem) {
    const Matrix pinv = light_pinv(problem.lights);
    return normals_from(problem, problem.images.values * pinv);
}

SolveReport solve_pls(const Problem& problem, const SolverConfig& config) {
    check_weights(config);
    const int segments = resolve_segments(problem, config);
    const int iters = resolve_iters(config, kDefaultItersPiecewise);
    const double gamma = config.gamma;
    const Matrix pinv = light_pinv(problem.lights);

    SolveReport report;
    report.normals = solve_ls(problem);
    report.reflectance = init_reflectance(problem, segments);

    Matrix y_eff = problem.images.values;
    double penalty = 0.0;
    {
        // Cost of the initialization with the uniform slopes.
        const Eigen::Index pixels = problem.images.values.rows();
        for (Eigen::Index i = 0; i < pixels; ++i) {
            const Matrix C =
                build_C(problem.images.values.row(i).transpose(),
                        report.reflectance.breakpoints.row(i).transpose());
            y_eff.row(i) =
                (C * report.reflectance.slopes.row(i).transpose()).transpose();
        }
        report.cost_trace.push_back(
            data_fit(report.normals, y_eff, problem.lights));
    }

    for (int it = 0; it < iters; ++it) {
        penalty = update_all_slopes(problem, report.reflectance,
                                    report.normals, gamma, y_eff)
                      .constraint_penalty;
        report.normals = normals_from(problem, y_eff * pinv);
        report.cost_trace.push_back(
            data_fit(report.normals, y_eff, problem.lights) + penalty);
    }
    return report;
}

NormalField prox_normal_step(const NormalField& normals, const Matrix& y_eff,
                             const LightMatrix& lights,
                             const Dictionary& dictionary,
                             const SparseCodes& codes, const PatchGrid& grid,
                             double lambda, double tau) {
    if (tau <= 0.0) {
        throw std::invalid_argument("prox_normal_step: tau must be positive");
    }
    NormalField result = normals;
    if (lambda > 0.0) {
        const NormalField back =
            adjoint_accumulate(grid, dictionary.atoms * codes.codes);
        const NormalField cover = coverage(grid);
        prox_step_precomputed(result, y_eff, lights, back, cover, lambda, tau);
    } else {
        const NormalField empty;
        prox_step_precomputed(result, y_eff, lights, empty, empty, 0.0, tau);
    }
    return result;
}

SolveReport solve_dlnv(const Problem& problem, const SolverConfig& config) {
    check_weights(config);
    const int iters = resolve_iters(config, kDefaultItersDlnv);
    const int atoms = resolve_atoms(problem, config);
    const double tau = resolve_tau(problem, config);

    SolveReport report;
    report.normals = solve_ls(problem);
    report.dictionary =
        dct_dictionary(problem.grid.window, atoms, config.seed);
    report.codes.codes = Matrix::Zero(atoms, problem.grid.patch_count());
    report.codes.bound = config.q;

    const NormalField cover = coverage(problem.grid);
    const Matrix& y = problem.images.values;

    report.cost_trace.push_back(
        data_fit(report.normals, y, problem.lights) +
        config.lambda * patch_term(problem.grid, report.normals,
                                   report.dictionary, report.codes,
                                   config.mu));
    report.sparsity_trace.push_back(report.codes.nonzero_fraction());

    for (int it = 0; it < iters; ++it) {
        const Matrix patches = extract(problem.grid, report.normals);
        for (int pass = 0; pass < config.dict_passes; ++pass) {
            dict_pass(patches, report.dictionary, report.codes, config.mu,
                      config.q);
        }
        const NormalField back = adjoint_accumulate(
            problem.grid, report.dictionary.atoms * report.codes.codes);
        for (int step = 0; step < config.prox_steps; ++step) {
            prox_step_precomputed(report.normals, y, problem.lights, back,
                                  cover, config.lambda, tau);
        }
        report.cost_trace.push_back(
            data_fit(report.normals, y, problem.lights) +
            config.lambda * patch_term(problem.grid, report.normals,
                                       report.dictionary, report.codes,
                                       config.mu));
        report.sparsity_trace.push_back(report.codes.nonzero_fraction());
    }
    return report;
}

SolveReport solve_pdlnv(const Problem& problem, const SolverConfig& config) {
    check_weights(config);
    const int segments = resolve_segments(problem, config);
    const int iters = resolve_iters(config, kDefaultItersPiecewise);
    const int atoms = resolve_atoms(problem, config);
    const double tau = resolve_tau(problem, config);
    const double gamma = config.gamma;

    SolveReport report;
    report.normals = solve_ls(problem);
    report.reflectance = init_reflectance(problem, segments);
    report.dictionary =
        dct_dictionary(problem.grid.window, atoms, config.seed);
    report.codes.codes = Matrix::Zero(atoms, problem.grid.patch_count());
    report.codes.bound = config.q;

    const NormalField cover = coverage(problem.grid);
    const Eigen::Index pixels = problem.images.values.rows();
    Matrix y_eff(pixels, problem.images.values.cols());
    double penalty = 0.0;

    {
        // Initialization cost with the uniform slopes and empty codes.
        for (Eigen::Index i = 0; i < pixels; ++i) {
            const Matrix C =
                build_C(problem.images.values.row(i).transpose(),
                        report.reflectance.breakpoints.row(i).transpose());
            y_eff.row(i) =
                (C * report.reflectance.slopes.row(i).transpose()).transpose();
        }
        report.cost_trace.push_back(
            data_fit(report.normals, y_eff, problem.lights) +
            config.lambda * patch_term(problem.grid, report.normals,
                                       report.dictionary, report.codes,
                                       config.mu));
        report.sparsity_trace.push_back(report.codes.nonzero_fraction());
    }

    for (int it = 0; it < iters; ++it) {
        penalty = update_all_slopes(problem, report.reflectance,
                                    report.normals, gamma, y_eff)
                      .constraint_penalty;
        const Matrix patches = extract(problem.grid, report.normals);
        for (int pass = 0; pass < config.dict_passes; ++pass) {
            dict_pass(patches, report.dictionary, report.codes, config.mu,
                      config.q);
        }
        const NormalField back = adjoint_accumulate(
            problem.grid, report.dictionary.atoms * report.codes.codes);
        for (int step = 0; step < config.prox_steps; ++step) {
            prox_step_precomputed(report.normals, y_eff, problem.lights, back,
                                  cover, config.lambda, tau);
        }
        report.cost_trace.push_back(
            data_fit(report.normals, y_eff, problem.lights) + penalty +
            config.lambda * patch_term(problem.grid, report.normals,
                                       report.dictionary, report.codes,
                                       config.mu));
        report.sparsity_trace.push_back(report.codes.nonzero_fraction());
    }
    return report;
}

SolverConfig parse_solver_config(const std::string& text) {
    SolverConfig config;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string()
                                          : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto as_double = [&](const std::string& s) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size() || s.empty()) {
                throw std::invalid_argument("config: bad value for '" + key +
                                            "': '" + s + "'");
            }
            return v;
        };
        auto as_int = [&](const std::string& s) {
            const double v = as_double(s);
            if (v != std::floor(v)) {
                throw std::invalid_argument("config: '" + key +
                                            "' expects an integer");
            }
            return static_cast<long long>(v);
        };
        if (key == "lambda") {
            config.lambda = as_double(value);
        } else if (key == "mu") {
            config.mu = as_double(value);
        } else if (key == "gamma") {
            config.gamma = as_double(value);
        } else if (key == "q") {
            config.q = as_double(value);
        } else if (key == "tau") {
            config.tau = as_double(value);
        } else if (key == "outer_iters") {
            config.outer_iters = static_cast<int>(as_int(value));
        } else if (key == "prox_steps") {
            config.prox_steps = static_cast<int>(as_int(value));
        } else if (key == "dict_passes") {
            config.dict_passes = static_cast<int>(as_int(value));
        } else if (key == "p") {
            config.p = static_cast<int>(as_int(value));
        } else if (key == "K") {
            config.atom_count = static_cast<int>(as_int(value));
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(as_int(value));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    check_weights(config);
    return config;
}

std::string format_solver_config(const SolverConfig& config) {
    std::ostringstream out;
    out << "lambda=" << config.lambda << "\n"
        << "mu=" << config.mu << "\n"
        << "gamma=" << config.gamma << "\n"
        << "q=" << config.q << "\n"
        << "tau=" << config.tau << "\n"
        << "outer_iters=" << config.outer_iters << "\n"
        << "prox_steps=" << config.prox_steps << "\n"
        << "dict_passes=" << config.dict_passes << "\n"
        << "p=" << config.p << "\n"
        << "K=" << config.atom_count << "\n"
        << "seed=" << config.seed << "\n";
    return out.str();
}

}  // namespace psdl
