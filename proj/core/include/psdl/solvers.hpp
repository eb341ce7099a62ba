/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/solvers.hpp
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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psdl/dictlearn.hpp"
#include "psdl/patch.hpp"
#include "psdl/reflectance.hpp"
#include "psdl/types.hpp"

namespace psdl {

/**
 * A photometric stereo instance: the observation matrix, the calibrated
 * unit-norm light directions, the patch layout used by the regularized
 * solvers, and the segment count for the piecewise reflectance model.
 */
struct Problem {
    ImageStack images;
    LightMatrix lights;
    PatchGrid grid;
    int segments = 2;  // p
};

/// Validates counts, d >= 3, and unit-norm light columns (1e-8), then builds
/// the patch grid. Throws std::invalid_argument on violations.
Problem make_problem(ImageStack images, LightMatrix lights,
                     const Window& window = Window{}, int stride = 4,
                     int segments = 2);

/**
 * Solver parameters. Weights must be nonnegative; tau = 0 requests the
 * monotone default 1/(2 ||L||^2); outer_iters = 0 requests the per-method
 * default (20 for DLNV, 50 for PLS and PDLNV); atom_count = 0 requests a
 * square dictionary (window size x window size, 192 for 8x8x3 windows).
 */
struct SolverConfig {
    double lambda = 0.1;  // patch regularization weight
    double mu = 0.01;     // sparsity threshold
    double gamma = 1e3;   // slope sum-to-one constraint weight
    double q = 1e10;      // sparse code magnitude bound
    double tau = 0.0;     // proximal gradient step size, 0 = auto
    int outer_iters = 0;  // 0 = per-method default
    int prox_steps = 25;
    int dict_passes = 1;
    int p = 0;           // reflectance segments, 0 = take problem.segments
    int atom_count = 0;  // K, 0 = square dictionary
    std::uint64_t seed = 0;
};

/**
 * Parses a flat key=value config ("lambda=0.1", one per line, '#' comments).
 * Recognized keys: lambda, mu, gamma, q, tau, outer_iters, prox_steps,
 * dict_passes, p, K, seed. Unknown keys are rejected.
 */
SolverConfig parse_solver_config(const std::string& text);

/// Renders a config back to the key=value format accepted by
/// parse_solver_config.
std::string format_solver_config(const SolverConfig& config);

/**
 * Output of the iterative solvers. The cost trace starts with the cost of
 * the initialization and appends one value per outer iteration; with a
 * compliant step size it is non-increasing. The sparsity trace mirrors it
 * with the fraction of nonzero sparse codes.
 */
struct SolveReport {
    NormalField normals;
    PiecewiseReflectance reflectance;  // PLS / PDLNV
    Dictionary dictionary;             // DLNV / PDLNV
    SparseCodes codes;                 // DLNV / PDLNV
    std::vector<double> cost_trace;
    std::vector<double> sparsity_trace;
};

/// Spectral norm of the light matrix by power iteration on L L^T
/// (30 steps, relative tolerance 1e-10).
double spectral_norm(const LightMatrix& lights);

/// Baseline least squares: the exact minimizer of ||Y - N L||_F^2, computed
/// pixel-wise through the pseudoinverse of L. Throws on rank-deficient L.
NormalField solve_ls(const Problem& problem);

/**
 * Piecewise-linear least squares: alternates the closed-form slope update
 * with the pixel-wise normal least-squares solve for a fixed iteration
 * budget. Uses config.gamma, config.p and config.outer_iters; all
 * dictionary-related parameters are ignored. Equivalent to the regularized
 * piecewise solver with lambda = 0.
 */
SolveReport solve_pls(const Problem& problem, const SolverConfig& config);

/**
 * One proximal gradient step on the regularized normal objective
 *   ||y - A n||^2 + lambda sum_j ||P_j n - D b_j||^2 :
 * a gradient step on the data term followed by the exact proximal map of the
 * patch term, which reduces to an element-wise division by the patch
 * coverage counts. `y_eff` holds one effective data d-vector per pixel in
 * ImageStack layout. The Kronecker-structured data matrix is never formed;
 * the gradient is evaluated pixel-wise through L.
 */
NormalField prox_normal_step(const NormalField& normals, const Matrix& y_eff,
                             const LightMatrix& lights,
                             const Dictionary& dictionary,
                             const SparseCodes& codes, const PatchGrid& grid,
                             double lambda, double tau);

/**
 * Dictionary-regularized Lambertian solver: starting from the least-squares
 * normals, alternates one (or config.dict_passes) sweeps of dictionary/code
 * updates on the patches of the current normals with config.prox_steps
 * proximal gradient steps on the normals.
 */
SolveReport solve_dlnv(const Problem& problem, const SolverConfig& config);

/**
 * Dictionary-regularized solver under the piecewise-linear reflectance
 * model: alternates the per-pixel slope update, the dictionary/code sweep,
 * and the proximal normal steps, rebuilding the effective data vector from
 * the current slopes each outer iteration. With p = 1 and a very large gamma
 * this reduces to the Lambertian dictionary solver.
 */
SolveReport solve_pdlnv(const Problem& problem, const SolverConfig& config);

}  // namespace psdl
