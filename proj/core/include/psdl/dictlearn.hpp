/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/dictlearn.hpp
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
#include <vector>

#include "psdl/types.hpp"

namespace psdl {

/// Learned dictionary: unit-norm atoms as columns of a (wx*wy*wz) x K matrix.
struct Dictionary {
    Matrix atoms;

    int atom_count() const { return static_cast<int>(atoms.cols()); }
    int atom_size() const { return static_cast<int>(atoms.rows()); }
};

/**
 * Sparse coefficients pairing a Dictionary with a patch matrix: column j of
 * `codes` (K x w) combines atoms to approximate patch j. Entries are bounded
 * by `bound` in magnitude.
 */
struct SparseCodes {
    Matrix codes;
    double bound = 1e10;  // q

    double nonzero_fraction() const {
        if (codes.size() == 0) return 0.0;
        return static_cast<double>((codes.array() != 0.0).count()) /
               static_cast<double>(codes.size());
    }
};

/// Hard thresholding: zero when |y| < mu, otherwise y unchanged (the
/// boundary |y| = mu keeps y).
inline double hard_threshold(double y, double mu) {
    return std::abs(y) < mu ? 0.0 : y;
}

/**
 * Exact minimizer of the single-code subproblem
 *   min_g ||E - d g^T||_F^2 + mu^2 ||g||_0  s.t. ||g||_inf <= q
 * for a unit-norm atom d: hard-threshold E^T d, then clip magnitudes at q
 * keeping signs.
 */
Vector update_code(const Matrix& residual, const Vector& atom, double mu,
                   double q);

/**
 * Exact minimizer of the single-atom subproblem
 *   min_d ||E - d g^T||_F^2  s.t. ||d||_2 = 1,
 * i.e. E g normalized. A zero code (or a zero product E g) falls back to the
 * first standard basis vector so the atom stays unit-norm.
 */
Vector update_atom(const Matrix& residual, const Vector& code);

/**
 * One sequential block-coordinate sweep over the K atom/code pairs, updating
 * the code then the atom for each index against the running residual
 * P - sum_{k != i} d_k g_k^T. The sweep objective
 * ||P - D B||_F^2 + mu^2 ||B||_0 never increases.
 *
 * The residual is maintained by rank-1 updates; see dictlearn tests for the
 * recomputation cross-check.
 */
void dict_pass(const Matrix& patches, Dictionary& dictionary,
               SparseCodes& codes, double mu, double q);

/**
 * Dictionary initialization: the Kronecker product of orthonormal 1-D DCT-II
 * bases of sizes wx, wy, wz, ordered to match the patch vectorization (rows,
 * then columns, then channels). When K is smaller than the full size the
 * leading K columns are kept; when larger, unit-norm pseudo-random columns
 * are appended.
 */
Dictionary dct_dictionary(const Window& window, int atom_count,
                          std::uint64_t seed = 0);

struct LearnTrace {
    std::vector<double> objective;         // per pass
    std::vector<double> nsre;              // per pass
    std::vector<double> nonzero_fraction;  // per pass
};

struct LearnResult {
    Dictionary dictionary;
    SparseCodes codes;
    LearnTrace trace;
};

/**
 * Standalone dictionary learning on a patch matrix: repeated dict_pass
 * sweeps from the DCT initialization, recording the objective, the
 * normalized representation error ||P - DB||_F / ||P||_F, and the code
 * sparsity after every pass.
 */
LearnResult learn_dictionary(const Matrix& patches, const Window& window,
                             double mu, double q, int atom_count, int passes,
                             std::uint64_t seed = 0);

}  // namespace psdl
