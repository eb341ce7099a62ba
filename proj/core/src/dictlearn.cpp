/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/dictlearn.cpp
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
#include "psdl/dictlearn.hpp"

#include <cmath>
#include <stdexcept>

#include "psdl/random.hpp"

namespace psdl {

namespace {

// Orthonormal DCT-II basis of size n, basis vectors as columns.
Matrix dct_basis(int n) {
    Matrix T(n, n);
    const double pi = M_PI;
    for (int k = 0; k < n; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int j = 0; j < n; ++j) {
            T(j, k) = scale * std::cos(pi * (2 * j + 1) * k / (2.0 * n));
        }
    }
    return T;
}

}  // namespace

Vector update_code(const Matrix& residual, const Vector& atom, double mu,
                   double q) {
    Vector correlation = residual.transpose() * atom;
    for (Eigen::Index j = 0; j < correlation.size(); ++j) {
        const double t = hard_threshold(correlation(j), mu);
        correlation(j) = std::copysign(std::min(std::abs(t), q), t);
    }
    return correlation;
}

Vector update_atom(const Matrix& residual, const Vector& code) {
    Vector atom = Vector::Zero(residual.rows());
    if (!code.isZero(0.0)) {
        atom = residual * code;
        const double norm = atom.norm();
        if (norm > 0.0) {
            return atom / norm;
        }
        atom.setZero();
    }
    atom(0) = 1.0;
    return atom;
}

void dict_pass(const Matrix& patches, Dictionary& dictionary,
               SparseCodes& codes, double mu, double q) {
    const Eigen::Index n = patches.rows();
    const Eigen::Index w = patches.cols();
    const Eigen::Index K = dictionary.atoms.cols();
    if (dictionary.atoms.rows() != n || codes.codes.rows() != K ||
        codes.codes.cols() != w) {
        throw std::invalid_argument("dict_pass: inconsistent dimensions");
    }

    codes.bound = q;
    Matrix residual = patches - dictionary.atoms * codes.codes;
    for (Eigen::Index i = 0; i < K; ++i) {
        // Running residual with atom i removed.
        residual.noalias() +=
            dictionary.atoms.col(i) * codes.codes.row(i);
        const Vector code = update_code(residual, dictionary.atoms.col(i), mu, q);
        const Vector atom = update_atom(residual, code);
        residual.noalias() -= atom * code.transpose();
        codes.codes.row(i) = code.transpose();
        dictionary.atoms.col(i) = atom;
    }
}

Dictionary dct_dictionary(const Window& window, int atom_count,
                          std::uint64_t seed) {
    if (atom_count < 1) {
        throw std::invalid_argument("dct_dictionary: need at least one atom");
    }
    const Matrix tx = dct_basis(window.wx);
    const Matrix ty = dct_basis(window.wy);
    const Matrix tz = dct_basis(window.wz);
    const int full = window.size();

    Dictionary dict;
    dict.atoms.resize(full, atom_count);
    const int keep = std::min(atom_count, full);
    for (int k = 0; k < keep; ++k) {
        const int kx = k % window.wx;
        const int ky = (k / window.wx) % window.wy;
        const int kz = k / (window.wx * window.wy);
        for (int ch = 0; ch < window.wz; ++ch) {
            for (int c = 0; c < window.wy; ++c) {
                for (int r = 0; r < window.wx; ++r) {
                    dict.atoms(r + window.wx * (c + window.wy * ch), k) =
                        tx(r, kx) * ty(c, ky) * tz(ch, kz);
                }
            }
        }
    }
    if (atom_count > full) {
        Rng rng(seed, 0x9d1c);
        for (int k = full; k < atom_count; ++k) {
            for (int j = 0; j < full; ++j) {
                dict.atoms(j, k) = 2.0 * rng.uniform() - 1.0;
            }
        }
    }
    for (int k = 0; k < atom_count; ++k) {
        dict.atoms.col(k).normalize();
    }
    return dict;
}

LearnResult learn_dictionary(const Matrix& patches, const Window& window,
                             double mu, double q, int atom_count, int passes,
                             std::uint64_t seed) {
    if (patches.rows() != window.size()) {
        throw std::invalid_argument(
            "learn_dictionary: patch rows do not match the window size");
    }
    if (passes < 1) {
        throw std::invalid_argument("learn_dictionary: need at least one pass");
    }

    LearnResult result;
    result.dictionary = dct_dictionary(window, atom_count, seed);
    result.codes.codes = Matrix::Zero(atom_count, patches.cols());
    result.codes.bound = q;

    const double patch_norm = patches.norm();
    for (int pass = 0; pass < passes; ++pass) {
        dict_pass(patches, result.dictionary, result.codes, mu, q);
        const double fit =
            (patches - result.dictionary.atoms * result.codes.codes).norm();
        const double nonzeros =
            static_cast<double>((result.codes.codes.array() != 0.0).count());
        result.trace.objective.push_back(fit * fit + mu * mu * nonzeros);
        result.trace.nsre.push_back(patch_norm > 0.0 ? fit / patch_norm : 0.0);
        result.trace.nonzero_fraction.push_back(result.codes.nonzero_fraction());
    }
    return result;
}

}  // namespace psdl
