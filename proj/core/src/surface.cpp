/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/surface.cpp
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
#include "psdl/surface.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace psdl {

namespace {

constexpr double kMinNz = 1e-3;

// FFTW plan creation is not thread-safe; executions on distinct buffers are.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

void dct2_inplace(std::vector<double>& data, int rows, int cols,
                  fftw_r2r_kind kind) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_r2r_2d(rows, cols, data.data(), data.data(), kind,
                                kind, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace

GradientField gradients_from_normals(const NormalField& normals) {
    GradientField g;
    g.p = Matrix::Zero(normals.rows, normals.cols);
    g.q = Matrix::Zero(normals.rows, normals.cols);
    g.valid.setConstant(normals.rows, normals.cols, true);
    for (int c = 0; c < normals.cols; ++c) {
        for (int r = 0; r < normals.rows; ++r) {
            const Eigen::Index idx = pixel_index(r, c, normals.rows);
            const double nz = normals.vectors(idx, 2);
            if (std::abs(nz) < kMinNz) {
                g.valid(r, c) = false;
                continue;
            }
            g.p(r, c) = -normals.vectors(idx, 0) / nz;
            g.q(r, c) = -normals.vectors(idx, 1) / nz;
        }
    }
    return g;
}

GradientField forward_gradients(const Matrix& heights) {
    const Eigen::Index rows = heights.rows();
    const Eigen::Index cols = heights.cols();
    GradientField g;
    g.p = Matrix::Zero(rows, cols);
    g.q = Matrix::Zero(rows, cols);
    g.valid.setConstant(rows, cols, true);
    g.p.leftCols(cols - 1) =
        heights.rightCols(cols - 1) - heights.leftCols(cols - 1);
    g.q.topRows(rows - 1) =
        heights.bottomRows(rows - 1) - heights.topRows(rows - 1);
    return g;
}

HeightMap integrate(const GradientField& gradients) {
    const Eigen::Index rows = gradients.p.rows();
    const Eigen::Index cols = gradients.p.cols();
    if (rows < 2 || cols < 2 || gradients.q.rows() != rows ||
        gradients.q.cols() != cols) {
        throw std::invalid_argument(
            "integrate: gradient fields must agree and be at least 2x2");
    }

    // Divergence of the forward-difference gradient operator. p(r, c) is the
    // slope on the edge (r, c) -> (r, c+1); the final column/row carries no
    // edge and is ignored.
    const int h = static_cast<int>(rows);
    const int w = static_cast<int>(cols);
    std::vector<double> rhs(static_cast<std::size_t>(h) * w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double v = 0.0;
            if (c >= 1) v += gradients.p(r, c - 1);
            if (c <= w - 2) v -= gradients.p(r, c);
            if (r >= 1) v += gradients.q(r - 1, c);
            if (r <= h - 2) v -= gradients.q(r, c);
            rhs[static_cast<std::size_t>(r) * w + c] = v;
        }
    }

    // The grid Laplacian of the normal equations is diagonal in the DCT-II
    // basis with eigenvalues 4 sin^2(pi k / 2n) per axis.
    dct2_inplace(rhs, h, w, FFTW_REDFT10);
    std::vector<double> eig_row(h), eig_col(w);
    for (int r = 0; r < h; ++r) {
        const double s = std::sin(M_PI * r / (2.0 * h));
        eig_row[r] = 4.0 * s * s;
    }
    for (int c = 0; c < w; ++c) {
        const double s = std::sin(M_PI * c / (2.0 * w));
        eig_col[c] = 4.0 * s * s;
    }
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double eig = eig_row[r] + eig_col[c];
            auto& value = rhs[static_cast<std::size_t>(r) * w + c];
            value = eig > 0.0 ? value / eig : 0.0;  // free constant mode
        }
    }
    dct2_inplace(rhs, h, w, FFTW_REDFT01);

    HeightMap map;
    map.heights.resize(rows, cols);
    const double scale = 1.0 / (4.0 * h * w);  // unnormalized transform pair
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            map.heights(r, c) = rhs[static_cast<std::size_t>(r) * w + c] * scale;
        }
    }
    map.heights.array() -= map.heights.mean();
    if (gradients.valid.size() == map.heights.size()) {
        map.valid = gradients.valid;
    } else {
        map.valid.setConstant(rows, cols, true);
    }
    return map;
}

}  // namespace psdl
