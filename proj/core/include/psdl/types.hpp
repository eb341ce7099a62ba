/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/types.hpp
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

#include <Eigen/Core>

namespace psdl {

/// Directions of the d light sources, one unit-norm column per image (3 x d).
using LightMatrix = Eigen::Matrix3Xd;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * A stack of d grayscale images of size rows x cols, flattened into a
 * (rows*cols) x d matrix. Pixel (r, c) of image k lives at
 * values(r + c*rows, k), i.e. each image is stacked column-major, the same
 * ordering produced by vectorizing the image matrix.
 */
struct ImageStack {
    Matrix values;  // (rows*cols) x d
    int rows = 0;
    int cols = 0;

    int pixel_count() const { return rows * cols; }
    int image_count() const { return static_cast<int>(values.cols()); }
};

/**
 * Per-pixel albedo-scaled surface normals, one 3-vector per row using the
 * same column-major pixel ordering as ImageStack. The vector norm carries
 * the albedo; callers normalize only when a unit direction is needed.
 */
struct NormalField {
    Eigen::Matrix<double, Eigen::Dynamic, 3> vectors;  // (rows*cols) x 3
    int rows = 0;
    int cols = 0;

    int pixel_count() const { return rows * cols; }

    static NormalField zero(int rows, int cols) {
        NormalField f;
        f.rows = rows;
        f.cols = cols;
        f.vectors = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(
            static_cast<Eigen::Index>(rows) * cols, 3);
        return f;
    }
};

/// Linear index of pixel (r, c) in an image with `rows` rows.
inline Eigen::Index pixel_index(int r, int c, int rows) {
    return static_cast<Eigen::Index>(c) * rows + r;
}

/// Patch window extent: wx rows by wy columns by wz channels.
struct Window {
    int wx = 8;
    int wy = 8;
    int wz = 3;

    int size() const { return wx * wy * wz; }
};

}  // namespace psdl
