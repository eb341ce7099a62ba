/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/surface.hpp
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

#include "psdl/types.hpp"

namespace psdl {

/**
 * Per-pixel surface slopes. p(r, c) is dz/dx (x along columns) and q(r, c)
 * is dz/dy (y along rows); `valid` marks pixels where the source normal had
 * a usable z component.
 */
struct GradientField {
    Matrix p;  // rows x cols
    Matrix q;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

/**
 * Height field recovered from gradients, in pixel units and defined up to an
 * additive constant (the output is centered to zero mean).
 */
struct HeightMap {
    Matrix heights;  // rows x cols
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

/**
 * Slopes from normals: p = -nx/nz, q = -ny/nz. Pixels with |nz| < 1e-3 get
 * zero slopes and an invalid mark, which keeps rim pixels from blowing up
 * the integration right-hand side.
 */
GradientField gradients_from_normals(const NormalField& normals);

/// Discrete forward differences of a height field, the exact inverse data
/// for integrate: p(r, c) = z(r, c+1) - z(r, c) (last column zero), same for
/// q along rows.
GradientField forward_gradients(const Matrix& heights);

/**
 * Least-squares integration of a gradient field under natural boundary
 * conditions, solved in a discrete cosine basis (O(N log N)).
 *
 * p(r, c) is taken as the slope between pixels (r, c) and (r, c+1), q(r, c)
 * between rows, so integrate(forward_gradients(z)) returns z up to an
 * additive constant at machine precision. The result has zero mean.
 */
HeightMap integrate(const GradientField& gradients);

}  // namespace psdl
