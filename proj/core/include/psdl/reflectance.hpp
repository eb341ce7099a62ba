/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/reflectance.hpp
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
 * Piecewise-linear inverse reflectance, one model per pixel.
 *
 * Each pixel gets p linear segments between breakpoints b0 < b1 < ... < bp
 * (b0 = 0) in intensity units, with slopes a1..ap. With all slopes equal the
 * map reduces to a clipped identity, so p = 1 recovers the Lambertian model.
 */
struct PiecewiseReflectance {
    int segments = 1;                                   // p
    Matrix breakpoints;  // pixel_count x (p+1), row-wise increasing, col 0 = 0
    Matrix slopes;       // pixel_count x p
};

/**
 * Breakpoints for one pixel: b0 = 0, then p equally spaced values ending at
 * the pixel's maximum observed intensity. An all-zero pixel falls back to the
 * unit range [0, 1] so downstream solves stay finite.
 */
Vector make_breakpoints(const Vector& intensities, int segments);

/// The p segment basis responses at intensity t: component k rises linearly
/// from breakpoint k-1 to k and saturates above, so the components are
/// nonnegative, nondecreasing in t, and sum to min(t, b_p).
Vector eval_basis(double t, const Vector& breakpoints);

/// Stacks eval_basis over the d observed intensities into a d x p matrix.
Matrix build_C(const Vector& intensities, const Vector& breakpoints);

/**
 * Closed-form slope update: the minimum-norm least-squares solution of the
 * stacked system [C; gamma*1^T] a = [target; gamma], which minimizes
 * ||C a - target||^2 + gamma^2 (1^T a - 1)^2. Rank deficiency is handled by
 * the pseudoinverse.
 */
Vector update_slopes(const Matrix& C, const Vector& target, double gamma);

/// Convenience overload with target = L^T n for the pixel's normal.
Vector update_slopes(const Matrix& C, const LightMatrix& L,
                     const Eigen::Vector3d& normal, double gamma);

}  // namespace psdl
