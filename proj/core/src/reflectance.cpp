/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/reflectance.cpp
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
#include "psdl/reflectance.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <stdexcept>

namespace psdl {

Vector make_breakpoints(const Vector& intensities, int segments) {
    if (segments < 1) {
        throw std::invalid_argument("make_breakpoints: need at least one segment");
    }
    double top = intensities.size() > 0 ? intensities.maxCoeff() : 0.0;
    if (top <= 0.0) {
        top = 1.0;  // all-zero pixel: unit-range fallback
    }
    Vector b(segments + 1);
    for (int k = 0; k <= segments; ++k) {
        b(k) = top * static_cast<double>(k) / segments;
    }
    return b;
}

Vector eval_basis(double t, const Vector& breakpoints) {
    const int p = static_cast<int>(breakpoints.size()) - 1;
    Vector g(p);
    for (int k = 1; k <= p; ++k) {
        const double lo = breakpoints(k - 1);
        const double hi = breakpoints(k);
        g(k - 1) = std::clamp(t, lo, hi) - lo;
    }
    return g;
}

Matrix build_C(const Vector& intensities, const Vector& breakpoints) {
    const int d = static_cast<int>(intensities.size());
    const int p = static_cast<int>(breakpoints.size()) - 1;
    Matrix C(d, p);
    for (int j = 0; j < d; ++j) {
        C.row(j) = eval_basis(intensities(j), breakpoints).transpose();
    }
    return C;
}

Vector update_slopes(const Matrix& C, const Vector& target, double gamma) {
    if (gamma <= 0.0) {
        throw std::invalid_argument("update_slopes: gamma must be positive");
    }
    const Eigen::Index d = C.rows();
    const Eigen::Index p = C.cols();
    Matrix stacked(d + 1, p);
    stacked.topRows(d) = C;
    stacked.row(d).setConstant(gamma);
    Vector rhs(d + 1);
    rhs.head(d) = target;
    rhs(d) = gamma;
    // Minimum-norm least-squares solve, equivalent to applying the
    // pseudoinverse of the stacked matrix.
    return stacked.completeOrthogonalDecomposition().solve(rhs);
}

Vector update_slopes(const Matrix& C, const LightMatrix& L,
                     const Eigen::Vector3d& normal, double gamma) {
    return update_slopes(C, Vector(L.transpose() * normal), gamma);
}

}  // namespace psdl
