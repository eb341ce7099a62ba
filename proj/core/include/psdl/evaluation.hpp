/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/evaluation.hpp
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
#include <optional>
#include <vector>

#include "psdl/dictlearn.hpp"
#include "psdl/types.hpp"

namespace psdl {

/// Boolean pixel mask in the usual column-major pixel ordering.
using PixelMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/**
 * Angular-error statistics in degrees. Pixels whose estimated or true normal
 * has near-zero norm, or that fall outside the evaluation mask, are excluded
 * from the statistics and counted; their map entries are NaN.
 */
struct ErrorSummary {
    double mean_deg = 0.0;
    double median_deg = 0.0;  // midpoint average for even counts
    Vector per_pixel_deg;     // NaN where excluded
    int excluded_count = 0;
};

/**
 * Per-pixel angle between the unit-normalized estimate and truth,
 * arccos of the clamped inner product. Throws when every pixel is excluded.
 */
ErrorSummary angular_error(const NormalField& estimated,
                           const NormalField& truth,
                           const std::optional<PixelMask>& mask = std::nullopt);

/// Normalized sparse representation error ||P - D B||_F / ||P||_F.
/// Throws on an all-zero patch matrix.
double nsre(const Matrix& patches, const Dictionary& dictionary,
            const SparseCodes& codes);

/// Signal-to-noise ratio in dB between a clean stack and its corruption:
/// 10 log10(sum I^2 / sum (I_hat - I)^2). Identical stacks give +infinity.
double compute_snr(const ImageStack& clean, const ImageStack& noisy);

/**
 * Poisson corruption calibrated to a target SNR: each intensity I becomes
 * Poisson(s I)/s, with the scale s found by bisection against a fixed pilot
 * realization until the pilot lands within 0.25 dB of the target; a fresh
 * realization at that scale is returned. Deterministic in the seed, with one
 * substream per image. Throws when no scale in [1e-4, 1e8] reaches the
 * target. An all-zero stack is returned unchanged.
 */
ImageStack add_poisson_noise(const ImageStack& images, double target_snr_db,
                             std::uint64_t seed);

/// Sets exactly floor(fraction * entry_count) uniformly chosen entries of
/// the stack to 0 or 1 with equal probability. Deterministic in the seed.
ImageStack add_salt_pepper(const ImageStack& images, double fraction,
                           std::uint64_t seed);

struct SphereScene {
    ImageStack images;
    NormalField normals;  // albedo-scaled ground truth, zero outside the disk
    PixelMask mask;       // disk interior
};

/**
 * Synthetic Lambertian hemisphere on the unit disk: normals
 * (x, y, sqrt(1 - x^2 - y^2)) with x growing along columns and y along rows,
 * intensities max(0, albedo * l^T n) so attached shadows clamp to zero.
 * The optional albedo map is sampled per pixel (default 1 inside the disk).
 */
SphereScene render_sphere(int size, const LightMatrix& lights,
                          const Matrix* albedo_map = nullptr);

/// d random unit light directions in an upward cone (z >= min_z), for
/// synthetic experiments. Deterministic in the seed.
LightMatrix random_lights(int count, std::uint64_t seed, double min_z = 0.7);

}  // namespace psdl
