/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/evaluation.cpp
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
#include "psdl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "psdl/random.hpp"

namespace psdl {

namespace {

constexpr double kZeroNormTolerance = 1e-8;

double median_of_sorted(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// One fixed substream per image; `phase` separates the pilot draws used
// during calibration from the returned realization.
Matrix poisson_realization(const Matrix& clean, double scale,
                           std::uint64_t seed, std::uint64_t phase) {
    Matrix noisy(clean.rows(), clean.cols());
    for (Eigen::Index k = 0; k < clean.cols(); ++k) {
        Rng rng(seed, 2 * static_cast<std::uint64_t>(k) + phase);
        for (Eigen::Index i = 0; i < clean.rows(); ++i) {
            noisy(i, k) =
                static_cast<double>(rng.poisson(scale * clean(i, k))) / scale;
        }
    }
    return noisy;
}

double snr_db(const Matrix& clean, const Matrix& noisy) {
    const double signal = clean.squaredNorm();
    const double noise = (noisy - clean).squaredNorm();
    if (noise == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(signal / noise);
}

}  // namespace

ErrorSummary angular_error(const NormalField& estimated,
                           const NormalField& truth,
                           const std::optional<PixelMask>& mask) {
    if (estimated.vectors.rows() != truth.vectors.rows()) {
        throw std::invalid_argument("angular_error: field sizes differ");
    }
    if (mask && mask->size() != estimated.vectors.rows()) {
        throw std::invalid_argument("angular_error: mask size mismatch");
    }

    const Eigen::Index pixels = estimated.vectors.rows();
    ErrorSummary summary;
    summary.per_pixel_deg =
        Vector::Constant(pixels, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> kept;
    kept.reserve(pixels);

    for (Eigen::Index i = 0; i < pixels; ++i) {
        if (mask && !(*mask)(i)) {
            ++summary.excluded_count;
            continue;
        }
        const Eigen::RowVector3d a = estimated.vectors.row(i);
        const Eigen::RowVector3d b = truth.vectors.row(i);
        const double na = a.norm();
        const double nb = b.norm();
        if (na < kZeroNormTolerance || nb < kZeroNormTolerance) {
            ++summary.excluded_count;
            continue;
        }
        const double cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
        const double deg = std::acos(cosine) * 180.0 / M_PI;
        summary.per_pixel_deg(i) = deg;
        kept.push_back(deg);
    }

    if (kept.empty()) {
        throw std::runtime_error("angular_error: every pixel was excluded");
    }
    summary.mean_deg = 0.0;
    for (double v : kept) summary.mean_deg += v;
    summary.mean_deg /= static_cast<double>(kept.size());
    summary.median_deg = median_of_sorted(kept);
    return summary;
}

double nsre(const Matrix& patches, const Dictionary& dictionary,
            const SparseCodes& codes) {
    const double denom = patches.norm();
    if (denom == 0.0) {
        throw std::invalid_argument("nsre: zero patch matrix");
    }
    return (patches - dictionary.atoms * codes.codes).norm() / denom;
}

double compute_snr(const ImageStack& clean, const ImageStack& noisy) {
    if (clean.values.rows() != noisy.values.rows() ||
        clean.values.cols() != noisy.values.cols()) {
        throw std::invalid_argument("compute_snr: stack sizes differ");
    }
    return snr_db(clean.values, noisy.values);
}

ImageStack add_poisson_noise(const ImageStack& images, double target_snr_db,
                             std::uint64_t seed) {
    if (images.values.minCoeff() < 0.0) {
        throw std::invalid_argument("add_poisson_noise: negative intensities");
    }
    if (!std::isfinite(target_snr_db)) {
        throw std::invalid_argument("add_poisson_noise: target must be finite");
    }
    const double signal = images.values.squaredNorm();
    if (signal == 0.0) {
        return images;  // Poisson(0) is identically zero
    }

    constexpr double kScaleLo = 1e-4;
    constexpr double kScaleHi = 1e8;
    constexpr double kTolDb = 0.25;

    auto pilot_snr = [&](double scale) {
        return snr_db(images.values,
                      poisson_realization(images.values, scale, seed, 0));
    };

    // The expected noise power is sum(I)/s, so this lands near the target
    // before bisection refines against the pilot realization.
    const double mean_power = images.values.sum();
    double guess = mean_power / signal * std::pow(10.0, target_snr_db / 10.0);
    guess = std::clamp(guess, kScaleLo, kScaleHi);

    double lo = kScaleLo;
    double hi = kScaleHi;
    double scale = guess;
    double achieved = pilot_snr(scale);
    if (achieved < target_snr_db) {
        lo = scale;
    } else {
        hi = scale;
    }
    for (int it = 0; it < 80 && std::abs(achieved - target_snr_db) > kTolDb;
         ++it) {
        scale = std::sqrt(lo * hi);  // geometric midpoint
        achieved = pilot_snr(scale);
        if (achieved < target_snr_db) {
            lo = scale;
        } else {
            hi = scale;
        }
        if (hi / lo < 1.0 + 1e-12) {
            break;
        }
    }
    if (std::abs(achieved - target_snr_db) > kTolDb) {
        throw std::runtime_error(
            "add_poisson_noise: target SNR unreachable within scale bounds");
    }

    ImageStack noisy = images;
    noisy.values = poisson_realization(images.values, scale, seed, 1);
    return noisy;
}

ImageStack add_salt_pepper(const ImageStack& images, double fraction,
                           std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw std::invalid_argument("add_salt_pepper: fraction outside [0, 1]");
    }
    const std::uint64_t total = static_cast<std::uint64_t>(images.values.size());
    const std::uint64_t hits =
        static_cast<std::uint64_t>(fraction * static_cast<double>(total));

    ImageStack noisy = images;
    if (hits == 0) {
        return noisy;
    }
    // Partial Fisher-Yates: the first `hits` slots end up holding a uniform
    // sample of distinct entry indices.
    std::vector<std::uint64_t> indices(total);
    for (std::uint64_t i = 0; i < total; ++i) indices[i] = i;
    Rng rng(seed, 0x5a17);
    double* data = noisy.values.data();
    for (std::uint64_t i = 0; i < hits; ++i) {
        const std::uint64_t j = i + rng.uniform_below(total - i);
        std::swap(indices[i], indices[j]);
        data[indices[i]] = rng.coin_flip() ? 1.0 : 0.0;
    }
    return noisy;
}

SphereScene render_sphere(int size, const LightMatrix& lights,
                          const Matrix* albedo_map) {
    if (size < 16) {
        throw std::invalid_argument("render_sphere: size must be >= 16");
    }
    if (lights.cols() < 3) {
        throw std::invalid_argument("render_sphere: need at least 3 lights");
    }
    if (albedo_map &&
        (albedo_map->rows() != size || albedo_map->cols() != size)) {
        throw std::invalid_argument("render_sphere: albedo map size mismatch");
    }

    SphereScene scene;
    scene.normals = NormalField::zero(size, size);
    scene.mask = PixelMask::Constant(static_cast<Eigen::Index>(size) * size,
                                     false);
    scene.images.rows = size;
    scene.images.cols = size;
    scene.images.values =
        Matrix::Zero(static_cast<Eigen::Index>(size) * size, lights.cols());

    for (int c = 0; c < size; ++c) {
        const double x = (2.0 * c + 1.0 - size) / size;
        for (int r = 0; r < size; ++r) {
            const double y = (2.0 * r + 1.0 - size) / size;
            const double rr = x * x + y * y;
            if (rr >= 1.0) {
                continue;
            }
            const Eigen::Index idx = pixel_index(r, c, size);
            const double albedo = albedo_map ? (*albedo_map)(r, c) : 1.0;
            const Eigen::Vector3d n(x, y, std::sqrt(1.0 - rr));
            scene.mask(idx) = true;
            scene.normals.vectors.row(idx) = albedo * n.transpose();
            for (Eigen::Index k = 0; k < lights.cols(); ++k) {
                scene.images.values(idx, k) =
                    std::max(0.0, albedo * lights.col(k).dot(n));
            }
        }
    }
    return scene;
}

LightMatrix random_lights(int count, std::uint64_t seed, double min_z) {
    if (count < 1 || min_z <= -1.0 || min_z >= 1.0) {
        throw std::invalid_argument("random_lights: bad arguments");
    }
    Rng rng(seed, 0x11a7);
    LightMatrix lights(3, count);
    for (int k = 0; k < count; ++k) {
        // Uniform on the spherical cap z >= min_z.
        const double z = min_z + (1.0 - min_z) * rng.uniform();
        const double phi = 2.0 * M_PI * rng.uniform();
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        lights.col(k) = Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), z);
        lights.col(k).normalize();
    }
    return lights;
}

}  // namespace psdl
