/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/random.cpp
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
#include "psdl/random.hpp"

#include <cmath>

namespace psdl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ (stream + 0x632be59bd9b4e019ULL))) {}

double Rng::uniform() {
    // 53 random bits into [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean > 0.0)) {
        return 0;
    }
    if (mean < 10.0) {
        // Knuth inversion: multiply uniforms until the product drops below
        // exp(-mean).
        const double threshold = std::exp(-mean);
        std::uint64_t k = 0;
        double product = uniform();
        while (product > threshold) {
            ++k;
            product *= uniform();
        }
        return k;
    }

    // PTRD: transformed rejection with squeeze (Hormann 1993), exact for
    // mean >= 10.
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);

    for (;;) {
        double v = uniform();
        double u;
        if (v <= 0.86 * v_r) {
            u = v / v_r - 0.43;
            return static_cast<std::uint64_t>(
                std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + mean + 0.445));
        }
        if (v >= v_r) {
            u = uniform() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0.0 ? -0.5 : 0.5) - u;
            v = uniform() * v_r;
        }
        const double us = 0.5 - std::abs(u);
        if (us < 0.013 && v > us) {
            continue;
        }
        const double k =
            std::floor((2.0 * a / us + b) * u + mean + 0.445);
        v = v * inv_alpha / (a / (us * us) + b);
        if (k >= 10.0) {
            if (std::log(v * smu) <=
                (k + 0.5) * std::log(mean / k) - mean -
                    0.5 * std::log(2.0 * M_PI) + k -
                    (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k) {
                return static_cast<std::uint64_t>(k);
            }
        } else if (k >= 0.0) {
            // Small-k branch: exact log factorial.
            static const double log_fact[10] = {
                0.0,
                0.0,
                0.6931471805599453,
                1.791759469228055,
                3.1780538303479458,
                4.787491742782046,
                6.579251212010101,
                8.525161361065415,
                10.604602902745251,
                12.801827480081469};
            if (std::log(v) <= k * log_mean - mean - log_fact[static_cast<int>(k)]) {
                return static_cast<std::uint64_t>(k);
            }
        }
    }
}

}  // namespace psdl
