/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/random.hpp
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
#include <random>

namespace psdl {

/**
 * Deterministic random stream for the noise injectors and synthetic data.
 *
 * Built on std::mt19937_64, whose output sequence is fixed by the standard,
 * with hand-rolled variate algorithms on top (the std distributions are
 * implementation-defined and would break seed reproducibility):
 *   - bounded integers by rejection sampling,
 *   - Poisson by Knuth inversion below mean 10 and by Hormann's PTRD
 *     transformed rejection above.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Substream constructor; mixes the parts with splitmix64 so that
    /// (seed, image_index) pairs never collide with plain seeds.
    Rng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform integer in [0, bound), bound >= 1. Rejection sampling, no
    /// modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound);

    bool coin_flip() { return (engine_() & 1u) != 0; }

    /// Poisson variate with the given mean (mean <= 0 yields 0).
    std::uint64_t poisson(double mean);

  private:
    std::mt19937_64 engine_;
};

}  // namespace psdl
