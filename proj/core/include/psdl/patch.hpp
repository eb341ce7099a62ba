/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/patch.hpp
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

#include <utility>
#include <vector>

#include "psdl/types.hpp"

namespace psdl {

/**
 * Sliding-window layout over a rows x cols x 3 normal field.
 *
 * Origins are the top-left corners of the windows, ordered row-major and
 * guaranteed to cover every pixel: the stride pattern {0, s, 2s, ...} is
 * clamped so the final origin along each axis is exactly rows-wx
 * (resp. cols-wy) whenever plain striding would leave a border uncovered.
 * No pixel-channel sits under more than ceil(wx/sx)*ceil(wy/sy) windows.
 */
struct PatchGrid {
    int rows = 0;
    int cols = 0;
    Window window;
    int stride_x = 4;  // step between origin rows
    int stride_y = 4;  // step between origin columns
    std::vector<std::pair<int, int>> origins;  // (row, col), row-major order

    int patch_count() const { return static_cast<int>(origins.size()); }
};

/// Builds the clamped-stride grid. Throws std::invalid_argument when the
/// window does not fit inside the image or the stride/channel counts are bad.
PatchGrid build_grid(int rows, int cols, const Window& window, int stride_x,
                     int stride_y);

inline PatchGrid build_grid(int rows, int cols, const Window& window,
                            int stride) {
    return build_grid(rows, cols, window, stride, stride);
}

/**
 * Gathers every window of `field` into the columns of a
 * (wx*wy*wz) x patch_count matrix. Within a column the entries run over
 * window rows first, then window columns, then channels, so column j equals
 * the vectorized wx x wy x 3 block at origin j.
 */
Matrix extract(const PatchGrid& grid, const NormalField& field);

/**
 * Adjoint of extract: scatter-adds each column of `patches` back to field
 * coordinates and returns the sum over all windows.
 */
NormalField adjoint_accumulate(const PatchGrid& grid, const Matrix& patches);

/// Number of windows covering each pixel-channel, i.e. the diagonal of the
/// accumulated extract-adjoint operator. Strictly positive on a valid grid.
NormalField coverage(const PatchGrid& grid);

}  // namespace psdl
