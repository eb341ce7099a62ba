/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/patch.cpp
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
#include "psdl/patch.hpp"

#include <stdexcept>
#include <string>

namespace psdl {

namespace {

// Origins {0, s, 2s, ...} with the final origin clamped to extent-window so
// the border stays covered. The last stride position is shifted when its
// predecessor still covers the gap, which keeps consecutive origins at least
// a stride apart; otherwise the border origin is appended.
std::vector<int> axis_origins(int extent, int window, int stride) {
    std::vector<int> starts;
    for (int pos = 0; pos + window <= extent; pos += stride) {
        starts.push_back(pos);
    }
    const int border = extent - window;
    if (starts.back() != border) {
        if (starts.size() >= 2 && starts[starts.size() - 2] + window >= border) {
            starts.back() = border;
        } else {
            starts.push_back(border);
        }
    }
    return starts;
}

void check_field(const PatchGrid& grid, const NormalField& field) {
    if (field.rows != grid.rows || field.cols != grid.cols ||
        field.vectors.rows() != static_cast<Eigen::Index>(grid.rows) * grid.cols) {
        throw std::invalid_argument("patch: field dimensions do not match grid");
    }
}

}  // namespace

PatchGrid build_grid(int rows, int cols, const Window& window, int stride_x,
                     int stride_y) {
    if (window.wz != 3) {
        throw std::invalid_argument("build_grid: window must have 3 channels");
    }
    if (window.wx < 1 || window.wy < 1 || stride_x < 1 || stride_y < 1) {
        throw std::invalid_argument("build_grid: window and stride must be positive");
    }
    if (stride_x > window.wx || stride_y > window.wy) {
        throw std::invalid_argument(
            "build_grid: stride larger than the window leaves pixels uncovered");
    }
    if (window.wx > rows || window.wy > cols) {
        throw std::invalid_argument(
            "build_grid: window (" + std::to_string(window.wx) + "x" +
            std::to_string(window.wy) + ") larger than image (" +
            std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }

    PatchGrid grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.window = window;
    grid.stride_x = stride_x;
    grid.stride_y = stride_y;

    const auto row_starts = axis_origins(rows, window.wx, stride_x);
    const auto col_starts = axis_origins(cols, window.wy, stride_y);
    grid.origins.reserve(row_starts.size() * col_starts.size());
    for (int r0 : row_starts) {
        for (int c0 : col_starts) {
            grid.origins.emplace_back(r0, c0);
        }
    }
    return grid;
}

Matrix extract(const PatchGrid& grid, const NormalField& field) {
    check_field(grid, field);
    const Window& w = grid.window;
    Matrix patches(w.size(), grid.patch_count());
    for (int j = 0; j < grid.patch_count(); ++j) {
        const auto [r0, c0] = grid.origins[j];
        Eigen::Index out = 0;
        for (int ch = 0; ch < w.wz; ++ch) {
            for (int c = 0; c < w.wy; ++c) {
                for (int r = 0; r < w.wx; ++r) {
                    patches(out++, j) =
                        field.vectors(pixel_index(r0 + r, c0 + c, grid.rows), ch);
                }
            }
        }
    }
    return patches;
}

NormalField adjoint_accumulate(const PatchGrid& grid, const Matrix& patches) {
    const Window& w = grid.window;
    if (patches.rows() != w.size() || patches.cols() != grid.patch_count()) {
        throw std::invalid_argument(
            "adjoint_accumulate: patch matrix does not match grid");
    }
    NormalField field = NormalField::zero(grid.rows, grid.cols);
    for (int j = 0; j < grid.patch_count(); ++j) {
        const auto [r0, c0] = grid.origins[j];
        Eigen::Index in = 0;
        for (int ch = 0; ch < w.wz; ++ch) {
            for (int c = 0; c < w.wy; ++c) {
                for (int r = 0; r < w.wx; ++r) {
                    field.vectors(pixel_index(r0 + r, c0 + c, grid.rows), ch) +=
                        patches(in++, j);
                }
            }
        }
    }
    return field;
}

NormalField coverage(const PatchGrid& grid) {
    NormalField counts = NormalField::zero(grid.rows, grid.cols);
    for (const auto& [r0, c0] : grid.origins) {
        for (int c = 0; c < grid.window.wy; ++c) {
            for (int r = 0; r < grid.window.wx; ++r) {
                counts.vectors.row(pixel_index(r0 + r, c0 + c, grid.rows))
                    .array() += 1.0;
            }
        }
    }
    return counts;
}

}  // namespace psdl
