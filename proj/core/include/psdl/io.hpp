/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/include/psdl/io.hpp
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

#include <optional>
#include <string>
#include <vector>

#include "psdl/dictlearn.hpp"
#include "psdl/evaluation.hpp"
#include "psdl/solvers.hpp"
#include "psdl/surface.hpp"
#include "psdl/types.hpp"

namespace psdl {

/*
 * File formats
 * ------------
 * PFM (portable float map): header "PF\n<width> <height>\n-1.0\n" for three
 * channels or "Pf\n..." for one, then float32 scanlines bottom-to-top,
 * little-endian (negative scale). Readers also accept big-endian files and
 * honor the scale magnitude.
 *
 * Dictionary container: the 8 magic bytes "PSDLDICT", four little-endian
 * uint32 values wx, wy, wz, K, then wx*wy*wz*K little-endian float64 atom
 * entries in column-major order.
 *
 * Dataset directory: filenames.txt (one image per line),
 * light_directions.txt (d rows of 3 floats), optional light_intensities.txt
 * (d rows of 1 or 3 floats), optional mask.png, optional normal_gt.pfm.
 */

/// Decoded float image, channels interleaved per pixel, rows top-to-bottom.
struct FloatImage {
    int rows = 0;
    int cols = 0;
    int channels = 1;  // 1 or 3
    std::vector<float> data;  // rows*cols*channels

    float at(int r, int c, int ch) const {
        return data[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
};

FloatImage load_pfm(const std::string& path);
void save_pfm(const std::string& path, const FloatImage& image);

/// Lossless normal-map round trip through 3-channel float32 PFM.
void save_normal_map(const NormalField& normals, const std::string& path);
NormalField load_normal_map(const std::string& path);

/**
 * 8-bit PNG visualization of a normal field: components in [-1, 1] map
 * linearly to [0, 255]. When `normalize` is set (default) each nonzero
 * vector is scaled to unit length first; zero vectors render mid-gray.
 */
void save_normal_png(const NormalField& normals, const std::string& path,
                     bool normalize = true);

/// Grayscale image in [0, 1] from an 8/16-bit PNG or a PFM; color inputs are
/// reduced with the fixed luminance weights 0.2989 / 0.5870 / 0.1140.
Matrix load_gray_image(const std::string& path);

/// Boolean mask from a PNG: true where the (first channel) value is nonzero.
PixelMask load_mask_png(const std::string& path, int rows, int cols);

/// Angular-error map as a 1-channel PFM in degrees (NaN where excluded).
void save_error_map_pfm(const std::string& path, const Vector& per_pixel_deg,
                        int rows, int cols);

/// Angular-error map as an 8-bit PNG with a fixed color scale clipped to
/// [0, max_deg] degrees; excluded pixels render black.
void save_error_map_png(const std::string& path, const Vector& per_pixel_deg,
                        int rows, int cols, double max_deg = 45.0);

void save_dictionary(const std::string& path, const Dictionary& dictionary,
                     const Window& window);
struct LoadedDictionary {
    Dictionary dictionary;
    Window window;
};
LoadedDictionary load_dictionary(const std::string& path);

/// Height map as a 1-channel PFM.
void save_height_pfm(const std::string& path, const HeightMap& map);

/// Height map as an ASCII OBJ grid mesh for quick visual inspection; faces
/// are emitted only where all four quad corners are valid.
void save_obj(const std::string& path, const HeightMap& map);

struct DatasetManifest {
    std::vector<std::string> image_paths;  // absolute or dataset-relative
    Matrix light_directions;               // d x 3
    std::optional<Matrix> light_intensities;  // d x 1 or d x 3
    std::optional<std::string> mask_path;
    std::optional<std::string> gt_normals_path;
};

/// Reads and validates the manifest files of a dataset directory.
DatasetManifest read_manifest(const std::string& dir);

struct Dataset {
    Problem problem;
    std::optional<PixelMask> mask;
    std::optional<NormalField> gt_normals;
    std::string name;  // directory basename
};

/**
 * Loads a dataset directory into a solvable Problem: images are decoded,
 * reduced to grayscale, divided by the per-image light intensity when
 * intensities are provided, and stacked column-major into the observation
 * matrix; light direction columns are normalized to unit norm.
 */
Dataset load_dataset(const std::string& dir, const Window& window = Window{},
                     int stride = 4, int segments = 2);

/// Writes a synthetic scene as a dataset directory (PFM images plus
/// manifest, ground-truth normals, and mask) that load_dataset can read.
void save_dataset(const std::string& dir, const ImageStack& images,
                  const LightMatrix& lights,
                  const NormalField* gt_normals = nullptr,
                  const PixelMask* mask = nullptr);

struct SummaryRow {
    std::string dataset;
    std::string method;
    std::string params;
    double mean_deg = 0.0;
    double median_deg = 0.0;
    int excluded = 0;
};

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);

void write_cost_trace_csv(const std::string& path,
                          const std::vector<double>& cost,
                          const std::vector<double>& sparsity);

/// Whole file as a string; throws with the path on failure.
std::string read_text_file(const std::string& path);

}  // namespace psdl
