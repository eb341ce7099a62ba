/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: core/src/io.cpp
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
#include "psdl/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace psdl {

static_assert(std::endian::native == std::endian::little,
              "file formats are written in host order on little-endian hosts");

namespace {

constexpr double kLumaR = 0.2989;
constexpr double kLumaG = 0.5870;
constexpr double kLumaB = 0.1140;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

float byteswap_float(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    bits = ((bits & 0x000000ffu) << 24) | ((bits & 0x0000ff00u) << 8) |
           ((bits & 0x00ff0000u) >> 8) | ((bits & 0xff000000u) >> 24);
    std::memcpy(&f, &bits, sizeof(bits));
    return f;
}

struct PngCloser {
    std::FILE* file = nullptr;
    ~PngCloser() {
        if (file) std::fclose(file);
    }
};

// Decoded PNG, 8 or 16 bits, converted to interleaved doubles in [0, 1].
struct DecodedPng {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<double> data;
};

DecodedPng read_png(const std::string& path) {
    PngCloser closer;
    closer.file = std::fopen(path.c_str(), "rb");
    if (!closer.file) {
        fail(path, "cannot open file");
    }
    png_byte header[8];
    if (std::fread(header, 1, 8, closer.file) != 8 ||
        png_sig_cmp(header, 0, 8) != 0) {
        fail(path, "not a PNG file");
    }

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng initialization failed");
    }

    std::vector<png_byte> storage;
    std::vector<png_bytep> row_pointers;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "PNG decode error");
    }

    png_init_io(png, closer.file);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    if (png_get_bit_depth(png, info) == 16) {
        png_set_swap(png);  // PNG stores 16-bit samples big-endian
    }
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported PNG channel count");
    }

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    storage.resize(row_bytes * height);
    row_pointers.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        row_pointers[r] = storage.data() + row_bytes * r;
    }
    png_read_image(png, row_pointers.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    DecodedPng out;
    out.rows = static_cast<int>(height);
    out.cols = static_cast<int>(width);
    out.channels = channels;
    out.data.resize(static_cast<std::size_t>(out.rows) * out.cols * channels);
    const double scale = depth == 16 ? 65535.0 : 255.0;
    for (int r = 0; r < out.rows; ++r) {
        const png_bytep row = storage.data() + row_bytes * r;
        for (int c = 0; c < out.cols; ++c) {
            for (int ch = 0; ch < channels; ++ch) {
                double v;
                if (depth == 16) {
                    std::uint16_t raw;
                    std::memcpy(&raw, row + 2 * (c * channels + ch), 2);
                    v = raw;
                } else {
                    v = row[c * channels + ch];
                }
                out.data[(static_cast<std::size_t>(r) * out.cols + c) * channels +
                         ch] = v / scale;
            }
        }
    }
    return out;
}

void write_png8(const std::string& path, int rows, int cols, int channels,
                const std::vector<png_byte>& pixels) {
    PngCloser closer;
    closer.file = std::fopen(path.c_str(), "wb");
    if (!closer.file) {
        fail(path, "cannot open file for writing");
    }
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng initialization failed");
    }
    std::vector<png_bytep> row_pointers(rows);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG encode error");
    }
    png_init_io(png, closer.file);
    png_set_IHDR(png, info, cols, rows, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    for (int r = 0; r < rows; ++r) {
        row_pointers[r] = const_cast<png_bytep>(
            pixels.data() + static_cast<std::size_t>(r) * cols * channels);
    }
    png_set_rows(png, info, row_pointers.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

double luminance(double r, double g, double b) {
    return kLumaR * r + kLumaG * g + kLumaB * b;
}

Matrix gray_from_float_image(const FloatImage& image) {
    Matrix gray(image.rows, image.cols);
    for (int r = 0; r < image.rows; ++r) {
        for (int c = 0; c < image.cols; ++c) {
            if (image.channels == 1) {
                gray(r, c) = image.at(r, c, 0);
            } else {
                gray(r, c) = luminance(image.at(r, c, 0), image.at(r, c, 1),
                                       image.at(r, c, 2));
            }
        }
    }
    return gray;
}

bool has_suffix(const std::string& name, const std::string& suffix) {
    if (name.size() < suffix.size()) return false;
    std::string tail = name.substr(name.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    return tail == suffix;
}

Matrix read_numeric_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(path, "cannot open file");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) {
            row.push_back(v);
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) {
        fail(path, "no numeric rows");
    }
    const std::size_t width = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != width) {
            fail(path, "ragged rows");
        }
    }
    Matrix table(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            table(r, c) = rows[r][c];
        }
    }
    return table;
}

}  // namespace

FloatImage load_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "cannot open file");
    }
    std::string magic;
    int width = 0, height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0 ||
        scale == 0.0) {
        fail(path, "malformed PFM header");
    }
    in.get();  // single whitespace byte before the raster

    FloatImage image;
    image.rows = height;
    image.cols = width;
    image.channels = magic == "PF" ? 3 : 1;
    image.data.resize(static_cast<std::size_t>(width) * height * image.channels);

    const std::size_t row_floats =
        static_cast<std::size_t>(width) * image.channels;
    std::vector<float> row(row_floats);
    const bool file_big_endian = scale > 0.0;
    const float magnitude = static_cast<float>(std::abs(scale));
    // PFM scanlines run bottom-to-top.
    for (int r = height - 1; r >= 0; --r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row_floats * sizeof(float)));
        if (!in) {
            fail(path, "truncated PFM raster");
        }
        float* dst = image.data.data() + static_cast<std::size_t>(r) * row_floats;
        for (std::size_t i = 0; i < row_floats; ++i) {
            const float v = file_big_endian ? byteswap_float(row[i]) : row[i];
            dst[i] = magnitude == 1.0f ? v : v * magnitude;
        }
    }
    return image;
}

void save_pfm(const std::string& path, const FloatImage& image) {
    if (image.channels != 1 && image.channels != 3) {
        fail(path, "PFM supports 1 or 3 channels");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(path, "cannot open file for writing");
    }
    out << (image.channels == 3 ? "PF" : "Pf") << "\n"
        << image.cols << " " << image.rows << "\n"
        << "-1.0"
        << "\n";
    const std::size_t row_floats =
        static_cast<std::size_t>(image.cols) * image.channels;
    for (int r = image.rows - 1; r >= 0; --r) {
        out.write(reinterpret_cast<const char*>(
                      image.data.data() + static_cast<std::size_t>(r) * row_floats),
                  static_cast<std::streamsize>(row_floats * sizeof(float)));
    }
    if (!out) {
        fail(path, "write failed");
    }
}

void save_normal_map(const NormalField& normals, const std::string& path) {
    FloatImage image;
    image.rows = normals.rows;
    image.cols = normals.cols;
    image.channels = 3;
    image.data.resize(static_cast<std::size_t>(normals.rows) * normals.cols * 3);
    for (int r = 0; r < normals.rows; ++r) {
        for (int c = 0; c < normals.cols; ++c) {
            const Eigen::Index idx = pixel_index(r, c, normals.rows);
            for (int ch = 0; ch < 3; ++ch) {
                image.data[(static_cast<std::size_t>(r) * normals.cols + c) * 3 +
                           ch] = static_cast<float>(normals.vectors(idx, ch));
            }
        }
    }
    save_pfm(path, image);
}

NormalField load_normal_map(const std::string& path) {
    const FloatImage image = load_pfm(path);
    if (image.channels != 3) {
        fail(path, "normal map must be a 3-channel PFM");
    }
    NormalField field = NormalField::zero(image.rows, image.cols);
    for (int r = 0; r < image.rows; ++r) {
        for (int c = 0; c < image.cols; ++c) {
            const Eigen::Index idx = pixel_index(r, c, image.rows);
            for (int ch = 0; ch < 3; ++ch) {
                field.vectors(idx, ch) = image.at(r, c, ch);
            }
        }
    }
    return field;
}

void save_normal_png(const NormalField& normals, const std::string& path,
                     bool normalize) {
    std::vector<png_byte> pixels(
        static_cast<std::size_t>(normals.rows) * normals.cols * 3);
    for (int r = 0; r < normals.rows; ++r) {
        for (int c = 0; c < normals.cols; ++c) {
            Eigen::RowVector3d v =
                normals.vectors.row(pixel_index(r, c, normals.rows));
            if (normalize) {
                const double norm = v.norm();
                v = norm > 1e-12 ? Eigen::RowVector3d(v / norm)
                                 : Eigen::RowVector3d::Zero();
            }
            for (int ch = 0; ch < 3; ++ch) {
                const double mapped =
                    (std::clamp(v(ch), -1.0, 1.0) + 1.0) / 2.0 * 255.0;
                pixels[(static_cast<std::size_t>(r) * normals.cols + c) * 3 + ch] =
                    static_cast<png_byte>(std::lround(mapped));
            }
        }
    }
    write_png8(path, normals.rows, normals.cols, 3, pixels);
}

Matrix load_gray_image(const std::string& path) {
    if (has_suffix(path, ".pfm")) {
        return gray_from_float_image(load_pfm(path));
    }
    const DecodedPng png = read_png(path);
    Matrix gray(png.rows, png.cols);
    for (int r = 0; r < png.rows; ++r) {
        for (int c = 0; c < png.cols; ++c) {
            const std::size_t base =
                (static_cast<std::size_t>(r) * png.cols + c) * png.channels;
            gray(r, c) = png.channels == 1
                             ? png.data[base]
                             : luminance(png.data[base], png.data[base + 1],
                                         png.data[base + 2]);
        }
    }
    return gray;
}

PixelMask load_mask_png(const std::string& path, int rows, int cols) {
    const DecodedPng png = read_png(path);
    if (png.rows != rows || png.cols != cols) {
        fail(path, "mask size does not match the images");
    }
    PixelMask mask(static_cast<Eigen::Index>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::size_t base =
                (static_cast<std::size_t>(r) * cols + c) * png.channels;
            mask(pixel_index(r, c, rows)) = png.data[base] > 0.0;
        }
    }
    return mask;
}

void save_error_map_pfm(const std::string& path, const Vector& per_pixel_deg,
                        int rows, int cols) {
    FloatImage image;
    image.rows = rows;
    image.cols = cols;
    image.channels = 1;
    image.data.resize(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            image.data[static_cast<std::size_t>(r) * cols + c] =
                static_cast<float>(per_pixel_deg(pixel_index(r, c, rows)));
        }
    }
    save_pfm(path, image);
}

void save_error_map_png(const std::string& path, const Vector& per_pixel_deg,
                        int rows, int cols, double max_deg) {
    // Blue-to-red heat ramp over [0, max_deg]; excluded pixels stay black.
    std::vector<png_byte> pixels(static_cast<std::size_t>(rows) * cols * 3, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double deg = per_pixel_deg(pixel_index(r, c, rows));
            if (!std::isfinite(deg)) {
                continue;
            }
            const double t = std::clamp(deg / max_deg, 0.0, 1.0);
            const double red = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
            const double green =
                std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
            const double blue =
                std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
            const std::size_t base =
                (static_cast<std::size_t>(r) * cols + c) * 3;
            pixels[base] = static_cast<png_byte>(std::lround(red * 255.0));
            pixels[base + 1] = static_cast<png_byte>(std::lround(green * 255.0));
            pixels[base + 2] = static_cast<png_byte>(std::lround(blue * 255.0));
        }
    }
    write_png8(path, rows, cols, 3, pixels);
}

void save_dictionary(const std::string& path, const Dictionary& dictionary,
                     const Window& window) {
    if (dictionary.atoms.rows() != window.size()) {
        fail(path, "dictionary atoms do not match the window size");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(path, "cannot open file for writing");
    }
    out.write("PSDLDICT", 8);
    const std::uint32_t header[4] = {
        static_cast<std::uint32_t>(window.wx),
        static_cast<std::uint32_t>(window.wy),
        static_cast<std::uint32_t>(window.wz),
        static_cast<std::uint32_t>(dictionary.atom_count())};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(dictionary.atoms.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           dictionary.atoms.size()));
    if (!out) {
        fail(path, "write failed");
    }
}

LoadedDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "cannot open file");
    }
    char magic[8];
    std::uint32_t header[4];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || std::memcmp(magic, "PSDLDICT", 8) != 0) {
        fail(path, "not a dictionary file");
    }
    LoadedDictionary out;
    out.window = Window{static_cast<int>(header[0]), static_cast<int>(header[1]),
                        static_cast<int>(header[2])};
    const Eigen::Index size = out.window.size();
    const Eigen::Index atoms = static_cast<Eigen::Index>(header[3]);
    if (size <= 0 || atoms <= 0) {
        fail(path, "bad dictionary header");
    }
    out.dictionary.atoms.resize(size, atoms);
    in.read(reinterpret_cast<char*>(out.dictionary.atoms.data()),
            static_cast<std::streamsize>(sizeof(double) * size * atoms));
    if (!in) {
        fail(path, "truncated dictionary data");
    }
    return out;
}

void save_height_pfm(const std::string& path, const HeightMap& map) {
    FloatImage image;
    image.rows = static_cast<int>(map.heights.rows());
    image.cols = static_cast<int>(map.heights.cols());
    image.channels = 1;
    image.data.resize(static_cast<std::size_t>(image.rows) * image.cols);
    for (int r = 0; r < image.rows; ++r) {
        for (int c = 0; c < image.cols; ++c) {
            image.data[static_cast<std::size_t>(r) * image.cols + c] =
                static_cast<float>(map.heights(r, c));
        }
    }
    save_pfm(path, image);
}

void save_obj(const std::string& path, const HeightMap& map) {
    std::ofstream out(path);
    if (!out) {
        fail(path, "cannot open file for writing");
    }
    const int rows = static_cast<int>(map.heights.rows());
    const int cols = static_cast<int>(map.heights.cols());
    out << "# grid mesh " << cols << " x " << rows << "\n";
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out << "v " << c << " " << r << " " << map.heights(r, c) << "\n";
        }
    }
    auto vertex = [cols](int r, int c) { return r * cols + c + 1; };  // 1-based
    const bool has_mask = map.valid.rows() == rows && map.valid.cols() == cols;
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            if (has_mask && !(map.valid(r, c) && map.valid(r + 1, c) &&
                              map.valid(r, c + 1) && map.valid(r + 1, c + 1))) {
                continue;
            }
            out << "f " << vertex(r, c) << " " << vertex(r + 1, c) << " "
                << vertex(r, c + 1) << "\n";
            out << "f " << vertex(r + 1, c) << " " << vertex(r + 1, c + 1) << " "
                << vertex(r, c + 1) << "\n";
        }
    }
    if (!out) {
        fail(path, "write failed");
    }
}

DatasetManifest read_manifest(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    const fs::path names_path = base / "filenames.txt";
    const fs::path lights_path = base / "light_directions.txt";
    if (!fs::exists(names_path)) {
        fail(names_path.string(), "missing file");
    }
    if (!fs::exists(lights_path)) {
        fail(lights_path.string(), "missing file");
    }

    DatasetManifest manifest;
    {
        std::ifstream in(names_path);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
                line.pop_back();
            }
            if (!line.empty()) {
                manifest.image_paths.push_back((base / line).string());
            }
        }
    }
    if (manifest.image_paths.empty()) {
        fail(names_path.string(), "no image names listed");
    }

    manifest.light_directions = read_numeric_table(lights_path.string());
    if (manifest.light_directions.cols() != 3) {
        fail(lights_path.string(), "expected 3 values per row");
    }
    if (manifest.light_directions.rows() !=
        static_cast<Eigen::Index>(manifest.image_paths.size())) {
        fail(lights_path.string(),
             "light direction rows (" +
                 std::to_string(manifest.light_directions.rows()) +
                 ") do not match image count (" +
                 std::to_string(manifest.image_paths.size()) + ")");
    }

    const fs::path intensities_path = base / "light_intensities.txt";
    if (fs::exists(intensities_path)) {
        Matrix table = read_numeric_table(intensities_path.string());
        if (table.rows() != manifest.light_directions.rows() ||
            (table.cols() != 1 && table.cols() != 3)) {
            fail(intensities_path.string(),
                 "expected one row per image with 1 or 3 values");
        }
        manifest.light_intensities = std::move(table);
    }
    const fs::path mask_path = base / "mask.png";
    if (fs::exists(mask_path)) {
        manifest.mask_path = mask_path.string();
    }
    const fs::path gt_path = base / "normal_gt.pfm";
    if (fs::exists(gt_path)) {
        manifest.gt_normals_path = gt_path.string();
    }
    return manifest;
}

Dataset load_dataset(const std::string& dir, const Window& window, int stride,
                     int segments) {
    const DatasetManifest manifest = read_manifest(dir);
    const int d = static_cast<int>(manifest.image_paths.size());

    ImageStack stack;
    for (int k = 0; k < d; ++k) {
        const std::string& path = manifest.image_paths[k];
        Matrix gray;
        try {
            gray = load_gray_image(path);
        } catch (const std::exception& e) {
            throw std::runtime_error("load_dataset: cannot read image '" + path +
                                     "': " + e.what());
        }
        if (k == 0) {
            stack.rows = static_cast<int>(gray.rows());
            stack.cols = static_cast<int>(gray.cols());
            stack.values.resize(static_cast<Eigen::Index>(stack.rows) *
                                    stack.cols,
                                d);
        } else if (gray.rows() != stack.rows || gray.cols() != stack.cols) {
            throw std::runtime_error("load_dataset: image '" + path +
                                     "' has mismatched dimensions");
        }
        double intensity = 1.0;
        if (manifest.light_intensities) {
            const Matrix& table = *manifest.light_intensities;
            intensity = table.cols() == 1 ? table(k, 0)
                                          : luminance(table(k, 0), table(k, 1),
                                                      table(k, 2));
            if (intensity <= 0.0) {
                throw std::runtime_error(
                    "load_dataset: nonpositive light intensity for image '" +
                    path + "'");
            }
        }
        stack.values.col(k) =
            Eigen::Map<const Vector>(gray.data(), gray.size()) / intensity;
    }

    LightMatrix lights = manifest.light_directions.transpose();
    for (Eigen::Index k = 0; k < lights.cols(); ++k) {
        const double norm = lights.col(k).norm();
        if (norm <= 0.0) {
            throw std::runtime_error("load_dataset: zero light direction row " +
                                     std::to_string(k));
        }
        lights.col(k) /= norm;
    }

    Dataset dataset;
    dataset.name = std::filesystem::path(dir).filename().string();
    if (dataset.name.empty()) {
        dataset.name = dir;
    }
    const int rows = stack.rows;
    const int cols = stack.cols;
    dataset.problem =
        make_problem(std::move(stack), std::move(lights), window, stride,
                     segments);
    if (manifest.mask_path) {
        dataset.mask = load_mask_png(*manifest.mask_path, rows, cols);
    }
    if (manifest.gt_normals_path) {
        NormalField gt = load_normal_map(*manifest.gt_normals_path);
        if (gt.rows != rows || gt.cols != cols) {
            fail(*manifest.gt_normals_path,
                 "ground-truth size does not match the images");
        }
        dataset.gt_normals = std::move(gt);
    }
    return dataset;
}

void save_dataset(const std::string& dir, const ImageStack& images,
                  const LightMatrix& lights, const NormalField* gt_normals,
                  const PixelMask* mask) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);

    std::ofstream names(base / "filenames.txt");
    std::ofstream dirs(base / "light_directions.txt");
    if (!names || !dirs) {
        fail(dir, "cannot write manifest files");
    }
    dirs.precision(17);
    for (Eigen::Index k = 0; k < images.values.cols(); ++k) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "image_%03d.pfm", static_cast<int>(k));
        names << buf << "\n";
        dirs << lights(0, k) << " " << lights(1, k) << " " << lights(2, k)
             << "\n";

        FloatImage image;
        image.rows = images.rows;
        image.cols = images.cols;
        image.channels = 1;
        image.data.resize(static_cast<std::size_t>(images.rows) * images.cols);
        for (int r = 0; r < images.rows; ++r) {
            for (int c = 0; c < images.cols; ++c) {
                image.data[static_cast<std::size_t>(r) * images.cols + c] =
                    static_cast<float>(
                        images.values(pixel_index(r, c, images.rows), k));
            }
        }
        save_pfm((base / buf).string(), image);
    }
    if (gt_normals) {
        save_normal_map(*gt_normals, (base / "normal_gt.pfm").string());
    }
    if (mask) {
        std::vector<png_byte> pixels(
            static_cast<std::size_t>(images.rows) * images.cols);
        for (int r = 0; r < images.rows; ++r) {
            for (int c = 0; c < images.cols; ++c) {
                pixels[static_cast<std::size_t>(r) * images.cols + c] =
                    (*mask)(pixel_index(r, c, images.rows)) ? 255 : 0;
            }
        }
        write_png8((base / "mask.png").string(), images.rows, images.cols, 1,
                   pixels);
    }
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        fail(path, "cannot open file for writing");
    }
    out << "dataset,method,params,mean_deg,median_deg,excluded\n";
    out.precision(10);
    for (const auto& row : rows) {
        out << row.dataset << "," << row.method << "," << row.params << ","
            << row.mean_deg << "," << row.median_deg << "," << row.excluded
            << "\n";
    }
    if (!out) {
        fail(path, "write failed");
    }
}

void write_cost_trace_csv(const std::string& path,
                          const std::vector<double>& cost,
                          const std::vector<double>& sparsity) {
    std::ofstream out(path);
    if (!out) {
        fail(path, "cannot open file for writing");
    }
    out << "iter,cost,nonzero_fraction\n";
    out.precision(17);
    for (std::size_t i = 0; i < cost.size(); ++i) {
        out << i << "," << cost[i] << ",";
        if (i < sparsity.size()) {
            out << sparsity[i];
        } else {
            out << 0;
        }
        out << "\n";
    }
    if (!out) {
        fail(path, "write failed");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace psdl
