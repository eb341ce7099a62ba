#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "psdl/io.hpp"

using namespace psdl;

namespace {

std::string temp_path(const std::string& name) {
    const auto dir =
        std::filesystem::temp_directory_path() / "psdl_io_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

NormalField random_normals(int rows, int cols, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    NormalField f = NormalField::zero(rows, cols);
    for (Eigen::Index i = 0; i < f.vectors.size(); ++i) {
        // float32-representable values round-trip losslessly through PFM
        f.vectors.data()[i] = static_cast<double>(dist(gen));
    }
    return f;
}

}  // namespace

TEST_CASE("pfm round trip") {
    SUBCASE("normal maps survive save/load bit-exactly") {
        const NormalField field = random_normals(7, 5, 3);
        const std::string path = temp_path("roundtrip.pfm");
        save_normal_map(field, path);
        const NormalField loaded = load_normal_map(path);
        CHECK(loaded.rows == 7);
        CHECK(loaded.cols == 5);
        CHECK((loaded.vectors - field.vectors).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("header bytes and payload size are pinned") {
        const NormalField field = random_normals(4, 4, 9);
        const std::string path = temp_path("header.pfm");
        save_normal_map(field, path);

        std::ifstream in(path, std::ios::binary);
        std::string contents((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
        const std::string header = "PF\n4 4\n-1.0\n";
        REQUIRE(contents.size() == header.size() + 192);
        CHECK(contents.compare(0, header.size(), header) == 0);
    }

    SUBCASE("single-channel maps round trip too") {
        FloatImage image;
        image.rows = 3;
        image.cols = 6;
        image.channels = 1;
        image.data = {1.f, 2.f,  3.f,  4.f,  5.f,  6.f,  7.f,  8.f,  9.f,
                      10.f, 11.f, 12.f, 13.f, 14.f, 15.f, 16.f, 17.f, 18.f};
        const std::string path = temp_path("gray.pfm");
        save_pfm(path, image);
        const FloatImage loaded = load_pfm(path);
        CHECK(loaded.channels == 1);
        CHECK(loaded.rows == 3);
        CHECK(loaded.cols == 6);
        CHECK(loaded.data == image.data);
    }

    SUBCASE("malformed headers are rejected") {
        const std::string path = temp_path("bad.pfm");
        std::ofstream out(path, std::ios::binary);
        out << "PX\n4 4\n-1.0\n";
        out.close();
        CHECK_THROWS(load_pfm(path));
        CHECK_THROWS(load_pfm(temp_path("missing.pfm")));
    }
}

TEST_CASE("normal map png visualization") {
    NormalField field = NormalField::zero(2, 2);
    field.vectors.col(2).setOnes();
    const std::string path = temp_path("viz.png");
    save_normal_png(field, path);

    const Matrix gray = load_gray_image(path);
    // (0,0,1) maps to RGB (128,128,255); the luminance of that color:
    const double expected =
        (0.2989 * 128 + 0.5870 * 128 + 0.1140 * 255) / 255.0;
    CHECK(gray(0, 0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("png round trip through the gray loader") {
    // Write a known viz PNG, read it back through the 8-bit path.
    NormalField field = NormalField::zero(3, 4);
    for (Eigen::Index i = 0; i < field.vectors.rows(); ++i) {
        field.vectors(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 11.0;
        field.vectors(i, 2) = 1.0;
    }
    const std::string path = temp_path("gray_loader.png");
    save_normal_png(field, path, false);
    const Matrix gray = load_gray_image(path);
    CHECK(gray.rows() == 3);
    CHECK(gray.cols() == 4);
    CHECK(gray.minCoeff() >= 0.0);
    CHECK(gray.maxCoeff() <= 1.0);
}

TEST_CASE("error maps") {
    Vector errors(6);
    errors << 0.0, 10.0, 20.0, 45.0, 90.0,
        std::numeric_limits<double>::quiet_NaN();

    const std::string pfm_path = temp_path("errors.pfm");
    save_error_map_pfm(pfm_path, errors, 3, 2);
    const FloatImage loaded = load_pfm(pfm_path);
    CHECK(loaded.channels == 1);
    CHECK(loaded.at(0, 0, 0) == 0.0f);
    CHECK(loaded.at(1, 0, 0) == 10.0f);
    CHECK(std::isnan(loaded.at(2, 1, 0)));

    const std::string png_path = temp_path("errors.png");
    save_error_map_png(png_path, errors, 3, 2);
    CHECK(std::filesystem::file_size(png_path) > 0);
}

TEST_CASE("dictionary serialization") {
    const Window window{3, 2, 3};
    const Dictionary dict = dct_dictionary(window, 18);
    const std::string path = temp_path("atoms.dict");
    save_dictionary(path, dict, window);
    const LoadedDictionary loaded = load_dictionary(path);
    CHECK(loaded.window.wx == 3);
    CHECK(loaded.window.wy == 2);
    CHECK(loaded.window.wz == 3);
    CHECK((loaded.dictionary.atoms - dict.atoms).cwiseAbs().maxCoeff() == 0.0);

    SUBCASE("bad magic rejected") {
        std::ofstream out(path, std::ios::binary);
        out << "NOTADICT00000000000000000000";
        out.close();
        CHECK_THROWS(load_dictionary(path));
    }
}

TEST_CASE("obj export") {
    HeightMap map;
    map.heights = Matrix::Zero(3, 3);
    map.heights(1, 1) = 2.5;
    map.valid.setConstant(3, 3, true);
    map.valid(0, 0) = false;
    const std::string path = temp_path("surface.obj");
    save_obj(path, map);

    std::ifstream in(path);
    std::string line;
    int vertices = 0, faces = 0;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++vertices;
        if (line.rfind("f ", 0) == 0) ++faces;
    }
    CHECK(vertices == 9);
    CHECK(faces == 6);  // one quad dropped by the invalid corner
}

TEST_CASE("dataset loading") {
    const std::string fixture = std::string(PSDL_FIXTURE_DIR) + "/toy";

    SUBCASE("toy fixture loads with documented values") {
        const Dataset dataset = load_dataset(fixture, Window{4, 4, 3}, 4);
        const Problem& problem = dataset.problem;
        CHECK(problem.images.rows == 4);
        CHECK(problem.images.cols == 4);
        CHECK(problem.images.image_count() == 3);

        // The fixture images follow im0 = (r+c)/8, im1 = r*c/16,
        // im2 = (r+2c+1)/16; Y stacks pixels column-major.
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                const Eigen::Index idx = pixel_index(r, c, 4);
                CHECK(problem.images.values(idx, 0) == (r + c) / 8.0);
                CHECK(problem.images.values(idx, 1) == (r * c) / 16.0);
                CHECK(problem.images.values(idx, 2) == (r + 2 * c + 1) / 16.0);
            }
        }

        // Axis-aligned lights stay unit after normalization.
        CHECK((problem.lights - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() ==
              0.0);

        REQUIRE(dataset.mask.has_value());
        CHECK(dataset.mask->count() == 15);  // one pixel masked out
        CHECK(dataset.gt_normals.has_value());
    }

    SUBCASE("missing manifest entries fail with the file named") {
        CHECK_THROWS_WITH_AS(load_dataset(fixture + "_nonexistent"),
                             doctest::Contains("filenames.txt"),
                             std::runtime_error);
    }

    SUBCASE("light row count must match the image count") {
        namespace fs = std::filesystem;
        const std::string broken = temp_path("broken_dataset");
        fs::create_directories(broken);
        fs::copy(fixture, broken,
                 fs::copy_options::overwrite_existing |
                     fs::copy_options::recursive);
        std::ofstream lights(broken + "/light_directions.txt");
        lights << "0 0 1\n1 0 0\n";
        lights.close();
        CHECK_THROWS_WITH_AS(load_dataset(broken),
                             doctest::Contains("light_directions"),
                             std::runtime_error);
        fs::remove_all(broken);
    }
}

TEST_CASE("summary csv") {
    const std::string path = temp_path("summary.csv");
    write_summary_csv(path, {SummaryRow{"toy", "ls", "", 1.25, 0.5, 3},
                             SummaryRow{"toy", "pdlnv", "lambda=0.1;mu=0.01",
                                        2.0, 1.0, 0}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "dataset,method,params,mean_deg,median_deg,excluded");
    std::getline(in, line);
    CHECK(line == "toy,ls,,1.25,0.5,3");
    std::getline(in, line);
    CHECK(line == "toy,pdlnv,lambda=0.1;mu=0.01,2,1,0");
}
