#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "hfseg/image.hpp"
#include "oracles.hpp"

using namespace hfseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "hfseg_image_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("load_cube round trip and size checks") {
    const fs::path dir = temp_dir();
    CubeLayout layout;
    layout.width = 4;
    layout.height = 5;
    layout.n_bscans = 3;

    SUBCASE("expected byte count for the default Cirrus geometry") {
        CHECK(CubeLayout{}.expected_bytes() == 67108864ULL); // 512*1024*128
    }

    SUBCASE("valid file loads with byte-exact intensities and order") {
        const fs::path path = dir / "small.raw";
        std::vector<uint8_t> bytes(layout.expected_bytes());
        for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<uint8_t>(i * 7 % 256);
        std::ofstream(path, std::ios::binary)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());

        const Cube cube = load_cube(path.string(), layout);
        REQUIRE(cube.bscans.size() == 3);
        CHECK(cube.bscans[0].width == 4);
        CHECK(cube.bscans[0].height == 5);
        size_t idx = 0;
        for (const auto& b : cube.bscans)
            for (double v : b.data) CHECK(v == bytes[idx++]);

        // save o load round trip is byte identical
        const fs::path out = dir / "rt.raw";
        save_cube(out.string(), cube);
        std::ifstream in1(path, std::ios::binary), in2(out, std::ios::binary);
        std::vector<char> a((std::istreambuf_iterator<char>(in1)), {});
        std::vector<char> b((std::istreambuf_iterator<char>(in2)), {});
        CHECK(a == b);
    }

    SUBCASE("size mismatch names expected and actual byte counts") {
        const fs::path path = dir / "short.raw";
        std::ofstream(path, std::ios::binary).write("xy", 2);
        CHECK_THROWS_AS(load_cube(path.string(), layout), DimensionError);
        try {
            load_cube(path.string(), layout);
        } catch (const DimensionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("60") != std::string::npos);
            CHECK(msg.find("2") != std::string::npos);
        }
    }

    SUBCASE("all-zero file gives all-zero cube") {
        const fs::path path = dir / "zeros.raw";
        std::vector<char> zeros(layout.expected_bytes(), 0);
        std::ofstream(path, std::ios::binary).write(zeros.data(), zeros.size());
        const Cube cube = load_cube(path.string(), layout);
        for (const auto& b : cube.bscans)
            for (double v : b.data) CHECK(v == 0.0);
    }

    SUBCASE("missing file is an I/O error") {
        CHECK_THROWS_AS(load_cube((dir / "absent.raw").string(), layout), IoError);
    }
}

TEST_CASE("load_bscan formats") {
    const fs::path dir = temp_dir();

    SUBCASE("ascii graymap of sevens") {
        const fs::path path = dir / "sevens.pgm";
        std::ofstream(path) << "P2\n3 3\n255\n7 7 7 7 7 7 7 7 7\n";
        const BScan img = load_bscan(path.string());
        CHECK(img.width == 3);
        CHECK(img.height == 3);
        for (double v : img.data) CHECK(v == 7.0);
    }

    SUBCASE("binary PGM round trip preserves shape and bytes") {
        BScan img(512, 64);
        std::mt19937_64 rng(5);
        for (double& v : img.data) v = static_cast<double>(rng() % 256);
        const fs::path path = dir / "rand.pgm";
        save_bscan(path.string(), img);
        const BScan back = load_bscan(path.string());
        CHECK(back.width == 512);
        CHECK(back.height == 64);
        CHECK(back.data == img.data);
    }

    SUBCASE("PNG gray round trip") {
        BScan img(33, 17);
        std::mt19937_64 rng(6);
        for (double& v : img.data) v = static_cast<double>(rng() % 256);
        const fs::path path = dir / "rand.png";
        save_bscan(path.string(), img);
        const BScan back = load_bscan(path.string());
        CHECK(back.data == img.data);
    }

    SUBCASE("16-bit graymap is rejected") {
        const fs::path path = dir / "deep.pgm";
        std::ofstream(path) << "P2\n2 1\n65535\n10 20\n";
        CHECK_THROWS_AS(load_bscan(path.string()), FormatError);
    }

    SUBCASE("RGB PNG is rejected as non-grayscale") {
        // a tiny RGB PNG written through the overlay path
        BScan img(4, 4, 100.0);
        Mask mask(4, 4);
        mask.set(1, 1, true);
        const fs::path path = dir / "rgb.png";
        save_overlay_png(path.string(), img, mask);
        CHECK_THROWS_AS(load_bscan(path.string()), FormatError);
    }

    SUBCASE("corrupt file is an error") {
        const fs::path path = dir / "garbage.png";
        std::ofstream(path) << "not an image";
        CHECK_THROWS(load_bscan(path.string()));
    }
}

TEST_CASE("bilateral filter") {
    SUBCASE("constant image is a fixed point") {
        const BScan img(9, 7, 7.0);
        const BScan out = bilateral_filter(img, 2.0, 10.0, 5);
        for (double v : out.data) CHECK(v == doctest::Approx(7.0).epsilon(1e-12));
    }

    SUBCASE("single pixel with window 1 is the identity") {
        BScan img(1, 1, 5.0);
        const BScan out = bilateral_filter(img, 1.0, 1.0, 1);
        CHECK(out.data[0] == 5.0);
    }

    SUBCASE("flat range kernel reduces to the spatial Gaussian mean") {
        // 1-D row [0,0,100,0,0]; with f_r flat the center is the Gaussian
        // mean of (0,100,0); the vertical replicate factor cancels
        BScan img(5, 1);
        img.at(0, 2) = 100.0;
        const double w1 = std::exp(-1.0 / 2.0);
        const double expected = 100.0 / (1.0 + 2.0 * w1);
        const BScan flat = bilateral_filter(img, 1.0, 1e9, 3);
        CHECK(flat.at(0, 2) == doctest::Approx(expected).epsilon(1e-9));
        // sigma_r = 1000 is already within a fraction of a gray level
        const BScan near = bilateral_filter(img, 1.0, 1000.0, 3);
        CHECK(std::abs(near.at(0, 2) - expected) < 0.2);
    }

    SUBCASE("output stays within the input range") {
        std::mt19937_64 rng(11);
        BScan img(17, 13);
        for (double& v : img.data) v = static_cast<double>(rng() % 256);
        const double lo = *std::min_element(img.data.begin(), img.data.end());
        const double hi = *std::max_element(img.data.begin(), img.data.end());
        const BScan out = bilateral_filter(img, 2.0, 15.0, 7);
        for (double v : out.data) {
            CHECK(v >= lo - 1e-9);
            CHECK(v <= hi + 1e-9);
        }
    }

    SUBCASE("sigma_r to infinity converges to the plain Gaussian blur") {
        std::mt19937_64 rng(12);
        BScan img(16, 16);
        for (double& v : img.data) v = static_cast<double>(rng() % 256);
        const BScan bil = bilateral_filter(img, 2.5, 1e9, 7);
        const BScan ref = oracles::gaussian_blur_oracle(img, 2.5, 7);
        for (size_t i = 0; i < img.size(); ++i)
            CHECK(std::abs(bil.data[i] - ref.data[i]) < 1e-6);
    }

    SUBCASE("parameter validation") {
        const BScan img(4, 4, 1.0);
        CHECK_THROWS_AS(bilateral_filter(img, 0.0, 1.0, 3), ParameterError);
        CHECK_THROWS_AS(bilateral_filter(img, 1.0, -1.0, 3), ParameterError);
        CHECK_THROWS_AS(bilateral_filter(img, 1.0, 1.0, 4), ParameterError);
    }
}

TEST_CASE("synthetic phantoms") {
    SUBCASE("deterministic for a fixed spec") {
        const PhantomSpec spec = random_phantom_spec(42, 8, 0.12, 128, 256);
        const Phantom a = synth_phantom(spec);
        const Phantom b = synth_phantom(spec);
        CHECK(a.image.data == b.image.data);
        CHECK(a.mask.bits == b.mask.bits);
    }

    SUBCASE("zero foci gives an all-false mask") {
        PhantomSpec spec;
        spec.width = 64;
        spec.height = 96;
        spec.band_top = 20;
        spec.band_bottom = 70;
        spec.speckle_level = 0.1;
        const Phantom ph = synth_phantom(spec);
        CHECK(ph.mask.popcount() == 0);
    }

    SUBCASE("mask area equals the rasterization oracle, noise-free") {
        PhantomSpec spec;
        spec.width = 64;
        spec.height = 96;
        spec.band_top = 20;
        spec.band_bottom = 70;
        PhantomFocus f;
        f.center_row = 40;
        f.center_col = 30;
        f.radius_row = 3;
        f.radius_col = 3;
        f.intensity = 220;
        spec.foci.push_back(f);
        const Phantom ph = synth_phantom(spec);
        const int64_t expected = oracles::ellipse_pixel_count(40, 30, 3, 3, 64, 96);
        CHECK(static_cast<int64_t>(ph.mask.popcount()) == expected);
    }

    SUBCASE("mask pixels all lie within the declared band") {
        const PhantomSpec spec = random_phantom_spec(7, 10, 0.15, 128, 256);
        const Phantom ph = synth_phantom(spec);
        for (int r = 0; r < ph.mask.height; ++r)
            for (int c = 0; c < ph.mask.width; ++c)
                if (ph.mask.get(r, c)) {
                    CHECK(r >= spec.band_top);
                    CHECK(r < spec.band_bottom);
                }
    }

    SUBCASE("invalid specs are rejected") {
        PhantomSpec spec;
        spec.width = 32;
        spec.height = 32;
        spec.band_top = 20;
        spec.band_bottom = 10;
        CHECK_THROWS_AS(synth_phantom(spec), ParameterError);
        spec.band_bottom = 30;
        PhantomFocus f;
        f.center_row = 5; // above the band
        f.center_col = 10;
        spec.foci.push_back(f);
        CHECK_THROWS_AS(synth_phantom(spec), ParameterError);
    }
}
