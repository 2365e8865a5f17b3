#ifndef HFSEG_IMAGE_HPP
#define HFSEG_IMAGE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hfseg/errors.hpp"

namespace hfseg {

// One OCT cross-section. Intensities are kept as reals so downstream
// clustering and stability math stay exact; 8-bit inputs are preserved
// bit-for-bit as whole numbers in [0, 255].
struct BScan {
    int width = 0;  // A-scans (columns)
    int height = 0; // depth samples (rows)
    std::vector<double> data; // row-major, size = width * height

    BScan() = default;
    BScan(int w, int h, double fill = 0.0);

    double& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
    size_t size() const { return data.size(); }

    // Throws DimensionError / ParameterError when the invariants are broken.
    void validate() const;
};

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits; // 0 or 1, row-major

    Mask() = default;
    Mask(int w, int h, bool fill = false);

    bool get(int row, int col) const { return bits[static_cast<size_t>(row) * width + col] != 0; }
    void set(int row, int col, bool v) { bits[static_cast<size_t>(row) * width + col] = v ? 1 : 0; }
    size_t popcount() const;
    bool same_dims(const Mask& other) const { return width == other.width && height == other.height; }
};

struct Cube {
    std::vector<BScan> bscans;
    std::array<double, 3> voxel_dims_mm{6.0 / 512, 6.0 / 128, 2.0 / 1024}; // (x, y, z)

    double voxel_volume_mm3() const { return voxel_dims_mm[0] * voxel_dims_mm[1] * voxel_dims_mm[2]; }
};

// Raw cube byte layout: B-scan major, each B-scan row-major (height = depth
// samples), one unsigned byte per voxel.
struct CubeLayout {
    int width = 512;
    int height = 1024;
    int n_bscans = 128;
    std::array<double, 3> voxel_dims_mm{6.0 / 512, 6.0 / 128, 2.0 / 1024};

    uint64_t expected_bytes() const {
        return static_cast<uint64_t>(width) * height * n_bscans;
    }
};

Cube load_cube(const std::string& path, const CubeLayout& layout = CubeLayout{});
void save_cube(const std::string& path, const Cube& cube);

// 8-bit grayscale PGM (P2/P5) or PNG. Color or >8-bit inputs are rejected.
BScan load_bscan(const std::string& path);
void save_bscan(const std::string& path, const BScan& img); // format from extension (.pgm/.png)

Mask load_mask(const std::string& path);                    // >127 = foreground
void save_mask(const std::string& path, const Mask& mask);  // 0 / 255

// RGB overlay: input image with the mask outline drawn on top (PNG only).
void save_overlay_png(const std::string& path, const BScan& img, const Mask& mask);

// Edge-preserving denoiser: normalized Gaussian range/space kernels,
// replicate border. A constant image is a fixed point.
BScan bilateral_filter(const BScan& img, double sigma_s, double sigma_r, int window);

// ---- synthetic phantoms -------------------------------------------------

struct PhantomFocus {
    double center_row = 0;
    double center_col = 0;
    double radius_row = 3;
    double radius_col = 3;
    double intensity = 220;
};

struct PhantomSpec {
    int width = 512;
    int height = 1024;
    int band_top = 0;    // first row of the simulated retina band
    int band_bottom = 0; // one past last row
    std::vector<PhantomFocus> foci;
    double speckle_level = 0.0; // std-dev of the multiplicative gamma noise
    std::vector<std::pair<int, int>> vessel_shadows; // [first_col, last_col) ranges
    uint64_t seed = 0;

    void validate() const;
};

struct Phantom {
    BScan image;
    Mask mask; // exactly the foci pixels, before noise
};

// Deterministic for a fixed spec. Layout: dark vitreous above the band,
// a layered medium band with a bright graded bottom stripe, dark below;
// elliptical foci; vessel shadows attenuate the band; multiplicative
// gamma speckle applied last.
Phantom synth_phantom(const PhantomSpec& spec);

// Convenience used by tests, the CLI and the sweep driver: a randomized
// spec with n foci placed inside the band away from shadows and edges.
PhantomSpec random_phantom_spec(uint64_t seed, int n_foci, double speckle_level,
                                int width = 512, int height = 1024);

} // namespace hfseg

#endif
