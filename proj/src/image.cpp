#include "hfseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hfseg {

BScan::BScan(int w, int h, double fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw ParameterError("BScan dimensions must be nonnegative");
    data.assign(static_cast<size_t>(w) * h, fill);
}

void BScan::validate() const {
    if (width < 0 || height < 0) throw ParameterError("BScan dimensions must be nonnegative");
    if (data.size() != static_cast<size_t>(width) * height)
        throw DimensionError("BScan data length " + std::to_string(data.size()) +
                             " != width*height " + std::to_string(static_cast<size_t>(width) * height));
    for (double v : data)
        if (!std::isfinite(v) || v < 0.0 || v > 255.0)
            throw ParameterError("BScan intensity out of [0,255]: " + std::to_string(v));
}

Mask::Mask(int w, int h, bool fill) : width(w), height(h) {
    bits.assign(static_cast<size_t>(w) * h, fill ? 1 : 0);
}

size_t Mask::popcount() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b != 0;
    return n;
}

BScan bilateral_filter(const BScan& img, double sigma_s, double sigma_r, int window) {
    if (sigma_s <= 0 || sigma_r <= 0)
        throw ParameterError("bilateral_filter: sigmas must be positive");
    if (window < 1 || window % 2 == 0)
        throw ParameterError("bilateral_filter: window must be odd and >= 1");

    const int h = img.height, w = img.width;
    const int half = window / 2;
    BScan out(w, h);

    // precomputed spatial kernel
    std::vector<double> spatial(static_cast<size_t>(window) * window);
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx)
            spatial[static_cast<size_t>(dy + half) * window + (dx + half)] =
                std::exp(-(dy * dy + dx * dx) / (2.0 * sigma_s * sigma_s));

    const double inv2sr2 = 1.0 / (2.0 * sigma_r * sigma_r);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double center = img.at(r, c);
            double num = 0.0, den = 0.0;
            for (int dy = -half; dy <= half; ++dy) {
                const int rr = std::clamp(r + dy, 0, h - 1);
                for (int dx = -half; dx <= half; ++dx) {
                    const int cc = std::clamp(c + dx, 0, w - 1);
                    const double v = img.at(rr, cc);
                    const double d = v - center;
                    const double wgt = spatial[static_cast<size_t>(dy + half) * window + (dx + half)] *
                                       std::exp(-d * d * inv2sr2);
                    num += v * wgt;
                    den += wgt;
                }
            }
            out.at(r, c) = num / den;
        }
    }
    return out;
}

// ---- phantom ---------------------------------------------------------------

void PhantomSpec::validate() const {
    if (width <= 0 || height <= 0) throw ParameterError("phantom dims must be positive");
    if (band_top < 0 || band_bottom > height || band_top >= band_bottom)
        throw ParameterError("phantom band must lie within the image");
    if (speckle_level < 0) throw ParameterError("phantom speckle_level must be >= 0");
    for (const auto& f : foci) {
        if (f.center_row < band_top || f.center_row >= band_bottom)
            throw ParameterError("phantom focus center outside band");
        if (f.center_col < 0 || f.center_col >= width)
            throw ParameterError("phantom focus center outside image");
        if (f.radius_row <= 0 || f.radius_col <= 0)
            throw ParameterError("phantom focus radii must be positive");
        if (f.intensity < 0 || f.intensity > 255)
            throw ParameterError("phantom focus intensity outside [0,255]");
    }
    for (const auto& vs : vessel_shadows)
        if (vs.first < 0 || vs.second > width || vs.first >= vs.second)
            throw ParameterError("phantom vessel shadow range outside image");
}

namespace {
int phantom_grade_rows(const PhantomSpec& spec) {
    return std::min(24, (spec.band_bottom - spec.band_top) / 4);
}
} // namespace

Phantom synth_phantom(const PhantomSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    const double vitreous = 20.0, below = 13.0;
    // the band is a layered medium zone that brightens steadily into the
    // IS-OS analog stripe at the bottom; the steady grade keeps the bright
    // zone free of flat plateaus
    const int grade_rows = phantom_grade_rows(spec);
    const int grade_top = spec.band_bottom - grade_rows;

    BScan img(w, h);
    for (int r = 0; r < h; ++r) {
        double base;
        if (r < spec.band_top) {
            base = vitreous;
        } else if (r >= spec.band_bottom) {
            base = below;
        } else if (r >= grade_top) {
            const double t = grade_rows > 1 ? double(r - grade_top) / (grade_rows - 1) : 1.0;
            base = 93.0 + t * (121.0 - 93.0);
        } else {
            base = 85.0 + 8.0 * std::sin(2.0 * M_PI * (r - spec.band_top) / 16.0);
        }
        for (int c = 0; c < w; ++c) img.at(r, c) = base;
        // broken dark laminae through the layered zone (OPL/INL analog)
        const int band_row = r - spec.band_top;
        if (r >= spec.band_top && r < grade_top && band_row % 12 >= 5 && band_row % 12 <= 6) {
            const int line_index = band_row / 12;
            for (int c = 0; c < w; ++c)
                if ((c + 37 * line_index) % 52 < 40) img.at(r, c) = 35.0;
        }
    }

    Mask mask(w, h);
    for (const auto& f : spec.foci) {
        const int r0 = std::max(0, static_cast<int>(std::floor(f.center_row - f.radius_row)));
        const int r1 = std::min(h - 1, static_cast<int>(std::ceil(f.center_row + f.radius_row)));
        const int c0 = std::max(0, static_cast<int>(std::floor(f.center_col - f.radius_col)));
        const int c1 = std::min(w - 1, static_cast<int>(std::ceil(f.center_col + f.radius_col)));
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const double dy = (r - f.center_row) / f.radius_row;
                const double dx = (c - f.center_col) / f.radius_col;
                if (dy * dy + dx * dx <= 1.0) {
                    img.at(r, c) = f.intensity;
                    mask.set(r, c, true);
                }
            }
        }
    }

    for (const auto& vs : spec.vessel_shadows)
        for (int r = spec.band_top; r < spec.band_bottom; ++r)
            for (int c = vs.first; c < vs.second; ++c) img.at(r, c) *= 0.55;

    if (spec.speckle_level > 0) {
        std::mt19937_64 rng(spec.seed);
        const double s2 = spec.speckle_level * spec.speckle_level;
        const double shape = 1.0 / s2; // mean 1, variance s^2
        std::gamma_distribution<double> gamma(shape, s2);
        for (double& v : img.data) v = std::clamp(v * gamma(rng), 0.0, 255.0);
    }
    return Phantom{std::move(img), std::move(mask)};
}

PhantomSpec random_phantom_spec(uint64_t seed, int n_foci, double speckle_level, int width,
                                int height) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    PhantomSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    spec.speckle_level = speckle_level;
    const int band_h = height * 2 / 5;
    std::uniform_int_distribution<int> top_d(height / 6, height / 3);
    spec.band_top = top_d(rng);
    spec.band_bottom = std::min(height - 8, spec.band_top + band_h);

    // two or three vessel shadows, kept apart so the band segments between
    // them stay wide
    std::uniform_int_distribution<int> n_shadow_d(2, 3);
    std::uniform_int_distribution<int> shadow_w_d(8, 14);
    const int n_shadows = n_shadow_d(rng);
    int guard = 0;
    while (static_cast<int>(spec.vessel_shadows.size()) < n_shadows && guard++ < 200) {
        const int sw = shadow_w_d(rng);
        std::uniform_int_distribution<int> col_d(50, width - 50 - sw);
        const int c0 = col_d(rng);
        bool ok = true;
        for (const auto& vs : spec.vessel_shadows)
            if (c0 + sw + 70 >= vs.first && c0 - 70 < vs.second) ok = false;
        if (ok) spec.vessel_shadows.emplace_back(c0, c0 + sw);
    }

    const int grade_rows = phantom_grade_rows(spec);
    std::uniform_real_distribution<double> rad_d(3.0, 5.5);
    std::uniform_real_distribution<double> int_d(205.0, 235.0);
    std::uniform_real_distribution<double> row_d(spec.band_top + 8.0,
                                                 spec.band_bottom - grade_rows - 9.0);
    std::uniform_real_distribution<double> col_d(8.0, width - 9.0);
    int attempts = 0;
    while (static_cast<int>(spec.foci.size()) < n_foci && attempts < 4000) {
        ++attempts;
        PhantomFocus f;
        f.center_row = row_d(rng);
        f.center_col = col_d(rng);
        f.radius_row = rad_d(rng);
        f.radius_col = rad_d(rng);
        f.intensity = int_d(rng);
        bool ok = true;
        for (const auto& vs : spec.vessel_shadows)
            if (f.center_col + f.radius_col + 4 >= vs.first && f.center_col - f.radius_col - 4 < vs.second)
                ok = false;
        for (const auto& other : spec.foci) {
            const double dr = f.center_row - other.center_row;
            const double dc = f.center_col - other.center_col;
            const double min_gap = f.radius_row + other.radius_row + f.radius_col + other.radius_col;
            if (dr * dr + dc * dc < min_gap * min_gap) ok = false;
        }
        if (ok) spec.foci.push_back(f);
    }
    return spec;
}

} // namespace hfseg
