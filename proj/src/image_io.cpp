#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include "hfseg/image.hpp"

namespace hfseg {

namespace {

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    std::string tail = s.substr(s.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
    return tail == suf;
}

// ---- PGM ------------------------------------------------------------------

int pgm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') { // comment to end of line
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (!std::isspace(ch)) break;
    }
    if (ch == EOF) return -1;
    tok.push_back(static_cast<char>(ch));
    while ((ch = in.get()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(ch));
    return 0;
}

BScan load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string tok;
    if (pgm_next_token(in, tok) < 0) throw FormatError(path + ": truncated PGM header");
    const bool ascii = tok == "P2";
    if (!ascii && tok != "P5") throw FormatError(path + ": not a grayscale PGM (magic " + tok + ")");
    long vals[3];
    for (int i = 0; i < 3; ++i) {
        if (pgm_next_token(in, tok) < 0) throw FormatError(path + ": truncated PGM header");
        try {
            vals[i] = std::stol(tok);
        } catch (const std::exception&) {
            throw FormatError(path + ": bad PGM header token '" + tok + "'");
        }
    }
    const long w = vals[0], h = vals[1], maxval = vals[2];
    if (w <= 0 || h <= 0) throw FormatError(path + ": bad PGM dimensions");
    if (maxval <= 0 || maxval > 255) throw FormatError(path + ": only 8-bit graymaps supported");
    BScan img(static_cast<int>(w), static_cast<int>(h));
    if (ascii) {
        for (size_t i = 0; i < img.size(); ++i) {
            if (pgm_next_token(in, tok) < 0) throw IoError(path + ": truncated PGM data");
            img.data[i] = std::stod(tok);
        }
    } else {
        std::vector<uint8_t> buf(img.size());
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<size_t>(in.gcount()) != buf.size())
            throw IoError(path + ": truncated PGM data");
        for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i];
    }
    return img;
}

void save_pgm(const std::string& path, const BScan& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> buf(img.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(img.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to " + path);
}

// ---- PNG ------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

BScan load_png(const std::string& path) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw IoError("cannot open " + path);
    uint8_t sig[8];
    if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw FormatError(path + ": not a PNG file");
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (!r.png || !r.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw IoError(path + ": corrupt PNG");
    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw FormatError(path + ": only single-channel grayscale PNG accepted");
    if (depth > 8) throw FormatError(path + ": >8-bit PNG not accepted");
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    BScan img(w, h);
    std::vector<uint8_t> row(static_cast<size_t>(w));
    for (int y = 0; y < h; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) img.at(y, x) = row[x];
    }
    png_read_end(r.png, nullptr);
    return img;
}

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png_gray(const std::string& path, const BScan& img) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError("cannot write " + path);
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError(path + ": PNG write failed");
    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<uint8_t> row(static_cast<size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) row[x] = to_byte(img.at(y, x));
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

void save_png_rgb(const std::string& path, const std::vector<uint8_t>& rgb, int width, int height) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError("cannot write " + path);
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError(path + ": PNG write failed");
    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    for (int y = 0; y < height; ++y)
        png_write_row(w.png, const_cast<uint8_t*>(rgb.data() + static_cast<size_t>(y) * width * 3));
    png_write_end(w.png, nullptr);
}

} // namespace

Cube load_cube(const std::string& path, const CubeLayout& layout) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path);
    const uint64_t actual = static_cast<uint64_t>(in.tellg());
    const uint64_t expected = layout.expected_bytes();
    if (actual != expected)
        throw DimensionError("cube " + path + ": expected " + std::to_string(expected) +
                             " bytes for " + std::to_string(layout.width) + "x" +
                             std::to_string(layout.height) + "x" + std::to_string(layout.n_bscans) +
                             ", file has " + std::to_string(actual));
    in.seekg(0);
    Cube cube;
    cube.voxel_dims_mm = layout.voxel_dims_mm;
    cube.bscans.reserve(static_cast<size_t>(layout.n_bscans));
    std::vector<uint8_t> buf(static_cast<size_t>(layout.width) * layout.height);
    for (int b = 0; b < layout.n_bscans; ++b) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<size_t>(in.gcount()) != buf.size())
            throw IoError(path + ": short read at B-scan " + std::to_string(b));
        BScan img(layout.width, layout.height);
        for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i];
        cube.bscans.push_back(std::move(img));
    }
    return cube;
}

void save_cube(const std::string& path, const Cube& cube) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& bscan : cube.bscans) {
        std::vector<uint8_t> buf(bscan.size());
        for (size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(bscan.data[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw IoError("short write to " + path);
}

BScan load_bscan(const std::string& path) {
    if (has_suffix(path, ".png")) return load_png(path);
    if (has_suffix(path, ".pgm") || has_suffix(path, ".pnm")) return load_pgm(path);
    // sniff the magic
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.close();
    if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return load_pgm(path);
    return load_png(path);
}

void save_bscan(const std::string& path, const BScan& img) {
    if (has_suffix(path, ".pgm")) {
        save_pgm(path, img);
    } else if (has_suffix(path, ".png")) {
        save_png_gray(path, img);
    } else {
        throw ParameterError("save_bscan: unsupported extension for " + path);
    }
}

Mask load_mask(const std::string& path) {
    const BScan img = load_bscan(path);
    Mask mask(img.width, img.height);
    for (size_t i = 0; i < img.size(); ++i) mask.bits[i] = img.data[i] > 127.0 ? 1 : 0;
    return mask;
}

void save_mask(const std::string& path, const Mask& mask) {
    BScan img(mask.width, mask.height);
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = mask.bits[i] ? 255.0 : 0.0;
    save_bscan(path, img);
}

void save_overlay_png(const std::string& path, const BScan& img, const Mask& mask) {
    if (img.width != mask.width || img.height != mask.height)
        throw DimensionError("overlay: image and mask dimensions differ");
    std::vector<uint8_t> rgb(static_cast<size_t>(img.width) * img.height * 3);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const uint8_t v = to_byte(img.at(r, c));
            bool outline = false;
            if (mask.get(r, c)) {
                outline = r == 0 || r == img.height - 1 || c == 0 || c == img.width - 1 ||
                          !mask.get(r - 1, c) || !mask.get(r + 1, c) || !mask.get(r, c - 1) ||
                          !mask.get(r, c + 1);
            }
            const size_t o = (static_cast<size_t>(r) * img.width + c) * 3;
            if (outline) {
                rgb[o] = 255;
                rgb[o + 1] = 32;
                rgb[o + 2] = 32;
            } else {
                rgb[o] = rgb[o + 1] = rgb[o + 2] = v;
            }
        }
    }
    save_png_rgb(path, rgb, img.width, img.height);
}

} // namespace hfseg
