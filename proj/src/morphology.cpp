#include "hfseg/morphology.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace hfseg {

StructuringElement StructuringElement::disk(int r) {
    if (r < 0) throw ParameterError("structuring element radius must be >= 0");
    StructuringElement se;
    se.radius = r;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dy * dy + dx * dx <= r * r) se.offsets.emplace_back(dy, dx);
    return se;
}

namespace {

template <typename Cmp>
BScan flat_extremum(const BScan& img, const StructuringElement& se, Cmp better) {
    const int h = img.height, w = img.width;
    BScan out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double best = img.at(r, c);
            for (const auto& [dy, dx] : se.offsets) {
                const int rr = std::clamp(r + dy, 0, h - 1);
                const int cc = std::clamp(c + dx, 0, w - 1);
                const double v = img.at(rr, cc);
                if (better(v, best)) best = v;
            }
            out.at(r, c) = best;
        }
    }
    return out;
}

void check_same_dims(const BScan& a, const BScan& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionError(std::string(what) + ": marker and mask dimensions differ");
}

// Vincent's hybrid reconstruction-by-dilation: forward and backward raster
// sweeps followed by FIFO propagation; 4-connected geodesic step.
BScan reconstruct_dilation_impl(const BScan& marker, const BScan& mask) {
    const int h = mask.height, w = mask.width;
    BScan j = marker;

    auto idx = [w](int r, int c) { return static_cast<size_t>(r) * w + c; };

    // forward: neighbors above and to the left
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double v = j.data[idx(r, c)];
            if (r > 0) v = std::max(v, j.data[idx(r - 1, c)]);
            if (c > 0) v = std::max(v, j.data[idx(r, c - 1)]);
            j.data[idx(r, c)] = std::min(v, mask.data[idx(r, c)]);
        }
    }
    // backward: neighbors below and to the right, enqueue boundary pixels
    std::deque<std::pair<int, int>> fifo;
    for (int r = h - 1; r >= 0; --r) {
        for (int c = w - 1; c >= 0; --c) {
            double v = j.data[idx(r, c)];
            if (r + 1 < h) v = std::max(v, j.data[idx(r + 1, c)]);
            if (c + 1 < w) v = std::max(v, j.data[idx(r, c + 1)]);
            j.data[idx(r, c)] = std::min(v, mask.data[idx(r, c)]);
            const double jv = j.data[idx(r, c)];
            const bool frontier =
                (r + 1 < h && j.data[idx(r + 1, c)] < jv && j.data[idx(r + 1, c)] < mask.data[idx(r + 1, c)]) ||
                (c + 1 < w && j.data[idx(r, c + 1)] < jv && j.data[idx(r, c + 1)] < mask.data[idx(r, c + 1)]);
            if (frontier) fifo.emplace_back(r, c);
        }
    }
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    while (!fifo.empty()) {
        const auto [r, c] = fifo.front();
        fifo.pop_front();
        const double jv = j.data[idx(r, c)];
        for (int k = 0; k < 4; ++k) {
            const int rr = r + dr[k], cc = c + dc[k];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            double& jq = j.data[idx(rr, cc)];
            const double mq = mask.data[idx(rr, cc)];
            if (jq < jv && jq != mq) {
                jq = std::min(jv, mq);
                fifo.emplace_back(rr, cc);
            }
        }
    }
    return j;
}

} // namespace

BScan dilate(const BScan& img, const StructuringElement& se) {
    return flat_extremum(img, se, [](double a, double b) { return a > b; });
}

BScan erode(const BScan& img, const StructuringElement& se) {
    return flat_extremum(img, se, [](double a, double b) { return a < b; });
}

BScan reconstruct_dilation(const BScan& marker, const BScan& mask) {
    check_same_dims(marker, mask, "reconstruct_dilation");
    for (size_t i = 0; i < marker.size(); ++i) {
        if (marker.data[i] > mask.data[i]) {
            const int r = static_cast<int>(i) / mask.width;
            const int c = static_cast<int>(i) % mask.width;
            throw PreconditionError("reconstruct_dilation: marker > mask at pixel (" +
                                    std::to_string(r) + "," + std::to_string(c) + ")");
        }
    }
    return reconstruct_dilation_impl(marker, mask);
}

BScan reconstruct_erosion(const BScan& marker, const BScan& mask) {
    check_same_dims(marker, mask, "reconstruct_erosion");
    for (size_t i = 0; i < marker.size(); ++i) {
        if (marker.data[i] < mask.data[i]) {
            const int r = static_cast<int>(i) / mask.width;
            const int c = static_cast<int>(i) % mask.width;
            throw PreconditionError("reconstruct_erosion: marker < mask at pixel (" +
                                    std::to_string(r) + "," + std::to_string(c) + ")");
        }
    }
    // dual of reconstruction by dilation under negation
    BScan neg_marker = marker, neg_mask = mask;
    for (double& v : neg_marker.data) v = -v;
    for (double& v : neg_mask.data) v = -v;
    BScan out = reconstruct_dilation_impl(neg_marker, neg_mask);
    for (double& v : out.data) v = -v;
    return out;
}

BScan closing_reconstruction(const BScan& img, int r) {
    if (r < 0) throw ParameterError("closing_reconstruction: radius must be >= 0");
    if (r == 0) return img;
    const StructuringElement se = StructuringElement::disk(r);
    const BScan eroded = erode(img, se);
    const BScan opened = reconstruct_dilation(eroded, img);
    const BScan dilated = dilate(opened, se);
    return reconstruct_erosion(dilated, opened);
}

} // namespace hfseg
