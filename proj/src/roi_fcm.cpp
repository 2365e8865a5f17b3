#include "hfseg/roi_fcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <numeric>
#include <random>
#include <unordered_map>

#include "hfseg/morphology.hpp"

namespace hfseg {

int64_t Histogram::n() const {
    return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

void FcmParams::validate() const {
    if (c < 1) throw ParameterError("fcm: cluster count must be >= 1");
    if (m <= 1.0) throw ParameterError("fcm: fuzzifier must be > 1");
    if (T <= 0.0) throw ParameterError("fcm: convergence threshold must be > 0");
    if (max_iters < 1) throw ParameterError("fcm: max_iters must be >= 1");
}

Histogram gray_histogram(const BScan& img) {
    std::vector<double> values = img.data;
    std::sort(values.begin(), values.end());
    Histogram hist;
    size_t i = 0;
    while (i < values.size()) {
        size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        hist.levels.push_back(values[i]);
        hist.counts.push_back(static_cast<int64_t>(j - i));
        i = j;
    }
    return hist;
}

std::vector<double> fcm_memberships_for_value(double value, const std::vector<double>& centroids,
                                              double m) {
    const int c = static_cast<int>(centroids.size());
    std::vector<double> u(c, 0.0);
    int coincident = -1;
    double coincident_dist = 0.0;
    for (int k = 0; k < c; ++k) {
        const double d = std::abs(value - centroids[k]);
        if (d == 0.0 && coincident < 0) {
            coincident = k;
            coincident_dist = d;
        }
    }
    (void)coincident_dist;
    if (coincident >= 0) {
        u[coincident] = 1.0;
        return u;
    }
    const double expo = 2.0 / (m - 1.0);
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
        const double d = std::abs(value - centroids[k]);
        u[k] = std::pow(1.0 / d, expo);
        sum += u[k];
    }
    for (double& v : u) v /= sum;
    return u;
}

MembershipMatrixQ fcm_initial_memberships(int c, int q, uint64_t seed) {
    MembershipMatrixQ u;
    u.c = c;
    u.q = q;
    u.u.assign(static_cast<size_t>(c) * q, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(1e-6, 1.0);
    for (int l = 0; l < q; ++l) {
        double sum = 0.0;
        for (int k = 0; k < c; ++k) {
            u.at(k, l) = unif(rng);
            sum += u.at(k, l);
        }
        for (int k = 0; k < c; ++k) u.at(k, l) /= sum;
    }
    return u;
}

FcmResult fcm_histogram(const Histogram& hist, const FcmParams& p) {
    p.validate();
    const int q = hist.q();
    const int c = p.c;
    if (q == 0) throw DegenerateDataError("fcm: empty histogram");
    if (q < c)
        throw DegenerateDataError("fcm: " + std::to_string(q) + " gray levels cannot support " +
                                  std::to_string(c) + " clusters");

    MembershipMatrixQ u = fcm_initial_memberships(c, q, p.seed);

    std::vector<double> centroids(c, 0.0);
    FcmResult result;
    result.converged = false;
    int iter = 0;
    for (; iter < p.max_iters; ++iter) {
        // centroid update from current memberships
        for (int k = 0; k < c; ++k) {
            double num = 0.0, den = 0.0;
            for (int l = 0; l < q; ++l) {
                const double w = hist.counts[l] * std::pow(u.at(k, l), p.m);
                num += w * hist.levels[l];
                den += w;
            }
            if (den == 0.0)
                throw DegenerateDataError("fcm: cluster " + std::to_string(k) +
                                          " lost all membership mass");
            centroids[k] = num / den;
        }
        // membership update, tracking the largest change
        double max_delta = 0.0;
        for (int l = 0; l < q; ++l) {
            const std::vector<double> col = fcm_memberships_for_value(hist.levels[l], centroids, p.m);
            for (int k = 0; k < c; ++k) {
                max_delta = std::max(max_delta, std::abs(col[k] - u.at(k, l)));
                u.at(k, l) = col[k];
            }
        }
        result.objective.push_back(fcm_objective(hist, u, centroids, p.m));
        if (max_delta < p.T) {
            result.converged = true;
            ++iter;
            break;
        }
    }
    result.iterations = iter;

    // report centroids ascending with rows permuted to match
    std::vector<int> perm(c);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](int a, int b) { return centroids[a] < centroids[b]; });
    MembershipMatrixQ sorted = u;
    result.centroids.resize(c);
    for (int k = 0; k < c; ++k) {
        result.centroids[k] = centroids[perm[k]];
        for (int l = 0; l < q; ++l) sorted.at(k, l) = u.at(perm[k], l);
    }
    result.memberships = std::move(sorted);
    return result;
}

double fcm_objective(const Histogram& hist, const MembershipMatrixQ& u,
                     const std::vector<double>& centroids, double m) {
    double j = 0.0;
    for (int l = 0; l < u.q; ++l) {
        for (int k = 0; k < u.c; ++k) {
            const double d = hist.levels[l] - centroids[k];
            j += hist.counts[l] * std::pow(u.at(k, l), m) * d * d;
        }
    }
    return j;
}

MembershipField map_to_pixels(const MembershipMatrixQ& uq, const Histogram& hist, const BScan& img) {
    std::unordered_map<double, int> level_index;
    level_index.reserve(hist.levels.size());
    for (int l = 0; l < hist.q(); ++l) level_index[hist.levels[l]] = l;

    MembershipField field;
    field.c = uq.c;
    field.width = img.width;
    field.height = img.height;
    field.u.assign(static_cast<size_t>(uq.c) * img.size(), 0.0);
    for (size_t i = 0; i < img.size(); ++i) {
        const auto it = level_index.find(img.data[i]);
        if (it == level_index.end())
            throw ConsistencyError("map_to_pixels: gray value " + std::to_string(img.data[i]) +
                                   " not present in histogram");
        for (int k = 0; k < uq.c; ++k) field.at(k, i) = uq.at(k, it->second);
    }
    return field;
}

MembershipField spatial_membership_filter(const MembershipField& field, int window) {
    if (window < 1 || window % 2 == 0)
        throw ParameterError("spatial_membership_filter: window must be odd and >= 1");
    const int h = field.height, w = field.width;
    const int half = window / 2;
    MembershipField out = field;

    // weights 1/(d+1) over the window, excluding the center
    std::vector<double> wgt(static_cast<size_t>(window) * window, 0.0);
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx)
            if (dy != 0 || dx != 0)
                wgt[static_cast<size_t>(dy + half) * window + (dx + half)] =
                    1.0 / (std::sqrt(double(dy * dy + dx * dx)) + 1.0);

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const size_t i = static_cast<size_t>(r) * w + c;
            double colsum = 0.0;
            for (int k = 0; k < field.c; ++k) {
                double v = field.at(k, i);
                for (int dy = -half; dy <= half; ++dy) {
                    const int rr = r + dy;
                    if (rr < 0 || rr >= h) continue;
                    for (int dx = -half; dx <= half; ++dx) {
                        const int cc = c + dx;
                        if (cc < 0 || cc >= w || (dy == 0 && dx == 0)) continue;
                        v += wgt[static_cast<size_t>(dy + half) * window + (dx + half)] *
                             field.at(k, static_cast<size_t>(rr) * w + cc);
                    }
                }
                out.at(k, i) = v;
                colsum += v;
            }
            if (colsum > 0.0)
                for (int k = 0; k < field.c; ++k) out.at(k, i) /= colsum;
        }
    }
    return out;
}

MembershipField median_membership_filter(const MembershipField& field, int window) {
    if (window < 1 || window % 2 == 0)
        throw ParameterError("median_membership_filter: window must be odd and >= 1");
    if (window == 1) return field;
    const int h = field.height, w = field.width;
    const int half = window / 2;
    MembershipField out = field;
    std::vector<double> buf;
    buf.reserve(static_cast<size_t>(window) * window);
    for (int k = 0; k < field.c; ++k) {
        const double* plane = field.u.data() + k * field.plane_size();
        double* oplane = out.u.data() + k * field.plane_size();
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                buf.clear();
                for (int dy = -half; dy <= half; ++dy) {
                    const int rr = std::clamp(r + dy, 0, h - 1);
                    for (int dx = -half; dx <= half; ++dx) {
                        const int cc = std::clamp(c + dx, 0, w - 1);
                        buf.push_back(plane[static_cast<size_t>(rr) * w + cc]);
                    }
                }
                const size_t mid = buf.size() / 2;
                std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
                oplane[static_cast<size_t>(r) * w + c] = buf[mid];
            }
        }
    }
    return out;
}

MembershipField normalize_roi(const MembershipField& field, NormalizeMode mode) {
    constexpr double b_const = 2.220446049250313e-16; // 2^-52
    MembershipField out = field;
    const size_t n = field.plane_size();
    for (size_t i = 0; i < n; ++i) {
        double colsum = 0.0;
        for (int k = 0; k < field.c; ++k) colsum += field.at(k, i);
        const double den = mode == NormalizeMode::paper ? field.c * (colsum + b_const)
                                                        : colsum + b_const;
        for (int k = 0; k < field.c; ++k) out.at(k, i) = field.at(k, i) / den;
    }
    return out;
}

namespace {

// argmax cluster per pixel; ties toward the lower index.
std::vector<int> argmax_clusters(const MembershipField& field) {
    const size_t n = field.plane_size();
    std::vector<int> arg(n, 0);
    for (size_t i = 0; i < n; ++i) {
        double best = field.at(0, i);
        for (int k = 1; k < field.c; ++k) {
            if (field.at(k, i) > best) {
                best = field.at(k, i);
                arg[i] = k;
            }
        }
    }
    return arg;
}

} // namespace

BinarizedRoi binarize_roi(const MembershipField& field, const std::vector<double>& centroids,
                          const RoiPolicy& policy) {
    if (static_cast<int>(centroids.size()) != field.c)
        throw DimensionError("binarize_roi: centroid count != field rows");
    if (!std::is_sorted(centroids.begin(), centroids.end()))
        throw PreconditionError("binarize_roi: centroids must be ascending-aligned with rows");

    const int h = field.height, w = field.width;
    const std::vector<int> arg = argmax_clusters(field);
    std::vector<uint8_t> cand(arg.size());
    const int lowest_kept = policy.drop_darkest && field.c > 1 ? 1 : 0;
    bool any = false;
    for (size_t i = 0; i < arg.size(); ++i) {
        cand[i] = arg[i] >= lowest_kept ? 1 : 0;
        any = any || cand[i];
    }
    BinarizedRoi result;
    result.mask = Mask(w, h);
    if (!any) {
        result.empty_warning = true;
        return result;
    }

    std::vector<uint8_t> kept = cand;
    if (policy.keep_largest_component) {
        // largest 4-connected candidate component
        std::vector<int32_t> label(cand.size(), -1);
        int32_t next = 0;
        int32_t best_label = -1;
        int64_t best_size = 0;
        std::deque<size_t> fifo;
        for (size_t start = 0; start < cand.size(); ++start) {
            if (!cand[start] || label[start] >= 0) continue;
            int64_t size = 0;
            label[start] = next;
            fifo.push_back(start);
            while (!fifo.empty()) {
                const size_t i = fifo.front();
                fifo.pop_front();
                ++size;
                const int r = static_cast<int>(i) / w, c = static_cast<int>(i) % w;
                const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int rr = r + dr[k], cc = c + dc[k];
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    const size_t j = static_cast<size_t>(rr) * w + cc;
                    if (cand[j] && label[j] < 0) {
                        label[j] = next;
                        fifo.push_back(j);
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_label = next;
            }
            ++next;
        }
        for (size_t i = 0; i < kept.size(); ++i) kept[i] = label[i] == best_label ? 1 : 0;
    }

    if (policy.column_fill) {
        for (int c = 0; c < w; ++c) {
            int top = -1, bottom = -1;
            for (int r = 0; r < h; ++r) {
                if (kept[static_cast<size_t>(r) * w + c]) {
                    if (top < 0) top = r;
                    bottom = r;
                }
            }
            if (top >= 0)
                for (int r = top; r <= bottom; ++r) result.mask.set(r, c, true);
        }
    } else {
        for (size_t i = 0; i < kept.size(); ++i) result.mask.bits[i] = kept[i];
    }
    return result;
}

RoiResult generate_roi(const BScan& img, const FcmParams& p, int filter_window, int se_radius,
                       FilterChain chain, const RoiPolicy& policy) {
    if (se_radius < 0) throw ParameterError("generate_roi: se_radius must be >= 0");
    BScan xi = closing_reconstruction(img, se_radius);
    // clustering runs on 8-bit gray levels; round the reconstructed image so
    // the histogram stays at most 256 levels
    for (double& v : xi.data) v = std::clamp(static_cast<double>(std::lround(v)), 0.0, 255.0);

    const Histogram hist = gray_histogram(xi);
    const FcmResult fcm = fcm_histogram(hist, p);
    MembershipField field = map_to_pixels(fcm.memberships, hist, xi);
    switch (chain) {
    case FilterChain::median:
        field = median_membership_filter(field, filter_window);
        break;
    case FilterChain::spatial_then_median:
        field = spatial_membership_filter(field, filter_window);
        field = median_membership_filter(field, filter_window);
        break;
    case FilterChain::spatial:
        field = spatial_membership_filter(field, filter_window);
        break;
    }
    field = normalize_roi(field, NormalizeMode::paper);
    BinarizedRoi bin = binarize_roi(field, fcm.centroids, policy);

    RoiResult result;
    result.mask = std::move(bin.mask);
    result.centroids = fcm.centroids;
    result.iterations = fcm.iterations;
    result.converged = fcm.converged;
    result.empty_warning = bin.empty_warning;
    return result;
}

} // namespace hfseg
