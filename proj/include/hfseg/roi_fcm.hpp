#ifndef HFSEG_ROI_FCM_HPP
#define HFSEG_ROI_FCM_HPP

#include <cstdint>
#include <vector>

#include "hfseg/image.hpp"

namespace hfseg {

// Gray-level histogram: ascending distinct levels with positive counts.
struct Histogram {
    std::vector<double> levels;  // strictly ascending
    std::vector<int64_t> counts; // > 0, sum = n
    int q() const { return static_cast<int>(levels.size()); }
    int64_t n() const;
};

struct FcmParams {
    int c = 4;             // cluster count
    double m = 2.0;        // fuzzifier, > 1
    double T = 0.002;      // convergence threshold on max |U(t) - U(t+1)|
    int max_iters = 300;
    uint64_t seed = 0;

    void validate() const;
};

// Memberships over gray levels: c rows, q columns; columns sum to 1.
struct MembershipMatrixQ {
    int c = 0;
    int q = 0;
    std::vector<double> u; // row-major c x q
    double& at(int k, int l) { return u[static_cast<size_t>(k) * q + l]; }
    double at(int k, int l) const { return u[static_cast<size_t>(k) * q + l]; }
};

// Memberships over pixels: c planes of width x height values.
struct MembershipField {
    int c = 0;
    int width = 0;
    int height = 0;
    std::vector<double> u; // plane-major: u[k * n + i]
    size_t plane_size() const { return static_cast<size_t>(width) * height; }
    double& at(int k, size_t i) { return u[k * plane_size() + i]; }
    double at(int k, size_t i) const { return u[k * plane_size() + i]; }
};

struct FcmResult {
    MembershipMatrixQ memberships; // rows permuted to ascending centroids
    std::vector<double> centroids; // ascending
    int iterations = 0;
    bool converged = true;
    std::vector<double> objective; // value after each iteration
};

Histogram gray_histogram(const BScan& img);

// Membership row for one sample given fixed centroids (the update formula
// used inside the solver; exposed for direct checks). Zero distances give
// membership 1 to the nearest coincident centroid, ties to the lowest index.
std::vector<double> fcm_memberships_for_value(double value, const std::vector<double>& centroids,
                                              double m);

// Count-weighted fuzzy c-means on the gray-level histogram; random
// column-stochastic initialization from the seed; alternate centroid and
// membership updates until max |dU| < T or max_iters.
FcmResult fcm_histogram(const Histogram& hist, const FcmParams& p);

// Weighted FCM objective for given memberships/centroids (non-increasing
// across solver iterations).
double fcm_objective(const Histogram& hist, const MembershipMatrixQ& u,
                     const std::vector<double>& centroids, double m);

// Seeded random column-stochastic matrix used by fcm_histogram.
MembershipMatrixQ fcm_initial_memberships(int c, int q, uint64_t seed);

// Broadcast per-level membership columns onto the pixels of img.
MembershipField map_to_pixels(const MembershipMatrixQ& uq, const Histogram& hist, const BScan& img);

// u'_ki = u_ki + sum over window neighbors of u_kr / (d_ir + 1), then each
// pixel column renormalized to sum 1. window = 1 is the identity.
MembershipField spatial_membership_filter(const MembershipField& field, int window);

// Per-cluster-plane spatial median, replicate border.
MembershipField median_membership_filter(const MembershipField& field, int window);

enum class NormalizeMode { paper, probabilistic };

// paper: each value divided by c * (column sum + 2^-52);
// probabilistic: column normalized to sum 1 with the same guard.
MembershipField normalize_roi(const MembershipField& field, NormalizeMode mode = NormalizeMode::paper);

struct RoiPolicy {
    bool drop_darkest = true;           // candidates = argmax among top c-1 centroids
    bool keep_largest_component = true; // 4-connected
    bool column_fill = true;            // solid band per column
};

struct BinarizedRoi {
    Mask mask;
    bool empty_warning = false; // no candidate pixels at all
};

BinarizedRoi binarize_roi(const MembershipField& field, const std::vector<double>& centroids,
                          const RoiPolicy& policy = RoiPolicy{});

enum class FilterChain { median, spatial_then_median, spatial };

struct RoiResult {
    Mask mask;
    std::vector<double> centroids;
    int iterations = 0;
    bool converged = true;
    bool empty_warning = false;
};

// Full ROI chain: closing-reconstruction preconditioning, histogram FCM,
// pixel mapping, membership filtering, normalization, binarization.
RoiResult generate_roi(const BScan& img, const FcmParams& p, int filter_window, int se_radius,
                       FilterChain chain = FilterChain::median,
                       const RoiPolicy& policy = RoiPolicy{});

} // namespace hfseg

#endif
