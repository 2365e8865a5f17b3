#ifndef HFSEG_MAXTREE_HPP
#define HFSEG_MAXTREE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hfseg/image.hpp"

namespace hfseg {

// Permutation of pixel indices, non-decreasing in quantized intensity.
struct PixelOrder {
    std::vector<int32_t> order;
};

// Stable counting sort over 256 buckets of the rounded intensities.
PixelOrder sort_pixels(const BScan& img);

// Max-tree over the 4-connected bright threshold sets (I >= g). Nodes are
// identified by their canonical pixel; every pixel's parent pointer leads
// to the canonical pixel of the parent component.
struct ComponentTree {
    int width = 0;
    int height = 0;
    std::vector<int> level;      // per pixel: quantized gray value
    std::vector<int32_t> parent; // per pixel, canonicalized
    int32_t root = -1;

    // Node attributes, valid at canonical pixel indices.
    std::vector<int64_t> area;
    std::vector<double> sum_row, sum_col;           // first moment accumulators
    std::vector<double> sum_rr, sum_rc, sum_cc;     // second moment accumulators
    std::vector<int32_t> min_pixel;                 // smallest pixel index in the node's region

    size_t n_pixels() const { return static_cast<size_t>(width) * height; }
    bool is_canonical(int32_t p) const {
        return parent[p] == p || level[parent[p]] != level[p];
    }
    std::vector<int32_t> canonical_nodes() const; // sorted by pixel index
};

ComponentTree build_component_tree(const BScan& img);

struct RegionMoments {
    std::array<double, 2> centroid;           // (row, col)
    std::array<double, 4> second_moment;      // covariance, row-major 2x2
};

// mu and Sigma = M - mu mu^T for one node from the accumulated sums.
RegionMoments region_moments(const ComponentTree& tree, int32_t node);

// Stability of every node: walk to the first ancestor at level <= g - delta
// (the root stands in when none exists) and down the largest-area child
// chain to the first descendant at level >= g + delta (the node itself when
// none exists); Psi = (area_minus - area_plus) / area, clamped >= 0.
// Indexed by canonical pixel; non-canonical entries are 0.
std::vector<double> stability(const ComponentTree& tree, double delta);

struct ExtremalRegion {
    int32_t node = -1;
    int level = 0;
    int64_t area = 0;
    double stability = 0.0;
    std::array<double, 2> centroid{0, 0};
    std::array<double, 4> second_moment{0, 0, 0, 0};
};

// Maximally stable regions: strict local minima of Psi along root paths
// (plateaus keep the brightest node), Psi <= max_variation, level >= g_min.
// The root itself is never a region.
std::vector<ExtremalRegion> extract_mser(const ComponentTree& tree, double delta, double g_min,
                                         double max_variation);

// Remove nested near-duplicates: when a selected region and its nearest
// selected ancestor are within delta in level and their areas differ by at
// most similarity_tol (relative), the one with larger Psi is dropped.
// Regions with Psi > max_variation are dropped as well.
std::vector<ExtremalRegion> dedup_regions(std::vector<ExtremalRegion> regions,
                                          const ComponentTree& tree, double delta,
                                          double similarity_tol, double max_variation);

// Union of the member pixels of all regions (full subtree pixel sets).
Mask regions_to_mask(const std::vector<ExtremalRegion>& regions, const ComponentTree& tree,
                     int width, int height);

// Debug dump, one line per node: id, parent, level, area, psi, mu_row, mu_col.
std::string dump_tree_csv(const ComponentTree& tree, double delta);

} // namespace hfseg

#endif
