#ifndef HFSEG_PIPELINE_HPP
#define HFSEG_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hfseg/image.hpp"
#include "hfseg/roi_fcm.hpp"

namespace hfseg {

struct FocusRegion {
    int bscan_index = 0;
    int64_t area = 0;
    std::array<double, 2> centroid{0, 0};      // (row, col)
    std::array<int, 4> bbox{0, 0, 0, 0};       // row0, col0, row1, col1 (inclusive)
    double mean_intensity = 0;
};

struct PipelineConfig {
    // preprocessing
    double sigma_s = 3.0;
    double sigma_r = 20.0;
    int bilateral_window = 7;
    // ROI branch
    int clusters = 4;
    double fuzzifier = 2.0;
    double tol = 0.002;
    int fcm_max_iters = 300;
    int filter_window = 5;
    int se_radius = 1;
    FilterChain filter_chain = FilterChain::median;
    RoiPolicy roi_policy{};
    // HF estimation branch; delta/g_min are in normalized units and are
    // multiplied by intensity_scale before use on 8-bit data.
    double delta = 0.21;
    double g_min = 2.10;
    double max_variation = 1.0;
    double intensity_scale = 255.0 / 5.0;
    double dedup_tol = 0.2;
    // post-processing
    int64_t min_area = 5;
    int64_t max_area = std::numeric_limits<int64_t>::max();

    uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
};

struct BScanResult {
    Mask mask;
    std::vector<FocusRegion> foci;
    std::vector<std::string> warnings;
};

struct HFReport {
    std::vector<BScanResult> bscans;
    int64_t total_voxels = 0;
    int64_t total_foci = 0;
    double volume_mm3 = 0;
    PipelineConfig config;
    std::vector<std::string> warnings;
};

// Pixelwise conjunction; dimensions must agree.
Mask merge_masks(const Mask& roi, const Mask& hfs);

// Drop 4-connected components with area < min_area or > max_area.
Mask size_filter(const Mask& mask, int64_t min_area, int64_t max_area);

// 4-connected component labeling into focus descriptors; mean intensity is
// taken from img. Deterministic scan order.
std::vector<FocusRegion> label_foci(const Mask& mask, const BScan& img, int bscan_index);

// Full single-image pipeline: denoise, parallel ROI / HF-estimation
// branches, AND merge, size filtering, labeling.
BScanResult segment_bscan(const BScan& img, const PipelineConfig& cfg);

// Per-slice segmentation (cfg.jobs worker threads) and aggregation.
// Per-slice failures become warnings; processing continues.
HFReport segment_cube(const Cube& cube, const PipelineConfig& cfg);

double quantify(int64_t voxel_count, const std::array<double, 3>& voxel_dims_mm);

// Deterministic JSON serialization of a report (stable key order).
std::string report_to_json(const HFReport& report);

} // namespace hfseg

#endif
