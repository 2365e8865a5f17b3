#include "hfseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <thread>

#include <nlohmann/json.hpp>

#include "hfseg/maxtree.hpp"
#include "hfseg/morphology.hpp"

namespace hfseg {

using ordered_json = nlohmann::ordered_json;

void PipelineConfig::validate() const {
    if (sigma_s <= 0 || sigma_r <= 0) throw ParameterError("config: bilateral sigmas must be > 0");
    if (bilateral_window < 1 || bilateral_window % 2 == 0)
        throw ParameterError("config: bilateral window must be odd");
    if (clusters < 2) throw ParameterError("config: clusters must be >= 2");
    if (fuzzifier <= 1.0) throw ParameterError("config: fuzzifier must be > 1");
    if (tol <= 0) throw ParameterError("config: tol must be > 0");
    if (filter_window < 1 || filter_window % 2 == 0)
        throw ParameterError("config: filter window must be odd");
    if (se_radius < 0) throw ParameterError("config: se radius must be >= 0");
    if (delta <= 0) throw ParameterError("config: delta must be > 0");
    if (intensity_scale <= 0) throw ParameterError("config: intensity scale must be > 0");
    if (max_variation <= 0) throw ParameterError("config: max variation must be > 0");
    if (dedup_tol < 0) throw ParameterError("config: dedup tolerance must be >= 0");
    if (min_area < 0 || min_area > max_area)
        throw ParameterError("config: need 0 <= min_area <= max_area");
    if (jobs < 1) throw ParameterError("config: jobs must be >= 1");
}

Mask merge_masks(const Mask& roi, const Mask& hfs) {
    if (!roi.same_dims(hfs)) throw DimensionError("merge_masks: mask dimensions differ");
    Mask out(roi.width, roi.height);
    for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = roi.bits[i] && hfs.bits[i];
    return out;
}

namespace {

// 4-connected component labels; -1 = background.
std::vector<int32_t> label_components(const Mask& mask, int32_t& n_labels) {
    const int w = mask.width, h = mask.height;
    std::vector<int32_t> label(mask.bits.size(), -1);
    n_labels = 0;
    std::deque<size_t> fifo;
    for (size_t start = 0; start < mask.bits.size(); ++start) {
        if (!mask.bits[start] || label[start] >= 0) continue;
        label[start] = n_labels;
        fifo.push_back(start);
        while (!fifo.empty()) {
            const size_t i = fifo.front();
            fifo.pop_front();
            const int r = static_cast<int>(i) / w, c = static_cast<int>(i) % w;
            const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                const size_t j = static_cast<size_t>(rr) * w + cc;
                if (mask.bits[j] && label[j] < 0) {
                    label[j] = n_labels;
                    fifo.push_back(j);
                }
            }
        }
        ++n_labels;
    }
    return label;
}

} // namespace

Mask size_filter(const Mask& mask, int64_t min_area, int64_t max_area) {
    if (min_area > max_area) throw ParameterError("size_filter: min_area > max_area");
    int32_t n_labels = 0;
    const std::vector<int32_t> label = label_components(mask, n_labels);
    std::vector<int64_t> area(n_labels, 0);
    for (const int32_t l : label)
        if (l >= 0) ++area[l];
    Mask out(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) {
        const int32_t l = label[i];
        out.bits[i] = l >= 0 && area[l] >= min_area && area[l] <= max_area ? 1 : 0;
    }
    return out;
}

std::vector<FocusRegion> label_foci(const Mask& mask, const BScan& img, int bscan_index) {
    if (img.width != mask.width || img.height != mask.height)
        throw DimensionError("label_foci: image and mask dimensions differ");
    int32_t n_labels = 0;
    const std::vector<int32_t> label = label_components(mask, n_labels);
    std::vector<FocusRegion> foci(n_labels);
    std::vector<double> row_sum(n_labels, 0), col_sum(n_labels, 0), int_sum(n_labels, 0);
    for (auto& f : foci) {
        f.bscan_index = bscan_index;
        f.bbox = {mask.height, mask.width, -1, -1};
    }
    for (size_t i = 0; i < mask.bits.size(); ++i) {
        const int32_t l = label[i];
        if (l < 0) continue;
        const int r = static_cast<int>(i) / mask.width, c = static_cast<int>(i) % mask.width;
        FocusRegion& f = foci[l];
        ++f.area;
        row_sum[l] += r;
        col_sum[l] += c;
        int_sum[l] += img.data[i];
        f.bbox[0] = std::min(f.bbox[0], r);
        f.bbox[1] = std::min(f.bbox[1], c);
        f.bbox[2] = std::max(f.bbox[2], r);
        f.bbox[3] = std::max(f.bbox[3], c);
    }
    for (int32_t l = 0; l < n_labels; ++l) {
        foci[l].centroid = {row_sum[l] / foci[l].area, col_sum[l] / foci[l].area};
        foci[l].mean_intensity = int_sum[l] / foci[l].area;
    }
    return foci;
}

BScanResult segment_bscan(const BScan& img, const PipelineConfig& cfg) {
    cfg.validate();
    BScanResult result;
    const BScan denoised = bilateral_filter(img, cfg.sigma_s, cfg.sigma_r, cfg.bilateral_window);

    // ROI branch
    Mask roi(img.width, img.height);
    try {
        FcmParams p;
        p.c = cfg.clusters;
        p.m = cfg.fuzzifier;
        p.T = cfg.tol;
        p.max_iters = cfg.fcm_max_iters;
        p.seed = cfg.seed;
        RoiResult rr = generate_roi(denoised, p, cfg.filter_window, cfg.se_radius,
                                    cfg.filter_chain, cfg.roi_policy);
        if (!rr.converged) result.warnings.push_back("roi: fcm hit the iteration cap");
        if (rr.empty_warning) result.warnings.push_back("roi: no candidate pixels, empty mask");
        roi = std::move(rr.mask);
    } catch (const DegenerateDataError& e) {
        result.warnings.push_back(std::string("roi: degenerate image (") + e.what() + ")");
        result.mask = Mask(img.width, img.height);
        return result;
    }

    // HF estimation branch
    const ComponentTree tree = build_component_tree(denoised);
    const double delta_raw = cfg.delta * cfg.intensity_scale;
    const double g_min_raw = cfg.g_min * cfg.intensity_scale;
    std::vector<ExtremalRegion> regions =
        extract_mser(tree, delta_raw, g_min_raw, cfg.max_variation);
    regions = dedup_regions(std::move(regions), tree, delta_raw, cfg.dedup_tol, cfg.max_variation);
    const Mask estimate = regions_to_mask(regions, tree, img.width, img.height);

    Mask merged = merge_masks(roi, estimate);
    merged = size_filter(merged, cfg.min_area, cfg.max_area);
    result.foci = label_foci(merged, img, 0);
    result.mask = std::move(merged);
    return result;
}

HFReport segment_cube(const Cube& cube, const PipelineConfig& cfg) {
    cfg.validate();
    for (size_t i = 1; i < cube.bscans.size(); ++i)
        if (cube.bscans[i].width != cube.bscans[0].width ||
            cube.bscans[i].height != cube.bscans[0].height)
            throw DimensionError("segment_cube: B-scan dimensions differ across the cube");

    HFReport report;
    report.config = cfg;
    report.bscans.resize(cube.bscans.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cube.bscans.size()) return;
            try {
                report.bscans[i] = segment_bscan(cube.bscans[i], cfg);
            } catch (const std::exception& e) {
                report.bscans[i].mask = Mask(cube.bscans[i].width, cube.bscans[i].height);
                report.bscans[i].warnings.push_back(std::string("failed: ") + e.what());
            }
            for (auto& f : report.bscans[i].foci) f.bscan_index = static_cast<int>(i);
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cube.bscans.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (size_t i = 0; i < report.bscans.size(); ++i) {
        for (const auto& f : report.bscans[i].foci) {
            report.total_voxels += f.area;
            ++report.total_foci;
        }
        for (const auto& wmsg : report.bscans[i].warnings)
            report.warnings.push_back("bscan " + std::to_string(i) + ": " + wmsg);
    }
    report.volume_mm3 = quantify(report.total_voxels, cube.voxel_dims_mm);
    return report;
}

double quantify(int64_t voxel_count, const std::array<double, 3>& voxel_dims_mm) {
    if (voxel_count < 0) throw ParameterError("quantify: voxel count must be nonnegative");
    return static_cast<double>(voxel_count) * voxel_dims_mm[0] * voxel_dims_mm[1] *
           voxel_dims_mm[2];
}

std::string report_to_json(const HFReport& report) {
    ordered_json j;
    const PipelineConfig& c = report.config;
    const char* chain = c.filter_chain == FilterChain::median ? "median"
                        : c.filter_chain == FilterChain::spatial_then_median ? "spatial_then_median"
                                                                             : "spatial";
    j["config"] = {{"sigma_s", c.sigma_s},
                   {"sigma_r", c.sigma_r},
                   {"bilateral_window", c.bilateral_window},
                   {"clusters", c.clusters},
                   {"fuzzifier", c.fuzzifier},
                   {"tol", c.tol},
                   {"filter_window", c.filter_window},
                   {"se_radius", c.se_radius},
                   {"filter_chain", chain},
                   {"delta", c.delta},
                   {"g_min", c.g_min},
                   {"max_variation", c.max_variation},
                   {"intensity_scale", c.intensity_scale},
                   {"dedup_tol", c.dedup_tol},
                   {"min_area", c.min_area},
                   {"max_area", c.max_area},
                   {"seed", c.seed},
                   {"jobs", c.jobs}};
    j["bscans"] = ordered_json::array();
    for (size_t i = 0; i < report.bscans.size(); ++i) {
        const BScanResult& b = report.bscans[i];
        ordered_json jb;
        jb["index"] = i;
        jb["foci"] = ordered_json::array();
        for (const auto& f : b.foci) {
            jb["foci"].push_back({{"area", f.area},
                                  {"centroid", {f.centroid[0], f.centroid[1]}},
                                  {"bbox", {f.bbox[0], f.bbox[1], f.bbox[2], f.bbox[3]}},
                                  {"mean_intensity", f.mean_intensity}});
        }
        jb["warnings"] = b.warnings;
        j["bscans"].push_back(std::move(jb));
    }
    j["totals"] = {{"focus_count", report.total_foci},
                   {"voxel_count", report.total_voxels},
                   {"volume_mm3", report.volume_mm3}};
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

} // namespace hfseg
