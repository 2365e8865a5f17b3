// hfseg: segmentation and quantification of hyperreflective foci in
// SD-OCT B-scans and cubes, with per-stage subcommands for inspection.
#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hfseg/image.hpp"
#include "hfseg/maxtree.hpp"
#include "hfseg/metrics.hpp"
#include "hfseg/morphology.hpp"
#include "hfseg/pipeline.hpp"
#include "hfseg/roi_fcm.hpp"

namespace fs = std::filesystem;
using namespace hfseg;

namespace {

enum LogLevel { LOG_ERROR = 0, LOG_WARN, LOG_INFO, LOG_DEBUG };

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("HFSEG_LOG");
        if (!env) return LOG_WARN;
        const std::string v(env);
        if (v == "error") return LOG_ERROR;
        if (v == "info") return LOG_INFO;
        if (v == "debug") return LOG_DEBUG;
        return LOG_WARN;
    }();
    return level;
}

void logf(int level, const char* fmt, ...) {
    if (level > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "hfseg [%s] ", names[level]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fprintf(stderr, "\n");
}

struct CommonOpts {
    PipelineConfig cfg;
    std::string filter_chain = "median";
    std::string out_dir = "out";
};

void apply_chain(CommonOpts& opts) {
    if (opts.filter_chain == "median") {
        opts.cfg.filter_chain = FilterChain::median;
    } else if (opts.filter_chain == "spatial_then_median") {
        opts.cfg.filter_chain = FilterChain::spatial_then_median;
    } else if (opts.filter_chain == "spatial") {
        opts.cfg.filter_chain = FilterChain::spatial;
    } else {
        throw ParameterError("unknown filter chain: " + opts.filter_chain);
    }
}

void add_bilateral_flags(CLI::App* cmd, PipelineConfig& cfg) {
    cmd->add_option("--sigma-s", cfg.sigma_s, "Bilateral spatial std-dev in px")
        ->capture_default_str();
    cmd->add_option("--sigma-r", cfg.sigma_r, "Bilateral range std-dev in intensity")
        ->capture_default_str();
    cmd->add_option("--bilateral-window", cfg.bilateral_window, "Bilateral window (odd px)")
        ->capture_default_str();
}

void add_roi_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--clusters", opts.cfg.clusters, "FCM cluster count c")->capture_default_str();
    cmd->add_option("--fuzzifier", opts.cfg.fuzzifier, "FCM fuzzifier m")->capture_default_str();
    cmd->add_option("--window", opts.cfg.filter_window, "Membership filter window w (odd px)")
        ->capture_default_str();
    cmd->add_option("--tol", opts.cfg.tol, "FCM convergence threshold T")->capture_default_str();
    cmd->add_option("--se-radius", opts.cfg.se_radius, "Disk radius for closing reconstruction")
        ->capture_default_str();
    cmd->add_option("--filter-chain", opts.filter_chain,
                    "Membership filter chain: median|spatial_then_median|spatial")
        ->capture_default_str();
}

void add_mser_flags(CLI::App* cmd, PipelineConfig& cfg) {
    cmd->add_option("--delta", cfg.delta, "Stability range (normalized units)")
        ->capture_default_str();
    cmd->add_option("--g-min", cfg.g_min, "Minimum region level (normalized units)")
        ->capture_default_str();
    cmd->add_option("--max-variation", cfg.max_variation, "Stability cap")->capture_default_str();
    cmd->add_option("--intensity-scale", cfg.intensity_scale, "Gray levels per normalized unit")
        ->capture_default_str();
    cmd->add_option("--dedup-tol", cfg.dedup_tol, "Duplicate-region area tolerance")
        ->capture_default_str();
}

void add_post_flags(CLI::App* cmd, PipelineConfig& cfg) {
    cmd->add_option("--min-area", cfg.min_area, "Minimum focus area in px")->capture_default_str();
    cmd->add_option("--max-area", cfg.max_area, "Maximum focus area in px (cut-off)")
        ->capture_default_str();
}

void add_all_flags(CLI::App* cmd, CommonOpts& opts) {
    add_bilateral_flags(cmd, opts.cfg);
    add_roi_flags(cmd, opts);
    add_mser_flags(cmd, opts.cfg);
    add_post_flags(cmd, opts.cfg);
    cmd->add_option("--seed", opts.cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--jobs", opts.cfg.jobs, "Worker threads for cube processing")
        ->capture_default_str();
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    cmd->set_config("--config", "", "Flat key=value config file (flags take precedence)");
}

std::string zero_pad(size_t value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

CubeLayout parse_dims(const std::string& dims) {
    CubeLayout layout;
    if (dims.empty()) return layout;
    unsigned w = 0, h = 0, n = 0;
    if (std::sscanf(dims.c_str(), "%ux%ux%u", &w, &h, &n) != 3 || !w || !h || !n)
        throw ParameterError("bad --dims, expected WxHxN: " + dims);
    layout.width = static_cast<int>(w);
    layout.height = static_cast<int>(h);
    layout.n_bscans = static_cast<int>(n);
    layout.voxel_dims_mm = {6.0 / w, 6.0 / n, 2.0 / h};
    return layout;
}

// minimal line/scatter SVG, enough for sweep curves and eval plots
std::string render_svg(const std::vector<std::pair<double, double>>& points,
                       const std::string& x_label, const std::string& y_label, bool line) {
    const int width = 640, height = 420, margin = 60;
    double x0 = points[0].first, x1 = points[0].first;
    double y0 = points[0].second, y1 = points[0].second;
    for (const auto& [x, y] : points) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin);
    };
    char buf[256];
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", margin,
                  height - margin, width - margin, height - margin);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", margin,
                  margin, margin, height - margin);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-size=\"14\">%s</text>\n",
                  width / 2 - 20, height - 15, x_label.c_str());
    svg += buf;
    std::snprintf(
        buf, sizeof buf,
        "<text x=\"15\" y=\"%d\" font-size=\"14\" transform=\"rotate(-90 15 %d)\">%s</text>\n",
        height / 2, height / 2, y_label.c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-size=\"11\">%.4g</text>\n",
                  margin - 10, height - margin + 18, x0);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-size=\"11\">%.4g</text>\n",
                  width - margin - 10, height - margin + 18, x1);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"8\" y=\"%d\" font-size=\"11\">%.4g</text>\n",
                  height - margin + 4, y0);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"8\" y=\"%d\" font-size=\"11\">%.4g</text>\n",
                  margin + 4, y1);
    svg += buf;
    if (line && points.size() > 1) {
        svg += "<polyline fill=\"none\" stroke=\"#c03030\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : points) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x), py(y));
            svg += buf;
        }
        svg += "\"/>\n";
    }
    for (const auto& [x, y] : points) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"#3050c0\"/>\n",
                      px(x), py(y));
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".pgm" || ext == ".pnm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ---- subcommand bodies ------------------------------------------------------

int run_denoise(const CommonOpts& opts, const std::string& image) {
    const BScan img = load_bscan(image);
    const BScan out =
        bilateral_filter(img, opts.cfg.sigma_s, opts.cfg.sigma_r, opts.cfg.bilateral_window);
    fs::create_directories(opts.out_dir);
    const fs::path path = fs::path(opts.out_dir) / (fs::path(image).stem().string() + ".png");
    save_bscan(path.string(), out);
    logf(LOG_INFO, "denoised %s -> %s", image.c_str(), path.string().c_str());
    return 0;
}

int run_roi(const CommonOpts& opts, const std::string& image) {
    const BScan img = load_bscan(image);
    const BScan den =
        bilateral_filter(img, opts.cfg.sigma_s, opts.cfg.sigma_r, opts.cfg.bilateral_window);
    FcmParams p;
    p.c = opts.cfg.clusters;
    p.m = opts.cfg.fuzzifier;
    p.T = opts.cfg.tol;
    p.max_iters = opts.cfg.fcm_max_iters;
    p.seed = opts.cfg.seed;
    const RoiResult roi = generate_roi(den, p, opts.cfg.filter_window, opts.cfg.se_radius,
                                       opts.cfg.filter_chain, opts.cfg.roi_policy);
    fs::create_directories(opts.out_dir);
    const fs::path path = fs::path(opts.out_dir) / (fs::path(image).stem().string() + ".png");
    save_mask(path.string(), roi.mask);
    std::printf("centroids:");
    for (double c : roi.centroids) std::printf(" %.6g", c);
    std::printf("\niterations: %d\nconverged: %s\n", roi.iterations,
                roi.converged ? "true" : "false");
    if (roi.empty_warning) std::printf("warning: empty candidate set\n");
    return 0;
}

int run_mser(const CommonOpts& opts, const std::string& image) {
    const BScan img = load_bscan(image);
    const BScan den =
        bilateral_filter(img, opts.cfg.sigma_s, opts.cfg.sigma_r, opts.cfg.bilateral_window);
    const ComponentTree tree = build_component_tree(den);
    const double delta = opts.cfg.delta * opts.cfg.intensity_scale;
    const double g_min = opts.cfg.g_min * opts.cfg.intensity_scale;
    std::vector<ExtremalRegion> regions = extract_mser(tree, delta, g_min, opts.cfg.max_variation);
    regions =
        dedup_regions(std::move(regions), tree, delta, opts.cfg.dedup_tol, opts.cfg.max_variation);
    fs::create_directories(opts.out_dir);
    const std::string stem = fs::path(image).stem().string();
    save_mask((fs::path(opts.out_dir) / (stem + ".png")).string(),
              regions_to_mask(regions, tree, img.width, img.height));
    std::string csv = "node,level,area,psi,mu_row,mu_col\n";
    char line[160];
    for (const auto& r : regions) {
        std::snprintf(line, sizeof line, "%d,%d,%lld,%.9g,%.9g,%.9g\n", r.node, r.level,
                      static_cast<long long>(r.area), r.stability, r.centroid[0], r.centroid[1]);
        csv += line;
    }
    write_file(fs::path(opts.out_dir) / (stem + "_regions.csv"), csv);
    logf(LOG_INFO, "%zu extremal regions", regions.size());
    return 0;
}

int run_segment(const CommonOpts& opts, const std::string& image) {
    const BScan img = load_bscan(image);
    const BScanResult res = segment_bscan(img, opts.cfg);
    fs::create_directories(opts.out_dir);
    const std::string stem = fs::path(image).stem().string();
    save_mask((fs::path(opts.out_dir) / (stem + ".png")).string(), res.mask);
    save_overlay_png((fs::path(opts.out_dir) / (stem + "_overlay.png")).string(), img, res.mask);

    HFReport report;
    report.config = opts.cfg;
    report.bscans.push_back(res);
    for (const auto& f : res.foci) {
        report.total_voxels += f.area;
        ++report.total_foci;
    }
    for (const auto& w : res.warnings) report.warnings.push_back("bscan 0: " + w);
    write_file(fs::path(opts.out_dir) / (stem + "_report.json"), report_to_json(report));
    return 0;
}

int run_segment_cube(const CommonOpts& opts, const std::string& cube_path,
                     const std::string& dims) {
    const CubeLayout layout = parse_dims(dims);
    const Cube cube = load_cube(cube_path, layout);
    logf(LOG_INFO, "segmenting cube of %zu B-scans with %d jobs", cube.bscans.size(),
         opts.cfg.jobs);
    const HFReport report = segment_cube(cube, opts.cfg);
    fs::create_directories(opts.out_dir);
    for (size_t i = 0; i < report.bscans.size(); ++i) {
        save_mask((fs::path(opts.out_dir) / ("mask_" + zero_pad(i, 3) + ".png")).string(),
                  report.bscans[i].mask);
        save_overlay_png(
            (fs::path(opts.out_dir) / ("overlay_" + zero_pad(i, 3) + ".png")).string(),
            cube.bscans[i], report.bscans[i].mask);
    }
    write_file(fs::path(opts.out_dir) / "report.json", report_to_json(report));
    std::printf("foci: %lld\nvoxels: %lld\nvolume_mm3: %.9g\n",
                static_cast<long long>(report.total_foci),
                static_cast<long long>(report.total_voxels), report.volume_mm3);
    return 0;
}

int run_phantom(const CommonOpts& opts, int count, int n_foci, double speckle, int width,
                int height) {
    fs::create_directories(fs::path(opts.out_dir) / "images");
    fs::create_directories(fs::path(opts.out_dir) / "masks");
    for (int i = 0; i < count; ++i) {
        const PhantomSpec spec = random_phantom_spec(
            opts.cfg.seed + static_cast<uint64_t>(i), n_foci, speckle, width, height);
        const Phantom ph = synth_phantom(spec);
        const std::string name = "img_" + zero_pad(static_cast<size_t>(i), 3) + ".png";
        save_bscan((fs::path(opts.out_dir) / "images" / name).string(), ph.image);
        save_mask((fs::path(opts.out_dir) / "masks" / name).string(), ph.mask);
    }
    logf(LOG_INFO, "wrote %d phantom pairs under %s", count, opts.out_dir.c_str());
    return 0;
}

int run_eval(const CommonOpts& opts, const std::string& pred_dir, const std::string& gt_dir) {
    const std::vector<fs::path> pred = list_images(pred_dir);
    const std::vector<fs::path> gt = list_images(gt_dir);
    if (pred.empty() || gt.empty()) throw IoError("eval: empty prediction or ground-truth set");
    std::map<std::string, fs::path> gt_by_name;
    for (const auto& p : gt) gt_by_name[p.filename().string()] = p;
    std::vector<std::string> unmatched;
    for (const auto& p : pred)
        if (!gt_by_name.count(p.filename().string())) unmatched.push_back(p.filename().string());
    if (pred.size() != gt.size() || !unmatched.empty()) {
        std::string msg = "eval: unmatched files:";
        for (const auto& u : unmatched) msg += " " + u;
        if (pred.size() != gt.size())
            msg += " (" + std::to_string(pred.size()) + " predictions vs " +
                   std::to_string(gt.size()) + " ground truths)";
        throw ConsistencyError(msg);
    }

    std::string csv = "metric,group,value,extras\n";
    char line[256];
    PairedSeries volumes;
    double dice_sum = 0.0;
    for (const auto& p : pred) {
        const Mask a = load_mask(p.string());
        const Mask g = load_mask(gt_by_name[p.filename().string()].string());
        const double d = dice(a, g);
        dice_sum += d;
        const bool vacuous = a.popcount() == 0 && g.popcount() == 0;
        std::snprintf(line, sizeof line, "dice,%s,%.9g,%s\n", p.filename().c_str(), d,
                      vacuous ? "vacuous" : "");
        csv += line;
        volumes.a.push_back(static_cast<double>(a.popcount()));
        volumes.g.push_back(static_cast<double>(g.popcount()));
    }
    std::snprintf(line, sizeof line, "dice,mean,%.9g,n=%zu\n", dice_sum / pred.size(), pred.size());
    csv += line;
    if (volumes.n() >= 2) {
        try {
            std::snprintf(line, sizeof line, "pearson,volumes,%.9g,\n", pearson(volumes));
            csv += line;
        } catch (const DegenerateDataError&) {
            csv += "pearson,volumes,nan,undefined (constant series)\n";
        }
        const TTestResult t = paired_t_test(volumes);
        std::snprintf(line, sizeof line, "ttest_p,volumes,%.9g,t=%.9g;df=%d%s\n", t.p, t.t, t.df,
                      t.degenerate ? ";degenerate" : "");
        csv += line;
        const BlandAltman ba = bland_altman(volumes);
        std::snprintf(line, sizeof line, "bland_altman,volumes,%.9g,lower=%.9g;upper=%.9g\n",
                      ba.bias, ba.lower, ba.upper);
        csv += line;
    }
    fs::create_directories(opts.out_dir);
    write_file(fs::path(opts.out_dir) / "metrics.csv", csv);
    std::vector<std::pair<double, double>> points;
    for (size_t i = 0; i < volumes.n(); ++i) points.emplace_back(volumes.g[i], volumes.a[i]);
    write_file(fs::path(opts.out_dir) / "volumes.svg",
               render_svg(points, "ground truth px", "automatic px", false));
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int run_sweep(const CommonOpts& opts, const std::string& axis, const std::string& values_csv,
              int count, int n_foci, double speckle) {
    std::vector<double> values;
    {
        std::string token;
        std::istringstream in(values_csv);
        while (std::getline(in, token, ',')) {
            if (!token.empty()) values.push_back(std::stod(token));
        }
    }
    if (values.empty()) throw ParameterError("sweep: no values given");
    if (axis != "m" && axis != "w" && axis != "T" && axis != "delta" && axis != "g")
        throw ParameterError("sweep: axis must be one of m, w, T, delta, g");

    // one phantom batch, reused for every swept value
    std::vector<Phantom> batch;
    for (int i = 0; i < count; ++i)
        batch.push_back(synth_phantom(random_phantom_spec(
            opts.cfg.seed + static_cast<uint64_t>(i) + 1, n_foci + i % 5, speckle, 512, 1024)));

    std::string csv = "value,dsc\n";
    char line[64];
    std::vector<std::pair<double, double>> points;
    for (const double v : values) {
        PipelineConfig cfg = opts.cfg;
        if (axis == "m") cfg.fuzzifier = v;
        if (axis == "w") cfg.filter_window = static_cast<int>(v);
        if (axis == "T") cfg.tol = v;
        if (axis == "delta") cfg.delta = v;
        if (axis == "g") cfg.g_min = v;
        cfg.validate();
        double dsc_sum = 0.0;
        for (size_t i = 0; i < batch.size(); ++i) {
            cfg.seed = opts.cfg.seed + i + 1;
            const BScanResult res = segment_bscan(batch[i].image, cfg);
            dsc_sum += dice(res.mask, batch[i].mask);
        }
        const double dsc = dsc_sum / batch.size();
        std::snprintf(line, sizeof line, "%.9g,%.9g\n", v, dsc);
        csv += line;
        points.emplace_back(v, dsc);
        logf(LOG_INFO, "sweep %s=%.4g -> dsc %.3f", axis.c_str(), v, dsc);
    }
    fs::create_directories(opts.out_dir);
    write_file(fs::path(opts.out_dir) / "sweep.csv", csv);
    write_file(fs::path(opts.out_dir) / "sweep.svg", render_svg(points, axis, "DSC %", true));
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int run_tree_dump(const CommonOpts& opts, const std::string& image, const std::string& out_file) {
    const BScan img = load_bscan(image);
    const ComponentTree tree = build_component_tree(img);
    const std::string csv = dump_tree_csv(tree, opts.cfg.delta * opts.cfg.intensity_scale);
    if (out_file.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        write_file(out_file, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperreflective-foci segmentation and quantification for SD-OCT"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string image, cube_path, dims, pred_dir, gt_dir, axis, values, tree_out;
    int count = 1, n_foci = 8, width = 512, height = 1024;
    double speckle = 0.10;

    auto* denoise = app.add_subcommand("denoise", "Bilateral-denoise a single B-scan");
    denoise->add_option("--image", image, "Input B-scan (PGM or PNG)")->required();
    add_bilateral_flags(denoise, opts.cfg);
    denoise->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    denoise->set_config("--config");

    auto* roi = app.add_subcommand("roi", "Generate the retina-band ROI mask");
    roi->add_option("--image", image)->required();
    add_bilateral_flags(roi, opts.cfg);
    add_roi_flags(roi, opts);
    roi->add_option("--seed", opts.cfg.seed)->capture_default_str();
    roi->add_option("--out", opts.out_dir)->capture_default_str();
    roi->set_config("--config");

    auto* mser = app.add_subcommand("mser", "Extract maximally stable bright regions");
    mser->add_option("--image", image)->required();
    add_bilateral_flags(mser, opts.cfg);
    add_mser_flags(mser, opts.cfg);
    mser->add_option("--out", opts.out_dir)->capture_default_str();
    mser->set_config("--config");

    auto* segment = app.add_subcommand("segment", "Segment one B-scan end to end");
    segment->add_option("--image", image)->required();
    add_all_flags(segment, opts);

    auto* segment_cube = app.add_subcommand("segment-cube", "Segment a raw SD-OCT cube");
    segment_cube->add_option("--cube", cube_path, "Raw cube file (B-scan major, u8)")->required();
    segment_cube->add_option("--dims", dims, "Cube dims WxHxN (default 512x1024x128)");
    add_all_flags(segment_cube, opts);

    auto* phantom = app.add_subcommand("phantom", "Write synthetic phantom image/mask pairs");
    phantom->add_option("--count", count, "Number of phantoms")->capture_default_str();
    phantom->add_option("--foci", n_foci, "Foci per phantom")->capture_default_str();
    phantom->add_option("--speckle", speckle, "Multiplicative speckle level")
        ->capture_default_str();
    phantom->add_option("--width", width)->capture_default_str();
    phantom->add_option("--height", height)->capture_default_str();
    phantom->add_option("--seed", opts.cfg.seed)->capture_default_str();
    phantom->add_option("--out", opts.out_dir)->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    eval->add_option("--pred", pred_dir, "Directory of predicted masks")->required();
    eval->add_option("--gt", gt_dir, "Directory of ground-truth masks")->required();
    eval->add_option("--out", opts.out_dir)->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "DSC curve over one pipeline parameter");
    sweep->add_option("--axis", axis, "Swept parameter: m, w, T, delta or g")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--count", count, "Phantom batch size")->capture_default_str();
    sweep->add_option("--foci", n_foci)->capture_default_str();
    sweep->add_option("--speckle", speckle)->capture_default_str();
    add_all_flags(sweep, opts);

    auto* tree_dump = app.add_subcommand("tree-dump", "Dump the component tree as CSV");
    tree_dump->add_option("--image", image)->required();
    tree_dump->add_option("--delta", opts.cfg.delta)->capture_default_str();
    tree_dump->add_option("--intensity-scale", opts.cfg.intensity_scale)->capture_default_str();
    tree_dump->add_option("--out", tree_out, "Output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_chain(opts);
        if (denoise->parsed()) return run_denoise(opts, image);
        if (roi->parsed()) return run_roi(opts, image);
        if (mser->parsed()) return run_mser(opts, image);
        if (segment->parsed()) return run_segment(opts, image);
        if (segment_cube->parsed()) return run_segment_cube(opts, cube_path, dims);
        if (phantom->parsed()) return run_phantom(opts, count, n_foci, speckle, width, height);
        if (eval->parsed()) return run_eval(opts, pred_dir, gt_dir);
        if (sweep->parsed()) return run_sweep(opts, axis, values, count, n_foci, speckle);
        if (tree_dump->parsed()) return run_tree_dump(opts, image, tree_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hfseg: %s\n", e.what());
        return 1;
    }
    return 0;
}
