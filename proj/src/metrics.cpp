#include "hfseg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace hfseg {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// sample variance (n - 1)
double var_of(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

void PairedSeries::validate(size_t min_n) const {
    if (g.size() != a.size())
        throw DimensionError("paired series lengths differ: " + std::to_string(g.size()) + " vs " +
                             std::to_string(a.size()));
    if (g.size() < min_n)
        throw SampleSizeError("paired series needs at least " + std::to_string(min_n) +
                              " samples, got " + std::to_string(g.size()));
    for (size_t i = 0; i < g.size(); ++i)
        if (!std::isfinite(g[i]) || !std::isfinite(a[i]))
            throw ParameterError("paired series contains non-finite values");
}

double dice(const Mask& a, const Mask& g) {
    if (!a.same_dims(g)) throw DimensionError("dice: mask dimensions differ");
    size_t inter = 0, na = 0, ng = 0;
    for (size_t i = 0; i < a.bits.size(); ++i) {
        na += a.bits[i] != 0;
        ng += g.bits[i] != 0;
        inter += (a.bits[i] && g.bits[i]) ? 1 : 0;
    }
    if (na + ng == 0) return 100.0; // vacuous agreement
    return 200.0 * static_cast<double>(inter) / static_cast<double>(na + ng);
}

double dice_volumes(double a, double g) {
    if (a < 0 || g < 0) throw ParameterError("dice_volumes: volumes must be nonnegative");
    if (a + g == 0) return 100.0;
    return 200.0 * std::min(a, g) / (a + g);
}

double pearson(const PairedSeries& s) {
    s.validate(2);
    const double mg = mean_of(s.g), ma = mean_of(s.a);
    double cov = 0.0, vg = 0.0, va = 0.0;
    for (size_t i = 0; i < s.n(); ++i) {
        cov += (s.g[i] - mg) * (s.a[i] - ma);
        vg += (s.g[i] - mg) * (s.g[i] - mg);
        va += (s.a[i] - ma) * (s.a[i] - ma);
    }
    if (vg == 0.0 || va == 0.0)
        throw DegenerateDataError("pearson: correlation undefined for a constant series");
    return cov / std::sqrt(vg * va);
}

MsrCnr msr_cnr(const BScan& img, const Rect& fg, const Rect& bg) {
    auto collect = [&](const Rect& rect) {
        if (rect.row < 0 || rect.col < 0 || rect.rows < 1 || rect.cols < 1 ||
            rect.row + rect.rows > img.height || rect.col + rect.cols > img.width)
            throw ParameterError("msr_cnr: rectangle outside the image");
        if (static_cast<int64_t>(rect.rows) * rect.cols < 2)
            throw ParameterError("msr_cnr: rectangle must contain at least 2 pixels");
        std::vector<double> v;
        v.reserve(static_cast<size_t>(rect.rows) * rect.cols);
        for (int r = rect.row; r < rect.row + rect.rows; ++r)
            for (int c = rect.col; c < rect.col + rect.cols; ++c) v.push_back(img.at(r, c));
        return v;
    };
    const std::vector<double> f = collect(fg);
    const std::vector<double> b = collect(bg);
    const double mf = mean_of(f), mb = mean_of(b);
    const double sf = std::sqrt(var_of(f, mf)), sb = std::sqrt(var_of(b, mb));
    if (sf == 0.0) throw DegenerateDataError("msr_cnr: constant foreground region");
    MsrCnr out;
    out.msr = mf / sf;
    out.cnr = std::abs(mf - mb) / std::sqrt(0.5 * (sf * sf + sb * sb));
    return out;
}

TTestResult paired_t_test(const PairedSeries& s) {
    s.validate(2);
    std::vector<double> d(s.n());
    for (size_t i = 0; i < s.n(); ++i) d[i] = s.a[i] - s.g[i];
    const double md = mean_of(d);
    const double vd = var_of(d, md);
    TTestResult result;
    result.df = static_cast<int>(s.n()) - 1;
    if (vd == 0.0) {
        result.degenerate = true;
        if (md == 0.0) {
            result.t = 0.0;
            result.p = 1.0; // identical series by convention
        } else {
            result.t = md > 0 ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
            result.p = 0.0;
        }
        return result;
    }
    result.t = md / std::sqrt(vd / static_cast<double>(s.n()));
    const boost::math::students_t dist(result.df);
    result.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t)));
    return result;
}

BlandAltman bland_altman(const PairedSeries& s) {
    s.validate(2);
    std::vector<double> d(s.n());
    for (size_t i = 0; i < s.n(); ++i) d[i] = s.a[i] - s.g[i];
    const double md = mean_of(d);
    const double sd = std::sqrt(var_of(d, md));
    BlandAltman out;
    out.bias = md;
    out.lower = md - 1.96 * sd;
    out.upper = md + 1.96 * sd;
    return out;
}

IccResult icc2k(const std::vector<double>& ratings, int n_subjects, int k_raters) {
    if (n_subjects < 2 || k_raters < 2)
        throw SampleSizeError("icc2k: needs at least 2 subjects and 2 raters");
    if (ratings.size() != static_cast<size_t>(n_subjects) * k_raters)
        throw DimensionError("icc2k: ratings size != subjects * raters");
    for (double v : ratings)
        if (!std::isfinite(v)) throw ParameterError("icc2k: non-finite rating");

    const double n = n_subjects, k = k_raters;
    auto at = [&](int i, int j) { return ratings[static_cast<size_t>(i) * k_raters + j]; };

    double grand = 0.0;
    std::vector<double> row_mean(n_subjects, 0.0), col_mean(k_raters, 0.0);
    for (int i = 0; i < n_subjects; ++i)
        for (int j = 0; j < k_raters; ++j) {
            grand += at(i, j);
            row_mean[i] += at(i, j);
            col_mean[j] += at(i, j);
        }
    grand /= n * k;
    for (double& v : row_mean) v /= k;
    for (double& v : col_mean) v /= n;

    double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
    for (int i = 0; i < n_subjects; ++i) ss_rows += k * (row_mean[i] - grand) * (row_mean[i] - grand);
    for (int j = 0; j < k_raters; ++j) ss_cols += n * (col_mean[j] - grand) * (col_mean[j] - grand);
    for (int i = 0; i < n_subjects; ++i)
        for (int j = 0; j < k_raters; ++j) ss_total += (at(i, j) - grand) * (at(i, j) - grand);
    const double ss_err = ss_total - ss_rows - ss_cols;

    const double msr = ss_rows / (n - 1);
    const double msc = ss_cols / (k - 1);
    const double mse = std::max(0.0, ss_err) / ((n - 1) * (k - 1));

    IccResult out;
    const double denom_k = msr + (msc - mse) / n;
    if (!(std::isfinite(denom_k)) || denom_k == 0.0)
        throw DegenerateDataError("icc2k: degenerate mean squares");
    out.icc = (msr - mse) / denom_k;
    if (mse == 0.0 && msc == 0.0) {
        // raters agree exactly; the interval collapses
        out.ci_low = out.ci_high = out.icc;
        return out;
    }

    // single-rater absolute-agreement ICC and its F-based 95% interval,
    // then Spearman-Brown up to k raters (the exact transform between the
    // single and mean-rating forms)
    const double denom_1 = msr + (k - 1) * mse + (k / n) * (msc - mse);
    if (denom_1 == 0.0) throw DegenerateDataError("icc2k: degenerate mean squares");
    const double icc1 = (msr - mse) / denom_1;

    const double alpha = 0.05;
    const double a = (k * icc1) / (n * (1.0 - icc1));
    const double b = 1.0 + (k * icc1 * (n - 1.0)) / (n * (1.0 - icc1));
    const double v_num = (a * msc + b * mse) * (a * msc + b * mse);
    const double v_den = (a * msc) * (a * msc) / (k - 1) + (b * mse) * (b * mse) / ((n - 1) * (k - 1));
    const double v = v_num / v_den;

    const boost::math::fisher_f f_low(n - 1, v);
    const boost::math::fisher_f f_up(v, n - 1);
    const double fl = boost::math::quantile(f_low, 1.0 - alpha / 2.0);
    const double fu = boost::math::quantile(f_up, 1.0 - alpha / 2.0);

    const double low1 = n * (msr - fl * mse) / (fl * (k * msc + (k * n - k - n) * mse) + n * msr);
    const double up1 = n * (fu * msr - mse) / (k * msc + (k * n - k - n) * mse + n * fu * msr);

    auto spearman_brown = [&](double r1) { return k * r1 / (1.0 + (k - 1.0) * r1); };
    out.ci_low = spearman_brown(low1);
    out.ci_high = spearman_brown(up1);
    return out;
}

} // namespace hfseg
