#ifndef HFSEG_METRICS_HPP
#define HFSEG_METRICS_HPP

#include <cstddef>
#include <vector>

#include "hfseg/image.hpp"

namespace hfseg {

struct PairedSeries {
    std::vector<double> g; // ground truth
    std::vector<double> a; // automatic
    size_t n() const { return g.size(); }
    void validate(size_t min_n = 2) const;
};

// Dice similarity in percent; two empty masks score 100 (vacuous agreement).
double dice(const Mask& a, const Mask& g);
// Volume mode: min as intersection surrogate.
double dice_volumes(double a, double g);

// Sample correlation coefficient; constant series are an error.
double pearson(const PairedSeries& s);

struct MsrCnr {
    double msr = 0;
    double cnr = 0;
};

struct Rect {
    int row = 0, col = 0, rows = 0, cols = 0;
};

// Mean-to-standard-deviation ratio of fg and contrast-to-noise ratio
// between fg and bg rectangles (sample std-devs).
MsrCnr msr_cnr(const BScan& img, const Rect& fg, const Rect& bg);

struct TTestResult {
    double t = 0;
    double p = 1;
    int df = 0;
    bool degenerate = false; // all-zero or zero-variance differences
};

// Two-tailed paired t-test on a - g.
TTestResult paired_t_test(const PairedSeries& s);

struct BlandAltman {
    double bias = 0;
    double lower = 0;
    double upper = 0; // bias +/- 1.96 * SD(a - g)
};

BlandAltman bland_altman(const PairedSeries& s);

struct IccResult {
    double icc = 0;
    double ci_low = 0;
    double ci_high = 0;
};

// ICC(2,k): two-way random effects, absolute agreement, mean of k raters,
// with the standard F-based 95% confidence interval.
// ratings is row-major n_subjects x k_raters.
IccResult icc2k(const std::vector<double>& ratings, int n_subjects, int k_raters);

} // namespace hfseg

#endif
