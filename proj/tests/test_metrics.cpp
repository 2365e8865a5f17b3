#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hfseg/metrics.hpp"
#include "oracles.hpp"

using namespace hfseg;

TEST_CASE("dice") {
    Mask a(4, 4), g(4, 4);

    SUBCASE("identical nonempty masks score 100") {
        a.set(1, 1, true);
        a.set(2, 2, true);
        g = a;
        CHECK(dice(a, g) == 100.0);
        CHECK(dice(a, g) == dice(g, a));
    }

    SUBCASE("disjoint masks score 0") {
        a.set(0, 0, true);
        g.set(3, 3, true);
        CHECK(dice(a, g) == 0.0);
    }

    SUBCASE("half overlap scores 50") {
        for (int c = 0; c < 4; ++c) a.set(0, c, true);
        g.set(0, 0, true);
        g.set(0, 1, true);
        g.set(1, 0, true);
        g.set(1, 1, true);
        CHECK(dice(a, g) == 50.0);
    }

    SUBCASE("both empty is vacuous perfect agreement") {
        CHECK(dice(a, g) == 100.0);
    }

    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(dice(a, Mask(3, 3)), DimensionError);
    }

    SUBCASE("volume mode uses min as the intersection") {
        CHECK(dice_volumes(4, 4) == 100.0);
        CHECK(dice_volumes(2, 6) == doctest::Approx(50.0));
        CHECK(dice_volumes(0, 0) == 100.0);
    }
}

TEST_CASE("pearson") {
    SUBCASE("perfect positive and negative linearity") {
        PairedSeries s;
        s.g = {1, 2, 3, 4};
        s.a = {5, 7, 9, 11}; // 2g + 3
        CHECK(pearson(s) == doctest::Approx(1.0).epsilon(1e-12));
        for (size_t i = 0; i < s.a.size(); ++i) s.a[i] = -s.g[i];
        CHECK(pearson(s) == doctest::Approx(-1.0).epsilon(1e-12));
    }

    SUBCASE("hand-computed fixture") {
        PairedSeries s;
        s.g = {1, 2, 3};
        s.a = {1, 2, 4};
        // cov = 1.5, var_g = 1, var_a = 7/3
        CHECK(pearson(s) == doctest::Approx(1.5 / std::sqrt(7.0 / 3.0)).epsilon(1e-9));
        CHECK(pearson(s) == doctest::Approx(0.98198).epsilon(1e-4));
    }

    SUBCASE("invariant under positive affine maps") {
        std::mt19937_64 rng(3);
        PairedSeries s;
        for (int i = 0; i < 40; ++i) {
            s.g.push_back(static_cast<double>(rng() % 1000));
            s.a.push_back(static_cast<double>(rng() % 1000));
        }
        const double r = pearson(s);
        PairedSeries t = s;
        for (double& v : t.a) v = 3.5 * v + 11.0;
        CHECK(pearson(t) == doctest::Approx(r).epsilon(1e-9));
        for (double& v : t.g) v = -2.0 * v + 1.0;
        CHECK(pearson(t) == doctest::Approx(-r).epsilon(1e-9));
    }

    SUBCASE("constant series are undefined") {
        PairedSeries s;
        s.g = {2, 2, 2};
        s.a = {1, 2, 3};
        CHECK_THROWS_AS(pearson(s), DegenerateDataError);
    }

    SUBCASE("sample size") {
        PairedSeries s;
        s.g = {1};
        s.a = {1};
        CHECK_THROWS_AS(pearson(s), SampleSizeError);
    }
}

TEST_CASE("msr and cnr") {
    SUBCASE("constant regions are degenerate") {
        const BScan img(10, 10, 50.0);
        CHECK_THROWS_AS(msr_cnr(img, {0, 0, 3, 3}, {5, 5, 3, 3}), DegenerateDataError);
    }

    SUBCASE("fg equal to bg gives zero contrast") {
        BScan img(10, 10, 50.0);
        std::mt19937_64 rng(5);
        for (double& v : img.data) v += static_cast<double>(rng() % 10);
        const MsrCnr out = msr_cnr(img, {2, 2, 4, 4}, {2, 2, 4, 4});
        CHECK(out.cnr == 0.0);
        CHECK(out.msr > 0.0);
    }

    SUBCASE("hand-computed values") {
        BScan img(4, 2);
        // fg row: 10, 20; bg row: 1, 3
        img.data = {10, 20, 1, 3, 10, 20, 1, 3};
        const MsrCnr out = msr_cnr(img, {0, 0, 2, 2}, {0, 2, 2, 2});
        // fg mean 15, sample sd sqrt(100/3); bg mean 2, sd sqrt(4/3)
        const double sf = std::sqrt(100.0 / 3.0), sb = std::sqrt(4.0 / 3.0);
        CHECK(out.msr == doctest::Approx(15.0 / sf).epsilon(1e-12));
        CHECK(out.cnr == doctest::Approx(13.0 / std::sqrt(0.5 * (sf * sf + sb * sb))).epsilon(1e-12));
    }

    SUBCASE("rectangles must fit and hold at least two pixels") {
        const BScan img(10, 10, 1.0);
        CHECK_THROWS_AS(msr_cnr(img, {8, 8, 5, 5}, {0, 0, 2, 2}), ParameterError);
        CHECK_THROWS_AS(msr_cnr(img, {0, 0, 1, 1}, {0, 0, 2, 2}), ParameterError);
    }
}

TEST_CASE("paired t-test") {
    SUBCASE("identical series: p = 1 by convention") {
        PairedSeries s;
        s.g = {1, 2, 3};
        s.a = {1, 2, 3};
        const TTestResult r = paired_t_test(s);
        CHECK(r.p == 1.0);
        CHECK(r.degenerate);
    }

    SUBCASE("zero-variance nonzero differences: p -> 0, flagged") {
        PairedSeries s;
        s.g = {1, 2, 3, 4};
        s.a = {2, 3, 4, 5};
        const TTestResult r = paired_t_test(s);
        CHECK(r.p == 0.0);
        CHECK(r.degenerate);
    }

    SUBCASE("matches the high-precision quadrature oracle") {
        PairedSeries s;
        s.g = {1, 2, 3, 4};
        s.a = {1.1, 2.1, 2.9, 4.1};
        const TTestResult r = paired_t_test(s);
        CHECK(r.df == 3);
        CHECK(r.t == doctest::Approx(1.0).epsilon(1e-12));
        const double p_ref = oracles::t_two_tailed_p_oracle(r.t, r.df);
        CHECK(std::abs(r.p - p_ref) < 1e-6);

        // a few more spots across magnitudes and dfs
        for (const auto& [t, df] : std::vector<std::pair<double, int>>{
                 {0.31, 5}, {2.7, 9}, {4.5, 3}, {0.05, 30}, {1.9, 19}}) {
            // build a series with this df; easier: call the oracle directly
            // against the implementation's distribution evaluation
            PairedSeries z;
            std::mt19937_64 rng(df);
            for (int i = 0; i <= df; ++i) {
                const double x = static_cast<double>(rng() % 100);
                z.g.push_back(x);
                z.a.push_back(x + (rng() % 7) - 3.0 + 0.25);
            }
            const TTestResult rz = paired_t_test(z);
            if (!rz.degenerate)
                CHECK(std::abs(rz.p - oracles::t_two_tailed_p_oracle(rz.t, rz.df)) < 1e-6);
            (void)t;
        }
    }

    SUBCASE("sample size") {
        PairedSeries s;
        s.g = {1};
        s.a = {2};
        CHECK_THROWS_AS(paired_t_test(s), SampleSizeError);
    }
}

TEST_CASE("bland-altman") {
    SUBCASE("identical series collapse to zero") {
        PairedSeries s;
        s.g = {3, 4, 5};
        s.a = {3, 4, 5};
        const BlandAltman out = bland_altman(s);
        CHECK(out.bias == 0.0);
        CHECK(out.lower == 0.0);
        CHECK(out.upper == 0.0);
    }

    SUBCASE("constant shift has zero-width limits") {
        PairedSeries s;
        s.g = {3, 4, 5};
        s.a = {5, 6, 7};
        const BlandAltman out = bland_altman(s);
        CHECK(out.bias == 2.0);
        CHECK(out.lower == 2.0);
        CHECK(out.upper == 2.0);
    }

    SUBCASE("hand evaluation for differences (-1, 1)") {
        PairedSeries s;
        s.g = {0, 0};
        s.a = {-1, 1};
        const BlandAltman out = bland_altman(s);
        CHECK(out.bias == 0.0);
        CHECK(out.upper == doctest::Approx(1.96 * std::sqrt(2.0)).epsilon(1e-12));
        CHECK(out.lower == doctest::Approx(-1.96 * std::sqrt(2.0)).epsilon(1e-12));
    }

    SUBCASE("limits contain about 95% of Gaussian differences") {
        int seeds_ok = 0;
        for (uint64_t seed = 1; seed <= 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> noise(0.0, 2.0);
            PairedSeries s;
            for (int i = 0; i < 200; ++i) {
                const double base = static_cast<double>(i % 37);
                s.g.push_back(base);
                s.a.push_back(base + noise(rng));
            }
            const BlandAltman out = bland_altman(s);
            int inside = 0;
            for (size_t i = 0; i < s.n(); ++i) {
                const double d = s.a[i] - s.g[i];
                if (d >= out.lower && d <= out.upper) ++inside;
            }
            // binomial 99% band around 0.95 * 200
            if (inside >= 182) ++seeds_ok;
        }
        CHECK(seeds_ok == 20);
    }
}

TEST_CASE("icc(2,k)") {
    SUBCASE("identical raters with varying subjects: icc = 1") {
        std::vector<double> ratings;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 3; ++j) ratings.push_back(10.0 + i);
        const IccResult r = icc2k(ratings, 6, 3);
        CHECK(r.icc == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.ci_low == doctest::Approx(1.0));
        CHECK(r.ci_high == doctest::Approx(1.0));
    }

    SUBCASE("matches the quadrature F-quantile oracle") {
        // Shrout-Fleiss style fixture: 6 subjects, 4 raters
        const std::vector<double> ratings = {
            9, 2, 5, 8, 6, 1, 3, 2, 8, 4, 6, 8, 7, 1, 2, 6, 10, 5, 6, 9, 6, 2, 4, 7};
        const int n = 6, k = 4;
        const IccResult r = icc2k(ratings, n, k);

        // independent recomputation: mean squares by definition, F quantiles
        // by bisected Simpson quadrature
        double grand = 0;
        std::vector<double> rm(n, 0), cm(k, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                grand += ratings[i * k + j];
                rm[i] += ratings[i * k + j];
                cm[j] += ratings[i * k + j];
            }
        grand /= n * k;
        for (auto& v : rm) v /= k;
        for (auto& v : cm) v /= n;
        double ssr = 0, ssc = 0, sst = 0;
        for (int i = 0; i < n; ++i) ssr += k * (rm[i] - grand) * (rm[i] - grand);
        for (int j = 0; j < k; ++j) ssc += n * (cm[j] - grand) * (cm[j] - grand);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                sst += (ratings[i * k + j] - grand) * (ratings[i * k + j] - grand);
        const double msr = ssr / (n - 1), msc = ssc / (k - 1),
                     mse = (sst - ssr - ssc) / ((n - 1) * (k - 1));
        const double icc_k = (msr - mse) / (msr + (msc - mse) / n);
        CHECK(r.icc == doctest::Approx(icc_k).epsilon(1e-12));

        const double icc_1 =
            (msr - mse) / (msr + (k - 1) * mse + (double(k) / n) * (msc - mse));
        const double a = (k * icc_1) / (n * (1 - icc_1));
        const double b = 1 + (k * icc_1 * (n - 1)) / (n * (1 - icc_1));
        const double v = std::pow(a * msc + b * mse, 2) /
                         (std::pow(a * msc, 2) / (k - 1) +
                          std::pow(b * mse, 2) / ((n - 1.0) * (k - 1.0)));
        const double fl = oracles::f_quantile_oracle(0.975, n - 1.0, v);
        const double fu = oracles::f_quantile_oracle(0.975, v, n - 1.0);
        const double low1 =
            n * (msr - fl * mse) / (fl * (k * msc + (k * n - k - n) * mse) + n * msr);
        const double up1 =
            n * (fu * msr - mse) / (k * msc + (k * n - k - n) * mse + n * fu * msr);
        const double low_k = k * low1 / (1 + (k - 1) * low1);
        const double up_k = k * up1 / (1 + (k - 1) * up1);
        CHECK(std::abs(r.ci_low - low_k) < 1e-6);
        CHECK(std::abs(r.ci_high - up_k) < 1e-6);
        CHECK(r.ci_low < r.icc);
        CHECK(r.ci_high > r.icc);
    }

    SUBCASE("independent noise: icc near zero, CI covers zero on most seeds") {
        int covered = 0;
        double icc_sum = 0.0;
        for (uint64_t seed = 1; seed <= 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> noise(0.0, 1.0);
            std::vector<double> ratings;
            const int n = 30, k = 3;
            for (int i = 0; i < n * k; ++i) ratings.push_back(noise(rng));
            const IccResult r = icc2k(ratings, n, k);
            icc_sum += r.icc;
            if (r.ci_low <= 0.0 && 0.0 <= r.ci_high) ++covered;
        }
        CHECK(std::abs(icc_sum / 20.0) < 0.2);
        CHECK(covered >= 15);
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(icc2k({1, 2, 3}, 1, 3), SampleSizeError);
        CHECK_THROWS_AS(icc2k({1, 2, 3}, 2, 2), DimensionError);
        // all-constant data has no variance anywhere
        CHECK_THROWS_AS(icc2k({5, 5, 5, 5, 5, 5}, 3, 2), DegenerateDataError);
    }
}
