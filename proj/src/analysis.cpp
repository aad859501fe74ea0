#include "sigcmp/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"

namespace sigcmp {

SummaryStats summarize(std::span<const double> sample) {
    if (sample.empty()) throw DataError("cannot summarize an empty sample");
    SummaryStats s;
    s.count = sample.size();
    s.mean = mean(sample);
    s.median = median(sample);
    s.std_dev = sample_sd(sample);
    const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    s.min = *lo;
    s.max = *hi;

    const double n = static_cast<double>(s.count);
    if (s.count < 3 || s.std_dev == 0.0) {
        s.degenerate = true;
        s.skewness = 0.0;
        return s;
    }
    double cubes = 0.0;
    for (double x : sample) {
        const double z = (x - s.mean) / s.std_dev;
        cubes += z * z * z;
    }
    s.skewness = n / ((n - 1.0) * (n - 2.0)) * cubes;
    return s;
}

HistogramData histogram(std::span<const double> sample, std::optional<std::size_t> bins,
                        std::string label) {
    if (sample.empty()) throw DataError("cannot build a histogram of an empty sample");
    if (bins && *bins == 0) throw ConfigError("histogram bin count must be positive");
    HistogramData h;
    h.label = std::move(label);

    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi) {
        h.bin_edges = {lo - 0.5, lo + 0.5};
        h.counts = {sample.size()};
        return h;
    }

    std::size_t k = bins.value_or(0);
    if (!bins) {
        const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sample.size()))));
        k = std::clamp<std::size_t>(root, 5, 50);
    }
    const double width = (hi - lo) / static_cast<double>(k);
    h.bin_edges.resize(k + 1);
    for (std::size_t i = 0; i < k; ++i) h.bin_edges[i] = lo + static_cast<double>(i) * width;
    h.bin_edges[k] = hi;

    h.counts.assign(k, 0);
    for (double x : sample) {
        // Bins are [e_i, e_{i+1}) except the last, which is closed.
        auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), x);
        auto idx = static_cast<std::size_t>(std::distance(h.bin_edges.begin(), it));
        idx = std::min(idx == 0 ? 0 : idx - 1, k - 1);
        ++h.counts[idx];
    }
    return h;
}

SkewClass classify_skew(const SummaryStats& stats_diff) {
    SkewClass c;
    c.gamma = stats_diff.skewness;
    c.degenerate = stats_diff.degenerate;
    const double g = std::abs(c.gamma);
    if (c.degenerate || g < 0.5) {
        c.category = SkewCategory::roughly_symmetric;
        c.recommended_statistic = CentralStatistic::mean;
    } else if (g < 1.0) {
        c.category = SkewCategory::slightly_skewed;
        c.recommended_statistic = CentralStatistic::median;
    } else {
        c.category = SkewCategory::highly_skewed;
        c.recommended_statistic = CentralStatistic::median;
    }
    return c;
}

namespace {

// Polynomial c[0] + c[1] x + ... (Horner).
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = 0.0;
    for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
    return r;
}

struct SwilkOutput {
    double w;
    double p;
};

// AS R94 for a complete (uncensored) sample sorted ascending.
SwilkOutput swilk(std::span<const double> x) {
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};
    constexpr double small = 1e-19;

    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);

    // Coefficients for the upper half of the order statistics.
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        const boost::math::normal_distribution<double> stdnorm;
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            a[i] = boost::math::quantile(stdnorm, (static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - a[0] / ssumm2;

        std::size_t first_scaled = 0;
        double fac = 0.0;
        if (n > 5) {
            first_scaled = 2;
            const double a2 = -a[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            first_scaled = 1;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (std::size_t i = first_scaled; i < half; ++i) a[i] = -a[i] / fac;
    }

    const double range = x[n - 1] - x[0];
    if (range < small) throw DegenerateError("Shapiro-Wilk: sample has zero range");

    // Full antisymmetric coefficient vector over all n order statistics.
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }

    // W as the squared correlation between data and coefficients; computing
    // 1 - W directly keeps precision when W is very close to 1.
    double sa = 0.0;
    double sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += coef[i];
        sx += x[i] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef[i] - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = std::max(0.0, (ssassx - sax) * (ssassx + sax) / (ssa * ssx));
    const double w = 1.0 - w1;

    if (n == 3) {
        // Exact distribution for n = 3.
        const double pi6 = 6.0 / std::numbers::pi;
        const double stqr = std::numbers::pi / 3.0;
        const double p = pi6 * (std::asin(std::sqrt(w)) - stqr);
        return {w, std::clamp(p, 0.0, 1.0)};
    }
    if (w1 <= 0.0) return {1.0, 1.0};

    double y = std::log(w1);
    const double lnn = std::log(an);
    double m = 0.0;
    double s = 1.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) return {w, small};
        y = -std::log(gamma - y);
        m = poly(c3, an);
        s = std::exp(poly(c4, an));
    } else {
        m = poly(c5, lnn);
        s = std::exp(poly(c6, lnn));
    }
    const boost::math::normal_distribution<double> stdnorm;
    const double p = boost::math::cdf(boost::math::complement(stdnorm, (y - m) / s));
    return {w, std::clamp(p, 0.0, 1.0)};
}

}  // namespace

NormalityResult shapiro_wilk(std::span<const double> sample, double alpha1) {
    if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw ConfigError("alpha1 must lie in (0, 1)");
    if (sample.size() < 3 || sample.size() > kShapiroWilkMaxN) {
        throw DataError("Shapiro-Wilk requires 3 <= n <= 5000 (got n = " +
                        std::to_string(sample.size()) + ")");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const auto [w, p] = swilk(sorted);

    NormalityResult r;
    r.performed = true;
    r.w_statistic = w;
    r.p_value = p;
    r.alpha1 = alpha1;
    r.verdict = p >= alpha1 ? NormalityVerdict::normal : NormalityVerdict::not_normal;
    return r;
}

std::vector<TestId> recommend(const SkewClass& skew, const NormalityResult& normality,
                              const RecommendationPolicy& policy) {
    if (skew.category == SkewCategory::roughly_symmetric &&
        normality.verdict == NormalityVerdict::normal) {
        return policy.symmetric_normal;
    }
    auto list = skew.category == SkewCategory::roughly_symmetric ? policy.symmetric_not_normal
                                                                 : policy.skewed;
    // A custom policy must still never suggest the t test without a normal verdict.
    std::erase(list, TestId::t_test);
    return list;
}

AnalysisReport analyze(const EuSeries& series, double alpha1, std::optional<std::size_t> bins,
                       const RecommendationPolicy& policy) {
    if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw ConfigError("alpha1 must lie in (0, 1)");
    if (series.n() < 2) throw DataError("analysis needs at least 2 EUs");

    AnalysisReport r;
    const auto u = series.u_values();
    const auto v = series.v_values();
    const auto w = series.diffs();
    r.stats_u = summarize(u);
    r.stats_v = summarize(v);
    r.stats_diff = summarize(w);
    r.histograms.push_back(histogram(u, bins, "u"));
    r.histograms.push_back(histogram(v, bins, "v"));
    r.histograms.push_back(histogram(w, bins, "u-v"));

    r.skew = classify_skew(r.stats_diff);
    if (r.skew.degenerate) {
        r.warnings.push_back("skewness undefined (n < 3 or zero variance); treated as roughly symmetric");
    }

    r.normality.alpha1 = alpha1;
    if (r.skew.category == SkewCategory::roughly_symmetric) {
        if (r.stats_diff.std_dev == 0.0) {
            r.warnings.push_back("Shapiro-Wilk skipped: differences have zero variance");
        } else if (w.size() < 3) {
            r.warnings.push_back("Shapiro-Wilk skipped: needs at least 3 EUs");
        } else if (w.size() > kShapiroWilkMaxN) {
            r.warnings.push_back("Shapiro-Wilk skipped: n > 5000 is outside its validity range");
        } else {
            r.normality = shapiro_wilk(w, alpha1);
        }
    }
    r.recommended_tests = recommend(r.skew, r.normality, policy);
    return r;
}

std::string_view to_string(SkewCategory c) noexcept {
    switch (c) {
        case SkewCategory::roughly_symmetric: return "roughly_symmetric";
        case SkewCategory::slightly_skewed: return "slightly_skewed";
        case SkewCategory::highly_skewed: return "highly_skewed";
    }
    return "unknown";
}

std::string_view to_string(CentralStatistic s) noexcept { return s == CentralStatistic::mean ? "mean" : "median"; }

std::string_view to_string(NormalityVerdict v) noexcept {
    switch (v) {
        case NormalityVerdict::normal: return "normal";
        case NormalityVerdict::not_normal: return "not_normal";
        case NormalityVerdict::skipped: return "skipped";
    }
    return "unknown";
}

}  // namespace sigcmp
