#include "sigcmp/kernels.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"
#include "sigcmp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sigcmp::kernels {

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

constexpr std::size_t kMaxExactFlips = 30;

double flipped_sum(std::span<const double> d, std::uint64_t mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += ((mask >> i) & 1U) ? -d[i] : d[i];
    return s;
}

// Sum of `d` with signs taken from a fresh random bit stream of trial r.
double random_flip_sum(std::span<const double> d, std::uint64_t seed, std::uint64_t r) {
    auto engine = rng::make_engine(seed, {r});
    double s = 0.0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i % 64 == 0) bits = engine();
        s += (bits & 1U) ? -d[i] : d[i];
        bits >>= 1;
    }
    return s;
}

double replicate(std::span<const double> d, ResampleStatistic stat, double center, std::uint64_t seed,
                 std::uint64_t r, std::vector<double>& buf) {
    auto engine = rng::make_engine(seed, {r});
    const std::size_t n = d.size();
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    buf.resize(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = d[pick(engine)];

    if (stat == ResampleStatistic::median) return median_inplace(buf) - center;

    const double m = mean(buf);
    const double sd = sample_sd(buf);
    const double diff = m - center;
    if (sd == 0.0) {
        if (diff == 0.0) return 0.0;
        return std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return diff / (sd / std::sqrt(static_cast<double>(n)));
}

void check_exact_size(std::span<const double> d) {
    if (d.size() > kMaxExactFlips) throw ConfigError("exact sign-flip enumeration is limited to n <= 30");
}

void check_resample_input(std::span<const double> d) {
    if (d.empty()) throw DataError("cannot resample an empty sample");
}

}  // namespace

namespace serial {

std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol) {
    check_exact_size(d);
    const std::uint64_t masks = std::uint64_t{1} << d.size();
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
        if (at_least_as_extreme(flipped_sum(d, mask), observed_sum, dir, tol)) ++hits;
    }
    return hits;
}

std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < trials; ++r) {
        if (at_least_as_extreme(random_flip_sum(d, seed, r), observed_sum, dir, tol)) ++hits;
    }
    return hits;
}

std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed) {
    check_resample_input(d);
    std::vector<double> out(trials);
    std::vector<double> buf;
    for (std::uint64_t r = 0; r < trials; ++r) out[r] = replicate(d, stat, center, seed, r, buf);
    return out;
}

}  // namespace serial

namespace parallel {

std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol) {
    check_exact_size(d);
    const auto masks = static_cast<std::int64_t>(std::uint64_t{1} << d.size());
    std::uint64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (std::int64_t mask = 0; mask < masks; ++mask) {
        if (at_least_as_extreme(flipped_sum(d, static_cast<std::uint64_t>(mask)), observed_sum, dir, tol)) ++hits;
    }
    return hits;
}

std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed) {
    const auto count = static_cast<std::int64_t>(trials);
    std::uint64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (std::int64_t r = 0; r < count; ++r) {
        if (at_least_as_extreme(random_flip_sum(d, seed, static_cast<std::uint64_t>(r)), observed_sum, dir, tol)) {
            ++hits;
        }
    }
    return hits;
}

std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed) {
    check_resample_input(d);
    std::vector<double> out(trials);
    const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel
    {
        std::vector<double> buf;
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < count; ++r) {
            out[static_cast<std::size_t>(r)] = replicate(d, stat, center, seed, static_cast<std::uint64_t>(r), buf);
        }
    }
    return out;
}

}  // namespace parallel

std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol,
                              Exec exec) {
    return exec == Exec::parallel ? parallel::sign_flip_exact(d, dir, observed_sum, tol)
                                  : serial::sign_flip_exact(d, dir, observed_sum, tol);
}

std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed, Exec exec) {
    return exec == Exec::parallel ? parallel::sign_flip_sampled(d, dir, observed_sum, tol, trials, seed)
                                  : serial::sign_flip_sampled(d, dir, observed_sum, tol, trials, seed);
}

std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed, Exec exec) {
    return exec == Exec::parallel ? parallel::bootstrap_replicates(d, stat, center, trials, seed)
                                  : serial::bootstrap_replicates(d, stat, center, trials, seed);
}

}  // namespace sigcmp::kernels
