#pragma once

// Resampling kernels. Every kernel exists twice: a plain serial loop kept as the
// reference, and an OpenMP version. Trial r always draws from substream (seed, r),
// so both produce identical output for any thread count; the test suite checks
// this and bench/ measures the speedup.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <vector>

#include "sigcmp/test_id.hpp"

namespace sigcmp::kernels {

enum class Exec { serial, parallel };

/// Number of OpenMP threads a parallel kernel would use (1 without OpenMP).
int max_threads() noexcept;

enum class ResampleStatistic {
    studentized_mean,  // (mean* - center) / (sd* / sqrt(n))
    median,            // median* - center
};

/// Whether `value` is at least as extreme as `observed` in the given direction.
/// `tol` absorbs rounding between mathematically equal sums.
constexpr bool at_least_as_extreme(double value, double observed, Direction dir, double tol) noexcept {
    switch (dir) {
        case Direction::right: return value >= observed - tol;
        case Direction::left: return value <= observed + tol;
        default: {
            const double a = value < 0 ? -value : value;
            const double b = observed < 0 ? -observed : observed;
            return a >= b - tol;
        }
    }
}

namespace serial {

std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol);
std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed);
std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed);

}  // namespace serial

namespace parallel {

std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol);
std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed);
std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed);

}  // namespace parallel

/// Counts the 2^n sign assignments of `d` whose sum is at least as extreme as
/// `observed_sum`. n <= 30.
std::uint64_t sign_flip_exact(std::span<const double> d, Direction dir, double observed_sum, double tol,
                              Exec exec = Exec::parallel);

/// Counts extreme sums among `trials` random sign assignments.
std::uint64_t sign_flip_sampled(std::span<const double> d, Direction dir, double observed_sum, double tol,
                                std::uint64_t trials, std::uint64_t seed, Exec exec = Exec::parallel);

/// `trials` bootstrap replicates of the recentred statistic, replicate r drawn from
/// substream (seed, r).
std::vector<double> bootstrap_replicates(std::span<const double> d, ResampleStatistic stat, double center,
                                         std::uint64_t trials, std::uint64_t seed,
                                         Exec exec = Exec::parallel);

/// out[i] = body(i) for i in [0, count). Bodies must be independent; any exception
/// is rethrown after the loop (the one from the lowest index wins).
template <typename T, typename Body>
std::vector<T> map_indices(std::size_t count, Exec exec, Body&& body) {
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                out[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                out[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace sigcmp::kernels
