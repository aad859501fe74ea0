#pragma once

#include <span>
#include <vector>

// Small numeric helpers shared by every module. All of them take the sample by
// span and never reorder the caller's data.
namespace sigcmp {

double mean(std::span<const double> x);

/// Sample variance with the n-1 denominator (two-pass). Zero for n < 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

double median(std::span<const double> x);

/// Median of a buffer the caller is happy to have reordered.
double median_inplace(std::vector<double>& buf);

/// Linear-interpolation quantile of an ascending-sorted sample (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double prob);

}  // namespace sigcmp
