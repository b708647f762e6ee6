#pragma once

#include <span>
#include <vector>

namespace rulekit {

// log B(a, b)
double log_beta(double a, double b);

// Regularized incomplete beta function I_x(a, b) for x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Quantile of Beta(a, b): smallest x with I_x(a, b) >= p.
double beta_quantile(double a, double b, double p);

// Central credible interval [q_{(1-level)/2}, q_{(1+level)/2}] of Beta(a, b).
std::pair<double, double> beta_central_interval(double a, double b, double level);

// log pmf of a Poisson(lambda) restricted and renormalized to {0, ..., max_k}.
double log_truncated_poisson(int k, double lambda, int max_k);

// Same, restricted to an arbitrary non-empty support set containing k.
double log_poisson_over_set(int k, double lambda, std::span<const int> support);

double log_sum_exp(std::span<const double> xs);

// Weighted least-squares projection onto non-increasing sequences
// (pool-adjacent-violators).
std::vector<double> isotonic_non_increasing(std::span<const double> values,
                                            std::span<const double> weights);

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> xs);

}  // namespace rulekit
