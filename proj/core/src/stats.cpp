#include "rulekit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rulekit {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double ibeta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * ibeta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                   ibeta_continued_fraction(b, a, 1.0 - x) / b;
}

double beta_quantile(double a, double b, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("beta_quantile: p outside [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0, x = a / (a + b);
  // Bisection with Newton steps when they stay inside the bracket.
  for (int it = 0; it < 200; ++it) {
    const double f = incomplete_beta(a, b, x) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
    double next = x;
    if (std::isfinite(log_pdf)) {
      next = x - f / std::exp(log_pdf);
    }
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

std::pair<double, double> beta_central_interval(double a, double b, double level) {
  if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("beta_central_interval: level outside (0, 1)");
  const double tail = 0.5 * (1.0 - level);
  return {beta_quantile(a, b, tail), beta_quantile(a, b, 1.0 - tail)};
}

double log_truncated_poisson(int k, double lambda, int max_k) {
  if (k < 0 || k > max_k) throw std::invalid_argument("log_truncated_poisson: k outside support");
  std::vector<int> support(static_cast<size_t>(max_k) + 1);
  for (int i = 0; i <= max_k; ++i) support[static_cast<size_t>(i)] = i;
  return log_poisson_over_set(k, lambda, support);
}

double log_poisson_over_set(int k, double lambda, std::span<const int> support) {
  if (support.empty()) throw std::invalid_argument("log_poisson_over_set: empty support");
  if (!(lambda > 0.0)) throw std::invalid_argument("log_poisson_over_set: lambda must be positive");
  const double log_lambda = std::log(lambda);
  bool found = false;
  std::vector<double> terms;
  terms.reserve(support.size());
  for (int c : support) {
    if (c < 0) throw std::invalid_argument("log_poisson_over_set: negative support point");
    terms.push_back(c * log_lambda - std::lgamma(c + 1.0));
    if (c == k) found = true;
  }
  if (!found) throw std::invalid_argument("log_poisson_over_set: k not in support");
  return k * log_lambda - std::lgamma(k + 1.0) - log_sum_exp(terms);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> isotonic_non_increasing(std::span<const double> values,
                                            std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("isotonic: size mismatch");
  struct Block {
    double sum, weight;
    size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i] * weights[i], weights[i], 1});
    // Merge while the non-increasing order is violated.
    while (blocks.size() >= 2) {
      const Block& prev = blocks[blocks.size() - 2];
      const Block& last = blocks.back();
      if (prev.sum * last.weight >= last.sum * prev.weight) break;  // prev mean >= last mean
      Block merged{prev.sum + last.sum, prev.weight + last.weight, prev.count + last.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) {
    const double v = b.weight > 0.0 ? b.sum / b.weight : 0.0;
    for (size_t i = 0; i < b.count; ++i) out.push_back(v);
  }
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace rulekit
