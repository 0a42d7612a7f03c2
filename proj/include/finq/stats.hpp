#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace finq::stats {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Student's t cumulative distribution P(T <= t) with nu > 0 degrees of
/// freedom, through I_x(nu/2, 1/2) with x = nu / (nu + t^2).
double t_cdf(double t, double nu);

struct LogMseResult {
  std::vector<double> predictions;
  std::vector<double> truths;
  std::size_t horizon = 0;
  double mse = 0.0;
  double log_mse = 0.0;  // natural log
};

/// ln((1/T) * sum (pred - truth)^2). Throws LengthMismatch for unequal or
/// empty inputs and ZeroMse for a perfect prediction.
LogMseResult log_mse(const std::vector<double>& predictions, const std::vector<double>& truths);

enum class Alternative {
  Less,     // mean(X) < mean(Y): p = P(T <= t)
  Greater,  // mean(X) > mean(Y): p = P(T >= t)
};

struct WelchResult {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;  // n - 1 denominator
  double var_y = 0.0;
  double t = 0.0;
  double df = 0.0;  // Welch-Satterthwaite
  double p = 0.0;
  Alternative alternative = Alternative::Less;
};

/// One-sided Welch test. Throws PreconditionViolated when a group has fewer
/// than two samples and DegenerateVariance when both variances are zero.
WelchResult welch_one_sided(const std::vector<double>& x, const std::vector<double>& y,
                            Alternative alternative);

/// Reads a comma-separated list of numbers. Surrounding quotes, backticks
/// and whitespace are ignored. Throws ParseFailure or CountMismatch.
std::vector<double> parse_prediction(std::string_view text, std::size_t expected_count);

double mean(const std::vector<double>& v);
/// Sample variance with the n - 1 denominator, two-pass.
double sample_variance(const std::vector<double>& v);

}  // namespace finq::stats
