#include "finq/stats.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "finq/error.hpp"

namespace finq::stats {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b), valid
// (fast) when x < (a + 1) / (a + b + 2). ln_x and ln_y = ln(1 - x) are
// passed in so callers can supply them without cancellation.
double beta_fraction(double a, double b, double x, double ln_x, double ln_y) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 20000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  const double ln_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(a * ln_x + b * ln_y - ln_beta) * h / a;
}

double incomplete_beta_logs(double a, double b, double x, double y, double ln_x, double ln_y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return beta_fraction(a, b, x, ln_x, ln_y);
  return 1.0 - beta_fraction(b, a, y, ln_y, ln_x);
}

std::string_view strip_wrapping(std::string_view s) {
  auto strip_front = [&]() {
    static constexpr std::string_view kCurly[] = {"“", "”", "‘", "’"};
    if (s.empty()) return false;
    const char c = s.front();
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '`') {
      s.remove_prefix(1);
      return true;
    }
    for (auto q : kCurly) {
      if (s.substr(0, q.size()) == q) {
        s.remove_prefix(q.size());
        return true;
      }
    }
    return false;
  };
  auto strip_back = [&]() {
    static constexpr std::string_view kCurly[] = {"“", "”", "‘", "’"};
    if (s.empty()) return false;
    const char c = s.back();
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '`') {
      s.remove_suffix(1);
      return true;
    }
    for (auto q : kCurly) {
      if (s.size() >= q.size() && s.substr(s.size() - q.size()) == q) {
        s.remove_suffix(q.size());
        return true;
      }
    }
    return false;
  };
  while (strip_front()) {
  }
  while (strip_back()) {
  }
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::PreconditionViolated,
                fmt::format("incomplete_beta({}, {}, {}) outside its domain", a, b, x));
  }
  const double y = 1.0 - x;
  return incomplete_beta_logs(a, b, x, y, std::log(x), std::log1p(-x));
}

double t_cdf(double t, double nu) {
  if (!(nu > 0.0) || std::isnan(t)) {
    throw Error(ErrorKind::PreconditionViolated, fmt::format("t_cdf({}, {}) undefined", t, nu));
  }
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  if (std::isinf(t2)) return t < 0 ? 0.0 : 1.0;
  // x = nu / (nu + t^2), 1 - x = t^2 / (nu + t^2), both without cancellation.
  const double x = nu / (nu + t2);
  const double y = t2 / (nu + t2);
  const double ln_x = -std::log1p(t2 / nu);
  const double ln_y = -std::log1p(nu / t2);
  const double tail = 0.5 * incomplete_beta_logs(0.5 * nu, 0.5, x, y, ln_x, ln_y);
  return t < 0 ? tail : 1.0 - tail;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorKind::PreconditionViolated, "mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw Error(ErrorKind::PreconditionViolated, "variance needs two samples");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

LogMseResult log_mse(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.size() != truths.size() || predictions.empty()) {
    throw Error(ErrorKind::LengthMismatch,
                fmt::format("{} predictions for {} truths", predictions.size(), truths.size()));
  }
  LogMseResult r;
  r.predictions = predictions;
  r.truths = truths;
  r.horizon = truths.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = predictions[i] - truths[i];
    ss += e * e;
  }
  r.mse = ss / static_cast<double>(r.horizon);
  if (r.mse == 0.0) throw Error(ErrorKind::ZeroMse, "prediction equals the truth, log undefined");
  r.log_mse = std::log(r.mse);
  return r;
}

WelchResult welch_one_sided(const std::vector<double>& x, const std::vector<double>& y,
                            Alternative alternative) {
  if (x.size() < 2 || y.size() < 2) {
    throw Error(ErrorKind::PreconditionViolated,
                fmt::format("Welch test needs two samples per group, got {} and {}", x.size(),
                            y.size()));
  }
  WelchResult r;
  r.alternative = alternative;
  r.n1 = x.size();
  r.n2 = y.size();
  r.mean_x = mean(x);
  r.mean_y = mean(y);
  r.var_x = sample_variance(x);
  r.var_y = sample_variance(y);
  if (r.var_x == 0.0 && r.var_y == 0.0) {
    throw Error(ErrorKind::DegenerateVariance, "both groups have zero variance");
  }
  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  const double ex = r.var_x / n1;
  const double ey = r.var_y / n2;
  const double se2 = ex + ey;
  r.t = (r.mean_x - r.mean_y) / std::sqrt(se2);
  r.df = se2 * se2 / (ex * ex / (n1 - 1.0) + ey * ey / (n2 - 1.0));
  r.p = alternative == Alternative::Less ? t_cdf(r.t, r.df) : t_cdf(-r.t, r.df);
  return r;
}

std::vector<double> parse_prediction(std::string_view text, std::size_t expected_count) {
  const auto body = strip_wrapping(text);
  if (body.empty()) throw Error(ErrorKind::ParseFailure, "empty prediction");
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = body.find(',', pos);
    auto token = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw Error(ErrorKind::ParseFailure,
                  fmt::format("'{}' is not a number", std::string(token)));
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.size() != expected_count) {
    throw Error(ErrorKind::CountMismatch,
                fmt::format("expected {} values, got {}", expected_count, out.size()));
  }
  return out;
}

}  // namespace finq::stats
