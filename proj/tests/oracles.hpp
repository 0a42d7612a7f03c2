#pragma once

// Reference implementations for the statistics module. They share no code
// with src/stats.cpp. Sample moments use 50-digit binary floating point; the
// t distribution comes either from quadrature of its density (80-bit long
// double) or from Boost's incomplete beta.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <vector>

namespace finq::oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

/// P(T <= t) by integrating the Student density over the far tail, in
/// 64-bit-mantissa extended precision.
inline double t_cdf_quadrature(double t, double nu) {
  using Quad = long double;
  using std::abs;
  const Quad v(nu);
  const Quad half(0.5);
  const Quad log_norm = boost::math::lgamma((v + 1) * half) - boost::math::lgamma(v * half) -
                        half * log(v * boost::math::constants::pi<Quad>());
  auto density = [&](Quad x) {
    return exp(log_norm - (v + 1) * half * log1p(x * x / v));
  };
  boost::math::quadrature::exp_sinh<Quad> integrator;
  const Quad a = abs(Quad(t));
  // mass beyond |t|, folded onto (0, inf)
  const Quad tail = integrator.integrate([&](Quad u) { return density(a + u); }, Quad(1e-18L));
  const Quad p = t <= 0 ? tail : Quad(1) - tail;
  return static_cast<double>(p);
}

inline Big t_cdf_beta(const Big& t, const Big& nu) {
  const Big x = nu / (nu + t * t);
  const Big tail = Big(0.5) * boost::math::ibeta(nu / 2, Big(0.5), x);
  return t <= 0 ? tail : Big(1) - tail;
}

struct Welch {
  double t;
  double df;
  double p_less;
};

inline Welch welch(const std::vector<double>& x, const std::vector<double>& y) {
  auto moments = [](const std::vector<double>& v, Big& mean, Big& var) {
    Big sum = 0;
    for (double d : v) sum += Big(d);
    mean = sum / v.size();
    Big ss = 0;
    for (double d : v) ss += (Big(d) - mean) * (Big(d) - mean);
    var = ss / (v.size() - 1);
  };
  Big mx, vx, my, vy;
  moments(x, mx, vx);
  moments(y, my, vy);
  const Big n1 = x.size(), n2 = y.size();
  const Big a = vx / n1, b = vy / n2;
  const Big t = (mx - my) / sqrt(a + b);
  const Big df = (a + b) * (a + b) / (a * a / (n1 - 1) + b * b / (n2 - 1));
  return {static_cast<double>(t), static_cast<double>(df), static_cast<double>(t_cdf_beta(t, df))};
}

inline double log_mse(const std::vector<double>& pred, const std::vector<double>& truth) {
  Big s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Big r = Big(pred[i]) - Big(truth[i]);
    s += r * r;
  }
  return static_cast<double>(log(s / pred.size()));
}

}  // namespace finq::oracle
