#pragma once

// Spectral exponent D from sum_i (rho_i r_i)^D = 1, log-log fits of counting
// data, and the oscillation profile N(lambda) lambda^{-D}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "selfconf/ifs.hpp"
#include "selfconf/string_solver.hpp"

namespace selfconf {

/// Pairs (rho_i, r_i); r_i is |I_i| for self-similar weights or |phi_i'(x_i)|.
struct ExponentProblem {
  std::vector<std::pair<double, double>> factors;

  double evaluate(double D) const {
    double s = 0.0;
    for (const auto& [rho, r] : factors) s += std::pow(rho * r, D);
    return s;
  }
};

/// r_i = |phi_i'(x_i)| measured at the fixed point of each map.
inline ExponentProblem exponent_problem(const IFSystem& system) {
  ExponentProblem p;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const double xi = fixed_point(system, {i});
    p.factors.emplace_back(system.weight(i), std::abs(system.map(i).derivative(xi)));
  }
  return p;
}

inline double solve_D(const ExponentProblem& problem) {
  if (problem.factors.size() < 2) throw std::invalid_argument("solve_D: need at least two factors");
  double rho_sum = 0.0, r_sum = 0.0;
  for (const auto& [rho, r] : problem.factors) {
    if (!(rho > 0.0 && rho < 1.0 && r > 0.0 && r < 1.0))
      throw std::invalid_argument("solve_D: factors must lie in (0,1)");
    rho_sum += rho;
    r_sum += r;
  }
  if (std::abs(rho_sum - 1.0) > 1e-12) throw std::invalid_argument("solve_D: weights must sum to 1");
  if (!(r_sum < 1.0)) throw std::invalid_argument("solve_D: contraction ratios must sum below 1");
  if (!(problem.evaluate(1.0) < 1.0)) throw std::invalid_argument("solve_D: root not bracketed in (0,1)");

  // D -> sum (rho r)^D - 1 decreases strictly from m - 1 at 0
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (problem.evaluate(mid) > 1.0) lo = mid; else hi = mid;
  }
  const double D = std::abs(problem.evaluate(lo) - 1.0) <= std::abs(problem.evaluate(hi) - 1.0) ? lo : hi;
  if (!(D > 0.0 && D < 0.5)) throw std::logic_error("solve_D: exponent outside (0, 1/2)");
  return D;
}

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

/// Least squares of ln N against ln lambda.
inline PowerFit empirical_exponent(const std::vector<std::pair<double, double>>& curve) {
  if (curve.size() < 10) throw std::invalid_argument("empirical_exponent: need at least 10 points");
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
  for (const auto& [lambda, n] : curve) {
    if (!(lambda > 0.0)) throw std::invalid_argument("empirical_exponent: lambda must be positive");
    if (!(n >= 1.0)) throw std::invalid_argument("empirical_exponent: counts must be >= 1");
    lmin = std::min(lmin, lambda);
    lmax = std::max(lmax, lambda);
  }
  if (std::log10(lmax / lmin) < 4.0 - 1e-9)
    throw std::invalid_argument("empirical_exponent: lambda range must span at least 4 decades");

  const double n = static_cast<double>(curve.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [lambda, count] : curve) {
    sx += std::log(lambda);
    sy += std::log(count);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lambda, count] : curve) {
    const double dx = std::log(lambda) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(count) - my);
  }
  PowerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = curve.size();
  for (const auto& [lambda, count] : curve)
    fit.max_residual = std::max(fit.max_residual,
                                std::abs(std::log(count) - fit.intercept - fit.slope * std::log(lambda)));
  return fit;
}

/// Stable points of a counting curve as (lambda, N) pairs.
inline std::vector<std::pair<double, double>> stable_pairs(const std::vector<CountPoint>& curve) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : curve)
    if (p.stable) out.emplace_back(p.lambda, static_cast<double>(p.count));
  return out;
}

/// Drops the first decade of the range when at least min_decades remain.
inline std::vector<std::pair<double, double>> drop_leading_decade(
    const std::vector<std::pair<double, double>>& curve, double min_decades = 4.0) {
  if (curve.empty()) return curve;
  const double lmin = curve.front().first, lmax = curve.back().first;
  if (std::log10(lmax / lmin) - 1.0 < min_decades - 1e-9) return curve;
  std::vector<std::pair<double, double>> out;
  for (const auto& p : curve)
    if (p.first >= lmin * 10.0 * (1.0 - 1e-12)) out.push_back(p);
  return out;
}

struct OscillationProfile {
  std::vector<std::pair<double, double>> points;  ///< (ln lambda, N lambda^{-D})
  double min = 0.0, max = 0.0;                    ///< empirical C_1, C_2
};

inline OscillationProfile oscillation_profile(const std::vector<std::pair<double, double>>& curve, double D) {
  OscillationProfile p;
  p.min = std::numeric_limits<double>::infinity();
  p.max = 0.0;
  for (const auto& [lambda, count] : curve) {
    const double v = count * std::pow(lambda, -D);
    p.points.emplace_back(std::log(lambda), v);
    p.min = std::min(p.min, v);
    p.max = std::max(p.max, v);
  }
  if (p.points.empty()) p.min = 0.0;
  return p;
}

}  // namespace selfconf
