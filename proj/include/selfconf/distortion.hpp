#pragma once

// Sampled bounded-distortion constants, the fixed-point derivative limit,
// and an explicit system violating strong bounded distortion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"

namespace selfconf {

struct DistortionWitness {
  Word word;   ///< numerator word
  Word other;  ///< denominator word (a permutation of word for SBDP)
  double x = 0.0, y = 0.0;
};

struct DistortionReport {
  double max_ratio = 1.0;
  double min_ratio = 1.0;  ///< reciprocal of max_ratio by the x <-> y swap
  DistortionWitness witness;
  std::size_t words_sampled = 0;
  std::size_t grid = 0;
  std::vector<double> per_length_max;  ///< index L-1 holds the max over words of length L
  bool permutations_exhaustive = true;
  bool suspected_unbounded = false;
};

struct SamplingOptions {
  std::size_t grid = 65;
  std::uint64_t seed = 42;
  std::size_t exhaustive_length = 6;
  std::size_t random_words = 256;
  std::size_t random_permutations = 64;
};

namespace detail {

inline std::vector<Word> sample_words(std::size_t m, std::size_t max_len, const SamplingOptions& opt,
                                      std::mt19937_64& rng) {
  std::vector<Word> words;
  const std::size_t exhaustive = std::min(max_len, opt.exhaustive_length);
  Word w;
  for (std::size_t len = 1; len <= exhaustive; ++len) {
    w.assign(len, 0);
    while (true) {
      words.push_back(w);
      std::size_t pos = len;
      while (pos > 0 && w[pos - 1] + 1 == m) w[--pos] = 0;
      if (pos == 0) break;
      ++w[pos - 1];
    }
  }
  if (max_len > exhaustive) {
    std::uniform_int_distribution<std::size_t> length(exhaustive + 1, max_len);
    std::uniform_int_distribution<std::size_t> letter(0, m - 1);
    for (std::size_t k = 0; k < opt.random_words; ++k) {
      Word r(length(rng));
      for (auto& c : r) c = letter(rng);
      words.push_back(std::move(r));
    }
  }
  return words;
}

struct DerivativeRange {
  double lo = 0.0, hi = 0.0;
  double at_lo = 0.0, at_hi = 0.0;
};

inline DerivativeRange derivative_range(const IFSystem& system, const Word& w, std::size_t grid) {
  const ComposedMap phi(system, w);
  DerivativeRange r{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
  const std::size_t n = std::max<std::size_t>(grid, 2);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n - 1);
    const double d = std::abs(phi.nested_derivative(x));
    if (d < r.lo) { r.lo = d; r.at_lo = x; }
    if (d > r.hi) { r.hi = d; r.at_hi = x; }
  }
  return r;
}

inline bool trend_suspicious(const std::vector<double>& per_length) {
  // bounded distortion makes the log-increments shrink; flag when the late
  // increments stay comparable to the early ones
  if (per_length.size() < 4) return false;
  std::vector<double> inc;
  for (std::size_t k = 1; k < per_length.size(); ++k)
    inc.push_back(std::log(per_length[k]) - std::log(per_length[k - 1]));
  const std::size_t half = inc.size() / 2;
  double early = 0.0, late = 0.0;
  for (std::size_t k = 0; k < half; ++k) early += inc[k];
  for (std::size_t k = half; k < inc.size(); ++k) late += inc[k];
  early /= static_cast<double>(half);
  late /= static_cast<double>(inc.size() - half);
  return late > 1e-3 && late >= 0.5 * early;
}

}  // namespace detail

/// sup over sampled words w and grid points x, y of |phi_w'(x) / phi_w'(y)|.
inline DistortionReport bdp_constant(const IFSystem& system, std::size_t max_len,
                                     const SamplingOptions& opt = {}) {
  if (max_len < 1) throw std::invalid_argument("bdp_constant: max_len must be >= 1");
  std::mt19937_64 rng(opt.seed);
  const auto words = detail::sample_words(system.size(), max_len, opt, rng);
  DistortionReport rep;
  rep.grid = opt.grid;
  rep.per_length_max.assign(max_len, 1.0);
  rep.witness = {Word{0}, Word{0}, 0.0, 0.0};
  for (const auto& w : words) {
    const auto r = detail::derivative_range(system, w, opt.grid);
    const double ratio = r.hi / r.lo;
    rep.per_length_max[w.size() - 1] = std::max(rep.per_length_max[w.size() - 1], ratio);
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.witness = {w, w, r.at_hi, r.at_lo};
    }
  }
  rep.words_sampled = words.size();
  rep.min_ratio = 1.0 / rep.max_ratio;
  rep.suspected_unbounded = detail::trend_suspicious(rep.per_length_max);
  return rep;
}

/// sup over sampled words w, permutations sigma and grid points of
/// |phi_w'(x) / phi_{sigma w}'(y)|. All distinct permutations are used up to
/// the exhaustive length, random ones beyond.
inline DistortionReport sbdp_constant(const IFSystem& system, std::size_t max_len,
                                      const SamplingOptions& opt = {}) {
  if (max_len < 1) throw std::invalid_argument("sbdp_constant: max_len must be >= 1");
  std::mt19937_64 rng(opt.seed);
  const auto words = detail::sample_words(system.size(), max_len, opt, rng);
  DistortionReport rep;
  rep.grid = opt.grid;
  rep.per_length_max.assign(max_len, 1.0);
  rep.witness = {Word{0}, Word{0}, 0.0, 0.0};

  std::set<Word> seen_classes;
  for (const auto& w : words) {
    std::vector<Word> perms;
    if (w.size() <= opt.exhaustive_length) {
      Word sorted = w;
      std::sort(sorted.begin(), sorted.end());
      if (!seen_classes.insert(sorted).second) continue;
      do perms.push_back(sorted);
      while (std::next_permutation(sorted.begin(), sorted.end()));
    } else {
      rep.permutations_exhaustive = false;
      perms.push_back(w);
      for (std::size_t k = 0; k < opt.random_permutations; ++k) {
        Word p = w;
        std::shuffle(p.begin(), p.end(), rng);
        perms.push_back(std::move(p));
      }
    }
    double best_hi = 0.0, best_lo = std::numeric_limits<double>::infinity();
    const Word *hi_word = nullptr, *lo_word = nullptr;
    double x_hi = 0.0, y_lo = 0.0;
    for (const auto& p : perms) {
      const auto r = detail::derivative_range(system, p, opt.grid);
      if (r.hi > best_hi) { best_hi = r.hi; hi_word = &p; x_hi = r.at_hi; }
      if (r.lo < best_lo) { best_lo = r.lo; lo_word = &p; y_lo = r.at_lo; }
    }
    const double ratio = best_hi / best_lo;
    rep.per_length_max[w.size() - 1] = std::max(rep.per_length_max[w.size() - 1], ratio);
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.witness = {*hi_word, *lo_word, x_hi, y_lo};
    }
    rep.words_sampled += perms.size();
  }
  rep.min_ratio = 1.0 / rep.max_ratio;
  rep.suspected_unbounded = detail::trend_suspicious(rep.per_length_max);
  return rep;
}

struct DerivativeLimit {
  double reference = 0.0;               ///< |phi_i'(x_i)|
  std::vector<double> lengths;          ///< |phi_i^{[k]}([0,1])|, k = 1..k_max
  std::vector<double> roots;            ///< lengths[k-1]^{1/k}
  std::vector<double> ratios;           ///< lengths[k] / lengths[k-1], k = 1..k_max (lengths[-1] = 1)
  std::vector<double> local_gaps;       ///< max_x |phi_i'(phi_i^{[k]}(x)) - phi_i'(x_i)|, k = 1..k_max
};

/// k-th roots of |phi_i^{[k]}([0,1])| against |phi_i'(x_i)|. Lengths are
/// computed as the integral of |(phi_i^{[k]})'| by composite Gauss-Legendre,
/// which keeps full relative precision when the image collapses onto an
/// endpoint of [0,1].
inline DerivativeLimit derivative_limit(const IFSystem& system, std::size_t i, std::size_t k_max) {
  if (i >= system.size()) throw std::out_of_range("derivative_limit: map index out of range");
  static constexpr std::array<double, 8> nodes = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weights = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  constexpr int panels = 32;

  const Map& phi = system.map(i);
  DerivativeLimit out;
  const double xi = fixed_point(system, {i});
  out.reference = std::abs(phi.derivative(xi));
  out.lengths.assign(k_max, 0.0);
  out.local_gaps.assign(k_max, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels, h = 1.0 / panels;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      double x = a + 0.5 * h * (nodes[q] + 1.0);
      double d = 1.0;
      for (std::size_t k = 0; k < k_max; ++k) {
        d *= std::abs(phi.derivative(x));
        x = phi(x);
        out.lengths[k] += 0.5 * h * weights[q] * d;
      }
    }
  }
  for (int j = 0; j <= 256; ++j) {
    double x = j / 256.0;
    for (std::size_t k = 0; k < k_max; ++k) {
      x = phi(x);
      out.local_gaps[k] = std::max(out.local_gaps[k], std::abs(std::abs(phi.derivative(x)) - out.reference));
    }
  }
  double prev = 1.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    out.roots.push_back(std::pow(out.lengths[k], 1.0 / static_cast<double>(k + 1)));
    out.ratios.push_back(out.lengths[k] / prev);
    prev = out.lengths[k];
  }
  return out;
}

/// A two-map system with phi_1(x) = a x and phi_2 synthesized so that
///   sqrt(1-eps) phi_2'(y) > phi_2'(x)  for x in phi_1([0,1]),        y in phi_2([0,1])
///   sqrt(1-eps) phi_2'(y) > phi_2'(x)  for x in phi_1 phi_2([0,1]),  y in phi_1 phi_1 phi_2([0,1])
struct Example1System {
  IFSystem system;
  double margin = 1.01;
  double image_start = 0.0;  ///< phi_2([0,1]) = [image_start, 1]
};

namespace detail {

struct Range {
  double lo, hi;
};

inline double max_derivative_on(const Map& m, Range r, std::size_t grid) {
  double v = 0.0;
  for (std::size_t j = 0; j <= grid; ++j)
    v = std::max(v, std::abs(m.derivative(r.lo + (r.hi - r.lo) * static_cast<double>(j) / grid)));
  return v;
}

inline double min_derivative_on(const Map& m, Range r, std::size_t grid) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= grid; ++j)
    v = std::min(v, std::abs(m.derivative(r.lo + (r.hi - r.lo) * static_cast<double>(j) / grid)));
  return v;
}

inline std::optional<Example1System> try_example1(double a, double eps, double margin,
                                                   const std::vector<double>& weights) {
  const double p = 0.5 * (1.0 + a);  // phi_2([0,1]) = [p, 1], clear of [0, a]
  const double c = std::sqrt(1.0 - eps);
  const double step = margin / c;
  const Range low{a * p, a}, mid{a * a * p, a * a}, top{p, 1.0};

  std::vector<Plateau> plateaus;
  plateaus.push_back({mid.lo, mid.hi, 0.5 * mid.lo, 0.5 * (low.lo - mid.hi), step - 1.0});
  plateaus.push_back({top.lo, top.hi, 0.5 * (top.lo - a), 0.0, step * step - 1.0});
  const PlateauMap unit(0.0, 1.0, 1.0, plateaus);
  const double total = unit.primitive(1.0);
  const Map phi2 = PlateauMap(p, (1.0 - p) / total, 1.0, plateaus);

  IFSystem system({Affine{a, 0.0}, phi2}, weights);
  if (!validate(system).ok()) return std::nullopt;
  constexpr std::size_t grid = 4096;
  const bool first = max_derivative_on(phi2, {0.0, a}, grid) < c * min_derivative_on(phi2, top, grid);
  const bool second = max_derivative_on(phi2, low, grid) < c * min_derivative_on(phi2, mid, grid);
  if (!first || !second) return std::nullopt;
  return Example1System{std::move(system), margin, p};
}

}  // namespace detail

inline Example1System example1_build(double a, double eps, std::vector<double> weights = {0.5, 0.5}) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("example1_build: need 0 < a < 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("example1_build: need 0 < eps < 1");
  for (double margin : {1.01, 1.05}) {
    if (auto built = detail::try_example1(a, eps, margin, weights)) return std::move(*built);
  }
  throw ValidationError("example1_build: cannot satisfy both derivative inequalities with a valid system");
}

/// For k = 1..k_max: sup over grid x in phi_{w1}([0,1]), y in phi_{w2}([0,1]) of
/// |(phi_{w1}^{[k]})'(x) / (phi_{w2}^{[k]})'(y)|, w1 = (1,2,1,2), w2 = (2,1,1,2).
inline std::vector<double> example1_verify(const IFSystem& system, std::size_t k_max,
                                           std::size_t grid = 257) {
  if (system.size() < 2) throw std::invalid_argument("example1_verify: need two maps");
  const Word w1{0, 1, 0, 1}, w2{1, 0, 0, 1};
  const Interval d1 = compose(system, w1).image(), d2 = compose(system, w2).image();
  std::vector<double> ratios;
  Word p1, p2;
  for (std::size_t k = 1; k <= k_max; ++k) {
    p1.insert(p1.end(), w1.begin(), w1.end());
    p2.insert(p2.end(), w2.begin(), w2.end());
    const ComposedMap f1(system, p1), f2(system, p2);
    double num = 0.0, den = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= grid; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(grid);
      num = std::max(num, std::abs(f1.nested_derivative(d1.lo + t * d1.length())));
      den = std::min(den, std::abs(f2.nested_derivative(d2.lo + t * d2.length())));
    }
    ratios.push_back(num / den);
  }
  return ratios;
}

}  // namespace selfconf
