#pragma once

// Conjugating a self-conformal system to its affine model: S_i(x) = c_i + phi_i'(x_i) x,
// the map g with g(phi_w(0)) = S_w(0), g(phi_w(1)) = S_w(1), linear on gap images,
// and checks that mu = mu_0 o g.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"
#include "selfconf/measure.hpp"

namespace selfconf {

struct AffineModel {
  std::vector<Affine> maps;
  std::vector<double> weights;

  IFSystem system() const { return IFSystem(std::vector<Map>(maps.begin(), maps.end()), weights); }
  double slope(std::size_t i) const { return std::abs(maps[i].a); }
};

namespace detail {

/// Lengths of the m+1 gaps [0, lo_1), (hi_i, lo_{i+1}), (hi_m, 1] of a system.
inline std::vector<double> all_gap_lengths(const IFSystem& s) {
  std::vector<double> g;
  g.push_back(std::max(0.0, s.image(0).lo));
  for (std::size_t i = 1; i < s.size(); ++i) g.push_back(std::max(0.0, s.image(i).lo - s.image(i - 1).hi));
  g.push_back(std::max(0.0, 1.0 - s.image(s.size() - 1).hi));
  return g;
}

/// Boundary points 0, lo_1, hi_1, ..., lo_m, hi_m, 1.
inline std::vector<double> boundary_points(const IFSystem& s) {
  std::vector<double> b{0.0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    b.push_back(s.image(i).lo);
    b.push_back(s.image(i).hi);
  }
  b.push_back(1.0);
  return b;
}

}  // namespace detail

/// Slopes |phi_i'(x_i)| with the orientation of phi_i; the slack
/// 1 - sum |I_i| is spread over the model gaps in proportion to the source
/// gaps, so touching images stay touching.
inline AffineModel build_affine_model(const IFSystem& system) {
  const std::size_t m = system.size();
  std::vector<double> slopes(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    slopes[i] = std::abs(system.map(i).derivative(fixed_point(system, {i})));
    total += slopes[i];
  }
  if (!(total < 1.0)) throw ValidationError("affine model: sum of |phi_i'(x_i)| is not below 1");
  const auto source_gaps = detail::all_gap_lengths(system);
  double source_total = 0.0;
  for (double g : source_gaps) source_total += g;
  if (!(source_total > 0.0)) throw ValidationError("affine model: source images leave no gaps");

  AffineModel model;
  model.weights = system.weights();
  const double slack = 1.0 - total;
  double left = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    left += slack * source_gaps[i] / source_total;
    if (system.reverses(i)) model.maps.push_back({-slopes[i], left + slopes[i]});
    else model.maps.push_back({slopes[i], left});
    left += slopes[i];
  }
  return model;
}

/// g: [0,1] -> [0,1] with mu = mu_0 o g. Evaluated by descent: inside
/// phi_i([0,1]) use g = S_i o g o phi_i^{-1}, on a gap interpolate linearly
/// between the model gap endpoints, and stop once the accumulated affine
/// factor |S_w'| is below the tolerance.
class DeformationMap {
 public:
  DeformationMap(IFSystem source, AffineModel model, double tol = 1e-12)
      : source_(std::move(source)), model_(std::move(model)), model_system_(model_.system()), tol_(tol) {
    if (model_.maps.size() != source_.size())
      throw ValidationError("deformation: model and source have different map counts");
    for (std::size_t i = 0; i < source_.size(); ++i) {
      if (source_.reverses(i) != model_system_.reverses(i))
        throw ValidationError("deformation: orientation of map " + std::to_string(i + 1) + " differs");
    }
    const auto gs = detail::all_gap_lengths(source_), gm = detail::all_gap_lengths(model_system_);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      if ((gs[j] > 1e-15) != (gm[j] > 1e-15))
        throw ValidationError("deformation: gap " + std::to_string(j) + " touches in one system only");
    }
    src_pts_ = detail::boundary_points(source_);
    model_pts_ = detail::boundary_points(model_system_);
  }

  const IFSystem& source() const { return source_; }
  const AffineModel& model() const { return model_; }
  const IFSystem& model_system() const { return model_system_; }
  double tolerance() const { return tol_; }

  double operator()(double t) const {
    double scale = 1.0, shift = 0.0, u = std::clamp(t, 0.0, 1.0);
    const std::size_t m = source_.size();
    Word path;
    while (true) {
      if (u <= 0.0) return shift;
      if (u >= 1.0) return shift + scale;
      if (std::abs(scale) < tol_) return shift + scale * u;
      std::size_t i = 0;
      while (i < m && u > source_.image(i).hi) ++i;
      if (i == m || u < source_.image(i).lo) {
        // gap between boundary points 2i and 2i+1
        const double a = src_pts_[2 * i], b = src_pts_[2 * i + 1];
        const double A = model_pts_[2 * i], B = model_pts_[2 * i + 1];
        if (!(b > a)) return shift + scale * A;
        // linear in t on phi_w(gap), with the endpoints pushed forward exactly
        double pa = a, pb = b;
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
          pa = source_.map(*it)(pa);
          pb = source_.map(*it)(pb);
        }
        const double ga = shift + scale * A, gb = shift + scale * B;
        if (pa == pb) return ga;
        return ga + (std::clamp(t, 0.0, 1.0) - pa) * (gb - ga) / (pb - pa);
      }
      path.push_back(i);
      const Affine& S = model_.maps[i];
      shift += scale * S.b;
      scale *= S.a;
      u = std::clamp(source_.map(i).inverse(u), 0.0, 1.0);
    }
  }

  /// g^{-1} by monotone bisection.
  double inverse(double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if ((*this)(mid) < v) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// phi~_w = g^{-1} o S_w o g
  double tilde_phi(const Word& w, double x) const {
    double v = (*this)(x);
    for (auto it = w.rbegin(); it != w.rend(); ++it) v = model_.maps[*it](v);
    return inverse(v);
  }

  /// Exact slopes of g on every gap image phi_w(U_j) with |w| <= depth.
  std::vector<double> gap_slopes(int depth) const {
    std::vector<double> slopes;
    const auto gs = detail::all_gap_lengths(source_);
    Word w;
    visit_words(depth, w, [&](const Word& word) {
      const ComposedMap phi(source_, word), S(model_system_, word);
      for (std::size_t j = 0; j < gs.size(); ++j) {
        if (gs[j] <= 0.0) continue;
        const double a = src_pts_[2 * j], b = src_pts_[2 * j + 1];
        const double A = model_pts_[2 * j], B = model_pts_[2 * j + 1];
        const double src_len = std::abs(phi(b) - phi(a));
        const double model_len = std::abs(S(B) - S(A));
        if (src_len > 0.0) slopes.push_back(model_len / src_len);
      }
    });
    return slopes;
  }

  template <class F>
  void visit_words(int depth, Word& w, F&& f) const {
    f(w);
    if (static_cast<int>(w.size()) == depth) return;
    for (std::size_t i = 0; i < source_.size(); ++i) {
      w.push_back(i);
      visit_words(depth, w, f);
      w.pop_back();
    }
  }

 private:
  IFSystem source_;
  AffineModel model_;
  IFSystem model_system_;
  double tol_;
  std::vector<double> src_pts_, model_pts_;
};

inline DeformationMap build_g(const IFSystem& system, const AffineModel& model, double tol = 1e-12) {
  return DeformationMap(system, model, tol);
}

struct BiLipschitz {
  double q = 0.0, Q = 0.0;
  bool bi_lipschitz() const { return q > 0.0 && std::isfinite(Q); }
};

/// Extreme difference quotients over adjacent uniform samples together with
/// the exact gap-image slopes up to gap_depth.
inline BiLipschitz bilipschitz_estimate(const DeformationMap& g, std::size_t samples = 1000,
                                        int gap_depth = 6) {
  if (samples < 1000) throw std::invalid_argument("bilipschitz_estimate: need at least 1000 samples");
  BiLipschitz r{std::numeric_limits<double>::infinity(), 0.0};
  double prev_x = 0.0, prev_g = g(0.0);
  for (std::size_t j = 1; j < samples; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(samples - 1);
    const double gx = g(x);
    const double s = (gx - prev_g) / (x - prev_x);
    r.q = std::min(r.q, s);
    r.Q = std::max(r.Q, s);
    prev_x = x;
    prev_g = gx;
  }
  for (double s : g.gap_slopes(gap_depth)) {
    r.q = std::min(r.q, s);
    r.Q = std::max(r.Q, s);
  }
  return r;
}

/// max over intervals E of |mu(E) - mu_0(g(E))|.
inline double pushforward_residual(const DeformationMap& g, const std::vector<Interval>& intervals,
                                   double eps) {
  double worst = 0.0;
  for (const auto& e : intervals) {
    const double lhs = interval_mass(g.source(), e.lo, e.hi, eps);
    const double rhs = interval_mass(g.model_system(), std::clamp(g(e.lo), 0.0, 1.0),
                                     std::clamp(g(e.hi), 0.0, 1.0), eps);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// max of |phi~_i(p) - phi_i(p)| over all i and the points p = phi_w(0),
/// phi_w(1), x_w with |w| <= depth, together with |phi~_w(x_w) - x_w|.
inline double tilde_phi_agreement(const DeformationMap& g, int depth) {
  const IFSystem& src = g.source();
  double worst = 0.0;
  Word w;
  g.visit_words(depth, w, [&](const Word& word) {
    const ComposedMap phi(src, word);
    std::vector<double> pts{phi(0.0), phi(1.0)};
    if (!word.empty()) {
      const double xw = fixed_point(src, word);
      pts.push_back(xw);
      worst = std::max(worst, std::abs(g.tilde_phi(word, xw) - xw));
    }
    for (double p : pts)
      for (std::size_t i = 0; i < src.size(); ++i)
        worst = std::max(worst, std::abs(g.tilde_phi({i}, p) - src.map(i)(p)));
  });
  return worst;
}

/// phi_i = g^{-1} o S_i o g for a closed-form g; the ground-truth systems
/// whose exponent is that of the affine model.
inline IFSystem generate_deformed_system(const DeformationFamily& family, const AffineModel& model) {
  std::vector<Map> maps;
  for (const auto& S : model.maps) {
    if (family.is_identity()) maps.emplace_back(S);
    else maps.emplace_back(DeformedAffine{S, family});
  }
  IFSystem system(std::move(maps), model.weights);
  require_valid(system);
  return system;
}

}  // namespace selfconf
