#pragma once

// Contraction maps of [0,1] with closed-form evaluation, derivative and inverse.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace selfconf {

struct Affine {
  double a = 1.0;  ///< slope
  double b = 0.0;  ///< intercept

  double operator()(double x) const { return a * x + b; }
  double derivative(double) const { return a; }
  double inverse(double u) const { return (u - b) / a; }
};

/// x -> (a x + b) / (c x + d)
struct Moebius {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double determinant() const { return a * d - b * c; }
  double operator()(double x) const { return (a * x + b) / (c * x + d); }
  double derivative(double x) const {
    const double den = c * x + d;
    return determinant() / (den * den);
  }
  double inverse(double u) const { return (d * u - b) / (a - c * u); }
};

/// 2x2 projective matrix with its determinant carried separately, so that
/// long products keep an accurate derivative after rescaling.
struct MoebiusMatrix {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double det = 1.0;

  static MoebiusMatrix from(const Moebius& m) { return {m.a, m.b, m.c, m.d, m.determinant()}; }
  static MoebiusMatrix from(const Affine& s) { return {s.a, s.b, 0.0, 1.0, s.a}; }

  double operator()(double x) const { return (a * x + b) / (c * x + d); }
  double derivative(double x) const {
    const double den = c * x + d;
    return det / (den * den);
  }

  friend MoebiusMatrix operator*(const MoebiusMatrix& l, const MoebiusMatrix& r) {
    MoebiusMatrix p{l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
                    l.c * r.b + l.d * r.d, l.det * r.det};
    const double n = std::max({std::abs(p.a), std::abs(p.b), std::abs(p.c), std::abs(p.d)});
    if (n > 0.0 && std::isfinite(n)) {
      p.a /= n;
      p.b /= n;
      p.c /= n;
      p.d /= n;
      p.det /= n * n;
    }
    return p;
  }
};

enum class GFamily { moebius_s, exp_s };

/// Closed-form increasing diffeomorphism g of [0,1] with g(0)=0, g(1)=1.
///   moebius_s: g(x) = (1+s) x / (1 + s x),        s > -1
///   exp_s:     g(x) = (e^{s x} - 1) / (e^s - 1),   s real (s = 0 is the identity)
class DeformationFamily {
 public:
  DeformationFamily() = default;
  DeformationFamily(GFamily family, double s) : family_(family), s_(s) {
    if (!std::isfinite(s)) throw std::invalid_argument("deformation parameter must be finite");
    if (family == GFamily::moebius_s && s <= -1.0)
      throw std::invalid_argument("moebius_s requires s > -1");
  }

  static DeformationFamily identity() { return {GFamily::moebius_s, 0.0}; }

  GFamily family() const { return family_; }
  double parameter() const { return s_; }
  bool is_identity() const { return s_ == 0.0; }
  std::string name() const { return family_ == GFamily::moebius_s ? "moebius_s" : "exp_s"; }

  double operator()(double x) const {
    if (s_ == 0.0) return x;
    if (family_ == GFamily::moebius_s) return (1.0 + s_) * x / (1.0 + s_ * x);
    return std::expm1(s_ * x) / std::expm1(s_);
  }

  double derivative(double x) const {
    if (s_ == 0.0) return 1.0;
    if (family_ == GFamily::moebius_s) {
      const double den = 1.0 + s_ * x;
      return (1.0 + s_) / (den * den);
    }
    return s_ * std::exp(s_ * x) / std::expm1(s_);
  }

  double inverse(double u) const {
    if (s_ == 0.0) return u;
    if (family_ == GFamily::moebius_s) return u / (1.0 + s_ - s_ * u);
    return std::log1p(u * std::expm1(s_)) / s_;
  }

  /// (q, Q) = (min g', max g') on [0,1]; g' is monotone for both families.
  std::pair<double, double> derivative_bounds() const {
    const double d0 = derivative(0.0), d1 = derivative(1.0);
    return {std::min(d0, d1), std::max(d0, d1)};
  }

  std::optional<MoebiusMatrix> as_matrix() const {
    if (s_ == 0.0) return MoebiusMatrix{};
    if (family_ != GFamily::moebius_s) return std::nullopt;
    return MoebiusMatrix{1.0 + s_, 0.0, s_, 1.0, 1.0 + s_};
  }

  std::optional<MoebiusMatrix> inverse_matrix() const {
    if (s_ == 0.0) return MoebiusMatrix{};
    if (family_ != GFamily::moebius_s) return std::nullopt;
    return MoebiusMatrix{1.0, 0.0, -s_, 1.0 + s_, 1.0 + s_};
  }

  friend bool operator==(const DeformationFamily&, const DeformationFamily&) = default;

 private:
  GFamily family_ = GFamily::moebius_s;
  double s_ = 0.0;
};

/// phi = g^{-1} o S o g
struct DeformedAffine {
  Affine S;
  DeformationFamily g;

  double operator()(double x) const { return g.inverse(S(g(x))); }
  double derivative(double x) const { return S.a * g.derivative(x) / g.derivative((*this)(x)); }
  double inverse(double u) const { return g.inverse(S.inverse(g(u))); }
};

/// One raised plateau of a derivative profile: height on [lo, hi], quintic
/// smoothstep ramps of the given widths outside it, zero further out.
struct Plateau {
  double lo = 0.0, hi = 0.0;
  double left_width = 0.0, right_width = 0.0;
  double height = 0.0;

  friend bool operator==(const Plateau&, const Plateau&) = default;
};

/// phi(x) = offset + scale * int_0^x h, with h = base + sum of plateaus.
/// h is C^2, so phi is C^3. Used to synthesize maps with prescribed
/// derivative levels on given subintervals.
class PlateauMap {
 public:
  PlateauMap() = default;
  PlateauMap(double offset, double scale, double base, std::vector<Plateau> plateaus)
      : offset_(offset), scale_(scale), base_(base), plateaus_(std::move(plateaus)) {}

  double offset() const { return offset_; }
  double scale() const { return scale_; }
  double base() const { return base_; }
  const std::vector<Plateau>& plateaus() const { return plateaus_; }

  double profile(double x) const {
    double h = base_;
    for (const auto& p : plateaus_) h += p.height * bump(p, x);
    return h;
  }

  double primitive(double x) const {
    double acc = base_ * x;
    for (const auto& p : plateaus_) acc += p.height * (bump_integral(p, x) - bump_integral(p, 0.0));
    return acc;
  }

  double operator()(double x) const { return offset_ + scale_ * primitive(x); }
  double derivative(double x) const { return scale_ * profile(x); }

  double inverse(double u) const {
    // primitive is strictly increasing; safeguarded Newton on [0,1].
    const double target = (u - offset_) / scale_;
    double lo = 0.0, hi = 1.0, x = 0.5;
    for (int it = 0; it < 200; ++it) {
      const double f = primitive(x) - target;
      if (f > 0.0) hi = x; else lo = x;
      double next = x - f / profile(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-17 || hi - lo <= 1e-17) { x = next; break; }
      x = next;
    }
    return x;
  }

  friend bool operator==(const PlateauMap&, const PlateauMap&) = default;

 private:
  static double smoothstep(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
  // int_0^t smoothstep, equals 1/2 at t = 1
  static double smoothstep_integral(double t) {
    const double t4 = t * t * t * t;
    return t4 * (t * (t - 3.0) + 2.5);
  }

  static double bump(const Plateau& p, double x) {
    if (x >= p.lo && x <= p.hi) return 1.0;
    if (x < p.lo) {
      if (p.left_width <= 0.0 || x <= p.lo - p.left_width) return 0.0;
      return smoothstep((x - (p.lo - p.left_width)) / p.left_width);
    }
    if (p.right_width <= 0.0 || x >= p.hi + p.right_width) return 0.0;
    return smoothstep((p.hi + p.right_width - x) / p.right_width);
  }

  static double bump_integral(const Plateau& p, double x) {
    const double start = p.lo - p.left_width;
    if (x <= start) return 0.0;
    if (x < p.lo) return p.left_width * smoothstep_integral((x - start) / p.left_width);
    const double left = 0.5 * p.left_width;
    if (x <= p.hi) return left + (x - p.lo);
    const double core = left + (p.hi - p.lo);
    if (p.right_width <= 0.0 || x >= p.hi + p.right_width) return core + 0.5 * p.right_width;
    const double tau = (p.hi + p.right_width - x) / p.right_width;
    return core + p.right_width * (0.5 - smoothstep_integral(tau));
  }

  double offset_ = 0.0, scale_ = 1.0, base_ = 1.0;
  std::vector<Plateau> plateaus_;
};

/// A single contraction phi_i of the system.
class Map {
 public:
  using Variant = std::variant<Affine, Moebius, DeformedAffine, PlateauMap>;

  Map() = default;
  Map(Affine m) : v_(m) {}
  Map(Moebius m) : v_(m) {}
  Map(DeformedAffine m) : v_(std::move(m)) {}
  Map(PlateauMap m) : v_(std::move(m)) {}

  const Variant& variant() const { return v_; }

  double operator()(double x) const {
    return std::visit([x](const auto& m) { return m(x); }, v_);
  }
  double derivative(double x) const {
    return std::visit([x](const auto& m) { return m.derivative(x); }, v_);
  }
  double inverse(double u) const {
    return std::visit([u](const auto& m) { return m.inverse(u); }, v_);
  }

  bool is_affine() const {
    if (std::holds_alternative<Affine>(v_)) return true;
    if (const auto* d = std::get_if<DeformedAffine>(&v_)) return d->g.is_identity();
    return false;
  }

  /// Orientation bit e_i: true when the map reverses [0,1].
  bool reverses() const { return (*this)(0.0) > (*this)(1.0); }

  double image_lo() const { return std::min((*this)(0.0), (*this)(1.0)); }
  double image_hi() const { return std::max((*this)(0.0), (*this)(1.0)); }

  /// ||phi'||_inf on [0,1]. Affine, Moebius and both deformation families
  /// have monotone |phi'|, so the endpoints are exact; plateau maps attain
  /// their maximum on a plateau.
  double max_abs_derivative() const {
    double m = std::max(std::abs(derivative(0.0)), std::abs(derivative(1.0)));
    if (const auto* p = std::get_if<PlateauMap>(&v_)) {
      for (const auto& pl : p->plateaus())
        for (double x : {pl.lo, pl.hi})
          if (x >= 0.0 && x <= 1.0) m = std::max(m, std::abs(derivative(x)));
      for (int k = 0; k <= 4096; ++k) m = std::max(m, std::abs(derivative(k / 4096.0)));
    }
    return m;
  }

  double min_abs_derivative() const {
    double m = std::min(std::abs(derivative(0.0)), std::abs(derivative(1.0)));
    if (std::holds_alternative<PlateauMap>(v_))
      for (int k = 0; k <= 4096; ++k) m = std::min(m, std::abs(derivative(k / 4096.0)));
    return m;
  }

  /// Closed-form projective matrix, when the map is a Moebius transformation.
  std::optional<MoebiusMatrix> as_matrix() const {
    if (const auto* a = std::get_if<Affine>(&v_)) return MoebiusMatrix::from(*a);
    if (const auto* m = std::get_if<Moebius>(&v_)) return MoebiusMatrix::from(*m);
    if (const auto* d = std::get_if<DeformedAffine>(&v_)) {
      auto g = d->g.as_matrix();
      auto gi = d->g.inverse_matrix();
      if (!g || !gi) return std::nullopt;
      return *gi * MoebiusMatrix::from(d->S) * *g;
    }
    return std::nullopt;
  }

 private:
  Variant v_ = Affine{};
};

}  // namespace selfconf
