#pragma once

// Boundary curves of star-shaped C^2 domains and the tangent-normal chart
// (y1 = arclength, y2 = signed distance, positive inside) of a collar
// around the boundary.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gldiv/error.hpp"

namespace gldiv {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// x^perp = (-x2, x1).
inline Vec2 perp(const Vec2& x) { return {-x.y(), x.x()}; }

/// Wrap an angle into [0, 2pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

/// rho and its first two theta-derivatives at one angle.
struct RadialSample {
  double r = 0.0;
  double dr = 0.0;
  double d2r = 0.0;
};

/// rho(theta) = a0 + sum_m a_m cos(m theta) + b_m sin(m theta); m = 1..M.
struct FourierRadius {
  double a0 = 1.0;
  std::vector<double> cos_coeffs;  // a_1 .. a_M
  std::vector<double> sin_coeffs;  // b_1 .. b_M

  int highest_mode() const {
    return static_cast<int>(std::max(cos_coeffs.size(), sin_coeffs.size()));
  }

  RadialSample operator()(double theta) const {
    RadialSample s{a0, 0.0, 0.0};
    for (std::size_t m = 1; m <= cos_coeffs.size(); ++m) {
      const double mm = static_cast<double>(m);
      const double c = std::cos(mm * theta), sn = std::sin(mm * theta);
      const double a = cos_coeffs[m - 1];
      s.r += a * c;
      s.dr -= a * mm * sn;
      s.d2r -= a * mm * mm * c;
    }
    for (std::size_t m = 1; m <= sin_coeffs.size(); ++m) {
      const double mm = static_cast<double>(m);
      const double c = std::cos(mm * theta), sn = std::sin(mm * theta);
      const double b = sin_coeffs[m - 1];
      s.r += b * sn;
      s.dr += b * mm * c;
      s.d2r -= b * mm * mm * sn;
    }
    return s;
  }
};

/// Axis-aligned ellipse with semi-axes a (along x) and b (along y), written
/// as a radial function about its centre.
struct EllipseRadius {
  double a = 1.0;
  double b = 1.0;

  int highest_mode() const { return 32; }

  RadialSample operator()(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double q = b * b * c * c + a * a * s * s;
    const double dq = (a * a - b * b) * std::sin(2.0 * theta);
    const double d2q = 2.0 * (a * a - b * b) * std::cos(2.0 * theta);
    const double ab = a * b;
    const double qm12 = 1.0 / std::sqrt(q);
    const double qm32 = qm12 / q;
    const double qm52 = qm32 / q;
    return {ab * qm12, -0.5 * ab * qm32 * dq,
            ab * (0.75 * qm52 * dq * dq - 0.5 * qm32 * d2q)};
  }
};

using RadialProfile = std::variant<FourierRadius, EllipseRadius>;

inline RadialProfile unit_disk() { return FourierRadius{1.0, {}, {}}; }

/// Point, unit tangent, inward unit normal and signed curvature at one
/// boundary location. {tau, nu} is positively oriented with nu = tau^perp.
struct Frame {
  Vec2 point;
  Vec2 tau;
  Vec2 nu;
  double kappa = 0.0;
};

/// Closed boundary curve parametrized by arclength. Immutable after
/// construction.
class BoundaryCurve {
 public:
  explicit BoundaryCurve(RadialProfile profile, int table_panels = 0)
      : profile_(std::move(profile)) {
    const int modes = std::visit([](const auto& p) { return p.highest_mode(); }, profile_);
    const int samples = std::max(256, 8 * std::max(modes, 1));
    max_abs_kappa_ = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double th = kTwoPi * k / samples;
      const RadialSample rs = radius(th);
      if (!(rs.r > 0.0) || !std::isfinite(rs.r)) {
        throw ConstructionError("radial function must be positive: rho(" + std::to_string(th) +
                                ") = " + std::to_string(rs.r));
      }
      max_abs_kappa_ = std::max(max_abs_kappa_, std::abs(frame_at_theta(th).kappa));
    }

    panels_ = table_panels > 0 ? table_panels : std::max(512, 16 * std::max(modes, 1));
    cumulative_.assign(panels_ + 1, 0.0);
    const double dth = kTwoPi / panels_;
    for (int k = 0; k < panels_; ++k) {
      const double seg = arc_integral(k * dth, (k + 1) * dth);
      if (!(seg > 0.0)) {
        throw ConstructionError("arclength table is not monotone; increase sampling");
      }
      cumulative_[k + 1] = cumulative_[k] + seg;
    }
    perimeter_ = cumulative_.back();

    double area2 = 0.0;
    for (int k = 0; k < samples * 4; ++k) {
      const double r = radius(kTwoPi * k / (samples * 4)).r;
      area2 += r * r;
    }
    area_ = 0.5 * area2 * kTwoPi / (samples * 4);
  }

  const RadialProfile& profile() const { return profile_; }
  double perimeter() const { return perimeter_; }
  double area() const { return area_; }
  double max_abs_curvature() const { return max_abs_kappa_; }

  RadialSample radius(double theta) const {
    return std::visit([theta](const auto& p) { return p(theta); }, profile_);
  }

  double speed(double theta) const {
    const RadialSample rs = radius(theta);
    return std::hypot(rs.r, rs.dr);
  }

  Frame frame_at_theta(double theta) const {
    const RadialSample rs = radius(theta);
    const Vec2 er(std::cos(theta), std::sin(theta));
    const Vec2 et = perp(er);
    const Vec2 d = rs.dr * er + rs.r * et;
    const double sp2 = rs.r * rs.r + rs.dr * rs.dr;
    Frame f;
    f.point = rs.r * er;
    f.tau = d / std::sqrt(sp2);
    f.nu = perp(f.tau);
    f.kappa = (rs.r * rs.r + 2.0 * rs.dr * rs.dr - rs.r * rs.d2r) / (sp2 * std::sqrt(sp2));
    return f;
  }

  /// Arclength from theta = 0 to theta (theta taken modulo 2pi).
  double arclength_of_theta(double theta) const {
    const double t = wrap_angle(theta);
    const double dth = kTwoPi / panels_;
    const int k = std::min(panels_ - 1, static_cast<int>(t / dth));
    return cumulative_[k] + arc_integral(k * dth, t);
  }

  /// Inverse of arclength_of_theta; y1 is taken modulo the perimeter.
  double theta_of_arclength(double y1) const {
    double s = std::fmod(y1, perimeter_);
    if (s < 0.0) s += perimeter_;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const int k = std::clamp(static_cast<int>(it - cumulative_.begin()) - 1, 0, panels_ - 1);
    const double dth = kTwoPi / panels_;
    const double t0 = k * dth;
    const double l0 = cumulative_[k], l1 = cumulative_[k + 1];
    // Cubic Hermite seed on theta(L) using the exact speed at the panel ends.
    const double h = l1 - l0;
    const double u = (s - l0) / h;
    const double m0 = h / speed(t0), m1 = h / speed(t0 + dth);
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    double theta = h00 * t0 + h10 * m0 + h01 * (t0 + dth) + h11 * m1;
    for (int it2 = 0; it2 < 8; ++it2) {
      const double f = l0 + arc_integral(t0, theta) - s;
      const double step = f / speed(theta);
      theta -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return theta;
  }

  Vec2 boundary_point(double y1) const { return frame_at_theta(theta_of_arclength(y1)).point; }
  Frame frame(double y1) const { return frame_at_theta(theta_of_arclength(y1)); }

  /// Whether x lies in the open domain.
  bool contains(const Vec2& x) const {
    const double th = std::atan2(x.y(), x.x());
    return x.norm() < radius(th).r;
  }

 private:
  // Gauss-Legendre (8 points) integral of the speed over [a, b].
  double arc_integral(double a, double b) const {
    static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290,
                                                 0.7966664774136267, 0.9602898564975363};
    static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * (speed(mid + half * nodes[i]) + speed(mid - half * nodes[i]));
    }
    return acc * half;
  }

  RadialProfile profile_;
  int panels_ = 0;
  std::vector<double> cumulative_;
  double perimeter_ = 0.0;
  double area_ = 0.0;
  double max_abs_kappa_ = 0.0;
};

/// Tangent-normal coordinates of a collar: y1 is boundary arclength, y2 the
/// signed distance along the inward normal.
struct ChartPoint {
  double y1 = 0.0;
  double y2 = 0.0;
};

/// X(y1, y2) = gamma(y1) + y2 nu(y1) on |y2| < r0. The chart uses the
/// inward normal; the outward normal is -nu.
class TangentNormalChart {
 public:
  /// r0 <= 0 selects 0.5 / max|kappa|; r1 <= 0 selects r0 / 2.
  explicit TangentNormalChart(std::shared_ptr<const BoundaryCurve> curve, double r0 = 0.0,
                              double r1 = 0.0)
      : curve_(std::move(curve)) {
    if (!curve_) throw ConstructionError("chart needs a boundary curve");
    const double kmax = curve_->max_abs_curvature();
    r0_ = r0 > 0.0 ? r0 : (kmax > 0.0 ? 0.5 / kmax : 0.5);
    r1_ = r1 > 0.0 ? r1 : 0.5 * r0_;
    if (r0_ * kmax >= 1.0) {
      throw ConstructionError("collar half-width r0 violates r0*max|kappa| < 1");
    }
    if (r1_ >= r0_) throw ConstructionError("r1 must lie in (0, r0)");
    constexpr int kSeeds = 512;
    seeds_.reserve(kSeeds);
    for (int k = 0; k < kSeeds; ++k) {
      const double th = kTwoPi * k / kSeeds;
      seeds_.emplace_back(th, curve_->frame_at_theta(th).point);
    }
  }

  const BoundaryCurve& curve() const { return *curve_; }
  std::shared_ptr<const BoundaryCurve> curve_ptr() const { return curve_; }
  double r0() const { return r0_; }
  double r1() const { return r1_; }

  /// JX(y) = det grad X = 1 - y2 kappa(y1).
  double jacobian(double y1, double y2) const { return 1.0 - y2 * curve_->frame(y1).kappa; }

  Vec2 to_cartesian(double y1, double y2) const {
    check_collar(y2);
    const Frame f = curve_->frame(y1);
    return f.point + y2 * f.nu;
  }

  /// Inverse chart by damped Newton on the foot-point condition
  /// (x - gamma) . tau = 0, seeded from the nearest boundary sample.
  ChartPoint to_chart(const Vec2& x) const {
    double theta = seeds_.front().first;
    double best = (x - seeds_.front().second).squaredNorm();
    for (const auto& [th, p] : seeds_) {
      const double d = (x - p).squaredNorm();
      if (d < best) {
        best = d;
        theta = th;
      }
    }
    const double scale = std::max(1.0, x.norm());
    const double max_step = kTwoPi / 64.0;
    bool converged = false;
    double y2 = 0.0;
    for (int it = 0; it < 60; ++it) {
      const Frame f = curve_->frame_at_theta(theta);
      const Vec2 r = x - f.point;
      y2 = r.dot(f.nu);
      const double foot = r.dot(f.tau);
      const double jac = curve_->speed(theta) * (1.0 - f.kappa * y2);
      if (!(jac > 0.0)) break;
      const double step = std::clamp(foot / jac, -max_step, max_step);
      theta += step;
      if (std::abs(foot) < 1e-14 * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) throw InversionError("chart inversion did not converge");
    if (std::abs(y2) >= r0_) {
      throw OutOfCollarError("point at distance " + std::to_string(std::abs(y2)) +
                             " lies outside the collar of half-width " + std::to_string(r0_));
    }
    const Frame f = curve_->frame_at_theta(theta);
    y2 = (x - f.point).dot(f.nu);
    return {curve_->arclength_of_theta(theta), y2};
  }

 private:
  void check_collar(double y2) const {
    if (!(std::abs(y2) < r0_)) {
      throw OutOfCollarError("|y2| = " + std::to_string(std::abs(y2)) + " >= r0 = " +
                             std::to_string(r0_));
    }
  }

  std::shared_ptr<const BoundaryCurve> curve_;
  double r0_ = 0.0;
  double r1_ = 0.0;
  std::vector<std::pair<double, Vec2>> seeds_;
};

}  // namespace gldiv
