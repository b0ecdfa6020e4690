#pragma once

// Closed-form oracles: the Polya field u = (alpha/2 (x^2 + y^2) - beta, -gamma x y),
// which solves -Lap u - k grad div u = 0 when alpha (k + 2) = k gamma and
// attains max |u| inside small disks, and the vortex-ansatz energy.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "gldiv/energy.hpp"
#include "gldiv/error.hpp"
#include "gldiv/geometry.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv {

/// k is unrestricted here (negative values included); the rest of the
/// library requires k > 0.
struct PolyaParams {
  double k = 1.0;
  double alpha = 1.0 / 3.0;
  double beta = 1.0;
  double gamma = 1.0;

  /// alpha = k gamma / (k + 2); k = -2 is rejected (use degenerate()).
  static PolyaParams make(double k, double beta, double gamma) {
    if (k == -2.0) throw ConstructionError("k = -2 leaves alpha free; use PolyaParams::degenerate");
    return {k, k * gamma / (k + 2.0), beta, gamma};
  }

  /// The k = -2 family: gamma = 0, alpha and beta free.
  static PolyaParams degenerate(double alpha, double beta) { return {-2.0, alpha, beta, 0.0}; }

  void validate() const {
    if (!std::isfinite(k) || !std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) {
      throw ConstructionError("Polya parameters must be finite");
    }
    if (k == -2.0) {
      if (gamma != 0.0) throw ConstructionError("k = -2 requires gamma = 0");
      return;
    }
    const double lhs = alpha * (k + 2.0), rhs = k * gamma;
    if (std::abs(lhs - rhs) > 1e-14 * std::max({1.0, std::abs(lhs), std::abs(rhs)})) {
      throw ConstructionError("Polya parameters violate alpha (k + 2) = k gamma");
    }
  }
};

/// Analytic evaluator. Construction does not check the compatibility
/// relation, so mismatched parameters can be fed to the residual.
struct PolyaField {
  PolyaParams p;

  Vec2 operator()(const Vec2& x) const {
    return {0.5 * p.alpha * x.squaredNorm() - p.beta, -p.gamma * x.x() * x.y()};
  }
  /// Row i is the gradient of component i.
  Mat2 gradient(const Vec2& x) const {
    Mat2 g;
    g << p.alpha * x.x(), p.alpha * x.y(), -p.gamma * x.y(), -p.gamma * x.x();
    return g;
  }
  Vec2 laplacian(const Vec2&) const { return {2.0 * p.alpha, 0.0}; }
  double divergence(const Vec2& x) const { return (p.alpha - p.gamma) * x.x(); }
  Vec2 grad_div(const Vec2&) const { return {p.alpha - p.gamma, 0.0}; }
  /// -Lap u - k grad div u.
  Vec2 residual(const Vec2& x) const { return -laplacian(x) - p.k * grad_div(x); }
};

inline PolyaField polya_field(const PolyaParams& params) {
  params.validate();
  return PolyaField{params};
}

/// max over the points of |-Lap u - k grad div u| from the analytic derivatives.
inline double polya_residual(const PolyaParams& params, const std::vector<Vec2>& points) {
  const PolyaField f{params};
  double m = 0.0;
  for (const Vec2& x : points) m = std::max(m, f.residual(x).norm());
  return m;
}

/// The same residual with the mesh's discrete operators applied to the
/// sampled field (all nodes, boundary rows included).
inline double polya_discrete_residual(const PolyaParams& params,
                                      std::shared_ptr<const InteriorMesh> mesh) {
  const PolyaField f{params};
  const GridField u = sample_field(mesh, [&](const Vec2& x) { return f(x); });
  const GridField r = linear_operator(u, params.k);
  double m = 0.0;
  for (const Vec2& v : r.values) m = std::max(m, v.norm());
  return m;
}

struct PolyaMaxReport {
  double alpha = 0.0;
  Vec2 argmax{0.0, 0.0};
  bool interior = false;
  double max = 0.0;
  double boundary_max = 0.0;
};

namespace detail {

// Best point of |f| on a square lattice of spacing h centred at c,
// n points per side direction, restricted to |x| <= r.
template <class Fn>
void lattice_search(const Fn& mod, const Vec2& c, double h, int n, double r, Vec2& best,
                    double& best_val) {
  for (int a = -n; a <= n; ++a) {
    for (int b = -n; b <= n; ++b) {
      const Vec2 x = c + h * Vec2(a, b);
      if (x.norm() > r) continue;
      const double v = mod(x);
      if (v > best_val) {
        best_val = v;
        best = x;
      }
    }
  }
}

}  // namespace detail

/// Dense lattice over B_r(0) (the origin is a node) followed by two
/// rounds of local refinement; the boundary circle is searched separately
/// and merged. `interior` flags |argmax| < r - 2h, h the coarse spacing.
inline PolyaMaxReport interior_max_check(const PolyaParams& params, double r, int n = 200) {
  if (!(r > 0.0)) throw ConstructionError("disk radius must be positive");
  const PolyaField f{params};
  auto mod = [&](const Vec2& x) { return f(x).norm(); };
  PolyaMaxReport rep;
  rep.alpha = params.alpha;

  const double h = r / n;
  Vec2 best(0.0, 0.0);
  double best_val = mod(best);
  detail::lattice_search(mod, Vec2::Zero(), h, n, r, best, best_val);

  // Boundary circle with golden-section refinement around the best sample.
  const int nb = 8 * n;
  double tb = 0.0, bmax = -1.0;
  for (int q = 0; q < nb; ++q) {
    const double t = kTwoPi * q / nb;
    const double v = mod(r * Vec2(std::cos(t), std::sin(t)));
    if (v > bmax) {
      bmax = v;
      tb = t;
    }
  }
  {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = tb - kTwoPi / nb, hi = tb + kTwoPi / nb;
    auto on_circle = [&](double t) { return mod(r * Vec2(std::cos(t), std::sin(t))); };
    for (int it = 0; it < 80; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      if (on_circle(m1) < on_circle(m2)) lo = m1; else hi = m2;
    }
    const double t = 0.5 * (lo + hi);
    const double v = on_circle(t);
    if (v > bmax) {
      bmax = v;
      tb = t;
    }
  }
  rep.boundary_max = bmax;

  double step = h;
  for (int round = 0; round < 2; ++round) {
    step /= 10.0;
    detail::lattice_search(mod, best, step, 10, r, best, best_val);
  }
  if (bmax > best_val) {
    best_val = bmax;
    best = r * Vec2(std::cos(tb), std::sin(tb));
  }
  rep.argmax = best;
  rep.max = best_val;
  rep.interior = best.norm() < r - 2.0 * h;
  return rep;
}

/// Bisection for the radius where the maximum of |u| leaves the interior:
/// interior_max_check flags interior on [lo, r*) and not beyond.
inline double polya_critical_radius(const PolyaParams& params, double lo, double hi,
                                    double tol = 1e-6) {
  if (!interior_max_check(params, lo).interior || interior_max_check(params, hi).interior) {
    throw ConstructionError("bisection bracket does not straddle the interior/boundary switch");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (interior_max_check(params, mid).interior ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Exact energy of the vortex ansatz on the unit disk centred at the
/// vortex: Dirichlet pi ln(1/eps) + pi (core pi, far field pi ln(1/eps)),
/// divergence 0, potential pi/12. Independent of k.
inline EnergyBreakdown ansatz_energy_closed_form(double eps, double k = 1.0) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw ConstructionError("closed-form ansatz energy needs 0 < eps < 1, got " + std::to_string(eps));
  }
  EnergyParams{eps, k}.validate();
  EnergyBreakdown e;
  e.dirichlet = std::numbers::pi * std::log(1.0 / eps) + std::numbers::pi;
  e.divergence = 0.0;
  e.potential = std::numbers::pi / 12.0;
  e.total = e.dirichlet + e.divergence + e.potential;
  return e;
}

}  // namespace gldiv
