#pragma once

// Norms, degree counting, rescaled windows and the eps-sweep driver.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "gldiv/energy.hpp"
#include "gldiv/error.hpp"
#include "gldiv/extension.hpp"
#include "gldiv/interpolation.hpp"
#include "gldiv/mesh.hpp"
#include "gldiv/minimizer.hpp"

namespace gldiv {

template <class MeshT>
double sup_norm(const Field<MeshT>& f) {
  double m = 0.0;
  for (const Vec2& v : f.values) m = std::max(m, v.norm());
  return m;
}

/// Node carrying the smallest |u| (first index on ties); the discrete
/// vortex core.
inline int min_modulus_node(const GridField& f) {
  int best = 0;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double v = f.values[n].norm();
    if (v < m) {
      m = v;
      best = static_cast<int>(n);
    }
  }
  return best;
}

/// Largest Frobenius norm of the discrete gradient. On the interior mesh the
/// boundary row (one-sided stencils) is skipped.
template <class MeshT>
double lipschitz_proxy(const Field<MeshT>& f) {
  const auto g = discrete_gradient(f);
  double m = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if constexpr (std::is_same_v<MeshT, InteriorMesh>) {
      if (f.mesh->is_boundary(static_cast<int>(n))) continue;
    }
    m = std::max(m, g[n].norm());
  }
  return m;
}

/// (int |u|^4)^{1/4} over the whole mesh.
template <class MeshT>
double l4_norm(const Field<MeshT>& f) {
  const auto& w = f.grid().weight;
  double acc = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double s = f.values[n].squaredNorm();
    acc += w[n] * s * s;
  }
  return std::pow(acc, 0.25);
}

using WindowField = Field<WindowMesh>;

/// (int_{|z| < radius} |u|^4)^{1/4} on a window grid; nodes are weighted by
/// the fraction of their cell inside the disk (sub-sampled 8 x 8).
inline double l4_norm_ball(const WindowField& f, double radius) {
  const WindowMesh& m = *f.mesh;
  const double h = m.spacing();
  double acc = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    const Vec2& p = m.grid().position[n];
    if (p.norm() > radius + h) continue;
    int inside = 0;
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        const Vec2 q = p + h * Vec2((a + 0.5) / 8.0 - 0.5, (b + 0.5) / 8.0 - 0.5);
        if (q.norm() < radius) ++inside;
      }
    }
    const double s = f.values[n].squaredNorm();
    acc += h * h * (inside / 64.0) * s * s;
  }
  return std::pow(acc, 0.25);
}

/// Closed contours as point lists (not repeating the first point).
inline std::vector<Vec2> circle_contour(const Vec2& centre, double radius, int n) {
  std::vector<Vec2> pts(n);
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    pts[k] = centre + radius * Vec2(std::cos(t), std::sin(t));
  }
  return pts;
}

/// The curve at chart offset y2 (y2 > 0: inside).
inline std::vector<Vec2> offset_contour(const TangentNormalChart& chart, double y2, int n) {
  std::vector<Vec2> pts(n);
  const double L = chart.curve().perimeter();
  for (int k = 0; k < n; ++k) pts[k] = chart.to_cartesian(L * k / n, y2);
  return pts;
}

/// Degree of u / |u| along a closed contour: the sum of principal-branch
/// angle increments over 2 pi. Samples with |u| < min_modulus raise.
inline int winding_number(const std::function<Vec2(const Vec2&)>& u,
                          const std::vector<Vec2>& contour, double min_modulus = 0.5) {
  if (contour.size() < 3) throw Error("winding contour needs at least three points");
  std::vector<double> angle(contour.size());
  for (std::size_t k = 0; k < contour.size(); ++k) {
    const Vec2 v = u(contour[k]);
    if (!(v.norm() >= min_modulus)) {
      throw DefectOnContourError("|u| = " + std::to_string(v.norm()) +
                                 " on the winding contour (defect core crossed)");
    }
    angle[k] = std::atan2(v.y(), v.x());
  }
  double total = 0.0;
  for (std::size_t k = 0; k < angle.size(); ++k) {
    total += std::remainder(angle[(k + 1) % angle.size()] - angle[k], kTwoPi);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

inline int winding_number(const GridField& f, const std::vector<Vec2>& contour,
                          double min_modulus = 0.5) {
  const FieldInterpolator interp(f);
  return winding_number([&](const Vec2& x) { return interp(x); }, contour, min_modulus);
}

/// U_hat(z) = U(x0 + eps z) on a uniform (n x n) grid of [-R, R]^2.
inline WindowField rescale_window(const std::function<Vec2(const Vec2&)>& U, const Vec2& x0,
                                  double eps, double R, int n) {
  auto mesh = std::make_shared<const WindowMesh>(R, n);
  return sample_field(mesh, [&](const Vec2& z) { return U(x0 + eps * z); });
}

inline WindowField rescale_window(const ExtendedField& U, const Vec2& x0, double eps, double R,
                                  int n) {
  return rescale_window([&](const Vec2& x) { return U(x); }, x0, eps, R, n);
}

/// Ordinary least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("ols_slope needs matching samples (>= 2)");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// (max - min) / min of a positive sample.
inline double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / *lo;
}

struct SweepRecord {
  double eps = 0.0;
  double sup_u = 0.0;
  double eps_lip = 0.0;  ///< eps * max |grad u|
  EnergyBreakdown energy;
  double excess = 0.0;  ///< total - pi ln(1/eps)
  double combo = 0.0;   ///< int k/2 (div u)^2 + (|u|^2 - 1)^2 / (8 eps^2)
  int degree = 0;       ///< winding on the offset contour y2 = r1 / 2
  int iterations = 0;
  bool converged = false;
  int n_theta = 0;
  int n_s = 0;
  double l4_core = 0.0;      ///< ||U_hat||_{L4(B1)} at the vortex core
  double l4_boundary = 0.0;  ///< ||U_hat||_{L4(B1)} at boundary_point(0)
  Vec2 core{0.0, 0.0};
  std::string status = "ok";  ///< "ok" or the failure message
};

/// Radial resolution h <= eps / cells_per_eps (measured along the longest
/// ray), never below min_radial; fixed angular count.
struct MeshPolicy {
  int n_theta = 128;
  int min_radial = 64;
  double cells_per_eps = 4.0;

  int radial_for(double eps, const BoundaryCurve& curve) const {
    double rmax = 0.0;
    for (int k = 0; k < 720; ++k) rmax = std::max(rmax, curve.radius(kTwoPi * k / 720).r);
    const int need = static_cast<int>(std::ceil(cells_per_eps * rmax / eps + 0.5));
    return std::max(min_radial, need);
  }
};

struct SweepOptions {
  double k = 1.0;
  MeshPolicy mesh;
  MinimizeOptions minimize;
  int jobs = 1;
  bool warm_start = false;
  Vec2 vortex_centre{0.0, 0.0};
  double window_radius = 1.0;
  int window_points = 41;
};

/// Diagnostics of a converged (or capped) field.
inline SweepRecord evaluate_record(const GridField& u, const EnergyParams& params,
                                   const TangentNormalChart& chart_ref,
                                   std::shared_ptr<const TangentNormalChart> chart,
                                   const SweepOptions& opts) {
  SweepRecord r;
  r.eps = params.epsilon;
  r.n_theta = u.mesh->n_theta();
  r.n_s = u.mesh->n_s();
  r.sup_u = sup_norm(u);
  r.eps_lip = params.epsilon * lipschitz_proxy(u);
  r.energy = energy(u, params);
  r.excess = r.energy.total - std::log(1.0 / params.epsilon) * std::numbers::pi;
  r.combo = r.energy.divergence + 0.5 * r.energy.potential;
  r.degree = winding_number(u, offset_contour(chart_ref, 0.5 * chart_ref.r1(), 4 * r.n_theta));
  r.core = u.mesh->grid().position[min_modulus_node(u)];
  const ExtendedField U(u, std::move(chart));
  r.l4_core = l4_norm_ball(
      rescale_window(U, r.core, params.epsilon, opts.window_radius, opts.window_points),
      opts.window_radius);
  r.l4_boundary = l4_norm_ball(rescale_window(U, chart_ref.curve().boundary_point(0.0),
                                              params.epsilon, opts.window_radius,
                                              opts.window_points),
                               opts.window_radius);
  return r;
}

namespace detail {

inline SweepRecord sweep_one(std::shared_ptr<const BoundaryCurve> curve,
                             std::shared_ptr<const TangentNormalChart> chart, double eps,
                             const SweepOptions& opts, const GridField* warm) {
  SweepRecord r;
  r.eps = eps;
  try {
    const EnergyParams params{eps, opts.k};
    auto mesh = std::make_shared<const InteriorMesh>(curve, opts.mesh.n_theta,
                                                     opts.mesh.radial_for(eps, *curve));
    GridField init = vortex_ansatz(mesh, opts.vortex_centre, eps);
    if (warm != nullptr) {
      const FieldInterpolator prev(*warm);
      init = project_tangential(sample_field(mesh, [&](const Vec2& x) { return prev(x); }));
    }
    const MinimizeResult res = minimize(init, params, opts.minimize);
    r = evaluate_record(res.field, params, *chart, chart, opts);
    r.iterations = res.report.iterations;
    r.converged = res.report.converged;
    if (!r.converged) r.status = res.report.message;
  } catch (const std::exception& e) {
    r.status = e.what();
  }
  return r;
}

}  // namespace detail

/// One minimization per eps from the vortex ansatz (or from the previous
/// record's field when warm-starting, which forces sequential order).
/// Records come back in input order whatever the job count; each job is
/// sequential internally, so the records do not depend on `jobs`.
inline std::vector<SweepRecord> sweep(std::shared_ptr<const BoundaryCurve> curve,
                                      const std::vector<double>& eps_list,
                                      const SweepOptions& opts,
                                      const std::function<void(const SweepRecord&)>& on_record = {}) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw ConstructionError("sweep eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw ConstructionError("sweep eps list must be strictly decreasing");
    }
  }
  auto chart = std::make_shared<const TangentNormalChart>(curve);
  std::vector<SweepRecord> out(eps_list.size());

  if (opts.warm_start) {
    std::optional<GridField> prev;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      const double eps = eps_list[i];
      try {
        const EnergyParams params{eps, opts.k};
        auto mesh = std::make_shared<const InteriorMesh>(curve, opts.mesh.n_theta,
                                                         opts.mesh.radial_for(eps, *curve));
        GridField init = vortex_ansatz(mesh, opts.vortex_centre, eps);
        if (prev) {
          const FieldInterpolator interp(*prev);
          init = project_tangential(sample_field(mesh, [&](const Vec2& x) { return interp(x); }));
        }
        MinimizeResult res = minimize(init, params, opts.minimize);
        out[i] = evaluate_record(res.field, params, *chart, chart, opts);
        out[i].iterations = res.report.iterations;
        out[i].converged = res.report.converged;
        if (!out[i].converged) out[i].status = res.report.message;
        prev = std::move(res.field);
      } catch (const std::exception& e) {
        out[i] = SweepRecord{};
        out[i].eps = eps;
        out[i].status = e.what();
        prev.reset();
      }
      if (on_record) on_record(out[i]);
    }
    return out;
  }

  const int jobs = std::max(1, opts.jobs);
  std::size_t next = 0;
  std::size_t emitted = 0;
  std::vector<std::future<SweepRecord>> running(eps_list.size());
  std::vector<bool> done(eps_list.size(), false);
  std::size_t in_flight = 0;
  while (emitted < eps_list.size()) {
    while (in_flight < static_cast<std::size_t>(jobs) && next < eps_list.size()) {
      running[next] = std::async(std::launch::async, detail::sweep_one, curve, chart,
                                 eps_list[next], std::cref(opts), nullptr);
      ++next;
      ++in_flight;
    }
    // Emit strictly in input order.
    out[emitted] = running[emitted].get();
    --in_flight;
    if (on_record) on_record(out[emitted]);
    ++emitted;
  }
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline const char* sweep_csv_header() {
  return "eps,sup_u,eps_lip,e_dir,e_div,e_pot,e_total,excess,combo,degree,iters";
}

/// One CSV row (no newline). Failed records carry nan diagnostics.
inline std::string sweep_csv_row(const SweepRecord& r) {
  const bool ok = r.n_theta > 0;
  auto val = [&](double v) {
    return detail::fmt_double(ok ? v : std::numeric_limits<double>::quiet_NaN());
  };
  std::string s = detail::fmt_double(r.eps);
  for (double v : {r.sup_u, r.eps_lip, r.energy.dirichlet, r.energy.divergence, r.energy.potential,
                   r.energy.total, r.excess, r.combo}) {
    s += ',';
    s += val(v);
  }
  s += ',' + std::to_string(r.degree) + ',' + std::to_string(r.iterations);
  return s;
}

/// Checks of the sweep against the scaling statements (flatness only).
struct SweepSummary {
  double sup_spread = 0.0;
  double lip_spread = 0.0;
  double energy_slope = 0.0;  ///< OLS slope of total energy vs ln(1/eps); nan below 4 records
  double combo_ratio = 0.0;   ///< max / min
  bool degrees_one = false;
  double l4_ratio = 0.0;  ///< max / min over core and boundary windows
};

inline SweepSummary summarize(const std::vector<SweepRecord>& recs) {
  SweepSummary s;
  std::vector<double> sup, lip, x, e, combo, l4;
  s.degrees_one = !recs.empty();
  for (const SweepRecord& r : recs) {
    sup.push_back(r.sup_u);
    lip.push_back(r.eps_lip);
    x.push_back(std::log(1.0 / r.eps));
    e.push_back(r.energy.total);
    combo.push_back(r.combo);
    l4.push_back(r.l4_core);
    l4.push_back(r.l4_boundary);
    s.degrees_one = s.degrees_one && r.degree == 1;
  }
  if (recs.empty()) return s;
  s.sup_spread = relative_spread(sup);
  s.lip_spread = relative_spread(lip);
  // The slope fit needs at least four eps values.
  s.energy_slope = recs.size() >= 4 ? ols_slope(x, e) : std::numeric_limits<double>::quiet_NaN();
  s.combo_ratio = *std::max_element(combo.begin(), combo.end()) /
                  *std::min_element(combo.begin(), combo.end());
  s.l4_ratio = *std::max_element(l4.begin(), l4.end()) / *std::min_element(l4.begin(), l4.end());
  return s;
}

}  // namespace gldiv
