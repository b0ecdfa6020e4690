#pragma once

// Reflection across a curved boundary: the folding map sigma, the vector
// reflection R = tau tau^T - nu nu^T, the distortion factor, the glued
// metric, div_j, the Legendre-Hadamard form of the glued system and the
// weak-form gluing residual on the two-sided collar.
//
// Conventions: y2 > 0 inside, y2 < 0 outside (disk: y2 = 1 - r). For an
// exterior point x = X(y1, y2), sigma(x) = X(y1, -y2).

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gldiv/energy.hpp"
#include "gldiv/error.hpp"
#include "gldiv/geometry.hpp"
#include "gldiv/interpolation.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv {

using CollarGridField = Field<CollarMesh>;

/// sigma: identity on the closed domain, mirror at equal boundary distance
/// outside.
inline Vec2 fold_point(const TangentNormalChart& chart, const Vec2& x) {
  if (chart.curve().contains(x)) return x;
  const ChartPoint y = chart.to_chart(x);
  if (y.y2 >= 0.0) return x;
  return chart.to_cartesian(y.y1, -y.y2);
}

inline Mat2 reflection_matrix(const Frame& f) {
  return f.tau * f.tau.transpose() - f.nu * f.nu.transpose();
}

/// R(x, z) = [tau tau^T - nu nu^T] z in the frame at the foot point of x.
inline Vec2 reflect_vector(const TangentNormalChart& chart, const Vec2& x, const Vec2& z) {
  const ChartPoint y = chart.to_chart(x);
  return reflection_matrix(chart.curve().frame(y.y1)) * z;
}

/// 1 inside; (1 - y2 kappa) / (1 + y2 kappa) with the signed exterior y2.
inline double distortion_factor(double y2, double kappa) {
  if (y2 >= 0.0) return 1.0;
  return (1.0 - y2 * kappa) / (1.0 + y2 * kappa);
}

inline double distortion(const TangentNormalChart& chart, double y1, double y2) {
  if (!(std::abs(y2) < chart.r0())) throw OutOfCollarError("distortion evaluated outside the collar");
  return distortion_factor(y2, chart.curve().frame(y1).kappa);
}

/// |det grad sigma|: 1 inside, J(y1, -y2) / J(y1, y2) outside.
inline double det_sigma(double y2, double kappa) {
  if (y2 >= 0.0) return 1.0;
  return (1.0 - std::abs(y2) * kappa) / (1.0 + std::abs(y2) * kappa);
}

/// Metric data of the glued system at one chart point.
///   chart:     G = diag(1/(1 - y2 kappa)^2, 1) inside, M = diag(1/(1 - |y2| kappa)^2, 1)
///              outside; the (y1, y2) coefficient matrix of the Dirichlet form.
///   cartesian: grad sigma(sigma(x)) grad sigma(sigma(x))^T, identity inside and
///              grad X M grad X^T = (1 - y2 kappa)^2 / (1 - |y2| kappa)^2 tau tau^T + nu nu^T
///              outside.
struct GluedMetric {
  Mat2 chart = Mat2::Identity();
  Mat2 cartesian = Mat2::Identity();
  double det_sigma = 1.0;
};

inline GluedMetric glued_metric(const Frame& f, double y2) {
  GluedMetric g;
  const double kappa = f.kappa;
  if (y2 >= 0.0) {
    const double j = 1.0 - y2 * kappa;
    g.chart(0, 0) = 1.0 / (j * j);
    return g;
  }
  const double inner = 1.0 - std::abs(y2) * kappa;
  const double outer = 1.0 - y2 * kappa;
  g.chart(0, 0) = 1.0 / (inner * inner);
  g.cartesian = (outer * outer) / (inner * inner) * f.tau * f.tau.transpose() +
                f.nu * f.nu.transpose();
  g.det_sigma = det_sigma(y2, kappa);
  return g;
}

inline GluedMetric glued_metric(const TangentNormalChart& chart, double y1, double y2) {
  if (!(std::abs(y2) < chart.r0())) throw OutOfCollarError("metric evaluated outside the collar");
  return glued_metric(chart.curve().frame(y1), y2);
}

/// Lemma-style coefficient table of the glued system (k1 = 1), evaluated as
/// sum A^{ab}_{ij} xi_a xi_b eta^i eta^j with t = y2 kappa.
inline double legendre_hadamard_form(double y2_kappa, double k, const Vec2& xi, const Vec2& eta) {
  const double a = 1.0 / (1.0 + y2_kappa);
  const double x1 = xi.x(), x2 = xi.y(), e1 = eta.x(), e2 = eta.y();
  return (1.0 + k) * a * a * x1 * x1 * e1 * e1 + a * a * x1 * x1 * e2 * e2 +
         2.0 * k * a * x1 * x2 * e1 * e2 + x2 * x2 * e1 * e1 + (1.0 + k) * x2 * x2 * e2 * e2;
}

inline double legendre_hadamard_form(const TangentNormalChart& chart, double y1, double y2, double k,
                                     const Vec2& xi, const Vec2& eta) {
  return legendre_hadamard_form(y2 * chart.curve().frame(y1).kappa, k, xi, eta);
}

/// min{1/(1 + y2 kappa)^2, 1}, the ellipticity constant with signed y2.
inline double legendre_hadamard_bound(double y2_kappa) {
  const double a = 1.0 / (1.0 + y2_kappa);
  return std::min(a * a, 1.0);
}

/// Point evaluation of the extension U of an interior field:
/// U = u on the closed domain, U(x) = R(x, u(sigma(x))) outside.
class ExtendedField {
 public:
  ExtendedField(const GridField& u, std::shared_ptr<const TangentNormalChart> chart)
      : interp_(u), chart_(std::move(chart)) {}

  Vec2 operator()(const Vec2& x) const {
    if (chart_->curve().contains(x)) return interp_(x);
    const ChartPoint y = chart_->to_chart(x);
    if (-y.y2 >= chart_->r1()) throw OutOfCollarError("point lies beyond the extension collar");
    const Frame f = chart_->curve().frame(y.y1);
    if (y.y2 >= 0.0) return interp_(x);
    return reflection_matrix(f) * interp_(f.point - y.y2 * f.nu);
  }

  const TangentNormalChart& chart() const { return *chart_; }

 private:
  FieldInterpolator interp_;
  std::shared_ptr<const TangentNormalChart> chart_;
};

/// Extension U on the collar mesh with cached per-node factors.
struct CollarField {
  CollarGridField field;
  std::vector<double> distortion;
  std::vector<GluedMetric> metric;

  const CollarMesh& mesh() const { return *field.mesh; }
  std::size_t size() const { return field.size(); }
};

namespace detail {

inline void fill_factors(CollarField& cf) {
  const CollarMesh& m = *cf.field.mesh;
  cf.distortion.resize(m.grid().size());
  cf.metric.resize(m.grid().size());
  for (int j = 0; j < m.n2(); ++j) {
    for (int i = 0; i < m.n1(); ++i) {
      const int n = m.index(i, j);
      cf.distortion[n] = distortion_factor(m.y2(j), m.frame(i).kappa);
      cf.metric[n] = glued_metric(m.frame(i), m.y2(j));
    }
  }
}

}  // namespace detail

/// Factors only; values left at zero. For test functions.
inline CollarField make_collar_field(std::shared_ptr<const CollarMesh> mesh) {
  CollarField cf{CollarGridField(std::move(mesh)), {}, {}};
  detail::fill_factors(cf);
  return cf;
}

/// Interior side: the interpolated interior field. Exterior node (i, j):
/// R applied to the interior value at its mirror node, so the parities
/// U_tau even / U_nu odd hold exactly node by node.
inline CollarField reflect_extend(const GridField& u, std::shared_ptr<const CollarMesh> mesh) {
  CollarField cf = make_collar_field(mesh);
  const CollarMesh& m = *mesh;
  const FieldInterpolator interp(u);
  for (int j = m.n2() / 2; j < m.n2(); ++j) {
    for (int i = 0; i < m.n1(); ++i) {
      const int n = m.index(i, j);
      cf.field.values[n] = interp(m.grid().position[n]);
    }
  }
  for (int j = 0; j < m.n2() / 2; ++j) {
    for (int i = 0; i < m.n1(); ++i) {
      const int n = m.index(i, j);
      cf.field.values[n] = reflection_matrix(m.frame(i)) * cf.field.values[m.mirror(n)];
    }
  }
  return cf;
}

/// div_j(w) = |det grad sigma|^{1/2} [D tau.(d_tau w) + nu.(d_nu w)], the
/// frame (tau, nu) frozen at the foot point; d_tau, d_nu are Cartesian
/// directional derivatives. Inside (D = 1) this is the ordinary divergence.
inline std::vector<double> div_j(const CollarField& cf, const std::vector<Mat2>& grad) {
  const CollarMesh& m = cf.mesh();
  std::vector<double> out(m.grid().size());
  for (int j = 0; j < m.n2(); ++j) {
    for (int i = 0; i < m.n1(); ++i) {
      const int n = m.index(i, j);
      const Frame& f = m.frame(i);
      out[n] = std::sqrt(cf.metric[n].det_sigma) *
               (cf.distortion[n] * f.tau.dot(grad[n] * f.tau) + f.nu.dot(grad[n] * f.nu));
    }
  }
  return out;
}

inline std::vector<double> div_j(const CollarField& cf) {
  return div_j(cf, discrete_gradient(cf.field));
}

/// Tensor-product polynomial bump in chart coordinates,
/// phi(t) = (1 - t^2)^3 on |t| < 1, times a frame-fixed direction
/// a_tau tau(y1) + a_nu nu(y1).
struct ChartBump {
  double y1 = 0.0;
  double y2 = 0.0;
  double half_width1 = 0.1;
  double half_width2 = 0.05;
  double a_tau = 1.0;
  double a_nu = 0.0;

  static double profile(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double q = 1.0 - t * t;
    return q * q * q;
  }

  double amplitude(double y1_node, double y2_node, double perimeter) const {
    double d = std::remainder(y1_node - y1, perimeter);
    return profile(d / half_width1) * profile((y2_node - y2) / half_width2);
  }
};

inline CollarGridField sample_bump(std::shared_ptr<const CollarMesh> mesh, const ChartBump& b) {
  CollarGridField v(mesh);
  const double L = mesh->chart().curve().perimeter();
  for (int j = 0; j < mesh->n2(); ++j) {
    for (int i = 0; i < mesh->n1(); ++i) {
      const Frame& f = mesh->frame(i);
      v.values[mesh->index(i, j)] =
          b.amplitude(mesh->y1(i), mesh->y2(j), L) * (b.a_tau * f.tau + b.a_nu * f.nu);
    }
  }
  return v;
}

/// 16 deterministic bumps. `interior_only` keeps the supports strictly
/// inside the domain (y2 - h2 > 0); otherwise they straddle the boundary
/// (centred at y2 = 0). All supports stay inside the collar.
inline std::vector<ChartBump> standard_bumps(const TangentNormalChart& chart, bool interior_only) {
  const double L = chart.curve().perimeter();
  const double r1 = chart.r1();
  std::vector<ChartBump> out;
  out.reserve(16);
  for (int k = 0; k < 16; ++k) {
    ChartBump b;
    b.y1 = L * (k + 0.25 * (k % 3)) / 16.0;
    b.half_width1 = L * (0.06 + 0.02 * (k % 4));
    const double angle = 0.4 * k;
    b.a_tau = std::cos(angle);
    b.a_nu = std::sin(angle);
    if (interior_only) {
      b.half_width2 = r1 * (0.25 + 0.05 * (k % 2));
      b.y2 = 0.5 * r1 + 0.05 * r1 * ((k % 3) - 1);
    } else {
      b.half_width2 = r1 * (0.6 + 0.1 * (k % 3));
      b.y2 = 0.0;
    }
    out.push_back(b);
  }
  return out;
}

/// Parts of the glued weak form for one test field v:
///   principal = sum_i int <grad U^i, grad v^i>_j + k int div_j(U) div_j(v)
///   reaction  = int_in U.v (1 - |U|^2)/eps^2 + int_out |det grad sigma| U.v (1 - |U|^2)/eps^2
///   remainder = principal - reaction.
/// Outside, R(x, u(sigma x)) = U(x), so the exterior reaction density is
/// |det grad sigma| U . v (1 - |U|^2) / eps^2.
struct GluingResidual {
  double principal = 0.0;
  double reaction = 0.0;
  double remainder = 0.0;
};

inline GluingResidual weak_glued_residual(const CollarField& U, const CollarGridField& v,
                                          const EnergyParams& params) {
  params.validate();
  const CollarMesh& m = U.mesh();
  if (v.mesh.get() != U.field.mesh.get()) throw Error("test field lives on a different collar mesh");
  for (int i = 0; i < m.n1(); ++i) {
    if (v.values[m.index(i, 0)].norm() > 0.0 || v.values[m.index(i, m.n2() - 1)].norm() > 0.0) {
      throw Error("test field must vanish on the outer collar rows");
    }
  }
  const auto gu = discrete_gradient(U.field);
  const auto gv = discrete_gradient(v);
  const auto du = div_j(U, gu);
  const auto dv = div_j(U, gv);
  const double inve2 = 1.0 / (params.epsilon * params.epsilon);
  GluingResidual r;
  for (std::size_t n = 0; n < m.grid().size(); ++n) {
    const double w = m.grid().weight[n];
    const GluedMetric& g = U.metric[n];
    // sum_i <grad U^i, grad v^i>_j with row i of the gradients.
    const double dirichlet = g.det_sigma * (gu[n] * g.cartesian * gv[n].transpose()).trace();
    r.principal += w * (dirichlet + params.k * du[n] * dv[n]);
    const Vec2& u = U.field.values[n];
    r.reaction += w * g.det_sigma * u.dot(v.values[n]) * (1.0 - u.squaredNorm()) * inve2;
  }
  r.remainder = r.principal - r.reaction;
  return r;
}

/// Reaction integral restricted to interior-side nodes.
inline double interior_reaction(const CollarField& U, const CollarGridField& v,
                                const EnergyParams& params) {
  const CollarMesh& m = U.mesh();
  const double inve2 = 1.0 / (params.epsilon * params.epsilon);
  double acc = 0.0;
  for (std::size_t n = 0; n < m.grid().size(); ++n) {
    if (m.exterior(static_cast<int>(n))) continue;
    const Vec2& u = U.field.values[n];
    acc += m.grid().weight[n] * u.dot(v.values[n]) * (1.0 - u.squaredNorm()) * inve2;
  }
  return acc;
}

/// Collar norms entering the linear-growth audit.
struct CollarNorms {
  double l2 = 0.0;       ///< ||U||_{L2}
  double grad_l2 = 0.0;  ///< ||grad U||_{L2}
};

inline CollarNorms collar_norms(const CollarGridField& f) {
  const auto g = discrete_gradient(f);
  const auto& w = f.grid().weight;
  CollarNorms out;
  for (std::size_t n = 0; n < f.size(); ++n) {
    out.l2 += w[n] * f.values[n].squaredNorm();
    out.grad_l2 += w[n] * g[n].squaredNorm();
  }
  out.l2 = std::sqrt(out.l2);
  out.grad_l2 = std::sqrt(out.grad_l2);
  return out;
}

/// |R(v)| / ((1 + ||U|| + ||grad U||) ||v||_{W^{1,2}}), the empirical
/// constant of the linear-growth bound for one test field.
inline double growth_ratio(const CollarField& U, const CollarGridField& v,
                           const EnergyParams& params) {
  const GluingResidual r = weak_glued_residual(U, v, params);
  const CollarNorms nu = collar_norms(U.field);
  const CollarNorms nv = collar_norms(v);
  const double vnorm = std::sqrt(nv.l2 * nv.l2 + nv.grad_l2 * nv.grad_l2);
  return std::abs(r.remainder) / ((1.0 + nu.l2 + nu.grad_l2) * vnorm);
}

/// Largest jumps across y2 = 0 of the tangential trace U_tau and of its
/// normal derivative d_{y2} U_tau, from quadratic one-sided extrapolation
/// of the three rows nearest the boundary on each side.
struct TraceJumps {
  double value = 0.0;
  double normal_derivative = 0.0;
};

inline TraceJumps trace_jumps(const CollarField& U) {
  const CollarMesh& m = U.mesh();
  const int half = m.n2() / 2;
  if (half < 3) throw ConstructionError("trace jumps need at least three rows per side");
  const double h = m.dy2();
  TraceJumps out;
  for (int i = 0; i < m.n1(); ++i) {
    const Vec2& tau = m.frame(i).tau;
    auto ut = [&](int j) { return U.field.values[m.index(i, j)].dot(tau); };
    // Rows at distance h/2, 3h/2, 5h/2 from the boundary.
    const double a1 = ut(half), a2 = ut(half + 1), a3 = ut(half + 2);
    const double b1 = ut(half - 1), b2 = ut(half - 2), b3 = ut(half - 3);
    const double trace_in = 1.875 * a1 - 1.25 * a2 + 0.375 * a3;
    const double trace_out = 1.875 * b1 - 1.25 * b2 + 0.375 * b3;
    const double d_in = (-2.0 * a1 + 3.0 * a2 - a3) / h;
    const double d_out = -(-2.0 * b1 + 3.0 * b2 - b3) / h;
    out.value = std::max(out.value, std::abs(trace_in - trace_out));
    out.normal_derivative = std::max(out.normal_derivative, std::abs(d_in - d_out));
  }
  return out;
}

}  // namespace gldiv
