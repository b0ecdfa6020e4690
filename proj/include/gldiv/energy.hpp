#pragma once

// Discrete Ginzburg-Landau energy with divergence penalty
//   E(u) = D(u) + sum_n w_n [ k/2 (tr Du)^2 + (|u|^2 - 1)^2 / (4 eps^2) ]
// on an interior mesh, where D is the compact Dirichlet form of the mesh
// (see InteriorMesh::dirichlet_edges), its exact gradient, the tangential
// projection at the boundary row, and the strong-form Euler-Lagrange residual.

#include <cmath>
#include <string>
#include <vector>

#include "gldiv/error.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv {

/// eps is the coherence length, k the divergence modulus. The elastic
/// constant of the Dirichlet term is fixed to 1.
struct EnergyParams {
  double epsilon = 0.1;
  double k = 1.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ConstructionError("epsilon must be positive, got " + std::to_string(epsilon));
    }
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw ConstructionError("divergence modulus k must be positive, got " + std::to_string(k));
    }
  }
};

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double divergence = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

namespace detail {

inline void require_finite(const GridField& field) {
  for (const Vec2& v : field.values) {
    if (!std::isfinite(v.x()) || !std::isfinite(v.y())) {
      throw NumericalError("field contains non-finite values");
    }
  }
}

}  // namespace detail

inline EnergyBreakdown energy(const GridField& field, const EnergyParams& params) {
  params.validate();
  detail::require_finite(field);
  const StructuredGrid& g = field.grid();
  const InteriorMesh& mesh = *field.mesh;
  const auto grad = discrete_gradient(field);
  const double inv4e2 = 0.25 / (params.epsilon * params.epsilon);
  EnergyBreakdown e;
  const auto& u = field.values;
  for (const EdgeTerm& t : mesh.dirichlet_edges()) {
    e.dirichlet += 0.5 * t.c * (u[t.a] - u[t.b]).squaredNorm();
  }
  for (const CrossTerm& t : mesh.dirichlet_cross()) {
    e.dirichlet += t.kappa * (u[t.b] - u[t.a]).dot(u[t.ap] - u[t.am] + u[t.bp] - u[t.bm]);
  }
  const auto& forms = mesh.dirichlet_node_forms();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double w = g.weight[n];
    const double div = grad[n].trace();
    const double m = field.values[n].squaredNorm() - 1.0;
    e.dirichlet += 0.5 * (grad[n] * forms[n] * grad[n].transpose()).trace();
    e.divergence += w * 0.5 * params.k * div * div;
    e.potential += w * inv4e2 * m * m;
  }
  e.total = e.dirichlet + e.divergence + e.potential;
  return e;
}

/// Replace u by (u . tau) tau on the boundary row; interior untouched.
inline void project_tangential_inplace(GridField& field) {
  const InteriorMesh& mesh = *field.mesh;
  const int j = mesh.n_s() - 1;
  for (int i = 0; i < mesh.n_theta(); ++i) {
    const Vec2& tau = mesh.boundary_frame(i).tau;
    Vec2& u = field.values[mesh.index(i, j)];
    u = u.dot(tau) * tau;
  }
}

inline GridField project_tangential(GridField field) {
  project_tangential_inplace(field);
  return field;
}

/// Energy together with its exact (unprojected) gradient with respect to the
/// nodal values.
inline EnergyBreakdown energy_and_raw_gradient(const GridField& field, const EnergyParams& params,
                                               std::vector<Vec2>& gradient) {
  params.validate();
  const StructuredGrid& g = field.grid();
  const InteriorMesh& mesh = *field.mesh;
  const auto grad = discrete_gradient(field);
  const double inv4e2 = 0.25 / (params.epsilon * params.epsilon);
  const double inve2 = 1.0 / (params.epsilon * params.epsilon);
  gradient.assign(g.size(), Vec2::Zero());
  EnergyBreakdown e;
  for (const EdgeTerm& t : mesh.dirichlet_edges()) {
    const Vec2 d = field.values[t.a] - field.values[t.b];
    e.dirichlet += 0.5 * t.c * d.squaredNorm();
    gradient[t.a] += t.c * d;
    gradient[t.b] -= t.c * d;
  }
  for (const CrossTerm& t : mesh.dirichlet_cross()) {
    const auto& v = field.values;
    const Vec2 d = v[t.b] - v[t.a];
    const Vec2 sum = v[t.ap] - v[t.am] + v[t.bp] - v[t.bm];
    e.dirichlet += t.kappa * d.dot(sum);
    gradient[t.b] += t.kappa * sum;
    gradient[t.a] -= t.kappa * sum;
    gradient[t.ap] += t.kappa * d;
    gradient[t.am] -= t.kappa * d;
    gradient[t.bp] += t.kappa * d;
    gradient[t.bm] -= t.kappa * d;
  }
  const auto& forms = mesh.dirichlet_node_forms();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double w = g.weight[n];
    const double div = grad[n].trace();
    const Vec2& u = field.values[n];
    const double m = u.squaredNorm() - 1.0;
    e.dirichlet += 0.5 * (grad[n] * forms[n] * grad[n].transpose()).trace();
    e.divergence += w * 0.5 * params.k * div * div;
    e.potential += w * inv4e2 * m * m;

    // d/dG of the node terms, contracted with the stencil weights of every
    // node feeding G.
    const Mat2 flux = grad[n] * forms[n] + w * params.k * div * Mat2::Identity();
    const Stencil& st = g.stencil[n];
    for (int k = 0; k < 9; ++k) gradient[st.index[k]] += flux * st.coeff[k];
    gradient[n] += w * inve2 * m * u;
  }
  e.total = e.dirichlet + e.divergence + e.potential;
  if (!std::isfinite(e.total)) throw NumericalError("energy is not finite");
  return e;
}

/// E(u + delta) - E(u), evaluated term by term in difference form so that
/// the result is accurate relative to its own size rather than to E. Used
/// by line searches once decreases fall below the rounding level of E.
inline double energy_difference(const GridField& u, const GridField& delta,
                                const EnergyParams& params) {
  params.validate();
  const StructuredGrid& g = u.grid();
  const InteriorMesh& mesh = *u.mesh;
  const auto gu = discrete_gradient(u);
  const auto gd = discrete_gradient(delta);
  const double inv4e2 = 0.25 / (params.epsilon * params.epsilon);
  double acc = 0.0;
  for (const EdgeTerm& t : mesh.dirichlet_edges()) {
    const Vec2 a = u.values[t.a] - u.values[t.b];
    const Vec2 d = delta.values[t.a] - delta.values[t.b];
    acc += 0.5 * t.c * d.dot(2.0 * a + d);
  }
  for (const CrossTerm& t : mesh.dirichlet_cross()) {
    const auto& v = u.values;
    const auto& p = delta.values;
    const Vec2 dv = v[t.b] - v[t.a], dp = p[t.b] - p[t.a];
    const Vec2 sv = v[t.ap] - v[t.am] + v[t.bp] - v[t.bm];
    const Vec2 sp = p[t.ap] - p[t.am] + p[t.bp] - p[t.bm];
    acc += t.kappa * (dp.dot(sv + sp) + dv.dot(sp));
  }
  const auto& forms = mesh.dirichlet_node_forms();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double w = g.weight[n];
    acc += 0.5 * (gd[n] * forms[n] * (2.0 * gu[n] + gd[n]).transpose()).trace();
    const double tu = gu[n].trace(), td = gd[n].trace();
    acc += 0.5 * w * params.k * td * (2.0 * tu + td);
    const Vec2& v = u.values[n];
    const Vec2& d = delta.values[n];
    const double m = v.squaredNorm() - 1.0;
    const double dm = d.dot(2.0 * v + d);
    acc += w * inv4e2 * dm * (2.0 * m + dm);
  }
  if (!std::isfinite(acc)) throw NumericalError("energy difference is not finite");
  return acc;
}

/// Exact gradient of the discrete energy, projected onto the constraint
/// space (tangential component only on the boundary row). The Neumann
/// condition on the tangential component is natural and not imposed.
inline GridField energy_gradient(const GridField& field, const EnergyParams& params) {
  GridField out(field.mesh);
  energy_and_raw_gradient(field, params, out.values);
  project_tangential_inplace(out);
  return out;
}

/// -Laplace(u) - k grad(div u) by composing the discrete gradient with itself.
template <class MeshT>
Field<MeshT> linear_operator(const Field<MeshT>& field, double k) {
  const StructuredGrid& g = field.grid();
  const auto grad = discrete_gradient(field);
  std::vector<double> comp(g.size());
  Field<MeshT> out(field.mesh);
  // Laplacian of each component as the divergence of its gradient.
  for (int i = 0; i < 2; ++i) {
    std::vector<Vec2> second_x, second_y;
    for (std::size_t n = 0; n < g.size(); ++n) comp[n] = grad[n](i, 0);
    second_x = scalar_gradient(g, comp);
    for (std::size_t n = 0; n < g.size(); ++n) comp[n] = grad[n](i, 1);
    second_y = scalar_gradient(g, comp);
    for (std::size_t n = 0; n < g.size(); ++n) out.values[n](i) = -(second_x[n].x() + second_y[n].y());
  }
  for (std::size_t n = 0; n < g.size(); ++n) comp[n] = grad[n].trace();
  const auto grad_div = scalar_gradient(g, comp);
  for (std::size_t n = 0; n < g.size(); ++n) out.values[n] -= k * grad_div[n];
  return out;
}

/// Strong-form residual -Lap u - k grad div u - u (1 - |u|^2) / eps^2.
/// Boundary-row entries are set to zero; only interior nodes carry the
/// equation.
inline GridField el_residual(const GridField& field, const EnergyParams& params) {
  params.validate();
  GridField out = linear_operator(field, params.k);
  const double inve2 = 1.0 / (params.epsilon * params.epsilon);
  const InteriorMesh& mesh = *field.mesh;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (mesh.is_boundary(static_cast<int>(n))) {
      out.values[n].setZero();
      continue;
    }
    const Vec2& u = field.values[n];
    out.values[n] -= inve2 * (1.0 - u.squaredNorm()) * u;
  }
  return out;
}

}  // namespace gldiv
