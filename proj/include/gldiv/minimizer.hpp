#pragma once

// Initial data and constrained minimization of the discrete energy.
//
// The minimizer is a projected Barzilai-Borwein iteration with a strict
// Armijo safeguard. Search directions are preconditioned by
//   P = L + M / eps^2,
// L the edge part of the Dirichlet form (one scalar Laplacian per component)
// and M the lumped mass, factored once per run. Without it the polar grid's
// tiny centre cells make diagonal scalings stiff beyond use.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gldiv/energy.hpp"
#include "gldiv/error.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv {

/// rho_eps(x) (x - x0)^perp / |x - x0| with rho_eps = min(|x - x0| / eps, 1),
/// projected onto the tangential constraint.
inline GridField vortex_ansatz(std::shared_ptr<const InteriorMesh> mesh, const Vec2& x0,
                               double eps) {
  if (!(eps > 0.0)) throw ConstructionError("vortex ansatz needs eps > 0");
  if (!mesh->curve().contains(x0)) throw ConstructionError("vortex centre lies outside the domain");
  GridField f = sample_field(mesh, [&](const Vec2& x) -> Vec2 {
    const Vec2 d = x - x0;
    const double r = d.norm();
    if (r < 1e-14) return Vec2::Zero();
    return std::min(r / eps, 1.0) * perp(d) / r;
  });
  project_tangential_inplace(f);
  return f;
}

/// I.i.d. components uniform in [-1, 1), projected. The stream is a 64-bit
/// Mersenne twister mapped to doubles bit-wise so the field is identical on
/// every platform.
inline GridField random_init(std::shared_ptr<const InteriorMesh> mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  GridField f(mesh);
  for (Vec2& v : f.values) {
    const double a = uniform();
    v = Vec2(a, uniform());
  }
  project_tangential_inplace(f);
  return f;
}

struct MinimizeOptions {
  int max_iterations = 20000;
  /// Stop when max_n |g_n| / w_n <= tolerance / eps^2 (g the projected
  /// gradient, w the node weights).
  double tolerance = 1e-6;
  double armijo = 1e-4;
  int max_backtracks = 60;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(tolerance > 0.0)) throw ConstructionError("minimizer tolerance must be positive");
    if (max_iterations < 0) throw ConstructionError("max_iterations must be non-negative");
  }
};

struct MinimizeReport {
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  bool converged = false;
  std::string message;
};

struct MinimizeResult {
  GridField field;
  MinimizeReport report;
};

namespace detail {

class Preconditioner {
 public:
  Preconditioner(const InteriorMesh& mesh, double eps) {
    const auto n = static_cast<Eigen::Index>(mesh.grid().size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.dirichlet_edges().size() * 4 + static_cast<std::size_t>(n));
    for (const EdgeTerm& t : mesh.dirichlet_edges()) {
      trip.emplace_back(t.a, t.a, t.c);
      trip.emplace_back(t.b, t.b, t.c);
      trip.emplace_back(t.a, t.b, -t.c);
      trip.emplace_back(t.b, t.a, -t.c);
    }
    const double mu = 1.0 / (eps * eps);
    for (Eigen::Index k = 0; k < n; ++k) trip.emplace_back(k, k, mu * mesh.grid().weight[k]);
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success) throw NumericalError("preconditioner factorization failed");
  }

  std::vector<Vec2> solve(const std::vector<Vec2>& rhs) const {
    const auto n = static_cast<Eigen::Index>(rhs.size());
    Eigen::MatrixX2d b(n, 2);
    for (Eigen::Index k = 0; k < n; ++k) b.row(k) = rhs[k].transpose();
    const Eigen::MatrixX2d x = solver_.solve(b);
    std::vector<Vec2> out(rhs.size());
    for (Eigen::Index k = 0; k < n; ++k) out[k] = x.row(k).transpose();
    return out;
  }

  /// s^T P s.
  double norm2(const std::vector<Vec2>& s) const {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixX2d v(n, 2);
    for (Eigen::Index k = 0; k < n; ++k) v.row(k) = s[k].transpose();
    return (v.transpose() * (matrix_ * v)).trace();
  }

 private:
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

inline double dot(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += a[n].dot(b[n]);
  return acc;
}

inline double scaled_max_norm(const std::vector<Vec2>& g, const std::vector<double>& w) {
  double m = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) m = std::max(m, g[n].norm() / w[n]);
  return m;
}

}  // namespace detail

/// Projected gradient of the discrete energy (see energy_gradient).
inline EnergyBreakdown projected_energy_gradient(const GridField& u, const EnergyParams& params,
                                                 std::vector<Vec2>& g) {
  const EnergyBreakdown e = energy_and_raw_gradient(u, params, g);
  const InteriorMesh& mesh = *u.mesh;
  const int j = mesh.n_s() - 1;
  for (int i = 0; i < mesh.n_theta(); ++i) {
    const Vec2& tau = mesh.boundary_frame(i).tau;
    Vec2& v = g[mesh.index(i, j)];
    v = v.dot(tau) * tau;
  }
  return e;
}

/// Minimize from `init`. The returned energy never exceeds energy(init);
/// the history holds the energy of the initial field and of every accepted
/// iterate.
inline MinimizeResult minimize(const GridField& init, const EnergyParams& params,
                               const MinimizeOptions& opts = {}) {
  params.validate();
  opts.validate();
  MinimizeResult out{project_tangential(init), {}};
  MinimizeReport& rep = out.report;
  GridField& u = out.field;
  if (opts.max_iterations == 0) {
    rep.history.push_back(energy(u, params).total);
    rep.message = "iteration cap is zero";
    return out;
  }

  const InteriorMesh& mesh = *u.mesh;
  const std::vector<double>& w = mesh.grid().weight;
  const double eps2 = params.epsilon * params.epsilon;
  const double target = opts.tolerance / eps2;
  const detail::Preconditioner precond(mesh, params.epsilon);

  std::vector<Vec2> g, g_new;
  const EnergyBreakdown e = projected_energy_gradient(u, params, g);
  rep.history.push_back(e.total);
  double alpha = 1.0;

  // The history tracks E(init) plus the accumulated accurate decreases,
  // which keeps it monotone below the rounding level of E itself.
  double energy_now = e.total;
  GridField step(u.mesh);
  for (int it = 0;; ++it) {
    rep.gradient_norm = detail::scaled_max_norm(g, w);
    if (rep.gradient_norm <= target) {
      rep.converged = true;
      rep.message = "converged";
      break;
    }
    if (it == opts.max_iterations) {
      rep.message = "iteration cap reached";
      break;
    }

    std::vector<Vec2> d = precond.solve(g);
    // Keep the direction in the constraint space: tangential on the boundary row.
    const int jb = mesh.n_s() - 1;
    for (int i = 0; i < mesh.n_theta(); ++i) {
      const Vec2& tau = mesh.boundary_frame(i).tau;
      Vec2& v = d[mesh.index(i, jb)];
      v = v.dot(tau) * tau;
    }
    const double slope = -detail::dot(g, d);
    if (!(slope < 0.0)) {
      rep.message = "no descent direction";
      break;
    }

    bool accepted = false;
    double decrease = 0.0;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      for (std::size_t n = 0; n < u.size(); ++n) step.values[n] = -alpha * d[n];
      decrease = energy_difference(u, step, params);
      if (decrease <= opts.armijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      rep.message = "line search stalled";
      break;
    }

    for (std::size_t n = 0; n < u.size(); ++n) u.values[n] += step.values[n];
    projected_energy_gradient(u, params, g_new);
    energy_now += decrease;
    rep.history.push_back(energy_now);
    ++rep.iterations;

    // Barzilai-Borwein step in the preconditioner's metric.
    double sy = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) sy += step.values[n].dot(g_new[n] - g[n]);
    const double sps = precond.norm2(step.values);
    alpha = sy > 0.0 ? std::clamp(sps / sy, 1e-8, 1e8) : 1.0;
    std::swap(g, g_new);
  }
  return out;
}

}  // namespace gldiv
