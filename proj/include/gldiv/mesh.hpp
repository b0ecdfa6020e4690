#pragma once

// Boundary-fitted tensor grids on the domain and on the two-sided collar,
// node fields, and the second-order discrete differential operators shared
// by every grid.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gldiv/error.hpp"
#include "gldiv/geometry.hpp"

namespace gldiv {

/// Gradient stencil of one node: d/dx u(node) = sum_k coeff[k] * u[index[k]]
/// (coeff[k] is the 2-vector of x- and y-weights).
struct Stencil {
  std::array<std::int32_t, 9> index{};
  std::array<Vec2, 9> coeff{};
};

/// A logically rectangular n1 x n2 grid of nodes (node = j * n1 + i),
/// optionally periodic in the first index. Holds node positions, quadrature
/// weights and the gradient stencils.
///
/// The gradient at a node is the exact derivative of the least-squares
/// quadratic through the node that best fits its 3 x 3 index neighbourhood.
/// On symmetric neighbourhoods this is a centred difference; rows at the
/// edges of a non-periodic direction use the one-sided 3-row block. The
/// operator reproduces polynomials of degree <= 2 exactly.
struct StructuredGrid {
  int n1 = 0;
  int n2 = 0;
  bool periodic1 = true;
  std::vector<Vec2> position;
  std::vector<double> weight;
  std::vector<Stencil> stencil;

  std::size_t size() const { return position.size(); }
  int index(int i, int j) const { return j * n1 + i; }

  double total_weight() const {
    double acc = 0.0;
    for (double w : weight) acc += w;
    return acc;
  }

  /// Build the gradient stencils. `axes(node)` returns two local axis
  /// vectors already scaled by the local spacing; they only condition the
  /// fit and do not change the exactness on quadratics.
  void build_stencils(const std::function<std::pair<Vec2, Vec2>(int)>& axes) {
    stencil.assign(size(), Stencil{});
    for (int j = 0; j < n2; ++j) {
      const int j0 = std::clamp(j - 1, 0, n2 - 3);
      for (int i = 0; i < n1; ++i) {
        const int node = index(i, j);
        int i0 = i - 1;
        if (!periodic1) i0 = std::clamp(i - 1, 0, n1 - 3);
        const auto [a1, a2] = axes(node);
        Mat2 basis;
        basis.col(0) = a1;
        basis.col(1) = a2;
        const Mat2 to_local = basis.inverse();

        Eigen::Matrix<double, 8, 5> design;
        std::array<std::int32_t, 8> nbr{};
        int row = 0;
        for (int dj = 0; dj < 3; ++dj) {
          for (int di = 0; di < 3; ++di) {
            int ii = i0 + di;
            if (periodic1) ii = (ii % n1 + n1) % n1;
            const int jj = j0 + dj;
            const int other = index(ii, jj);
            if (other == node) continue;
            const Vec2 d = to_local * (position[other] - position[node]);
            design.row(row) << d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(),
                0.5 * d.y() * d.y();
            nbr[row] = other;
            ++row;
          }
        }
        const Eigen::Matrix<double, 5, 8> pinv =
            design.completeOrthogonalDecomposition().pseudoInverse();
        Stencil& st = stencil[node];
        Vec2 centre = Vec2::Zero();
        for (int k = 0; k < 8; ++k) {
          const Vec2 local(pinv(0, k), pinv(1, k));
          const Vec2 w = to_local.transpose() * local;
          st.index[k] = nbr[k];
          st.coeff[k] = w;
          centre -= w;
        }
        st.index[8] = node;
        st.coeff[8] = centre;
      }
    }
  }
};

/// Node field of 2-vectors (Cartesian components) on a mesh.
template <class MeshT>
struct Field {
  std::shared_ptr<const MeshT> mesh;
  std::vector<Vec2> values;

  Field() = default;
  explicit Field(std::shared_ptr<const MeshT> m)
      : mesh(std::move(m)), values(mesh->grid().size(), Vec2::Zero()) {}
  Field(std::shared_ptr<const MeshT> m, std::vector<Vec2> v)
      : mesh(std::move(m)), values(std::move(v)) {
    if (values.size() != mesh->grid().size()) {
      throw ConstructionError("field length does not match the mesh node count");
    }
  }

  std::size_t size() const { return values.size(); }
  Vec2& operator[](std::size_t n) { return values[n]; }
  const Vec2& operator[](std::size_t n) const { return values[n]; }
  const StructuredGrid& grid() const { return mesh->grid(); }
};

/// Quadratic form 1/2 c |u[a] - u[b]|^2 along one mesh edge.
struct EdgeTerm {
  std::int32_t a = 0;
  std::int32_t b = 0;
  double c = 0.0;
};

/// Bilinear form kappa (u[b] - u[a]) . (u[ap] - u[am] + u[bp] - u[bm]) on a
/// radial edge a -> b; ap/am (bp/bm) are the angular neighbours of a (b).
struct CrossTerm {
  std::int32_t a = 0, b = 0, ap = 0, am = 0, bp = 0, bm = 0;
  double kappa = 0.0;
};

/// Polar-type tensor grid of the domain: theta_i uniform on [0, 2pi),
/// s_j = (j + 1/2) ds with ds = 1 / (ns - 1/2), so that no node sits at the
/// centre and the last row lies on the boundary (s = 1).
/// Node position x = s rho(theta) (cos theta, sin theta).
class InteriorMesh {
 public:
  static constexpr int kMinTheta = 16;
  static constexpr int kMinRadial = 8;

  InteriorMesh(std::shared_ptr<const BoundaryCurve> curve, int n_theta, int n_s)
      : curve_(std::move(curve)) {
    if (!curve_) throw ConstructionError("mesh needs a boundary curve");
    if (n_theta < kMinTheta || n_s < kMinRadial) {
      throw ConstructionError("interior mesh needs n_theta >= 16 and n_s >= 8 (got " +
                              std::to_string(n_theta) + " x " + std::to_string(n_s) + ")");
    }
    grid_.n1 = n_theta;
    grid_.n2 = n_s;
    grid_.periodic1 = true;
    dtheta_ = kTwoPi / n_theta;
    ds_ = 1.0 / (n_s - 0.5);

    const std::size_t count = static_cast<std::size_t>(n_theta) * n_s;
    grid_.position.resize(count);
    grid_.weight.resize(count);
    theta_.resize(n_theta);
    boundary_frame_.resize(n_theta);
    std::vector<double> rho(n_theta);
    for (int i = 0; i < n_theta; ++i) {
      theta_[i] = i * dtheta_;
      rho[i] = curve_->radius(theta_[i]).r;
      boundary_frame_[i] = curve_->frame_at_theta(theta_[i]);
    }
    for (int j = 0; j < n_s; ++j) {
      const double s = s_value(j);
      // Exact integral of the radial Jacobian factor s over the node's cell.
      const double lo = j * ds_;
      const double hi = std::min(1.0, (j + 1) * ds_);
      const double cell = 0.5 * (hi * hi - lo * lo);
      for (int i = 0; i < n_theta; ++i) {
        const int n = grid_.index(i, j);
        grid_.position[n] = s * rho[i] * Vec2(std::cos(theta_[i]), std::sin(theta_[i]));
        grid_.weight[n] = dtheta_ * rho[i] * rho[i] * cell;
      }
    }

    min_spacing_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_s; ++j) {
      for (int i = 0; i < n_theta; ++i) {
        const Vec2& p = grid_.position[grid_.index(i, j)];
        min_spacing_ = std::min(min_spacing_,
                                (grid_.position[grid_.index((i + 1) % n_theta, j)] - p).norm());
        if (j + 1 < n_s) {
          min_spacing_ = std::min(min_spacing_, (grid_.position[grid_.index(i, j + 1)] - p).norm());
        }
      }
    }

    grid_.build_stencils([this](int n) {
      const int i = n % grid_.n1;
      const int j = n / grid_.n1;
      const double th = theta_[i];
      const Vec2 er(std::cos(th), std::sin(th));
      const double r = curve_->radius(th).r;
      return std::pair<Vec2, Vec2>{er * (ds_ * r), perp(er) * (s_value(j) * r * dtheta_)};
    });
    build_dirichlet_form();
  }

  const StructuredGrid& grid() const { return grid_; }
  const BoundaryCurve& curve() const { return *curve_; }
  std::shared_ptr<const BoundaryCurve> curve_ptr() const { return curve_; }

  int n_theta() const { return grid_.n1; }
  int n_s() const { return grid_.n2; }
  double dtheta() const { return dtheta_; }
  double ds() const { return ds_; }
  double theta(int i) const { return theta_[i]; }
  double s_value(int j) const { return (j + 0.5) * ds_; }
  int index(int i, int j) const { return grid_.index(i, j); }
  bool is_boundary(int node) const { return node / grid_.n1 == grid_.n2 - 1; }

  /// Smallest distance between neighbouring nodes.
  double min_spacing() const { return min_spacing_; }

  /// Largest node spacing (radial or angular) among nodes within `radius`
  /// of `centre`; the resolution measure of a vortex core.
  double local_spacing(const Vec2& centre, double radius) const {
    double h = 0.0;
    for (int j = 0; j < grid_.n2; ++j) {
      for (int i = 0; i < grid_.n1; ++i) {
        const Vec2& p = grid_.position[grid_.index(i, j)];
        if ((p - centre).norm() > radius) continue;
        h = std::max(h, (grid_.position[grid_.index((i + 1) % grid_.n1, j)] - p).norm());
        if (j + 1 < grid_.n2) h = std::max(h, (grid_.position[grid_.index(i, j + 1)] - p).norm());
      }
    }
    return h;
  }

  /// Boundary frame at the boundary node of column i.
  const Frame& boundary_frame(int i) const { return boundary_frame_[i]; }

  /// The Dirichlet integral 1/2 int |grad u|^2 is discretized compactly.
  /// In (theta, s) its integrand is
  ///   A s |u_s|^2 + |u_theta|^2 / s - 2 q u_s . u_theta,  q = rho'/rho, A = 1 + q^2.
  /// The diagonal parts live on radial and angular edges (EdgeTerm), the
  /// cross part on radial edges paired with the averaged centred angular
  /// difference (CrossTerm), and the radial part of the innermost half cell
  /// (0, s_0) is a node form 1/2 sum_i G_i^T B G_i on the stencil gradient.
  /// Every boundary flux then enters with unit weight, so the discrete
  /// natural condition is the conormal derivative, and edge differences
  /// carry no checkerboard null space.
  const std::vector<EdgeTerm>& dirichlet_edges() const { return dirichlet_edges_; }
  const std::vector<CrossTerm>& dirichlet_cross() const { return dirichlet_cross_; }
  const std::vector<Mat2>& dirichlet_node_forms() const { return dirichlet_node_forms_; }

 private:
  void build_dirichlet_form() {
    const int nt = grid_.n1;
    const int ns = grid_.n2;
    dirichlet_edges_.clear();
    dirichlet_edges_.reserve(static_cast<std::size_t>(2) * nt * ns);
    dirichlet_cross_.clear();
    dirichlet_node_forms_.assign(grid_.size(), Mat2::Zero());
    for (int j = 0; j < ns; ++j) {
      const double s = s_value(j);
      const double lo = j * ds_;
      const double hi = std::min(1.0, (j + 1) * ds_);
      const double cell = 0.5 * (hi * hi - lo * lo);
      for (int i = 0; i < nt; ++i) {
        const RadialSample rs = curve_->radius(theta_[i]);
        const double q = rs.dr / rs.r;
        const double A = 1.0 + q * q;
        const int n = grid_.index(i, j);
        const int ip = (i + 1) % nt, im = (i + nt - 1) % nt;
        if (j + 1 < ns) {
          const double s2 = s_value(j + 1);
          const int up = grid_.index(i, j + 1);
          dirichlet_edges_.push_back({n, up, dtheta_ * A * 0.5 * (s2 * s2 - s * s) / (ds_ * ds_)});
          if (q != 0.0) {
            dirichlet_cross_.push_back({n, up, grid_.index(ip, j), grid_.index(im, j),
                                        grid_.index(ip, j + 1), grid_.index(im, j + 1), -0.25 * q});
          }
        }
        // |u_theta|^2 / s over the cell, exact when u_theta grows like s.
        dirichlet_edges_.push_back({n, grid_.index(ip, j), cell / (s * s * dtheta_)});
        if (j == 0) {
          const Vec2 a_s = rs.r * Vec2(std::cos(theta_[i]), std::sin(theta_[i]));
          dirichlet_node_forms_[n] = (dtheta_ * A * 0.5 * s * s) * (a_s * a_s.transpose());
        }
      }
    }
  }

  std::shared_ptr<const BoundaryCurve> curve_;
  StructuredGrid grid_;
  std::vector<EdgeTerm> dirichlet_edges_;
  std::vector<CrossTerm> dirichlet_cross_;
  std::vector<Mat2> dirichlet_node_forms_;
  double dtheta_ = 0.0;
  double ds_ = 0.0;
  double min_spacing_ = 0.0;
  std::vector<double> theta_;
  std::vector<Frame> boundary_frame_;
};

/// Tensor grid of the two-sided collar in chart coordinates: y1 uniform on
/// [0, L), y2 cell-centred and symmetric on (-r1, r1). Row j mirrors row
/// n2 - 1 - j. Weights are dy1 dy2 |JX|.
class CollarMesh {
 public:
  CollarMesh(std::shared_ptr<const TangentNormalChart> chart, int n1, int n2)
      : chart_(std::move(chart)) {
    if (!chart_) throw ConstructionError("collar mesh needs a chart");
    if (n2 < 4 || n2 % 2 != 0) throw ConstructionError("collar n2 must be even and >= 4");
    if (n1 < 8) throw ConstructionError("collar n1 must be >= 8");
    const double r1 = chart_->r1();
    const double kmax = chart_->curve().max_abs_curvature();
    if (!(r1 * kmax < 1.0) || !(r1 < chart_->r0())) {
      throw ConstructionError("collar half-width r1 violates r1*max|kappa| < 1 or r1 < r0");
    }
    grid_.n1 = n1;
    grid_.n2 = n2;
    grid_.periodic1 = true;
    const double length = chart_->curve().perimeter();
    dy1_ = length / n1;
    dy2_ = 2.0 * r1 / n2;
    y1_.resize(n1);
    frame_.resize(n1);
    for (int i = 0; i < n1; ++i) {
      y1_[i] = i * dy1_;
      frame_[i] = chart_->curve().frame(y1_[i]);
    }
    y2_.resize(n2);
    for (int j = 0; j < n2; ++j) y2_[j] = -r1 + (j + 0.5) * dy2_;

    const std::size_t count = static_cast<std::size_t>(n1) * n2;
    grid_.position.resize(count);
    grid_.weight.resize(count);
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) {
        const int n = grid_.index(i, j);
        grid_.position[n] = frame_[i].point + y2_[j] * frame_[i].nu;
        grid_.weight[n] = dy1_ * dy2_ * std::abs(1.0 - y2_[j] * frame_[i].kappa);
      }
    }
    grid_.build_stencils([this](int n) {
      const int i = n % grid_.n1;
      const int j = n / grid_.n1;
      const Frame& f = frame_[i];
      return std::pair<Vec2, Vec2>{f.tau * (dy1_ * (1.0 - y2_[j] * f.kappa)), f.nu * dy2_};
    });
  }

  const StructuredGrid& grid() const { return grid_; }
  const TangentNormalChart& chart() const { return *chart_; }
  std::shared_ptr<const TangentNormalChart> chart_ptr() const { return chart_; }

  int n1() const { return grid_.n1; }
  int n2() const { return grid_.n2; }
  double dy1() const { return dy1_; }
  double dy2() const { return dy2_; }
  double y1(int i) const { return y1_[i]; }
  double y2(int j) const { return y2_[j]; }
  const Frame& frame(int i) const { return frame_[i]; }
  int index(int i, int j) const { return grid_.index(i, j); }
  int column(int node) const { return node % grid_.n1; }
  int row(int node) const { return node / grid_.n1; }
  int mirror_row(int j) const { return grid_.n2 - 1 - j; }
  int mirror(int node) const { return index(column(node), mirror_row(row(node))); }
  bool exterior(int node) const { return y2_[row(node)] < 0.0; }
  double jacobian(int node) const {
    return 1.0 - y2_[row(node)] * frame_[column(node)].kappa;
  }

 private:
  std::shared_ptr<const TangentNormalChart> chart_;
  StructuredGrid grid_;
  double dy1_ = 0.0;
  double dy2_ = 0.0;
  std::vector<double> y1_;
  std::vector<double> y2_;
  std::vector<Frame> frame_;
};

/// Uniform Cartesian grid on a square [-R, R]^2 (node-centred, n x n).
/// Used for rescaled windows.
class WindowMesh {
 public:
  WindowMesh(double half_width, int n) {
    if (n < 4) throw ConstructionError("window grid needs n >= 4");
    half_width_ = half_width;
    grid_.n1 = n;
    grid_.n2 = n;
    grid_.periodic1 = false;
    h_ = 2.0 * half_width / (n - 1);
    grid_.position.resize(static_cast<std::size_t>(n) * n);
    grid_.weight.resize(grid_.position.size());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int k = grid_.index(i, j);
        grid_.position[k] = Vec2(-half_width + i * h_, -half_width + j * h_);
        const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        grid_.weight[k] = wi * wj * h_ * h_;
      }
    }
    grid_.build_stencils([this](int) {
      return std::pair<Vec2, Vec2>{Vec2(h_, 0.0), Vec2(0.0, h_)};
    });
  }

  const StructuredGrid& grid() const { return grid_; }
  double spacing() const { return h_; }
  double half_width() const { return half_width_; }

 private:
  StructuredGrid grid_;
  double half_width_ = 0.0;
  double h_ = 0.0;
};

using GridField = Field<InteriorMesh>;

/// Per-node Cartesian gradient; row i is the gradient of component i.
template <class MeshT>
std::vector<Mat2> discrete_gradient(const Field<MeshT>& field) {
  const StructuredGrid& g = field.grid();
  std::vector<Mat2> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Stencil& st = g.stencil[n];
    Mat2 acc = Mat2::Zero();
    for (int k = 0; k < 9; ++k) acc += field.values[st.index[k]] * st.coeff[k].transpose();
    out[n] = acc;
  }
  return out;
}

/// Gradient of a scalar node function on a grid.
inline std::vector<Vec2> scalar_gradient(const StructuredGrid& g, std::span<const double> f) {
  if (f.size() != g.size()) throw Error("scalar field length does not match the mesh");
  std::vector<Vec2> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Stencil& st = g.stencil[n];
    Vec2 acc = Vec2::Zero();
    for (int k = 0; k < 9; ++k) acc += f[st.index[k]] * st.coeff[k];
    out[n] = acc;
  }
  return out;
}

template <class MeshT>
std::vector<double> discrete_divergence(const Field<MeshT>& field) {
  const auto grad = discrete_gradient(field);
  std::vector<double> out(grad.size());
  for (std::size_t n = 0; n < grad.size(); ++n) out[n] = grad[n].trace();
  return out;
}

/// Weighted nodal quadrature of a scalar node function.
inline double integrate(std::span<const double> f, const StructuredGrid& g) {
  if (f.size() != g.size()) throw Error("integrand length does not match the mesh");
  double acc = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) acc += g.weight[n] * f[n];
  return acc;
}

template <class MeshT>
double integrate(std::span<const double> f, const MeshT& mesh) {
  return integrate(f, mesh.grid());
}

/// Sample a Cartesian vector function at the nodes of a mesh.
template <class MeshT, class Fn>
Field<MeshT> sample_field(std::shared_ptr<const MeshT> mesh, Fn&& fn) {
  Field<MeshT> f(mesh);
  const auto& pos = mesh->grid().position;
  for (std::size_t n = 0; n < pos.size(); ++n) f.values[n] = fn(pos[n]);
  return f;
}

/// Sample a Cartesian scalar function at the nodes of a grid.
template <class Fn>
std::vector<double> sample_scalar(const StructuredGrid& g, Fn&& fn) {
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = fn(g.position[n]);
  return out;
}

}  // namespace gldiv
