#pragma once

// Point evaluation of interior-mesh fields by 4 x 4 cubic Lagrange
// interpolation in the (theta, s) grid coordinates.

#include <array>
#include <cmath>

#include "gldiv/error.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv {

namespace detail {

// Lagrange weights of the four nodes at offsets x[k] for evaluation at t.
inline std::array<double, 4> lagrange4(const std::array<double, 4>& x, double t) {
  std::array<double, 4> w{};
  for (int a = 0; a < 4; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      num *= t - x[b];
      den *= x[a] - x[b];
    }
    w[a] = num / den;
  }
  return w;
}

}  // namespace detail

/// Evaluates a GridField anywhere in the closed domain. The angular stencil
/// wraps around; the radial stencil is shifted (one-sided) next to the
/// centre and the boundary row. Points beyond the boundary by more than
/// `slack` (relative to the local radius) are rejected.
class FieldInterpolator {
 public:
  explicit FieldInterpolator(const GridField& field, double slack = 1e-9)
      : field_(&field), slack_(slack) {}

  Vec2 operator()(const Vec2& x) const {
    const InteriorMesh& m = *field_->mesh;
    const double th = wrap_angle(std::atan2(x.y(), x.x()));
    const double rho = m.curve().radius(th).r;
    const double s = x.norm() / rho;
    if (s > 1.0 + slack_) {
      throw OutOfCollarError("interpolation point lies outside the interior mesh");
    }

    const int nt = m.n_theta();
    const double ti = th / m.dtheta();
    const int i0 = static_cast<int>(std::floor(ti));
    const auto wt = detail::lagrange4({-1.0, 0.0, 1.0, 2.0}, ti - i0);

    const int ns = m.n_s();
    const double sj = std::min(s, 1.0) / m.ds() - 0.5;
    const int j0 = std::clamp(static_cast<int>(std::floor(sj)), 1, ns - 3);
    const auto ws = detail::lagrange4({-1.0, 0.0, 1.0, 2.0}, sj - j0);

    Vec2 acc = Vec2::Zero();
    for (int b = 0; b < 4; ++b) {
      const int j = j0 - 1 + b;
      Vec2 row = Vec2::Zero();
      for (int a = 0; a < 4; ++a) {
        const int i = ((i0 - 1 + a) % nt + nt) % nt;
        row += wt[a] * field_->values[m.index(i, j)];
      }
      acc += ws[b] * row;
    }
    return acc;
  }

 private:
  const GridField* field_;
  double slack_;
};

}  // namespace gldiv
