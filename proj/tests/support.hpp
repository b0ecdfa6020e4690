#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "gldiv/geometry.hpp"
#include "gldiv/mesh.hpp"

namespace gldiv::testing {

inline std::shared_ptr<const BoundaryCurve> disk() {
  return std::make_shared<const BoundaryCurve>(unit_disk());
}

inline std::shared_ptr<const BoundaryCurve> fourier(double a0, std::vector<double> c,
                                                    std::vector<double> s = {}) {
  return std::make_shared<const BoundaryCurve>(FourierRadius{a0, std::move(c), std::move(s)});
}

inline std::shared_ptr<const InteriorMesh> mesh(std::shared_ptr<const BoundaryCurve> c, int nt,
                                                int ns) {
  return std::make_shared<const InteriorMesh>(std::move(c), nt, ns);
}

/// Uniform points in the disk of radius r.
inline std::vector<Vec2> points_in_disk(std::mt19937_64& rng, int n, double r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p(r * (2.0 * u(rng) - 1.0), r * (2.0 * u(rng) - 1.0));
    if (p.norm() < r) out.push_back(p);
  }
  return out;
}

inline Vec2 random_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.0, kTwoPi);
  const double t = a(rng);
  return {std::cos(t), std::sin(t)};
}

}  // namespace gldiv::testing
