#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gldiv/mesh.hpp"
#include "support.hpp"

using namespace gldiv;
using gldiv::testing::disk;
using gldiv::testing::fourier;
using gldiv::testing::mesh;
constexpr double pi = std::numbers::pi;

TEST(InteriorMesh, DiskWeightsSumToArea) {
  const auto m = mesh(disk(), 64, 32);
  EXPECT_NEAR(m->grid().total_weight(), pi, 1e-3);
  EXPECT_EQ(m->grid().size(), 64u * 32u);
  // Last row on the boundary.
  EXPECT_NEAR(m->grid().position[m->index(5, 31)].norm(), 1.0, 1e-14);
}

TEST(InteriorMesh, EllipseAreaConvergesAtSecondOrder) {
  const auto c = std::make_shared<const BoundaryCurve>(EllipseRadius{2.0, 1.0});
  const double e1 = std::abs(mesh(c, 32, 16)->grid().total_weight() - 2 * pi);
  const double e2 = std::abs(mesh(c, 64, 32)->grid().total_weight() - 2 * pi);
  EXPECT_LT(e2, 1e-3);
  EXPECT_TRUE(e2 < 1e-12 || e1 / e2 > 3.5) << e1 << " " << e2;
}

TEST(InteriorMesh, RejectsTooFewNodes) {
  EXPECT_THROW(mesh(disk(), 4, 32), ConstructionError);
  EXPECT_THROW(mesh(disk(), 64, 4), ConstructionError);
  EXPECT_THROW(InteriorMesh(nullptr, 64, 32), ConstructionError);
}

TEST(InteriorMesh, AngularIndexWrapsAround) {
  const auto m = mesh(disk(), 32, 8);
  const auto& st = m->grid().stencil[m->index(0, 3)];
  bool touches_last = false;
  for (int k = 0; k < 9; ++k) touches_last |= st.index[k] == m->index(31, 3);
  EXPECT_TRUE(touches_last);
}

TEST(CollarMesh, WeightsFollowChartJacobian) {
  const auto chart = std::make_shared<const TangentNormalChart>(disk(), 0.5, 0.2);
  const CollarMesh m(chart, 64, 6);  // rows at y2 = -1/6, -0.1, ... symmetric
  ASSERT_NEAR(m.y2(1), -0.1, 1e-14);
  ASSERT_NEAR(m.y2(4), 0.1, 1e-14);
  const double ratio = m.grid().weight[m.index(3, 1)] / m.grid().weight[m.index(3, 4)];
  EXPECT_NEAR(ratio, 1.1 / 0.9, 1e-12);
  EXPECT_NEAR(m.grid().total_weight(), pi * (1.2 * 1.2 - 0.8 * 0.8), 1e-10);
  for (std::size_t n = 0; n < m.grid().size(); ++n) {
    const int node = static_cast<int>(n);
    EXPECT_EQ(m.column(m.mirror(node)), m.column(node));
    EXPECT_DOUBLE_EQ(m.y2(m.row(m.mirror(node))), -m.y2(m.row(node)));
    EXPECT_GT(m.grid().weight[n], 0.0);
  }
}

TEST(CollarMesh, RejectsOddRowsAndWideCollars) {
  const auto chart = std::make_shared<const TangentNormalChart>(disk());
  EXPECT_THROW(CollarMesh(chart, 64, 7), ConstructionError);
  EXPECT_THROW(CollarMesh(chart, 4, 8), ConstructionError);
}

TEST(DiscreteGradient, ExactOnLinearAndQuadraticFields) {
  for (const auto& c : {disk(), fourier(1.0, {0.0, 0.15}, {0.05})}) {
    const auto m = mesh(c, 64, 32);
    const auto id = discrete_gradient(sample_field(m, [](const Vec2& x) { return x; }));
    const auto q = discrete_gradient(
        sample_field(m, [](const Vec2& x) { return Vec2(x.y() * x.y(), 0.0); }));
    const auto k = discrete_gradient(sample_field(m, [](const Vec2&) { return Vec2(0.3, -2.0); }));
    for (std::size_t n = 0; n < id.size(); ++n) {
      EXPECT_LT((id[n] - Mat2::Identity()).norm(), 1e-10);
      const Vec2& x = m->grid().position[n];
      EXPECT_NEAR(q[n](0, 1), 2 * x.y(), 1e-9);
      EXPECT_NEAR(q[n](0, 0), 0.0, 1e-9);
      EXPECT_LT(k[n].norm(), 1e-10);
    }
  }
}

TEST(DiscreteDivergence, ElementaryFields) {
  const auto m = mesh(disk(), 64, 32);
  for (double d : discrete_divergence(sample_field(m, [](const Vec2& x) { return x; }))) {
    EXPECT_NEAR(d, 2.0, 1e-10);
  }
  const auto sq = discrete_divergence(
      sample_field(m, [](const Vec2& x) { return Vec2(x.x() * x.x(), 0.0); }));
  for (std::size_t n = 0; n < sq.size(); ++n) {
    EXPECT_NEAR(sq[n], 2 * m->grid().position[n].x(), 1e-9);
  }
}

namespace {

// Max error over nodes with |x - x0| > r_min.
template <class Fn>
double max_error_away(const InteriorMesh& m, const std::vector<double>& v, Fn exact,
                      const Vec2& x0, double r_min) {
  double e = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const Vec2& x = m.grid().position[n];
    if ((x - x0).norm() > r_min) e = std::max(e, std::abs(v[n] - exact(x)));
  }
  return e;
}

}  // namespace

TEST(DiscreteDivergence, VortexTailIsDivergenceFreeAtSecondOrder) {
  const Vec2 x0(0.1, -0.05);
  auto field = [&](const Vec2& x) { return Vec2(perp(x - x0) / (x - x0).norm()); };
  auto err = [&](int ns) {
    const auto m = mesh(disk(), 4 * ns, ns);
    return max_error_away(*m, discrete_divergence(sample_field(m, field)),
                          [](const Vec2&) { return 0.0; }, x0, 0.4);
  };
  const double e1 = err(16), e2 = err(32);
  EXPECT_LT(e2, 1e-2);
  EXPECT_GT(e1 / e2, 3.5) << e1 << " " << e2;
}

TEST(DiscreteGradient, SmoothFieldConvergesAtSecondOrder) {
  auto f = [](const Vec2& x) { return Vec2(std::sin(2 * x.x()) * std::cos(x.y()), std::exp(x.x() * x.y())); };
  auto dfdy = [](const Vec2& x) { return -std::sin(2 * x.x()) * std::sin(x.y()); };
  auto err = [&](int ns) {
    const auto m = mesh(fourier(1.0, {0.0, 0.15}), 4 * ns, ns);
    const auto g = discrete_gradient(sample_field(m, f));
    std::vector<double> d(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) d[n] = g[n](0, 1);
    return max_error_away(*m, d, dfdy, Vec2::Zero(), 0.2);
  };
  const double e1 = err(16), e2 = err(32), e3 = err(64);
  EXPECT_GT(e1 / e2, 3.5) << e1 << " " << e2;
  EXPECT_GT(e2 / e3, 3.5) << e2 << " " << e3;
}

TEST(Integrate, DiskQuadrature) {
  const auto m = mesh(disk(), 64, 32);
  const auto& g = m->grid();
  EXPECT_NEAR(integrate(sample_scalar(g, [](const Vec2&) { return 1.0; }), *m), pi, 1e-3);
  EXPECT_NEAR(integrate(sample_scalar(g, [](const Vec2& x) { return x.x(); }), *m), 0.0, 1e-10);
  auto r2 = [&](int ns) {
    const auto mm = mesh(disk(), 4 * ns, ns);
    return std::abs(integrate(sample_scalar(mm->grid(), [](const Vec2& x) { return x.squaredNorm(); }),
                              *mm) - pi / 2);
  };
  EXPECT_LT(r2(32), 1e-3);
  EXPECT_GT(r2(16) / r2(32), 3.5);
  EXPECT_THROW(integrate(std::vector<double>(3, 1.0), *m), Error);
}

TEST(Integrate, DiscreteIntegrationByParts) {
  // Compactly supported phi: int div(u) phi + int u . grad(phi) -> 0.
  auto u = [](const Vec2& x) { return Vec2(std::cos(x.y()) + x.x() * x.x(), x.x() * x.y()); };
  auto phi = [](const Vec2& x) {
    const double r2 = x.squaredNorm() / 0.64;
    return r2 < 1.0 ? std::pow(1.0 - r2, 3) : 0.0;
  };
  auto defect = [&](int ns) {
    const auto m = mesh(disk(), 4 * ns, ns);
    const auto& g = m->grid();
    const auto div = discrete_divergence(sample_field(m, u));
    const auto ph = sample_scalar(g, phi);
    const auto gph = scalar_gradient(g, ph);
    double acc = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      acc += g.weight[n] * (div[n] * ph[n] + u(g.position[n]).dot(gph[n]));
    }
    return std::abs(acc);
  };
  // The weighted stencils reproduce the identity to rounding here.
  for (int ns : {16, 32, 64}) EXPECT_LT(defect(ns), 1e-12);
}

TEST(WindowMesh, UniformSquareGrid) {
  const WindowMesh w(1.0, 21);
  EXPECT_NEAR(w.spacing(), 0.1, 1e-14);
  EXPECT_NEAR(w.grid().total_weight(), 4.0, 1e-12);
}
