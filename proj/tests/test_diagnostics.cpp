#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gldiv/diagnostics.hpp"
#include "gldiv/io.hpp"
#include "support.hpp"

using namespace gldiv;
using gldiv::testing::disk;
using gldiv::testing::mesh;
constexpr double pi = std::numbers::pi;

TEST(SupNorm, ElementaryFields) {
  const auto m = mesh(disk(), 64, 32);
  EXPECT_DOUBLE_EQ(sup_norm(sample_field(m, [](const Vec2&) { return Vec2(1, 0); })), 1.0);
  EXPECT_DOUBLE_EQ(sup_norm(GridField(m)), 0.0);
  EXPECT_NEAR(sup_norm(vortex_ansatz(m, Vec2::Zero(), 0.1)), 1.0, 1e-14);
}

TEST(LipschitzProxy, ElementaryFieldsAndAnsatzScaling) {
  const auto m = mesh(disk(), 64, 32);
  EXPECT_NEAR(lipschitz_proxy(sample_field(m, [](const Vec2& x) { return x; })), std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(lipschitz_proxy(sample_field(m, [](const Vec2&) { return Vec2(2, 3); })), 0.0, 1e-10);
  // eps * max|grad U| stays put when the core is resolved (h <= eps / 4).
  const double a = 0.1 * lipschitz_proxy(vortex_ansatz(mesh(disk(), 128, 64), Vec2::Zero(), 0.1));
  const double b = 0.05 * lipschitz_proxy(vortex_ansatz(mesh(disk(), 128, 128), Vec2::Zero(), 0.05));
  EXPECT_LT(std::abs(a - b) / std::min(a, b), 0.25);
}

TEST(WindingNumber, ElementaryFields) {
  auto vortex = [](const Vec2& x) { return Vec2(perp(x) / x.norm()); };
  auto constant = [](const Vec2&) { return Vec2(1, 0); };
  auto double_wind = [](const Vec2& x) {
    const double t = std::atan2(x.y(), x.x());
    return Vec2(std::cos(2 * t), std::sin(2 * t));
  };
  EXPECT_EQ(winding_number(vortex, circle_contour(Vec2::Zero(), 0.5, 64)), 1);
  EXPECT_EQ(winding_number(constant, circle_contour(Vec2::Zero(), 0.5, 64)), 0);
  EXPECT_EQ(winding_number(double_wind, circle_contour(Vec2::Zero(), 1.0, 64)), 2);
  auto weak = [](const Vec2& x) { return Vec2(0.3 * x); };
  EXPECT_THROW(winding_number(weak, circle_contour(Vec2::Zero(), 0.5, 64)), DefectOnContourError);
}

TEST(WindingNumber, OffsetContourOfMeshField) {
  const auto c = disk();
  const TangentNormalChart chart(c);
  const auto m = mesh(c, 64, 32);
  EXPECT_EQ(winding_number(vortex_ansatz(m, Vec2(0.1, 0.0), 0.1),
                           offset_contour(chart, 0.5 * chart.r1(), 256)),
            1);
  // A contour through the core is rejected.
  EXPECT_THROW(winding_number(vortex_ansatz(m, Vec2(0.5, 0.0), 0.1),
                              circle_contour(Vec2::Zero(), 0.5, 256)),
               DefectOnContourError);
}

TEST(RescaleWindow, ConstantAndChainRule) {
  const WindowField w = rescale_window([](const Vec2&) { return Vec2(0.4, -0.2); }, Vec2(0.1, 0.2), 0.05, 1.0, 21);
  for (const Vec2& v : w.values) EXPECT_EQ(v, Vec2(0.4, -0.2));

  auto U = [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); };
  const Vec2 x0(0.3, -0.1);
  const double eps = 0.05;
  const WindowField hat = rescale_window(U, x0, eps, 1.0, 21);
  const auto g = discrete_gradient(hat);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec2 x = x0 + eps * hat.grid().position[n];
    Mat2 dU;
    dU << 2 * x.x(), 0.0, x.y(), x.x();
    EXPECT_LT((g[n] - eps * dU).norm(), 1e-12);
  }
}

TEST(RescaleWindow, LeavingTheCollarIsAnError) {
  const auto c = disk();
  const auto m = mesh(c, 64, 32);
  const auto u = vortex_ansatz(m, Vec2::Zero(), 0.1);
  const ExtendedField U(u, std::make_shared<const TangentNormalChart>(c));
  EXPECT_NO_THROW(rescale_window(U, Vec2(1.0, 0.0), 0.1, 1.0, 11));
  EXPECT_THROW(rescale_window(U, Vec2(1.0, 0.0), 0.5, 1.0, 11), OutOfCollarError);
}

TEST(L4Norm, ElementaryFieldsAndPotentialInequality) {
  const auto m = mesh(disk(), 64, 32);
  EXPECT_NEAR(l4_norm(sample_field(m, [](const Vec2&) { return Vec2(1, 0); })), std::pow(pi, 0.25), 1e-10);
  EXPECT_EQ(l4_norm(GridField(m)), 0.0);
  const double eps = 0.1;
  const GridField a = vortex_ansatz(m, Vec2::Zero(), eps);
  const double pot = energy(a, {eps, 1.0}).potential;
  EXPECT_LE(l4_norm(a), std::pow(2 * pot * 4 * eps * eps + 2 * pi, 0.25));

  const WindowField one = rescale_window([](const Vec2&) { return Vec2(1, 0); }, Vec2::Zero(), 1.0, 1.0, 81);
  EXPECT_NEAR(l4_norm_ball(one, 1.0), std::pow(pi, 0.25), 1e-3);
}

TEST(Fits, SlopeAndSpread) {
  EXPECT_NEAR(ols_slope({1, 2, 3, 4}, {3, 5, 7, 9}), 2.0, 1e-14);
  EXPECT_THROW(ols_slope({1}, {1}), Error);
  EXPECT_NEAR(relative_spread({2.0, 2.5, 3.0}), 0.5, 1e-15);
}

TEST(MeshPolicy, ResolvesEps) {
  const MeshPolicy p;
  const BoundaryCurve c(unit_disk());
  EXPECT_EQ(p.radial_for(0.1, c), 64);
  EXPECT_EQ(p.radial_for(0.0125, c), 321);
}

namespace {

SweepOptions small_options(int jobs) {
  SweepOptions o;
  o.mesh = MeshPolicy{32, 16, 2.0};
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST(Sweep, OrderPreservingAndJobIndependent) {
  const std::vector<double> eps{0.15, 0.12, 0.1};
  const auto a = sweep(disk(), eps, small_options(1));
  const auto b = sweep(disk(), eps, small_options(3));
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].eps, eps[i]);
    EXPECT_EQ(a[i].status, "ok");
    EXPECT_EQ(a[i].degree, 1);
    EXPECT_NEAR(a[i].excess, a[i].energy.total - pi * std::log(1 / eps[i]), 1e-12);
    EXPECT_NEAR(a[i].combo, a[i].energy.divergence + 0.5 * a[i].energy.potential, 1e-15);
  }
  EXPECT_EQ(sweep_csv(a), sweep_csv(b));
}

TEST(Sweep, IncrementalEmissionAndWarmStart) {
  std::vector<double> seen;
  SweepOptions o = small_options(1);
  o.warm_start = true;
  const auto r = sweep(disk(), {0.15, 0.12}, o, [&](const SweepRecord& rec) { seen.push_back(rec.eps); });
  EXPECT_EQ(seen, (std::vector<double>{0.15, 0.12}));
  EXPECT_TRUE(r[1].converged);
}

TEST(Sweep, WindowsLeavingTheCollarFailTheRecord) {
  // eps sqrt(2) > r1 = 0.25: the boundary window reaches past the collar.
  const auto r = sweep(disk(), {0.3}, small_options(1));
  EXPECT_NE(r[0].status.find("collar"), std::string::npos);
}

TEST(Sweep, FailuresAreFlaggedAndTheSweepContinues) {
  SweepOptions o = small_options(1);
  o.vortex_centre = Vec2(3.0, 0.0);  // outside the domain
  const auto r = sweep(disk(), {0.3, 0.2}, o);
  ASSERT_EQ(r.size(), 2u);
  for (const auto& rec : r) {
    EXPECT_NE(rec.status, "ok");
    EXPECT_NE(sweep_csv_row(rec).find("nan"), std::string::npos);
  }
  EXPECT_THROW(sweep(disk(), {0.1, 0.2}, o), ConstructionError);
  EXPECT_THROW(sweep(disk(), {0.1, -0.2}, o), ConstructionError);
}

TEST(SweepCsv, HeaderAndDeterministicFormatting) {
  EXPECT_STREQ(sweep_csv_header(), "eps,sup_u,eps_lip,e_dir,e_div,e_pot,e_total,excess,combo,degree,iters");
  SweepRecord r;
  r.eps = 0.1;
  r.n_theta = 8;
  r.degree = 1;
  r.iterations = 12;
  EXPECT_EQ(sweep_csv_row(r), "0.10000000000000001,0,0,0,0,0,0,0,0,1,12");
}

TEST(Summary, FlatnessStatistics) {
  std::vector<SweepRecord> recs(4);
  const double eps[] = {0.1, 0.05, 0.025, 0.0125};
  for (int i = 0; i < 4; ++i) {
    recs[i].eps = eps[i];
    recs[i].sup_u = 1.0;
    recs[i].eps_lip = 0.8;
    recs[i].energy.total = pi * std::log(1 / eps[i]) + 1.2;
    recs[i].combo = 0.8;
    recs[i].degree = 1;
    recs[i].l4_core = 0.5;
    recs[i].l4_boundary = 1.3;
  }
  const SweepSummary s = summarize(recs);
  EXPECT_NEAR(s.energy_slope, pi, 1e-12);
  EXPECT_EQ(s.sup_spread, 0.0);
  EXPECT_TRUE(s.degrees_one);
  EXPECT_NEAR(s.l4_ratio, 2.6, 1e-12);
  recs.pop_back();
  EXPECT_TRUE(std::isnan(summarize(recs).energy_slope));
}
