// Acceptance run: one PASS/FAIL line per criterion, tolerances as specified.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <sys/wait.h>

#include "gldiv/config.hpp"
#include "gldiv/diagnostics.hpp"
#include "gldiv/extension.hpp"
#include "gldiv/io.hpp"
#include "gldiv/minimizer.hpp"
#include "gldiv/validators.hpp"

using namespace gldiv;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_s <= 0.0 || dt < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d (%s): %s; runtime %.2f s%s\n", ok ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), dt, in_time ? "" : " (over budget)");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const BoundaryCurve> disk() { return std::make_shared<const BoundaryCurve>(unit_disk()); }

std::shared_ptr<const BoundaryCurve> three_lobe() {
  return std::make_shared<const BoundaryCurve>(FourierRadius{1.0, {0.0, 0.15}, {}});
}

// ---- 1, 2: Polya field ---------------------------------------------------

Outcome polya_exactness() {
  const PolyaParams p = PolyaParams::make(1.0, 1.0, 1.0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> pts(1000);
  for (Vec2& x : pts) x = Vec2(u(rng), u(rng));
  const double analytic = polya_residual(p, pts);
  const auto m = std::make_shared<const InteriorMesh>(disk(), 64, 32);
  const double discrete = polya_discrete_residual(p, m);
  return {analytic < 1e-12 && discrete < 1e-10,
          "analytic " + fmt("%.3e", analytic) + " < 1e-12, discrete " + fmt("%.3e", discrete) +
              " < 1e-10"};
}

Outcome polya_interior_max() {
  const PolyaMaxReport r = interior_max_check(PolyaParams::make(1.0, 1.0, 1.0), 0.4);
  // On |x| = r: |u|^2 = (r^2/6 - 1)^2 + x^2 y^2, largest at x^2 = y^2 = r^2/2.
  const double oracle = std::sqrt(std::pow(1.0 - 0.16 / 6.0, 2) + std::pow(0.08, 2));
  const bool ok = r.argmax.norm() == 0.0 && std::abs(r.max - 1.0) < 1e-12 && r.boundary_max < 0.98 &&
                  std::abs(r.boundary_max - oracle) < 1e-9 && r.interior;
  return {ok, "argmax (" + fmt("%.3g", r.argmax.x()) + ", " + fmt("%.3g", r.argmax.y()) + "), |u| " +
                  fmt("%.15g", r.max) + ", boundary max " + fmt("%.10f", r.boundary_max) +
                  " < 0.98 (oracle " + fmt("%.10f", oracle) + ")"};
}

// ---- 3, 4: energy ----------------------------------------------------------

Outcome ansatz_law() {
  const auto m = std::make_shared<const InteriorMesh>(disk(), 256, 128);
  bool ok = true;
  std::string d;
  for (double eps : {0.1, 0.05}) {
    const EnergyBreakdown e = energy(vortex_ansatz(m, Vec2::Zero(), eps), {eps, 1.0});
    const double oracle = pi * std::log(1.0 / eps) + 13.0 * pi / 12.0;
    const double rel = (e.total - oracle) / oracle;
    const double div_frac = e.divergence / e.total;
    ok = ok && std::abs(rel) < 0.01 && div_frac < 1e-6;
    d += "eps " + fmt("%g", eps) + ": rel err " + fmt("%+.4f", rel) + ", div/total " +
         fmt("%.2e", div_frac) + "; ";
  }
  return {ok, d + "limits 1% and 1e-6"};
}

Outcome gradient_gate() {
  const auto m = std::make_shared<const InteriorMesh>(disk(), 32, 16);
  const EnergyParams p{0.1, 1.0};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_field = [&] {
    GridField f(m);
    for (Vec2& v : f.values) v = Vec2(u(rng), u(rng));
    return project_tangential(f);
  };
  GridField base = vortex_ansatz(m, Vec2(0.1, -0.05), p.epsilon);
  const GridField noise = random_field();
  for (std::size_t n = 0; n < base.size(); ++n) base.values[n] += 0.1 * noise.values[n];
  const GridField g = energy_gradient(base, p);
  double worst = 0.0;
  for (int r = 0; r < 20; ++r) {
    const GridField d = random_field();
    const double t = 1e-5;
    GridField a = base, b = base;
    double analytic = 0.0;
    for (std::size_t n = 0; n < base.size(); ++n) {
      a.values[n] += t * d.values[n];
      b.values[n] -= t * d.values[n];
      analytic += g.values[n].dot(d.values[n]);
    }
    const double fd = (energy(a, p).total - energy(b, p).total) / (2.0 * t);
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  }
  return {worst < 1e-6, "max rel err " + fmt("%.3e", worst) + " < 1e-6 over 20 directions"};
}

// ---- 5, 7: sweep -------------------------------------------------------------

std::vector<SweepRecord> sweep_records;

Outcome scaling_sweep() {
  SweepOptions opts;
  opts.k = 1.0;
  opts.jobs = 4;
  sweep_records = sweep(disk(), {0.1, 0.05, 0.025, 0.0125}, opts);
  for (const SweepRecord& r : sweep_records) {
    if (r.status != "ok") return {false, "eps " + fmt("%g", r.eps) + ": " + r.status};
  }
  const SweepSummary s = summarize(sweep_records);
  const bool a = s.sup_spread < 0.10;
  const bool b = s.lip_spread < 0.25;
  const bool c = std::abs(s.energy_slope - pi) <= 0.05 * pi;
  const bool d = s.combo_ratio < 3.0;
  const bool e = s.degrees_one;
  std::string degs;
  for (const SweepRecord& r : sweep_records) degs += std::to_string(r.degree);
  return {a && b && c && d && e,
          std::string("(a) sup spread ") + fmt("%.4f", s.sup_spread) + " < 0.10 " + (a ? "ok" : "FAIL") +
              ", (b) eps*lip spread " + fmt("%.4f", s.lip_spread) + " < 0.25 " + (b ? "ok" : "FAIL") +
              ", (c) slope " + fmt("%.5f", s.energy_slope) + " in pi +- 5% " + (c ? "ok" : "FAIL") +
              ", (d) combo max/min " + fmt("%.4f", s.combo_ratio) + " < 3 " + (d ? "ok" : "FAIL") +
              ", (e) degrees " + degs + (e ? " ok" : " FAIL")};
}

Outcome window_audit() {
  if (sweep_records.empty()) return {false, "sweep did not run"};
  const SweepSummary s = summarize(sweep_records);
  double cmin = 1e300, cmax = 0.0, bmin = 1e300, bmax = 0.0;
  for (const SweepRecord& r : sweep_records) {
    cmin = std::min(cmin, r.l4_core);
    cmax = std::max(cmax, r.l4_core);
    bmin = std::min(bmin, r.l4_boundary);
    bmax = std::max(bmax, r.l4_boundary);
  }
  const double core_ratio = cmax / cmin, boundary_ratio = bmax / bmin;
  return {s.l4_ratio < 3.0 && core_ratio < 3.0 && boundary_ratio < 3.0,
          "L4(B1) at core " + fmt("%.4f", cmin) + ".." + fmt("%.4f", cmax) + " (ratio " +
              fmt("%.4f", core_ratio) + "), at boundary " + fmt("%.4f", bmin) + ".." + fmt("%.4f", bmax) +
              " (ratio " + fmt("%.4f", boundary_ratio) + "), pooled max/min " + fmt("%.4f", s.l4_ratio) +
              " < 3"};
}

// ---- 6: reflection and gluing -----------------------------------------------

std::shared_ptr<const TangentNormalChart> chart_of(std::shared_ptr<const BoundaryCurve> c) {
  return std::make_shared<const TangentNormalChart>(std::move(c));
}

Outcome gluing_suite() {
  std::string d;
  bool all = true;
  auto part = [&](const char* tag, bool ok, const std::string& what) {
    all = all && ok;
    d += std::string(tag) + " " + what + (ok ? " ok" : " FAIL") + "; ";
  };
  const auto c = three_lobe();
  const auto chart = chart_of(c);

  // (a) parity at mirrored collar nodes.
  {
    const auto m = std::make_shared<const InteriorMesh>(c, 128, 32);
    const CollarField U = reflect_extend(random_init(m, 11), std::make_shared<const CollarMesh>(chart, 128, 16));
    const CollarMesh& cm = U.mesh();
    double worst = 0.0;
    for (std::size_t n = 0; n < U.size(); ++n) {
      const int node = static_cast<int>(n);
      if (!cm.exterior(node)) continue;
      const Frame& f = cm.frame(cm.column(node));
      const Vec2& out = U.field.values[n];
      const Vec2& in = U.field.values[cm.mirror(node)];
      worst = std::max({worst, std::abs(out.dot(f.tau) - in.dot(f.tau)), std::abs(out.dot(f.nu) + in.dot(f.nu))});
    }
    part("(a)", worst <= 1e-15, "parity defect " + fmt("%.1e", worst));
  }
  // (b) sigma o sigma = sigma, R o R = id.
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sig = 0.0, mirror = 0.0, inv = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec2 x = chart->to_cartesian(c->perimeter() * u(rng), -chart->r1() * u(rng));
      const Vec2 s = fold_point(*chart, x);
      sig = std::max(sig, (fold_point(*chart, s) - s).norm());
      mirror = std::max(mirror, std::abs(chart->to_chart(s).y2 + chart->to_chart(x).y2));
      const Vec2 z(2 * u(rng) - 1, 2 * u(rng) - 1);
      inv = std::max(inv, (reflect_vector(*chart, x, reflect_vector(*chart, x, z)) - z).norm() / z.norm());
    }
    // "Exact" for floating-point products: within a few units of rounding.
    part("(b)", sig == 0.0 && inv <= 16 * std::numeric_limits<double>::epsilon() && mirror < 1e-10,
         "|sigma(sigma x) - sigma x| " + fmt("%.1e", sig) + ", |R R z - z|/|z| " + fmt("%.1e", inv) +
             ", mirror distance defect " + fmt("%.1e", mirror));
  }
  // (c) disk distortion at exterior distance 0.1.
  {
    const double D = distortion(*chart_of(disk()), 0.3, -0.1);
    part("(c)", std::abs(D - 11.0 / 9.0) < 1e-12, "D = " + fmt("%.15f", D) + " vs 11/9");
  }
  // (d) Legendre-Hadamard on the (convex) disk, 1e4 samples.
  {
    const auto dchart = chart_of(disk());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0), g(-1.0, 1.0);
    int violations = 0;
    double worst = 1e300;
    const double k = 1.0;
    for (int s = 0; s < 10000; ++s) {
      const double y1 = kTwoPi * u(rng);
      const double y2 = dchart->r1() * g(rng);
      const Vec2 xi(g(rng), g(rng)), eta(g(rng), g(rng));
      const double kappa = dchart->curve().frame(y1).kappa;
      const double bound = std::min(1.0 / std::pow(1.0 + std::abs(y2) * kappa, 2), 1.0) *
                           xi.squaredNorm() * eta.squaredNorm();
      const double form = legendre_hadamard_form(*dchart, y1, y2, k, xi, eta);
      if (form < bound) ++violations;
      worst = std::min(worst, form / bound);
    }
    part("(d)", violations == 0,
         std::to_string(violations) + " violations in 10^4 samples (min form/bound " + fmt("%.6f", worst) + ")");
  }
  // (e) interior-supported test functions; (f) full-collar growth constant.
  {
    const EnergyParams p{0.25, 1.0};
    std::vector<double> hs, rem, growth;
    for (int ns : {16, 32, 64, 128}) {
      const auto m = std::make_shared<const InteriorMesh>(c, 4 * ns, ns);
      const MinimizeResult r = minimize(vortex_ansatz(m, Vec2::Zero(), p.epsilon), p);
      if (!r.report.converged) throw NumericalError("minimizer did not converge at ns = " + std::to_string(ns));
      const auto collar = std::make_shared<const CollarMesh>(chart, 8 * ns, ns);
      const CollarField U = reflect_extend(r.field, collar);
      double mx = 0.0, gx = 0.0;
      for (const ChartBump& b : standard_bumps(*chart, true)) {
        mx = std::max(mx, std::abs(weak_glued_residual(U, sample_bump(collar, b), p).remainder));
      }
      for (const ChartBump& b : standard_bumps(*chart, false)) {
        gx = std::max(gx, growth_ratio(U, sample_bump(collar, b), p));
      }
      hs.push_back(std::log(1.0 / ns));
      rem.push_back(std::log(mx));
      growth.push_back(gx);
    }
    const double order = ols_slope(hs, rem);
    std::string seq;
    for (double v : rem) seq += fmt("%.2e ", std::exp(v));
    part("(e)", order >= 1.0, "remainder " + seq + "-> fitted order " + fmt("%.3f", order) + " >= 1");
    const double gmax = *std::max_element(growth.begin(), growth.end());
    const double gmin = *std::min_element(growth.begin(), growth.end());
    std::string gs;
    for (double v : growth) gs += fmt("%.5f ", v);
    part("(f)", gmax / gmin <= 1.5, "growth constants " + gs + "max/min " + fmt("%.4f", gmax / gmin) + " <= 1.5");
  }
  d.resize(d.size() - 2);
  return {all, d};
}

// ---- 8: reproducibility --------------------------------------------------------

Outcome reproducibility() {
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = fs::current_path() / ("acceptance_repro_" + std::to_string(run));
    fs::remove_all(dir);
    const std::string cmd = std::string(GLDIV_CLI_PATH) + " sweep --jobs 1 --out " + dir.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      return {false, "sweep run " + std::to_string(run) + " exited with status " + std::to_string(status)};
    }
    csv[run] = read_file(dir / "sweep.csv");
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1];
  return {same, "sweep.csv " + std::to_string(csv[0].size()) + " bytes, fnv1a64 " + fnv1a_hex(csv[0]) + " vs " +
                    fnv1a_hex(csv[1])};
}

}  // namespace

int main() {
  criterion(1, "Polya exactness", 1.0, polya_exactness);
  criterion(2, "Polya interior maximum", 5.0, polya_interior_max);
  criterion(3, "ansatz energy law", 30.0, ansatz_law);
  criterion(4, "gradient gate", 10.0, gradient_gate);
  criterion(5, "scaling sweep", 1800.0, scaling_sweep);
  criterion(6, "reflection/gluing suite", 300.0, gluing_suite);
  criterion(7, "rescaled-window audit", 0.0, window_audit);
  criterion(8, "reproducibility", 0.0, reproducibility);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
