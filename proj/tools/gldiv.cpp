// gldiv: command-line front end.
//
//   gldiv minimize     [--config F] [--eps E] [--k K] [--n-theta N] [--n-s N] [--init vortex|random] [--seed S]
//   gldiv sweep        [--config F] [--eps E1,E2,...] [--k K] [--n-theta N] [--jobs J] [--warm-start]
//   gldiv extend-check [--config F] [--eps E] [--k K]
//   gldiv polya        --k K --beta B --gamma G --radius R [--alpha A (k = -2 only)]
//   gldiv ansatz       [--config F] [--eps E] [--n-theta N] [--n-s N]
//   gldiv mesh-info    [--config F] [--n-theta N] [--n-s N]
//
// Every command writes its artifacts plus manifest.json into --out (default
// from the config, "out"). Exit codes: 0 success, 2 bad input, 3 numerical
// failure; failures print a JSON error record on stderr and to error.json.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gldiv/config.hpp"
#include "gldiv/diagnostics.hpp"
#include "gldiv/energy.hpp"
#include "gldiv/extension.hpp"
#include "gldiv/io.hpp"
#include "gldiv/minimizer.hpp"
#include "gldiv/validators.hpp"

namespace {

using namespace gldiv;

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<double> eps, k;
  std::vector<double> eps_list;
  std::optional<int> n_theta, n_s, jobs, max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> init;
  bool warm_start = false;
};

/// Failure carrying the exit code; thrown after the partial record is flushed.
struct ExitError : Error {
  int code;
  ExitError(int c, const std::string& what) : Error(what), code(c) {}
};

// Resolve the configuration: file (or the disk default), then flag
// overrides, validated together so errors name a key path.
RunConfig resolve(const Overrides& o) {
  json doc = json{{"domain", {{"shape", "disk"}}}};
  if (!o.config_path.empty()) {
    const std::string text = read_file(o.config_path);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      doc = json::object();
    } else {
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON in '") + o.config_path + "': " + e.what());
      }
    }
    if (!doc.is_object()) throw ConfigError("/", "expected an object");
  }
  if (o.eps) doc["eps"] = *o.eps;
  if (!o.eps_list.empty()) doc["eps_list"] = o.eps_list;
  if (o.k) doc["k"] = *o.k;
  if (o.n_theta) doc["mesh"]["n_theta"] = *o.n_theta;
  if (o.n_s) doc["mesh"]["n_s"] = *o.n_s;
  if (o.jobs) doc["sweep"]["jobs"] = *o.jobs;
  if (o.warm_start) doc["sweep"]["warm_start"] = true;
  if (o.max_iter) doc["minimizer"]["max_iterations"] = *o.max_iter;
  if (o.seed) doc["minimizer"]["seed"] = *o.seed;
  if (o.init) doc["minimizer"]["init"] = *o.init;
  if (!o.out.empty()) doc["output_dir"] = o.out;
  if (const char* env = std::getenv("GLDIV_JOBS")) {
    try {
      doc["sweep"]["jobs"] = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("GLDIV_JOBS", "expected an integer, got '" + std::string(env) + "'");
    }
  }
  return parse_config(doc);
}

std::shared_ptr<const BoundaryCurve> make_curve(const RunConfig& c) {
  return std::make_shared<const BoundaryCurve>(c.domain.profile());
}

GridField initial_field(const RunConfig& c, std::shared_ptr<const InteriorMesh> mesh) {
  if (c.init == "random") return random_init(mesh, c.minimizer.seed);
  return vortex_ansatz(mesh, c.centre, c.eps);
}

json mesh_json(const InteriorMesh& m) {
  return {{"n_theta", m.n_theta()},
          {"n_s", m.n_s()},
          {"h", m.min_spacing()},
          {"area", m.grid().total_weight()},
          {"perimeter", m.curve().perimeter()},
          {"max_curvature", m.curve().max_abs_curvature()}};
}

int cmd_minimize(const RunConfig& c, ArtifactWriter& out) {
  const EnergyParams params{c.eps, c.k};
  auto mesh = std::make_shared<const InteriorMesh>(make_curve(c), c.n_theta, c.n_s);
  const MinimizeResult res = minimize(initial_field(c, mesh), params, c.minimizer);
  out.write("field.csv", field_csv(res.field));
  out.write("history.csv", history_csv(res.report));
  out.write_json("energy.json", to_json(energy(res.field, params)));
  out.write_json("report.json", to_json(res.report));
  out.write_json("mesh.json", mesh_json(*mesh));
  std::cout << "minimize: " << res.report.message << " after " << res.report.iterations
            << " iterations, energy " << format_double(res.report.history.back()) << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& c, ArtifactWriter& out) {
  const SweepOptions opts = c.sweep_options();
  // Rows are appended (and flushed) as records arrive, in eps order.
  std::string csv = std::string(sweep_csv_header()) + '\n';
  out.write("sweep.csv", csv);
  json records = json::array();
  bool failed = false;
  const auto recs = sweep(make_curve(c), c.eps_list, opts, [&](const SweepRecord& r) {
    csv += sweep_csv_row(r) + '\n';
    out.write("sweep.csv", csv);
    records.push_back(to_json(r));
    if (r.n_theta == 0) failed = true;
    std::cerr << "sweep: eps " << format_double(r.eps) << " " << r.status << "\n";
  });
  json doc{{"records", records}};
  if (!failed) doc["summary"] = to_json(summarize(recs));
  out.write_json("sweep.json", doc);
  if (failed) throw ExitError(3, "one or more sweep entries failed; see sweep.json");
  return 0;
}

int cmd_extend_check(const RunConfig& c, ArtifactWriter& out) {
  const EnergyParams params{c.eps, c.k};
  auto curve = make_curve(c);
  auto chart = std::make_shared<const TangentNormalChart>(curve);
  auto mesh = std::make_shared<const InteriorMesh>(curve, c.n_theta, c.n_s);
  const MinimizeResult res = minimize(initial_field(c, mesh), params, c.minimizer);
  auto collar = std::make_shared<const CollarMesh>(chart, c.collar_n1, c.collar_n2);
  const CollarField U = reflect_extend(res.field, collar);
  out.write("extension.csv", extension_csv(U));

  // Ellipticity of the glued system at random collar points and rank-one
  // directions, against min{1/(1 + y2 kappa)^2, 1}.
  std::mt19937_64 rng(c.minimizer.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), angle(0.0, kTwoPi);
  double min_ratio = std::numeric_limits<double>::infinity();
  const double L = curve->perimeter();
  for (int s = 0; s < c.lh_samples; ++s) {
    const double y1 = 0.5 * (unit(rng) + 1.0) * L;
    const double y2 = unit(rng) * chart->r1();
    const double a = angle(rng), b = angle(rng);
    const Vec2 xi(std::cos(a), std::sin(a)), eta(std::cos(b), std::sin(b));
    const double yk = y2 * curve->frame(y1).kappa;
    min_ratio = std::min(min_ratio, legendre_hadamard_form(yk, c.k, xi, eta) /
                                        legendre_hadamard_bound(yk));
  }
  out.write_json("ellipticity.json", {{"samples", c.lh_samples}, {"min_ratio", min_ratio}});

  double interior_max = 0.0, growth_max = 0.0;
  for (const ChartBump& b : standard_bumps(*chart, true)) {
    interior_max = std::max(interior_max,
                            std::abs(weak_glued_residual(U, sample_bump(collar, b), params).remainder));
  }
  for (const ChartBump& b : standard_bumps(*chart, false)) {
    growth_max = std::max(growth_max, growth_ratio(U, sample_bump(collar, b), params));
  }
  const TraceJumps tj = trace_jumps(U);
  out.write_json("gluing.json", {{"interior_remainder_max", interior_max},
                                 {"growth_ratio_max", growth_max},
                                 {"trace_jump", tj.value},
                                 {"normal_derivative_jump", tj.normal_derivative},
                                 {"minimizer", to_json(res.report)}});
  std::cout << "extend-check: min LH ratio " << format_double(min_ratio) << ", growth ratio "
            << format_double(growth_max) << "\n";
  return 0;
}

int cmd_ansatz(const RunConfig& c, ArtifactWriter& out) {
  const EnergyParams params{c.eps, c.k};
  auto mesh = std::make_shared<const InteriorMesh>(make_curve(c), c.n_theta, c.n_s);
  const EnergyBreakdown closed = ansatz_energy_closed_form(c.eps, c.k);
  const EnergyBreakdown measured = energy(vortex_ansatz(mesh, c.centre, c.eps), params);
  out.write_json("ansatz.json", {{"eps", c.eps},
                                 {"closed_form", to_json(closed)},
                                 {"measured", to_json(measured)},
                                 {"relative_error", (measured.total - closed.total) / closed.total}});
  std::cout << "ansatz: measured " << format_double(measured.total) << ", closed form "
            << format_double(closed.total) << "\n";
  return 0;
}

int cmd_mesh_info(const RunConfig& c, ArtifactWriter& out) {
  const InteriorMesh mesh(make_curve(c), c.n_theta, c.n_s);
  const json j = mesh_json(mesh);
  out.write_json("mesh.json", j);
  std::cout << j.dump() << "\n";
  return 0;
}

void report_error(const std::filesystem::path& dir, int code, const std::string& kind,
                  const std::string& path, const std::string& message) {
  const json rec{{"error", {{"exit_code", code}, {"kind", kind}, {"path", path}, {"message", message}}}};
  std::cerr << rec.dump() << "\n";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!ec) {
    try {
      write_file(dir / "error.json", rec.dump(2) + '\n');
    } catch (const std::exception&) {
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau minimization with divergence penalty under tangential anchoring"};
  app.require_subcommand(1);
  Overrides o;
  double polya_k = 1.0, polya_beta = 1.0, polya_gamma = 1.0, polya_radius = 0.4;
  std::optional<double> polya_alpha;
  std::string polya_out = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default: config output_dir, \"out\")");
  };
  auto add_mesh = [&](CLI::App* sub) {
    sub->add_option("--n-theta", o.n_theta, "angular nodes (default 128)");
    sub->add_option("--n-s", o.n_s, "radial nodes (default 64)");
  };
  auto add_physics = [&](CLI::App* sub) {
    sub->add_option("--eps", o.eps, "coherence length (default 0.1)");
    sub->add_option("--k", o.k, "divergence modulus (default 1)");
  };
  auto add_minimizer = [&](CLI::App* sub) {
    sub->add_option("--init", o.init, "initial field: vortex | random (default vortex)");
    sub->add_option("--seed", o.seed, "random seed (default 0)");
    sub->add_option("--max-iter", o.max_iter, "iteration cap (default 20000)");
  };

  auto* c_min = app.add_subcommand("minimize", "minimize the energy from an initial field");
  add_common(c_min);
  add_physics(c_min);
  add_mesh(c_min);
  add_minimizer(c_min);

  auto* c_sweep = app.add_subcommand("sweep", "eps sweep with scaling diagnostics");
  add_common(c_sweep);
  c_sweep->add_option("--eps", o.eps_list, "decreasing eps values (default 0.1,0.05,0.025,0.0125)")
      ->delimiter(',');
  c_sweep->add_option("--k", o.k, "divergence modulus (default 1)");
  c_sweep->add_option("--n-theta", o.n_theta, "angular nodes (default 128)");
  c_sweep->add_option("--jobs", o.jobs, "parallel jobs (default 1; GLDIV_JOBS overrides)");
  c_sweep->add_option("--max-iter", o.max_iter, "iteration cap per entry (default 20000)");
  c_sweep->add_flag("--warm-start", o.warm_start, "start each entry from the previous minimizer");

  auto* c_ext = app.add_subcommand("extend-check", "reflection extension and gluing audit");
  add_common(c_ext);
  add_physics(c_ext);
  add_mesh(c_ext);
  add_minimizer(c_ext);

  auto* c_polya = app.add_subcommand("polya", "interior-maximum check of the Polya field");
  c_polya->add_option("--k", polya_k, "modulus (any value; -2 needs --alpha)");
  c_polya->add_option("--beta", polya_beta, "beta");
  c_polya->add_option("--gamma", polya_gamma, "gamma (must be 0 when k = -2)");
  c_polya->add_option("--alpha", polya_alpha, "alpha (only for k = -2)");
  c_polya->add_option("--radius", polya_radius, "disk radius");
  c_polya->add_option("--out", polya_out, "output directory");

  auto* c_ans = app.add_subcommand("ansatz", "vortex-ansatz energy against its closed form");
  add_common(c_ans);
  add_physics(c_ans);
  add_mesh(c_ans);

  auto* c_mesh = app.add_subcommand("mesh-info", "mesh size, spacing and quadrature area");
  add_common(c_mesh);
  add_mesh(c_mesh);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    report_error("out", 2, "usage", "", e.what());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  std::filesystem::path dir = name == "polya" ? polya_out : (o.out.empty() ? "out" : o.out);
  std::optional<ArtifactWriter> writer;
  json resolved;
  try {
    if (name == "polya") {
      PolyaParams p;
      if (polya_k == -2.0) {
        if (!polya_alpha) throw ConfigError("--alpha", "required when k = -2");
        if (polya_gamma != 0.0) throw ConfigError("--gamma", "must be 0 when k = -2");
        p = PolyaParams::degenerate(*polya_alpha, polya_beta);
      } else {
        if (polya_alpha) throw ConfigError("--alpha", "alpha is derived unless k = -2");
        p = PolyaParams::make(polya_k, polya_beta, polya_gamma);
      }
      if (!(polya_radius > 0.0)) throw ConfigError("--radius", "must be positive");
      resolved = {{"k", p.k}, {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
                  {"radius", polya_radius}};
      writer.emplace(dir);
      p.validate();
      const json rep = to_json(interior_max_check(p, polya_radius));
      writer->write_json("polya.json", rep);
      std::cout << rep.dump() << "\n";
    } else {
      const RunConfig cfg = resolve(o);
      resolved = to_json(cfg);
      dir = cfg.output_dir;
      writer.emplace(dir);
      if (name == "minimize") cmd_minimize(cfg, *writer);
      else if (name == "sweep") cmd_sweep(cfg, *writer);
      else if (name == "extend-check") cmd_extend_check(cfg, *writer);
      else if (name == "ansatz") cmd_ansatz(cfg, *writer);
      else cmd_mesh_info(cfg, *writer);
    }
    writer->manifest(name, resolved, "ok");
    return 0;
  } catch (const ConfigError& e) {
    report_error(dir, 2, "config", e.path(), e.what());
    return 2;
  } catch (const ConstructionError& e) {
    report_error(dir, 2, "input", "", e.what());
    return 2;
  } catch (const ExitError& e) {
    if (writer) writer->manifest(name, resolved, "failed");
    report_error(dir, e.code, "numerical", "", e.what());
    return e.code;
  } catch (const std::exception& e) {
    if (writer) writer->manifest(name, resolved, "failed");
    report_error(dir, 3, "numerical", "", e.what());
    return 3;
  }
}
