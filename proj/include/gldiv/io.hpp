#pragma once

// Text artifacts: CSV writers, JSON mirrors, checksums and manifests.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gldiv/diagnostics.hpp"
#include "gldiv/energy.hpp"
#include "gldiv/error.hpp"
#include "gldiv/extension.hpp"
#include "gldiv/minimizer.hpp"
#include "gldiv/validators.hpp"

namespace gldiv {

using nlohmann::json;

/// Shortest round-trip decimal ("%.17g"); identical bytes for identical doubles.
inline std::string format_double(double v) { return detail::fmt_double(v); }

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

inline json to_json(const EnergyBreakdown& e) {
  return {{"dirichlet", e.dirichlet},
          {"divergence", e.divergence},
          {"potential", e.potential},
          {"total", e.total}};
}

inline json to_json(const MinimizeReport& r) {
  return {{"iterations", r.iterations},
          {"gradient_norm", r.gradient_norm},
          {"converged", r.converged},
          {"message", r.message}};
}

inline json to_json(const SweepRecord& r) {
  return {{"eps", r.eps},
          {"sup_u", r.sup_u},
          {"eps_lip", r.eps_lip},
          {"energy", to_json(r.energy)},
          {"excess", r.excess},
          {"combo", r.combo},
          {"degree", r.degree},
          {"iters", r.iterations},
          {"converged", r.converged},
          {"n_theta", r.n_theta},
          {"n_s", r.n_s},
          {"core", {r.core.x(), r.core.y()}},
          {"l4_core", r.l4_core},
          {"l4_boundary", r.l4_boundary},
          {"status", r.status}};
}

inline json to_json(const SweepSummary& s) {
  return {{"sup_spread", s.sup_spread},     {"lip_spread", s.lip_spread},
          {"energy_slope", s.energy_slope}, {"combo_ratio", s.combo_ratio},
          {"degrees_one", s.degrees_one},   {"l4_ratio", s.l4_ratio}};
}

inline json to_json(const PolyaMaxReport& r) {
  return {{"alpha", r.alpha},
          {"argmax", {r.argmax.x(), r.argmax.y()}},
          {"interior", r.interior},
          {"max", r.max},
          {"boundary_max", r.boundary_max}};
}

/// x,y,u1,u2 per node.
inline std::string field_csv(const GridField& u) {
  std::string s = "x,y,u1,u2\n";
  const auto& pos = u.grid().position;
  for (std::size_t n = 0; n < u.size(); ++n) {
    s += format_double(pos[n].x()) + ',' + format_double(pos[n].y()) + ',' +
         format_double(u.values[n].x()) + ',' + format_double(u.values[n].y()) + '\n';
  }
  return s;
}

/// iter,total per accepted iterate (iter 0 is the initial field).
inline std::string history_csv(const MinimizeReport& r) {
  std::string s = "iter,total\n";
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    s += std::to_string(i) + ',' + format_double(r.history[i]) + '\n';
  }
  return s;
}

/// y1,y2,x,y,U1,U2,D,detSigma per collar node.
inline std::string extension_csv(const CollarField& U) {
  const CollarMesh& m = U.mesh();
  std::string s = "y1,y2,x,y,U1,U2,D,detSigma\n";
  for (int j = 0; j < m.n2(); ++j) {
    for (int i = 0; i < m.n1(); ++i) {
      const int n = m.index(i, j);
      const Vec2& x = m.grid().position[n];
      const Vec2& v = U.field.values[n];
      s += format_double(m.y1(i)) + ',' + format_double(m.y2(j)) + ',' + format_double(x.x()) +
           ',' + format_double(x.y()) + ',' + format_double(v.x()) + ',' + format_double(v.y()) +
           ',' + format_double(U.distortion[n]) + ',' + format_double(U.metric[n].det_sigma) + '\n';
    }
  }
  return s;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& recs) {
  std::string s = std::string(sweep_csv_header()) + '\n';
  for (const SweepRecord& r : recs) s += sweep_csv_row(r) + '\n';
  return s;
}

/// Records artifacts written to one output directory and emits
/// manifest.json with the resolved config and per-file checksums.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& text) {
    write_file(dir_ / name, text);
    for (auto& [n, sum] : files_) {
      if (n == name) {
        sum = fnv1a_hex(text);
        return;
      }
    }
    files_.emplace_back(name, fnv1a_hex(text));
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + '\n'); }

  void manifest(const std::string& command, const json& config, const std::string& status) {
    json files = json::array();
    for (const auto& [n, sum] : files_) files.push_back({{"path", n}, {"fnv1a64", sum}});
    write_file(dir_ / "manifest.json", json{{"command", command},
                                            {"status", status},
                                            {"config", config},
                                            {"artifacts", files}}
                                               .dump(2) +
                                           '\n');
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace gldiv
