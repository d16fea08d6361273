#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "igamg/solver.hpp"

namespace igamg {

/// One benchmark request: a grid of (level, degree) cells sharing every other
/// configuration parameter.
struct BenchSpec {
  std::string geometry = "unit-square";
  SmootherKind smoother = SmootherKind::gs;
  double beta = 1.0;
  std::vector<int> degrees{3, 4, 5, 6, 7, 8, 9};
  std::vector<int> levels{5, 6, 7, 8};
  double sigma0_inv = 0.02;
  double tau = 1.0;
  unsigned long long seed = 42;
  bool uniform_coarse = false;
  double rtol = 1e-8;
  int max_iters = 1000;
  double mem_cap_bytes = 4.2e9;
  bool force = false;  // lifts the desk-scale caps below
};

/// Parses "5", "3..9", or "3,5,7" into a list (order preserved as written;
/// duplicates rejected).
inline std::vector<int> parse_int_range(const std::string& text) {
  std::vector<int> out;
  auto push = [&out](int v) {
    for (int w : out)
      if (w == v) throw std::invalid_argument("duplicate value in range: " + std::to_string(v));
    out.push_back(v);
  };
  auto to_int = [](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed range item: " + s);
    }
    if (used != s.size()) throw std::invalid_argument("malformed range item: " + s);
    return v;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (item.empty()) throw std::invalid_argument("empty item in range: " + text);
    std::size_t dots = item.find("..");
    if (dots == std::string::npos) {
      push(to_int(item));
    } else {
      const int a = to_int(item.substr(0, dots));
      const int b = to_int(item.substr(dots + 2));
      if (b < a) throw std::invalid_argument("descending range: " + item);
      for (int v = a; v <= b; ++v) push(v);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty range: " + text);
  return out;
}

/// Table of results; cells[i][j] corresponds to levels[i] x degrees[j].
struct BenchTable {
  BenchSpec spec;
  int dim = 2;
  std::vector<std::vector<CellResult>> cells;
  bool all_converged = true;
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string cell_text(const CellResult& c) {
  if (c.mem) return "mem";
  if (!c.converged) return "div";
  return std::to_string(c.iterations);
}

}  // namespace detail

/// Validates a spec against the desk-scale caps (2D: level <= 8, degree <= 9;
/// 3D: level <= 3, degree <= 6) unless `force` is set.  Degree/level hard
/// bounds are enforced by the per-cell solver configuration either way.
inline void validate_bench_spec(const BenchSpec& spec) {
  const auto geo = make_geometry(spec.geometry);  // throws on unknown name
  const int dim = geo->dim();
  for (int p : spec.degrees)
    if (p < 2 || p > 12)
      throw std::invalid_argument("degree must be in [2, 12]");
  if (spec.force) return;
  const int lmax = dim == 3 ? 3 : 8;
  const int pmax = dim == 3 ? 6 : 9;
  for (int l : spec.levels)
    if (l < 1 || l > lmax)
      throw std::invalid_argument("level " + std::to_string(l) +
                                  " outside the desk-scale cap (use --force to lift)");
  for (int p : spec.degrees)
    if (p > pmax)
      throw std::invalid_argument("degree " + std::to_string(p) +
                                  " outside the desk-scale cap (use --force to lift)");
}

/// Runs every cell of the benchmark grid.  Per-cell timings go to `timing`
/// (intended for stderr) so the table bytes stay reproducible.
inline BenchTable run_benchmark(const BenchSpec& spec, std::ostream* timing = nullptr) {
  validate_bench_spec(spec);
  BenchTable t;
  t.spec = spec;
  t.dim = make_geometry(spec.geometry)->dim();
  t.cells.resize(spec.levels.size());
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    t.cells[i].resize(spec.degrees.size());
    for (std::size_t j = 0; j < spec.degrees.size(); ++j) {
      SolverConfig cfg;
      cfg.degree = spec.degrees[j];
      cfg.levels = spec.levels[i];
      cfg.uniform_coarse = spec.uniform_coarse;
      cfg.geometry = spec.geometry;
      cfg.beta = spec.beta;
      cfg.smoother = spec.smoother;
      cfg.sigma0_inv = spec.sigma0_inv;
      cfg.tau = spec.tau;
      cfg.rtol = spec.rtol;
      cfg.max_iters = spec.max_iters;
      cfg.seed = spec.seed;
      cfg.mem_cap_bytes = spec.mem_cap_bytes;
      const CellResult c = run_bench_cell(cfg);
      t.cells[i][j] = c;
      if (!c.mem && !c.converged) t.all_converged = false;
      if (timing)
        *timing << "cell level=" << spec.levels[i] << " p=" << spec.degrees[j]
                << " dofs=" << c.dofs << " build=" << c.build_seconds
                << "s solve=" << c.solve_seconds << "s -> "
                << detail::cell_text(c) << "\n";
    }
  }
  return t;
}

namespace detail {

inline void header_pairs(const BenchTable& t,
                         std::vector<std::pair<std::string, std::string>>& kv) {
  kv.emplace_back("geometry", t.spec.geometry);
  kv.emplace_back("smoother", to_string(t.spec.smoother));
  kv.emplace_back("beta", fmt_g(t.spec.beta));
  kv.emplace_back("sigma0-inv", fmt_g(t.spec.sigma0_inv));
  kv.emplace_back("tau", fmt_g(t.spec.tau));
  kv.emplace_back("seed", std::to_string(t.spec.seed));
  kv.emplace_back("coarse-grid", t.spec.uniform_coarse ? "uniform" : "paper");
  kv.emplace_back("rtol", fmt_g(t.spec.rtol));
}

}  // namespace detail

/// Machine-readable table: '#'-prefixed config header, then one row per level.
inline std::string format_csv(const BenchTable& t) {
  std::ostringstream os;
  os << "# iga-biharm-mg bench table\n";
  std::vector<std::pair<std::string, std::string>> kv;
  detail::header_pairs(t, kv);
  for (const auto& [k, v] : kv) os << "# " << k << "," << v << "\n";
  os << "level";
  for (int p : t.spec.degrees) os << ",p" << p;
  os << "\n";
  for (std::size_t i = 0; i < t.spec.levels.size(); ++i) {
    os << t.spec.levels[i];
    for (std::size_t j = 0; j < t.spec.degrees.size(); ++j)
      os << "," << detail::cell_text(t.cells[i][j]);
    os << "\n";
  }
  return os.str();
}

/// Human-readable aligned markdown table
/// (rows: level, columns: degree).
inline std::string format_markdown(const BenchTable& t) {
  std::ostringstream os;
  std::vector<std::pair<std::string, std::string>> kv;
  detail::header_pairs(t, kv);
  for (std::size_t i = 0; i < kv.size(); ++i) {
    os << kv[i].first << ": " << kv[i].second;
    os << (i == 2 || i + 1 == kv.size() ? "\n" : "  ");
  }
  os << "\n";
  const std::size_t nc = t.spec.degrees.size();
  std::vector<std::size_t> width(nc);
  std::vector<std::vector<std::string>> text(t.spec.levels.size(),
                                             std::vector<std::string>(nc));
  for (std::size_t j = 0; j < nc; ++j) {
    width[j] = std::to_string(t.spec.degrees[j]).size();
    for (std::size_t i = 0; i < t.spec.levels.size(); ++i) {
      text[i][j] = detail::cell_text(t.cells[i][j]);
      width[j] = std::max(width[j], text[i][j].size());
    }
  }
  std::size_t w0 = 5;  // "l \ p"
  for (int l : t.spec.levels) w0 = std::max(w0, std::to_string(l).size());
  auto pad = [](const std::string& s, std::size_t w) {
    return std::string(w - s.size(), ' ') + s;
  };
  os << "| " << pad("l \\ p", w0) << " |";
  for (std::size_t j = 0; j < nc; ++j)
    os << " " << pad(std::to_string(t.spec.degrees[j]), width[j]) << " |";
  os << "\n|" << std::string(w0 + 1, '-') << ":|";
  for (std::size_t j = 0; j < nc; ++j) os << std::string(width[j] + 1, '-') << ":|";
  os << "\n";
  for (std::size_t i = 0; i < t.spec.levels.size(); ++i) {
    os << "| " << pad(std::to_string(t.spec.levels[i]), w0) << " |";
    for (std::size_t j = 0; j < nc; ++j) os << " " << pad(text[i][j], width[j]) << " |";
    os << "\n";
  }
  return os.str();
}

}  // namespace igamg
