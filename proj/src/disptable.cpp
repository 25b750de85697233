#include "dispersim/disptable.hpp"

#include "dispersim/errors.hpp"
#include "dispersim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dispersim {

std::vector<double> make_p_grid(const KnotSpec& spec) {
  if (spec.inner_count < 1 || spec.outer_per_sign < 0 || !(spec.inner_half_width >= 0.0) ||
      (spec.outer_per_sign > 0 && !(spec.outer_max > spec.inner_half_width))) {
    throw ConfigError("invalid knot specification");
  }
  std::vector<double> knots;
  const int n = spec.inner_count;
  const double w = spec.inner_half_width;
  if (n == 1) {
    knots.push_back(0.0);
  } else {
    for (int i = 0; i < n; ++i) knots.push_back(w * (2.0 * i - (n - 1)) / (n - 1));
  }
  if (spec.outer_per_sign > 0) {
    if (!(w > 0.0)) throw ConfigError("log-spaced outer knots need a positive inner half width");
    const double lo = std::log10(w);
    const double hi = std::log10(spec.outer_max);
    for (int k = 1; k <= spec.outer_per_sign; ++k) {
      const double mag = (k == spec.outer_per_sign)
                             ? spec.outer_max
                             : std::pow(10.0, lo + (hi - lo) * k / spec.outer_per_sign);
      knots.push_back(mag);
      knots.push_back(-mag);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

std::vector<double> default_p_grid() { return make_p_grid(KnotSpec{}); }

double compute_L(const std::function<double(double)>& g, double u0_sup, double f_sup, double t_final) {
  const double m = std::abs(u0_sup) + t_final * std::abs(f_sup);
  constexpr int samples = 10000;
  double l = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = -m + 2.0 * m * i / (samples - 1);
    l = std::max(l, std::abs(g(r)));
  }
  return l;
}

DispersionTable::DispersionTable(std::vector<double> knots, std::vector<DispersionTensor> values,
                                 TableMetadata meta)
    : knots_(std::move(knots)), values_(std::move(values)), meta_(std::move(meta)) {
  if (knots_.empty()) throw ContractViolation("dispersion table needs at least one knot");
  if (knots_.size() != values_.size()) throw ContractViolation("knot and value counts differ");
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) throw ContractViolation("table knots must be strictly increasing");
  }
}

double DispersionTable::delta(double lo, double hi) const {
  double d = 0.0;
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (knots_[k - 1] >= lo && knots_[k] <= hi) d = std::max(d, knots_[k] - knots_[k - 1]);
  }
  return d;
}

double DispersionTable::delta() const { return delta(knots_.front(), knots_.back()); }

DispersionTensor DispersionTable::interp(double p) const {
  if (!(p > knots_.front())) return values_.front();
  if (!(p < knots_.back())) return values_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), p);
  const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  if (knots_[k] == p) return values_[k];
  const double t = (p - knots_[k]) / (knots_[k + 1] - knots_[k]);
  return (1.0 - t) * values_[k] + t * values_[k + 1];
}

DispersionTable build_table(const CellContext& ctx, std::span<const double> knots, int jobs,
                            TableMetadata meta) {
  std::vector<double> sorted(knots.begin(), knots.end());
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (!(sorted[k] > sorted[k - 1])) throw ContractViolation("knots must be sorted and distinct");
  }
  std::vector<DispersionTensor> values(sorted.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(jobs, 1));
  std::vector<CellWorkspace> spaces(std::min(workers, std::max<std::size_t>(sorted.size(), 1)));
  // Knots are split into contiguous chunks so each worker owns one workspace.
  const std::size_t chunks = spaces.size();
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t begin = sorted.size() * c / chunks;
    const std::size_t end = sorted.size() * (c + 1) / chunks;
    for (std::size_t k = begin; k < end; ++k) {
      values[k] = dispersion_tensor(ctx, spaces[c].solve(ctx, sorted[k]));
    }
  });
  if (meta.geometry_hash.empty()) meta.geometry_hash = ctx.geometry_hash();
  return DispersionTable(std::move(sorted), std::move(values), std::move(meta));
}

// ---------------------------------------------------------------------------

void write_table(std::ostream& out, const DispersionTable& table) {
  out << "# dispersim-table v1\n";
  out << "# geometry=" << table.metadata().geometry_hash;
  for (const auto& [key, value] : table.metadata().items) out << ' ' << key << '=' << value;
  out << '\n';
  out << "p,d11,d12,d21,d22\n";
  char buf[160];
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& v = table.values()[k];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", table.knots()[k], v(0, 0),
                  v(0, 1), v(1, 0), v(1, 1));
    out << buf;
  }
  if (!out) throw IoError("failed writing table");
}

DispersionTable read_table(std::istream& in, const std::string& expected_hash, bool force) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dispersim-table v1", 0) != 0) {
    throw IoError("not a dispersim-table v1 file");
  }
  TableMetadata meta;
  std::vector<double> knots;
  std::vector<DispersionTensor> values;
  bool header_seen = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream items(line.substr(1));
      std::string item;
      while (items >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "geometry") {
          meta.geometry_hash = value;
        } else {
          meta.items[key] = value;
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "p,d11,d12,d21,d22") throw IoError("table: missing CSV header");
      header_seen = true;
      continue;
    }
    std::array<double, 5> f{};
    std::istringstream row(line);
    for (int i = 0; i < 5; ++i) {
      std::string cell;
      if (!std::getline(row, cell, ',')) throw IoError("table line " + std::to_string(lineno) + ": too few columns");
      try {
        std::size_t used = 0;
        f[static_cast<std::size_t>(i)] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError("table line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    knots.push_back(f[0]);
    DispersionTensor d;
    d << f[1], f[2], f[3], f[4];
    values.push_back(d);
  }
  if (!expected_hash.empty() && meta.geometry_hash != expected_hash && !force) {
    throw IoError("table geometry hash " + meta.geometry_hash + " does not match " + expected_hash +
                  " (use --force to override)");
  }
  if (knots.empty()) throw IoError("table has no rows");
  try {
    return DispersionTable(std::move(knots), std::move(values), std::move(meta));
  } catch (const ContractViolation& e) {
    throw IoError(std::string("table: ") + e.what());
  }
}

void write_table_file(const std::string& path, const DispersionTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_table(out, table);
}

DispersionTable read_table_file(const std::string& path, const std::string& expected_hash, bool force) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_table(in, expected_hash, force);
}

}  // namespace dispersim
