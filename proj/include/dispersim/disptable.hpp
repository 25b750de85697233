#pragma once

#include "dispersim/cell.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dispersim {

/// Knot layout: `inner_count` uniform points on [-inner_half_width,
/// inner_half_width] plus `outer_per_sign` log-spaced magnitudes per sign on
/// (inner_half_width, outer_max].
struct KnotSpec {
  int inner_count = 101;
  double inner_half_width = 10.0;
  int outer_per_sign = 50;
  double outer_max = 1e11;
};

std::vector<double> make_p_grid(const KnotSpec& spec);
/// 201 knots: 101 uniform on [-10, 10] and 50 log-spaced per sign up to 1e11.
std::vector<double> default_p_grid();

/// L = max |G(r)| over 10^4 uniform samples of [-m, m], m = u0_sup + T f_sup.
double compute_L(const std::function<double(double)>& g, double u0_sup, double f_sup, double t_final);

struct TableMetadata {
  std::string geometry_hash;
  /// Remaining `key=value` header items (mu, force, diffusion, spacing, ...).
  std::map<std::string, std::string> items;
};

class DispersionTable {
 public:
  DispersionTable() = default;
  DispersionTable(std::vector<double> knots, std::vector<DispersionTensor> values, TableMetadata meta);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<DispersionTensor>& values() const { return values_; }
  const TableMetadata& metadata() const { return meta_; }
  std::size_t size() const { return knots_.size(); }

  /// Largest gap between consecutive knots inside [lo, hi].
  double delta(double lo, double hi) const;
  double delta() const;

  /// Entrywise piecewise-linear interpolation, constant beyond the end knots.
  DispersionTensor interp(double p) const;

 private:
  std::vector<double> knots_;
  std::vector<DispersionTensor> values_;
  TableMetadata meta_;
};

/// One cell solve per knot, spread over `jobs` workers. Each entry depends
/// only on its knot, so the table is independent of the schedule.
DispersionTable build_table(const CellContext& ctx, std::span<const double> knots, int jobs,
                            TableMetadata meta = {});

/// `# dispersim-table v1`, `# geometry=<hash> key=value ...`, then CSV
/// `p,d11,d12,d21,d22` with 17 significant digits.
void write_table(std::ostream& out, const DispersionTable& table);
/// Throws IoError on a geometry hash different from `expected_hash` unless
/// `force` is set or `expected_hash` is empty.
DispersionTable read_table(std::istream& in, const std::string& expected_hash = {}, bool force = false);
void write_table_file(const std::string& path, const DispersionTable& table);
DispersionTable read_table_file(const std::string& path, const std::string& expected_hash = {},
                                bool force = false);

}  // namespace dispersim
