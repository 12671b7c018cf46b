#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qhc/decomposition.hpp"
#include "qhc/torsion.hpp"

namespace qhc {

enum class CellStatus { match, mismatch, remark, ambiguous, skipped };
const char* status_name(CellStatus s);

/// One (row, column) entry of a contribution table.
struct ContributionCell {
  std::string table;   // "1", "2" or "3"
  std::string source;  // "gamma", "D33", "33.33", "33.K3", ...
  std::string target;
  int expected = 0;  // number of ticks in the reference table
  int observed = 0;
  double witness = 0;   // largest relative witness over seeds
  double second = 0;    // Table 2 x-columns: relative size of the second direction
  int seeds = 0;
  CellStatus status = CellStatus::match;
};

/// Direction of the R_a + R_b contribution in the basis a = pi2 + 6 pi1, b = pi2 - 6 pi1.
struct DirectionCheck {
  std::string source;
  std::array<double, 2> observed{};  // unit vector
  std::array<double, 2> annotated_direction{};
  std::array<double, 2> annotated_orthogonal{};
  double angle_direction = 0;   // angle between the observed line and the annotated direction
  double orthogonality = 0;     // |cos| between the observed direction and the annotated orthogonal
  double annotation_gap = 0;    // |cos| between the two annotated vectors
  bool pass = false;
};

struct TableOptions {
  int seeds = 8;
  std::uint64_t seed = 1;
  double tick_on = 1e-7;
  double tick_off = 1e-9;
  double angle_tol = 1e-8;
  std::set<std::string> rows;  // empty: all rows
};

struct TablesReport {
  int n = 0;
  int seeds = 0;
  std::vector<ContributionCell> cells;
  std::vector<DirectionCheck> directions;

  int count(CellStatus s) const;
  bool ambiguous() const { return count(CellStatus::ambiguous) > 0; }
  /// No mismatches outside the caveat columns, no failed direction checks.
  bool consistent() const;
  const ContributionCell* find(const std::string& table, const std::string& source,
                               const std::string& target) const;
};

const std::vector<std::string>& table_rows(int table);
const std::vector<std::string>& table_columns(int table);
/// Reference tick counts, row-major over table_rows x table_columns.
int expected_ticks(int table, const std::string& row, const std::string& column);
bool remark_column(int table, const std::string& column);

TablesReport contribution_tables(const TorsionBank& tb, const ProjectorBank& bank,
                                 const TableOptions& opt = {});

std::string format_tables(const TablesReport& r);
std::string tables_json(const TablesReport& r);

}  // namespace qhc
