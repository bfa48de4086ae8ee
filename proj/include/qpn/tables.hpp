#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpn/models.hpp"

namespace qpn::tables {

struct ReferenceValue {
  models::Mode mode = models::Mode::Passing;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double value = 0.0;
  bool anomaly = false;
};

/// Rows of `mode,N,M,value,flag` CSV; `#` lines are comments.
std::vector<ReferenceValue> parse_reference_csv(std::string_view text);
/// The published table values compiled into the library.
const std::vector<ReferenceValue>& reference_values();
std::optional<ReferenceValue> find_reference(models::Mode mode, std::int64_t n, std::int64_t m);

enum class Verdict { Pass, Fail, Anomaly };
std::string_view to_string(Verdict v) noexcept;

struct TableOptions {
  std::vector<models::Mode> modes{models::Mode::Passing};
  std::vector<std::int64_t> n_values{320, 500, 1250, 2500};
  std::vector<std::int64_t> m_values{25, 50, 75, 100, 150};
  double k = 1.0;
  double tol_passing = 0.0005;
  double tol_blocking = 0.01;
  double tol_oracle = 1e-9;
};

struct TableRow {
  models::Mode mode = models::Mode::Passing;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double net = 0.0;     // D1 (passing) or D2 (blocking) from the simulated net
  double oracle = 0.0;  // same quantity from the independent oracle
  std::optional<double> reference;
  double delta_net_oracle = 0.0;
  std::optional<double> delta_net_reference;
  double total = 0.0;  // all detector and loss probabilities of the net
  std::uint64_t firings = 0;
  Verdict verdict = Verdict::Pass;
};

struct TableReport {
  std::vector<TableRow> rows;  // ordered by (mode name, N, M)

  bool ok() const noexcept;
};

/// Simulates one cell and compares it with the oracle and, where listed,
/// the reference value. FAIL when the net strays from the oracle or from
/// unit total probability by more than tol_oracle, or from a reference
/// value by more than the mode tolerance; ANOMALY replaces the latter FAIL
/// for flagged reference cells.
TableRow evaluate_cell(models::Mode mode, std::int64_t n, std::int64_t m,
                       const TableOptions& options);

TableReport build_tables(const TableOptions& options);

std::string to_csv(const TableReport& report);
std::string to_markdown(const TableReport& report);

}  // namespace qpn::tables
