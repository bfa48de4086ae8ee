#include "qpn/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qpn/engine.hpp"
#include "qpn/error.hpp"

namespace qpn::tables {

extern const char* const kReferenceCsv;  // generated from data/reference_tables.csv

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <class T>
T number(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedNumber, "bad number '" + s + "'", {line, 1});
  }
  return v;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

std::vector<ReferenceValue> parse_reference_csv(std::string_view text) {
  std::vector<ReferenceValue> out;
  std::size_t lineno = 0;
  bool header = true;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("mode,", 0) == 0) continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() < 4 || cells.size() > 5) {
      throw Error(ErrorCode::SyntaxError, "expected mode,N,M,value[,flag]", {lineno, 1});
    }
    ReferenceValue r;
    const std::string mode = trim(cells[0]);
    if (mode == "passing") {
      r.mode = models::Mode::Passing;
    } else if (mode == "blocking") {
      r.mode = models::Mode::Blocking;
    } else {
      throw Error(ErrorCode::SyntaxError, "unknown mode '" + mode + "'", {lineno, 1});
    }
    r.n = number<std::int64_t>(trim(cells[1]), lineno);
    r.m = number<std::int64_t>(trim(cells[2]), lineno);
    r.value = number<double>(trim(cells[3]), lineno);
    r.anomaly = cells.size() == 5 && trim(cells[4]) == "anomaly";
    out.push_back(r);
  }
  return out;
}

const std::vector<ReferenceValue>& reference_values() {
  static const std::vector<ReferenceValue> values = parse_reference_csv(kReferenceCsv);
  return values;
}

std::optional<ReferenceValue> find_reference(models::Mode mode, std::int64_t n, std::int64_t m) {
  for (const auto& r : reference_values()) {
    if (r.mode == mode && r.n == n && r.m == m) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Anomaly: return "ANOMALY";
  }
  return "?";
}

bool TableReport::ok() const noexcept {
  return std::none_of(rows.begin(), rows.end(),
                      [](const TableRow& r) { return r.verdict == Verdict::Fail; });
}

TableRow evaluate_cell(models::Mode mode, std::int64_t n, std::int64_t m,
                       const TableOptions& options) {
  const models::ModelNet model = models::slaz_net(mode, {n, m, options.k});
  RunConfig config;
  config.max_steps = 1'000'000'000;
  const RunSummary s = run_summary(model.net, model.net.initial_marking(), config);
  if (s.status != TerminalStatus::Quiescent) {
    throw Error(ErrorCode::InvalidParams, "protocol net did not terminate");
  }
  const oracle::DetectionReport got = models::detection_report(model, s.final_marking);
  const bool passing = mode == models::Mode::Passing;
  const oracle::DetectionReport want =
      passing ? oracle::passing_oracle(n, m) : oracle::blocking_oracle(n, m);

  TableRow row;
  row.mode = mode;
  row.n = n;
  row.m = m;
  row.net = passing ? got.d1 : got.d2;
  row.oracle = passing ? want.d1 : want.d2;
  row.delta_net_oracle = std::abs(row.net - row.oracle);
  row.total = got.total();
  row.firings = s.firings;

  bool fail = row.delta_net_oracle > options.tol_oracle ||
              std::abs(row.total - 1.0) > options.tol_oracle;
  bool anomaly = false;
  if (auto ref = find_reference(mode, n, m)) {
    row.reference = ref->value;
    row.delta_net_reference = std::abs(row.net - ref->value);
    const double tol = passing ? options.tol_passing : options.tol_blocking;
    if (*row.delta_net_reference > tol) {
      if (ref->anomaly) {
        anomaly = true;
      } else {
        fail = true;
      }
    }
  }
  row.verdict = fail ? Verdict::Fail : anomaly ? Verdict::Anomaly : Verdict::Pass;
  return row;
}

TableReport build_tables(const TableOptions& options) {
  if (options.modes.empty() || options.n_values.empty() || options.m_values.empty()) {
    throw Error(ErrorCode::InvalidParams, "table grid is empty");
  }
  std::vector<models::Mode> modes = options.modes;
  std::sort(modes.begin(), modes.end(), [](models::Mode a, models::Mode b) {
    return models::to_string(a) < models::to_string(b);
  });
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  std::vector<std::int64_t> ns = options.n_values;
  std::vector<std::int64_t> ms = options.m_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

  TableReport report;
  for (auto mode : modes) {
    for (auto n : ns) {
      for (auto m : ms) report.rows.push_back(evaluate_cell(mode, n, m, options));
    }
  }
  return report;
}

std::string to_csv(const TableReport& report) {
  std::ostringstream os;
  os << "mode,N,M,net,oracle,paper,delta_net_oracle,delta_net_paper,verdict\n";
  for (const auto& r : report.rows) {
    os << models::to_string(r.mode) << ',' << r.n << ',' << r.m << ',' << fixed(r.net, 12) << ','
       << fixed(r.oracle, 12) << ',' << (r.reference ? fixed(*r.reference, 3) : "") << ','
       << sci(r.delta_net_oracle) << ',' << (r.delta_net_reference ? sci(*r.delta_net_reference) : "")
       << ',' << to_string(r.verdict) << '\n';
  }
  return os.str();
}

std::string to_markdown(const TableReport& report) {
  std::ostringstream os;
  os << "| mode | N | M | net | oracle | reference | delta net-oracle | delta net-reference | verdict |\n";
  os << "|---|---:|---:|---:|---:|---:|---:|---:|---|\n";
  for (const auto& r : report.rows) {
    os << "| " << models::to_string(r.mode) << " | " << r.n << " | " << r.m << " | "
       << fixed(r.net, 6) << " | " << fixed(r.oracle, 6) << " | "
       << (r.reference ? fixed(*r.reference, 3) : "-") << " | " << sci(r.delta_net_oracle) << " | "
       << (r.delta_net_reference ? sci(*r.delta_net_reference) : "-") << " | " << to_string(r.verdict)
       << " |\n";
  }
  return os.str();
}

}  // namespace qpn::tables
