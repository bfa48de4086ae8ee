// Prints one PASS/FAIL line per acceptance criterion; exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qpn/analysis.hpp"
#include "qpn/error.hpp"
#include "qpn/models.hpp"
#include "qpn/netfile.hpp"
#include "qpn/oracle.hpp"
#include "qpn/tables.hpp"
#include "support.hpp"

using namespace qpn;
using models::Mode;

namespace {

struct Check {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::int64_t> kN{320, 500, 1250, 2500};
const std::vector<std::int64_t> kM{25, 50, 75, 100, 150};

tables::TableReport grid(Mode mode, double* elapsed = nullptr) {
  tables::TableOptions opt;
  opt.modes = {mode};
  opt.n_values = kN;
  opt.m_values = kM;
  const auto t0 = std::chrono::steady_clock::now();
  auto report = tables::build_tables(opt);
  if (elapsed) *elapsed = seconds_since(t0);
  return report;
}

Check passing_table(const tables::TableReport& report, double elapsed) {
  int within = 0, closed_form = 0;
  for (const auto& r : report.rows) {
    if (r.reference && std::abs(r.net - *r.reference) <= 0.0005) ++within;
    const double c = std::pow(std::cos(std::numbers::pi / (2.0 * r.m)), 2.0 * r.m);
    if (std::abs(c - r.net) <= 1e-9 && r.reference && std::abs(c - *r.reference) <= 0.0005) ++closed_form;
  }
  const bool ok = report.rows.size() == 20 && within == 20 && closed_form == 20 && elapsed < 60.0;
  return {ok, fmt("%d/20 cells within 0.0005 of the reference, closed form agrees on %d/20, %.2f s", within,
                  closed_form, elapsed)};
}

Check blocking_table(const tables::TableReport& report) {
  int within = 0, row2500 = 0, anomalies = 0;
  for (const auto& r : report.rows) {
    if (r.n == 2500) {
      if (r.delta_net_oracle <= 1e-9) ++row2500;
      if (r.verdict == tables::Verdict::Anomaly) ++anomalies;
      if (r.verdict == tables::Verdict::Fail) return {false, fmt("N=2500 M=%lld failed", (long long)r.m)};
      continue;
    }
    if (r.reference && std::abs(r.net - *r.reference) <= 0.01 && r.verdict == tables::Verdict::Pass) ++within;
  }
  const bool ok = within == 15 && row2500 == 5;
  return {ok, fmt("%d/15 cells within 0.01; N=2500 row matches the oracle on %d/5 cells, %d flagged ANOMALY",
                  within, row2500, anomalies)};
}

Check net_oracle(const tables::TableReport& passing, const tables::TableReport& blocking) {
  double worst = 0;
  int cells = 0;
  for (const auto* rep : {&passing, &blocking}) {
    for (const auto& r : rep->rows) {
      worst = std::max(worst, r.delta_net_oracle);
      ++cells;
    }
  }
  return {cells == 40 && worst <= 1e-9, fmt("%d cells, max |net - oracle| = %.3e", cells, worst)};
}

Check zeno() {
  double worst = 0, prev = 0;
  bool monotone = true;
  for (std::int64_t n : {2, 4, 10, 100, 1000, 2500}) {
    const auto z = models::zeno_net({n, 2, 1});
    RunConfig cfg;
    cfg.require_unique = true;
    const RunSummary s = run_summary(z.net, z.net.initial_marking(), cfg);
    const auto p = probabilities(z.mapping, z.net, s.final_marking);
    const auto o = oracle::zeno_oracle(n);
    worst = std::max({worst, std::abs(p["|10>"] - o.p10), std::abs(p["|01>"] - o.p01)});
    monotone = monotone && p["|10>"] > prev && p["|10>"] < 1.0;
    prev = p["|10>"];
  }
  return {worst <= 1e-9 && monotone,
          fmt("max deviation %.3e over N in {2,4,10,100,1000,2500}, |10> %s toward 1 (%.6f at N=2500)", worst,
              monotone ? "increases" : "does not increase", prev)};
}

Check conservation(const tables::TableReport& passing, const tables::TableReport& blocking) {
  double worst = 0;
  for (const auto* rep : {&passing, &blocking})
    for (const auto& r : rep->rows) worst = std::max(worst, std::abs(r.total - 1.0));
  double oracle_worst = 0;
  for (std::int64_t n : kN) {
    for (std::int64_t m : kM) {
      oracle_worst = std::max(oracle_worst, std::abs(oracle::passing_oracle(n, m).total() - 1.0));
      oracle_worst = std::max(oracle_worst, std::abs(oracle::blocking_oracle(n, m).total() - 1.0));
    }
  }
  return {worst <= 1e-9 && oracle_worst <= 1e-9,
          fmt("max |total - 1|: nets %.3e, oracles %.3e", worst, oracle_worst)};
}

Check measurement() {
  const auto mn = models::measurement_net();
  const auto exact = oracle::exact_measurement_dist(mn.net);
  double exact_dev = 0;
  for (const auto& e : exact) exact_dev = std::max(exact_dev, std::abs(e.probability - 1.0 / 3.0));
  const std::uint64_t runs = 100000;
  const Distribution d = empirical_distribution(mn.net, mn.mapping, runs, 20240611);
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / runs);
  double worst_sigmas = 0;
  for (const auto& o : d.outcomes) worst_sigmas = std::max(worst_sigmas, std::abs(o.frequency - 1.0 / 3.0) / sigma);
  const bool ok = exact.size() == 3 && exact_dev <= 1e-15 && d.outcomes.size() == 3 && worst_sigmas <= 4.0;
  return {ok, fmt("exact deviation %.1e, %llu runs, worst outcome %.2f sigma", exact_dev,
                  (unsigned long long)runs, worst_sigmas)};
}

Check entanglement() {
  const PetriNet net = models::entanglement_net();
  const ReachabilityGraph g = reachability_graph(net, 1000);
  const MarkingPredicate pred = parse_predicate("m(p3)==m(p5) AND m(p4)==m(p6)");
  const InvariantResult inv = check_invariant(net, g, pred);
  const Distribution d = empirical_distribution(net, models::entanglement_mapping(), 10000, 7, {}, &pred);
  const bool ok = g.nodes.size() == 8 && g.quiescent().size() == 3 && inv.holds && inv.checked == 8 &&
                  d.predicate_hits && *d.predicate_hits == 10000;
  return {ok, fmt("%zu markings, %zu quiescent, invariant %s on %zu, correlated in %llu/10000 runs", g.nodes.size(),
                  g.quiescent().size(), inv.holds ? "holds" : "fails", inv.checked,
                  (unsigned long long)(d.predicate_hits ? *d.predicate_hits : 0))};
}

bool atomicity(Rng& rng) {
  for (int i = 0; i < 200; ++i) {
    const PetriNet net = testing::random_net(rng, 8, 5);
    const Marking m = net.initial_marking();
    for (TransitionId t : enabled_transitions(net, m)) {
      std::map<std::string, double> before;
      for (const auto& p : net.places()) before[p.id] = m[net.place_id(p.id)];
      std::vector<double> expect(m.values().begin(), m.values().end());
      for (const ArcDecl& a : net.arcs()) {
        if (a.transition != net.transition(t).id) continue;
        const double w = eval(a.weight, before);
        double& cell = expect[net.place_id(a.place).index];
        if (!a.input) cell += w;
        else if (a.kind == ArcKind::Consume) cell -= w;
        else if (a.kind == ArcKind::Drain) cell = 0.0;
      }
      Marking got;
      try {
        got = fire(net, m, t);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::CounterViolation) return false;
        continue;
      }
      for (std::size_t k = 0; k < expect.size(); ++k)
        if (std::abs(got.at(k) - expect[k]) > 1e-12) return false;
    }
  }
  return true;
}

bool additivity(Rng& rng) {
  NetBuilder b("line");
  for (int i = 0; i < 4; ++i) b.amplitude("p" + std::to_string(i));
  const PetriNet net = b.build();
  QuantumMapping q;
  for (int i = 0; i < 4; ++i) q.assignments.push_back({"p" + std::to_string(i), std::to_string(i)});
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(4), y(4);
    for (int j = 0; j < 4; ++j) {
      x[j] = rng.uniform() * 2 - 1;
      y[j] = rng.uniform() * 2 - 1;
    }
    q.k = 0.5 + rng.uniform();
    const Marking sum = superpose(Marking(x), Marking(y));
    for (int j = 0; j < 4; ++j)
      if (sum.at(j) != x[j] + y[j]) return false;
    const auto ps = probabilities(q, net, sum);
    const auto px = probabilities(q, net, Marking(x));
    const auto py = probabilities(q, net, Marking(y));
    for (int j = 0; j < 4; ++j) {
      const double want = px.entries[j].value + py.entries[j].value + 2 * q.k * x[j] * y[j];
      if (std::abs(ps.entries[j].value - want) > 1e-12) return false;
    }
  }
  return true;
}

bool k_scale() {
  auto close = [](const oracle::DetectionReport& a, const oracle::DetectionReport& b) {
    return std::abs(a.d1 - b.d1) <= 1e-9 && std::abs(a.d2 - b.d2) <= 1e-9 &&
           std::abs(a.absorbed - b.absorbed) <= 1e-9 && std::abs(a.discarded - b.discarded) <= 1e-9;
  };
  auto report = [](const models::ModelNet& model) {
    const RunSummary s = run_summary(model.net, model.net.initial_marking(), RunConfig{});
    return models::detection_report(model, s.final_marking);
  };
  for (Mode mode : {Mode::Passing, Mode::Blocking}) {
    if (!close(report(models::slaz_net(mode, {40, 6, 1})), report(models::slaz_net(mode, {40, 6, 1e-28}))))
      return false;
  }
  const auto z1 = models::zeno_net({8, 2, 1});
  const auto zk = models::zeno_net({8, 2, 1e-28});
  const auto p1 = probabilities(z1.mapping, z1.net, run_summary(z1.net, z1.net.initial_marking(), {}).final_marking);
  const auto pk = probabilities(zk.mapping, zk.net, run_summary(zk.net, zk.net.initial_marking(), {}).final_marking);
  for (std::size_t i = 0; i < p1.entries.size(); ++i)
    if (std::abs(p1.entries[i].value - pk.entries[i].value) > 1e-9) return false;
  return true;
}

bool expr_round_trip(Rng& rng) {
  const std::vector<std::string> places{"p1", "p22", "q_x"};
  for (int i = 0; i < 5000; ++i) {
    const WeightExpr e = testing::random_expr(rng, places, 6);
    if (!(parse_expr(format(e)) == e)) return false;
  }
  return true;
}

bool netfile_round_trip(Rng& rng) {
  std::vector<netfile::NetDocument> docs;
  docs.push_back({models::measurement_net().net, models::measurement_net().mapping, {}});
  docs.push_back({models::entanglement_net(), models::entanglement_mapping(), {}});
  for (auto model : {models::zeno_net({4, 2, 1}), models::slaz_blocking_net({3, 2, 1}),
                     models::slaz_passing_net({3, 2, 1})})
    docs.push_back({model.net, model.mapping, {}});
  for (int i = 0; i < 200; ++i) docs.push_back({testing::random_net(rng, 6, 4), std::nullopt, {}});
  for (const auto& d : docs) {
    const std::string text = netfile::save(d);
    const netfile::NetDocument back = netfile::load(text);
    if (!(back == d) || netfile::save(back) != text) return false;
  }
  return true;
}

bool reproducible(Rng& rng) {
  const auto mn = models::measurement_net();
  const PetriNet ent = models::entanglement_net();
  for (int i = 0; i < 100; ++i) {
    RunConfig cfg;
    cfg.policy = Policy::BornRandom;
    cfg.seed = rng.next();
    for (const PetriNet* net : {&mn.net, &ent}) {
      const Trace a = run(*net, net->initial_marking(), cfg);
      const Trace b = run(*net, net->initial_marking(), cfg);
      if (a.steps.size() != b.steps.size()) return false;
      for (std::size_t k = 0; k < a.steps.size(); ++k) {
        if (a.steps[k].transition != b.steps[k].transition) return false;
        if (std::memcmp(a.steps[k].marking.values().data(), b.steps[k].marking.values().data(),
                        sizeof(double) * a.steps[k].marking.size()) != 0)
          return false;
      }
    }
  }
  return true;
}

Check properties() {
  Rng rng(8);
  const std::vector<std::pair<const char*, std::function<bool()>>> suites{
      {"atomicity", [&] { return atomicity(rng); }},
      {"additivity", [&] { return additivity(rng); }},
      {"k-scale", [] { return k_scale(); }},
      {"expr round trip", [&] { return expr_round_trip(rng); }},
      {"netfile round trip", [&] { return netfile_round_trip(rng); }},
      {"reproducibility", [&] { return reproducible(rng); }},
  };
  std::string failed;
  for (const auto& [name, fn] : suites) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) failed += failed.empty() ? name : std::string(", ") + name;
  }
  if (failed.empty()) return {true, fmt("%zu suites passed", suites.size())};
  return {false, "failed: " + failed};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Check()>>> criteria;
  double passing_seconds = 0;
  tables::TableReport passing, blocking;
  criteria.push_back({"passing table", [&] {
                        passing = grid(Mode::Passing, &passing_seconds);
                        return passing_table(passing, passing_seconds);
                      }});
  criteria.push_back({"blocking table", [&] {
                        blocking = grid(Mode::Blocking);
                        return blocking_table(blocking);
                      }});
  criteria.push_back({"net-oracle agreement", [&] { return net_oracle(passing, blocking); }});
  criteria.push_back({"zeno", zeno});
  criteria.push_back({"conservation", [&] { return conservation(passing, blocking); }});
  criteria.push_back({"measurement", measurement});
  criteria.push_back({"entanglement", entanglement});
  criteria.push_back({"properties", properties});

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
