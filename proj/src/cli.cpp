#include "qpn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpn/analysis.hpp"
#include "qpn/engine.hpp"
#include "qpn/error.hpp"
#include "qpn/models.hpp"
#include "qpn/netfile.hpp"
#include "qpn/oracle.hpp"
#include "qpn/tables.hpp"

namespace qpn::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Raised for failures that map straight to an exit code.
struct Exit {
  int code;
  std::string message;
};

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownFunction:
    case ErrorCode::MalformedNumber:
    case ErrorCode::DuplicateId:
    case ErrorCode::UndeclaredReference:
    case ErrorCode::InvalidInitialMarking:
    case ErrorCode::InvalidNet:
    case ErrorCode::InvalidParams:
    case ErrorCode::NotIntegerNet: return true;
    default: return false;
  }
}

netfile::NetDocument load_or_exit(const std::string& path) {
  try {
    return netfile::load_file(path);
  } catch (const Error& e) {
    throw Exit{kUsageError, path + ":" + e.what()};
  }
}

MarkingPredicate predicate_or_exit(const std::string& text, const PetriNet& net) {
  try {
    MarkingPredicate p = parse_predicate(text);
    p.validate(net);
    return p;
  } catch (const Error& e) {
    throw Exit{kUsageError, std::string("predicate: ") + e.what()};
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("QPN_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw Exit{kUsageError, "QPN_SEED must be an unsigned integer"};
  return v;
}

/// Flag, then file, then QPN_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           const netfile::ConfigOverrides& file) {
  if (flag) return *flag;
  if (file.seed) return *file.seed;
  return env_seed().value_or(0);
}

struct RunFlags {
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_steps;
  std::optional<double> epsilon;
  bool unique = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_policy = true) {
  if (with_policy) {
    cmd->add_option("--policy", f.policy, "det or born")->check(CLI::IsMember({"det", "deterministic", "born"}));
  }
  cmd->add_option("--seed", f.seed, "RNG seed (default: file, then QPN_SEED, then 0)");
  cmd->add_option("--max-steps", f.max_steps, "firing limit");
  cmd->add_option("--epsilon", f.epsilon, "enabling tolerance");
  cmd->add_flag("--unique", f.unique, "fail unless exactly one transition is enabled per step");
}

RunConfig make_config(const RunFlags& f, const netfile::ConfigOverrides& file) {
  RunConfig c;
  file.apply(c);
  if (!f.policy.empty()) c.policy = *parse_policy(f.policy);
  if (f.max_steps) c.max_steps = *f.max_steps;
  if (f.epsilon) c.epsilon = *f.epsilon;
  c.require_unique = f.unique;
  c.seed = resolve_seed(f.seed, file);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Exit{kUsageError, e.what()};
  }
  return c;
}

int cmd_simulate(const std::string& path, const RunFlags& flags, const std::string& trace_path,
                 std::ostream& out) {
  const netfile::NetDocument doc = load_or_exit(path);
  const PetriNet& net = doc.net;
  const RunConfig config = make_config(flags, doc.config);

  std::ofstream trace;
  StepObserver observer;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    if (!trace) throw Exit{kUsageError, "cannot write '" + trace_path + "'"};
    trace << "step,transition";
    for (const auto& p : net.places()) trace << ',' << p.id;
    trace << "\n0,";
    for (double v : net.initial_marking().values()) trace << ',' << format_number(v);
    trace << '\n';
    observer = [&](std::uint64_t n, const Firing& f) {
      trace << n << ',' << net.transition(f.transition).id;
      for (double v : f.marking.values()) trace << ',' << format_number(v);
      trace << '\n';
    };
  }

  const RunSummary s = run_summary(net, net.initial_marking(), config, observer);
  out << "net: " << net.name() << "\n";
  out << "policy: " << to_string(config.policy) << "\n";
  if (config.policy == Policy::BornRandom) out << "seed: " << config.seed << "\n";
  out << "status: " << to_string(s.status) << "\n";
  out << "firings: " << s.firings << "\n";
  out << "final marking:\n";
  for (std::size_t i = 0; i < net.place_count(); ++i) {
    out << "  " << net.places()[i].id << " = " << num(s.final_marking.at(i)) << "\n";
  }
  if (doc.mapping) {
    const ProbabilityReport probs = probabilities(*doc.mapping, net, s.final_marking);
    out << "probabilities (k = " << num(doc.mapping->k) << "):\n";
    for (std::size_t i = 0; i < probs.entries.size(); ++i) {
      out << "  " << doc.mapping->assignments[i].place << " " << probs.entries[i].label << " = "
          << num(probs.entries[i].value) << "\n";
    }
    out << "total probability: " << num(probs.total) << "\n";
  }
  if (s.status == TerminalStatus::StepLimit) {
    throw Exit{kRuntimeError, "step limit of " + std::to_string(config.max_steps) + " reached"};
  }
  return kOk;
}

int cmd_check(const std::string& path, const std::string& pred_text, std::size_t max_states,
              const std::string& dot_path, std::ostream& out) {
  const netfile::NetDocument doc = load_or_exit(path);
  const MarkingPredicate pred = predicate_or_exit(pred_text, doc.net);
  ReachabilityGraph g;
  try {
    g = reachability_graph(doc.net, max_states);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotIntegerNet) throw Exit{kUsageError, e.what()};
    throw;
  }
  if (!dot_path.empty()) {
    std::ofstream dot(dot_path, std::ios::binary);
    if (!dot) throw Exit{kUsageError, "cannot write '" + dot_path + "'"};
    dot << to_dot(g, doc.net);
  }
  out << "reachable markings: " << g.nodes.size() << " (" << g.quiescent().size()
      << " quiescent), edges: " << g.edges.size() << "\n";
  const InvariantResult r = check_invariant(doc.net, g, pred);
  if (r.holds) {
    out << "holds: " << format(pred) << " on all " << r.checked << " markings\n";
    return kOk;
  }
  const Marking& m = g.nodes[*r.counterexample];
  out << "violated: " << format(pred) << "\ncounterexample:";
  for (std::size_t i = 0; i < doc.net.place_count(); ++i) {
    out << " " << doc.net.places()[i].id << "=" << num(m.at(i));
  }
  out << "\npath:";
  if (r.path.empty()) out << " (initial marking)";
  for (auto t : r.path) out << " " << doc.net.transition(t).id;
  out << "\n";
  return kVerificationFailed;
}

int cmd_measure(const std::string& path, std::uint64_t runs, const RunFlags& flags, bool expect,
                const std::string& holds, std::ostream& out) {
  const netfile::NetDocument doc = load_or_exit(path);
  if (!doc.mapping) throw Exit{kUsageError, path + ": no quantum mapping (map statements)"};
  if (runs == 0) throw Exit{kUsageError, "--runs must be at least 1"};
  std::optional<MarkingPredicate> pred;
  if (!holds.empty()) pred = predicate_or_exit(holds, doc.net);
  const RunConfig config = make_config(flags, doc.config);

  const Distribution d = empirical_distribution(doc.net, *doc.mapping, runs, config.seed, config,
                                                pred ? &*pred : nullptr);
  out << "runs: " << d.runs << "\nseed: " << config.seed << "\n";
  out << "outcome,count,frequency,std_error\n";
  for (const auto& o : d.outcomes) {
    out << o.outcome << "," << o.count << "," << num(o.frequency) << "," << num(o.std_error)
        << "\n";
  }
  int code = kOk;
  if (pred) {
    out << "predicate " << format(*pred) << " held in " << *d.predicate_hits << " of " << d.runs
        << " runs (" << num(100.0 * static_cast<double>(*d.predicate_hits) /
                            static_cast<double>(d.runs))
        << "%)\n";
    if (*d.predicate_hits != d.runs) code = kVerificationFailed;
  }
  if (expect) {
    if (runs == 1) {
      out << "single run: no comparison\n";
      return code;
    }
    const auto exact = exact_outcome_distribution(doc.net, *doc.mapping, config);
    out << "outcome,expected,observed,sigmas\n";
    bool ok = true;
    for (const auto& e : exact) {
      const OutcomeFrequency* f = d.find(e.outcome);
      const double observed = f ? f->frequency : 0.0;
      const double sigma = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(runs));
      const double diff = std::abs(observed - e.probability);
      const double z = sigma > 0.0 ? diff / sigma : (diff > 0.0 ? INFINITY : 0.0);
      ok = ok && z <= 4.0;
      out << e.outcome << "," << num(e.probability) << "," << num(observed) << "," << num(z) << "\n";
    }
    for (const auto& o : d.outcomes) {
      bool known = false;
      for (const auto& e : exact) known = known || e.outcome == o.outcome;
      if (!known) {
        ok = false;
        out << o.outcome << ",0," << num(o.frequency) << ",inf\n";
      }
    }
    out << (ok ? "within 4 sigma\n" : "outside 4 sigma\n");
    if (!ok) code = kVerificationFailed;
  }
  return code;
}

int cmd_oracle(const std::string& which, std::int64_t n, std::int64_t m, std::ostream& out) {
  if (which == "zeno") {
    const auto z = oracle::zeno_oracle(n);
    out << "p10: " << num(z.p10) << "\np01: " << num(z.p01) << "\n";
    return kOk;
  }
  const auto r = which == "passing" ? oracle::passing_oracle(n, m) : oracle::blocking_oracle(n, m);
  out << "d1: " << num(r.d1) << "\nd2: " << num(r.d2) << "\nabsorbed: " << num(r.absorbed)
      << "\ndiscarded: " << num(r.discarded) << "\ntotal: " << num(r.total()) << "\n";
  return kOk;
}

int cmd_validate(const std::string& path, bool canonical, std::ostream& out) {
  const netfile::NetDocument doc = load_or_exit(path);
  if (doc.mapping) {
    try {
      doc.mapping->validate(doc.net);
    } catch (const Error& e) {
      throw Exit{kUsageError, path + ": " + e.what()};
    }
  }
  if (canonical) {
    out << netfile::save(doc);
    return kOk;
  }
  out << "ok: " << doc.net.name() << " (" << doc.net.place_count() << " places, "
      << doc.net.transition_count() << " transitions, " << doc.net.arc_count() << " arcs";
  if (doc.mapping) out << ", " << doc.mapping->assignments.size() << " mapped";
  out << ")\n";
  return kOk;
}

int cmd_zoo(const std::string& name, const models::ProtocolParams& params,
            const std::string& output, std::ostream& out) {
  std::string text;
  if (name == "measurement") {
    const auto mn = models::measurement_net();
    text = netfile::save(mn.net, mn.mapping);
  } else if (name == "entanglement") {
    text = netfile::save(models::entanglement_net(), models::entanglement_mapping());
  } else {
    models::ModelNet mn = name == "zeno"       ? models::zeno_net(params)
                          : name == "blocking" ? models::slaz_blocking_net(params)
                                               : models::slaz_passing_net(params);
    text = netfile::save(mn.net, mn.mapping);
  }
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream f(output, std::ios::binary);
    if (!f) throw Exit{kUsageError, "cannot write '" + output + "'"};
    f << text;
  }
  return kOk;
}

int cmd_tables(const std::string& mode, const std::vector<std::int64_t>& ns,
               const std::vector<std::int64_t>& ms, tables::TableOptions opts,
               const std::string& format_name, const std::string& output, std::ostream& out) {
  opts.modes.clear();
  if (mode == "passing" || mode == "both") opts.modes.push_back(models::Mode::Passing);
  if (mode == "blocking" || mode == "both") opts.modes.push_back(models::Mode::Blocking);
  if (!ns.empty()) opts.n_values = ns;
  if (!ms.empty()) opts.m_values = ms;
  tables::TableReport report;
  try {
    report = tables::build_tables(opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidParams) throw Exit{kUsageError, e.what()};
    throw;
  }
  const std::string text = format_name == "md" ? tables::to_markdown(report) : tables::to_csv(report);
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream f(output, std::ios::binary);
    if (!f) throw Exit{kUsageError, "cannot write '" + output + "'"};
    f << text;
  }
  return report.ok() ? kOk : kVerificationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and verify quantum protocols modeled as Petri nets", "qpn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qpn 0.1.0");

  int code = kOk;

  std::string sim_file, trace_path;
  RunFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "run a .qpn net and report its final state");
  sim->add_option("file", sim_file, ".qpn file")->required();
  add_run_flags(sim, sim_flags);
  sim->add_option("--trace", trace_path, "write every firing as CSV");

  tables::TableOptions table_opts;
  std::string table_mode = "both", table_format = "csv", table_output;
  std::vector<std::int64_t> table_ns, table_ms;
  auto* tab = app.add_subcommand("tables", "regenerate the detection-probability tables");
  tab->add_option("--mode", table_mode, "passing, blocking or both")
      ->check(CLI::IsMember({"passing", "blocking", "both"}));
  tab->add_option("--n", table_ns, "inner cycle counts, comma separated")->delimiter(',');
  tab->add_option("--m", table_ms, "outer cycle counts, comma separated")->delimiter(',');
  tab->add_option("--k", table_opts.k, "scale constant of the encoding");
  tab->add_option("--tol-passing", table_opts.tol_passing, "tolerance against passing-mode reference values");
  tab->add_option("--tol-blocking", table_opts.tol_blocking, "tolerance against blocking-mode reference values");
  tab->add_option("--tol-oracle", table_opts.tol_oracle, "tolerance between net and oracle");
  tab->add_option("--format", table_format, "csv or md")->check(CLI::IsMember({"csv", "md"}));
  tab->add_option("-o,--output", table_output, "write to a file instead of stdout");

  std::string check_file, check_pred, dot_path;
  std::size_t max_states = 100000;
  auto* chk = app.add_subcommand("check", "verify a marking invariant over the reachability graph");
  chk->add_option("file", check_file, ".qpn file")->required();
  chk->add_option("predicate", check_pred, "e.g. \"m(p3)==m(p5) AND m(p4)==m(p6)\"")->required();
  chk->add_option("--max-states", max_states, "exploration bound");
  chk->add_option("--dot", dot_path, "write the reachability graph as DOT");

  std::string meas_file, holds;
  std::uint64_t runs = 10000;
  bool expect = false;
  RunFlags meas_flags;
  auto* meas = app.add_subcommand("measure", "estimate the outcome distribution from seeded runs");
  meas->add_option("file", meas_file, ".qpn file with a mapping")->required();
  meas->add_option("--runs", runs, "number of runs");
  meas->add_flag("--expect", expect, "compare with the exact distribution at 4 sigma");
  meas->add_option("--holds", holds, "predicate every final marking must satisfy");
  add_run_flags(meas, meas_flags, false);  // runs are always Born-sampled

  std::string which;
  std::int64_t oracle_n = 2, oracle_m = 2;
  auto* orc = app.add_subcommand("oracle", "evaluate an analytic reference");
  orc->add_option("kind", which, "zeno, passing or blocking")
      ->required()
      ->check(CLI::IsMember({"zeno", "passing", "blocking"}));
  orc->add_option("--n", oracle_n, "inner cycles (N)");
  orc->add_option("--m", oracle_m, "outer cycles (M)");

  std::string val_file;
  bool canonical = false;
  auto* val = app.add_subcommand("validate", "load a .qpn file and report problems");
  val->add_option("file", val_file, ".qpn file")->required();
  val->add_flag("--canonical", canonical, "print the canonical form");

  std::string zoo_name, zoo_output;
  models::ProtocolParams params{4, 2, 1.0};
  auto* zoo = app.add_subcommand("zoo", "emit a built-in net as .qpn text");
  zoo->add_option("name", zoo_name, "measurement, entanglement, zeno, blocking or passing")
      ->required()
      ->check(CLI::IsMember({"measurement", "entanglement", "zeno", "blocking", "passing"}));
  zoo->add_option("--n", params.n, "inner cycles (N)");
  zoo->add_option("--m", params.m, "outer cycles (M)");
  zoo->add_option("--k", params.k, "scale constant");
  zoo->add_option("-o,--output", zoo_output, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsageError;
  }

  try {
    if (*sim) code = cmd_simulate(sim_file, sim_flags, trace_path, out);
    if (*tab) code = cmd_tables(table_mode, table_ns, table_ms, table_opts, table_format, table_output, out);
    if (*chk) code = cmd_check(check_file, check_pred, max_states, dot_path, out);
    if (*meas) code = cmd_measure(meas_file, runs, meas_flags, expect, holds, out);
    if (*orc) code = cmd_oracle(which, oracle_n, oracle_m, out);
    if (*val) code = cmd_validate(val_file, canonical, out);
    if (*zoo) code = cmd_zoo(zoo_name, params, zoo_output, out);
  } catch (const Exit& e) {
    err << "qpn: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "qpn: " << e.what() << "\n";
    return *orc || *zoo ? (is_input_error(e.code()) ? kUsageError : kRuntimeError) : kRuntimeError;
  } catch (const std::exception& e) {
    err << "qpn: " << e.what() << "\n";
    return kRuntimeError;
  }
  return code;
}

}  // namespace qpn::cli
