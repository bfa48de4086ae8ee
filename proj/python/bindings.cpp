#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpn/analysis.hpp"
#include "qpn/error.hpp"
#include "qpn/models.hpp"
#include "qpn/netfile.hpp"
#include "qpn/oracle.hpp"
#include "qpn/tables.hpp"

namespace py = pybind11;
using namespace qpn;

namespace {

std::vector<double> to_list(const Marking& m) { return {m.values().begin(), m.values().end()}; }

py::dict report_dict(const oracle::DetectionReport& r) {
  py::dict d;
  d["d1"] = r.d1;
  d["d2"] = r.d2;
  d["absorbed"] = r.absorbed;
  d["discarded"] = r.discarded;
  d["total"] = r.total();
  return d;
}

Policy policy_of(const std::string& text) {
  const auto p = parse_policy(text);
  if (!p) throw Error(ErrorCode::InvalidParams, "unknown policy '" + text + "'");
  return *p;
}

models::Mode mode_of(const std::string& text) {
  if (text == "passing") return models::Mode::Passing;
  if (text == "blocking") return models::Mode::Blocking;
  throw Error(ErrorCode::InvalidParams, "unknown mode '" + text + "'");
}

RunConfig config_of(const std::string& policy, std::uint64_t seed, std::uint64_t max_steps, bool unique) {
  RunConfig c;
  c.policy = policy_of(policy);
  c.seed = seed;
  c.max_steps = max_steps;
  c.require_unique = unique;
  return c;
}

py::dict mapping_probabilities(const QuantumMapping& q, const PetriNet& net, const Marking& m) {
  const ProbabilityReport r = probabilities(q, net, m);
  py::dict d;
  for (const auto& e : r.entries) d[py::str(e.label)] = e.value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Petri nets with amplitude tokens and marking-dependent weights";

  py::register_exception<Error>(mod, "QpnError");

  mod.def("format_expr", [](const std::string& text) { return format(parse_expr(text)); },
          "Canonical rendering of a weight expression.");
  mod.def(
      "eval_expr",
      [](const std::string& text, const std::map<std::string, double>& marking) {
        return eval(parse_expr(text), marking);
      },
      py::arg("text"), py::arg("marking") = std::map<std::string, double>{});

  py::class_<QuantumMapping>(mod, "QuantumMapping")
      .def_readonly("k", &QuantumMapping::k)
      .def_property_readonly("assignments", [](const QuantumMapping& q) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& a : q.assignments) out.emplace_back(a.place, a.label);
        return out;
      });

  py::class_<PetriNet>(mod, "PetriNet")
      .def_property_readonly("name", &PetriNet::name)
      .def_property_readonly("places", [](const PetriNet& n) {
        std::vector<std::string> out;
        for (const auto& p : n.places()) out.push_back(p.id);
        return out;
      })
      .def_property_readonly("transitions", [](const PetriNet& n) {
        std::vector<std::string> out;
        for (const auto& t : n.transitions()) out.push_back(t.id);
        return out;
      })
      .def_property_readonly("arc_count", &PetriNet::arc_count)
      .def_property_readonly("initial_marking", [](const PetriNet& n) { return to_list(n.initial_marking()); })
      .def("enabled", [](const PetriNet& n, const std::vector<double>& m) {
        std::vector<std::string> out;
        for (TransitionId t : enabled_transitions(n, Marking(m))) out.push_back(n.transition(t).id);
        return out;
      })
      .def("fire", [](const PetriNet& n, const std::vector<double>& m, const std::string& t) {
        return to_list(fire(n, Marking(m), n.transition_id(t)));
      })
      .def(
          "run",
          [](const PetriNet& n, const std::string& policy, std::uint64_t seed, std::uint64_t max_steps,
             bool unique) {
            const Trace tr = run(n, n.initial_marking(), config_of(policy, seed, max_steps, unique));
            py::dict d;
            d["status"] = std::string(to_string(tr.status));
            d["firings"] = tr.steps.size();
            std::vector<std::string> path;
            for (const auto& s : tr.steps) path.push_back(n.transition(s.transition).id);
            d["path"] = path;
            d["final_marking"] = to_list(tr.final_marking());
            return d;
          },
          py::arg("policy") = "det", py::arg("seed") = 0, py::arg("max_steps") = 10'000'000,
          py::arg("require_unique") = false)
      .def("__eq__", [](const PetriNet& a, const PetriNet& b) { return a == b; });

  py::class_<models::ModelNet>(mod, "Model")
      .def_readonly("net", &models::ModelNet::net)
      .def_readonly("mapping", &models::ModelNet::mapping)
      .def(
          "run",
          [](const models::ModelNet& m, std::uint64_t max_steps) {
            RunConfig c;
            c.max_steps = max_steps;
            const RunSummary s = run_summary(m.net, m.net.initial_marking(), c);
            py::dict d;
            d["status"] = std::string(to_string(s.status));
            d["firings"] = s.firings;
            d["final_marking"] = to_list(s.final_marking);
            d["probabilities"] = mapping_probabilities(m.mapping, m.net, s.final_marking);
            d["report"] = report_dict(models::detection_report(m, s.final_marking));
            return d;
          },
          py::arg("max_steps") = 1'000'000'000)
      .def("probabilities", [](const models::ModelNet& m, const std::vector<double>& marking) {
        return mapping_probabilities(m.mapping, m.net, Marking(marking));
      });

  mod.def("measurement_net", &models::measurement_net);
  mod.def("entanglement_net", [] { return models::ModelNet{models::entanglement_net(), models::entanglement_mapping()}; });
  mod.def("zeno_net", [](std::int64_t n, double k) { return models::zeno_net({n, 2, k}); }, py::arg("n"),
          py::arg("k") = 1.0);
  mod.def(
      "slaz_net",
      [](const std::string& mode, std::int64_t n, std::int64_t m, double k) {
        return models::slaz_net(mode_of(mode), {n, m, k});
      },
      py::arg("mode"), py::arg("n"), py::arg("m"), py::arg("k") = 1.0);

  mod.def("zeno_oracle", [](std::int64_t n) {
    const auto z = oracle::zeno_oracle(n);
    return std::make_pair(z.p10, z.p01);
  });
  mod.def("passing_oracle", [](std::int64_t n, std::int64_t m) { return report_dict(oracle::passing_oracle(n, m)); });
  mod.def("blocking_oracle", [](std::int64_t n, std::int64_t m) { return report_dict(oracle::blocking_oracle(n, m)); });
  mod.def("exact_measurement_dist", [](const PetriNet& net) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& t : oracle::exact_measurement_dist(net)) out.emplace_back(net.transition(t.transition).id, t.probability);
    return out;
  });

  mod.def(
      "check_invariant",
      [](const PetriNet& net, const std::string& predicate, std::size_t max_states) {
        const MarkingPredicate pred = parse_predicate(predicate);
        pred.validate(net);
        const ReachabilityGraph g = reachability_graph(net, max_states);
        const InvariantResult r = check_invariant(net, g, pred);
        py::dict d;
        d["holds"] = r.holds;
        d["states"] = g.nodes.size();
        d["quiescent"] = g.quiescent().size();
        d["edges"] = g.edges.size();
        std::vector<std::string> path;
        for (TransitionId t : r.path) path.push_back(net.transition(t).id);
        d["path"] = path;
        return d;
      },
      py::arg("net"), py::arg("predicate"), py::arg("max_states") = 100000);

  mod.def(
      "empirical_distribution",
      [](const models::ModelNet& m, std::uint64_t runs, std::uint64_t seed) {
        const Distribution d = empirical_distribution(m.net, m.mapping, runs, seed);
        std::map<std::string, std::uint64_t> out;
        for (const auto& o : d.outcomes) out[o.outcome] = o.count;
        return out;
      },
      py::arg("model"), py::arg("runs"), py::arg("seed") = 0);

  mod.def("load", [](const std::string& text) {
    netfile::NetDocument doc = netfile::load(text);
    return models::ModelNet{std::move(doc.net), doc.mapping.value_or(QuantumMapping{})};
  });
  mod.def("save", [](const models::ModelNet& m) { return netfile::save(m.net, m.mapping); });

  mod.def(
      "tables",
      [](const std::string& mode, std::vector<std::int64_t> n, std::vector<std::int64_t> m) {
        tables::TableOptions opt;
        opt.modes = {mode_of(mode)};
        opt.n_values = std::move(n);
        opt.m_values = std::move(m);
        return tables::to_csv(tables::build_tables(opt));
      },
      py::arg("mode"), py::arg("n") = std::vector<std::int64_t>{320, 500, 1250, 2500},
      py::arg("m") = std::vector<std::int64_t>{25, 50, 75, 100, 150});
}
