#include "qpn/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "expr_parser.hpp"
#include "qpn/error.hpp"
#include "qpn/oracle.hpp"

namespace qpn {

std::string_view to_string(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
  }
  return "?";
}

MarkingPredicate MarkingPredicate::compare(WeightExpr lhs, CompareOp op, WeightExpr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Compare;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return MarkingPredicate(std::move(n));
}

MarkingPredicate MarkingPredicate::all(MarkingPredicate a, MarkingPredicate b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return MarkingPredicate(std::move(n));
}

MarkingPredicate MarkingPredicate::any(MarkingPredicate a, MarkingPredicate b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return MarkingPredicate(std::move(n));
}

MarkingPredicate MarkingPredicate::negate(MarkingPredicate a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->a = std::move(a.node_);
  return MarkingPredicate(std::move(n));
}

bool MarkingPredicate::eval_node(const Node& n, const PlaceLookup& lookup, double epsilon) {
  switch (n.kind) {
    case Kind::And: return eval_node(*n.a, lookup, epsilon) && eval_node(*n.b, lookup, epsilon);
    case Kind::Or: return eval_node(*n.a, lookup, epsilon) || eval_node(*n.b, lookup, epsilon);
    case Kind::Not: return !eval_node(*n.a, lookup, epsilon);
    case Kind::Compare: break;
  }
  const double l = qpn::eval(n.lhs, lookup);
  const double r = qpn::eval(n.rhs, lookup);
  switch (n.op) {
    case CompareOp::Eq: return std::abs(l - r) <= epsilon;
    case CompareOp::Ne: return std::abs(l - r) > epsilon;
    case CompareOp::Le: return l <= r + epsilon;
    case CompareOp::Ge: return l >= r - epsilon;
    case CompareOp::Lt: return l < r - epsilon;
    case CompareOp::Gt: return l > r + epsilon;
  }
  return false;
}

bool MarkingPredicate::eval(const PetriNet& net, const Marking& m, double epsilon) const {
  return eval_node(*node_, [&](const std::string& id) { return m[net.place_id(id)]; }, epsilon);
}

void MarkingPredicate::collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::Compare) {
    for (const auto& p : free_places(n.lhs)) out.insert(p);
    for (const auto& p : free_places(n.rhs)) out.insert(p);
    return;
  }
  collect(*n.a, out);
  if (n.b) collect(*n.b, out);
}

std::set<std::string> MarkingPredicate::places() const {
  std::set<std::string> out;
  collect(*node_, out);
  return out;
}

void MarkingPredicate::validate(const PetriNet& net) const {
  for (const auto& p : places()) {
    if (!net.find_place(p)) {
      throw Error(ErrorCode::UndeclaredReference, "predicate reads undeclared place '" + p + "'");
    }
  }
}

// Precedence: 1 OR, 2 AND, 3 NOT, 4 comparison.
std::string MarkingPredicate::render(const Node& n, int parent) {
  std::string s;
  int own = 4;
  switch (n.kind) {
    case Kind::Compare:
      s = format(n.lhs) + " " + std::string(to_string(n.op)) + " " + format(n.rhs);
      break;
    case Kind::Not:
      own = 3;
      s = "NOT " + render(*n.a, 3);
      break;
    case Kind::And:
      own = 2;
      s = render(*n.a, 2) + " AND " + render(*n.b, 3);
      break;
    case Kind::Or:
      own = 1;
      s = render(*n.a, 1) + " OR " + render(*n.b, 2);
      break;
  }
  return own < parent ? "(" + s + ")" : s;
}

std::string format(const MarkingPredicate& p) { return MarkingPredicate::render(*p.node_, 0); }

namespace {

bool is_keyword(const detail::Token& t, std::string_view word) {
  if (t.kind != detail::Tok::Ident || t.text.size() != word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != word[i]) return false;
  }
  return true;
}

class PredicateParser {
public:
  explicit PredicateParser(std::string_view text) : p_(detail::tokenize(text)) {}

  MarkingPredicate parse() {
    MarkingPredicate out = disjunction();
    p_.expect_end();
    return out;
  }

private:
  MarkingPredicate disjunction() {
    MarkingPredicate out = conjunction();
    while (is_keyword(p_.peek(), "OR")) {
      p_.advance();
      out = MarkingPredicate::any(std::move(out), conjunction());
    }
    return out;
  }

  MarkingPredicate conjunction() {
    MarkingPredicate out = negation();
    while (is_keyword(p_.peek(), "AND")) {
      p_.advance();
      out = MarkingPredicate::all(std::move(out), negation());
    }
    return out;
  }

  MarkingPredicate negation() {
    if (is_keyword(p_.peek(), "NOT")) {
      p_.advance();
      return MarkingPredicate::negate(negation());
    }
    if (p_.peek().kind == detail::Tok::LParen) {
      // "(" may open a grouped predicate or an arithmetic operand.
      const std::size_t start = p_.mark();
      try {
        p_.advance();
        MarkingPredicate inner = disjunction();
        if (p_.accept(detail::Tok::RParen) && !is_comparison(p_.peek())) return inner;
      } catch (const Error&) {
      }
      p_.reset(start);
    }
    return comparison();
  }

  static bool is_comparison(const detail::Token& t) {
    using detail::Tok;
    return t.kind == Tok::Eq || t.kind == Tok::Ne || t.kind == Tok::Le || t.kind == Tok::Ge ||
           t.kind == Tok::Lt || t.kind == Tok::Gt;
  }

  MarkingPredicate comparison() {
    using detail::Tok;
    WeightExpr lhs = p_.expr();
    const detail::Token& t = p_.peek();
    CompareOp op{};
    switch (t.kind) {
      case Tok::Eq: op = CompareOp::Eq; break;
      case Tok::Ne: op = CompareOp::Ne; break;
      case Tok::Le: op = CompareOp::Le; break;
      case Tok::Ge: op = CompareOp::Ge; break;
      case Tok::Lt: op = CompareOp::Lt; break;
      case Tok::Gt: op = CompareOp::Gt; break;
      default: p_.fail(t, "a comparison operator");
    }
    p_.advance();
    return MarkingPredicate::compare(std::move(lhs), op, p_.expr());
  }

  detail::ExprParser p_;
};

}  // namespace

MarkingPredicate parse_predicate(std::string_view text) { return PredicateParser(text).parse(); }

std::vector<std::size_t> ReachabilityGraph::quiescent() const {
  std::vector<bool> has_out(nodes.size(), false);
  for (const auto& e : edges) has_out[e.from] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!has_out[i]) out.push_back(i);
  }
  return out;
}

std::vector<TransitionId> ReachabilityGraph::path_to(std::size_t node) const {
  std::vector<TransitionId> path;
  for (auto e = discovered_by.at(node); e; e = discovered_by[edges[*e].from]) {
    path.push_back(edges[*e].transition);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

ReachabilityGraph reachability_graph(const PetriNet& net, std::size_t max_states) {
  oracle::require_integer_net(net);
  ReachabilityGraph g;
  std::map<Marking, std::size_t> index;
  auto visit = [&](Marking m, std::optional<std::size_t> via) -> std::size_t {
    auto it = index.find(m);
    if (it != index.end()) return it->second;
    if (g.nodes.size() >= max_states) {
      throw Error(ErrorCode::StateExplosion,
                  "more than " + std::to_string(max_states) + " reachable markings");
    }
    const std::size_t id = g.nodes.size();
    index.emplace(m, id);
    g.nodes.push_back(std::move(m));
    g.discovered_by.push_back(via);
    return id;
  };
  visit(net.initial_marking(), std::nullopt);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (TransitionId t : enabled_transitions(net, g.nodes[i])) {
      Marking next = fire(net, g.nodes[i], t);
      const std::size_t edge = g.edges.size();
      g.edges.push_back({i, t, 0});
      g.edges[edge].to = visit(std::move(next), edge);
    }
  }
  return g;
}

InvariantResult check_invariant(const PetriNet& net, const ReachabilityGraph& graph,
                                const MarkingPredicate& pred, double epsilon) {
  pred.validate(net);
  InvariantResult r;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    ++r.checked;
    if (!pred.eval(net, graph.nodes[i], epsilon)) {
      r.holds = false;
      r.counterexample = i;
      r.path = graph.path_to(i);
      return r;
    }
  }
  return r;
}

const OutcomeFrequency* Distribution::find(std::string_view outcome) const {
  for (const auto& o : outcomes) {
    if (o.outcome == outcome) return &o;
  }
  return nullptr;
}

std::string outcome_key(const QuantumMapping& q, const PetriNet& net, const Marking& m,
                        double epsilon) {
  std::string key;
  for (const auto& a : q.assignments) {
    if (std::abs(m[net.place_id(a.place)]) <= epsilon) continue;
    if (!key.empty()) key += ' ';
    key += a.label;
  }
  return key.empty() ? "-" : key;
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) + index);
}

Distribution empirical_distribution(const PetriNet& net, const QuantumMapping& q,
                                    std::uint64_t runs, std::uint64_t seed,
                                    const RunConfig& base, const MarkingPredicate* pred) {
  if (runs == 0) throw Error(ErrorCode::InvalidParams, "runs must be at least 1");
  q.validate(net);
  if (pred) pred->validate(net);
  RunConfig config = base;
  config.policy = Policy::BornRandom;
  config.validate();

  const Marking m0 = net.initial_marking();
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    config.seed = run_seed(seed, i);
    const RunSummary s = run_summary(net, m0, config);
    if (s.status == TerminalStatus::StepLimit) {
      throw Error(ErrorCode::InvalidParams,
                  "run " + std::to_string(i) + " hit the step limit of " +
                      std::to_string(config.max_steps));
    }
    ++counts[outcome_key(q, net, s.final_marking, config.epsilon)];
    if (pred && pred->eval(net, s.final_marking)) ++hits;
  }

  Distribution d;
  d.runs = runs;
  const double n = static_cast<double>(runs);
  for (const auto& [key, count] : counts) {
    const double f = static_cast<double>(count) / n;
    d.outcomes.push_back({key, count, f, std::sqrt(f * (1.0 - f) / n)});
  }
  if (pred) d.predicate_hits = hits;
  return d;
}

std::vector<ExpectedOutcome> exact_outcome_distribution(const PetriNet& net,
                                                        const QuantumMapping& q,
                                                        const RunConfig& base) {
  q.validate(net);
  RunConfig config = base;
  config.policy = Policy::DeterministicPriority;
  config.validate();
  const Marking m0 = net.initial_marking();
  std::map<std::string, double> acc;
  for (const auto& tp : oracle::exact_measurement_dist(net)) {
    const Marking after = fire(net, m0, tp.transition, config.epsilon);
    const RunSummary s = run_summary(net, after, config);
    acc[outcome_key(q, net, s.final_marking, config.epsilon)] += tp.probability;
  }
  std::vector<ExpectedOutcome> out;
  for (const auto& [key, p] : acc) out.push_back({key, p});
  return out;
}

IncidenceMatrix incidence_matrix(const PetriNet& net) {
  IncidenceMatrix c;
  for (const auto& t : net.transitions()) c.transitions.push_back(t.id);
  for (const auto& p : net.places()) c.places.push_back(p.id);
  c.rows.assign(net.transition_count(), std::vector<double>(net.place_count(), 0.0));
  auto zero = [](const std::string&) { return 0.0; };
  for (const ArcDecl& a : net.arcs()) {
    if (a.kind == ArcKind::Guard) continue;
    if (!a.weight.is_constant()) {
      throw Error(ErrorCode::NonConstantWeights,
                  "arc between " + a.place + " and " + a.transition + " has weight " +
                      format(a.weight));
    }
    const double w = eval(a.weight, zero);
    double& cell = c.rows[net.transition_id(a.transition).index][net.place_id(a.place).index];
    cell += a.input ? -w : w;
  }
  return c;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

}  // namespace

std::string to_dot(const ReachabilityGraph& graph, const PetriNet& net) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(net.name()) << "\" {\n";
  os << "  rankdir=LR;\n  node [shape=circle];\n";
  const auto quiet = graph.quiescent();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    std::string label = "(";
    const auto values = graph.nodes[i].values();
    for (std::size_t p = 0; p < values.size(); ++p) {
      if (p) label += ",";
      label += format_number(values[p]);
    }
    label += ")";
    os << "  n" << i << " [label=\"" << label << "\"";
    if (std::binary_search(quiet.begin(), quiet.end(), i)) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const auto& e : graph.edges) {
    os << "  n" << e.from << " -> n" << e.to << " [label=\""
       << dot_escape(net.transition(e.transition).id) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace qpn
