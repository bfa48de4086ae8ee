#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qpn/engine.hpp"
#include "qpn/net.hpp"
#include "qpn/quantum.hpp"

namespace qpn {

inline constexpr double kCompareEpsilon = 1e-9;

enum class CompareOp { Eq, Ne, Le, Ge, Lt, Gt };
std::string_view to_string(CompareOp op) noexcept;

/// Boolean formula over comparisons of weight expressions, e.g.
/// `m(p3)==m(p5) AND NOT m(p4)>1`.
class MarkingPredicate {
public:
  enum class Kind { Compare, And, Or, Not };

  static MarkingPredicate compare(WeightExpr lhs, CompareOp op, WeightExpr rhs);
  static MarkingPredicate all(MarkingPredicate a, MarkingPredicate b);
  static MarkingPredicate any(MarkingPredicate a, MarkingPredicate b);
  static MarkingPredicate negate(MarkingPredicate a);

  Kind kind() const noexcept { return node_->kind; }

  /// Comparisons use tolerance `epsilon`: a == b when |a - b| <= epsilon.
  bool eval(const PetriNet& net, const Marking& m, double epsilon = kCompareEpsilon) const;
  std::set<std::string> places() const;
  /// UndeclaredReference for a place the net lacks.
  void validate(const PetriNet& net) const;

  friend std::string format(const MarkingPredicate& p);

private:
  struct Node {
    Kind kind = Kind::Compare;
    CompareOp op = CompareOp::Eq;
    WeightExpr lhs;
    WeightExpr rhs;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };
  explicit MarkingPredicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static bool eval_node(const Node& n, const PlaceLookup& lookup, double epsilon);
  static void collect(const Node& n, std::set<std::string>& out);
  static std::string render(const Node& n, int parent);

  std::shared_ptr<const Node> node_;
};

std::string format(const MarkingPredicate& p);

/// Grammar, loosest first: OR, AND, NOT, then `expr OP expr` or a
/// parenthesized predicate. Keywords are case-insensitive.
MarkingPredicate parse_predicate(std::string_view text);

struct ReachEdge {
  std::size_t from = 0;
  TransitionId transition;
  std::size_t to = 0;
};

struct ReachabilityGraph {
  std::vector<Marking> nodes;  // BFS order, root first
  std::vector<ReachEdge> edges;
  /// Edge that first discovered each node; nullopt for the root.
  std::vector<std::optional<std::size_t>> discovered_by;

  std::vector<std::size_t> quiescent() const;
  /// Transitions along the BFS tree from the root to `node`.
  std::vector<TransitionId> path_to(std::size_t node) const;
};

/// Throws NotIntegerNet or StateExplosion (more than `max_states` nodes).
ReachabilityGraph reachability_graph(const PetriNet& net, std::size_t max_states);

struct InvariantResult {
  bool holds = true;
  std::size_t checked = 0;
  std::optional<std::size_t> counterexample;  // node index
  std::vector<TransitionId> path;
};

/// Evaluates `pred` on every node in BFS order and stops at the first failure.
InvariantResult check_invariant(const PetriNet& net, const ReachabilityGraph& graph,
                                const MarkingPredicate& pred,
                                double epsilon = kCompareEpsilon);

struct OutcomeFrequency {
  std::string outcome;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double std_error = 0.0;
};

struct Distribution {
  std::uint64_t runs = 0;
  std::vector<OutcomeFrequency> outcomes;  // sorted by outcome
  /// Runs whose final marking satisfied the predicate, when one was given.
  std::optional<std::uint64_t> predicate_hits;

  const OutcomeFrequency* find(std::string_view outcome) const;
};

/// Space-separated labels of the mapped places holding a nonzero value, in
/// mapping order; "-" when none does.
std::string outcome_key(const QuantumMapping& q, const PetriNet& net, const Marking& m,
                        double epsilon = kDefaultEpsilon);

/// Seed of run `index`: mix64(mix64(seed) + index).
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// `runs` BornRandom runs from the initial marking; other settings come from
/// `base`. Throws InvalidParams when runs == 0, and rethrows run errors.
Distribution empirical_distribution(const PetriNet& net, const QuantumMapping& q,
                                    std::uint64_t runs, std::uint64_t seed,
                                    const RunConfig& base = {},
                                    const MarkingPredicate* pred = nullptr);

struct ExpectedOutcome {
  std::string outcome;
  double probability = 0.0;
};

/// Exact outcome probabilities for nets whose only random choice is the
/// first step: each transition of the initial conflict group is fired, then
/// the run is finished deterministically. Throws like exact_measurement_dist.
std::vector<ExpectedOutcome> exact_outcome_distribution(const PetriNet& net,
                                                        const QuantumMapping& q,
                                                        const RunConfig& base = {});

struct IncidenceMatrix {
  std::vector<std::string> transitions;
  std::vector<std::string> places;
  std::vector<std::vector<double>> rows;  // rows[t][p]

  double at(std::size_t t, std::size_t p) const { return rows.at(t).at(p); }
};

/// Output minus Consume weight per (transition, place); Guard arcs add
/// nothing. Throws NonConstantWeights.
IncidenceMatrix incidence_matrix(const PetriNet& net);

/// Graphviz rendering; nodes show markings, edges transition ids, quiescent
/// nodes are double circles.
std::string to_dot(const ReachabilityGraph& graph, const PetriNet& net);

}  // namespace qpn
