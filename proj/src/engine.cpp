#include "qpn/engine.hpp"

#include <cmath>
#include <numeric>

#include "qpn/error.hpp"

namespace qpn {

std::string_view to_string(Policy p) noexcept {
  return p == Policy::DeterministicPriority ? "det" : "born";
}

std::optional<Policy> parse_policy(std::string_view text) noexcept {
  if (text == "det" || text == "deterministic") return Policy::DeterministicPriority;
  if (text == "born") return Policy::BornRandom;
  return std::nullopt;
}

std::string_view to_string(TerminalStatus s) noexcept {
  return s == TerminalStatus::Quiescent ? "quiescent" : "step-limit";
}

void RunConfig::validate() const {
  if (max_steps == 0) throw Error(ErrorCode::InvalidParams, "max_steps must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidParams, "epsilon must be positive");
  }
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::next() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

void check_dimension(const PetriNet& net, const Marking& m) {
  if (m.size() != net.place_count()) {
    throw Error(ErrorCode::DimensionMismatch, "marking has " + std::to_string(m.size()) +
                                                  " entries, net has " +
                                                  std::to_string(net.place_count()) + " places");
  }
}

void check_transition(const PetriNet& net, TransitionId t) {
  if (t.index >= net.transition_count()) {
    throw Error(ErrorCode::InvalidParams, "transition ordinal out of range");
  }
}

bool enabled_unchecked(const PetriNet& net, std::span<const double> m, TransitionId t,
                       double eps) {
  for (const auto& arc : net.inputs(t)) {
    const double have = m[arc.place.index];
    if (arc.kind == ArcKind::Drain) {
      if (!(std::abs(have) > eps)) return false;
      continue;
    }
    const double need = arc.compiled.eval(m);
    if (need < 0.0 || have < need - eps) return false;
  }
  return true;
}

// Applies t to `m` in place. Weights are all read from `snapshot` (which
// must hold the pre-fire marking) before anything is written.
void apply(const PetriNet& net, std::span<const double> snapshot, std::vector<double>& m,
           TransitionId t, std::vector<double>& scratch) {
  const auto& ins = net.inputs(t);
  const auto& outs = net.outputs(t);
  scratch.clear();
  for (const auto& arc : ins) {
    scratch.push_back(arc.kind == ArcKind::Drain ? 0.0 : arc.compiled.eval(snapshot));
  }
  for (const auto& arc : outs) scratch.push_back(arc.compiled.eval(snapshot));

  std::size_t k = 0;
  for (const auto& arc : ins) {
    const double w = scratch[k++];
    switch (arc.kind) {
      case ArcKind::Consume: m[arc.place.index] -= w; break;
      case ArcKind::Drain: m[arc.place.index] = 0.0; break;
      default: break;
    }
  }
  for (const auto& arc : outs) m[arc.place.index] += scratch[k++];

  auto settle = [&](PlaceId p) {
    double& v = m[p.index];
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteResult,
                  "place '" + net.place(p).id + "' became non-finite firing '" + net.transition(t).id + "'");
    }
    if (net.place(p).kind != PlaceKind::Counter) return;
    const double r = std::round(v);
    if (std::abs(v - r) > kIntegerTolerance || r < 0.0) {
      throw Error(ErrorCode::CounterViolation,
                  "counter place '" + net.place(p).id + "' would hold " + format_number(v) +
                      " after firing '" + net.transition(t).id + "'");
    }
    v = r == 0.0 ? 0.0 : r;
  };
  for (const auto& arc : ins) settle(arc.place);
  for (const auto& arc : outs) settle(arc.place);
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::vector<TransitionId>> group_enabled(const PetriNet& net,
                                                     const std::vector<TransitionId>& enabled) {
  UnionFind uf(enabled.size());
  std::vector<std::optional<std::uint32_t>> owner(net.place_count());
  for (std::uint32_t i = 0; i < enabled.size(); ++i) {
    for (const auto& arc : net.inputs(enabled[i])) {
      if (arc.kind == ArcKind::Guard) continue;
      auto& o = owner[arc.place.index];
      if (o) {
        uf.unite(*o, i);
      } else {
        o = i;
      }
    }
  }
  std::vector<std::vector<TransitionId>> groups;
  std::vector<std::optional<std::size_t>> slot(enabled.size());
  for (std::uint32_t i = 0; i < enabled.size(); ++i) {
    const std::uint32_t root = uf.find(i);
    if (!slot[root]) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[*slot[root]].push_back(enabled[i]);
  }
  return groups;
}

bool ranks_before(const PetriNet& net, TransitionId a, TransitionId b) {
  const int pa = net.transition(a).priority;
  const int pb = net.transition(b).priority;
  return pa != pb ? pa < pb : a.index < b.index;
}

// Chooses the transition to fire at `m`, or nullopt when quiescent.
std::optional<TransitionId> choose(const PetriNet& net, std::span<const double> m,
                                   const RunConfig& config, Rng& rng) {
  if (config.policy == Policy::DeterministicPriority && !config.require_unique) {
    std::optional<TransitionId> best;
    for (std::uint32_t i = 0; i < net.transition_count(); ++i) {
      const TransitionId t{i};
      if (best && !ranks_before(net, t, *best)) continue;
      if (enabled_unchecked(net, m, t, config.epsilon)) best = t;
    }
    return best;
  }

  std::vector<TransitionId> enabled;
  for (std::uint32_t i = 0; i < net.transition_count(); ++i) {
    if (enabled_unchecked(net, m, TransitionId{i}, config.epsilon)) enabled.push_back(TransitionId{i});
  }
  if (enabled.empty()) return std::nullopt;
  if (config.require_unique && enabled.size() != 1) {
    std::string names;
    for (auto t : enabled) names += (names.empty() ? "" : ", ") + net.transition(t).id;
    throw Error(ErrorCode::NondeterministicStep, "several transitions enabled: " + names);
  }
  TransitionId first = enabled.front();
  for (auto t : enabled) {
    if (ranks_before(net, t, first)) first = t;
  }
  if (config.policy == Policy::DeterministicPriority) return first;

  std::vector<TransitionId> group;
  for (auto& g : group_enabled(net, enabled)) {
    for (auto t : g) {
      if (t == first) group = g;
    }
  }
  const Marking snapshot(std::vector<double>(m.begin(), m.end()));
  std::vector<double> weights;
  double total = 0.0;
  for (auto t : group) {
    weights.push_back(born_weight(net, snapshot, t));
    total += weights.back();
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::ZeroWeightGroup, "every transition in the conflict group of '" +
                                                net.transition(first).id +
                                                "' has zero output weight");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    acc += weights[i];
    if (u < acc) return group[i];
  }
  // u landed on the rounding edge; take the last member with positive weight.
  for (std::size_t i = group.size(); i-- > 0;) {
    if (weights[i] > 0.0) return group[i];
  }
  return group.back();
}

template <typename OnFire>
TerminalStatus drive(const PetriNet& net, std::vector<double>& m, const RunConfig& config,
                     OnFire&& on_fire) {
  config.validate();
  Rng rng(config.seed);
  std::vector<double> snapshot(m.size());
  std::vector<double> scratch;
  for (std::uint64_t n = 1;; ++n) {
    std::optional<TransitionId> t;
    try {
      t = choose(net, m, config, rng);
      if (!t) return TerminalStatus::Quiescent;
      if (n > config.max_steps) return TerminalStatus::StepLimit;
      std::copy(m.begin(), m.end(), snapshot.begin());
      apply(net, snapshot, m, *t, scratch);
    } catch (const Error& e) {
      throw e.at_step(n);
    }
    on_fire(n, *t);
  }
}

}  // namespace

bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t, double epsilon) {
  check_dimension(net, m);
  check_transition(net, t);
  return enabled_unchecked(net, m.values(), t, epsilon);
}

std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m,
                                              double epsilon) {
  check_dimension(net, m);
  std::vector<TransitionId> out;
  for (std::uint32_t i = 0; i < net.transition_count(); ++i) {
    if (enabled_unchecked(net, m.values(), TransitionId{i}, epsilon)) out.push_back(TransitionId{i});
  }
  return out;
}

Marking fire(const PetriNet& net, const Marking& m, TransitionId t, double epsilon) {
  if (!is_enabled(net, m, t, epsilon)) {
    throw Error(ErrorCode::NotEnabled, "transition '" + net.transition(t).id + "' is not enabled");
  }
  std::vector<double> next(m.values().begin(), m.values().end());
  std::vector<double> scratch;
  apply(net, m.values(), next, t, scratch);
  return Marking(std::move(next));
}

std::vector<std::vector<TransitionId>> conflict_groups(const PetriNet& net, const Marking& m,
                                                       double epsilon) {
  return group_enabled(net, enabled_transitions(net, m, epsilon));
}

double born_weight(const PetriNet& net, const Marking& m, TransitionId t) {
  check_transition(net, t);
  double sum = 0.0;
  for (const auto& arc : net.outputs(t)) {
    const double w = arc.compiled.eval(m.values());
    sum += w * w;
  }
  return sum;
}

std::optional<Firing> step(const PetriNet& net, const Marking& m, const RunConfig& config,
                           Rng& rng) {
  config.validate();
  check_dimension(net, m);
  auto t = choose(net, m.values(), config, rng);
  if (!t) return std::nullopt;
  std::vector<double> next(m.values().begin(), m.values().end());
  std::vector<double> scratch;
  apply(net, m.values(), next, *t, scratch);
  return Firing{*t, Marking(std::move(next))};
}

Trace run(const PetriNet& net, const Marking& m0, const RunConfig& config) {
  check_dimension(net, m0);
  Trace trace;
  trace.initial = m0;
  std::vector<double> m(m0.values().begin(), m0.values().end());
  trace.status = drive(net, m, config, [&](std::uint64_t, TransitionId t) {
    trace.steps.push_back(Firing{t, Marking(m)});
  });
  return trace;
}

RunSummary run_summary(const PetriNet& net, const Marking& m0, const RunConfig& config,
                       const StepObserver& observer) {
  check_dimension(net, m0);
  RunSummary out;
  std::vector<double> m(m0.values().begin(), m0.values().end());
  out.status = drive(net, m, config, [&](std::uint64_t n, TransitionId t) {
    out.firings = n;
    if (observer) observer(n, Firing{t, Marking(m)});
  });
  out.final_marking = Marking(std::move(m));
  return out;
}

}  // namespace qpn
