#include "qpn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>

#include "qpn/error.hpp"

namespace qpn::oracle {

namespace {

void require_positive(std::int64_t v, std::int64_t min, const char* name) {
  if (v < min) {
    throw Error(ErrorCode::InvalidParams,
                std::string(name) + " must be at least " + std::to_string(min) + ", got " +
                    std::to_string(v));
  }
}

double half_pi_over(std::int64_t n) { return std::numbers::pi / (2.0 * static_cast<double>(n)); }

}  // namespace

ZenoProbabilities zeno_oracle(std::int64_t n) {
  require_positive(n, 1, "N");
  const double theta = half_pi_over(n);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double survive = std::pow(c, 2.0 * static_cast<double>(n - 1));
  return {survive * c * c, survive * s * s};
}

DetectionReport passing_oracle(std::int64_t n, std::int64_t m) {
  require_positive(n, 1, "N");
  require_positive(m, 1, "M");
  DetectionReport r;
  r.d1 = std::pow(std::cos(half_pi_over(m)), 2.0 * static_cast<double>(m));
  r.discarded = 1.0 - r.d1;
  return r;
}

DetectionReport blocking_oracle(std::int64_t n, std::int64_t m) {
  require_positive(n, 2, "N");
  require_positive(m, 2, "M");
  const double a = std::pow(std::cos(half_pi_over(n)), static_cast<double>(n));
  const double c = std::cos(half_pi_over(m));
  const double s = std::sin(half_pi_over(m));
  double left = 1.0;
  double right = 0.0;
  double absorbed = 0.0;
  for (std::int64_t cycle = 0; cycle < m; ++cycle) {
    absorbed += (1.0 - a * a) * right * right;
    const double l = c * left - s * a * right;
    const double r = s * left + c * a * right;
    left = l;
    right = r;
  }
  DetectionReport out;
  out.d1 = left * left;
  out.d2 = right * right;
  out.absorbed = absorbed;
  return out;
}

std::vector<TransitionProbability> exact_measurement_dist(const PetriNet& net) {
  const Marking m0 = net.initial_marking();
  auto lookup = [&](const std::string& id) { return m0[net.place_id(id)]; };

  // Enablement and grouping re-derived here from the declarations.
  std::vector<TransitionId> enabled;
  for (std::uint32_t i = 0; i < net.transition_count(); ++i) {
    bool ok = true;
    for (const ArcDecl& a : net.arcs()) {
      if (!a.input || a.transition != net.transitions()[i].id) continue;
      const double have = lookup(a.place);
      if (a.kind == ArcKind::Drain) {
        ok = ok && have != 0.0;
      } else {
        const double need = eval(a.weight, lookup);
        ok = ok && need >= 0.0 && have >= need;
      }
    }
    if (ok) enabled.push_back(TransitionId{i});
  }
  if (enabled.empty()) throw Error(ErrorCode::MultipleGroups, "no transition enabled initially");

  std::map<std::string, std::vector<std::size_t>> takers;
  for (std::size_t k = 0; k < enabled.size(); ++k) {
    for (const ArcDecl& a : net.arcs()) {
      if (a.input && a.kind != ArcKind::Guard && a.transition == net.transition(enabled[k]).id) {
        takers[a.place].push_back(k);
      }
    }
  }
  // Connectivity by repeated relaxation from the first enabled transition.
  std::vector<bool> reached(enabled.size(), false);
  reached[0] = true;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [place, ks] : takers) {
      bool any = false;
      for (auto k : ks) any = any || reached[k];
      if (!any) continue;
      for (auto k : ks) {
        if (!reached[k]) reached[k] = grew = true;
      }
    }
  }
  for (bool r : reached) {
    if (!r) throw Error(ErrorCode::MultipleGroups, "initial marking has more than one conflict group");
  }

  std::vector<TransitionProbability> out;
  double total = 0.0;
  for (auto t : enabled) {
    double w2 = 0.0;
    for (const ArcDecl& a : net.arcs()) {
      if (!a.input && a.transition == net.transition(t).id) {
        const double w = eval(a.weight, lookup);
        w2 += w * w;
      }
    }
    out.push_back({t, w2});
    total += w2;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroWeightGroup, "conflict group has zero output weight");
  for (auto& e : out) e.probability /= total;
  return out;
}

void require_integer_net(const PetriNet& net) {
  for (const auto& p : net.places()) {
    if (p.kind != PlaceKind::Counter) {
      throw Error(ErrorCode::NotIntegerNet, "place '" + p.id + "' holds amplitudes");
    }
  }
  for (const ArcDecl& a : net.arcs()) {
    if (a.kind == ArcKind::Drain) continue;
    const std::string where = a.input ? a.place + " -> " + a.transition : a.transition + " -> " + a.place;
    if (!a.weight.is_constant()) {
      throw Error(ErrorCode::NotIntegerNet, "arc " + where + " has a marking-dependent weight");
    }
    const double w = eval(a.weight, [](const std::string&) -> double { return 0.0; });
    if (w < 0.0 || w != std::round(w)) {
      throw Error(ErrorCode::NotIntegerNet, "arc " + where + " weight " + format(a.weight) +
                                                " is not a non-negative integer");
    }
  }
}

ReachSet bfs_reach(const PetriNet& net, std::size_t max_states) {
  require_integer_net(net);
  using State = std::vector<std::int64_t>;
  const std::size_t np = net.place_count();
  const std::size_t nt = net.transition_count();

  // take[t][p] consumed, need[t][p] required, put[t][p] deposited, drain[t][p].
  std::vector<State> take(nt, State(np, 0)), need(nt, State(np, 0)), put(nt, State(np, 0));
  std::vector<std::vector<bool>> drain(nt, std::vector<bool>(np, false));
  for (const ArcDecl& a : net.arcs()) {
    const std::size_t t = net.transition_id(a.transition).index;
    const std::size_t p = net.place_id(a.place).index;
    if (a.kind == ArcKind::Drain) {
      drain[t][p] = true;
      continue;
    }
    const auto w = static_cast<std::int64_t>(
        eval(a.weight, [](const std::string&) -> double { return 0.0; }));
    if (!a.input) {
      put[t][p] += w;
    } else {
      need[t][p] = std::max(need[t][p], w);
      if (a.kind == ArcKind::Consume) take[t][p] += w;
    }
  }

  State start(np);
  for (std::size_t p = 0; p < np; ++p) start[p] = static_cast<std::int64_t>(net.places()[p].initial);

  std::map<State, std::size_t> seen;
  std::vector<State> order;
  std::queue<std::size_t> frontier;
  auto visit = [&](State s) {
    if (seen.count(s) != 0) return;
    if (order.size() >= max_states) {
      throw Error(ErrorCode::StateExplosion,
                  "more than " + std::to_string(max_states) + " reachable markings");
    }
    seen.emplace(s, order.size());
    frontier.push(order.size());
    order.push_back(std::move(s));
  };
  visit(start);

  ReachSet out;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    bool any = false;
    for (std::size_t t = 0; t < nt; ++t) {
      const State& s = order[i];
      bool ok = true;
      for (std::size_t p = 0; p < np && ok; ++p) {
        ok = s[p] >= need[t][p] && s[p] >= take[t][p] && (!drain[t][p] || s[p] > 0);
      }
      if (!ok) continue;
      any = true;
      State next = s;
      for (std::size_t p = 0; p < np; ++p) {
        next[p] = (drain[t][p] ? 0 : next[p] - take[t][p]) + put[t][p];
      }
      visit(std::move(next));
    }
    if (!any) out.quiescent.push_back(i);
  }
  for (const State& s : order) {
    std::vector<double> v(s.begin(), s.end());
    out.markings.emplace_back(std::move(v));
  }
  std::sort(out.quiescent.begin(), out.quiescent.end());
  return out;
}

}  // namespace qpn::oracle
