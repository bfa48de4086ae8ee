#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qpn/engine.hpp"
#include "qpn/expr.hpp"
#include "qpn/net.hpp"

namespace qpn::testing {

/// Random tree over `places`. Depth-bounded; constants are small and
/// non-negative so negation shows up only as Negate nodes.
inline WeightExpr random_expr(Rng& rng, const std::vector<std::string>& places, int depth) {
  const auto pick = [&](std::uint64_t n) { return rng.next() % n; };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(places.empty() ? 2 : 3)) {
      case 0: {
        static const double values[] = {0, 1, 2, 3, 0.5, 1.25, 1e-3, 6.02e23, 0.1, 7};
        return WeightExpr::constant(values[pick(10)]);
      }
      case 1: return WeightExpr::pi();
      default: return WeightExpr::mark(places[pick(places.size())]);
    }
  }
  switch (pick(10)) {
    case 0: return WeightExpr::negate(random_expr(rng, places, depth - 1));
    case 1: return WeightExpr::call(ExprKind::Cos, random_expr(rng, places, depth - 1));
    case 2: return WeightExpr::call(ExprKind::Sin, random_expr(rng, places, depth - 1));
    case 3: return WeightExpr::call(ExprKind::Sqrt, random_expr(rng, places, depth - 1));
    default: {
      static const ExprKind ops[] = {ExprKind::Add, ExprKind::Subtract, ExprKind::Multiply,
                                     ExprKind::Divide, ExprKind::Power, ExprKind::Add};
      return WeightExpr::binary(ops[pick(6)], random_expr(rng, places, depth - 1),
                                random_expr(rng, places, depth - 1));
    }
  }
}

/// Random net whose amplitude arcs carry marking-dependent weights built
/// from well-behaved pieces (no division, no sqrt of negatives).
inline PetriNet random_net(Rng& rng, int places, int transitions) {
  NetBuilder b("random");
  std::vector<std::string> amps;
  for (int i = 0; i < places; ++i) {
    const std::string id = "p" + std::to_string(i);
    if (i % 2 == 0) {
      b.counter(id, static_cast<double>(rng.next() % 3));
    } else {
      b.amplitude(id, rng.uniform() * 2.0 - 1.0);
      amps.push_back(id);
    }
  }
  for (int t = 0; t < transitions; ++t) {
    const std::string id = "t" + std::to_string(t);
    b.transition(id, static_cast<int>(rng.next() % 3));
    const std::string src = "p" + std::to_string(2 * (rng.next() % ((places + 1) / 2)));
    b.input(src, id, "1");
    for (int k = 0; k < 2; ++k) {
      const std::string dst = amps[rng.next() % amps.size()];
      const std::string a = amps[rng.next() % amps.size()];
      const std::string c = amps[rng.next() % amps.size()];
      b.output(id, dst, "cos(m(" + a + "))*m(" + c + ")-sin(" + std::to_string(t) + "*pi/7)*m(" + dst + ")");
    }
    if (rng.next() % 2) {
      const std::string dst = "p" + std::to_string(2 * (rng.next() % ((places + 1) / 2)));
      b.output(id, dst, "1");
    }
  }
  return b.build();
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace qpn::testing
