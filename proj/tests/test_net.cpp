#include <cmath>
#include <cstring>
#include <numbers>
#include <map>

#include "doctest.h"
#include "qpn/engine.hpp"
#include "qpn/error.hpp"
#include "qpn/models.hpp"
#include "support.hpp"

using namespace qpn;

namespace {

ErrorCode build_error(const NetBuilder& b) {
  try {
    b.build();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidParams;
}

TransitionId tid(const PetriNet& net, const char* id) { return net.transition_id(id); }

const double kRoot3 = 1.0 / std::sqrt(3.0);

}  // namespace

TEST_CASE("builder validation") {
  CHECK(build_error(NetBuilder("empty")) == ErrorCode::InvalidNet);

  NetBuilder dup("d");
  dup.counter("p1").transition("p1");
  CHECK(build_error(dup) == ErrorCode::DuplicateId);

  NetBuilder neg("n");
  neg.counter("p1", -1);
  CHECK(build_error(neg) == ErrorCode::InvalidInitialMarking);

  NetBuilder frac("f");
  frac.counter("p1", 0.5);
  CHECK(build_error(frac) == ErrorCode::InvalidInitialMarking);

  NetBuilder nan("nan");
  nan.amplitude("p1", NAN);
  CHECK(build_error(nan) == ErrorCode::InvalidInitialMarking);

  NetBuilder amp("a");
  amp.amplitude("p1", -0.25);
  CHECK_NOTHROW(amp.build());

  NetBuilder arc("arc");
  arc.counter("p1").transition("t1").input("p1", "t9", "1");
  CHECK(build_error(arc) == ErrorCode::UndeclaredReference);

  NetBuilder weight("w");
  weight.counter("p1").transition("t1").output("t1", "p1", "m(p7)");
  CHECK(build_error(weight) == ErrorCode::UndeclaredReference);

  NetBuilder drain("drain");
  drain.amplitude("p1").amplitude("p2").transition("t1").input("p1", "t1", "m(p2)", ArcKind::Drain);
  CHECK(build_error(drain) == ErrorCode::InvalidNet);

  NetBuilder deposit("dep");
  deposit.counter("p1").transition("t1").input("p1", "t1", "1", ArcKind::Deposit);
  CHECK(build_error(deposit) == ErrorCode::InvalidNet);

  NetBuilder only_places("only");
  only_places.counter("p1", 2);
  const PetriNet net = only_places.build();
  CHECK(net.transition_count() == 0);
  CHECK(net.initial_marking() == Marking{2});
}

TEST_CASE("ids and lookups") {
  const auto mn = models::measurement_net();
  const PetriNet& net = mn.net;
  CHECK(net.place_count() == 4);
  CHECK(net.transition_count() == 3);
  CHECK(net.arc_count() == 6);
  CHECK(net.place_id("p3").index == 2);
  CHECK(net.transition_id("t3").index == 2);
  CHECK_FALSE(net.find_place("p9"));
  CHECK_THROWS_AS(net.place_id("p9"), Error);
  CHECK(net.initial_marking() == Marking{1, 0, 0, 0});
}

TEST_CASE("enablement") {
  const auto mn = models::measurement_net();
  const PetriNet& net = mn.net;
  CHECK(is_enabled(net, net.initial_marking(), tid(net, "t1")));
  CHECK_FALSE(is_enabled(net, Marking(4), tid(net, "t1")));
  CHECK_THROWS_AS(is_enabled(net, Marking(3), tid(net, "t1")), Error);

  const PetriNet ent = models::entanglement_net();
  CHECK(enabled_transitions(ent, ent.initial_marking()).size() == 4);

  // Consume threshold with epsilon slack, Guard leaves tokens, Drain needs |m| > eps.
  NetBuilder b("kinds");
  b.amplitude("a", 0.5).counter("c", 2).amplitude("z", 0.0).transition("t_guard").transition("t_drain").transition("t_neg");
  b.input("c", "t_guard", "2", ArcKind::Guard).output("t_guard", "a", "1");
  b.input("z", "t_drain", "m(z)", ArcKind::Drain);
  b.input("a", "t_neg", "-1");
  const PetriNet k = b.build();
  const Marking m0 = k.initial_marking();
  CHECK(is_enabled(k, m0, tid(k, "t_guard")));
  CHECK(fire(k, m0, tid(k, "t_guard")) == Marking{1.5, 2, 0});
  CHECK_FALSE(is_enabled(k, m0, tid(k, "t_drain")));
  CHECK(is_enabled(k, Marking{0.5, 2, -1e-6}, tid(k, "t_drain")));
  CHECK_FALSE(is_enabled(k, Marking{0.5, 2, 1e-13}, tid(k, "t_drain")));
  CHECK_FALSE(is_enabled(k, m0, tid(k, "t_neg")));

  NetBuilder eps("eps");
  eps.amplitude("a", 1.0 - 1e-13).transition("t").input("a", "t", "1");
  const PetriNet e = eps.build();
  CHECK(is_enabled(e, e.initial_marking(), TransitionId{0}));
  CHECK_FALSE(is_enabled(e, e.initial_marking(), TransitionId{0}, 1e-14));
}

TEST_CASE("evaluation errors surface instead of disabling") {
  NetBuilder b("div");
  b.counter("p", 1).transition("t").input("p", "t", "1/(m(p)-1)");
  const PetriNet net = b.build();
  try {
    is_enabled(net, net.initial_marking(), TransitionId{0});
    FAIL("expected DivisionByZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionByZero);
  }
}

TEST_CASE("fire") {
  const auto mn = models::measurement_net();
  const Marking m1 = fire(mn.net, mn.net.initial_marking(), tid(mn.net, "t1"));
  CHECK(m1.at(0) == 0);
  CHECK(m1.at(1) == doctest::Approx(kRoot3).epsilon(1e-15));
  CHECK(m1.at(2) == 0);
  CHECK(m1.at(3) == 0);
  CHECK_THROWS_AS(fire(mn.net, m1, tid(mn.net, "t2")), Error);

  const PetriNet ent = models::entanglement_net();
  CHECK(fire(ent, ent.initial_marking(), tid(ent, "t2")) == Marking{0, 1, 0, 1, 0, 1});
  CHECK(fire(ent, ent.initial_marking(), tid(ent, "t1")) == Marking{0, 1, 1, 0, 1, 0});

  NetBuilder zero("zero");
  zero.counter("p", 3).amplitude("q", 0.25).transition("t").input("p", "t", "2").output("t", "q", "0");
  const PetriNet z = zero.build();
  CHECK(fire(z, z.initial_marking(), TransitionId{0}) == Marking{1, 0.25});
}

TEST_CASE("counter violations") {
  NetBuilder b("cv");
  b.counter("c", 1).amplitude("a", 0.3).transition("t").input("c", "t", "1").output("t", "c", "m(a)");
  const PetriNet net = b.build();
  try {
    fire(net, net.initial_marking(), TransitionId{0});
    FAIL("expected CounterViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CounterViolation);
  }

  NetBuilder neg("neg");
  neg.counter("c", 1).transition("t").input("c", "t", "1").output("t", "c", "-3");
  const PetriNet n = neg.build();
  CHECK_THROWS_AS(fire(n, n.initial_marking(), TransitionId{0}), Error);

  // Within tolerance the counter snaps to the integer.
  NetBuilder snap("snap");
  snap.counter("c", 1).transition("t").input("c", "t", "1").output("t", "c", "2+1e-11");
  const PetriNet s = snap.build();
  CHECK(fire(s, s.initial_marking(), TransitionId{0}) == Marking{2});
}

TEST_CASE("conflict groups") {
  const auto mn = models::measurement_net();
  auto g = conflict_groups(mn.net, mn.net.initial_marking());
  REQUIRE(g.size() == 1);
  CHECK(g[0].size() == 3);

  const PetriNet ent = models::entanglement_net();
  g = conflict_groups(ent, ent.initial_marking());
  REQUIRE(g.size() == 2);
  CHECK(g[0] == std::vector<TransitionId>{TransitionId{0}, TransitionId{1}});
  CHECK(g[1] == std::vector<TransitionId>{TransitionId{2}, TransitionId{3}});

  // Sharing only a guard keeps transitions apart; chains of shared inputs merge.
  NetBuilder b("g");
  b.counter("s", 1).counter("x", 1).counter("y", 1);
  b.transition("t1").transition("t2").transition("t3");
  b.input("s", "t1", "1", ArcKind::Guard).input("s", "t2", "1", ArcKind::Guard);
  b.input("x", "t1", "1").input("x", "t3", "1").input("y", "t3", "1");
  const PetriNet net = b.build();
  g = conflict_groups(net, net.initial_marking());
  REQUIRE(g.size() == 2);
  CHECK(g[0] == std::vector<TransitionId>{TransitionId{0}, TransitionId{2}});
  CHECK(g[1] == std::vector<TransitionId>{TransitionId{1}});
}

TEST_CASE("deterministic priority") {
  NetBuilder b("prio");
  b.counter("p", 1).counter("a").counter("b").counter("c");
  b.transition("t1", 2).transition("t2", 1).transition("t3", 1);
  for (const char* t : {"t1", "t2", "t3"}) b.input("p", t, "1");
  b.output("t1", "a", "1").output("t2", "b", "1").output("t3", "c", "1");
  const PetriNet net = b.build();
  Rng rng(0);
  auto f = step(net, net.initial_marking(), RunConfig{}, rng);
  REQUIRE(f);
  CHECK(f->transition == TransitionId{1});

  RunConfig unique;
  unique.require_unique = true;
  try {
    run(net, net.initial_marking(), unique);
    FAIL("expected NondeterministicStep");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NondeterministicStep);
    CHECK(e.step() == 1u);
  }
}

TEST_CASE("born policy picks the group of the first-ranked transition") {
  NetBuilder b("born");
  b.counter("x", 1).counter("y", 1).amplitude("out");
  b.transition("t1").transition("t2").transition("t3");
  b.input("y", "t1", "1").output("t1", "out", "0.6");
  b.input("x", "t2", "1").output("t2", "out", "0.6");
  b.input("x", "t3", "1").output("t3", "out", "0.8");
  const PetriNet net = b.build();
  RunConfig cfg;
  cfg.policy = Policy::BornRandom;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    CHECK(step(net, net.initial_marking(), cfg, rng)->transition == TransitionId{0});
  }
  CHECK(born_weight(net, net.initial_marking(), TransitionId{2}) == doctest::Approx(0.64));

  NetBuilder z("zero");
  z.counter("x", 1).transition("t1").transition("t2").input("x", "t1", "1").input("x", "t2", "1");
  const PetriNet zn = z.build();
  Rng rng(1);
  try {
    step(zn, zn.initial_marking(), cfg, rng);
    FAIL("expected ZeroWeightGroup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroWeightGroup);
  }
}

TEST_CASE("born frequencies on the measurement net within 4 sigma") {
  const auto mn = models::measurement_net();
  RunConfig cfg;
  cfg.policy = Policy::BornRandom;
  const int runs = 100000;
  std::map<std::uint32_t, int> counts;
  Rng rng(12345);
  for (int i = 0; i < runs; ++i) {
    const auto f = step(mn.net, mn.net.initial_marking(), cfg, rng);
    ++counts[f->transition.index];
  }
  const double p = 1.0 / 3.0;
  const double sigma = std::sqrt(p * (1 - p) / runs);
  for (std::uint32_t t = 0; t < 3; ++t) {
    CHECK(std::abs(counts[t] / double(runs) - p) <= 4 * sigma);
  }
}

TEST_CASE("runs") {
  const PetriNet ent = models::entanglement_net();
  const Trace tr = run(ent, ent.initial_marking(), RunConfig{});
  CHECK(tr.status == TerminalStatus::Quiescent);
  CHECK(tr.steps.size() == 2);
  CHECK(tr.final_marking() == Marking{0, 0, 2, 0, 2, 0});

  const auto z = models::zeno_net({4, 2, 1});
  const Trace zt = run(z.net, z.net.initial_marking(), RunConfig{});
  const double p11 = zt.final_marking()[z.net.place_id("p11")];
  CHECK(std::abs(p11 * p11 - std::pow(std::cos(std::numbers::pi / 8), 8)) <= 1e-12);

  NetBuilder none("none");
  none.counter("p", 1);
  const PetriNet n = none.build();
  const Trace nt = run(n, n.initial_marking(), RunConfig{});
  CHECK(nt.steps.empty());
  CHECK(nt.status == TerminalStatus::Quiescent);

  NetBuilder loop("loop");
  loop.counter("p", 1).transition("t").input("p", "t", "1").output("t", "p", "1");
  const PetriNet l = loop.build();
  RunConfig lim;
  lim.max_steps = 5;
  const Trace lt = run(l, l.initial_marking(), lim);
  CHECK(lt.status == TerminalStatus::StepLimit);
  CHECK(lt.steps.size() == 5);
  const RunSummary ls = run_summary(l, l.initial_marking(), lim);
  CHECK(ls.firings == 5);
  CHECK(ls.status == TerminalStatus::StepLimit);

  RunConfig bad;
  bad.max_steps = 0;
  CHECK_THROWS_AS(run(l, l.initial_marking(), bad), Error);
  bad.max_steps = 1;
  bad.epsilon = 0;
  CHECK_THROWS_AS(run(l, l.initial_marking(), bad), Error);
}

TEST_CASE("run errors carry the step index") {
  NetBuilder b("late");
  b.counter("c", 3).amplitude("a", 1).transition("t");
  b.input("c", "t", "1").output("t", "a", "1/(m(c)-1)");
  const PetriNet net = b.build();
  try {
    run(net, net.initial_marking(), RunConfig{});
    FAIL("expected DivisionByZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionByZero);
    CHECK(e.step() == 3u);
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
}

TEST_CASE("property: firing is atomic") {
  Rng rng(99);
  for (int n = 0; n < 200; ++n) {
    const PetriNet net = testing::random_net(rng, 8, 5);
    const Marking m = net.initial_marking();
    for (TransitionId t : enabled_transitions(net, m)) {
      // Reference: every weight evaluated on m first, then applied.
      std::map<std::string, double> before;
      for (const auto& p : net.places()) before[p.id] = m[net.place_id(p.id)];
      std::vector<double> expect(m.values().begin(), m.values().end());
      for (const ArcDecl& a : net.arcs()) {
        if (a.transition != net.transition(t).id) continue;
        const double w = eval(a.weight, before);
        double& cell = expect[net.place_id(a.place).index];
        if (!a.input) {
          cell += w;
        } else if (a.kind == ArcKind::Consume) {
          cell -= w;
        } else if (a.kind == ArcKind::Drain) {
          cell = 0.0;
        }
      }
      Marking got;
      try {
        got = fire(net, m, t);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CounterViolation);
        continue;
      }
      for (std::size_t i = 0; i < expect.size(); ++i) CHECK(testing::near(got.at(i), expect[i], 1e-12));
    }
  }
}

TEST_CASE("property: deposits add up") {
  // Two transitions depositing into the same place, fired in sequence.
  NetBuilder b("add");
  b.counter("s1", 1).counter("s2", 1).amplitude("p", 0.3).amplitude("q", -0.2);
  b.transition("t1").transition("t2");
  b.input("s1", "t1", "1").output("t1", "p", "cos(m(q))*m(p)");
  b.input("s2", "t2", "1").output("t2", "p", "m(q)-m(p)/2");
  const PetriNet net = b.build();
  const Marking m0 = net.initial_marking();
  const auto t1 = TransitionId{0}, t2 = TransitionId{1};
  const Marking a = fire(net, fire(net, m0, t1), t2);
  const double p0 = 0.3, q = -0.2;
  const double d1 = std::cos(q) * p0;
  const double d2 = q - (p0 + d1) / 2;
  CHECK(a.at(2) == doctest::Approx(p0 + d1 + d2).epsilon(1e-15));

  NetBuilder c("const");
  c.counter("s1", 1).counter("s2", 1).amplitude("p", 0.3);
  c.transition("t1").transition("t2");
  c.input("s1", "t1", "1").output("t1", "p", "0.125");
  c.input("s2", "t2", "1").output("t2", "p", "-0.5");
  const PetriNet cn = c.build();
  const Marking x = fire(cn, fire(cn, cn.initial_marking(), t1), t2);
  const Marking y = fire(cn, fire(cn, cn.initial_marking(), t2), t1);
  CHECK(x == y);
}

TEST_CASE("property: seeded runs are bit-reproducible") {
  const auto mn = models::measurement_net();
  const PetriNet ent = models::entanglement_net();
  Rng seeds(5);
  for (int i = 0; i < 50; ++i) {
    RunConfig cfg;
    cfg.policy = Policy::BornRandom;
    cfg.seed = seeds.next();
    for (const PetriNet* net : {&mn.net, &ent}) {
      const Trace a = run(*net, net->initial_marking(), cfg);
      const Trace b = run(*net, net->initial_marking(), cfg);
      REQUIRE(a.steps.size() == b.steps.size());
      for (std::size_t k = 0; k < a.steps.size(); ++k) {
        CHECK(a.steps[k].transition == b.steps[k].transition);
        CHECK(std::memcmp(a.steps[k].marking.values().data(), b.steps[k].marking.values().data(),
                          sizeof(double) * a.steps[k].marking.size()) == 0);
      }
    }
  }
}

TEST_CASE("property: traces replay through fire") {
  Rng rng(4);
  RunConfig cfg;
  cfg.policy = Policy::BornRandom;
  cfg.max_steps = 50;
  for (int n = 0; n < 50; ++n) {
    const PetriNet net = testing::random_net(rng, 6, 4);
    cfg.seed = rng.next();
    Trace tr;
    try {
      tr = run(net, net.initial_marking(), cfg);
    } catch (const Error&) {
      continue;
    }
    Marking m = tr.initial;
    for (const auto& s : tr.steps) {
      m = fire(net, m, s.transition);
      CHECK(m == s.marking);
    }
  }
}

TEST_CASE("rng") {
  Rng a(7), b(7), c(8);
  CHECK(a.next() == b.next());
  CHECK(a.next() != c.next());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(mix64(0) == 0);
  CHECK(mix64(1) != mix64(2));
  CHECK(parse_policy("born") == Policy::BornRandom);
  CHECK(parse_policy("det") == Policy::DeterministicPriority);
  CHECK_FALSE(parse_policy("random"));
}
