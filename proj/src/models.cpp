#include "qpn/models.hpp"

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "qpn/error.hpp"

namespace qpn::models {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

void check_k(double k) { require(k > 0.0 && std::isfinite(k), "k must be positive"); }

std::string str(std::int64_t v) { return std::to_string(v); }

/// `e` scaled by the token value whose Born weight k * S^2 is 1.
std::string scaled(const std::string& e, double k) {
  return k == 1.0 ? e : e + "*" + format_number(1.0 / std::sqrt(k));
}

std::string absorb(const std::string& sink, const std::string& amplitude) {
  return "sqrt(m(" + sink + ")^2+(" + amplitude + ")^2)-m(" + sink + ")";
}

std::string clear(const std::string& place) { return "-m(" + place + ")"; }

/// Hands out control places for a sequenced net. Names come from `pool`
/// (pre-declared counters) until it runs dry, then "c1", "c2", ... are added.
class ControlPlaces {
public:
  ControlPlaces(NetBuilder& b, std::vector<std::string> pool) : b_(b), pool_(std::move(pool)) {}

  std::string next() {
    if (used_ < pool_.size()) return pool_[used_++];
    std::string id = "c" + std::to_string(++invented_);
    b_.counter(id);
    return id;
  }


private:
  NetBuilder& b_;
  std::vector<std::string> pool_;
  std::size_t used_ = 0;
  int invented_ = 0;
};

/// Declares p1..pCount. Places listed in `amplitude` are Amplitude places,
/// everything else a Counter; the remaining counters not in `data` become
/// the control pool in numeric order.
std::vector<std::string> declare_places(NetBuilder& b, int count,
                                        const std::set<std::string>& amplitude,
                                        const std::set<std::string>& data,
                                        const std::map<std::string, double>& initial) {
  std::vector<std::string> pool;
  for (int i = 1; i <= count; ++i) {
    const std::string id = "p" + std::to_string(i);
    auto it = initial.find(id);
    const double init = it == initial.end() ? 0.0 : it->second;
    b.place(id, amplitude.count(id) ? PlaceKind::Amplitude : PlaceKind::Counter, init);
    if (!amplitude.count(id) && !data.count(id)) pool.push_back(id);
  }
  return pool;
}

void declare_transitions(NetBuilder& b, int count) {
  for (int i = 1; i <= count; ++i) b.transition("t" + std::to_string(i));
}

void link(NetBuilder& b, const std::string& from, const std::string& t, const std::string& to) {
  b.input(from, t, "1");
  if (!to.empty()) b.output(t, to, "1");
}

}  // namespace

ModelNet measurement_net() {
  NetBuilder b("measurement");
  b.counter("p1", 1).amplitude("p2").amplitude("p3").amplitude("p4");
  b.transition("t1").transition("t2").transition("t3");
  for (int i = 1; i <= 3; ++i) {
    const std::string t = "t" + std::to_string(i);
    b.input("p1", t, "1");
    b.output(t, "p" + std::to_string(i + 1), "1/sqrt(3)");
  }
  QuantumMapping q{1.0, {{"p2", "|0>"}, {"p3", "|1>"}, {"p4", "|2>"}}};
  return {b.build(), q};
}

PetriNet entanglement_net() {
  NetBuilder b("entanglement");
  b.counter("p1", 1).counter("p2", 1);
  for (int i = 3; i <= 6; ++i) b.counter("p" + std::to_string(i));
  declare_transitions(b, 4);
  b.input("p1", "t1", "1").input("p1", "t2", "1");
  b.input("p2", "t3", "1").input("p2", "t4", "1");
  for (const char* t : {"t1", "t3"}) b.output(t, "p3", "1").output(t, "p5", "1");
  for (const char* t : {"t2", "t4"}) b.output(t, "p4", "1").output(t, "p6", "1");
  return b.build();
}

QuantumMapping entanglement_mapping() {
  return QuantumMapping{1.0, {{"p3", "A|1>"}, {"p4", "A|0>"}, {"p5", "B|0>"}, {"p6", "B|1>"}}};
}

ModelNet zeno_net(const ProtocolParams& params) {
  require(params.n >= 2, "zeno net needs N >= 2");
  check_k(params.k);

  // p9 holds N for the weights, p7/p10 count the N-2 middle cycles left/done,
  // p2 carries the surviving amplitude and p6 its rotated copy.
  NetBuilder b("zeno");
  declare_places(b, 13, {"p2", "p6", "p11", "p12"}, {},
                 {{"p3", 1.0}, {"p9", static_cast<double>(params.n)}, {"p13", 1.0}});
  declare_transitions(b, 6);

  const std::string cos_t = "cos(pi/(2*m(p9)))";
  const std::string sin_t = "sin(pi/(2*m(p9)))";

  b.input("p3", "t1", "1");
  b.output("t1", "p7", "m(p9)-2").output("t1", "p4", "1");

  // First cycle injects the photon already rotated once.
  b.input("p4", "t2", "1").input("p13", "t2", "1");
  b.output("t2", "p2", scaled(cos_t, params.k)).output("t2", "p1", "1");

  // Middle cycle: p6 <- cos(theta) p2, then p2 <- p6.
  b.input("p1", "t3", "1").input("p7", "t3", "1");
  b.output("t3", "p6", cos_t + "*m(p2)").output("t3", "p10", "1").output("t3", "p5", "1");
  b.input("p5", "t4", "1").input("p2", "t4", "m(p2)", ArcKind::Drain);
  b.output("t4", "p8", "1");
  b.input("p8", "t5", "1").input("p6", "t5", "m(p6)", ArcKind::Drain);
  b.output("t5", "p2", "m(p6)").output("t5", "p1", "1");

  // Last cycle splits into the two final states.
  b.input("p1", "t6", "1").input("p10", "t6", "m(p9)-2");
  b.input("p2", "t6", "m(p2)", ArcKind::Drain);
  b.output("t6", "p11", cos_t + "*m(p2)").output("t6", "p12", sin_t + "*m(p2)");

  QuantumMapping q{params.k, {{"p11", "|10>"}, {"p12", "|01>"}}};
  return {b.build(), q};
}

ModelNet slaz_blocking_net(const ProtocolParams& params) {
  require(params.n >= 2 && params.m >= 2, "blocking net needs N >= 2 and M >= 2");
  check_k(params.k);
  const std::string N = str(params.n);
  const std::string M = str(params.m);
  const std::string cN = "cos(pi/(2*" + N + "))", sN = "sin(pi/(2*" + N + "))";
  const std::string cM = "cos(pi/(2*" + M + "))", sM = "sin(pi/(2*" + M + "))";

  // Left arm p2, right arm p21; p5/p11/p19 hold rotated values until copied
  // back. p6/p7 count outer cycles left/done, p22/p23 inner ones.
  NetBuilder b("slaz_blocking");
  const std::set<std::string> amps{"p2", "p5", "p11", "p19", "p21"};
  auto pool = declare_places(b, 23, amps, {"p6", "p7", "p22", "p23"},
                             {{"p1", 1.0}, {"p2", 1.0 / std::sqrt(params.k)},
                              {"p6", static_cast<double>(params.m)}});
  b.amplitude("p_bob");
  declare_transitions(b, 18);
  ControlPlaces ctl(b, pool);

  const std::string head = ctl.next();
  const std::string to_inner = ctl.next();
  const std::string inner = ctl.next();

  link(b, head, "t9", to_inner);
  b.input("p6", "t9", "1").output("t9", "p7", "1");

  const std::string done = ctl.next();
  link(b, head, "t10", done);
  b.input("p7", "t10", M);
  link(b, done, "t15", "");

  link(b, to_inner, "t7", inner);
  b.output("t7", "p22", N);

  // Inner cycle: p19 <- cos p21, Bob absorbs sin p21, p21 <- p19.
  const std::string i1 = ctl.next(), i2 = ctl.next(), i3 = ctl.next(), i4 = ctl.next();
  link(b, inner, "t11", i1);
  b.input("p22", "t11", "1").output("t11", "p23", "1");
  b.output("t11", "p19", cN + "*m(p21)");
  link(b, i1, "t17", i2);
  b.output("t17", "p_bob", absorb("p_bob", sN + "*m(p21)"));
  link(b, i2, "t12", i3);
  b.output("t12", "p21", clear("p21"));
  link(b, i3, "t18", i4);
  b.output("t18", "p21", "m(p19)");
  link(b, i4, "t16", inner);
  b.output("t16", "p19", clear("p19"));

  // Outer rotation of (p2, p21) by pi/2M.
  const std::string o1 = ctl.next(), o2 = ctl.next(), o3 = ctl.next(), o4 = ctl.next(),
                    o5 = ctl.next(), o6 = ctl.next(), o7 = ctl.next(), o8 = ctl.next();
  link(b, inner, "t4", o1);
  b.input("p23", "t4", N);
  link(b, o1, "t1", o2);
  b.output("t1", "p5", cM + "*m(p2)-" + sM + "*m(p21)");
  link(b, o2, "t6", o3);
  b.output("t6", "p11", sM + "*m(p2)+" + cM + "*m(p21)");
  link(b, o3, "t2", o4);
  b.output("t2", "p2", clear("p2"));
  link(b, o4, "t3", o5);
  b.output("t3", "p2", "m(p5)");
  link(b, o5, "t5", o6);
  b.output("t5", "p5", clear("p5"));
  link(b, o6, "t14", o7);
  b.output("t14", "p21", clear("p21"));
  link(b, o7, "t13", o8);
  b.output("t13", "p21", "m(p11)");
  link(b, o8, "t8", head);
  b.output("t8", "p11", clear("p11"));

  QuantumMapping q{params.k, {{"p2", kLabelD1}, {"p21", kLabelD2}, {"p_bob", kLabelAbsorbed}}};
  return {b.build(), q};
}

ModelNet slaz_passing_net(const ProtocolParams& params) {
  require(params.n >= 2 && params.m >= 2, "passing net needs N >= 2 and M >= 2");
  check_k(params.k);
  const std::string N = str(params.n);
  const std::string M = str(params.m);
  const std::string cN = "cos(pi/(2*" + N + "))", sN = "sin(pi/(2*" + N + "))";
  const std::string cM = "cos(pi/(2*" + M + "))", sM = "sin(pi/(2*" + M + "))";

  // As the blocking net, plus p31 (Bob's arm of the inner interferometer)
  // and its scratch copy p25. Inner counters step twice per cycle.
  NetBuilder b("slaz_passing");
  const std::set<std::string> amps{"p2", "p5", "p11", "p19", "p21", "p25", "p31"};
  auto pool = declare_places(b, 33, amps, {"p6", "p7", "p22", "p23"},
                             {{"p1", 1.0}, {"p2", 1.0 / std::sqrt(params.k)},
                              {"p6", static_cast<double>(params.m)}});
  b.amplitude("p_d3");
  declare_transitions(b, 26);
  ControlPlaces ctl(b, pool);

  const std::string head = ctl.next();
  const std::string done = ctl.next();
  link(b, head, "t10", done);
  b.input("p7", "t10", M);
  link(b, done, "t15", "");

  // Outer rotation first.
  const std::string o1 = ctl.next(), o2 = ctl.next(), o3 = ctl.next(), o4 = ctl.next(),
                    o5 = ctl.next(), o6 = ctl.next(), o7 = ctl.next(), o8 = ctl.next(),
                    o9 = ctl.next();
  link(b, head, "t9", o1);
  b.input("p6", "t9", "1").output("t9", "p7", "1");
  link(b, o1, "t1", o2);
  b.output("t1", "p5", cM + "*m(p2)-" + sM + "*m(p21)");
  link(b, o2, "t6", o3);
  b.output("t6", "p11", sM + "*m(p2)+" + cM + "*m(p21)");
  link(b, o3, "t2", o4);
  b.output("t2", "p2", clear("p2"));
  link(b, o4, "t3", o5);
  b.output("t3", "p2", "m(p5)");
  link(b, o5, "t5", o6);
  b.output("t5", "p5", clear("p5"));
  link(b, o6, "t14", o7);
  b.output("t14", "p21", clear("p21"));
  link(b, o7, "t13", o8);
  b.output("t13", "p21", "m(p11)");
  link(b, o8, "t8", o9);
  b.output("t8", "p11", clear("p11"));

  // Hand the right arm to the inner interferometer.
  const std::string h1 = ctl.next(), h2 = ctl.next(), inner = ctl.next();
  link(b, o9, "t7", h1);
  link(b, h1, "t17", h2);
  link(b, h2, "t19", inner);
  b.output("t19", "p22", "2*" + N);

  // Inner cycle: rotate (p21, p31) by pi/2N through p19/p25.
  const std::string i1 = ctl.next(), i2 = ctl.next(), i3 = ctl.next(), i4 = ctl.next(),
                    i5 = ctl.next(), i6 = ctl.next(), i7 = ctl.next();
  link(b, inner, "t11", i1);
  b.input("p22", "t11", "1").output("t11", "p23", "1");
  b.output("t11", "p19", cN + "*m(p21)-" + sN + "*m(p31)");
  link(b, i1, "t24", i2);
  b.input("p22", "t24", "1").output("t24", "p23", "1");
  b.output("t24", "p25", sN + "*m(p21)+" + cN + "*m(p31)");
  link(b, i2, "t12", i3);
  b.output("t12", "p21", clear("p21"));
  link(b, i3, "t18", i4);
  b.output("t18", "p21", "m(p19)");
  link(b, i4, "t16", i5);
  b.output("t16", "p19", clear("p19"));
  link(b, i5, "t21", i6);
  b.output("t21", "p31", clear("p31"));
  link(b, i6, "t23", i7);
  b.output("t23", "p31", "m(p25)");
  link(b, i7, "t25", inner);
  b.output("t25", "p25", clear("p25"));

  // Whatever reached Bob's arm is lost at D3.
  const std::string x1 = ctl.next(), x2 = ctl.next(), x3 = ctl.next();
  link(b, inner, "t4", x1);
  b.input("p23", "t4", "2*" + N);
  link(b, x1, "t26", x2);
  b.output("t26", "p_d3", absorb("p_d3", "m(p31)")).output("t26", "p31", clear("p31"));
  link(b, x2, "t20", x3);
  link(b, x3, "t22", head);

  QuantumMapping q{params.k, {{"p2", kLabelD1}, {"p21", kLabelD2}, {"p_d3", kLabelDiscarded}}};
  return {b.build(), q};
}

oracle::DetectionReport detection_report(const ModelNet& model, const Marking& final_marking) {
  const ProbabilityReport probs = probabilities(model.mapping, model.net, final_marking);
  oracle::DetectionReport r;
  for (const auto& e : probs.entries) {
    if (e.label == kLabelD1) r.d1 = e.value;
    if (e.label == kLabelD2) r.d2 = e.value;
    if (e.label == kLabelAbsorbed) r.absorbed = e.value;
    if (e.label == kLabelDiscarded) r.discarded = e.value;
  }
  return r;
}

std::string to_string(Mode mode) { return mode == Mode::Passing ? "passing" : "blocking"; }

ModelNet slaz_net(Mode mode, const ProtocolParams& params) {
  return mode == Mode::Passing ? slaz_passing_net(params) : slaz_blocking_net(params);
}

}  // namespace qpn::models
