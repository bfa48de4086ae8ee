#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qpn/error.hpp"
#include "qpn/models.hpp"
#include "qpn/netfile.hpp"
#include "support.hpp"

using namespace qpn;

namespace {

std::filesystem::path golden(const char* name) { return std::filesystem::path(QPN_GOLDEN_DIR) / name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Failure {
  ErrorCode code = ErrorCode::InvalidParams;
  std::size_t line = 0;
  std::size_t column = 0;
};

Failure failure(std::string_view text) {
  try {
    netfile::load(text);
  } catch (const Error& e) {
    Failure f{e.code()};
    if (e.position()) {
      f.line = e.position()->line;
      f.column = e.position()->column;
    }
    return f;
  }
  FAIL("expected a load error for:\n" << text);
  return {};
}

const char* const kHead = "net n\nplace p1 init=1 kind=counter\nplace p2 kind=amplitude\ntrans t1\n";

std::vector<models::ModelNet> zoo() {
  std::vector<models::ModelNet> out;
  out.push_back(models::measurement_net());
  out.push_back({models::entanglement_net(), models::entanglement_mapping()});
  out.push_back(models::zeno_net({4, 2, 1}));
  out.push_back(models::slaz_blocking_net({3, 2, 1}));
  out.push_back(models::slaz_passing_net({3, 2, 1}));
  return out;
}

}  // namespace

TEST_CASE("golden files match the builders") {
  const char* names[] = {"measurement.qpn", "entanglement.qpn", "zeno.qpn", "blocking.qpn", "passing.qpn"};
  const auto nets = zoo();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    INFO(names[i]);
    const netfile::NetDocument doc = netfile::load_file(golden(names[i]));
    CHECK(doc.net == nets[i].net);
    REQUIRE(doc.mapping);
    CHECK(*doc.mapping == nets[i].mapping);
    CHECK(doc.config.empty());
    CHECK(netfile::save(nets[i].net, nets[i].mapping) == slurp(golden(names[i])));
  }
}

TEST_CASE("hand-formatted input normalizes to the canonical text") {
  const std::string canonical = slurp(golden("measurement.qpn"));
  CHECK(netfile::save(netfile::load_file(golden("measurement_messy.qpn"))) == canonical);
  std::string crlf;
  for (char c : canonical) {
    if (c == '\n') crlf += "  \r";
    crlf += c;
  }
  CHECK(netfile::save(netfile::load(crlf)) == canonical);
}

TEST_CASE("load errors carry their line") {
  bool thrown = false;
  try {
    netfile::load_file(golden("broken.qpn"));
  } catch (const Error& e) {
    thrown = true;
    CHECK(e.code() == ErrorCode::UndeclaredReference);
    REQUIRE(e.position());
    CHECK(e.position()->line == 5);
    CHECK(std::string(e.what()).find("t9") != std::string::npos);
  }
  CHECK(thrown);
}

TEST_CASE("load errors") {
  CHECK(failure("").code == ErrorCode::SyntaxError);
  CHECK(failure("# only a comment\n").code == ErrorCode::SyntaxError);
  CHECK(failure("place p1 init=1 kind=counter\n").line == 1);

  const std::string h = kHead;
  const auto at = [&](const std::string& tail) { return failure(h + tail); };
  Failure f = at("place p1 kind=counter\n");
  CHECK(f.code == ErrorCode::DuplicateId);
  CHECK(f.line == 5);
  CHECK(f.column == 7);
  CHECK(at("trans p2\n").code == ErrorCode::DuplicateId);
  CHECK(at("place p3 init=-1 kind=counter\n").code == ErrorCode::InvalidInitialMarking);
  CHECK(at("place p3 init=0.5 kind=counter\n").code == ErrorCode::InvalidInitialMarking);
  CHECK(at("place p3 init=1.2.3 kind=counter\n").code == ErrorCode::MalformedNumber);
  CHECK(at("place p3 init=1 kind=qubit\n").code == ErrorCode::SyntaxError);
  CHECK(at("place p3 init=1 colour=red\n").code == ErrorCode::SyntaxError);
  CHECK(at("trans t2 priority=x\n").code == ErrorCode::MalformedNumber);
  CHECK(at("arc p1 -> t1\n").code == ErrorCode::SyntaxError);
  CHECK(at("arc p1 t1 w=\"1\"\n").code == ErrorCode::SyntaxError);
  CHECK(at("arc p1 -> t1 w=\"1\n").code == ErrorCode::SyntaxError);
  CHECK(at("arc p1 -> p2 w=\"1\"\n").code == ErrorCode::UndeclaredReference);
  CHECK(at("arc t1 -> p2 w=\"m(p2)\" kind=drain\n").code == ErrorCode::SyntaxError);
  CHECK(at("arc p2 -> t1 w=\"m(p1)\" kind=drain\n").code == ErrorCode::InvalidNet);
  CHECK(at("arc t1 -> p9 w=\"1\"\n").code == ErrorCode::UndeclaredReference);
  CHECK(at("arc t1 -> p2 w=\"m(p7)\"\n").code == ErrorCode::UndeclaredReference);
  CHECK(at("map p9 = \"x\"\n").code == ErrorCode::UndeclaredReference);
  CHECK(at("map p2 = \"x\"\nmap p2 = \"y\"\n").code == ErrorCode::DuplicateId);
  CHECK(at("k = 0\n").code == ErrorCode::InvalidParams);
  CHECK(at("config policy=chaos\n").code == ErrorCode::SyntaxError);
  CHECK(at("config max_steps=0\n").code == ErrorCode::InvalidParams);
  CHECK(at("net again\n").code == ErrorCode::SyntaxError);
  CHECK(at("frobnicate\n").code == ErrorCode::SyntaxError);

  // Weight errors point into the quoted expression.
  f = at("arc t1 -> p2 w=\"1 + * 2\"\n");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 5);
  CHECK(f.column == 21);
  f = at("arc t1 -> p2 w=\"tan(1)\"\n");
  CHECK(f.code == ErrorCode::UnknownFunction);
  CHECK(f.column == 17);
}

TEST_CASE("config and mapping round trip") {
  const std::string text = std::string(kHead) +
                           "arc p1 -> t1 w=\"1\"\narc t1 -> p2 w=\"-0.5\"\n"
                           "k = 1e-28\nmap p2 = \"a \\\"quoted\\\" label\"\n"
                           "config max_steps=500 policy=born seed=18446744073709551615 epsilon=1e-10\n";
  const netfile::NetDocument doc = netfile::load(text);
  REQUIRE(doc.mapping);
  CHECK(doc.mapping->k == 1e-28);
  CHECK(doc.mapping->assignments[0].label == "a \"quoted\" label");
  CHECK(*doc.config.max_steps == 500);
  CHECK(*doc.config.policy == Policy::BornRandom);
  CHECK(*doc.config.seed == 18446744073709551615ull);
  CHECK(*doc.config.epsilon == 1e-10);
  CHECK(netfile::load(netfile::save(doc)) == doc);

  RunConfig cfg;
  doc.config.apply(cfg);
  CHECK(cfg.max_steps == 500);
  CHECK(cfg.policy == Policy::BornRandom);

  netfile::ConfigOverrides partial;
  partial.seed = 4;
  RunConfig keep;
  keep.max_steps = 9;
  partial.apply(keep);
  CHECK(keep.seed == 4);
  CHECK(keep.max_steps == 9);
}

TEST_CASE("save is canonical") {
  for (const auto& model : zoo()) {
    netfile::NetDocument doc{model.net, model.mapping, {}};
    const std::string once = netfile::save(doc);
    const netfile::NetDocument back = netfile::load(once);
    CHECK(back == doc);
    CHECK(netfile::save(back) == once);
  }
}

TEST_CASE("property: round trip over generated nets") {
  Rng rng(31337);
  for (int i = 0; i < 300; ++i) {
    PetriNet base = testing::random_net(rng, 2 + static_cast<int>(rng.next() % 8), 1 + static_cast<int>(rng.next() % 6));
    // Rebuild with random weight trees, guards, drains and priorities layered on.
    NetBuilder b("gen" + std::to_string(i));
    std::vector<std::string> places;
    for (const auto& p : base.places()) {
      b.place(p.id, p.kind, p.initial);
      places.push_back(p.id);
    }
    for (const auto& t : base.transitions()) b.transition(t.id, static_cast<int>(rng.next() % 5) - 2);
    for (const auto& a : base.arcs()) {
      if (a.input) {
        b.input(a.place, a.transition, a.weight, rng.next() % 3 == 0 ? ArcKind::Guard : ArcKind::Consume);
      } else {
        b.output(a.transition, a.place, testing::random_expr(rng, places, 4));
      }
    }
    const std::string& t0 = base.transitions().front().id;
    b.input(places.back(), t0, WeightExpr::mark(places.back()), ArcKind::Drain);
    netfile::NetDocument doc{b.build(), std::nullopt, {}};
    if (rng.next() % 2) {
      QuantumMapping q;
      q.k = rng.uniform() + 0.01;
      q.assignments.push_back({places.front(), "|" + std::to_string(i) + ">"});
      doc.mapping = q;
    }
    if (rng.next() % 2) {
      doc.config.seed = rng.next();
      doc.config.epsilon = rng.uniform() * 1e-6 + 1e-15;
    }
    const std::string text = netfile::save(doc);
    INFO(text);
    const netfile::NetDocument back = netfile::load(text);
    REQUIRE(back == doc);
    CHECK(netfile::save(back) == text);
  }
}

TEST_CASE("property: corrupted lines are reported at that line") {
  const std::string text = slurp(golden("zeno.qpn"));
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  int checked = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (int mode = 0; mode < 3; ++mode) {
      std::vector<std::string> copy = lines;
      std::string& l = copy[i];
      if (mode == 0) {
        l = "@" + l;
      } else if (mode == 1) {
        l += " junk=1";
      } else {
        const auto q = l.find("w=\"");
        if (q == std::string::npos) continue;
        l.insert(q + 3, "*");
      }
      std::string joined;
      for (const auto& c : copy) joined += c + "\n";
      INFO("line " << i + 1 << ": " << l);
      const Failure f = failure(joined);
      CHECK(f.line == i + 1);
      ++checked;
    }
  }
  CHECK(checked > 60);
}
