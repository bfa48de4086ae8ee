#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qpn/cli.hpp"

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result qpn_run(std::vector<std::string> args) {
  args.insert(args.begin(), "qpn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qpn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const char* name) { return (std::filesystem::path(QPN_GOLDEN_DIR) / name).string(); }

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "qpn_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage") {
  CHECK(qpn_run({}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"bogus"}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"simulate"}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"--help"}).code == qpn::cli::kOk);
  CHECK(qpn_run({"simulate", golden("zeno.qpn"), "--policy", "chaos"}).code == qpn::cli::kUsageError);
}

TEST_CASE("simulate") {
  const Result z = qpn_run({"simulate", golden("zeno.qpn")});
  CHECK(z.code == 0);
  CHECK(has(z.out, "|10> = 0.53079"));
  CHECK(has(z.out, "firings: 9"));
  CHECK(has(z.out, "total probability:"));

  const Result a = qpn_run({"simulate", golden("measurement.qpn"), "--policy", "born", "--seed", "7"});
  const Result b = qpn_run({"simulate", golden("measurement.qpn"), "--policy", "born", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const Result broken = qpn_run({"simulate", golden("broken.qpn")});
  CHECK(broken.code == qpn::cli::kUsageError);
  CHECK(has(broken.err, ":5:"));
  CHECK(qpn_run({"simulate", golden("nope.qpn")}).code == qpn::cli::kUsageError);

  const Result limit = qpn_run({"simulate", golden("zeno.qpn"), "--max-steps", "3"});
  CHECK(limit.code == qpn::cli::kRuntimeError);

  const auto trace = scratch("trace.csv");
  CHECK(qpn_run({"simulate", golden("entanglement.qpn"), "--trace", trace.string()}).code == 0);
  const std::string csv = slurp(trace);
  CHECK(csv.rfind("step,transition,p1,p2,p3,p4,p5,p6\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("simulate seed comes from the environment last") {
  ::setenv("QPN_SEED", "11", 1);
  const Result env = qpn_run({"simulate", golden("measurement.qpn"), "--policy", "born"});
  const Result flag = qpn_run({"simulate", golden("measurement.qpn"), "--policy", "born", "--seed", "11"});
  ::unsetenv("QPN_SEED");
  CHECK(env.out == flag.out);
}

TEST_CASE("tables") {
  const Result p = qpn_run({"tables", "--mode", "passing"});
  CHECK(p.code == 0);
  CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 21);
  CHECK(!has(p.out, "FAIL"));
  CHECK(p.out == qpn_run({"tables", "--mode", "passing"}).out);

  const Result b = qpn_run({"tables", "--mode", "blocking", "--n", "320,2500", "--m", "25,150"});
  CHECK(b.code == 0);
  CHECK(has(b.out, "blocking,2500,150,"));
  CHECK(has(b.out, "ANOMALY"));

  const Result fail = qpn_run({"tables", "--mode", "blocking", "--n", "320", "--m", "25", "--tol-blocking", "1e-6"});
  CHECK(fail.code == qpn::cli::kVerificationFailed);
  CHECK(has(fail.out, "FAIL"));

  CHECK(qpn_run({"tables", "--mode", "sideways"}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"tables", "--n", "1", "--m", "25"}).code != 0);

  const auto md = scratch("t.md");
  CHECK(qpn_run({"tables", "--mode", "passing", "--n", "320", "--m", "25", "--format", "md", "-o", md.string()}).code == 0);
  CHECK(has(slurp(md), "| passing | 320 | 25 |"));
}

TEST_CASE("check") {
  const Result ok = qpn_run({"check", golden("entanglement.qpn"), "m(p3)==m(p5) AND m(p4)==m(p6)"});
  CHECK(ok.code == 0);
  CHECK(has(ok.out, "holds"));
  const Result bad = qpn_run({"check", golden("entanglement.qpn"), "m(p3)==0"});
  CHECK(bad.code == qpn::cli::kVerificationFailed);
  CHECK(has(bad.out, "path: t1"));
  const Result amp = qpn_run({"check", golden("zeno.qpn"), "0==0"});
  CHECK(amp.code == qpn::cli::kUsageError);
  CHECK(has(amp.err, "NotIntegerNet"));
  CHECK(qpn_run({"check", golden("entanglement.qpn"), "m(p3)=="}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"check", golden("entanglement.qpn"), "m(p9)==0"}).code == qpn::cli::kUsageError);
  CHECK(qpn_run({"check", golden("entanglement.qpn"), "0==0", "--max-states", "2"}).code ==
        qpn::cli::kRuntimeError);

  const auto dot = scratch("g.dot");
  CHECK(qpn_run({"check", golden("entanglement.qpn"), "0==0", "--dot", dot.string()}).code == 0);
  CHECK(slurp(dot).rfind("digraph", 0) == 0);
}

TEST_CASE("measure") {
  const Result m = qpn_run({"measure", golden("measurement.qpn"), "--runs", "100000", "--expect"});
  CHECK(m.code == 0);
  CHECK(has(m.out, "|0>"));
  CHECK(m.out == qpn_run({"measure", golden("measurement.qpn"), "--runs", "100000", "--expect"}).out);

  const Result one = qpn_run({"measure", golden("measurement.qpn"), "--runs", "1", "--expect"});
  CHECK(one.code == 0);
  CHECK(has(one.out, "single run"));

  const Result e = qpn_run({"measure", golden("entanglement.qpn"), "--runs", "10000", "--holds",
                            "m(p3)==m(p5) AND m(p4)==m(p6)"});
  CHECK(e.code == 0);
  CHECK(has(e.out, "10000 of 10000 runs (100%)"));
  const Result miss = qpn_run({"measure", golden("entanglement.qpn"), "--runs", "1000", "--holds", "m(p3)==0"});
  CHECK(miss.code == qpn::cli::kVerificationFailed);

  CHECK(qpn_run({"measure", golden("measurement.qpn"), "--runs", "0"}).code == qpn::cli::kUsageError);
}

TEST_CASE("oracle, validate and zoo") {
  const Result o = qpn_run({"oracle", "zeno", "--n", "4"});
  CHECK(o.code == 0);
  CHECK(has(o.out, "0.53079"));
  CHECK(has(qpn_run({"oracle", "passing", "--n", "320", "--m", "25"}).out, "d1: 0.90595"));
  CHECK(qpn_run({"oracle", "blocking", "--n", "1", "--m", "25"}).code == qpn::cli::kUsageError);

  CHECK(qpn_run({"validate", golden("passing.qpn")}).code == 0);
  CHECK(qpn_run({"validate", golden("broken.qpn")}).code == qpn::cli::kUsageError);
  const Result canon = qpn_run({"validate", golden("measurement_messy.qpn"), "--canonical"});
  CHECK(canon.out == slurp(golden("measurement.qpn")));

  CHECK(qpn_run({"zoo", "zeno", "--n", "4"}).out == slurp(golden("zeno.qpn")));
  CHECK(qpn_run({"zoo", "blocking", "--n", "3", "--m", "2"}).out == slurp(golden("blocking.qpn")));
  CHECK(qpn_run({"zoo", "teleport"}).code == qpn::cli::kUsageError);
}
