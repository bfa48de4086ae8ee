import math
import os
from pathlib import Path

import pytest

import qpn

GOLDEN = Path(os.environ.get("QPN_GOLDEN_DIR", Path(__file__).resolve().parent.parent / "golden"))


def test_expressions():
    assert qpn.format_expr(" m( p9 ) - 2 ") == "m(p9)-2"
    assert qpn.eval_expr("-2^2") == -4
    assert qpn.eval_expr("cos(pi/(2*m(p9)))", {"p9": 2}) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(qpn.QpnError, match="DivisionByZero"):
        qpn.eval_expr("1/0")


def test_measurement_net():
    model = qpn.measurement_net()
    net = model.net
    assert net.places == ["p1", "p2", "p3", "p4"]
    assert net.arc_count == 6
    assert net.enabled(net.initial_marking) == ["t1", "t2", "t3"]
    after = net.fire(net.initial_marking, "t2")
    assert after[2] == pytest.approx(1 / math.sqrt(3))
    dist = qpn.exact_measurement_dist(net)
    assert [t for t, _ in dist] == ["t1", "t2", "t3"]
    assert all(p == pytest.approx(1 / 3) for _, p in dist)
    counts = qpn.empirical_distribution(model, 30000, 5)
    assert sum(counts.values()) == 30000
    assert all(abs(c / 30000 - 1 / 3) < 4 * math.sqrt(2 / 9 / 30000) for c in counts.values())


def test_seeded_runs_repeat():
    net = qpn.measurement_net().net
    a = net.run(policy="born", seed=9)
    b = net.run(policy="born", seed=9)
    assert a == b
    assert a["status"] == "quiescent"
    with pytest.raises(qpn.QpnError):
        net.run(policy="chaos")


def test_zeno_matches_oracle():
    for n in (2, 4, 50):
        result = qpn.zeno_net(n).run()
        p10, p01 = qpn.zeno_oracle(n)
        assert result["probabilities"]["|10>"] == pytest.approx(p10, abs=1e-9)
        assert result["probabilities"]["|01>"] == pytest.approx(p01, abs=1e-9)
    assert qpn.zeno_oracle(4)[0] == pytest.approx(0.530790043, abs=1e-9)


def test_protocol_nets():
    passing = qpn.slaz_net("passing", 320, 25).run()["report"]
    assert passing["d1"] == pytest.approx(qpn.passing_oracle(320, 25)["d1"], abs=1e-9)
    assert passing["d1"] == pytest.approx(0.906, abs=5e-4)
    blocking = qpn.slaz_net("blocking", 320, 25, k=1e-28).run()["report"]
    assert blocking["d2"] == pytest.approx(qpn.blocking_oracle(320, 25)["d2"], abs=1e-9)
    assert blocking["total"] == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(qpn.QpnError, match="InvalidParams"):
        qpn.slaz_net("blocking", 1, 25)


def test_entanglement_invariant():
    net = qpn.entanglement_net().net
    ok = qpn.check_invariant(net, "m(p3)==m(p5) AND m(p4)==m(p6)")
    assert ok["holds"] and ok["states"] == 8 and ok["quiescent"] == 3 and ok["edges"] == 12
    bad = qpn.check_invariant(net, "m(p3)==0")
    assert not bad["holds"]
    assert bad["path"] == ["t1"]


def test_netfile_round_trip():
    text = (GOLDEN / "zeno.qpn").read_text()
    model = qpn.load(text)
    assert qpn.save(model) == text
    assert model.net == qpn.zeno_net(4).net
    with pytest.raises(qpn.QpnError, match="5:11"):
        qpn.load((GOLDEN / "broken.qpn").read_text())


def test_tables_csv():
    csv = qpn.tables("passing", [320], [25, 50])
    lines = csv.strip().splitlines()
    assert lines[0] == "mode,N,M,net,oracle,paper,delta_net_oracle,delta_net_paper,verdict"
    assert len(lines) == 3
    assert all(line.endswith("PASS") for line in lines[1:])
