import math
import os
import subprocess

import pytest

import tdwn


def test_round_fail_probability():
    assert tdwn.p_round_fail(0, 5, 10) == 1.0
    assert tdwn.p_round_fail(1, 10, 10) == 0.0
    g = tdwn.guess_space_size()
    assert g == 323840
    assert tdwn.p_round_fail(2, 20, g) == pytest.approx((1 - 20 / g) ** 2, rel=1e-14)


def test_time_to_success_defaults():
    t = tdwn.time_to_success(0.5, 36000.0, 3, 20, 323840)
    assert t.rounds == 5612
    assert 6.3 < t.years < 6.5
    with pytest.raises(tdwn.UnreachableTarget):
        tdwn.time_to_success(0.5, 36000.0, 1, 20, 323840)


def test_independence_bound():
    assert tdwn.independence_bound(1400.0, 1000.0) == pytest.approx(583.3333333, rel=1e-9)


def test_query_event_process_update_renews_ttl():
    trace = tdwn.query_event_process("constant:1000", [500.0], 2000.0)
    assert trace.query_times == [500.0, 1500.0]
    assert trace.triggers == ["AuthUpdate", "TtlExpiry"]


def test_mc_ratio_close_to_analytic():
    s = tdwn.mc_query_intervals("constant:1000", 1000.0, 20000, seed=3)
    assert abs(s.ttl_triggered_ratio - math.exp(-1)) < 0.02


def test_success_curve_is_stair_step():
    c = tdwn.success_curve(10 * 36000.0, 36000.0, 3, 20, 323840)
    assert c.at(35999.0) == 0.0
    assert c.at(36000.0) > 0.0
    probs = [p for _, p in c.points]
    assert probs == sorted(probs)


def test_simulate_attack_free_sends_no_dnssec_queries():
    metrics, log = tdwn.simulate("", ["attacker.enabled=false", "experiment.duration_s=600"])
    d = metrics.as_dict()
    assert d["dnssec_queries_issued"] == "0"
    assert d["client_queries"] == d["answered"]


def test_simulate_is_deterministic():
    args = ["experiment.duration_s=120", "auth.id_space=64", "auth.port_space=1", "auth.servers=1"]
    a = tdwn.simulate("", args)
    b = tdwn.simulate("", args)
    assert a[1] == b[1]
    assert a[0].to_csv() == b[0].to_csv()


def test_stepwise_simulator_snapshot():
    sim = tdwn.Simulator("", ["attacker.enabled=false", "resolver.resolver_qps=0"])
    assert sim.snapshot()["priority"] == []
    sim.inject_client_query(1.0, "www.foo.com")
    sim.advance_to(2.0)
    normal = sim.snapshot()["normal"]
    assert any(e["key"] == "www.foo.com./A" for e in normal)
    sim.run()
    assert sim.metrics()["answered"] == "1"


def test_bad_override_raises_config_error():
    with pytest.raises(tdwn.ConfigError):
        tdwn.simulate("", ["resolver.no_such_key=1"])


def test_figure_csv_header():
    csv = tdwn.figure_csv("fig10", "", ["experiment.horizon_s=360000"])
    lines = csv.strip().splitlines()
    assert lines[0].startswith("time_s,")
    assert len(lines) == 12


@pytest.mark.skipif("TDWN_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_unknown_figure_exit_code(tmp_path):
    rc = subprocess.run([os.environ["TDWN_CLI"], "figure", "fig99", "--out", str(tmp_path)]).returncode
    assert rc == 2
