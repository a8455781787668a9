import pytest

from mtjpim import perf
from mtjpim.perf import LedgerError, Stage, StageLedger, breakdown, throughput


def _ledger(**stage_values):
    led = StageLedger()
    for stage, (e, t, n) in stage_values.items():
        led.add(stage, e, t, n)
    return led


def test_breakdown_shares_sum_to_one():
    led = _ledger(preset_match=(3e-12, 9e-9, 3), match_ops=(1e-12, 3e-9, 1),
                  score_readout=(0.5e-12, 1e-9, 1))
    bd = breakdown(led)
    assert sum(v["energy_share"] for v in bd.values()) == pytest.approx(1.0, abs=1e-9)
    assert sum(v["latency_share"] for v in bd.values()) == pytest.approx(1.0, abs=1e-9)


def test_breakdown_of_empty_ledger_errors():
    with pytest.raises(LedgerError):
        breakdown(StageLedger())


def test_negative_increments_rejected():
    with pytest.raises(LedgerError):
        StageLedger().add(Stage.MATCH_OPS, -1e-12, 0.0)


def test_unknown_stage_rejected():
    with pytest.raises(LedgerError):
        StageLedger().add("banana", 1e-12, 1e-9)


def test_throughput_definitions():
    led = _ledger(match_ops=(2e-9, 1e-3, 5))   # 2 nJ over 1 ms
    rep = throughput(led, patterns_done=10)
    assert rep.match_rate_per_s == pytest.approx(10 / 1e-3)
    assert rep.power_mw == pytest.approx(2e-9 / 1e-3 * 1e3)
    assert rep.compute_efficiency == pytest.approx(rep.match_rate_per_s / rep.power_mw)


def test_throughput_linearity():
    led1 = _ledger(match_ops=(2e-9, 1e-3, 5))
    led2 = led1 + led1
    r1 = throughput(led1, 10)
    r2 = throughput(led2, 20)
    assert r2.match_rate_per_s == pytest.approx(r1.match_rate_per_s)
    assert r2.compute_efficiency == pytest.approx(r1.compute_efficiency)


def test_throughput_of_zero_latency_errors():
    with pytest.raises(LedgerError):
        throughput(StageLedger(), 1)


def test_merge_is_order_independent():
    a = _ledger(match_ops=(1e-12, 2e-9, 1))
    b = _ledger(add_ops=(2e-12, 3e-9, 2))
    c = _ledger(bitline=(5e-13, 1e-9, 1))
    left = StageLedger().merge([a, b, c])
    right = StageLedger().merge([c, a, b])
    assert left.to_json() == right.to_json()


def test_csv_has_one_row_per_stage():
    led = _ledger(match_ops=(1e-12, 2e-9, 1))
    lines = led.to_csv().strip().splitlines()
    assert lines[0] == "stage,energy_pj,latency_ns,ops"
    assert len(lines) == 1 + len(perf.STAGES)


def test_bulk_bitwise_ops_are_comparable(near):
    reports = perf.bulk_bitwise_bench(near, ops=("not", "or", "nand"),
                                      rows=16, bits=64)
    rates = [r.match_rate_per_s for r in reports.values()]
    assert max(rates) / min(rates) <= 2.0


def test_sweep_single_point_equals_direct_run(near):
    from mtjpim.kernels import AlignmentRunConfig, run_alignment_workload
    cfg = AlignmentRunConfig(rows=3, cols=2048, fragment_len=24, pattern_len=8,
                             n_patterns=2, seed=2, policy="naive_opt")
    points = perf.sweep(cfg, "pattern_len", [8])
    _, ledger, n = run_alignment_workload(cfg)
    direct = throughput(ledger, n)
    assert points[0][0] == 8
    assert points[0][1].match_rate_per_s == pytest.approx(direct.match_rate_per_s)
    assert points[0][1].total_energy_j == pytest.approx(direct.total_energy_j)
