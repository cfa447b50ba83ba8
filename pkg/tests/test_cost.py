import math

import numpy as np
import pytest

from snnfault.cost import HwConstants, area_overhead, compare_strategies, estimate_cost
from snnfault.errors import ConfigError
from snnfault.faults import CrossbarGeometry, FaultMap, NeuronFaultKind, generate_fault_map
from snnfault.mapping import Strategy, build_plan

CONSTANTS = HwConstants()


def reset_only_map(n_reset, cols=256, rows=256):
    tags = np.zeros(cols, dtype=np.int8)
    tags[:n_reset] = int(NeuronFaultKind.RESET)
    return FaultMap(
        CrossbarGeometry(rows, cols),
        np.zeros((rows, cols), dtype=np.uint8),
        np.zeros((rows, cols), dtype=np.uint8),
        tags,
        0.0,
        0,
    )


def test_fault_free_reports_equal_passes():
    fm = generate_fault_map(CrossbarGeometry(64, 64), 0.0, seed=0)
    reports = compare_strategies(fm, 784, 100, 150, CONSTANTS)
    passes = {r.passes for r in reports.values()}
    assert len(passes) == 1
    throughputs = {r.throughput_sps for r in reports.values()}
    assert len(throughputs) == 1
    # energy differs only by the enhancement factor on fam2/fam3
    base = reports[Strategy.BASELINE].energy_per_sample_j
    assert reports[Strategy.FAM1].energy_per_sample_j == base
    factor = CONSTANTS.power_enhancement_factor
    assert reports[Strategy.FAM2].energy_per_sample_j == pytest.approx(base * factor)


def test_exclusion_arithmetic_n1600():
    # ceiling oracle: 26 excluded -> ceil(1600/230) = 7 = baseline passes;
    # 52 excluded -> ceil(1600/204) = 8 -> ratio 7/8
    fm26 = reset_only_map(26)
    fm52 = reset_only_map(52)
    base = estimate_cost(build_plan(Strategy.BASELINE, fm26, 784, 1600), 150, CONSTANTS)
    assert base.passes == math.ceil(784 / 256) * 7
    plan26 = build_plan(Strategy.FAM1, fm26, 784, 1600)
    plan52 = build_plan(Strategy.FAM1, fm52, 784, 1600)
    r26 = estimate_cost(plan26, 150, CONSTANTS)
    r52 = estimate_cost(plan52, 150, CONSTANTS)
    assert r26.passes == base.passes
    assert r26.throughput_sps == base.throughput_sps
    assert r52.throughput_sps / base.throughput_sps == pytest.approx(7 / 8)


def test_area_overhead_is_paper_constant():
    assert area_overhead(CONSTANTS) == pytest.approx(0.365, abs=0.001)
    baseline_plan = build_plan(
        Strategy.BASELINE, generate_fault_map(CrossbarGeometry(8, 8), 0.0, 0), 8, 8
    )
    assert estimate_cost(baseline_plan, 10, CONSTANTS).area_mm2 == 6.27
    fam_plan = build_plan(
        Strategy.FAM1, generate_fault_map(CrossbarGeometry(8, 8), 0.0, 0), 8, 8
    )
    assert estimate_cost(fam_plan, 10, CONSTANTS).area_mm2 == 8.56


def test_energy_identity():
    fm = generate_fault_map(CrossbarGeometry(64, 64), 0.3, seed=2)
    for strategy, report in compare_strategies(fm, 784, 200, 100, CONSTANTS).items():
        power = CONSTANTS.power_engine_w * (
            CONSTANTS.power_enhancement_factor
            if strategy in (Strategy.FAM2, Strategy.FAM3)
            else 1.0
        )
        assert report.energy_per_sample_j == report.latency_per_sample_s * power
        assert report.throughput_sps == 1.0 / report.latency_per_sample_s


@pytest.mark.parametrize("rate", [0.1, 0.25, 0.5])
def test_ordering_over_random_maps(rate):
    geo = CrossbarGeometry(64, 64)
    for seed in range(5):
        fm = generate_fault_map(geo, rate, seed)
        reports = compare_strategies(fm, 784, 400, 100, CONSTANTS)
        fam1 = set(build_plan(Strategy.FAM1, fm, 784, 400).excluded_columns)
        fam2 = set(build_plan(Strategy.FAM2, fm, 784, 400).excluded_columns)
        fam3 = set(build_plan(Strategy.FAM3, fm, 784, 400).excluded_columns)
        assert fam3 <= fam1
        assert fam1 == fam2
        assert reports[Strategy.BASELINE].throughput_sps >= reports[Strategy.FAM3].throughput_sps
        assert reports[Strategy.FAM3].throughput_sps >= reports[Strategy.FAM1].throughput_sps
        assert reports[Strategy.FAM1].throughput_sps == reports[Strategy.FAM2].throughput_sps


def test_reset_only_map_fam3_equals_fam1():
    fm = reset_only_map(30)
    reports = compare_strategies(fm, 784, 400, 100, CONSTANTS)
    assert reports[Strategy.FAM3].throughput_sps == reports[Strategy.FAM1].throughput_sps


def test_utilization_fraction():
    fm = reset_only_map(64)
    plan = build_plan(Strategy.FAM1, fm, 784, 400)
    report = estimate_cost(plan, 100, CONSTANTS)
    assert report.utilization == pytest.approx((256 - 64) / 256)


def test_invalid_constants_rejected():
    with pytest.raises(ConfigError):
        HwConstants(clock_cycle_s=0.0)
    with pytest.raises(ConfigError):
        HwConstants(area_enhanced_mm2=1.0, area_baseline_mm2=2.0)
