"""Latency / throughput / energy / area estimation for mapping plans.

The latency model is pass-count proportional: a sample needs
passes * steps_per_sample * cycles_per_pass clock cycles, where passes grow
as columns get excluded. Strategy comparisons are therefore ratios and the
absolute constants cancel; the defaults below are documented reference
fixtures, except the two die areas which come from synthesis of the original
and shuffle-equipped engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from snnfault.errors import ConfigError
from snnfault.faults import FaultMap
from snnfault.mapping import MappingPlan, Strategy, build_plan


@dataclass(frozen=True)
class HwConstants:
    clock_cycle_s: float = 2e-9
    cycles_per_pass: int = 256
    power_engine_w: float = 0.5
    power_enhancement_factor: float = 1.30
    area_baseline_mm2: float = 6.27
    area_enhanced_mm2: float = 8.56

    def __post_init__(self) -> None:
        for name in (
            "clock_cycle_s",
            "cycles_per_pass",
            "power_engine_w",
            "power_enhancement_factor",
            "area_baseline_mm2",
            "area_enhanced_mm2",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.area_enhanced_mm2 < self.area_baseline_mm2:
            raise ConfigError("enhanced area cannot be smaller than baseline area")


@dataclass(frozen=True)
class CostReport:
    strategy: Strategy
    passes: int
    latency_per_sample_s: float
    throughput_sps: float
    energy_per_sample_j: float
    area_mm2: float
    utilization: float


def estimate_cost(
    plan: MappingPlan, steps_per_sample: int, constants: HwConstants
) -> CostReport:
    """Cost of running one sample through the crossbar under a plan."""
    if steps_per_sample <= 0:
        raise ConfigError("steps_per_sample must be positive")
    passes = plan.passes
    latency = passes * steps_per_sample * constants.cycles_per_pass * constants.clock_cycle_s
    power = constants.power_engine_w
    if plan.strategy.uses_rotations:
        power *= constants.power_enhancement_factor
    area = (
        constants.area_baseline_mm2
        if plan.strategy is Strategy.BASELINE
        else constants.area_enhanced_mm2
    )
    return CostReport(
        strategy=plan.strategy,
        passes=passes,
        latency_per_sample_s=latency,
        throughput_sps=1.0 / latency,
        energy_per_sample_j=power * latency,
        area_mm2=area,
        utilization=plan.utilization,
    )


def compare_strategies(
    fault_map: FaultMap,
    n_inputs: int,
    n_neurons: int,
    steps_per_sample: int,
    constants: HwConstants,
) -> dict[Strategy, CostReport]:
    """Cost reports of all four strategies against the same fault map."""
    reports = {}
    for strategy in Strategy:
        plan = build_plan(strategy, fault_map, n_inputs, n_neurons)
        reports[strategy] = estimate_cost(plan, steps_per_sample, constants)
    return reports


def area_overhead(constants: HwConstants) -> float:
    """Relative area cost of the shuffle hardware over the original engine."""
    return (
        constants.area_enhanced_mm2 - constants.area_baseline_mm2
    ) / constants.area_baseline_mm2


def passes_for(n_inputs: int, n_neurons: int, rows: int, usable_cols: int) -> int:
    """Pass count for a logical network on a crossbar with some columns usable."""
    return math.ceil(n_inputs / rows) * math.ceil(n_neurons / usable_cols)
