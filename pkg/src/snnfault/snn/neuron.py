"""Single-neuron reference dynamics, healthy and faulty.

This is the scalar specification of one timestep; the vectorized simulator in
`snnfault.snn.network` must agree with it neuron-for-neuron (covered by
tests). The faulty variants model a permanently broken operation unit:
membrane increase, leak, reset, or spike generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

from snnfault.errors import DataError, SimulationFault
from snnfault.snn.params import LifParams


class NeuronFaultKind(IntEnum):
    """Which of the four neuron operations is broken (NONE = healthy)."""

    NONE = 0
    INCREASE = 1
    LEAK = 2
    RESET = 3
    SPIKE_GENERATION = 4


@dataclass
class NeuronState:
    """State of one neuron between timesteps.

    `saturated` records that a neuron with a broken reset path has crossed
    threshold once and now fires continuously; it stays False for healthy
    neurons.
    """

    v_mem: float
    refractory_left: int = 0
    trace_post: float = 0.0
    saturated: bool = False


def lif_step(
    state: NeuronState, weighted_input: float, params: LifParams
) -> tuple[NeuronState, bool]:
    """Advance one neuron by one timestep; returns (new state, spiked).

    While refractory the counter decrements and input is ignored. Otherwise
    the membrane decays toward v_rest by leak_factor and the weighted input
    is added; reaching v_th emits a spike, resets to v_reset, and arms the
    refractory counter.
    """
    if not math.isfinite(weighted_input) or not math.isfinite(state.v_mem):
        raise SimulationFault(
            f"non-finite potential or input (v={state.v_mem}, in={weighted_input})"
        )
    if state.refractory_left > 0:
        return replace(state, refractory_left=state.refractory_left - 1), False
    v = params.v_rest + params.leak_factor * (state.v_mem - params.v_rest) + weighted_input
    if v >= params.v_th:
        return (
            replace(state, v_mem=params.v_reset, refractory_left=params.refractory_steps),
            True,
        )
    return replace(state, v_mem=v), False


def faulty_neuron_step(
    state: NeuronState,
    weighted_input: float,
    params: LifParams,
    kind: NeuronFaultKind,
) -> tuple[NeuronState, bool]:
    """One timestep of a neuron whose `kind` operation is permanently broken.

    INCREASE: the adder is dead, so input never raises the membrane; leak
        still runs. Starting from rest the neuron can never reach threshold
        (dormant).
    LEAK: decay is skipped, turning the neuron into an integrate-and-fire
        unit; identical to lif_step with leak_factor = 1.
    RESET: the threshold comparator is broken. The first crossing latches the
        neuron into saturation and it emits a spike on that step and every
        step after, with no reset and no refractory period.
    SPIKE_GENERATION: membrane dynamics including reset and refractory run
        normally, but the output stays silent forever.
    """
    if kind == NeuronFaultKind.NONE:
        return lif_step(state, weighted_input, params)
    if kind == NeuronFaultKind.INCREASE:
        return lif_step(state, 0.0, params)
    if kind == NeuronFaultKind.LEAK:
        if state.refractory_left > 0:
            return replace(state, refractory_left=state.refractory_left - 1), False
        v = state.v_mem + weighted_input
        if v >= params.v_th:
            return (
                replace(
                    state, v_mem=params.v_reset, refractory_left=params.refractory_steps
                ),
                True,
            )
        return replace(state, v_mem=v), False
    if kind == NeuronFaultKind.RESET:
        if state.saturated:
            return state, True
        if state.refractory_left > 0:
            return replace(state, refractory_left=state.refractory_left - 1), False
        v = params.v_rest + params.leak_factor * (state.v_mem - params.v_rest) + weighted_input
        if v >= params.v_th:
            return replace(state, v_mem=v, saturated=True), True
        return replace(state, v_mem=v), False
    if kind == NeuronFaultKind.SPIKE_GENERATION:
        new_state, _ = lif_step(state, weighted_input, params)
        return new_state, False
    raise DataError(f"unknown neuron fault kind: {kind!r}")
