import math

import numpy as np
import pytest

from snnfault.errors import ConfigError, SimulationFault
from snnfault.snn.neuron import NeuronState, lif_step
from snnfault.snn.params import LifParams

PARAMS = LifParams(v_th=1.0, v_reset=-0.2, v_rest=0.0, leak_factor=0.9, refractory_steps=3)


def test_rest_is_fixed_point():
    state = NeuronState(v_mem=PARAMS.v_rest)
    new, spiked = lif_step(state, 0.0, PARAMS)
    assert not spiked
    assert new.v_mem == PARAMS.v_rest


def test_threshold_crossing_resets():
    state = NeuronState(v_mem=0.5)
    new, spiked = lif_step(state, 0.6, PARAMS)
    assert spiked
    assert new.v_mem == PARAMS.v_reset
    assert new.refractory_left == PARAMS.refractory_steps


def test_geometric_decay_closed_form():
    # closed form: with zero input and v_rest = 0, v(t) = v0 * leak^t
    state = NeuronState(v_mem=1.0)
    params = LifParams(v_th=2.0, v_reset=0.0, v_rest=0.0, leak_factor=0.9)
    for _ in range(10):
        state, spiked = lif_step(state, 0.0, params)
        assert not spiked
    assert state.v_mem == pytest.approx(0.9**10)


def test_leak_monotone_toward_rest():
    params = LifParams(v_th=10.0, v_reset=0.0, v_rest=1.0, leak_factor=0.8)
    state = NeuronState(v_mem=5.0)
    previous = state.v_mem
    for _ in range(50):
        state, _ = lif_step(state, 0.0, params)
        assert params.v_rest <= state.v_mem < previous
        previous = state.v_mem
    assert state.v_mem == pytest.approx(params.v_rest, abs=1e-4)


def test_refractory_ignores_input():
    state = NeuronState(v_mem=0.0, refractory_left=2)
    new, spiked = lif_step(state, 100.0, PARAMS)
    assert not spiked
    assert new.refractory_left == 1
    assert new.v_mem == 0.0
    new, spiked = lif_step(new, 100.0, PARAMS)
    assert new.refractory_left == 0
    # counter exhausted: next step integrates again
    new, spiked = lif_step(new, 100.0, PARAMS)
    assert spiked


def test_non_finite_input_raises():
    with pytest.raises(SimulationFault):
        lif_step(NeuronState(v_mem=0.0), math.nan, PARAMS)
    with pytest.raises(SimulationFault):
        lif_step(NeuronState(v_mem=math.inf), 0.0, PARAMS)


def test_random_trajectory_matches_reference():
    # independent reference: direct recurrence in plain python
    rng = np.random.default_rng(5)
    inputs = rng.random(200) * 0.4
    state = NeuronState(v_mem=PARAMS.v_rest)
    v_ref, refr_ref = PARAMS.v_rest, 0
    for x in inputs:
        state, spiked = lif_step(state, float(x), PARAMS)
        if refr_ref > 0:
            refr_ref -= 1
            expected_spike = False
        else:
            v_ref = PARAMS.v_rest + PARAMS.leak_factor * (v_ref - PARAMS.v_rest) + float(x)
            expected_spike = v_ref >= PARAMS.v_th
            if expected_spike:
                v_ref = PARAMS.v_reset
                refr_ref = PARAMS.refractory_steps
        assert spiked == expected_spike
        assert state.v_mem == pytest.approx(v_ref)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(v_th=0.0, v_reset=0.0, v_rest=0.0, leak_factor=0.9),  # rest not < th
        dict(v_th=1.0, v_reset=0.5, v_rest=0.0, leak_factor=0.9),  # reset > rest
        dict(v_th=1.0, v_reset=0.0, v_rest=0.0, leak_factor=0.0),
        dict(v_th=1.0, v_reset=0.0, v_rest=0.0, leak_factor=1.1),
        dict(v_th=1.0, v_reset=0.0, v_rest=0.0, leak_factor=0.9, refractory_steps=-1),
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ConfigError):
        LifParams(**kwargs)
