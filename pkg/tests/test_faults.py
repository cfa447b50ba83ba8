import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snnfault.bits import popcount8
from snnfault.errors import DataError
from snnfault.faults import (
    CellFaultMask,
    CrossbarGeometry,
    FaultMap,
    NeuronFaultKind,
    apply_stuck_at,
    corrupt_weight_matrix,
    faulty_neuron_step,
    generate_fault_map,
)
from snnfault.snn.neuron import NeuronState, lif_step
from snnfault.snn.params import LifParams

PARAMS = LifParams(v_th=1.0, v_reset=0.0, v_rest=0.0, leak_factor=0.9, refractory_steps=2)


# --- geometry and masks --------------------------------------------------


def test_location_count():
    geo = CrossbarGeometry(4, 4)
    assert geo.n_cell_locations == 4 * 4 * 8
    assert geo.n_locations == 4 * 4 * 8 + 4


def test_mask_rejects_overlap():
    with pytest.raises(DataError):
        CellFaultMask(stuck0=0b1, stuck1=0b1)


# --- map generation ------------------------------------------------------


def test_rate_zero_gives_empty_map():
    fm = generate_fault_map(CrossbarGeometry(8, 8), 0.0, seed=1)
    assert fm.n_faults() == 0
    assert not fm.stuck0.any() and not fm.stuck1.any()
    assert not fm.neuron_faults.any()


def test_rate_one_saturates_everything():
    fm = generate_fault_map(CrossbarGeometry(4, 4), 1.0, seed=1)
    assert np.all((fm.stuck0 | fm.stuck1) == 0xFF)
    assert np.all(fm.neuron_faults != 0)
    assert fm.n_faults() == fm.geometry.n_locations


def test_exact_count_quarter_rate():
    # counting oracle: 4*4*8 + 4 = 132 locations, a quarter is 33
    geo = CrossbarGeometry(4, 4)
    assert geo.n_locations == 132
    fm = generate_fault_map(geo, 0.25, seed=7)
    assert fm.n_faults() == 33


@pytest.mark.parametrize("rows,cols", [(4, 4), (16, 8), (64, 64)])
@pytest.mark.parametrize("rate", [0.0, 0.1, 0.25, 0.5, 1.0])
def test_exact_count_and_disjoint_masks(rows, cols, rate):
    geo = CrossbarGeometry(rows, cols)
    for seed in (1, 2, 3):
        fm = generate_fault_map(geo, rate, seed)
        assert fm.n_faults() == round(rate * geo.n_locations)
        assert not np.any(fm.stuck0 & fm.stuck1)


def test_seed_determinism_and_fingerprint():
    geo = CrossbarGeometry(32, 32)
    a = generate_fault_map(geo, 0.3, seed=11)
    b = generate_fault_map(geo, 0.3, seed=11)
    c = generate_fault_map(geo, 0.3, seed=12)
    assert np.array_equal(a.stuck0, b.stuck0)
    assert np.array_equal(a.stuck1, b.stuck1)
    assert np.array_equal(a.neuron_faults, b.neuron_faults)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()


def test_rejects_bad_rate():
    with pytest.raises(DataError):
        generate_fault_map(CrossbarGeometry(4, 4), 1.5, seed=0)


# --- stuck-at application ------------------------------------------------


def test_stuck_at_one_forces_bit():
    mask = CellFaultMask(stuck1=0b0000_0100)
    assert apply_stuck_at(0b1011_0011, mask) == 0b1011_0111


def test_stuck_at_zero_clears_bit():
    mask = CellFaultMask(stuck0=0b0000_0010)
    assert apply_stuck_at(0b1011_0011, mask) == 0b1011_0001


def test_empty_mask_is_identity():
    mask = CellFaultMask()
    for code in range(256):
        assert apply_stuck_at(code, mask) == code


@given(
    code=st.integers(0, 255),
    stuck=st.integers(0, 255),
    split=st.integers(0, 255),
    rotation=st.integers(0, 7),
)
@settings(max_examples=300)
def test_stuck_at_idempotent(code, stuck, split, rotation):
    stuck1 = stuck & split
    mask = CellFaultMask(stuck0=stuck & ~split & 0xFF, stuck1=stuck1)
    once = apply_stuck_at(code, mask, rotation)
    assert apply_stuck_at(once, mask, rotation) == once


def test_stuck_at_with_rotation_places_low_bit():
    # cell 7 stuck at 1, rotation 7 puts logical bit 0 there; brute-force
    # check across all rotations that the corrupted logical bit is (7 - r) % 8
    mask = CellFaultMask(stuck1=0b1000_0000)
    for r in range(8):
        out = apply_stuck_at(0, mask, rotation=r)
        assert out == 1 << ((7 - r) % 8)


# --- whole-matrix corruption ---------------------------------------------


def test_corrupt_matrix_empty_map_identity():
    geo = CrossbarGeometry(8, 8)
    fm = generate_fault_map(geo, 0.0, seed=0)
    weights = np.arange(64, dtype=np.uint8).reshape(8, 8)
    assert np.array_equal(corrupt_weight_matrix(weights, fm), weights)


def test_corrupt_matrix_msb_stuck_one():
    geo = CrossbarGeometry(4, 4)
    stuck0 = np.zeros((4, 4), dtype=np.uint8)
    stuck1 = np.zeros((4, 4), dtype=np.uint8)
    stuck1[1, 2] = 0b1000_0000
    fm = FaultMap(geo, stuck0, stuck1, np.zeros(4, dtype=np.int8), 0.0, 0)
    weights = np.zeros((4, 4), dtype=np.uint8)
    out = corrupt_weight_matrix(weights, fm)
    assert out[1, 2] == 128
    out[1, 2] = 0
    assert not out.any()


def test_corrupt_matrix_row_tiling_reuses_cells():
    # logical input rows map to physical row i mod rows, so a fault hits
    # every row-tile that lands on it
    geo = CrossbarGeometry(4, 2)
    stuck0 = np.zeros((4, 2), dtype=np.uint8)
    stuck1 = np.zeros((4, 2), dtype=np.uint8)
    stuck1[0, 1] = 0x01
    fm = FaultMap(geo, stuck0, stuck1, np.zeros(2, dtype=np.int8), 0.0, 0)
    weights = np.zeros((8, 2), dtype=np.uint8)  # two row passes
    out = corrupt_weight_matrix(weights, fm)
    assert out[0, 1] == 1 and out[4, 1] == 1
    assert out.sum() == 2


def test_corrupt_matrix_matches_scalar_apply():
    geo = CrossbarGeometry(8, 8)
    fm = generate_fault_map(geo, 0.4, seed=3)
    rng = np.random.default_rng(0)
    weights = rng.integers(0, 256, size=(16, 8)).astype(np.uint8)
    out = corrupt_weight_matrix(weights, fm)
    for i in range(16):
        for n in range(8):
            mask = fm.mask_at(i % 8, n % 8)
            assert out[i, n] == apply_stuck_at(int(weights[i, n]), mask)


def test_corrupt_matrix_rejects_bad_dtype():
    fm = generate_fault_map(CrossbarGeometry(4, 4), 0.0, seed=0)
    with pytest.raises(DataError):
        corrupt_weight_matrix(np.zeros((4, 4), dtype=np.float64), fm)


# --- faulty neuron semantics ----------------------------------------------


def _run(kind, inputs, params=PARAMS):
    state = NeuronState(v_mem=params.v_rest)
    spikes = []
    for x in inputs:
        state, spiked = faulty_neuron_step(state, float(x), params, kind)
        spikes.append(spiked)
    return np.array(spikes)


def test_none_matches_lif_step():
    rng = np.random.default_rng(1)
    inputs = rng.random(100)
    state_a = NeuronState(v_mem=PARAMS.v_rest)
    state_b = NeuronState(v_mem=PARAMS.v_rest)
    for x in inputs:
        state_a, sa = faulty_neuron_step(state_a, float(x), PARAMS, NeuronFaultKind.NONE)
        state_b, sb = lif_step(state_b, float(x), PARAMS)
        assert sa == sb and state_a == state_b


@pytest.mark.parametrize(
    "kind", [NeuronFaultKind.INCREASE, NeuronFaultKind.SPIKE_GENERATION]
)
def test_dormant_kinds_never_spike(kind):
    rng = np.random.default_rng(2)
    for trial in range(20):
        inputs = rng.random(100) * 10.0
        assert not _run(kind, inputs).any()


def test_faulty_leak_holds_potential():
    state = NeuronState(v_mem=0.5)
    new, spiked = faulty_neuron_step(state, 0.0, PARAMS, NeuronFaultKind.LEAK)
    assert not spiked
    assert new.v_mem == 0.5


def test_faulty_leak_equals_if_neuron():
    if_params = LifParams(
        v_th=PARAMS.v_th,
        v_reset=PARAMS.v_reset,
        v_rest=PARAMS.v_rest,
        leak_factor=1.0,
        refractory_steps=PARAMS.refractory_steps,
    )
    rng = np.random.default_rng(3)
    for trial in range(10):
        inputs = rng.random(200) * 0.3
        faulty = NeuronState(v_mem=PARAMS.v_rest)
        reference = NeuronState(v_mem=PARAMS.v_rest)
        for x in inputs:
            faulty, sa = faulty_neuron_step(faulty, float(x), PARAMS, NeuronFaultKind.LEAK)
            reference, sb = lif_step(reference, float(x), if_params)
            assert sa == sb


def test_faulty_reset_saturates():
    # weak constant input: crosses threshold at some step t, then fires forever
    inputs = np.full(100, 0.2)
    spikes = _run(NeuronFaultKind.RESET, inputs)
    first = int(np.argmax(spikes))
    assert spikes[first:].all()
    assert not spikes[:first].any()
    assert 0 < first < 20


def test_faulty_spike_generation_still_resets():
    # dynamics proceed: membrane resets at threshold even though output is dead
    state = NeuronState(v_mem=PARAMS.v_rest)
    state, spiked = faulty_neuron_step(
        state, 5.0, PARAMS, NeuronFaultKind.SPIKE_GENERATION
    )
    assert not spiked
    assert state.v_mem == PARAMS.v_reset
    assert state.refractory_left == PARAMS.refractory_steps
