import math

import numpy as np
import pytest

from snnfault.errors import UnmappableError
from snnfault.faults import (
    CellFaultMask,
    CrossbarGeometry,
    FaultMap,
    NeuronFaultKind,
    apply_stuck_at,
    generate_fault_map,
)
from snnfault.mapping import (
    MappingPlan,
    Strategy,
    build_plan,
    compute_rotation,
    excluded_columns_for,
    longest_clean_run,
    rotation_cost,
    rotation_grid,
    shuffle_word,
    synapses_exceeding_budget,
    unshuffle_word,
)


def mask_from_cells(cells):
    stuck = 0
    for c in cells:
        stuck |= 1 << c
    return CellFaultMask(stuck1=stuck)


# --- oracles --------------------------------------------------------------


def oracle_cost(stuck: int, r: int) -> int:
    """Exhaustive: sum of 2^j over logical bits j landing on stuck cells."""
    return sum(2**j for j in range(8) if (stuck >> ((j + r) % 8)) & 1)


def oracle_best_rotation(stuck: int) -> int:
    costs = [oracle_cost(stuck, r) for r in range(8)]
    return costs.index(min(costs))


def oracle_clean_run(stuck: int):
    if stuck == 0:
        return (0, 8)
    best = (0, 0)
    for start in range(8):
        if (stuck >> start) & 1:
            continue
        length = 0
        while length < 8 and not (stuck >> ((start + length) % 8)) & 1:
            length += 1
        if length > best[1]:
            best = (start, length)
    return best


# --- longest clean run -----------------------------------------------------


def test_clean_run_empty_mask():
    assert longest_clean_run(CellFaultMask()) == (0, 8)


def test_clean_run_single_fault_wraps():
    assert longest_clean_run(mask_from_cells({3})) == (4, 7)


def test_clean_run_edges_wrap():
    assert longest_clean_run(mask_from_cells({0, 7})) == (1, 6)


def test_clean_run_full_mask():
    assert longest_clean_run(CellFaultMask(stuck1=0xFF)) == (0, 0)


def test_clean_run_matches_oracle_exhaustively():
    for stuck in range(256):
        assert longest_clean_run(CellFaultMask(stuck1=stuck)) == oracle_clean_run(stuck)


# --- rotation selection ----------------------------------------------------


def test_rotation_empty_mask_is_zero():
    assert compute_rotation(CellFaultMask()) == 0


def test_rotation_single_fault_cell_seven():
    mask = mask_from_cells({7})
    assert compute_rotation(mask) == 7
    assert rotation_cost(mask, 7) == 1


def test_rotation_adjacent_low_cells():
    # the oracle decides; assert equality rather than a hand-picked value
    mask = mask_from_cells({0, 1})
    assert compute_rotation(mask) == oracle_best_rotation(mask.stuck)


def test_rotation_matches_oracle_exhaustively():
    for stuck in range(256):
        mask = CellFaultMask(stuck1=stuck)
        best = compute_rotation(mask)
        assert rotation_cost(mask, best) == min(oracle_cost(stuck, r) for r in range(8))
        assert best == oracle_best_rotation(stuck)


def test_rotation_never_worse_than_identity():
    for stuck in range(256):
        mask = CellFaultMask(stuck1=stuck)
        assert rotation_cost(mask, compute_rotation(mask)) <= rotation_cost(mask, 0)


def test_rotation_grid_matches_scalar():
    fm = generate_fault_map(CrossbarGeometry(16, 16), 0.35, seed=5)
    grid = rotation_grid(fm)
    for r in range(16):
        for c in range(16):
            assert grid[r, c] == compute_rotation(fm.mask_at(r, c))


# --- barrel shuffle ---------------------------------------------------------


def test_shuffle_identity():
    for w in range(256):
        assert shuffle_word(w, 0) == w
        assert unshuffle_word(w, 0) == w


def test_shuffle_single_bit():
    assert shuffle_word(0b0000_0001, 1) == 0b0000_0010


def test_shuffle_roundtrip_all_pairs():
    for w in range(256):
        for r in range(8):
            assert unshuffle_word(shuffle_word(w, r), r) == w


def test_shuffle_consistency_with_stuck_cells():
    # after shuffle/corrupt/unshuffle, only bits charged by the cost function
    # may differ from the original word
    rng = np.random.default_rng(8)
    for _ in range(200):
        w = int(rng.integers(0, 256))
        stuck = int(rng.integers(0, 256))
        split = int(rng.integers(0, 256))
        mask = CellFaultMask(stuck0=stuck & ~split & 0xFF, stuck1=stuck & split)
        r = int(rng.integers(0, 8))
        out = apply_stuck_at(w, mask, r)
        changed = w ^ out
        charged = rotation_cost(mask, r)
        assert changed & ~charged == 0


# --- plans -------------------------------------------------------------------


def neuron_map(tags_by_col, cols=8, rows=8):
    geo = CrossbarGeometry(rows, cols)
    tags = np.zeros(cols, dtype=np.int8)
    for col, kind in tags_by_col.items():
        tags[col] = int(kind)
    return FaultMap(
        geo,
        np.zeros((rows, cols), dtype=np.uint8),
        np.zeros((rows, cols), dtype=np.uint8),
        tags,
        0.0,
        0,
    )


def test_fault_free_plans_match_baseline():
    fm = neuron_map({})
    base = build_plan(Strategy.BASELINE, fm, 16, 8)
    for strategy in (Strategy.FAM1, Strategy.FAM2, Strategy.FAM3):
        plan = build_plan(strategy, fm, 16, 8)
        assert plan.excluded_columns == ()
        assert np.array_equal(plan.column_of, base.column_of)
        assert np.array_equal(plan.pass_of, base.pass_of)
        assert not plan.rotations.any()
        assert plan.passes == base.passes


def test_leak_fault_exclusions():
    fm = neuron_map({5: NeuronFaultKind.LEAK})
    assert excluded_columns_for(Strategy.FAM1, fm) == (5,)
    assert excluded_columns_for(Strategy.FAM2, fm) == (5,)
    assert excluded_columns_for(Strategy.FAM3, fm) == ()
    assert excluded_columns_for(Strategy.BASELINE, fm) == ()


def test_reset_fault_excluded_by_all_fam():
    fm = neuron_map({2: NeuronFaultKind.RESET, 6: NeuronFaultKind.INCREASE})
    assert excluded_columns_for(Strategy.FAM1, fm) == (2, 6)
    assert excluded_columns_for(Strategy.FAM3, fm) == (2,)


def test_column_pass_arithmetic():
    # ceiling oracle: 400 neurons, 256 columns, 10 excluded -> ceil(400/246) = 2
    geo = CrossbarGeometry(256, 256)
    tags = np.zeros(256, dtype=np.int8)
    tags[:10] = int(NeuronFaultKind.RESET)
    fm = FaultMap(
        geo,
        np.zeros((256, 256), dtype=np.uint8),
        np.zeros((256, 256), dtype=np.uint8),
        tags,
        0.0,
        0,
    )
    plan = build_plan(Strategy.FAM1, fm, 784, 400)
    assert plan.usable_cols == 246
    assert plan.column_passes == math.ceil(400 / 246) == 2
    assert plan.row_passes == math.ceil(784 / 256)
    assert plan.passes == plan.column_passes * plan.row_passes


def test_assignment_avoids_excluded_and_is_injective_per_pass():
    fm = generate_fault_map(CrossbarGeometry(16, 16), 0.5, seed=9)
    for strategy in Strategy:
        plan = build_plan(strategy, fm, 32, 40)
        excluded = set(plan.excluded_columns)
        assert not excluded.intersection(plan.column_of.tolist())
        for p in range(plan.column_passes):
            cols = plan.column_of[plan.pass_of == p]
            assert len(set(cols.tolist())) == len(cols)


def test_unmappable_when_all_columns_faulty():
    fm = neuron_map({c: NeuronFaultKind.RESET for c in range(8)})
    with pytest.raises(UnmappableError):
        build_plan(Strategy.FAM1, fm, 16, 8)
    # fam3 also excludes everything here (all faults are reset faults)
    with pytest.raises(UnmappableError):
        build_plan(Strategy.FAM3, fm, 16, 8)
    # baseline still maps
    assert build_plan(Strategy.BASELINE, fm, 16, 8).usable_cols == 8


def test_rotations_identity_unless_strategy_shuffles():
    fm = generate_fault_map(CrossbarGeometry(8, 8), 0.6, seed=2)
    for strategy in (Strategy.BASELINE, Strategy.FAM1):
        assert not build_plan(strategy, fm, 8, 8).rotations.any()
    plan = build_plan(Strategy.FAM2, fm, 8, 8)
    usable = np.setdiff1d(np.arange(8), np.asarray(plan.excluded_columns))
    grid = rotation_grid(fm)
    assert np.array_equal(plan.rotations[:, usable], grid[:, usable])
    excluded = np.asarray(plan.excluded_columns, dtype=int)
    assert not plan.rotations[:, excluded].any()


def test_plan_determinism():
    fm = generate_fault_map(CrossbarGeometry(32, 32), 0.25, seed=4)
    a = build_plan(Strategy.FAM3, fm, 100, 50)
    b = build_plan(Strategy.FAM3, fm, 100, 50)
    assert a.excluded_columns == b.excluded_columns
    assert np.array_equal(a.column_of, b.column_of)
    assert np.array_equal(a.rotations, b.rotations)
    assert a.fault_map_ref == b.fault_map_ref


# --- budget diagnostics -------------------------------------------------------


def test_budget_empty_map():
    fm = generate_fault_map(CrossbarGeometry(8, 8), 0.0, seed=0)
    assert synapses_exceeding_budget(fm) == []


def test_budget_counts_one_entry():
    geo = CrossbarGeometry(4, 4)
    stuck1 = np.zeros((4, 4), dtype=np.uint8)
    stuck1[2, 1] = 0b0000_0111
    fm = FaultMap(
        geo, np.zeros((4, 4), dtype=np.uint8), stuck1, np.zeros(4, dtype=np.int8), 0.0, 0
    )
    assert synapses_exceeding_budget(fm) == [(2, 1, 3)]


def test_budget_rate_one_lists_all():
    fm = generate_fault_map(CrossbarGeometry(4, 4), 1.0, seed=0)
    entries = synapses_exceeding_budget(fm)
    assert len(entries) == 16
    assert all(count == 8 for _, _, count in entries)
