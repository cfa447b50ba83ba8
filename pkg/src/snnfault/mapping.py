"""Fault-aware mapping: column exclusion strategies and bit-shuffle rotations.

Placement convention, used everywhere in the package: a word stored with
rotation r puts logical bit j into physical cell (j + r) mod 8, i.e. the
stored word is the logical word rotated left by r. The per-synapse rotation
is a static 3-bit register; an 8-bit barrel rotate on the read path restores
the original bit order.

The rotation objective: bit j landing on a stuck cell corrupts significance
2^j, so the cost of rotation r against stuck mask m is the integer value of
m rotated right by r (bit j of ror(m, r) is exactly "cell (j+r) mod 8 is
stuck"). compute_rotation returns the argmin over the 8 rotations, which also
aligns the most significant bits with the longest clean run of cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from snnfault.bits import popcount8, rotate_left8, rotate_right8, rotate_right8_array
from snnfault.errors import DataError, UnmappableError
from snnfault.faults import CellFaultMask, CrossbarGeometry, FaultMap, NeuronFaultKind

ROTATION_RANGE = range(8)


class Strategy(str, Enum):
    """Mapping strategies.

    baseline  use every column, no rotations (no mitigation)
    fam1      skip every column with a faulty neuron, no rotations
    fam2      fam1 exclusions plus per-synapse bit-shuffle rotations
    fam3      skip only columns whose neuron has a broken reset, plus rotations
    """

    BASELINE = "baseline"
    FAM1 = "fam1"
    FAM2 = "fam2"
    FAM3 = "fam3"

    @property
    def uses_rotations(self) -> bool:
        return self in (Strategy.FAM2, Strategy.FAM3)


def longest_clean_run(mask: CellFaultMask) -> tuple[int, int]:
    """Longest circular run of non-stuck cells as (start cell, length).

    Wraps around the word boundary, so cells 7 and 0 can belong to one run.
    Ties break toward the smallest start index; an empty mask gives (0, 8)
    and a fully stuck register gives (0, 0).
    """
    stuck = mask.stuck
    if stuck == 0:
        return (0, 8)
    best_start, best_len = 0, 0
    for start in range(8):
        if (stuck >> start) & 1:
            continue
        length = 1
        while length < 8 and not (stuck >> ((start + length) % 8)) & 1:
            length += 1
        if length > best_len:
            best_start, best_len = start, length
    return (best_start, best_len)


def rotation_cost(mask: CellFaultMask, rotation: int) -> int:
    """Total significance (sum of 2^j) of bits landing on stuck cells."""
    if rotation not in ROTATION_RANGE:
        raise DataError(f"rotation must be in [0, 7], got {rotation}")
    return rotate_right8(mask.stuck, rotation)


def compute_rotation(mask: CellFaultMask) -> int:
    """Rotation in [0, 7] minimizing corrupted significance; ties pick the smallest."""
    best_r, best_cost = 0, rotation_cost(mask, 0)
    for r in range(1, 8):
        c = rotation_cost(mask, r)
        if c < best_cost:
            best_r, best_cost = r, c
    return best_r


def shuffle_word(code: int, rotation: int) -> int:
    """Logical weight word -> stored word under the placement convention."""
    _check_word_args(code, rotation)
    return rotate_left8(code, rotation)


def unshuffle_word(stored: int, rotation: int) -> int:
    """Stored word -> logical weight word (inverse barrel rotate)."""
    _check_word_args(stored, rotation)
    return rotate_right8(stored, rotation)


def _check_word_args(word: int, rotation: int) -> None:
    if not 0 <= word <= 0xFF:
        raise DataError(f"word must be in [0, 255], got {word}")
    if rotation not in ROTATION_RANGE:
        raise DataError(f"rotation must be in [0, 7], got {rotation}")


@dataclass
class MappingPlan:
    """Assignment of logical neurons to physical columns plus rotations.

    `column_of[n]` / `pass_of[n]` give the physical column and column-pass of
    logical neuron n; `rotations` is the (rows, cols) grid of 3-bit shuffle
    registers (all zero unless the strategy uses rotations). `fault_map_ref`
    pins the fault map the plan was built against.
    """

    strategy: Strategy
    geometry: CrossbarGeometry
    n_inputs: int
    n_neurons: int
    excluded_columns: tuple[int, ...]
    column_of: np.ndarray
    pass_of: np.ndarray
    rotations: np.ndarray
    fault_map_ref: str

    @property
    def usable_cols(self) -> int:
        return self.geometry.cols - len(self.excluded_columns)

    @property
    def column_passes(self) -> int:
        return math.ceil(self.n_neurons / self.usable_cols)

    @property
    def row_passes(self) -> int:
        return math.ceil(self.n_inputs / self.geometry.rows)

    @property
    def passes(self) -> int:
        return self.column_passes * self.row_passes

    @property
    def utilization(self) -> float:
        return self.usable_cols / self.geometry.cols


def excluded_columns_for(strategy: Strategy, fault_map: FaultMap) -> tuple[int, ...]:
    """Columns a strategy refuses to use, in ascending order."""
    tags = fault_map.neuron_faults
    if strategy in (Strategy.FAM1, Strategy.FAM2):
        cols = np.flatnonzero(tags != int(NeuronFaultKind.NONE))
    elif strategy is Strategy.FAM3:
        cols = np.flatnonzero(tags == int(NeuronFaultKind.RESET))
    else:
        cols = np.empty(0, dtype=np.int64)
    return tuple(int(c) for c in cols)


def rotation_grid(fault_map: FaultMap) -> np.ndarray:
    """Cost-minimizing rotation per physical synapse, vectorized over the grid."""
    stuck = fault_map.stuck
    costs = np.stack([rotate_right8_array(stuck, np.uint8(r)) for r in ROTATION_RANGE])
    # argmin returns the first (= smallest) rotation on ties
    return np.argmin(costs, axis=0).astype(np.uint8)


def build_plan(
    strategy: Strategy,
    fault_map: FaultMap,
    n_inputs: int,
    n_neurons: int,
) -> MappingPlan:
    """Construct the mapping plan of a strategy against a fault map.

    Logical neurons fill non-excluded columns in ascending physical order and
    overflow into additional column passes. Rotation registers are programmed
    for every usable column when the strategy shuffles bits; excluded columns
    keep identity rotation.
    """
    strategy = Strategy(strategy)
    if n_inputs <= 0 or n_neurons <= 0:
        raise DataError("model geometry must be positive")
    geo = fault_map.geometry
    excluded = excluded_columns_for(strategy, fault_map)
    usable = np.setdiff1d(np.arange(geo.cols, dtype=np.int64), np.asarray(excluded))
    if usable.size == 0:
        raise UnmappableError(
            f"{strategy.value}: all {geo.cols} columns are excluded; nothing can be mapped"
        )
    order = np.arange(n_neurons, dtype=np.int64)
    column_of = usable[order % usable.size]
    pass_of = order // usable.size

    rotations = np.zeros((geo.rows, geo.cols), dtype=np.uint8)
    if strategy.uses_rotations:
        grid = rotation_grid(fault_map)
        rotations[:, usable] = grid[:, usable]

    return MappingPlan(
        strategy=strategy,
        geometry=geo,
        n_inputs=n_inputs,
        n_neurons=n_neurons,
        excluded_columns=excluded,
        column_of=column_of,
        pass_of=pass_of,
        rotations=rotations,
        fault_map_ref=fault_map.fingerprint(),
    )


def synapses_exceeding_budget(
    fault_map: FaultMap, budget: int = 2
) -> list[tuple[int, int, int]]:
    """Synapses with more stuck cells than the safe-storage budget.

    Returns (row, col, stuck count) tuples in row-major order, for
    diagnostics; mapping proceeds best-effort regardless.
    """
    counts = popcount8(fault_map.stuck)
    rows, cols = np.nonzero(counts > budget)
    return [(int(r), int(c), int(counts[r, c])) for r, c in zip(rows, cols)]
