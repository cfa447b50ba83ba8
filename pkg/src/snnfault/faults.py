"""Permanent-fault model for the crossbar compute engine.

Covers three things:

* stuck-at-0 / stuck-at-1 masks over the 8 memory cells of every synapse
  register, and how a stored weight word reads back through them;
* the four faulty neuron operations (membrane increase, leak, reset, spike
  generation) and their exact step semantics;
* seeded generation of whole-chip fault maps, where the potential fault
  locations are every weight memory cell plus one operation unit per neuron.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from snnfault.bits import (
    WORD_MASK,
    popcount8,
    rotate_left8,
    rotate_left8_array,
    rotate_right8,
    rotate_right8_array,
)
from snnfault.errors import DataError
from snnfault.snn.neuron import NeuronFaultKind, faulty_neuron_step

__all__ = [
    "BITS_PER_WEIGHT",
    "CrossbarGeometry",
    "CellFaultMask",
    "NeuronFaultKind",
    "FaultMap",
    "generate_fault_map",
    "apply_stuck_at",
    "corrupt_weight_matrix",
    "faulty_neuron_step",
]

BITS_PER_WEIGHT = 8


@dataclass(frozen=True)
class CrossbarGeometry:
    """Physical array size: synapse rows x neuron columns, 8-bit weight cells."""

    rows: int
    cols: int
    bits_per_weight: int = BITS_PER_WEIGHT

    def __post_init__(self) -> None:
        if self.rows <= 0 or self.cols <= 0:
            raise DataError(f"geometry must be positive, got {self.rows}x{self.cols}")
        if self.bits_per_weight != BITS_PER_WEIGHT:
            raise DataError("only 8-bit weight registers are modeled")

    @property
    def n_cell_locations(self) -> int:
        return self.rows * self.cols * self.bits_per_weight

    @property
    def n_locations(self) -> int:
        """All potential fault locations: memory cells plus one unit per neuron."""
        return self.n_cell_locations + self.cols


@dataclass(frozen=True)
class CellFaultMask:
    """Stuck-at masks of one synapse register; bit i refers to physical cell i."""

    stuck0: int = 0
    stuck1: int = 0

    def __post_init__(self) -> None:
        for name, m in (("stuck0", self.stuck0), ("stuck1", self.stuck1)):
            if not 0 <= m <= WORD_MASK:
                raise DataError(f"{name} must be an 8-bit mask, got {m}")
        if self.stuck0 & self.stuck1:
            raise DataError("a cell cannot be stuck at both 0 and 1")

    @property
    def stuck(self) -> int:
        """Union mask of all stuck cells."""
        return self.stuck0 | self.stuck1

    @property
    def n_stuck(self) -> int:
        return popcount8(self.stuck)


@dataclass
class FaultMap:
    """Immutable-by-convention fault map of one chip.

    `stuck0`/`stuck1` are (rows, cols) uint8 mask grids; `neuron_faults` is a
    (cols,) int8 array of NeuronFaultKind codes. `fault_rate` and `seed`
    record how the map was generated.
    """

    geometry: CrossbarGeometry
    stuck0: np.ndarray
    stuck1: np.ndarray
    neuron_faults: np.ndarray
    fault_rate: float
    seed: int

    def __post_init__(self) -> None:
        shape = (self.geometry.rows, self.geometry.cols)
        if self.stuck0.shape != shape or self.stuck1.shape != shape:
            raise DataError(f"mask grids must have shape {shape}")
        if self.neuron_faults.shape != (self.geometry.cols,):
            raise DataError(f"neuron_faults must have shape ({self.geometry.cols},)")
        if np.any(self.stuck0 & self.stuck1):
            raise DataError("stuck0 and stuck1 overlap somewhere in the map")

    def mask_at(self, row: int, col: int) -> CellFaultMask:
        return CellFaultMask(int(self.stuck0[row, col]), int(self.stuck1[row, col]))

    @property
    def stuck(self) -> np.ndarray:
        """Union (rows, cols) grid of stuck cells."""
        return self.stuck0 | self.stuck1

    def n_faults(self) -> int:
        """Stuck cells plus faulty neuron units."""
        cells = int(popcount8(self.stuck).sum())
        neurons = int(np.count_nonzero(self.neuron_faults))
        return cells + neurons

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(b"snnfault/faultmap/v1")
        h.update(
            f"{self.geometry.rows},{self.geometry.cols},{self.geometry.bits_per_weight},"
            f"{self.fault_rate!r},{self.seed}".encode()
        )
        h.update(np.ascontiguousarray(self.stuck0).tobytes())
        h.update(np.ascontiguousarray(self.stuck1).tobytes())
        h.update(np.ascontiguousarray(self.neuron_faults).tobytes())
        return h.hexdigest()


def generate_fault_map(
    geometry: CrossbarGeometry, fault_rate: float, seed: int
) -> FaultMap:
    """Draw a seeded random fault map at an exact fault rate.

    Exactly round(fault_rate * n_locations) distinct locations are chosen
    uniformly without replacement. A faulty memory cell becomes stuck-at-0 or
    stuck-at-1 with equal probability; a faulty neuron gets one of the four
    faulty operations uniformly. Identical (geometry, rate, seed) triples
    yield identical maps.
    """
    if not (0.0 <= fault_rate <= 1.0):
        raise DataError(f"fault_rate must be in [0, 1], got {fault_rate}")
    total = geometry.n_locations
    k = round(fault_rate * total)
    rng = np.random.default_rng(seed)
    locations = rng.choice(total, size=k, replace=False)

    n_cells = geometry.n_cell_locations
    cell_locs = locations[locations < n_cells]
    neuron_cols = (locations[locations >= n_cells] - n_cells).astype(np.int64)

    synapse = cell_locs // BITS_PER_WEIGHT
    bit = (cell_locs % BITS_PER_WEIGHT).astype(np.uint8)
    bitmask = np.left_shift(np.uint8(1), bit)
    stuck_at_one = rng.integers(0, 2, size=cell_locs.size).astype(bool)

    stuck0 = np.zeros(geometry.rows * geometry.cols, dtype=np.uint8)
    stuck1 = np.zeros_like(stuck0)
    np.bitwise_or.at(stuck0, synapse[~stuck_at_one], bitmask[~stuck_at_one])
    np.bitwise_or.at(stuck1, synapse[stuck_at_one], bitmask[stuck_at_one])

    neuron_faults = np.zeros(geometry.cols, dtype=np.int8)
    kinds = rng.integers(
        int(NeuronFaultKind.INCREASE),
        int(NeuronFaultKind.SPIKE_GENERATION) + 1,
        size=neuron_cols.size,
    ).astype(np.int8)
    neuron_faults[neuron_cols] = kinds

    return FaultMap(
        geometry=geometry,
        stuck0=stuck0.reshape(geometry.rows, geometry.cols),
        stuck1=stuck1.reshape(geometry.rows, geometry.cols),
        neuron_faults=neuron_faults,
        fault_rate=fault_rate,
        seed=seed,
    )


def apply_stuck_at(code: int, mask: CellFaultMask, rotation: int = 0) -> int:
    """Read back a weight code stored through a faulty register.

    The word is placed with the circular convention cell(bit j) = (j + rotation)
    mod 8, cells forced by the stuck masks, then read back through the same
    placement. Idempotent for a fixed (mask, rotation).
    """
    if not 0 <= code <= WORD_MASK:
        raise DataError(f"weight code must be in [0, 255], got {code}")
    stored = rotate_left8(code, rotation)
    stored = (stored | mask.stuck1) & (~mask.stuck0 & WORD_MASK)
    return rotate_right8(stored, rotation)


def corrupt_weight_matrix(
    weights: np.ndarray,
    fault_map: FaultMap,
    plan=None,
) -> np.ndarray:
    """Route every logical weight through its physical synapse's stuck masks.

    `plan` is a MappingPlan (from snnfault.mapping); None means the identity
    placement: neuron n on column n mod cols, zero rotation everywhere.
    Logical input i always lands on physical row i mod rows, so row tiles
    streamed in different passes share cells and rotation registers.
    Returns the effective uint8 code matrix used for faulty inference.
    """
    weights = np.asarray(weights)
    if weights.ndim != 2:
        raise DataError(f"weights must be 2-D, got shape {weights.shape}")
    if weights.dtype != np.uint8:
        raise DataError("weights must be uint8 codes")
    n_inputs, n_neurons = weights.shape
    geo = fault_map.geometry

    if plan is None:
        column_of = np.arange(n_neurons, dtype=np.int64) % geo.cols
        rotations = np.zeros((geo.rows, geo.cols), dtype=np.uint8)
    else:
        if plan.geometry != geo:
            raise DataError("plan geometry does not match fault map geometry")
        if plan.fault_map_ref != fault_map.fingerprint():
            raise DataError("plan was built against a different fault map")
        if plan.n_inputs != n_inputs or plan.n_neurons != n_neurons:
            raise DataError(
                f"plan is for {plan.n_inputs}x{plan.n_neurons} weights, "
                f"got {n_inputs}x{n_neurons}"
            )
        column_of = plan.column_of
        rotations = plan.rotations

    phys_row = np.arange(n_inputs, dtype=np.int64) % geo.rows
    idx = np.ix_(phys_row, column_of)
    stuck0 = fault_map.stuck0[idx]
    stuck1 = fault_map.stuck1[idx]
    rot = rotations[idx]

    stored = rotate_left8_array(weights, rot).astype(np.uint16)
    stored = (stored | stuck1) & (~stuck0.astype(np.uint16) & WORD_MASK)
    return rotate_right8_array(stored.astype(np.uint8), rot)
