"""Crossbar SNN accelerator simulation under permanent faults.

Models a single-layer STDP-trained spiking network running on a crossbar
compute engine, injects seeded permanent faults into synapse memory cells and
neuron operation units, builds fault-aware mapping plans (column exclusion
plus circular bit-shuffling), and estimates the accuracy / throughput /
energy trade-offs of each strategy.
"""

__version__ = "0.1.0"

from snnfault.config import ExperimentConfig
from snnfault.cost import CostReport, HwConstants, compare_strategies, estimate_cost
from snnfault.dataset import LabeledImageSet, load_idx, subset
from snnfault.errors import (
    ConfigError,
    DataError,
    SimulationFault,
    SnnFaultError,
    UnmappableError,
)
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
from snnfault.mapping import (
    MappingPlan,
    Strategy,
    build_plan,
    compute_rotation,
    longest_clean_run,
    shuffle_word,
    synapses_exceeding_budget,
    unshuffle_word,
)
from snnfault.snn import (
    LifParams,
    SnnModel,
    SpikeRaster,
    StdpParams,
    assign_labels,
    classify,
    encode_rate,
    lif_step,
    run_inference,
    stdp_update,
    train_stdp,
)

__all__ = [
    "__version__",
    "ExperimentConfig",
    "HwConstants",
    "CostReport",
    "estimate_cost",
    "compare_strategies",
    "LabeledImageSet",
    "load_idx",
    "subset",
    "SnnFaultError",
    "ConfigError",
    "DataError",
    "UnmappableError",
    "SimulationFault",
    "CrossbarGeometry",
    "CellFaultMask",
    "NeuronFaultKind",
    "FaultMap",
    "generate_fault_map",
    "apply_stuck_at",
    "corrupt_weight_matrix",
    "faulty_neuron_step",
    "Strategy",
    "MappingPlan",
    "build_plan",
    "compute_rotation",
    "longest_clean_run",
    "shuffle_word",
    "unshuffle_word",
    "synapses_exceeding_budget",
    "LifParams",
    "StdpParams",
    "SnnModel",
    "SpikeRaster",
    "encode_rate",
    "lif_step",
    "stdp_update",
    "train_stdp",
    "assign_labels",
    "classify",
    "run_inference",
]
