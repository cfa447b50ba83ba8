"""Discrete-time spiking network: rate coding, LIF dynamics, STDP, labeling."""

from snnfault.snn.encoding import encode_rate
from snnfault.snn.neuron import (
    NeuronFaultKind,
    NeuronState,
    faulty_neuron_step,
    lif_step,
)
from snnfault.snn.params import LifParams, StdpParams
from snnfault.snn.stdp import SpikeEvent, stdp_update
from snnfault.snn.network import (
    NO_PREDICTION,
    UNASSIGNED,
    SnnModel,
    SpikeRaster,
    assign_labels,
    classify,
    run_inference,
    run_inference_counts,
    train_stdp,
)

__all__ = [
    "LifParams",
    "StdpParams",
    "NeuronState",
    "NeuronFaultKind",
    "lif_step",
    "faulty_neuron_step",
    "encode_rate",
    "SpikeEvent",
    "stdp_update",
    "SnnModel",
    "SpikeRaster",
    "run_inference",
    "run_inference_counts",
    "train_stdp",
    "assign_labels",
    "classify",
    "UNASSIGNED",
    "NO_PREDICTION",
]
