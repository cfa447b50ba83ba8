"""Single-layer fully-connected SNN: simulation, training, labeling, readout.

The network connects every input line to N excitatory LIF neurons (one per
physical crossbar column when mapped). Each output spike inhibits all other
neurons by a fixed subtractive amount in the same step, floored at the reset
potential, which implements soft winner-take-all competition. Because time is
discrete, simultaneous threshold crossings are resolved by the inhibition
fabric: at most one crossing fires per step, the one with the highest
membrane potential (lowest index on ties); the losers keep their potential,
get inhibited like every other non-spiking neuron, and retry on later steps.
Neurons latched into saturation by a broken reset path sit outside this
arbitration and fire unconditionally.

Simulation semantics are defined neuron-for-neuron by `lif_step` and
`faulty_neuron_step`; the vectorized loop here must match them exactly (the
test suite checks this against the scalar reference). Training runs the same
dynamics fault-free and applies the pair-based weight-dependent STDP rule
from `snnfault.snn.stdp` with per-step trace bookkeeping:

* traces decay multiplicatively every step;
* an input spike depresses its row using the current post trace, then bumps
  the input trace by one;
* an output spike potentiates its column using the already-bumped input
  trace (a pre and post spike in the same step counts as pre-before-post),
  then bumps the post trace.

Weights live in [0, wgh_m] as floats during training and are quantized back
to 8-bit codes (value = code / 255) at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from snnfault.errors import DataError
from snnfault.snn.encoding import encode_rate
from snnfault.snn.neuron import NeuronFaultKind
from snnfault.snn.params import LifParams, StdpParams

UNASSIGNED = -1
NO_PREDICTION = -1
N_CLASSES = 10

# rng stream namespaces, so sample encodings and shuffles never collide
_NS_TRAIN_ENCODE = 0
_NS_TRAIN_ORDER = 1


@dataclass
class SnnModel:
    """Trained single-layer network plus everything inference needs.

    `weights` holds unsigned 8-bit fixed-point codes, value = code / 255.
    `neuron_labels[n]` is the class a neuron votes for, or UNASSIGNED.
    """

    n_inputs: int
    n_neurons: int
    weights: np.ndarray
    lif: LifParams
    inhibition_strength: float
    neuron_labels: np.ndarray = field(default=None)  # type: ignore[assignment]
    train_seed: int | None = None

    def __post_init__(self) -> None:
        if self.neuron_labels is None:
            self.neuron_labels = np.full(self.n_neurons, UNASSIGNED, dtype=np.int16)
        self.weights = np.asarray(self.weights)
        if self.weights.shape != (self.n_inputs, self.n_neurons):
            raise DataError(
                f"weights shape {self.weights.shape} does not match "
                f"({self.n_inputs}, {self.n_neurons})"
            )
        if self.weights.dtype != np.uint8:
            raise DataError("weights must be uint8 codes")
        if self.neuron_labels.shape != (self.n_neurons,):
            raise DataError("neuron_labels length must equal n_neurons")
        if self.inhibition_strength < 0:
            raise DataError("inhibition_strength must be >= 0")

    @classmethod
    def with_random_weights(
        cls,
        n_inputs: int,
        n_neurons: int,
        lif: LifParams,
        inhibition_strength: float,
        rng: np.random.Generator,
        code_low: int = 51,
        code_high: int = 102,
    ) -> "SnnModel":
        codes = rng.integers(code_low, code_high + 1, size=(n_inputs, n_neurons))
        return cls(
            n_inputs=n_inputs,
            n_neurons=n_neurons,
            weights=codes.astype(np.uint8),
            lif=lif,
            inhibition_strength=inhibition_strength,
        )

    def weight_values(self) -> np.ndarray:
        """Float weight matrix in [0, 1]."""
        return self.weights.astype(np.float64) / 255.0


@dataclass
class SpikeRaster:
    """Input and output spike grids of one simulated sample."""

    input_spikes: np.ndarray
    output_spikes: np.ndarray

    def __post_init__(self) -> None:
        if self.input_spikes.ndim != 2 or self.output_spikes.ndim != 2:
            raise DataError("spike grids must be 2-D (steps x units)")
        if self.input_spikes.shape[0] != self.output_spikes.shape[0]:
            raise DataError("input and output grids disagree on step count")

    @property
    def steps(self) -> int:
        return self.input_spikes.shape[0]


def _simulate(
    weight_values: np.ndarray,
    lif: LifParams,
    inhibition_strength: float,
    tags: np.ndarray | None,
    input_spikes: np.ndarray,
    record: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Vectorized dynamics over a (batch, steps, inputs) spike grid.

    Returns per-neuron spike counts (batch, neurons) and, when `record`, the
    full (batch, steps, neurons) output raster. Matches the scalar reference
    step functions exactly; samples in a batch are independent.
    """
    batch, steps, n_inputs = input_spikes.shape
    n_neurons = weight_values.shape[1]
    if tags is None:
        tags = np.zeros(n_neurons, dtype=np.int8)
    increase = tags == int(NeuronFaultKind.INCREASE)
    leak_fault = tags == int(NeuronFaultKind.LEAK)
    reset_fault = tags == int(NeuronFaultKind.RESET)
    silent_fault = tags == int(NeuronFaultKind.SPIKE_GENERATION)
    any_increase = bool(increase.any())

    v = np.full((batch, n_neurons), lif.v_rest, dtype=np.float64)
    refractory = np.zeros((batch, n_neurons), dtype=np.int32)
    saturated = np.zeros((batch, n_neurons), dtype=bool)
    counts = np.zeros((batch, n_neurons), dtype=np.int64)
    raster = np.zeros((batch, steps, n_neurons), dtype=bool) if record else None

    for t in range(steps):
        drive = input_spikes[:, t, :].astype(np.float64) @ weight_values
        if any_increase:
            drive[:, increase] = 0.0
        active = refractory == 0
        integrating = active & ~saturated
        leaky = integrating & ~leak_fault
        v = np.where(
            leaky, lif.v_rest + lif.leak_factor * (v - lif.v_rest) + drive, v
        )
        nonleaky = integrating & leak_fault
        if nonleaky.any():
            v = np.where(nonleaky, v + drive, v)
        refractory = np.where(~active & ~saturated, refractory - 1, refractory)

        candidates = integrating & (v >= lif.v_th)
        winner = np.zeros_like(candidates)
        if candidates.any():
            masked = np.where(candidates, v, -np.inf)
            idx = np.argmax(masked, axis=1)  # first max = lowest index on ties
            rows = np.arange(batch)
            winner[rows, idx] = candidates[rows, idx]
        saturated = saturated | (winner & reset_fault)
        resetting = winner & ~reset_fault
        v = np.where(resetting, lif.v_reset, v)
        if lif.refractory_steps > 0:
            refractory = np.where(resetting, lif.refractory_steps, refractory)
        spikes = saturated | (winner & ~reset_fault & ~silent_fault)

        if inhibition_strength > 0:
            hit = (~spikes) & spikes.any(axis=1, keepdims=True)
            v = np.where(hit, np.maximum(v - inhibition_strength, lif.v_reset), v)

        counts += spikes
        if record:
            raster[:, t, :] = spikes
    return counts, raster


def _resolve_weights(model: SnnModel, effective_weights: np.ndarray | None) -> np.ndarray:
    if effective_weights is None:
        return model.weight_values()
    effective_weights = np.asarray(effective_weights)
    if effective_weights.shape != (model.n_inputs, model.n_neurons):
        raise DataError(
            f"effective weights shape {effective_weights.shape} does not match model"
        )
    if effective_weights.dtype != np.uint8:
        raise DataError("effective weights must be uint8 codes")
    return effective_weights.astype(np.float64) / 255.0


def _resolve_overlay(model: SnnModel, overlay) -> np.ndarray | None:
    if overlay is None:
        return None
    tags = np.asarray(overlay, dtype=np.int8)
    if tags.shape != (model.n_neurons,):
        raise DataError(f"overlay must have shape ({model.n_neurons},)")
    return tags


def run_inference(
    model: SnnModel,
    input_spikes: np.ndarray,
    neuron_fault_overlay=None,
    effective_weights: np.ndarray | None = None,
) -> SpikeRaster:
    """Simulate one sample and return its full spike raster.

    `neuron_fault_overlay` optionally tags each neuron with a
    NeuronFaultKind; `effective_weights` optionally substitutes a corrupted
    code matrix. Identical arguments always produce identical rasters.
    """
    input_spikes = np.asarray(input_spikes, dtype=bool)
    if input_spikes.ndim != 2 or input_spikes.shape[1] != model.n_inputs:
        raise DataError(
            f"input grid must be (steps, {model.n_inputs}), got {input_spikes.shape}"
        )
    weights = _resolve_weights(model, effective_weights)
    tags = _resolve_overlay(model, neuron_fault_overlay)
    _, raster = _simulate(
        weights,
        model.lif,
        model.inhibition_strength,
        tags,
        input_spikes[None, :, :],
        record=True,
    )
    return SpikeRaster(input_spikes=input_spikes, output_spikes=raster[0])


def run_inference_counts(
    model: SnnModel,
    input_spikes_batch: np.ndarray,
    neuron_fault_overlay=None,
    effective_weights: np.ndarray | None = None,
) -> np.ndarray:
    """Per-neuron spike counts for a (batch, steps, inputs) grid of samples."""
    input_spikes_batch = np.asarray(input_spikes_batch, dtype=bool)
    if input_spikes_batch.ndim != 3 or input_spikes_batch.shape[2] != model.n_inputs:
        raise DataError(
            f"batch grid must be (batch, steps, {model.n_inputs}), "
            f"got {input_spikes_batch.shape}"
        )
    weights = _resolve_weights(model, effective_weights)
    tags = _resolve_overlay(model, neuron_fault_overlay)
    counts, _ = _simulate(
        weights, model.lif, model.inhibition_strength, tags, input_spikes_batch
    )
    return counts


def _train_one_sample(
    W: np.ndarray,
    lif: LifParams,
    inhibition_strength: float,
    stdp: StdpParams,
    spikes_in: np.ndarray,
    theta: np.ndarray,
    theta_plus: float,
) -> None:
    """Present one encoded sample, updating W (and theta) in place via STDP.

    `theta` is the per-neuron train-time threshold offset: each spike raises
    the spiking neuron's effective threshold by `theta_plus` for the rest of
    training, spreading activity across the population. It is a training
    stabilizer only; inference always runs with the constant v_th.
    """
    n_inputs, n_neurons = W.shape
    v = np.full(n_neurons, lif.v_rest, dtype=np.float64)
    refractory = np.zeros(n_neurons, dtype=np.int32)
    x_pre = np.zeros(n_inputs, dtype=np.float64)
    x_post = np.zeros(n_neurons, dtype=np.float64)
    mu = stdp.mu
    wm = stdp.wgh_m

    for t in range(spikes_in.shape[0]):
        x_pre *= stdp.trace_decay_pre
        x_post *= stdp.trace_decay_post
        pre = np.flatnonzero(spikes_in[t])

        active = refractory == 0
        drive = W[pre].sum(axis=0) if pre.size else 0.0
        v = np.where(active, lif.v_rest + lif.leak_factor * (v - lif.v_rest) + drive, v)
        refractory = np.where(active, refractory, refractory - 1)
        candidates = active & (v >= lif.v_th + theta)
        if candidates.any():
            # same single-crossing arbitration as the inference simulator
            post = np.array([np.argmax(np.where(candidates, v, -np.inf))])
        else:
            post = np.empty(0, dtype=np.int64)
        if post.size:
            v[post] = lif.v_reset
            theta[post] += theta_plus
            if lif.refractory_steps > 0:
                refractory[post] = lif.refractory_steps
            if inhibition_strength > 0:
                others = np.ones(n_neurons, dtype=bool)
                others[post] = False
                v[others] = np.maximum(v[others] - inhibition_strength, lif.v_reset)

        if pre.size:
            rows = W[pre]
            rows -= stdp.eta_pre * x_post[None, :] * (rows if mu == 1.0 else rows**mu)
            np.clip(rows, 0.0, wm, out=rows)
            W[pre] = rows
            x_pre[pre] += 1.0
        if post.size:
            cols = W[:, post]
            cols += stdp.eta_post * x_pre[:, None] * (
                (wm - cols) if mu == 1.0 else (wm - cols) ** mu
            )
            np.clip(cols, 0.0, wm, out=cols)
            W[:, post] = cols
            x_post[post] += 1.0


def _normalize_columns(W: np.ndarray, target: float, wgh_m: float) -> None:
    """Rescale each neuron's total input weight to `target`, in place."""
    sums = W.sum(axis=0)
    scale = np.where(sums > 0, target / np.maximum(sums, 1e-12), 1.0)
    W *= scale[None, :]
    np.clip(W, 0.0, wgh_m, out=W)


def train_stdp(
    model: SnnModel,
    images: np.ndarray,
    *,
    stdp: StdpParams,
    steps: int,
    max_rate: float,
    epochs: int,
    seed: int,
    weight_norm: float | None = None,
    theta_plus: float = 0.0,
) -> SnnModel:
    """Train the model unsupervised on fault-free hardware.

    Images are presented in a seed-shuffled order, each encoded with its own
    deterministic rate-coding stream, so retraining with the same seed
    reproduces the weight matrix bit for bit. Returns a new model with
    quantized weights and cleared neuron labels.

    Two standard stabilizers of this training protocol are available; both
    are train-only and leave the stored model and its inference dynamics
    untouched:

    * `weight_norm` rescales every neuron's total input weight to that value
      after each presentation (individual weights stay in [0, wgh_m]);
    * `theta_plus` raises a neuron's train-time threshold a little on each of
      its spikes, so no neuron can monopolize the competition.
    """
    images = np.asarray(images)
    if images.ndim != 2 or images.shape[1] != model.n_inputs:
        raise DataError(
            f"images must be (count, {model.n_inputs}), got {images.shape}"
        )
    if images.shape[0] == 0:
        raise DataError("training dataset is empty")
    if epochs < 0:
        raise DataError("epochs must be >= 0")

    W = model.weight_values() * stdp.wgh_m
    theta = np.zeros(model.n_neurons, dtype=np.float64)
    for epoch in range(epochs):
        if weight_norm is not None:
            _normalize_columns(W, weight_norm, stdp.wgh_m)
        order_rng = np.random.default_rng([seed, _NS_TRAIN_ORDER, epoch])
        for idx in order_rng.permutation(images.shape[0]):
            encode_rng = np.random.default_rng([seed, _NS_TRAIN_ENCODE, epoch, int(idx)])
            spikes_in = encode_rate(images[idx], steps, max_rate, encode_rng)
            _train_one_sample(
                W, model.lif, model.inhibition_strength, stdp, spikes_in, theta, theta_plus
            )
            if weight_norm is not None:
                _normalize_columns(W, weight_norm, stdp.wgh_m)

    codes = np.rint(W / stdp.wgh_m * 255.0).astype(np.uint8)
    return replace(
        model,
        weights=codes,
        neuron_labels=np.full(model.n_neurons, UNASSIGNED, dtype=np.int16),
        train_seed=seed,
    )


def assign_labels(counts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Label each neuron with the class maximizing its mean spike count.

    `counts` is (samples, neurons) fault-free spike counts over a labeled
    calibration set. Neurons that never spiked become UNASSIGNED; ties break
    toward the lower class id.
    """
    counts = np.asarray(counts)
    labels = np.asarray(labels)
    if counts.ndim != 2 or counts.shape[0] != labels.shape[0]:
        raise DataError("counts and labels disagree on sample count")
    means = np.zeros((N_CLASSES, counts.shape[1]), dtype=np.float64)
    for cls in range(N_CLASSES):
        members = labels == cls
        if members.any():
            means[cls] = counts[members].mean(axis=0)
    assigned = np.argmax(means, axis=0).astype(np.int16)  # first max = lowest class
    assigned[counts.sum(axis=0) == 0] = UNASSIGNED
    return assigned


def classify_counts(counts: np.ndarray, neuron_labels: np.ndarray) -> int:
    """Predicted class from per-neuron spike counts; NO_PREDICTION when no
    labeled neuron spiked."""
    counts = np.asarray(counts)
    neuron_labels = np.asarray(neuron_labels)
    if counts.shape != neuron_labels.shape:
        raise DataError("counts and neuron_labels must align")
    votes = np.zeros(N_CLASSES, dtype=np.int64)
    for cls in range(N_CLASSES):
        votes[cls] = counts[neuron_labels == cls].sum()
    if votes.sum() == 0:
        return NO_PREDICTION
    return int(np.argmax(votes))  # first max = lowest class id


def classify(raster: SpikeRaster, neuron_labels: np.ndarray) -> int:
    """Predicted class of one output raster (argmax of summed labeled votes)."""
    return classify_counts(raster.output_spikes.sum(axis=0), neuron_labels)
