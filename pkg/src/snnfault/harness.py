"""End-to-end experiment orchestration: train, evaluate, sweep, analyze.

Every report row is a pure function of (config, seeds), so reruns yield
byte-identical CSV files. Test-set encodings are derived per sample from the
config's eval seed and are shared by all strategies, which keeps strategy
comparisons paired. Sweeps are resumable: rows already present in the report
are not recomputed, and the final file is always rewritten in canonical
order.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from snnfault.artifacts import load_model, model_fingerprint, save_model
from snnfault.config import ExperimentConfig
from snnfault.cost import estimate_cost
from snnfault.dataset import LabeledImageSet, load_idx, split_train_test, subset
from snnfault.errors import ConfigError, DataError, UnmappableError
from snnfault.faults import (
    CrossbarGeometry,
    FaultMap,
    NeuronFaultKind,
    corrupt_weight_matrix,
    generate_fault_map,
)
from snnfault.mapping import Strategy, build_plan
from snnfault.snn.encoding import encode_rate
from snnfault.snn.network import (
    NO_PREDICTION,
    N_CLASSES,
    SnnModel,
    assign_labels,
    run_inference_counts,
    train_stdp,
)

# rng stream namespaces (train_stdp uses 0 and 1 internally)
_NS_INIT = 2
_NS_CALIBRATE = 3
_NS_EVAL = 4
_NS_NEURON_ONLY = 5

SWEEP_COLUMNS = [
    "workload",
    "N",
    "strategy",
    "rate",
    "seed",
    "accuracy",
    "passes",
    "latency",
    "throughput",
    "energy",
    "area",
    "utilization",
    "status",
]

ANALYZE_COLUMNS = ["workload", "N", "kind", "rate", "seed", "accuracy", "status"]

_STRATEGY_ORDER = {s.value: i for i, s in enumerate(Strategy)}
_KIND_ORDER = ["increase", "leak", "reset", "spike_generation"]


def fmt(value) -> str:
    """Canonical CSV cell formatting (stable across reruns)."""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def load_split(config: ExperimentConfig) -> tuple[LabeledImageSet, LabeledImageSet]:
    """Training and test subsets per the config.

    With separate test files, both sets are stratified subsets of their own
    files; otherwise one file pair is split into disjoint stratified sets.
    """
    config.require_dataset_files()
    full = load_idx(config.images_path, config.labels_path, source=config.workload)
    if full.n_pixels != config.n_inputs:
        raise DataError(
            f"dataset has {full.n_pixels} pixels per image, config expects "
            f"{config.n_inputs}"
        )
    if config.test_images_path:
        test_full = load_idx(
            config.test_images_path, config.test_labels_path, source=config.workload
        )
        train = subset(full, config.train_size, [config.split_seed, 0])
        test = subset(test_full, config.test_size, [config.split_seed, 1])
        return train, test
    return split_train_test(full, config.train_size, config.test_size, config.split_seed)


def encode_batches(
    images: np.ndarray,
    steps: int,
    max_rate: float,
    seed_path: list[int],
    batch: int,
) -> list[np.ndarray]:
    """Encode a whole image set into fixed-size boolean spike batches.

    Sample i always draws from the stream seeded by seed_path + [i], so the
    encoding is independent of batch size and evaluation order.
    """
    out = []
    n = images.shape[0]
    for start in range(0, n, batch):
        stop = min(start + batch, n)
        grid = np.empty((stop - start, steps, images.shape[1]), dtype=bool)
        for i in range(start, stop):
            rng = np.random.default_rng(seed_path + [i])
            grid[i - start] = encode_rate(images[i], steps, max_rate, rng)
        out.append(grid)
    return out


@dataclass
class EncodedSet:
    """Pre-encoded evaluation set shared by every strategy row."""

    batches: list[np.ndarray]
    labels: np.ndarray


def encode_eval_set(config: ExperimentConfig, test_set: LabeledImageSet) -> EncodedSet:
    batches = encode_batches(
        test_set.images,
        config.steps_per_sample,
        config.max_rate,
        [config.eval_seed, _NS_EVAL],
        config.eval_batch,
    )
    return EncodedSet(batches=batches, labels=test_set.labels.astype(np.int64))


def classify_counts_batch(counts: np.ndarray, neuron_labels: np.ndarray) -> np.ndarray:
    """Vectorized per-sample prediction; silent samples get NO_PREDICTION."""
    indicator = np.zeros((neuron_labels.shape[0], N_CLASSES), dtype=np.int64)
    for cls in range(N_CLASSES):
        indicator[:, cls] = neuron_labels == cls
    votes = counts @ indicator
    preds = np.argmax(votes, axis=1)
    preds[votes.sum(axis=1) == 0] = NO_PREDICTION
    return preds


def evaluate_accuracy(
    model: SnnModel,
    encoded: EncodedSet,
    neuron_fault_overlay=None,
    effective_weights: np.ndarray | None = None,
) -> float:
    """Classification accuracy over a pre-encoded set; no-predictions count
    as incorrect."""
    correct = 0
    total = 0
    offset = 0
    for grid in encoded.batches:
        counts = run_inference_counts(
            model, grid, neuron_fault_overlay, effective_weights
        )
        preds = classify_counts_batch(counts, model.neuron_labels)
        truth = encoded.labels[offset : offset + grid.shape[0]]
        correct += int(np.sum(preds == truth))
        total += grid.shape[0]
        offset += grid.shape[0]
    return correct / total


def train_model(
    config: ExperimentConfig, train_set: LabeledImageSet
) -> SnnModel:
    """Train fault-free, then label neurons from the training set."""
    init_rng = np.random.default_rng([config.train_seed, _NS_INIT])
    model = SnnModel.with_random_weights(
        config.n_inputs,
        config.n_neurons,
        config.lif,
        config.inhibition_strength,
        init_rng,
        code_low=config.init_code_low,
        code_high=config.init_code_high,
    )
    trained = train_stdp(
        model,
        train_set.images,
        stdp=config.stdp,
        steps=config.steps_per_sample,
        max_rate=config.max_rate,
        epochs=config.epochs,
        seed=config.train_seed,
        weight_norm=config.weight_norm_target,
        theta_plus=config.theta_plus,
    )
    calib_batches = encode_batches(
        train_set.images,
        config.steps_per_sample,
        config.max_rate,
        [config.train_seed, _NS_CALIBRATE],
        config.eval_batch,
    )
    counts = np.concatenate(
        [run_inference_counts(trained, grid) for grid in calib_batches]
    )
    trained.neuron_labels = assign_labels(counts, train_set.labels)
    return trained


def overlay_for_plan(plan, fault_map: FaultMap) -> np.ndarray:
    """Per-logical-neuron fault tags implied by the plan's column assignment."""
    return fault_map.neuron_faults[plan.column_of]


def eval_row(
    model: SnnModel,
    encoded: EncodedSet,
    fault_map: FaultMap,
    strategy: Strategy,
    config: ExperimentConfig,
) -> dict:
    """One CSV row: accuracy plus cost metrics, or an unmappable marker."""
    row = {
        "workload": config.workload,
        "N": config.n_neurons,
        "strategy": Strategy(strategy).value,
        "rate": fault_map.fault_rate,
        "seed": fault_map.seed,
    }
    try:
        plan = build_plan(strategy, fault_map, model.n_inputs, model.n_neurons)
    except UnmappableError:
        row.update(
            accuracy="",
            passes="",
            latency="",
            throughput="",
            energy="",
            area="",
            utilization="",
            status="unmappable",
        )
        return row
    effective = corrupt_weight_matrix(model.weights, fault_map, plan)
    overlay = overlay_for_plan(plan, fault_map)
    accuracy = evaluate_accuracy(model, encoded, overlay, effective)
    cost = estimate_cost(plan, config.steps_per_sample, config.hw)
    row.update(
        accuracy=accuracy,
        passes=cost.passes,
        latency=cost.latency_per_sample_s,
        throughput=cost.throughput_sps,
        energy=cost.energy_per_sample_j,
        area=cost.area_mm2,
        utilization=cost.utilization,
        status="ok",
    )
    return row


def neuron_only_fault_map(
    geometry: CrossbarGeometry, rate: float, kind: NeuronFaultKind, seed: int
) -> FaultMap:
    """Map with fault-free synapses and round(rate * cols) neurons all broken
    the same way; used to isolate the impact of one faulty operation."""
    if not 0.0 <= rate <= 1.0:
        raise DataError(f"rate must be in [0, 1], got {rate}")
    k = round(rate * geometry.cols)
    rng = np.random.default_rng([seed, _NS_NEURON_ONLY])
    chosen = rng.choice(geometry.cols, size=k, replace=False)
    tags = np.zeros(geometry.cols, dtype=np.int8)
    tags[chosen] = int(kind)
    zero_masks = np.zeros((geometry.rows, geometry.cols), dtype=np.uint8)
    return FaultMap(
        geometry=geometry,
        stuck0=zero_masks,
        stuck1=zero_masks.copy(),
        neuron_faults=tags,
        fault_rate=rate,
        seed=seed,
    )


def analyze_rows(
    model: SnnModel,
    encoded: EncodedSet,
    config: ExperimentConfig,
    kinds: list[NeuronFaultKind] | None = None,
    rates: list[float] | None = None,
    seeds: list[int] | None = None,
) -> list[dict]:
    """Accuracy per single faulty-operation kind at each rate, baseline mapping."""
    kinds = kinds or [
        NeuronFaultKind.INCREASE,
        NeuronFaultKind.LEAK,
        NeuronFaultKind.RESET,
        NeuronFaultKind.SPIKE_GENERATION,
    ]
    rates = config.fault_rates if rates is None else rates
    seeds = config.map_seeds if seeds is None else seeds
    rows = []
    for kind in kinds:
        for rate in rates:
            for seed in seeds:
                fm = neuron_only_fault_map(config.geometry, rate, kind, seed)
                plan = build_plan(Strategy.BASELINE, fm, model.n_inputs, model.n_neurons)
                overlay = overlay_for_plan(plan, fm)
                accuracy = evaluate_accuracy(model, encoded, overlay, None)
                rows.append(
                    {
                        "workload": config.workload,
                        "N": config.n_neurons,
                        "kind": kind.name.lower(),
                        "rate": rate,
                        "seed": seed,
                        "accuracy": accuracy,
                        "status": "ok",
                    }
                )
    return rows


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def sort_sweep_rows(rows: list[dict]) -> list[dict]:
    return sorted(
        rows,
        key=lambda r: (
            str(r["workload"]),
            int(r["N"]),
            _STRATEGY_ORDER.get(str(r["strategy"]), 99),
            float(r["rate"]),
            int(r["seed"]),
        ),
    )


def aggregate_sweep_rows(rows: list[dict]) -> list[dict]:
    """Per (workload, N, strategy, rate): mean and population std over seeds."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if str(row["status"]) != "ok":
            continue
        key = (str(row["workload"]), int(row["N"]), str(row["strategy"]), float(row["rate"]))
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(
        groups, key=lambda k: (k[0], k[1], _STRATEGY_ORDER.get(k[2], 99), k[3])
    ):
        members = groups[key]
        acc = np.array([float(r["accuracy"]) for r in members])
        thr = np.array([float(r["throughput"]) for r in members])
        out.append(
            {
                "workload": key[0],
                "N": key[1],
                "strategy": key[2],
                "rate": key[3],
                "n_seeds": len(members),
                "accuracy_mean": float(acc.mean()),
                "accuracy_std": float(acc.std()),
                "throughput_mean": float(thr.mean()),
                "throughput_std": float(thr.std()),
            }
        )
    return out


AGGREGATE_COLUMNS = [
    "workload",
    "N",
    "strategy",
    "rate",
    "n_seeds",
    "accuracy_mean",
    "accuracy_std",
    "throughput_mean",
    "throughput_std",
]


def _read_rows(path: Path, columns: list[str]) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != columns:
            raise DataError(f"{path}: unexpected report schema {reader.fieldnames}")
        return list(reader)


# --- sweep execution ----------------------------------------------------

_WORKER_CTX: dict = {}


def _sweep_worker_init(config_json: str, model_path: str) -> None:
    config = ExperimentConfig.from_json(config_json)
    model = load_model(model_path)
    _, test_set = load_split(config)
    _WORKER_CTX["config"] = config
    _WORKER_CTX["model"] = model
    _WORKER_CTX["encoded"] = encode_eval_set(config, test_set)


def _sweep_worker_task(strategy: str, rate: float, seed: int) -> dict:
    config = _WORKER_CTX["config"]
    fm = generate_fault_map(config.geometry, rate, seed)
    return eval_row(
        _WORKER_CTX["model"], _WORKER_CTX["encoded"], fm, Strategy(strategy), config
    )


@dataclass
class SweepResult:
    rows_path: Path
    aggregate_path: Path
    meta_path: Path
    rows: list[dict]


def run_sweep(
    config: ExperimentConfig,
    out_dir: str | Path,
    model: SnnModel | None = None,
    model_path: str | Path | None = None,
    workers: int = 1,
) -> SweepResult:
    """Cross product of (strategy, rate, seed), one CSV row each.

    Resumes from an existing rows.csv when the config fingerprint matches;
    refuses to mix results from different configs. A missing model is trained
    from scratch and checkpointed next to the reports.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_path = out_dir / "rows.csv"
    aggregate_path = out_dir / "aggregate.csv"
    meta_path = out_dir / "meta.json"
    fingerprint = config.fingerprint()

    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        if meta.get("config_fingerprint") != fingerprint:
            raise ConfigError(
                f"{out_dir} holds results for a different config "
                f"(fingerprint {meta.get('config_fingerprint', '?')[:12]}...); "
                "use a fresh output directory"
            )
    else:
        meta = {"config_fingerprint": fingerprint}

    train_set, test_set = load_split(config)
    if model is None:
        if model_path and Path(model_path).exists():
            model = load_model(model_path)
        else:
            model = train_model(config, train_set)
            model_path = model_path or (out_dir / "model.npz")
            save_model(model, model_path)
    encoded = encode_eval_set(config, test_set)
    meta["model_fingerprint"] = model_fingerprint(model)
    meta["fault_free_accuracy"] = evaluate_accuracy(model, encoded)

    done: dict[tuple, dict] = {}
    if rows_path.exists():
        for row in _read_rows(rows_path, SWEEP_COLUMNS):
            done[(row["strategy"], row["rate"], row["seed"])] = row

    todo = []
    for rate in config.fault_rates:
        for seed in config.map_seeds:
            for strategy in config.strategies:
                key = (strategy, fmt(float(rate)), fmt(seed))
                if key not in done:
                    todo.append((strategy, float(rate), int(seed)))

    new_rows: list[dict] = []
    if todo and workers > 1:
        if model_path is None:
            model_path = out_dir / "model.npz"
            save_model(model, model_path)
        strategies, rates, seeds = zip(*todo)
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_sweep_worker_init,
            initargs=(config.to_json(), str(model_path)),
        ) as pool:
            new_rows = list(pool.map(_sweep_worker_task, strategies, rates, seeds))
    else:
        for strategy, rate, seed in todo:
            fm = generate_fault_map(config.geometry, rate, seed)
            new_rows.append(eval_row(model, encoded, fm, Strategy(strategy), config))

    all_rows = list(done.values()) + [
        {k: fmt(v) for k, v in row.items()} for row in new_rows
    ]
    all_rows = sort_sweep_rows(all_rows)
    rows_path.write_text(rows_to_csv(all_rows, SWEEP_COLUMNS))
    aggregate = aggregate_sweep_rows(all_rows)
    aggregate_path.write_text(rows_to_csv(aggregate, AGGREGATE_COLUMNS))
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return SweepResult(rows_path, aggregate_path, meta_path, all_rows)
