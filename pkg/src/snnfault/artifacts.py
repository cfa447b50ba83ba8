"""Versioned persistence for models, fault maps, and mapping plans.

All artifacts are numpy .npz archives with a JSON `meta` entry carrying a
format version and a content fingerprint (sha256 over the canonical field
bytes, not over the file). Loading verifies the fingerprint, and plans refuse
to load against a fault map other than the one they were built for. File
names are free; the archive is self-describing via meta["kind"].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from snnfault.errors import DataError
from snnfault.faults import CrossbarGeometry, FaultMap, NeuronFaultKind
from snnfault.mapping import MappingPlan, Strategy
from snnfault.snn.network import SnnModel
from snnfault.snn.params import LifParams

FORMAT_VERSION = 1


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def model_fingerprint(model: SnnModel) -> str:
    h = hashlib.sha256()
    h.update(b"snnfault/model/v1")
    h.update(
        _canonical_json(
            {
                "n_inputs": model.n_inputs,
                "n_neurons": model.n_neurons,
                "lif": asdict(model.lif),
                "inhibition_strength": model.inhibition_strength,
                "train_seed": model.train_seed,
            }
        ).encode()
    )
    h.update(np.ascontiguousarray(model.weights).tobytes())
    h.update(np.ascontiguousarray(model.neuron_labels).tobytes())
    return h.hexdigest()


def plan_fingerprint(plan: MappingPlan) -> str:
    h = hashlib.sha256()
    h.update(b"snnfault/plan/v1")
    h.update(
        _canonical_json(
            {
                "strategy": plan.strategy.value,
                "rows": plan.geometry.rows,
                "cols": plan.geometry.cols,
                "n_inputs": plan.n_inputs,
                "n_neurons": plan.n_neurons,
                "excluded": list(plan.excluded_columns),
                "fault_map_ref": plan.fault_map_ref,
            }
        ).encode()
    )
    h.update(np.ascontiguousarray(plan.column_of).tobytes())
    h.update(np.ascontiguousarray(plan.pass_of).tobytes())
    h.update(np.ascontiguousarray(plan.rotations).tobytes())
    return h.hexdigest()


def _save_npz(path: str | Path, meta: dict, arrays: dict) -> None:
    meta = dict(meta, format_version=FORMAT_VERSION)
    np.savez(path, meta=np.frombuffer(_canonical_json(meta).encode(), dtype=np.uint8), **arrays)


def _load_npz(path: str | Path, expected_kind: str) -> tuple[dict, np.lib.npyio.NpzFile]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"artifact not found: {path}")
    archive = np.load(path, allow_pickle=False)
    if "meta" not in archive:
        raise DataError(f"{path}: not a snnfault artifact (no meta entry)")
    meta = json.loads(bytes(archive["meta"]).decode())
    if meta.get("kind") != expected_kind:
        raise DataError(
            f"{path}: expected a {expected_kind} artifact, found {meta.get('kind')!r}"
        )
    if meta.get("format_version") != FORMAT_VERSION:
        raise DataError(
            f"{path}: unsupported format version {meta.get('format_version')}"
        )
    return meta, archive


def save_model(model: SnnModel, path: str | Path) -> str:
    """Persist a model checkpoint; returns its content fingerprint."""
    fp = model_fingerprint(model)
    meta = {
        "kind": "model",
        "n_inputs": model.n_inputs,
        "n_neurons": model.n_neurons,
        "lif": asdict(model.lif),
        "inhibition_strength": model.inhibition_strength,
        "train_seed": model.train_seed,
        "fingerprint": fp,
    }
    _save_npz(path, meta, {"weights": model.weights, "labels": model.neuron_labels})
    return fp


def load_model(path: str | Path) -> SnnModel:
    meta, archive = _load_npz(path, "model")
    model = SnnModel(
        n_inputs=meta["n_inputs"],
        n_neurons=meta["n_neurons"],
        weights=archive["weights"],
        lif=LifParams(**meta["lif"]),
        inhibition_strength=meta["inhibition_strength"],
        neuron_labels=archive["labels"],
        train_seed=meta["train_seed"],
    )
    if model_fingerprint(model) != meta["fingerprint"]:
        raise DataError(f"{path}: model fingerprint mismatch (corrupt checkpoint)")
    return model


def save_fault_map(fault_map: FaultMap, path: str | Path) -> str:
    fp = fault_map.fingerprint()
    meta = {
        "kind": "faultmap",
        "rows": fault_map.geometry.rows,
        "cols": fault_map.geometry.cols,
        "bits_per_weight": fault_map.geometry.bits_per_weight,
        "fault_rate": fault_map.fault_rate,
        "seed": fault_map.seed,
        "fingerprint": fp,
    }
    _save_npz(
        path,
        meta,
        {
            "stuck0": fault_map.stuck0,
            "stuck1": fault_map.stuck1,
            "neuron_faults": fault_map.neuron_faults,
        },
    )
    return fp


def load_fault_map(path: str | Path) -> FaultMap:
    meta, archive = _load_npz(path, "faultmap")
    fm = FaultMap(
        geometry=CrossbarGeometry(meta["rows"], meta["cols"], meta["bits_per_weight"]),
        stuck0=archive["stuck0"],
        stuck1=archive["stuck1"],
        neuron_faults=archive["neuron_faults"],
        fault_rate=meta["fault_rate"],
        seed=meta["seed"],
    )
    if fm.fingerprint() != meta["fingerprint"]:
        raise DataError(f"{path}: fault map fingerprint mismatch (corrupt file)")
    return fm


def save_plan(plan: MappingPlan, path: str | Path) -> str:
    fp = plan_fingerprint(plan)
    meta = {
        "kind": "plan",
        "strategy": plan.strategy.value,
        "rows": plan.geometry.rows,
        "cols": plan.geometry.cols,
        "bits_per_weight": plan.geometry.bits_per_weight,
        "n_inputs": plan.n_inputs,
        "n_neurons": plan.n_neurons,
        "excluded_columns": list(plan.excluded_columns),
        "fault_map_ref": plan.fault_map_ref,
        "fingerprint": fp,
    }
    _save_npz(
        path,
        meta,
        {
            "column_of": plan.column_of,
            "pass_of": plan.pass_of,
            "rotations": plan.rotations,
        },
    )
    return fp


def load_plan(path: str | Path, fault_map: FaultMap | None = None) -> MappingPlan:
    """Load a plan; when a fault map is supplied, reject a stale plan."""
    meta, archive = _load_npz(path, "plan")
    plan = MappingPlan(
        strategy=Strategy(meta["strategy"]),
        geometry=CrossbarGeometry(meta["rows"], meta["cols"], meta["bits_per_weight"]),
        n_inputs=meta["n_inputs"],
        n_neurons=meta["n_neurons"],
        excluded_columns=tuple(meta["excluded_columns"]),
        column_of=archive["column_of"],
        pass_of=archive["pass_of"],
        rotations=archive["rotations"],
        fault_map_ref=meta["fault_map_ref"],
    )
    if plan_fingerprint(plan) != meta["fingerprint"]:
        raise DataError(f"{path}: plan fingerprint mismatch (corrupt file)")
    if fault_map is not None and plan.fault_map_ref != fault_map.fingerprint():
        raise DataError(
            f"{path}: plan was built against fault map {plan.fault_map_ref[:12]}..., "
            f"not the supplied map {fault_map.fingerprint()[:12]}..."
        )
    return plan


def dump_fault_map(fault_map: FaultMap, max_lines: int | None = None) -> str:
    """Human-readable fault map listing."""
    geo = fault_map.geometry
    lines = [
        f"fault map: {geo.rows}x{geo.cols} crossbar, {geo.bits_per_weight}-bit weights",
        f"rate={fault_map.fault_rate} seed={fault_map.seed} "
        f"faults={fault_map.n_faults()}/{geo.n_locations}",
        f"fingerprint={fault_map.fingerprint()}",
    ]
    faulty_neurons = np.flatnonzero(fault_map.neuron_faults)
    lines.append(f"faulty neurons: {faulty_neurons.size}")
    for col in faulty_neurons:
        kind = NeuronFaultKind(int(fault_map.neuron_faults[col]))
        lines.append(f"  neuron col={int(col)} fault={kind.name.lower()}")
    stuck = fault_map.stuck
    rows, cols = np.nonzero(stuck)
    lines.append(f"faulty synapses: {rows.size}")
    for i, (r, c) in enumerate(zip(rows, cols)):
        if max_lines is not None and i >= max_lines:
            lines.append(f"  ... {rows.size - i} more")
            break
        lines.append(
            f"  synapse ({int(r)},{int(c)}) stuck0={int(fault_map.stuck0[r, c]):08b} "
            f"stuck1={int(fault_map.stuck1[r, c]):08b}"
        )
    return "\n".join(lines)
