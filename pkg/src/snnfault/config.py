"""Experiment configuration: one JSON file drives every CLI command.

The defaults are desk-scale reference fixtures (N100, 5000 train / 1000 test
images, 150 timesteps) chosen so the full evaluation sweep runs on a laptop;
larger model sizes stay valid config values. Every report embeds the config
fingerprint so stale results are detected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from snnfault.cost import HwConstants
from snnfault.errors import ConfigError
from snnfault.faults import CrossbarGeometry
from snnfault.snn.params import LifParams, StdpParams

DEFAULT_LIF = LifParams(
    v_th=24.0,
    v_reset=0.0,
    v_rest=0.0,
    leak_factor=0.95,
    refractory_steps=4,
    dt_ms=1.0,
)

DEFAULT_STDP = StdpParams(
    eta_pre=1e-4,
    eta_post=6e-3,
    mu=1.0,
    trace_decay_pre=0.90,
    trace_decay_post=0.90,
    wgh_m=1.0,
)


@dataclass
class ExperimentConfig:
    workload: str = "mnist"
    n_inputs: int = 784
    n_neurons: int = 100
    crossbar_rows: int = 256
    crossbar_cols: int = 256

    steps_per_sample: int = 150
    max_rate: float = 0.30
    epochs: int = 1
    train_size: int = 5000
    test_size: int = 1000
    train_seed: int = 7
    split_seed: int = 11
    eval_seed: int = 1234
    eval_batch: int = 250
    init_code_low: int = 51
    init_code_high: int = 102
    inhibition_strength: float = 12.0
    weight_norm_target: float | None = 78.0
    theta_plus: float = 0.05

    images_path: str = "data/mnist/images-idx3-ubyte"
    labels_path: str = "data/mnist/labels-idx1-ubyte"
    test_images_path: str | None = None
    test_labels_path: str | None = None

    strategies: list[str] = field(
        default_factory=lambda: ["baseline", "fam1", "fam2", "fam3"]
    )
    fault_rates: list[float] = field(default_factory=lambda: [0.0, 0.1, 0.25, 0.5])
    map_seeds: list[int] = field(default_factory=lambda: [1, 2, 3])

    lif: LifParams = field(default_factory=lambda: DEFAULT_LIF)
    stdp: StdpParams = field(default_factory=lambda: DEFAULT_STDP)
    hw: HwConstants = field(default_factory=HwConstants)

    output_dir: str = "runs/default"

    def __post_init__(self) -> None:
        if isinstance(self.lif, dict):
            self.lif = LifParams(**self.lif)
        if isinstance(self.stdp, dict):
            self.stdp = StdpParams(**self.stdp)
        if isinstance(self.hw, dict):
            self.hw = HwConstants(**self.hw)
        if self.n_inputs <= 0 or self.n_neurons <= 0:
            raise ConfigError("model geometry must be positive")
        if not (0.0 < self.max_rate <= 1.0):
            raise ConfigError("max_rate must be in (0, 1]")
        if self.steps_per_sample <= 0:
            raise ConfigError("steps_per_sample must be positive")
        if self.eval_batch <= 0:
            raise ConfigError("eval_batch must be positive")
        if not 0 <= self.init_code_low <= self.init_code_high <= 255:
            raise ConfigError("init code range must satisfy 0 <= low <= high <= 255")
        bad = [r for r in self.fault_rates if not 0.0 <= r <= 1.0]
        if bad:
            raise ConfigError(f"fault rates outside [0, 1]: {bad}")
        bad_strategies = [
            s for s in self.strategies if s not in ("baseline", "fam1", "fam2", "fam3")
        ]
        if bad_strategies:
            raise ConfigError(f"unknown strategies: {bad_strategies}")

    @property
    def geometry(self) -> CrossbarGeometry:
        return CrossbarGeometry(self.crossbar_rows, self.crossbar_cols)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON: {exc}") from exc
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_json(path.read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def fingerprint(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(b"snnfault/config/v1" + canonical.encode()).hexdigest()

    def require_dataset_files(self) -> None:
        """Commands that read data call this before doing any work."""
        paths = [self.images_path, self.labels_path]
        if self.test_images_path:
            paths += [self.test_images_path, self.test_labels_path]
        missing = [p for p in paths if p and not Path(p).exists()]
        if missing:
            raise ConfigError(
                "dataset files missing: "
                + ", ".join(str(m) for m in missing)
                + " (see scripts/prepare_mnist.py)"
            )
