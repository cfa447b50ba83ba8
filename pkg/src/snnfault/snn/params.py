"""Parameter records for neuron dynamics and plasticity."""

from __future__ import annotations

from dataclasses import dataclass

from snnfault.errors import ConfigError


@dataclass(frozen=True)
class LifParams:
    """Leaky integrate-and-fire constants.

    The membrane decays toward `v_rest` by `leak_factor` per step, input is
    added on top, and a crossing of `v_th` emits a spike and resets the
    membrane to `v_reset` for `refractory_steps` timesteps.
    """

    v_th: float
    v_reset: float
    v_rest: float
    leak_factor: float
    refractory_steps: int = 0
    dt_ms: float = 1.0

    def __post_init__(self) -> None:
        if not (self.v_reset <= self.v_rest < self.v_th):
            raise ConfigError(
                f"need v_reset <= v_rest < v_th, got "
                f"({self.v_reset}, {self.v_rest}, {self.v_th})"
            )
        if not (0.0 < self.leak_factor <= 1.0):
            raise ConfigError(f"leak_factor must be in (0, 1], got {self.leak_factor}")
        if self.refractory_steps < 0:
            raise ConfigError("refractory_steps must be >= 0")
        if self.dt_ms <= 0:
            raise ConfigError("dt_ms must be positive")


@dataclass(frozen=True)
class StdpParams:
    """Pair-based weight-dependent STDP constants.

    A presynaptic spike depresses by eta_pre * x_post * w^mu; a postsynaptic
    spike potentiates by eta_post * x_pre * (wgh_m - w)^mu. Traces x_pre and
    x_post decay multiplicatively each step and jump by one on a spike.
    """

    eta_pre: float
    eta_post: float
    mu: float
    trace_decay_pre: float
    trace_decay_post: float
    wgh_m: float = 1.0

    def __post_init__(self) -> None:
        if self.eta_pre <= 0 or self.eta_post <= 0:
            raise ConfigError("learning rates must be positive")
        if self.mu < 0:
            raise ConfigError("mu must be >= 0")
        for name in ("trace_decay_pre", "trace_decay_post"):
            d = getattr(self, name)
            if not (0.0 < d < 1.0):
                raise ConfigError(f"{name} must be in (0, 1), got {d}")
        if self.wgh_m <= 0:
            raise ConfigError("wgh_m must be positive")
