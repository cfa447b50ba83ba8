"""Pair-based weight-dependent STDP update rule."""

from __future__ import annotations

import enum

from snnfault.snn.params import StdpParams


class SpikeEvent(enum.Enum):
    PRESYNAPTIC = "pre"
    POSTSYNAPTIC = "post"


def stdp_update(
    wgh: float,
    event: SpikeEvent,
    x_pre: float,
    x_post: float,
    params: StdpParams,
) -> float:
    """Weight change for one spike event.

    Presynaptic spike:  -eta_pre  * x_post * wgh^mu          (depression)
    Postsynaptic spike: +eta_post * x_pre  * (wgh_m - wgh)^mu (potentiation)

    The caller clamps wgh + delta into [0, wgh_m].
    """
    if event is SpikeEvent.PRESYNAPTIC:
        return -params.eta_pre * x_post * wgh**params.mu
    return params.eta_post * x_pre * (params.wgh_m - wgh) ** params.mu
