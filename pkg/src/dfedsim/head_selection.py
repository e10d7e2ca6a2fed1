"""Device-head election inside a cluster.

The head is chosen by ordered rules: only BS-connectable members are
eligible; among those, lower total distance to the other members wins,
then higher remaining battery, then stationary over mobile, then lower
latency to the base station, and finally the lower device id so the
outcome is always unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoEligibleHead


@dataclass(frozen=True)
class HeadCandidateView:
    device_id: int
    bs_connectable: bool
    aggregated_distance_m: float
    battery: float
    mobile: bool
    bs_latency_s: float

    def __post_init__(self):
        if not (math.isfinite(self.aggregated_distance_m) and self.aggregated_distance_m >= 0):
            raise ValueError("aggregated_distance_m must be finite and >= 0")
        if not math.isfinite(self.battery):
            raise ValueError("battery must be finite")
        if not (math.isfinite(self.bs_latency_s) and self.bs_latency_s >= 0):
            raise ValueError("bs_latency_s must be finite and >= 0")


def _rank_key(c: HeadCandidateView) -> tuple:
    # Lower tuple wins; battery negated so larger charge ranks earlier.
    return (
        c.aggregated_distance_m,
        -c.battery,
        1 if c.mobile else 0,
        c.bs_latency_s,
        c.device_id,
    )


@dataclass(frozen=True)
class HeadPolicy:
    reselect_interval_rounds: int = 5

    def __post_init__(self):
        if self.reselect_interval_rounds < 1:
            raise ValueError("reselect_interval_rounds must be >= 1")


def select_head(candidates: list[HeadCandidateView]) -> int:
    """Return the device id of the elected head.

    Raises NoEligibleHead when no candidate can reach the base station.
    """
    if not candidates:
        raise NoEligibleHead("empty candidate list")
    eligible = [c for c in candidates if c.bs_connectable]
    if not eligible:
        raise NoEligibleHead("no BS-connectable candidate in the cluster")
    return min(eligible, key=_rank_key).device_id
