"""Pure-diffusion link with a spherical absorbing receiver.

A point transmitter releases molecules that random-walk with diffusion
coefficient D (um^2/s) toward a fully absorbing sphere. The fraction
absorbed by time t has the closed form

    F(t) = (rr / r0) * erfc((r0 - rr) / sqrt(4 D t)),

where r0 is the transmitter distance from the sphere center and rr the
sphere radius (both um). Slotting time into symbol intervals of length t_s
turns F into per-slot arrival coefficients a_k = F(k t_s) - F((k-1) t_s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ChannelParams",
    "ChannelProfile",
    "hit_probability",
    "peak_time",
    "channel_coefficients",
    "min_symbol_slot",
]

#: Default number of slots the receiver remembers (channel memory).
DEFAULT_MEMORY = 10

#: Residual-arrival bound: the slot after the memory window must capture
#: less than this probability mass for the memory to be declared adequate.
EPS_TAIL = 0.008

#: The memory window must already capture more than this fraction of all
#: molecules (the everywhere-hit limit is rr / r0, so 0.33 is about two
#: thirds of it at the default geometry).
TAIL_FLOOR = 0.33


@dataclass(frozen=True)
class ChannelParams:
    """Physical link parameters; micrometers and seconds throughout."""

    diffusion: float
    distance: float
    receiver_radius: float

    def __post_init__(self) -> None:
        if self.diffusion <= 0:
            raise ValueError("diffusion coefficient must be positive")
        if self.receiver_radius <= 0:
            raise ValueError("receiver radius must be positive")
        if self.distance <= self.receiver_radius:
            raise ValueError("transmitter must sit outside the receiver")


def hit_probability(params: ChannelParams, t: float) -> float:
    """Probability that a molecule released at time 0 is absorbed by time t."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if t == 0.0:
        return 0.0
    gap = params.distance - params.receiver_radius
    return (params.receiver_radius / params.distance) * math.erfc(
        gap / math.sqrt(4.0 * params.diffusion * t)
    )


def peak_time(params: ChannelParams) -> float:
    """Time of the maximum arrival rate (mode of the first-hit density)."""
    gap = params.distance - params.receiver_radius
    return gap * gap / (6.0 * params.diffusion)


def channel_coefficients(
    params: ChannelParams, slot: float, memory: int = DEFAULT_MEMORY
) -> tuple[float, ...]:
    """Per-slot arrival probabilities a_1..a_memory for slot length t_s.

    Raises ValueError when the sequence is not strictly decreasing, which
    happens when the slot is short enough that the arrival-rate peak falls
    beyond the first slot.
    """
    if slot <= 0:
        raise ValueError("slot length must be positive")
    if memory < 1:
        raise ValueError("memory must be at least 1")
    hits = [hit_probability(params, k * slot) for k in range(memory + 1)]
    coeffs = tuple(hits[k] - hits[k - 1] for k in range(1, memory + 1))
    for k in range(1, memory):
        if not coeffs[k] < coeffs[k - 1]:
            raise ValueError(
                f"arrival coefficients not strictly decreasing at slot {slot!r}: "
                f"a_{k} = {coeffs[k - 1]!r} <= a_{k + 1} = {coeffs[k]!r}"
            )
    return coeffs


@dataclass(frozen=True)
class ChannelProfile:
    """A slotted channel: parameters plus the derived arrival coefficients."""

    params: ChannelParams
    slot: float
    memory: int
    coefficients: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.memory:
            raise ValueError("coefficient count must equal memory")
        total = sum(self.coefficients)
        window = hit_probability(self.params, self.memory * self.slot)
        if abs(total - window) > 1e-12:
            raise ValueError("coefficients do not telescope to the window hit probability")

    @classmethod
    def build(
        cls, params: ChannelParams, slot: float, memory: int = DEFAULT_MEMORY
    ) -> "ChannelProfile":
        return cls(
            params=params,
            slot=slot,
            memory=memory,
            coefficients=channel_coefficients(params, slot, memory),
        )


def _memory_predicates(
    params: ChannelParams,
    slot: float,
    memory: int,
    tail_floor: float,
    eps_tail: float,
) -> tuple[bool, bool, bool]:
    """(window mass > tail_floor, next-slot mass < eps_tail, strictly decreasing)."""
    hits = [hit_probability(params, k * slot) for k in range(memory + 2)]
    coeffs = [hits[k] - hits[k - 1] for k in range(1, memory + 2)]
    window_ok = hits[memory] > tail_floor
    residual_ok = coeffs[memory] < eps_tail
    decreasing = all(coeffs[k] < coeffs[k - 1] for k in range(1, memory))
    return window_ok, residual_ok, decreasing


def min_symbol_slot(
    params: ChannelParams,
    memory: int = DEFAULT_MEMORY,
    tail_floor: float = TAIL_FLOOR,
    eps_tail: float = EPS_TAIL,
    ceiling: float = 1e4,
    rel_tol: float = 1e-6,
) -> float:
    """Smallest slot length for which the memory window is adequate.

    Adequate means all three predicates hold: the memory window captures
    more than tail_floor of the molecules, the slot after the window
    receives less than eps_tail, and the coefficients strictly decrease.
    Each predicate's own threshold slot is located on a log grid and
    refined by bisection to relative tolerance rel_tol; the answer is the
    largest of the three. A predicate true over the whole grid contributes
    a floor of zero; one still false at the ceiling raises ValueError.
    """
    if ceiling <= 0:
        raise ValueError("ceiling must be positive")
    grid_points = 512
    lo0 = 1e-8
    log_lo, log_hi = math.log10(lo0), math.log10(ceiling)
    grid = [10 ** (log_lo + (log_hi - log_lo) * i / (grid_points - 1)) for i in range(grid_points)]

    flags = [_memory_predicates(params, t, memory, tail_floor, eps_tail) for t in grid]
    floors: list[float] = []
    for p in range(3):
        column = [f[p] for f in flags]
        if not column[-1]:
            raise ValueError(
                f"memory predicate {p} still fails at the ceiling slot {ceiling!r}"
            )
        if all(column):
            floors.append(0.0)
            continue
        last_false = max(i for i, ok in enumerate(column) if not ok)
        lo, hi = grid[last_false], grid[last_false + 1]
        while (hi - lo) > rel_tol * hi:
            mid = math.sqrt(lo * hi)
            if _memory_predicates(params, mid, memory, tail_floor, eps_tail)[p]:
                hi = mid
            else:
                lo = mid
        floors.append(hi)
    return max(floors)
