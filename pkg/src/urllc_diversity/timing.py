"""Channel-use ledger of the antenna scan: switching, measurement, feedback.

All quantities are integer channel uses. Index ``i`` counts completed
switches; ``i == antennas`` is the fall-back to the best branch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, InfeasibleBudgetError

MIN_ANTENNAS = 2


@dataclass(frozen=True)
class ProtocolBudget:
    u: int
    p: int
    q: int
    d: int
    antennas: int
    k: int

    def __post_init__(self) -> None:
        for name in ("u", "p", "q", "d", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise DomainError(f"'{name}' must be a positive integer, got {value}")
        if not isinstance(self.antennas, int) or self.antennas < MIN_ANTENNAS:
            raise DomainError(
                f"Antenna count must be an integer >= {MIN_ANTENNAS}, got {self.antennas}"
            )

    @property
    def scan_overhead(self) -> int:
        return (self.p + self.q) * self.antennas


def feasible(b: ProtocolBudget) -> bool:
    return b.u > b.scan_overhead


def require_feasible(b: ProtocolBudget) -> None:
    if not feasible(b):
        raise InfeasibleBudgetError(
            f"Infeasible budget: u={b.u} must exceed (p+q)M={b.scan_overhead} "
            f"(p={b.p}, q={b.q}, M={b.antennas})"
        )


def n_sc(b: ProtocolBudget) -> int:
    require_feasible(b)
    return b.u - b.scan_overhead


def _require_switch_index(b: ProtocolBudget, i: int) -> None:
    if not 0 <= i <= b.antennas - 1:
        raise DomainError(f"Switch index must lie in [0, {b.antennas - 1}], got {i}")


def z(b: ProtocolBudget, i: int) -> int:
    """Channel uses spent measuring i+1 antennas with i switches between them."""
    _require_switch_index(b, i)
    return (i + 1) * b.q + i * b.p


def waiting_delay(b: ProtocolBudget, i: int) -> int:
    """Time left until the transmitter assumes a full scan and starts on its own."""
    _require_switch_index(b, i)
    return (b.antennas - i) * b.p + (b.antennas - i - 1) * b.q


def actual_feedback_delay(b: ProtocolBudget, i: int) -> int:
    wait = waiting_delay(b, i)
    if b.d >= b.u - z(b, i):
        return wait
    return min(b.d, wait)


def raw_blocklength(b: ProtocolBudget, i: int) -> int:
    """u - (z_i + d_i) for i < M and u - (p+q)M for i == M, unchecked."""
    if i == b.antennas:
        return b.u - b.scan_overhead
    return b.u - (z(b, i) + actual_feedback_delay(b, i))


def n_i(b: ProtocolBudget, i: int) -> int:
    if i == b.antennas:
        return n_sc(b)
    value = raw_blocklength(b, i)
    if value < 1:
        raise InfeasibleBudgetError(
            f"No channel uses left after {i} switches: u={b.u}, "
            f"z_i={z(b, i)}, d_i={actual_feedback_delay(b, i)}",
            constraint="u > z_i + d_i",
        )
    return value


def n_values(b: ProtocolBudget) -> list[int]:
    """n_0 .. n_M; entries below 1 mark branches with no transmission time."""
    require_feasible(b)
    return [raw_blocklength(b, i) for i in range(b.antennas + 1)]


def single_antenna_blocklength(u: int, q: int) -> int:
    """Blocklength of the one-antenna baseline: one measurement, no switch."""
    return u - q
