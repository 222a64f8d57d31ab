"""Comparative roofline analysis between two machine configurations.

Everything here reduces to the sign of pi = F_A - F_B evaluated at extreme
corners of the free parameters, so comparisons happen in log-space and the
solvers are deterministic bisections with explicit brackets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import CircuitMetrics
from .models import average_to_process

__all__ = [
    "ALWAYS_A",
    "ALWAYS_B",
    "ONE_QUBIT_DEPENDENT",
    "FidelityRange",
    "RegionGrid",
    "ThresholdReport",
    "TopologyGrid",
    "BoundPolicy",
    "NoThresholdError",
    "classify_point",
    "sweep_grid",
    "two_qubit_threshold",
    "one_qubit_threshold",
    "threshold_ratio",
    "required_fidelity_delta",
    "topology_compare",
]

ALWAYS_A = "AlwaysA"
ALWAYS_B = "AlwaysB"
ONE_QUBIT_DEPENDENT = "OneQubitDependent"

_MODELS = ("digital", "cyclic")


class NoThresholdError(RuntimeError):
    """A solver's predicate holds nowhere in its bracket."""


@dataclass(frozen=True)
class FidelityRange:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"degenerate or out-of-range interval [{self.lo}, {self.hi}]")


@dataclass
class RegionGrid:
    """Per-cell winner labels over (f2A, relative f2B) samples.

    cells[i][j] is the label at f2A = x_axis[i], f2B = x_axis[i] * y_axis[j];
    out_of_domain marks cells with f2B > 1 (labelled AlwaysA by convention).
    """

    x_axis: list[float]
    y_axis: list[float]
    cells: list[list[str]]
    out_of_domain: list[list[bool]]
    config_echo: dict = field(default_factory=dict)

    def rows(self):
        """Yield (x, y, f2A, f2B, label, domain_flag) in x-major order."""
        for i, x in enumerate(self.x_axis):
            for j, y in enumerate(self.y_axis):
                yield (x, y, x, x * y, self.cells[i][j], self.out_of_domain[i][j])


@dataclass
class ThresholdReport:
    kind: str
    value: float
    bracket: tuple[float, float]
    assumptions_echo: dict = field(default_factory=dict)
    flag: str | None = None

    def __post_init__(self):
        lo, hi = self.bracket
        if not (lo - 1e-15 <= self.value <= hi + 1e-15):
            raise ValueError(f"value {self.value} outside bracket [{lo}, {hi}]")

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "value": self.value,
            "bracket": [self.bracket[0], self.bracket[1]],
            "assumptions": self.assumptions_echo,
        }
        if self.flag:
            out["flag"] = self.flag
        return out


@dataclass
class TopologyGrid:
    """Four-way (gate x topology) winners plus the restrictive-topology band."""

    x_axis: list[float]
    y_axis: list[float]
    winners: list[list[str]]
    dependent: list[list[bool]]
    band: list[list[bool]]
    config_echo: dict = field(default_factory=dict)

    def rows(self):
        for i, x in enumerate(self.x_axis):
            for j, y in enumerate(self.y_axis):
                yield (x, y, self.winners[i][j], self.dependent[i][j], self.band[i][j])


@dataclass(frozen=True)
class BoundPolicy:
    """1q-count bounds tied to the 2q count: [ceil(n2/lower_divisor), upper_factor*n2]."""

    lower_divisor: int = 8
    upper_factor: int = 2

    def bounds(self, n2: int) -> tuple[int, int]:
        return (math.ceil(n2 / self.lower_divisor), self.upper_factor * n2)


# ---------------------------------------------------------------------------
# log-space model evaluation
# ---------------------------------------------------------------------------


def _log_value(model: str, m: CircuitMetrics, f1, f2):
    """log of the model fidelity; vectorized over f1/f2 arrays."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if model == "digital":
        with np.errstate(divide="ignore"):
            return m.n1 * np.log(f1) + m.n2 * np.log(f2)
    if model == "cyclic":
        e1 = 1.0 - (3.0 * f1 - 1.0) / 2.0
        e2 = 1.0 - (5.0 * f2 - 1.0) / 4.0
        load1 = e1 * m.p1
        load2 = e2 * m.p2
        if np.any(load1 >= 1.0) or np.any(load2 >= 1.0):
            from .models import ParallelismThresholdExceeded

            raise ParallelismThresholdExceeded(
                "e*P >= 1 inside the sweep; cyclic estimate undefined"
            )
        return m.m * (np.log1p(-load1) + np.log1p(-load2))
    raise ValueError(f"unknown model {model!r} (expected digital or cyclic)")


def _check_model(model: str) -> None:
    if model not in _MODELS:
        raise ValueError(f"unknown model {model!r} (expected digital or cyclic)")


def classify_point(
    ma: CircuitMetrics,
    mb: CircuitMetrics,
    f2a: float,
    f2b: float,
    r1a: FidelityRange,
    r1b: FidelityRange,
    model: str = "digital",
) -> str:
    """Winner label at fixed 2q fidelities, over the 1q fidelity boxes.

    pi is strictly increasing in f1A and decreasing in f1B, so the sign over
    the whole box follows from the two extreme corners; a tie (pi = 0 at a
    corner) counts as OneQubitDependent.
    """
    _check_model(model)
    for name, f in (("f2A", f2a), ("f2B", f2b)):
        if not (0.0 <= f <= 1.0):
            raise ValueError(f"{name}={f} outside [0, 1]")
    log_a_lo = float(_log_value(model, ma, r1a.lo, f2a))
    log_a_hi = float(_log_value(model, ma, r1a.hi, f2a))
    log_b_lo = float(_log_value(model, mb, r1b.lo, f2b))
    log_b_hi = float(_log_value(model, mb, r1b.hi, f2b))
    if log_a_lo > log_b_hi:
        return ALWAYS_A
    if log_a_hi < log_b_lo:
        return ALWAYS_B
    return ONE_QUBIT_DEPENDENT


def sweep_grid(
    ma: CircuitMetrics,
    mb: CircuitMetrics,
    x_samples: list[float],
    y_samples: list[float],
    r1a: FidelityRange,
    r1b: FidelityRange,
    model: str = "digital",
) -> RegionGrid:
    """classify_point at every (f2A = x, f2B = x*y) cell; cells with f2B > 1
    are flagged out-of-domain and labelled AlwaysA by convention.

    Cells are independent; they are evaluated as vectorized array ops and
    assembled by index, so the result does not depend on evaluation order.
    """
    _check_model(model)
    xs = list(x_samples)
    ys = list(y_samples)
    if xs != sorted(xs) or ys != sorted(ys):
        raise ValueError("sample lists must be sorted ascending")
    x = np.asarray(xs, dtype=float)[:, None]
    y = np.asarray(ys, dtype=float)[None, :]
    f2b = x * y
    domain = f2b > 1.0
    f2b_safe = np.where(domain, 1.0, f2b)

    log_a_lo = _log_value(model, ma, r1a.lo, x)
    log_a_hi = _log_value(model, ma, r1a.hi, x)
    log_b_lo = _log_value(model, mb, r1b.lo, f2b_safe)
    log_b_hi = _log_value(model, mb, r1b.hi, f2b_safe)

    labels = np.full(f2b.shape, ONE_QUBIT_DEPENDENT, dtype=object)
    labels[np.broadcast_to(log_a_lo > log_b_hi, f2b.shape)] = ALWAYS_A
    labels[np.broadcast_to(log_a_hi < log_b_lo, f2b.shape)] = ALWAYS_B
    labels[domain] = ALWAYS_A

    return RegionGrid(
        x_axis=xs,
        y_axis=ys,
        cells=[list(row) for row in labels],
        out_of_domain=[list(map(bool, row)) for row in domain],
        config_echo={
            "model": model,
            "metrics_a": {"n1": ma.n1, "n2": ma.n2, "m": ma.m},
            "metrics_b": {"n1": mb.n1, "n2": mb.n2, "m": mb.m},
            "r1a": [r1a.lo, r1a.hi],
            "r1b": [r1b.lo, r1b.hi],
        },
    )


def _bisect_smallest_true(pred, lo: float, hi: float, tol: float) -> tuple[float, float, float]:
    """Smallest x in [lo, hi] with pred true, for a monotone (False->True)
    predicate with pred(hi) True.  Returns (value, bracket_lo, bracket_hi)."""
    if pred(lo):
        return lo, lo, lo
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if pred(mid):
            b = mid
        else:
            a = mid
    if pred(a):  # bracket must still straddle the predicate change
        raise AssertionError("bisection bracket lost its sign change")
    return b, a, b


def two_qubit_threshold(
    ma: CircuitMetrics,
    mb: CircuitMetrics,
    f1a: float,
    f1b: float,
    f2b_max: float = 0.999,
    model: str = "digital",
) -> ThresholdReport:
    """Smallest f2A such that A wins for every f2B <= f2b_max (worst case is
    f2B = f2b_max by monotonicity), bisected over [0.9, 1] to 1e-6."""
    _check_model(model)
    if not (0.0 < f2b_max <= 1.0):
        raise ValueError("f2b_max must lie in (0, 1]")
    log_b = float(_log_value(model, mb, f1b, f2b_max))

    def pred(f2a: float) -> bool:
        return float(_log_value(model, ma, f1a, f2a)) >= log_b

    assumptions = {
        "model": model,
        "f1A": f1a,
        "f1B": f1b,
        "f2B_max": f2b_max,
        "metrics_a": {"n1": ma.n1, "n2": ma.n2, "m": ma.m},
        "metrics_b": {"n1": mb.n1, "n2": mb.n2, "m": mb.m},
    }
    if not pred(1.0):
        return ThresholdReport(
            kind="two_qubit",
            value=1.0,
            bracket=(1.0, 1.0),
            assumptions_echo=assumptions,
            flag="no_threshold",
        )
    value, blo, bhi = _bisect_smallest_true(pred, 0.9, 1.0, 1e-6)
    flag = None
    if value == 0.9:
        flag = "at_lower_bound"
    elif value >= 1.0 - 1e-6 and float(_log_value(model, ma, f1a, 1.0)) == log_b:
        flag = "boundary_tie"
    return ThresholdReport(
        kind="two_qubit", value=value, bracket=(blo, bhi), assumptions_echo=assumptions, flag=flag
    )


def _one_qubit_signs(
    n2a: int, n2b: int, log_f2a: float, log_f2b: float, policy: BoundPolicy, log_f1: float
) -> tuple[float, float]:
    """pi's log-gap at the two count extremes (A-best and A-worst)."""
    n1a_lo, n1a_hi = policy.bounds(n2a)
    n1b_lo, n1b_hi = policy.bounds(n2b)
    delta = n2a * log_f2a - n2b * log_f2b
    best = delta + (n1a_lo - n1b_hi) * log_f1
    worst = delta + (n1a_hi - n1b_lo) * log_f1
    return best, worst


def one_qubit_threshold(
    n2a: int,
    n2b: int,
    f2a: float,
    f2b: float,
    bound_policy: BoundPolicy | None = None,
) -> ThresholdReport:
    """Smallest shared 1q fidelity F1 above which the sign of pi no longer
    depends on the 1q gate counts (which range over the bound policy's box).

    The sign extremes sit at (n1A min, n1B max) and (n1A max, n1B min);
    bisected over [0.999, 1] to 1e-8.  AlreadyClosed: agreement already at the
    0.999 floor.  NoThreshold: still disagreeing at F1 = 1 - 1e-12.
    """
    if n2a <= 0 or n2b <= 0:
        raise ValueError("2q counts must be positive")
    for name, f in (("f2A", f2a), ("f2B", f2b)):
        if not (0.0 < f <= 1.0):
            raise ValueError(f"{name}={f} outside (0, 1]")
    policy = bound_policy or BoundPolicy()
    log_f2a, log_f2b = math.log(f2a), math.log(f2b)
    assumptions = {
        "n2A": n2a,
        "n2B": n2b,
        "f2A": f2a,
        "f2B": f2b,
        "n1A_bounds": list(policy.bounds(n2a)),
        "n1B_bounds": list(policy.bounds(n2b)),
    }

    def agree(f1: float) -> bool:
        best, worst = _one_qubit_signs(n2a, n2b, log_f2a, log_f2b, policy, math.log(f1))
        return (best > 0 and worst > 0) or (best < 0 and worst < 0)

    if n2a == n2b and f2a == f2b:
        return ThresholdReport(
            kind="one_qubit",
            value=0.999,
            bracket=(0.999, 0.999),
            assumptions_echo=assumptions,
            flag="degenerate_tie",
        )
    if agree(0.999):
        return ThresholdReport(
            kind="one_qubit",
            value=0.999,
            bracket=(0.999, 0.999),
            assumptions_echo=assumptions,
            flag="already_closed",
        )
    if not agree(1.0 - 1e-12):
        return ThresholdReport(
            kind="one_qubit",
            value=1.0,
            bracket=(1.0 - 1e-12, 1.0),
            assumptions_echo=assumptions,
            flag="no_threshold",
        )
    value, blo, bhi = _bisect_smallest_true(agree, 0.999, 1.0 - 1e-12, 1e-8)
    return ThresholdReport(
        kind="one_qubit", value=value, bracket=(blo, bhi), assumptions_echo=assumptions
    )


def threshold_ratio(
    n2a: int,
    f2a: float,
    f2b: float,
    f1_floor: float = 0.999,
    bound_policy: BoundPolicy | None = None,
) -> ThresholdReport:
    """2q gate-count ratio x (n2B = x*n2A) at which the inner 1q threshold
    crosses the F1 floor, i.e. where 1q tuning stops (or starts) being able to
    change the ordering for floor-respecting machines.

    The inner threshold is scanned over x in [1, 10] and the first floor
    crossing is refined by bisection to 1e-3.  If the inner threshold sits at
    or below the floor for every ratio there is no window at all: the ratio is
    exactly 1 (flag no_window).  If it never reaches the floor, NoThreshold.
    """
    if n2a <= 0:
        raise ValueError("n2A must be positive")
    if not (0.0 < f1_floor < 1.0):
        raise ValueError("F1 floor must lie in (0, 1)")
    policy = bound_policy or BoundPolicy()

    def inner(x: float) -> float:
        n2b = max(1, round(x * n2a))
        return one_qubit_threshold(n2a, n2b, f2a, f2b, policy).value

    def below(x: float) -> bool:
        return inner(x) <= f1_floor

    assumptions = {
        "n2A": n2a,
        "f2A": f2a,
        "f2B": f2b,
        "F1_floor": f1_floor,
        "n1_bounds_policy": {"lower_divisor": policy.lower_divisor, "upper_factor": policy.upper_factor},
    }

    step = 0.01
    xs = [1.0 + k * step for k in range(int(round(9.0 / step)) + 1)]
    states = [below(x) for x in xs]
    crossing = next((k for k in range(1, len(xs)) if states[k] != states[k - 1]), None)

    if crossing is None:
        if states[0]:
            return ThresholdReport(
                kind="ratio",
                value=1.0,
                bracket=(1.0, 1.0),
                assumptions_echo=assumptions,
                flag="no_window",
            )
        return ThresholdReport(
            kind="ratio",
            value=10.0,
            bracket=(10.0, 10.0),
            assumptions_echo=assumptions,
            flag="no_threshold",
        )

    # Refine the bracketing step; the inner threshold must stay single-crossing
    # (monotone) inside it, which the endpoint re-check enforces.
    a, b = xs[crossing - 1], xs[crossing]
    state_a = states[crossing - 1]
    while b - a > 1e-3:
        mid = 0.5 * (a + b)
        if below(mid) == state_a:
            a = mid
        else:
            b = mid
    if below(a) != state_a or below(b) == state_a:
        raise AssertionError("ratio bracket lost its sign change during refinement")
    return ThresholdReport(
        kind="ratio", value=b, bracket=(a, b), assumptions_echo=assumptions
    )


def required_fidelity_delta(
    m_target: CircuitMetrics,
    m_base: CircuitMetrics,
    f1_base: float,
    f2_base: float,
    f1_target: float,
    model: str = "digital",
) -> ThresholdReport:
    """Minimal f2 for the target configuration to match the baseline, bisected
    to 1e-6; flag unattainable when even perfect 2q gates lose."""
    _check_model(model)
    log_base = float(_log_value(model, m_base, f1_base, f2_base))

    def pred(f2t: float) -> bool:
        return float(_log_value(model, m_target, f1_target, f2t)) >= log_base

    assumptions = {
        "model": model,
        "f1_base": f1_base,
        "f2_base": f2_base,
        "f1_target": f1_target,
        "metrics_target": {"n1": m_target.n1, "n2": m_target.n2, "m": m_target.m},
        "metrics_base": {"n1": m_base.n1, "n2": m_base.n2, "m": m_base.m},
    }
    if not pred(1.0):
        return ThresholdReport(
            kind="fidelity_delta",
            value=1.0,
            bracket=(1.0, 1.0),
            assumptions_echo=assumptions,
            flag="unattainable",
        )
    value, blo, bhi = _bisect_smallest_true(pred, 0.0, 1.0, 1e-6)
    return ThresholdReport(
        kind="fidelity_delta", value=value, bracket=(blo, bhi), assumptions_echo=assumptions
    )


def topology_compare(
    ma_per_topology: dict[str, CircuitMetrics],
    mb_per_topology: dict[str, CircuitMetrics],
    x_samples: list[float],
    y_samples: list[float],
    r1a: FidelityRange,
    r1b: FidelityRange,
    model: str = "digital",
    real_a: str | None = None,
    real_b: str | None = None,
) -> TopologyGrid:
    """Four-way (gate, topology) comparison over the (f2A, relative f2B) grid.

    All A configurations share f2A = x; all B configurations share
    f2B = x * y.  A cell's winner is the configuration whose worst-corner
    fidelity beats every rival's best corner (ties lexicographic, A first);
    cells without a dominant configuration are 1q-dependent.  The band marks
    cells where B loses its real matchup (real_a vs real_b) only because of
    the more restrictive real topology: B would dominate if granted its other
    topology's metrics.
    """
    _check_model(model)
    if not ma_per_topology or not mb_per_topology:
        raise ValueError("need at least one topology per machine")
    real_a = real_a or next(iter(ma_per_topology))
    real_b = real_b or next(iter(mb_per_topology))
    for key, table in ((real_a, ma_per_topology), (real_b, mb_per_topology)):
        if key not in table:
            raise KeyError(f"missing metrics for topology {key!r}")

    configs: list[tuple[str, CircuitMetrics, FidelityRange, str]] = []
    for topo, m in ma_per_topology.items():
        configs.append((f"A:{topo}", m, r1a, "A"))
    for topo, m in mb_per_topology.items():
        configs.append((f"B:{topo}", m, r1b, "B"))

    xs = list(x_samples)
    ys = list(y_samples)
    x = np.asarray(xs, dtype=float)[:, None]
    y = np.asarray(ys, dtype=float)[None, :]
    f2b = np.clip(x * y, 0.0, 1.0)

    los, his = {}, {}
    for label, m, r1, side in configs:
        f2 = x if side == "A" else f2b
        los[label] = np.broadcast_to(_log_value(model, m, r1.lo, f2), (len(xs), len(ys)))
        his[label] = np.broadcast_to(_log_value(model, m, r1.hi, f2), (len(xs), len(ys)))

    labels = [c[0] for c in configs]
    winners = [["" for _ in ys] for _ in xs]
    dependent = [[False for _ in ys] for _ in xs]
    band = [[False for _ in ys] for _ in xs]

    other_b = next((t for t in mb_per_topology if t != real_b), real_b)
    for i in range(len(xs)):
        for j in range(len(ys)):
            dominant = None
            for label in labels:
                if all(
                    los[label][i, j] >= his[rival][i, j]
                    for rival in labels
                    if rival != label
                ):
                    dominant = label
                    break
            if dominant is None:
                dependent[i][j] = True
                winners[i][j] = max(labels, key=lambda c: (his[c][i, j] + los[c][i, j]))
            else:
                winners[i][j] = dominant
            # Restrictive-topology band: A beats B's real config outright while
            # B's alternate-topology config would beat A outright.
            a_lbl, b_real, b_alt = f"A:{real_a}", f"B:{real_b}", f"B:{other_b}"
            if b_alt != b_real:
                a_wins_real = los[a_lbl][i, j] > his[b_real][i, j]
                b_alt_wins = los[b_alt][i, j] > his[a_lbl][i, j]
                band[i][j] = bool(a_wins_real and b_alt_wins)

    return TopologyGrid(
        x_axis=xs,
        y_axis=ys,
        winners=winners,
        dependent=dependent,
        band=band,
        config_echo={
            "model": model,
            "real_a": real_a,
            "real_b": real_b,
            "configs": labels,
            "r1a": [r1a.lo, r1a.hi],
            "r1b": [r1b.lo, r1b.hi],
        },
    )
