"""Circuit fidelity models and the process/average fidelity conversion.

Three estimators over CircuitMetrics-style inputs:

* digital  -- product of per-gate average fidelities, f1^n1 * f2^n2
* cyclic   -- per-cycle parallelism-weighted process infidelities,
              (1 - e1*P1)^m * (1 - e2*P2)^m
* coupling -- topology crosstalk, (1 - ec1*C1)^n1 * (1 - ec2*C2)^n2

All values are accumulated in log-space so exponents in the thousands do not
underflow, and exponentiated only for output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuits import CircuitMetrics

__all__ = [
    "FidelityEstimate",
    "ParallelismThresholdExceeded",
    "process_to_average",
    "average_to_process",
    "digital_fidelity",
    "cyclic_fidelity",
    "coupling_fidelity",
    "objective",
    "log_digital_fidelity",
]


class ParallelismThresholdExceeded(ValueError):
    """e_i * P_i >= 1: the model's absolute parallelism threshold 1/P_i was
    crossed and the estimate is undefined."""


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    model: str
    inputs_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"fidelity {self.value} outside [0, 1]")
        if self.model not in ("digital", "cyclic", "coupling"):
            raise ValueError(f"unknown model tag {self.model!r}")


def process_to_average(gamma: float, n: int) -> float:
    """Average gate fidelity from process fidelity: f = (d*gamma + 1)/(d + 1), d = 2^n."""
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"process fidelity {gamma} outside [0, 1]")
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    d = 2**n
    return (d * gamma + 1.0) / (d + 1.0)


def average_to_process(f: float, n: int) -> float:
    """Inverse of process_to_average: gamma = (f*(d+1) - 1)/d."""
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    d = 2**n
    gamma = (f * (d + 1.0) - 1.0) / d
    if not (-1e-12 <= gamma <= 1.0 + 1e-12):
        raise ValueError(f"average fidelity {f} outside the physical range for d={d}")
    return min(max(gamma, 0.0), 1.0)


def log_digital_fidelity(n1: int, n2: int, f1: float, f2: float) -> float:
    """log of f1^n1 * f2^n2, the digital model's working representation."""
    for name, f, n in (("f1", f1, n1), ("f2", f2, n2)):
        if not (0.0 <= f <= 1.0):
            raise ValueError(f"{name}={f} outside [0, 1]")
        if f == 0.0 and n > 0:
            return -math.inf
    log = 0.0
    if n1 > 0:
        log += n1 * math.log(f1)
    if n2 > 0:
        log += n2 * math.log(f2)
    return log


def digital_fidelity(metrics: CircuitMetrics, f1: float, f2: float) -> FidelityEstimate:
    """F_d = f1^n1 * f2^n2 over the circuit's gate counts."""
    log = log_digital_fidelity(metrics.n1, metrics.n2, f1, f2)
    return FidelityEstimate(
        value=math.exp(log) if log > -math.inf else 0.0,
        model="digital",
        inputs_echo={"n1": metrics.n1, "n2": metrics.n2, "f1": f1, "f2": f2},
    )


def cyclic_fidelity(metrics: CircuitMetrics, e1: float, e2: float) -> FidelityEstimate:
    """F_c = (1 - e1*P1)^m * (1 - e2*P2)^m over the cycle schedule."""
    for name, e in (("e1", e1), ("e2", e2)):
        if not (0.0 <= e <= 1.0):
            raise ValueError(f"{name}={e} outside [0, 1]")
    log = 0.0
    for name, e, p in (("e1", e1, metrics.p1), ("e2", e2, metrics.p2)):
        load = e * p
        if load >= 1.0:
            raise ParallelismThresholdExceeded(
                f"{name}*P = {load:.6g} >= 1; parallelism threshold 1/P crossed"
            )
        log += metrics.m * math.log1p(-load)
    return FidelityEstimate(
        value=math.exp(log),
        model="cyclic",
        inputs_echo={"m": metrics.m, "p1": metrics.p1, "p2": metrics.p2, "e1": e1, "e2": e2},
    )


def coupling_fidelity(
    n1: int, n2: int, e_c1: float, e_c2: float, c1: float, c2: float
) -> FidelityEstimate:
    """F_ctop = (1 - e_c1*C1)^n1 * (1 - e_c2*C2)^n2; C_i is the average number
    of qubits each qubit couples to."""
    for name, e in (("e_c1", e_c1), ("e_c2", e_c2)):
        if not (0.0 <= e <= 1.0):
            raise ValueError(f"{name}={e} outside [0, 1]")
    if c1 < 0 or c2 < 0 or n1 < 0 or n2 < 0:
        raise ValueError("coupling counts and gate counts must be non-negative")
    log = 0.0
    for name, e, c, n in (("e_c1", e_c1, c1, n1), ("e_c2", e_c2, c2, n2)):
        load = e * c
        if load >= 1.0:
            raise ParallelismThresholdExceeded(
                f"{name}*C = {load:.6g} >= 1; coupling threshold 1/C crossed"
            )
        if n > 0:
            log += n * math.log1p(-load)
    return FidelityEstimate(
        value=math.exp(log),
        model="coupling",
        inputs_echo={"n1": n1, "n2": n2, "e_c1": e_c1, "e_c2": e_c2, "C1": c1, "C2": c2},
    )


def objective(fa: FidelityEstimate, fb: FidelityEstimate) -> float:
    """pi = F_A - F_B; positive means configuration A wins."""
    if fa.model != fb.model:
        raise ValueError(f"model mismatch: {fa.model} vs {fb.model}")
    return fa.value - fb.value
