"""Dense complex kernels for dims 2/4/8: gate matrices, block unitaries, and
Weyl-chamber canonical coordinates of 2-qubit unitaries.

Bit convention everywhere: operand/block qubits listed ascending map to
most-significant-first positions of the state index.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuits import BlockSlice, Gate

__all__ = [
    "WeylPoint",
    "UNITARY_TOL",
    "COORD_TOL",
    "gate_unitary",
    "embed_unitary",
    "block_unitary",
    "weyl_coordinates",
    "canonical_gate",
    "is_unitary",
]

UNITARY_TOL = 1e-10
COORD_TOL = 1e-9

_SQ2 = 1.0 / math.sqrt(2.0)

# Magic (Bell) basis change; columns are the magic basis states.
_MAGIC = _SQ2 * np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
)

_XX = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=complex)
_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)
_ZZ = np.array([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class WeylPoint:
    """Canonical coordinates (units of pi) with 1/2 >= c1 >= c2 >= c3 >= 0.

    Mirror-image classes (c3 < 0) and the c1 identification at the chamber
    boundary are folded in, so every local-equivalence class maps to exactly
    one point of the reduced tetrahedron.
    """

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        eps = 1e-12
        if not (0.5 + eps >= self.c1 >= self.c2 >= self.c3 >= -eps):
            raise ValueError(f"({self.c1}, {self.c2}, {self.c3}) outside the Weyl chamber")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < tol)


def _u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def _fsim(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -1j * s, 0],
            [0, -1j * s, c, 0],
            [0, 0, 0, cmath.exp(-1j * phi)],
        ],
        dtype=complex,
    )


def _cx_root(power: float) -> np.ndarray:
    # CNOT = |0><0| (x) I + |1><1| (x) X; the principal fractional power acts
    # only on the target block.
    w = cmath.exp(1j * math.pi * power)
    a, b = (1 + w) / 2, (1 - w) / 2
    return np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, a, b], [0, 0, b, a]], dtype=complex
    )


def canonical_gate(c1: float, c2: float, c3: float) -> np.ndarray:
    """exp(i*(pi/2)*(c1 XX + c2 YY + c3 ZZ)), coordinates in units of pi."""
    k = c1 * _XX + c2 * _YY + c3 * _ZZ
    vals, vecs = np.linalg.eigh(k.real if np.allclose(k.imag, 0) else k)
    phases = np.exp(1j * (math.pi / 2.0) * vals)
    return (vecs * phases) @ vecs.conj().T


_FIXED_2Q = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "ISWAP": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "SYC": _fsim(math.pi / 2.0, math.pi / 6.0),
    "CX_4RT": _cx_root(0.25),
    "CX_8RT": _cx_root(0.125),
}
_FIXED_2Q["B"] = canonical_gate(0.5, 0.25, 0.0)

_FIXED_1Q = {
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),
}


def gate_unitary(g: Gate) -> np.ndarray:
    """The 2x2 or 4x4 matrix of a gate, first operand as the most significant bit."""
    if g.name == "U3":
        return _u3(*g.params)
    if g.name == "RZ":
        half = g.params[0] / 2.0
        return np.diag([cmath.exp(-1j * half), cmath.exp(1j * half)])
    if g.name == "RX":
        half = g.params[0] / 2.0
        c, s = math.cos(half), math.sin(half)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if g.name == "RZZ":
        half = g.params[0] / 2.0
        lo, hi = cmath.exp(-1j * half), cmath.exp(1j * half)
        return np.diag([lo, hi, hi, lo])
    if g.name == "RXX":
        half = g.params[0] / 2.0
        c, s = math.cos(half), -1j * math.sin(half)
        out = c * np.eye(4, dtype=complex) + s * _XX
        return out
    if g.name == "FSIM":
        return _fsim(*g.params)
    if g.name in _FIXED_1Q:
        return _FIXED_1Q[g.name].copy()
    if g.name in _FIXED_2Q:
        return _FIXED_2Q[g.name].copy()
    raise ValueError(f"no unitary defined for gate {g.name!r}")


def embed_unitary(u: np.ndarray, positions: tuple[int, ...], n: int) -> np.ndarray:
    """Embed a k-qubit unitary acting on the given qubit positions (MSB-first
    indexing) into the 2^n-dimensional space, identity elsewhere."""
    k = len(positions)
    if u.shape != (1 << k, 1 << k):
        raise ValueError(f"matrix shape {u.shape} does not match {k} qubit position(s)")
    if any(p < 0 or p >= n for p in positions) or len(set(positions)) != k:
        raise ValueError(f"bad positions {positions} for n={n}")
    dim = 1 << n
    shifts = [n - 1 - p for p in positions]
    emb = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = 0
        for s in shifts:
            sub_in = (sub_in << 1) | ((col >> s) & 1)
        base = col
        for s in shifts:
            base &= ~(1 << s)
        for sub_out in range(1 << k):
            amp = u[sub_out, sub_in]
            if amp == 0:
                continue
            row = base
            for b, s in enumerate(shifts):
                if (sub_out >> (k - 1 - b)) & 1:
                    row |= 1 << s
            emb[row, col] = amp
    return emb


def block_unitary(block: BlockSlice, dim: int) -> np.ndarray:
    """Product of the block's gate matrices in circuit order (later gates on
    the left); block qubits ascending map to most-significant-first bits."""
    if dim not in (2, 4, 8):
        raise ValueError("dim must be 2, 4, or 8")
    n = dim.bit_length() - 1
    qubits = sorted(block.qubit_set)
    if len(qubits) != n:
        raise ValueError(f"block on {len(qubits)} qubit(s) does not match dim {dim}")
    index = {q: i for i, q in enumerate(qubits)}
    u = np.eye(dim, dtype=complex)
    for g in block.gates:
        positions = tuple(index[q] for q in g.qubits)
        u = embed_unitary(gate_unitary(g), positions, n) @ u
    return u


def _canonicalize(c: np.ndarray) -> tuple[float, float, float]:
    # Shift into [0, 1), fold the mirror/boundary identification into [0, 1/2],
    # then sort descending.
    c = np.mod(c, 1.0)
    c = np.minimum(c, 1.0 - c)
    c = np.sort(c)[::-1]
    c = np.clip(c, 0.0, 0.5)
    return (float(c[0]), float(c[1]), float(c[2]))


def weyl_coordinates(u: np.ndarray) -> WeylPoint:
    """Canonical coordinates of a 2-qubit unitary via the magic-basis spectrum.

    Normalize to det 1, move to the magic basis (M = B^dag U B), and read the
    eigenphases of M^T M; the coordinates follow from the standard linear
    combinations of the half-phases, canonicalized into the reduced chamber.
    Invariant under 1q (x) 1q multiplication on either side and global phase.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("weyl_coordinates expects a 4x4 matrix")
    if not is_unitary(u):
        raise ValueError("input is not unitary to tolerance")
    det = np.linalg.det(u)
    v = u / det ** 0.25
    m = _MAGIC.conj().T @ v @ _MAGIC
    gram = m.T @ m
    eigvals = np.linalg.eigvals(gram)
    two_s = np.angle(eigvals) / math.pi
    two_s[two_s <= -0.5] += 2.0
    s = np.sort(two_s / 2.0)[::-1]
    shift = int(round(s.sum()))
    s[:shift] -= 1.0
    s = np.roll(s, -shift)
    combo = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=float)
    c = combo @ s[:3]
    return WeylPoint(*_canonicalize(c))
