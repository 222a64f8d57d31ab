"""Circuit representation, OpenQASM 2.0 ingestion, resource metrics, and block partitioning.

The circuit model is deliberately small: an ordered list of 1- and 2-qubit
gates over a single register.  Everything downstream (fidelity models, cycle
scheduling, Weyl analysis) consumes this representation.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field

__all__ = [
    "Gate",
    "Circuit",
    "Cycle",
    "CircuitMetrics",
    "BlockSlice",
    "CountRecord",
    "QasmError",
    "GATE_DEFS",
    "parse_qasm",
    "serialize_qasm",
    "gate_counts",
    "schedule_cycles",
    "compute_metrics",
    "partition_max_2q_blocks",
    "partition_3q_blocks",
    "normalized_counts",
    "read_count_records_csv",
    "read_count_records_json",
    "write_count_records_csv",
]

# Canonical gate name -> (arity, number of angle parameters).
GATE_DEFS: dict[str, tuple[int, int]] = {
    "U3": (1, 3),
    "RZ": (1, 1),
    "RX": (1, 1),
    "SX": (1, 0),
    "X": (1, 0),
    "H": (1, 0),
    "CNOT": (2, 0),
    "CZ": (2, 0),
    "SWAP": (2, 0),
    "RZZ": (2, 1),
    "RXX": (2, 1),
    "ISWAP": (2, 0),
    "SYC": (2, 0),
    "FSIM": (2, 2),
    "B": (2, 0),
    "CX_4RT": (2, 0),
    "CX_8RT": (2, 0),
}

# OpenQASM spelling <-> canonical name.  u1 differs from rz only by a global
# phase, which nothing in this package observes, so it maps onto RZ.
_QASM_TO_GATE = {
    "u3": "U3",
    "u": "U3",
    "u1": "RZ",
    "rz": "RZ",
    "rx": "RX",
    "sx": "SX",
    "x": "X",
    "h": "H",
    "cx": "CNOT",
    "cz": "CZ",
    "swap": "SWAP",
    "rzz": "RZZ",
    "rxx": "RXX",
    "iswap": "ISWAP",
    "syc": "SYC",
    "fsim": "FSIM",
    "b": "B",
    "cx_4rt": "CX_4RT",
    "cx_8rt": "CX_8RT",
}
_GATE_TO_QASM = {
    "U3": "u3", "RZ": "rz", "RX": "rx", "SX": "sx", "X": "x", "H": "h",
    "CNOT": "cx", "CZ": "cz", "SWAP": "swap", "RZZ": "rzz", "RXX": "rxx",
    "ISWAP": "iswap", "SYC": "syc", "FSIM": "fsim", "B": "b",
    "CX_4RT": "cx_4rt", "CX_8RT": "cx_8rt",
}
# Gates emitted as opaque declarations when serializing (not in qelib1).
_OPAQUE_GATES = {"SYC": 0, "FSIM": 2, "B": 0, "CX_4RT": 0, "CX_8RT": 0, "ISWAP": 0}


class QasmError(ValueError):
    """Raised on malformed or unsupported OpenQASM input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Gate:
    """A single gate application: canonical name, operand qubits, angle params."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in GATE_DEFS:
            raise ValueError(f"unknown gate {self.name!r}")
        arity, n_params = GATE_DEFS[self.name]
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} expects {arity} qubits, got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} operands must be distinct, got {self.qubits}")
        if len(self.params) != n_params:
            raise ValueError(f"{self.name} expects {n_params} params, got {len(self.params)}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be non-negative")

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over `width` qubits; the unit of resource analysis."""

    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits, default=-1) >= self.width:
                raise ValueError(f"gate {g.name} on {g.qubits} exceeds width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class Cycle:
    """One ASAP layer: gates with pairwise-disjoint qubit supports."""

    index: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if q in seen:
                    raise ValueError(f"qubit {q} appears twice in cycle {self.index}")
                seen.add(q)


@dataclass(frozen=True)
class CircuitMetrics:
    """Gate counts, cycle count, and average per-cycle parallelism."""

    width: int
    n1: int
    n2: int
    m: int
    depth: int
    p1: float
    p2: float

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0 or self.m < 0:
            raise ValueError("counts must be non-negative")
        if self.m != self.depth:
            raise ValueError("cycle count and depth must agree under ASAP layering")


@dataclass
class BlockSlice:
    """A maximal run of gates confined to a small qubit set.

    Blocks partition the circuit: multiplying the block unitaries in emission
    order, each embedded at its qubit set, reproduces the circuit unitary.
    `gate_indices` are positions into the source circuit's gate list.
    """

    qubit_set: frozenset[int]
    gates: list[Gate] = field(default_factory=list)
    gate_indices: list[int] = field(default_factory=list)

    @property
    def n2(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2)

    @property
    def degenerate(self) -> bool:
        return len(self.qubit_set) < 2


@dataclass(frozen=True)
class CountRecord:
    """Externally supplied 2-qubit (and optional 1-qubit) gate count for one
    (benchmark, gate set, topology) combination."""

    benchmark: str
    gate_set: str
    topology: str
    n2: int
    n1: int | None = None

    def __post_init__(self):
        if self.n2 < 0:
            raise ValueError("n2 must be non-negative")
        if self.n1 is not None and self.n1 < 0:
            raise ValueError("n1 must be non-negative")


# ---------------------------------------------------------------------------
# OpenQASM 2.0 subset parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(pi|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|[()*/+-])")


def _eval_param(expr: str, line: int) -> float:
    """Evaluate a QASM angle expression: numbers, pi, + - * /, parentheses."""
    tokens: list[str] = []
    pos = 0
    while pos < len(expr):
        m = _TOKEN_RE.match(expr, pos)
        if not m:
            raise QasmError(f"bad parameter expression {expr!r}", line)
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append("$")

    def parse_expr(i: int) -> tuple[float, int]:
        val, i = parse_term(i)
        while tokens[i] in "+-":
            op = tokens[i]
            rhs, i = parse_term(i + 1)
            val = val + rhs if op == "+" else val - rhs
        return val, i

    def parse_term(i: int) -> tuple[float, int]:
        val, i = parse_factor(i)
        while tokens[i] in "*/":
            op = tokens[i]
            rhs, i = parse_factor(i + 1)
            if op == "/":
                if rhs == 0:
                    raise QasmError(f"division by zero in {expr!r}", line)
                val = val / rhs
            else:
                val = val * rhs
        return val, i

    def parse_factor(i: int) -> tuple[float, int]:
        tok = tokens[i]
        if tok == "-":
            val, i = parse_factor(i + 1)
            return -val, i
        if tok == "+":
            return parse_factor(i + 1)
        if tok == "(":
            val, i = parse_expr(i + 1)
            if tokens[i] != ")":
                raise QasmError(f"unbalanced parentheses in {expr!r}", line)
            return val, i + 1
        if tok == "pi":
            return math.pi, i + 1
        try:
            return float(tok), i + 1
        except ValueError:
            raise QasmError(f"bad token {tok!r} in {expr!r}", line) from None

    val, i = parse_expr(0)
    if tokens[i] != "$":
        raise QasmError(f"trailing tokens in {expr!r}", line)
    return val


_STMT_RE = re.compile(
    r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*(?:\((?P<params>[^)]*)\))?\s*(?P<args>[^;]*)$"
)
_QARG_RE = re.compile(r"^(?P<reg>[A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(?P<idx>\d+)\s*\]$")


def parse_qasm(text: str) -> Circuit:
    """Parse an OpenQASM 2.0 program (single quantum register, supported gate
    set, no classical control) into a Circuit.  Measurements and barriers are
    accepted and dropped; opaque declarations register exotic gate names.
    """
    qreg_name: str | None = None
    width = 0
    gates: list[Gate] = []
    # Strip block comments while preserving line structure for error messages.
    text = re.sub(r"/\*.*?\*/", lambda m: re.sub(r"[^\n]", " ", m.group(0)), text, flags=re.S)

    pending = ""
    pending_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("//", 1)[0]
        if not code.strip():
            continue
        if not pending:
            pending_line = lineno
        pending += " " + code
        while ";" in pending:
            stmt, pending = pending.split(";", 1)
            stmt = stmt.strip()
            if not stmt:
                continue
            qreg_name, width = _parse_statement(stmt, pending_line, qreg_name, width, gates)
            pending_line = lineno
    if pending.strip():
        raise QasmError(f"missing semicolon after {pending.strip()!r}", pending_line)
    if qreg_name is None:
        raise QasmError("no quantum register declared", 1)
    return Circuit(width=width, gates=tuple(gates))


def _parse_statement(stmt, lineno, qreg_name, width, gates):
    if stmt.startswith("OPENQASM"):
        if not stmt.split(None, 1)[1].strip().startswith("2"):
            raise QasmError("only OpenQASM 2.0 is supported", lineno)
        return qreg_name, width
    if stmt.startswith("include"):
        return qreg_name, width
    if stmt.startswith("qreg"):
        m = re.match(r"qreg\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$", stmt)
        if not m:
            raise QasmError(f"malformed qreg declaration {stmt!r}", lineno)
        if qreg_name is not None:
            raise QasmError("only one quantum register is supported", lineno)
        return m.group(1), int(m.group(2))
    if stmt.startswith("creg"):
        return qreg_name, width
    if stmt.startswith("opaque"):
        m = re.match(r"opaque\s+([A-Za-z_][A-Za-z0-9_]*)", stmt)
        if not m or m.group(1).lower() not in _QASM_TO_GATE:
            raise QasmError(f"unsupported opaque declaration {stmt!r}", lineno)
        return qreg_name, width
    if stmt.startswith("barrier"):
        return qreg_name, width
    if stmt.startswith("measure"):
        return qreg_name, width
    if stmt.startswith("gate ") or stmt.startswith("if"):
        raise QasmError(f"unsupported statement {stmt.split()[0]!r}", lineno)

    m = _STMT_RE.match(stmt)
    if not m:
        raise QasmError(f"cannot parse statement {stmt!r}", lineno)
    qasm_name = m.group("name").lower()
    if qasm_name not in _QASM_TO_GATE:
        raise QasmError(f"unsupported gate {m.group('name')!r}", lineno)
    name = _QASM_TO_GATE[qasm_name]
    arity, n_params = GATE_DEFS[name]

    params: tuple[float, ...] = ()
    if m.group("params") is not None:
        params = tuple(_eval_param(p.strip(), lineno) for p in m.group("params").split(","))
    if len(params) != n_params:
        raise QasmError(f"{qasm_name} expects {n_params} parameter(s), got {len(params)}", lineno)

    if qreg_name is None:
        raise QasmError("gate before qreg declaration", lineno)
    args = [a.strip() for a in m.group("args").split(",") if a.strip()]
    if len(args) != arity:
        raise QasmError(f"{qasm_name} expects {arity} qubit(s), got {len(args)}", lineno)
    qubits = []
    for a in args:
        qm = _QARG_RE.match(a)
        if not qm:
            raise QasmError(f"malformed qubit argument {a!r}", lineno)
        if qm.group("reg") != qreg_name:
            raise QasmError(f"unknown register {qm.group('reg')!r}", lineno)
        idx = int(qm.group("idx"))
        if idx >= width:
            raise QasmError(f"qubit index {idx} out of range for qreg[{width}]", lineno)
        qubits.append(idx)
    try:
        gates.append(Gate(name, tuple(qubits), params))
    except ValueError as exc:
        raise QasmError(str(exc), lineno) from None
    return qreg_name, width


def serialize_qasm(c: Circuit) -> str:
    """Emit the circuit as an OpenQASM 2.0 program that parse_qasm round-trips."""
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    used_opaque = sorted({g.name for g in c.gates} & set(_OPAQUE_GATES))
    for name in used_opaque:
        n_params = _OPAQUE_GATES[name]
        params = "(" + ",".join(f"p{i}" for i in range(n_params)) + ")" if n_params else ""
        args = ",".join(f"a{i}" for i in range(GATE_DEFS[name][0]))
        lines.append(f"opaque {_GATE_TO_QASM[name]}{params} {args};")
    lines.append(f"qreg q[{c.width}];")
    for g in c.gates:
        params = f"({','.join(repr(p) for p in g.params)})" if g.params else ""
        args = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{_GATE_TO_QASM[g.name]}{params} {args};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Resource metrics
# ---------------------------------------------------------------------------


def gate_counts(c: Circuit) -> tuple[int, int, dict[str, int]]:
    """Return (n1, n2, per-name counts)."""
    n1 = n2 = 0
    by_name: dict[str, int] = {}
    for g in c.gates:
        if g.arity == 1:
            n1 += 1
        else:
            n2 += 1
        by_name[g.name] = by_name.get(g.name, 0) + 1
    return n1, n2, by_name


def schedule_cycles(c: Circuit) -> list[Cycle]:
    """ASAP layering: each gate lands at 1 + max(layer of the previous gate on
    each operand qubit); layers are 0-based and partition the gate list.
    """
    last_layer: dict[int, int] = {}
    layers: list[list[Gate]] = []
    for g in c.gates:
        layer = 1 + max((last_layer.get(q, -1) for q in g.qubits), default=-1)
        if layer == len(layers):
            layers.append([])
        layers[layer].append(g)
        for q in g.qubits:
            last_layer[q] = layer
    return [Cycle(index=i, gates=tuple(gs)) for i, gs in enumerate(layers)]


def compute_metrics(c: Circuit) -> CircuitMetrics:
    """Gate counts plus cycle count m and average parallelism P_i = n_i / m."""
    n1, n2, _ = gate_counts(c)
    m = len(schedule_cycles(c))
    p1 = n1 / m if m > 0 else 0.0
    p2 = n2 / m if m > 0 else 0.0
    return CircuitMetrics(width=c.width, n1=n1, n2=n2, m=m, depth=m, p1=p1, p2=p2)


# ---------------------------------------------------------------------------
# Greedy block partitioning
# ---------------------------------------------------------------------------


def _partition(c: Circuit, max_qubits: int) -> list[BlockSlice]:
    """Greedy left-to-right partition into maximal blocks on <= max_qubits qubits.

    At most one open block per qubit.  A 2q gate joins the open block that
    already contains its pair; with max_qubits == 3 it may also grow a block
    that holds exactly one operand.  Otherwise blocks touching either operand
    close and a fresh block opens.  1q gates join the open block on their
    qubit, or accumulate provisionally until a block opens there.
    """
    open_blocks: list[BlockSlice] = []
    owner: dict[int, BlockSlice] = {}
    provisional: dict[int, list[tuple[int, Gate]]] = {}
    emitted: list[BlockSlice] = []

    def close(block: BlockSlice) -> None:
        open_blocks.remove(block)
        for q in block.qubit_set:
            if owner.get(q) is block:
                del owner[q]
        emitted.append(block)

    def absorb_provisional(block: BlockSlice, qubits: tuple[int, ...]) -> None:
        staged = sorted(
            (item for q in qubits for item in provisional.pop(q, [])),
            key=lambda item: item[0],
        )
        for idx, gate in staged:
            block.gate_indices.append(idx)
            block.gates.append(gate)

    for idx, g in enumerate(c.gates):
        if g.arity == 1:
            q = g.qubits[0]
            block = owner.get(q)
            if block is not None:
                block.gate_indices.append(idx)
                block.gates.append(g)
            else:
                provisional.setdefault(q, []).append((idx, g))
            continue

        a, b = g.qubits
        target = None
        block_a, block_b = owner.get(a), owner.get(b)
        if block_a is not None and block_a is block_b:
            target = block_a
        elif max_qubits == 3:
            # Grow a block holding exactly one operand, if it has room.
            for candidate, other in ((block_a, b), (block_b, a)):
                if candidate is not None and len(candidate.qubit_set | {other}) <= max_qubits:
                    conflict = owner.get(other)
                    if conflict is not None and conflict is not candidate:
                        close(conflict)
                    candidate.qubit_set = candidate.qubit_set | {other}
                    owner[other] = candidate
                    absorb_provisional(candidate, (other,))
                    target = candidate
                    break

        if target is None:
            for blk in (block_a, block_b):
                if blk is not None and blk in open_blocks:
                    close(blk)
            target = BlockSlice(qubit_set=frozenset((a, b)))
            open_blocks.append(target)
            owner[a] = target
            owner[b] = target
            absorb_provisional(target, (a, b))
        target.gate_indices.append(idx)
        target.gates.append(g)

    # Flush still-open blocks, then leftover 1q accumulations, in first-gate order.
    for block in sorted(open_blocks, key=lambda blk: blk.gate_indices[0]):
        emitted.append(block)
    for q, staged in sorted(provisional.items(), key=lambda kv: kv[1][0][0]):
        block = BlockSlice(qubit_set=frozenset((q,)))
        for idx, gate in staged:
            block.gate_indices.append(idx)
            block.gates.append(gate)
        emitted.append(block)
    return emitted


def partition_max_2q_blocks(c: Circuit) -> list[BlockSlice]:
    """Partition into maximal 2-qubit blocks (plus degenerate 1q leftovers)."""
    return _partition(c, max_qubits=2)


def partition_3q_blocks(c: Circuit) -> list[BlockSlice]:
    """Partition into maximal blocks on at most 3 qubits; per-block 2q counts
    are available as BlockSlice.n2 for histogramming."""
    return _partition(c, max_qubits=3)


# ---------------------------------------------------------------------------
# Gate-count normalization and CountRecord I/O
# ---------------------------------------------------------------------------


def normalized_counts(
    records: list[CountRecord], baseline_gate_set: str
) -> list[tuple[str, str, float]]:
    """Per benchmark, divide every record's n2 by the baseline gate set's n2.

    The baseline record for a benchmark is matched by gate_set name; its ratio
    is exactly 1.  Missing or zero baselines are errors.
    """
    baselines: dict[str, int] = {}
    for r in records:
        if r.gate_set == baseline_gate_set:
            baselines.setdefault(r.benchmark, r.n2)
    out: list[tuple[str, str, float]] = []
    for r in records:
        base = baselines.get(r.benchmark)
        if base is None:
            raise ValueError(f"no {baseline_gate_set!r} baseline record for {r.benchmark!r}")
        if base == 0:
            raise ValueError(f"zero baseline count for {r.benchmark!r}")
        out.append((r.benchmark, r.gate_set, r.n2 / base))
    return out


_COUNT_FIELDS = ["benchmark", "gate_set", "topology", "n2", "n1"]


def read_count_records_csv(text: str) -> list[CountRecord]:
    """Read records from CSV with header `benchmark,gate_set,topology,n2,n1`
    (n1 may be blank)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != _COUNT_FIELDS:
        raise ValueError(f"expected header {','.join(_COUNT_FIELDS)!r}, got {reader.fieldnames}")
    records = []
    for row in reader:
        n1 = row["n1"].strip() if row["n1"] is not None else ""
        records.append(
            CountRecord(
                benchmark=row["benchmark"],
                gate_set=row["gate_set"],
                topology=row["topology"],
                n2=int(row["n2"]),
                n1=int(n1) if n1 else None,
            )
        )
    return records


def write_count_records_csv(records: list[CountRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(_COUNT_FIELDS)
    for r in records:
        writer.writerow([r.benchmark, r.gate_set, r.topology, r.n2, "" if r.n1 is None else r.n1])
    return buf.getvalue()


def read_count_records_json(text: str) -> list[CountRecord]:
    """JSON array form: [{"benchmark":..., "gate_set":..., "topology":..., "n2":..., "n1":...}]."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array of count records")
    return [
        CountRecord(
            benchmark=item["benchmark"],
            gate_set=item["gate_set"],
            topology=item["topology"],
            n2=int(item["n2"]),
            n1=int(item["n1"]) if item.get("n1") is not None else None,
        )
        for item in data
    ]
