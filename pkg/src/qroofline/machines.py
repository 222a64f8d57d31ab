"""Machine datasheet registry: gate sets, published fidelities, topology
descriptors, and topology-derived coupling counts.

Datasheet values are data, not code: the bundled file carries estimates
assembled from public vendor material and is meant to be edited.  Every
analysis echoes the fidelities it used.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .models import average_to_process

__all__ = [
    "GateSpec",
    "TopologySpec",
    "MachineConfig",
    "Registry",
    "DatasheetError",
    "load_datasheets",
    "default_datasheet_path",
    "coupling_counts",
]


class DatasheetError(ValueError):
    """Schema violation; `pointer` is the JSON-pointer path of the offender."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if pointer else message)


@dataclass(frozen=True)
class GateSpec:
    name: str
    arity: int
    avg_fidelity: float
    process_infidelity: float | None = None
    coupling_error: float | None = None

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError(f"arity must be 1 or 2, got {self.arity}")
        if not (0.0 <= self.avg_fidelity <= 1.0):
            raise ValueError(f"avg_fidelity {self.avg_fidelity} outside [0, 1]")
        for attr in ("process_infidelity", "coupling_error"):
            v = getattr(self, attr)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"{attr} {v} outside [0, 1]")

    def infidelity(self) -> float:
        """Process infidelity e_i: explicit if present, else derived from the
        average fidelity via the d-dimensional conversion."""
        if self.process_infidelity is not None:
            return self.process_infidelity
        return 1.0 - average_to_process(self.avg_fidelity, self.arity)


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    qubit_count: int
    rows: int | None = None
    cols: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("all_to_all", "grid", "linear", "custom"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.qubit_count < 1:
            raise ValueError("qubit_count must be positive")
        if self.kind == "grid":
            if not self.rows or not self.cols or self.rows * self.cols != self.qubit_count:
                raise ValueError(
                    f"grid {self.rows}x{self.cols} inconsistent with {self.qubit_count} qubits"
                )
        if self.kind == "custom":
            if self.edges is None:
                raise ValueError("custom topology requires an edge list")
            for a, b in self.edges:
                if a == b or not (0 <= a < self.qubit_count) or not (0 <= b < self.qubit_count):
                    raise ValueError(f"edge ({a}, {b}) references invalid qubits")

    def edge_list(self) -> list[tuple[int, int]]:
        n = self.qubit_count
        if self.kind == "all_to_all":
            return [(i, j) for i in range(n) for j in range(i + 1, n)]
        if self.kind == "linear":
            return [(i, i + 1) for i in range(n - 1)]
        if self.kind == "grid":
            edges = []
            for r in range(self.rows):
                for c in range(self.cols):
                    q = r * self.cols + c
                    if c + 1 < self.cols:
                        edges.append((q, q + 1))
                    if r + 1 < self.rows:
                        edges.append((q, q + self.cols))
            return edges
        return [tuple(e) for e in self.edges]


@dataclass(frozen=True)
class MachineConfig:
    name: str
    technology: str
    qubit_count: int
    gates: tuple[GateSpec, ...]
    topology: TopologySpec

    def __post_init__(self):
        if self.qubit_count < 2:
            raise ValueError("qubit_count must be >= 2")
        arities = {g.arity for g in self.gates}
        if 1 not in arities or 2 not in arities:
            raise ValueError("machine needs at least one 1q and one 2q gate")
        if self.topology.qubit_count != self.qubit_count:
            raise ValueError("topology qubit_count mismatch")

    def gate(self, name: str) -> GateSpec:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(f"machine {self.name!r} has no gate {name!r}")

    def best_gate(self, arity: int) -> GateSpec:
        """Highest-fidelity gate of the given arity (the one a compiler would pick)."""
        candidates = [g for g in self.gates if g.arity == arity]
        return max(candidates, key=lambda g: g.avg_fidelity)


class Registry:
    """Immutable name -> MachineConfig mapping loaded from a datasheet."""

    def __init__(self, machines: list[MachineConfig], source: str = "<memory>"):
        self._machines: dict[str, MachineConfig] = {}
        self.source = source
        for m in machines:
            if m.name in self._machines:
                raise DatasheetError(f"duplicate machine name {m.name!r}")
            self._machines[m.name] = m

    def lookup(self, name: str) -> MachineConfig:
        if name not in self._machines:
            known = ", ".join(sorted(self._machines))
            raise KeyError(f"unknown machine {name!r} (datasheet has: {known})")
        return self._machines[name]

    def names(self) -> list[str]:
        return list(self._machines)

    def __iter__(self):
        return iter(self._machines.values())

    def __len__(self) -> int:
        return len(self._machines)

    def to_dict(self) -> dict:
        return {
            "machines": [
                {
                    "name": m.name,
                    "technology": m.technology,
                    "qubit_count": m.qubit_count,
                    "topology": _topology_to_dict(m.topology),
                    "gates": [_gate_to_dict(g) for g in m.gates],
                }
                for m in self
            ]
        }


def _topology_to_dict(t: TopologySpec) -> dict:
    out: dict = {"kind": t.kind}
    if t.kind == "grid":
        out["rows"] = t.rows
        out["cols"] = t.cols
    if t.kind == "custom":
        out["edges"] = [list(e) for e in t.edges]
    return out


def _gate_to_dict(g: GateSpec) -> dict:
    out: dict = {"name": g.name, "arity": g.arity, "avg_fidelity": g.avg_fidelity}
    if g.process_infidelity is not None:
        out["process_infidelity"] = g.process_infidelity
    if g.coupling_error is not None:
        out["coupling_error"] = g.coupling_error
    return out


def _require(cond: bool, message: str, pointer: str) -> None:
    if not cond:
        raise DatasheetError(message, pointer)


def _parse_gate(obj: dict, pointer: str) -> GateSpec:
    _require(isinstance(obj, dict), "gate entry must be an object", pointer)
    for key in ("name", "arity", "avg_fidelity"):
        _require(key in obj, f"missing required field {key!r}", pointer)
    _require(isinstance(obj["name"], str), "name must be a string", f"{pointer}/name")
    _require(obj["arity"] in (1, 2), "arity must be 1 or 2", f"{pointer}/arity")
    for key in ("avg_fidelity", "process_infidelity", "coupling_error"):
        if key in obj and obj[key] is not None:
            _require(
                isinstance(obj[key], (int, float)) and 0.0 <= obj[key] <= 1.0,
                f"{key} must be a number in [0, 1]",
                f"{pointer}/{key}",
            )
    return GateSpec(
        name=obj["name"],
        arity=obj["arity"],
        avg_fidelity=float(obj["avg_fidelity"]),
        process_infidelity=obj.get("process_infidelity"),
        coupling_error=obj.get("coupling_error"),
    )


def _parse_topology(obj: dict, qubit_count: int, pointer: str) -> TopologySpec:
    _require(isinstance(obj, dict), "topology must be an object", pointer)
    _require("kind" in obj, "missing required field 'kind'", pointer)
    kind = obj["kind"]
    _require(
        kind in ("all_to_all", "grid", "linear", "custom"),
        f"unknown topology kind {kind!r}",
        f"{pointer}/kind",
    )
    edges = None
    if kind == "custom":
        _require(isinstance(obj.get("edges"), list), "custom topology needs 'edges'", pointer)
        edges = tuple((int(a), int(b)) for a, b in obj["edges"])
    try:
        return TopologySpec(
            kind=kind,
            qubit_count=qubit_count,
            rows=obj.get("rows"),
            cols=obj.get("cols"),
            edges=edges,
        )
    except ValueError as exc:
        raise DatasheetError(str(exc), pointer) from None


def load_datasheets(path: str | Path | dict) -> Registry:
    """Load and validate a datasheet JSON document into a Registry."""
    if isinstance(path, dict):
        doc = path
        source = "<inline>"
    else:
        source = str(path)
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    _require(isinstance(doc, dict) and "machines" in doc, "document needs a 'machines' array", "")
    _require(isinstance(doc["machines"], list), "'machines' must be an array", "/machines")
    machines = []
    for i, entry in enumerate(doc["machines"]):
        ptr = f"/machines/{i}"
        _require(isinstance(entry, dict), "machine entry must be an object", ptr)
        for key in ("name", "technology", "qubit_count", "topology", "gates"):
            _require(key in entry, f"missing required field {key!r}", ptr)
        _require(
            isinstance(entry["qubit_count"], int) and entry["qubit_count"] >= 2,
            "qubit_count must be an integer >= 2",
            f"{ptr}/qubit_count",
        )
        gates = tuple(
            _parse_gate(g, f"{ptr}/gates/{j}") for j, g in enumerate(entry["gates"])
        )
        topology = _parse_topology(entry["topology"], entry["qubit_count"], f"{ptr}/topology")
        try:
            machines.append(
                MachineConfig(
                    name=entry["name"],
                    technology=entry["technology"],
                    qubit_count=entry["qubit_count"],
                    gates=gates,
                    topology=topology,
                )
            )
        except ValueError as exc:
            raise DatasheetError(str(exc), ptr) from None
    return Registry(machines, source=source)


def default_datasheet_path() -> Path:
    """Path of the bundled machine datasheet."""
    return Path(str(resources.files("qroofline").joinpath("data/datasheet.json")))


def coupling_counts(t: TopologySpec) -> tuple[float, float]:
    """(C1, C2) coupling counts for the topology.

    All-to-all follows the quadratic rule C2 = n(n-1)/2; graph-like
    topologies use the average vertex degree.  C1 is the average degree in
    every case (idle qubits couple to their graph neighbours).
    """
    n = t.qubit_count
    edges = t.edge_list()
    avg_degree = 2.0 * len(edges) / n if n > 0 else 0.0
    if t.kind == "all_to_all":
        return (float(n - 1), n * (n - 1) / 2.0)
    return (avg_degree, avg_degree)
