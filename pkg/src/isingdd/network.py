"""Bipartite Ising qubit graphs, disorder draws, and dense Hamiltonians.

The drift Hamiltonian is

    H = sum_edges (J_ij/2) sz_i sz_j + sum_i (Delta_i/2) sz_i,

diagonal in the computational basis; drives add (1/2) V_{i,mu}(t) sigma_i^mu.
Qubit i maps to bit (n-1-i) of the basis index, i.e. qubit 0 is the
leftmost tensor factor, matching np.kron ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QubitGraph",
    "DisorderModel",
    "build_graph",
    "assemble_hamiltonian",
    "drift_diagonal",
    "sigma_z_diagonal",
    "draw_deltas",
    "graph_to_json",
    "graph_from_json",
    "disorder_to_json",
    "disorder_from_json",
]

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _two_color(n: int, edges: list[tuple[int, int, float]]) -> list[str]:
    """2-color the graph (A/B); raises ValueError if not bipartite."""
    color = [None] * n
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in edges:
        adj[i].append(j)
        adj[j].append(i)
    for start in range(n):
        if color[start] is not None:
            continue
        color[start] = "A"
        stack = [start]
        while stack:
            v = stack.pop()
            nxt = "B" if color[v] == "A" else "A"
            for w in adj[v]:
                if color[w] is None:
                    color[w] = nxt
                    stack.append(w)
                elif color[w] == color[v]:
                    raise ValueError("graph is not bipartite (odd cycle found)")
    return color


@dataclass(frozen=True)
class QubitGraph:
    """Bipartite Ising network: n qubits, weighted edges, A/B sublattice labels."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    sublattice: tuple[str, ...]
    kind: str = "custom"

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.edges:
            if i == j:
                raise ValueError("self-loop")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError("edge endpoint out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError("duplicate edge")
            seen.add(key)
            if self.sublattice[i] == self.sublattice[j]:
                raise ValueError("edge within one sublattice: labels not bipartite")

    def neighbors(self, i: int) -> set[int]:
        out = set()
        for a, b, _ in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def coupling(self, i: int, j: int) -> float:
        for a, b, J in self.edges:
            if {a, b} == {i, j}:
                return J
        raise KeyError(f"({i}, {j}) is not an edge")


def build_graph(kind: str, n: int, J: float,
                edges: list[tuple[int, int, float]] | None = None) -> QubitGraph:
    """Star (hub = qubit 0), chain (path 0-1-...-n-1), or custom edge list."""
    if n < 1:
        raise ValueError("need at least 1 qubit")
    if n < 2 and kind != "custom":
        raise ValueError("star/chain need at least 2 qubits")
    if kind == "star":
        edge_list = [(0, leaf, J) for leaf in range(1, n)]
    elif kind == "chain":
        edge_list = [(i, i + 1, J) for i in range(n - 1)]
    elif kind == "custom":
        if edges is None:
            raise ValueError("custom graph requires an edge list")
        edge_list = [(i, j, Jij) for i, j, Jij in edges]
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    labels = _two_color(n, edge_list)
    return QubitGraph(n=n, edges=tuple(edge_list), sublattice=tuple(labels), kind=kind)


def sigma_z_diagonal(n: int, i: int) -> np.ndarray:
    """Diagonal of sigma^z on qubit i (+1 for bit 0) as a length-2^n vector."""
    idx = np.arange(2**n)
    bit = (idx >> (n - 1 - i)) & 1
    return 1.0 - 2.0 * bit


def drift_diagonal(graph: QubitGraph, deltas: np.ndarray) -> np.ndarray:
    """Diagonal of the drift H = sum (J/2) sz sz + sum (Delta/2) sz."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.shape != (graph.n,):
        raise ValueError("deltas must have one entry per qubit")
    d = np.zeros(2**graph.n)
    for i, j, J in graph.edges:
        d += 0.5 * J * sigma_z_diagonal(graph.n, i) * sigma_z_diagonal(graph.n, j)
    for i in range(graph.n):
        d += 0.5 * deltas[i] * sigma_z_diagonal(graph.n, i)
    return d


def _embed(op: np.ndarray, n: int, i: int) -> np.ndarray:
    mats = [np.eye(2, dtype=complex)] * n
    mats[i] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def assemble_hamiltonian(graph: QubitGraph, deltas: np.ndarray,
                         drive: dict[int, tuple[str, float]] | None = None) -> np.ndarray:
    """Dense 2^n x 2^n Hamiltonian at one instant.

    `drive` maps qubit index -> (axis, amplitude V); the drive term is
    (V/2) sigma^mu.
    """
    if 2**graph.n > 2**10:
        raise ValueError("dense representation limited to n <= 10")
    H = np.diag(drift_diagonal(graph, deltas)).astype(complex)
    if drive:
        for i, (axis, amp) in drive.items():
            H += 0.5 * amp * _embed(_PAULI[axis], graph.n, i)
    return H


@dataclass(frozen=True)
class DisorderModel:
    """Zero-mean Gaussian chemical-shift disorder, deterministic per (seed, draw)."""

    delta_rms: float
    seed: int
    num_draws: int

    def __post_init__(self):
        if self.delta_rms < 0:
            raise ValueError("delta_rms must be >= 0")


def draw_deltas(delta_rms: float, seed: int, draw: int, n: int) -> np.ndarray:
    """Draw `n` shifts for disorder set `draw`; counter-based, order-independent.

    The unit-variance profile depends only on (seed, draw, n), so sweeping
    delta_rms rescales a common set of profiles (common random numbers).
    """
    rng = np.random.default_rng([seed, draw])
    return delta_rms * rng.standard_normal(n)


def graph_to_json(graph: QubitGraph) -> str:
    uniform = len({J for _, _, J in graph.edges}) <= 1
    rec: dict = {"kind": graph.kind, "n": graph.n}
    if uniform and graph.edges:
        rec["J"] = graph.edges[0][2]
    if graph.kind == "custom" or not uniform:
        rec["edges"] = [[i, j, J] for i, j, J in graph.edges]
    rec["labels"] = list(graph.sublattice)
    return json.dumps(rec)


def graph_from_json(text: str) -> QubitGraph:
    rec = json.loads(text)
    kind = rec["kind"]
    if "edges" in rec:
        return build_graph("custom", rec["n"], rec.get("J", 0.0),
                          edges=[tuple(e) for e in rec["edges"]])
    return build_graph(kind, rec["n"], rec["J"])


def disorder_to_json(model: DisorderModel) -> str:
    return json.dumps({"delta_rms": model.delta_rms, "seed": model.seed,
                       "num_draws": model.num_draws})


def disorder_from_json(text: str) -> DisorderModel:
    rec = json.loads(text)
    return DisorderModel(delta_rms=rec["delta_rms"], seed=rec["seed"],
                         num_draws=rec["num_draws"])
