"""Pulse-sequence and composite-gate compilation.

All sequences are built on a 16-interval template.  Within one 16*tau_p
block of a single-qubit gate:

  - idle qubits on sublattice A run pi_x pulses in intervals 4, 10, 11, 13;
  - idle qubits on sublattice B run pi_x pulses in intervals 1, 7, 12, 14;
  - a rotated qubit additionally plays +V in intervals 2, 5, 8, -V in
    3, 6, 9, and the stretched V(t/2)/2 in 15-16, all about the rotation
    axis, on top of its sublattice's pi_x train.

The ZZ block uses 16 intervals of width tau1:

  - idle A: pi_x centered in intervals 1, 3, 5, 7, 10, 12, 14, 16;
  - idle B: pi_x centered in intervals 2, 4, 6, 8, 9, 11, 13, 15;
  - the coupled pair replaces these trains: the A-side qubit pulses at
    centers (2.5, 6.5, 9.5, 13.5)*tau1 and the B-side qubit at
    (1.5*tau1 + tau2, 5.5*tau1 + tau2, 10.5*tau1 - tau2, 14.5*tau1 - tau2),
    which leaves an effective coupling f*(J/2)*sz*sz with
    f = (tau1 + tau2)/(2*tau1).

Composite gates chain 16*tau_p blocks; a CNOT is four single-qubit
rotation blocks around N_rep repetitions of the ZZ block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .network import QubitGraph, _PAULI
from .pulse import PulseShape, make_identity_pair, make_stretched

__all__ = [
    "Segment",
    "Schedule",
    "GateSpec",
    "dcg_single",
    "dcg_symmetrized",
    "zz_sequence",
    "eulerian_dcg",
    "compose_gate",
    "hard_pulse_segment",
    "embed_ops",
    "rotation_matrix",
]

TAU_P = 1.0

IDLE_SLOTS = {"A": (4, 10, 11, 13), "B": (1, 7, 12, 14)}
DCG_PLUS_SLOTS = (2, 5, 8)
DCG_MINUS_SLOTS = (3, 6, 9)
DCG_STRETCH_START = 14.0  # intervals 15-16

ZZ_IDLE_SLOTS = {"A": (1, 3, 5, 7, 10, 12, 14, 16), "B": (2, 4, 6, 8, 9, 11, 13, 15)}
ZZ_PAIR_CENTERS_A = (2.5, 6.5, 9.5, 13.5)
ZZ_PAIR_CENTERS_B = (1.5, 5.5, 10.5, 14.5)  # tau2 shift: +,+,-,-


@dataclass(frozen=True)
class Segment:
    """One control segment: a soft shaped pulse or a zero-duration hard pulse."""

    qubit: int
    axis: str
    shape: PulseShape | None
    sign: int
    start: float
    duration: float
    angle: float | None = None  # hard pulses only

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def is_hard(self) -> bool:
        return self.shape is None


@dataclass(frozen=True)
class Schedule:
    """A compiled, immutable pulse program with its ideal target unitary."""

    n: int
    segments: tuple[Segment, ...]
    total_duration: float
    ideal_unitary: np.ndarray
    blocks: tuple[tuple["Schedule", int], ...] | None = None

    def __post_init__(self):
        if abs(self.total_duration / TAU_P - round(self.total_duration / TAU_P)) > 1e-9:
            raise ValueError("total_duration must be an integer multiple of tau_p")
        by_qubit: dict[int, list[Segment]] = {}
        for s in self.segments:
            if s.end > self.total_duration + 1e-9 or s.start < -1e-9:
                raise ValueError("segment outside schedule window")
            by_qubit.setdefault(s.qubit, []).append(s)
        for q, segs in by_qubit.items():
            soft = sorted((s for s in segs if not s.is_hard), key=lambda s: s.start)
            for a, b in zip(soft, soft[1:]):
                if a.end > b.start + 1e-9:
                    raise ValueError(f"overlapping segments on qubit {q}")
        V = self.ideal_unitary
        if V is not None:
            defect = np.max(np.abs(V @ V.conj().T - np.eye(V.shape[0])))
            if defect > 1e-8:
                raise ValueError("ideal_unitary is not unitary")

    def shifted(self, dt: float) -> "Schedule":
        segs = tuple(replace(s, start=s.start + dt) for s in self.segments)
        return Schedule(self.n, segs, self.total_duration + dt, self.ideal_unitary,
                        None)


@dataclass(frozen=True)
class GateSpec:
    """A requested gate: kind, target qubits, and construction parameters."""

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0
    axis: str = "x"
    n_rep: int = 1


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i*angle*sigma^axis/2)."""
    s = _PAULI[axis]
    return (math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * s).astype(complex)


def embed_ops(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Tensor the given single-qubit 2x2 operators into the n-qubit space."""
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, ops.get(q, np.eye(2, dtype=complex)))
    return out


def hard_pulse_segment(axis: str, angle: float, qubit: int, t: float) -> Segment:
    """Zero-duration ideal pulse applied as an exact unitary factor at time t."""
    return Segment(qubit=qubit, axis=axis, shape=None, sign=1, start=t,
                   duration=0.0, angle=angle)


def _soft_segment(qubit: int, shape: PulseShape, start: float, sign: int = 1) -> Segment:
    # fold any sign carried by the shape into the segment sign
    seg_sign = sign * shape.sign
    base = replace(shape, sign=1)
    return Segment(qubit=qubit, axis=shape.axis, shape=base, sign=seg_sign,
                   start=start, duration=base.support)


def _check_targets_non_adjacent(targets, graph: QubitGraph):
    for a in targets:
        for b in targets:
            if a < b and b in graph.neighbors(a):
                raise ValueError(f"targets {a} and {b} are adjacent in the graph")


def _idle_train_segments(qubit: int, label: str, pi_shape: PulseShape,
                         offset: float = 0.0) -> list[Segment]:
    pi_x = replace(pi_shape, axis="x")
    return [_soft_segment(qubit, pi_x, offset + (slot - 1) * TAU_P)
            for slot in IDLE_SLOTS[label]]


def dcg_single(axis: str, phi0: float, targets, graph: QubitGraph,
               pi_shape: PulseShape, rot_shape: PulseShape) -> Schedule:
    """One 16*tau_p block rotating `targets` by phi0 about `axis`.

    Non-target qubits run their sublattice's background pi_x train.
    rot_shape must have nominal angle |phi0|; negative phi0 plays the
    antipulse pattern.
    """
    targets = tuple(targets)
    _check_targets_non_adjacent(targets, graph)
    if abs(abs(phi0) - rot_shape.phi0) > 1e-9:
        raise ValueError("rot_shape angle does not match requested phi0")
    rot_sign = 1 if phi0 >= 0 else -1
    segs: list[Segment] = []
    for q in range(graph.n):
        segs.extend(_idle_train_segments(q, graph.sublattice[q], pi_shape))
    v = replace(rot_shape, axis=axis)
    for q in targets:
        for slot in DCG_PLUS_SLOTS:
            segs.append(_soft_segment(q, v, (slot - 1) * TAU_P, sign=rot_sign))
        for slot in DCG_MINUS_SLOTS:
            segs.append(_soft_segment(q, v, (slot - 1) * TAU_P, sign=-rot_sign))
        segs.append(_soft_segment(q, make_stretched(v), DCG_STRETCH_START, sign=rot_sign))
    ideal = embed_ops(graph.n, {q: rotation_matrix(axis, phi0) for q in targets})
    return Schedule(graph.n, tuple(segs), 16 * TAU_P, ideal)


def dcg_symmetrized(axis: str, phi0: float, targets, graph: QubitGraph,
                    pi_shape: PulseShape, rot_shape: PulseShape) -> Schedule:
    """Time-symmetrized DCG: the block reversed, then direct, 32*tau_p.

    Each half applies a phi0 rotation, so the ideal target is 2*phi0.
    """
    direct = dcg_single(axis, phi0, targets, graph, pi_shape, rot_shape)
    segs: list[Segment] = []
    for s in direct.segments:
        segs.append(replace(s, start=16 * TAU_P - s.end))  # mirrored half first
    for s in direct.segments:
        segs.append(replace(s, start=s.start + 16 * TAU_P))
    ideal = embed_ops(graph.n,
                      {q: rotation_matrix(axis, 2 * phi0) for q in targets})
    return Schedule(graph.n, tuple(segs), 32 * TAU_P, ideal)


def zz_sequence(pairs, tau1: float, tau2: float, n_rep: int, graph: QubitGraph,
                pi_shape: PulseShape | None) -> Schedule:
    """N_rep repetitions of the 16*tau1 ZZ block for the given edge pair(s).

    pi_shape None selects hard (zero-duration) pi_x pulses.  The recorded
    effective coupling prefactor is f = (tau1 + tau2)/(2*tau1).
    """
    pairs = [tuple(p) for p in pairs]
    soft = pi_shape is not None
    if soft and abs(tau2) > tau1 - TAU_P + 1e-12:
        raise ValueError("pulse overlap: need |tau2| <= tau1 - tau_p for soft pulses")
    if not soft and abs(tau2) > tau1 + 1e-12:
        raise ValueError("need |tau2| <= tau1")
    paired: set[int] = set()
    for i, j in pairs:
        graph.coupling(i, j)  # raises if not an edge
        paired.update((i, j))
    for i, j in pairs:
        for q in graph.neighbors(i) | graph.neighbors(j):
            if q in paired and q not in (i, j):
                raise ValueError("pairs must not be directly connected to each other")

    cycle = 16 * tau1

    def pi_segments(qubit: int, centers) -> list[Segment]:
        out = []
        for c in centers:
            if soft:
                out.append(_soft_segment(qubit, replace(pi_shape, axis="x"),
                                         c - 0.5 * TAU_P))
            else:
                out.append(hard_pulse_segment("x", np.pi, qubit, c))
        return out

    segs: list[Segment] = []
    for q in range(graph.n):
        label = graph.sublattice[q]
        if q in paired:
            continue
        centers = [(k - 0.5) * tau1 for k in ZZ_IDLE_SLOTS[label]]
        segs.extend(pi_segments(q, centers))
    for i, j in pairs:
        qa, qb = (i, j) if graph.sublattice[i] == "A" else (j, i)
        segs.extend(pi_segments(qa, [c * tau1 for c in ZZ_PAIR_CENTERS_A]))
        shifts = (tau2, tau2, -tau2, -tau2)
        segs.extend(pi_segments(qb, [c * tau1 + s
                                     for c, s in zip(ZZ_PAIR_CENTERS_B, shifts)]))

    one = Schedule(graph.n, tuple(segs), cycle, np.eye(2**graph.n, dtype=complex))

    f = (tau1 + tau2) / (2 * tau1)
    total = cycle * n_rep
    ideal = np.eye(2**graph.n, dtype=complex)
    for i, j in pairs:
        J = graph.coupling(i, j)
        zz = embed_ops(graph.n, {i: _PAULI["z"], j: _PAULI["z"]})
        ideal = ideal @ expm(-1j * f * (J / 2) * total * zz)
    all_segs = []
    for k in range(n_rep):
        for s in segs:
            all_segs.append(replace(s, start=s.start + k * cycle))
    sched = Schedule(graph.n, tuple(all_segs), total, ideal,
                     blocks=((one, n_rep),))
    object.__setattr__(sched, "coupling_prefactor", f)
    return sched


def eulerian_dcg(variant: str, gate_shape: PulseShape,
                 pi_shape: PulseShape) -> Schedule:
    """Single-qubit Eulerian DCG sequence (for analysis and cross-checks).

    full:    U_V U_x U_y U_x U_y U_x U_I U_y U_I U_x U_I U_y  (16*tau_p)
    partial: U_V U_x U_x U_x U_I U_x                           (8*tau_p)

    Operators act right-to-left in time; U_I is the pulse-antipulse
    identity of the (unstretched) gate shape, U_V the stretched gate pulse.
    """
    if variant == "full":
        ops = ["Uy", "UI", "Ux", "UI", "Uy", "UI", "Ux", "Uy", "Ux", "Uy", "Ux", "UV"]
    elif variant == "partial":
        ops = ["Ux", "UI", "Ux", "Ux", "Ux", "UV"]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    segs: list[Segment] = []
    t = 0.0
    for op in ops:
        if op in ("Ux", "Uy"):
            segs.append(_soft_segment(0, replace(pi_shape, axis=op[-1]), t))
            t += TAU_P
        elif op == "UI":
            for frag_shape, off in make_identity_pair(gate_shape):
                segs.append(_soft_segment(0, frag_shape, t + off))
            t += 2 * TAU_P
        else:  # UV
            segs.append(_soft_segment(0, make_stretched(gate_shape), t))
            t += 2 * TAU_P
    ideal = rotation_matrix(gate_shape.axis, gate_shape.net_angle)
    return Schedule(1, tuple(segs), t, ideal)


def _single_qubit_block(axis: str, phi0: float, qubit: int, graph: QubitGraph,
                        shapes: dict[str, PulseShape]) -> Schedule:
    rot = shapes["pi"] if abs(abs(phi0) - np.pi) < 1e-12 else shapes["half"]
    return dcg_single(axis, phi0, (qubit,), graph, shapes["pi"], rot)


def compose_gate(spec: GateSpec, graph: QubitGraph,
                 shapes: dict[str, PulseShape]) -> Schedule:
    """Compile a composite gate to a Schedule of 16*tau_p blocks.

    `shapes` maps "pi" -> angle-pi decoupling shape and "half" -> angle-pi/2
    rotation shape (see pulse.pulse_set).  For controlled gates the targets
    are (control, target).
    """
    n = graph.n
    if spec.kind == "rotation":
        if abs(abs(spec.angle) - np.pi / 2) < 1e-12:
            rot = shapes["half"]
        elif abs(abs(spec.angle) - np.pi) < 1e-12:
            rot = shapes["pi"]
        else:
            raise ValueError("rotation angle must be +-pi/2 or +-pi with the "
                             "standard shape set")
        return dcg_single(spec.axis, spec.angle, spec.targets, graph,
                          shapes["pi"], rot)
    if spec.kind == "zz":
        return zz_sequence([spec.targets], TAU_P, 0.0, spec.n_rep, graph,
                           shapes["pi"])

    blocks: list[Schedule] = []
    reps: list[int] = []

    def add_rot(axis: str, angle: float, qubit: int):
        blocks.append(_single_qubit_block(axis, angle, qubit, graph, shapes))
        reps.append(1)

    def add_zz(pair, n_rep):
        J = graph.coupling(*pair)
        expected = np.pi / (16 * n_rep * TAU_P)
        if abs(J - expected) > 1e-9:
            import warnings
            warnings.warn(
                f"J tau_p = {J * TAU_P:.6g} violates the design equation "
                f"J tau_p = pi/(16 N_rep) = {expected:.6g}; the ZZ angle will "
                "not be pi/4", stacklevel=3)
        zz = zz_sequence([pair], TAU_P, 0.0, 1, graph, shapes["pi"])
        blocks.append(zz)
        reps.append(n_rep)

    half = np.pi / 2
    if spec.kind == "hadamard":
        (q,) = spec.targets
        add_rot("x", -np.pi, q)
        add_rot("y", -half, q)
        ideal1q = -1j * expm(1j * np.pi / 4 * _PAULI["y"]) @ expm(1j * np.pi / 2 * _PAULI["x"])
        ideal = embed_ops(n, {q: ideal1q})
    elif spec.kind in ("cnot", "cy", "cz"):
        q1, q2 = spec.targets  # control q1, gate applied on q2
        if spec.kind == "cnot":
            order = [("rot", "y", half, q2), ("zz", None), ("rot", "y", -half, q2),
                     ("rot", "x", half, q2), ("rot", "z", half, q1)]
            phase = np.exp(1j * np.pi / 4)
            mats = [embed_ops(n, {q1: rotation_matrix("z", half)}),
                    embed_ops(n, {q2: rotation_matrix("x", half)}),
                    embed_ops(n, {q2: rotation_matrix("y", -half)}),
                    _zz_quarter(n, q1, q2),
                    embed_ops(n, {q2: rotation_matrix("y", half)})]
        elif spec.kind == "cy":
            order = [("rot", "x", half, q2), ("zz", None), ("rot", "z", -half, q2),
                     ("rot", "z", -half, q1), ("rot", "x", -half, q2)]
            phase = np.exp(-1j * np.pi / 4)
            mats = [embed_ops(n, {q2: rotation_matrix("x", -half)}),
                    embed_ops(n, {q1: rotation_matrix("z", -half)}),
                    embed_ops(n, {q2: rotation_matrix("z", -half)}),
                    _zz_quarter(n, q1, q2),
                    embed_ops(n, {q2: rotation_matrix("x", half)})]
        else:  # cz
            order = [("zz", None), ("rot", "z", -half, q2), ("rot", "z", -half, q1)]
            phase = np.exp(-1j * np.pi / 4)
            mats = [embed_ops(n, {q1: rotation_matrix("z", -half)}),
                    embed_ops(n, {q2: rotation_matrix("z", -half)}),
                    _zz_quarter(n, q1, q2)]
        for step in order:
            if step[0] == "rot":
                _, axis, angle, q = step
                add_rot(axis, angle, q)
            else:
                add_zz((q1, q2), spec.n_rep)
        ideal = phase * np.linalg.multi_dot(mats) if len(mats) > 1 else phase * mats[0]
    elif spec.kind == "swap":
        q1, q2 = spec.targets
        sub_a = compose_gate(replace(spec, kind="cnot", targets=(q1, q2)), graph, shapes)
        sub_b = compose_gate(replace(spec, kind="cnot", targets=(q2, q1)), graph, shapes)
        for sub in (sub_a, sub_b, sub_a):
            for blk, r in sub.blocks:
                blocks.append(blk)
                reps.append(r)
        ideal = sub_a.ideal_unitary @ sub_b.ideal_unitary @ sub_a.ideal_unitary
    else:
        raise ValueError(f"unknown gate kind {spec.kind!r}")

    segs: list[Segment] = []
    t = 0.0
    for blk, r in zip(blocks, reps):
        for k in range(r):
            for s in blk.segments:
                segs.append(replace(s, start=s.start + t))
            t += blk.total_duration
    return Schedule(n, tuple(segs), t, ideal,
                    blocks=tuple(zip(blocks, reps)))


def _zz_quarter(n: int, q1: int, q2: int) -> np.ndarray:
    zz = embed_ops(n, {q1: _PAULI["z"], q2: _PAULI["z"]})
    return expm(-1j * np.pi / 4 * zz)
