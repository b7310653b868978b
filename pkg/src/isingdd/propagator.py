"""Exact-numerics time evolution of pulse schedules.

Evolution uses fixed-step classical RK4 without renormalization; the
recorded unitarity defect max|U^dag U - 1| is the accuracy diagnostic.
Zero-duration (hard) pulses are applied as exact unitary factors between
integration spans.  Schedules carrying a block decomposition are evolved
block-by-block with repeated blocks integrated once and matrix-powered.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from . import pulse as pulse_mod
from ._kernel import AXIS_CODE, rk4_evolve
from .network import QubitGraph, drift_diagonal
from .sequences import Schedule, embed_ops, rotation_matrix

__all__ = [
    "UnitaryResult",
    "evolve",
    "evolve_operator",
    "extract_avg_hamiltonian",
    "write_unitary",
    "read_unitary",
]

_MAGIC = b"IDDU"


@dataclass(frozen=True)
class UnitaryResult:
    """Propagation output: the unitary plus integration metadata."""

    unitary: np.ndarray
    total_duration: float
    steps_per_tau_p: int
    unitarity_defect: float


def _unitarity_defect(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def _evolve_flat(schedule: Schedule, diag: np.ndarray, n: int,
                 steps_per_tau_p: int) -> np.ndarray:
    """Integrate one schedule with no block structure."""
    dim = 2**n
    U = np.eye(dim, dtype=complex)

    hard = sorted((s for s in schedule.segments if s.is_hard),
                  key=lambda s: s.start)
    soft = [s for s in schedule.segments if not s.is_hard]

    # distinct drive channels (qubit, axis)
    channels = sorted({(s.qubit, s.axis) for s in soft})
    chan_idx = {ch: k for k, ch in enumerate(channels)}
    masks = np.array([1 << (n - 1 - q) for q, _ in channels], dtype=np.int64)
    axes = np.array([AXIS_CODE[ax] for _, ax in channels], dtype=np.int64)
    if len(channels) == 0:
        masks = np.zeros(0, dtype=np.int64)
        axes = np.zeros(0, dtype=np.int64)

    # integration spans are delimited by the hard-pulse times
    times = sorted({0.0, schedule.total_duration} | {s.start for s in hard})
    for t0, t1 in zip(times, times[1:]):
        span = t1 - t0
        if span > 1e-12:
            steps = max(1, int(round(span * steps_per_tau_p)))
            if abs(steps - span * steps_per_tau_p) > 1e-6:
                steps = int(np.ceil(span * steps_per_tau_p))
            h = span / steps
            grid = t0 + h / 2 * np.arange(2 * steps + 1)
            amps = np.zeros((2 * steps + 1, len(channels)))
            for s in soft:
                if s.end <= t0 + 1e-12 or s.start >= t1 - 1e-12:
                    continue
                k = chan_idx[(s.qubit, s.axis)]
                amps[:, k] += s.sign * pulse_mod.amplitude(s.shape, grid - s.start)
            rk4_evolve(diag, amps, masks, axes, h, U)
        for s in hard:
            if abs(s.start - t1) < 1e-12:
                P = embed_ops(n, {s.qubit: rotation_matrix(s.axis, s.angle)})
                U = P @ U
    return U


def evolve(schedule: Schedule, graph: QubitGraph, deltas: np.ndarray,
           steps_per_tau_p: int = 1024) -> UnitaryResult:
    """Propagate the schedule under the graph drift with shifts `deltas`."""
    if schedule.n != graph.n:
        raise ValueError("schedule and graph qubit counts differ")
    diag = drift_diagonal(graph, deltas)
    if schedule.blocks is not None:
        U = np.eye(2**graph.n, dtype=complex)
        for blk, reps in schedule.blocks:
            Ub = _evolve_flat(blk, diag, graph.n, steps_per_tau_p)
            U = np.linalg.matrix_power(Ub, reps) @ U
    else:
        U = _evolve_flat(schedule, diag, graph.n, steps_per_tau_p)
    return UnitaryResult(unitary=U, total_duration=schedule.total_duration,
                         steps_per_tau_p=steps_per_tau_p,
                         unitarity_defect=_unitarity_defect(U))


def evolve_operator(h_func, duration: float, steps: int,
                    dim: int | None = None) -> np.ndarray:
    """RK4-propagate i dU/dt = H(t) U for a callable H(t) returning a matrix.

    General-purpose (any dimension); used for average-Hamiltonian
    cross-checks with explicit bath operators.
    """
    if dim is None:
        dim = h_func(0.0).shape[0]
    U = np.eye(dim, dtype=complex)
    h = duration / steps
    for s in range(steps):
        t = s * h
        k1 = -1j * h_func(t) @ U
        k2 = -1j * h_func(t + h / 2) @ (U + h / 2 * k1)
        k3 = -1j * h_func(t + h / 2) @ (U + h / 2 * k2)
        k4 = -1j * h_func(t + h) @ (U + h * k3)
        U = U + h / 6 * (k1 + 2 * (k2 + k3) + k4)
    return U


def extract_avg_hamiltonian(U: np.ndarray, duration: float,
                            branch_guard: float = 1e-6) -> np.ndarray:
    """Effective Hamiltonian Hbar with U = exp(-i Hbar duration).

    Phases are taken on the principal branch (-pi, pi]; eigenvalues within
    `branch_guard` of the cut raise ValueError since the branch is ambiguous.
    """
    T, Q = schur(U, output="complex")
    lam = np.diag(T)
    theta = -np.angle(lam)  # in (-pi, pi]
    if np.any(np.pi - np.abs(theta) < branch_guard):
        raise ValueError("eigenphase within branch_guard of +-pi: "
                         "logarithm branch is ambiguous")
    H = (Q * (theta / duration)) @ Q.conj().T
    return 0.5 * (H + H.conj().T)


def write_unitary(path, U: np.ndarray) -> None:
    """Binary dump: magic 'IDDU', u32 qubit count, u32 reserved, then
    row-major little-endian float64 (re, im) pairs."""
    dim = U.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim or U.shape != (dim, dim):
        raise ValueError("unitary dimension must be 2^n x 2^n")
    data = np.empty((dim, dim, 2))
    data[:, :, 0] = U.real
    data[:, :, 1] = U.imag
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", n, 0))
        fh.write(data.astype("<f8").tobytes())


def read_unitary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError("bad magic; not a unitary dump")
        n, _ = struct.unpack("<II", fh.read(8))
        dim = 2**n
        raw = np.frombuffer(fh.read(dim * dim * 16), dtype="<f8")
    data = raw.reshape(dim, dim, 2)
    return data[:, :, 0] + 1j * data[:, :, 1]
