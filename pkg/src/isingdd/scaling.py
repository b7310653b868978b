"""Large-lattice error-budget arithmetic.

Cluster-expansion bounds for decoupled Ising networks on a degree-z
tree: exact rooted-cluster counts, their growth exponent, residual
pulse/cluster amplitude bounds, the fraction of the lattice covered by
faulty clusters, and the resulting surface-code cycle budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import QubitGraph, assemble_hamiltonian

__all__ = [
    "ClusterBoundInput",
    "cluster_count",
    "mu_max",
    "pulse_error_bound",
    "cluster_norm_bound",
    "covered_fraction",
    "toric_budget",
    "ising_norm",
    "perimeter",
]


@dataclass(frozen=True)
class ClusterBoundInput:
    """Inputs for cluster-amplitude bounds.

    alpha is the dimensionless expansion parameter: J*tau_seq for the
    two-qubit-gate analysis, or z*J*tau_p/2 for per-pulse analysis.
    """

    z: int
    K: int
    alpha: float
    n_rep: int
    C: float = 1.0
    mu: float = 10.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if math.e * self.alpha * self.mu >= 1:
            raise ValueError("need e*alpha*mu < 1 for convergent bounds")


def cluster_count(z: int, s: int) -> int:
    """Number of s-site clusters on the degree-z tree containing a fixed root.

    N_s = s z [(z-1)s]! / (s! [(z-2)s + 2]!) for z >= 3; a degree-2 chain
    has only s+1 such clusters.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if z == 2:
        return s + 1
    if z < 2:
        raise ValueError("z must be >= 2")
    num = s * z * math.factorial((z - 1) * s)
    den = math.factorial(s) * math.factorial((z - 2) * s + 2)
    q, r = divmod(num, den)
    if r:  # pragma: no cover - the ratio is integral for all valid z, s
        raise ArithmeticError("cluster count is not integral")
    return q


def perimeter(z: int, s: int) -> int:
    """Boundary-site count of any s-site cluster on the degree-z tree."""
    return s * (z - 2) + 2


def mu_max(z: int, check_s: int = 30) -> float:
    """Asymptotic growth exponent: N_s <= mu_max^s with
    mu_max = 2^{(z-1) H2(1/(z-1))}."""
    if z < 3:
        raise ValueError("z must be >= 3")
    # 2^{(z-1) H2(1/(z-1))} simplifies to (z-1)^{z-1} / (z-2)^{z-2},
    # which is exact in floating point for small z (e.g. 27/4 at z = 4)
    mu = (z - 1) ** (z - 1) / (z - 2) ** (z - 2)
    for s in range(1, check_s + 1):
        if cluster_count(z, s) > mu**s * (1 + 1e-12):
            raise AssertionError(f"N_s > mu_max^s at s={s}")  # pragma: no cover
    return mu


def pulse_error_bound(alpha_p: float, K: int,
                      n_cyc: int | None = None) -> dict:
    """Residual per-pulse error after order-K decoupling.

    Returns the exact Taylor tail d_p = e^alpha - sum_{s<=K} alpha^s/s!,
    the closed-form bound e^alpha alpha^{K+1}/(K+1)!, and (optionally)
    whether the tail is small compared to 1/n_cyc.
    """
    if alpha_p < 0:
        raise ValueError("alpha_p must be >= 0")
    tail = math.exp(alpha_p) - math.fsum(alpha_p**s / math.factorial(s)
                                         for s in range(K + 1))
    tail = max(tail, 0.0)
    bound = math.exp(alpha_p) * alpha_p ** (K + 1) / math.factorial(K + 1)
    out = {"tail": tail, "bound": bound}
    if n_cyc is not None:
        out["n_cyc_ok"] = tail * n_cyc < 1.0
    return out


def cluster_norm_bound(alpha: float, s: int, K: int) -> float:
    """Tightest bound on the amplitude of an s-bond faulty cluster.

    Candidates: (e^alpha - 1)^s (no decoupling), the K=2 refinements
    e^alpha alpha^3/6 (s=1) and e^{2 alpha} alpha^3 (s=2), and the
    generic (e*alpha)^{min(s, K+1)} valid for alpha <= 1.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0:
        return 0.0
    candidates = [(math.exp(alpha) - 1.0) ** s]
    if K == 2:
        if s == 1:
            candidates.append(math.exp(alpha) * alpha**3 / 6.0)
        elif s == 2:
            candidates.append(math.exp(2 * alpha) * alpha**3)
    if alpha <= 1:
        candidates.append((math.e * alpha) ** min(s, K + 1))
    else:
        if len(candidates) == 1 and K > 0:
            raise ValueError("generic bound requires alpha <= 1")
    return min(candidates)


def covered_fraction(inp: ClusterBoundInput) -> tuple[float, float]:
    """Fraction of lattice area covered by faulty clusters during a gate.

    Returns (f_bound, f_gate): the conservative series bound
    pi C N_rep (K+1)(e alpha mu)^{K+1} [mu/(mu-1)^2 + 1/(1 - e alpha mu)^2]
    and the less conservative estimate f_gate = 2 C N_rep (alpha mu)^{K+1}.
    """
    a, mu, K = inp.alpha, inp.mu, inp.K
    if a == 0:
        return 0.0, 0.0
    eam = math.e * a * mu
    f_bound = (math.pi * inp.C * inp.n_rep * (K + 1) * eam ** (K + 1)
               * (mu / (mu - 1) ** 2 + 1.0 / (1.0 - eam) ** 2))
    f_gate = 2.0 * inp.C * inp.n_rep * (a * mu) ** (K + 1)
    return f_bound, f_gate


def toric_cycle_duration(n_rep: int) -> float:
    """Surface-code cycle length in units of tau_p: 16(8 N_rep + 36)."""
    return 16.0 * (8 * n_rep + 36)


def toric_budget(p_c_target: float, K: int = 2, C: float = 1.0,
                 mu: float = 10.0, n_rep_ref: int = 5) -> dict:
    """Solve 10 f_gate(alpha) = p_c_target for the critical coupling alpha_c.

    The repetition number is tied to the coupling through the design
    equation alpha = J tau_seq = 16 J tau_p = pi / N_rep, so
    f_gate(alpha) = 2 C (pi/alpha) (alpha mu)^{K+1}.  Returns alpha_c,
    the implied N_rep, f_gate at alpha_c, and the cycle duration at the
    reference N_rep (which must satisfy N_rep >= 5).
    """
    if n_rep_ref < 5:
        raise ValueError("N_rep >= 5 assumed by the cycle-length inequality")
    if p_c_target <= 0:
        raise ValueError("no root: p_c_target must be positive")

    def ten_f_gate(a: float) -> float:
        n_rep = math.pi / a
        return 10.0 * 2.0 * C * n_rep * (a * mu) ** (K + 1)

    lo, hi = 1e-30, 1.0 / (math.e * mu) * (1 - 1e-12)
    if ten_f_gate(hi) < p_c_target:
        raise ValueError("no root in (0, 1/(e mu)): target too large")
    while (hi - lo) / hi > 1e-8:
        mid = math.sqrt(lo * hi)  # bisect in log space (f is a power law)
        if ten_f_gate(mid) < p_c_target:
            lo = mid
        else:
            hi = mid
    alpha_c = 0.5 * (lo + hi)
    return {
        "alpha_c": alpha_c,
        "n_rep": math.pi / alpha_c,
        "f_gate": ten_f_gate(alpha_c) / 10.0,
        "tau_cyc_ref": toric_cycle_duration(n_rep_ref),
    }


def ising_norm(graph: QubitGraph) -> float:
    """Operator norm of the bare Ising drift: sum of J_ij over edges.

    With the (J/2) sz sz convention per edge this equals the largest
    |diagonal| entry when every J has one sign; returned as the printed
    edge sum regardless.
    """
    return float(sum(J for _, _, J in graph.edges))
