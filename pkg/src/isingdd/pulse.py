"""Shaped decoupling pulses and their Magnus coefficient integrals.

A shaped pulse drives a single qubit axis with envelope

    V(t) = sum_k a_k * [1 - cos(2*pi*k*t / (duration*tau_p))],  0 <= t <= duration*tau_p,

which vanishes (with vanishing derivative) at both ends and is symmetric
about the pulse midpoint.  The accumulated rotation angle is
phi(t) = int_0^t V, with net angle phi(tau_p) = phi0.  Working in units
tau_p = 1, the quality of a pulse as a decoupling element is captured by
a small set of dimensionless integrals of the symmetrized angle
varphi(t) = phi(t) - phi0/2:

    upsilon = <cos varphi>
    beta    = (1/2) int_0^1 dt' int_0^t' dt  sin(phi(t') - phi(t))
    xi      = int_0^1 dt (t - 1/2) sin varphi(t)
    delta_1 = <c3 e2 e1> - upsilon/8          (ordered triple integrals)
    delta_2 = <s3 s2 e1>
    delta_3 = <c3 c2 e1>
    delta_4 = <s3 s2 c1>
    delta_5 = <s3 c2 c1>

with c_j = cos varphi(t_j), s_j = sin varphi(t_j) and e_j = 1, where
<...> denotes the normalized integral over the ordered simplex
0 < t1 < t2 < t3 < 1:

    <f3 g2 h1> = int_0^1 dt3 int_0^t3 dt2 int_0^t2 dt1 f(t3) g(t2) h(t1).

A pulse is "first-order self-refocusing" when upsilon = 0 and
"second-order" when upsilon = beta = 0; find_self_refocusing searches the
Fourier amplitudes for such shapes.  At phi0 = pi the coefficients get
the conventional aliases kappa = upsilon, alpha = beta, zeta = xi,
gamma_j = delta_j.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np


@functools.lru_cache(maxsize=32)
def _leggauss(points: int):
    """Cached Gauss-Legendre rule; node generation is O(points^2)."""
    return np.polynomial.legendre.leggauss(points)


__all__ = [
    "PulseShape",
    "PulseCoefficients",
    "phase_profile",
    "symmetrized_phase",
    "amplitude",
    "compute_coefficients",
    "find_self_refocusing",
    "generic_pulse",
    "square_pulse",
    "make_identity_pair",
    "make_stretched",
    "make_antipulse",
    "pulse_set",
    "shape_to_json",
    "shape_from_json",
]

TAU_P = 1.0


@dataclass(frozen=True)
class PulseShape:
    """A symmetric single-axis pulse envelope.

    kind "fourier" uses the cosine basis above; kind "square" is the
    analytic constant-amplitude fallback V(t) = phi0/(duration*tau_p).
    `sign` = -1 denotes the antipulse -V; `amplitude_scale` rescales the
    envelope (1/2 for the stretched companion over duration 2).
    """

    axis: str
    phi0: float
    fourier_amps: tuple[float, ...] = ()
    duration: float = 1.0
    sign: int = 1
    amplitude_scale: float = 1.0
    kind: str = "fourier"

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be x, y or z, got {self.axis!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind not in ("fourier", "square"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "fourier":
            total = math.fsum(self.fourier_amps) * self.duration * self.amplitude_scale
            if abs(total - self.phi0) > 1e-9:
                raise ValueError(
                    "fourier amplitudes inconsistent with phi0: "
                    f"integral {total} != {self.phi0}"
                )

    @property
    def support(self) -> float:
        return self.duration * TAU_P

    @property
    def net_angle(self) -> float:
        """Signed net rotation angle int_0^support V dt."""
        return self.sign * self.phi0


def amplitude(shape: PulseShape, t):
    """Envelope V(t) (signed), vectorized over t; zero outside support."""
    t = np.asarray(t, dtype=float)
    period = shape.support
    inside = (t >= 0.0) & (t <= period)
    tt = np.where(inside, t, 0.0)
    if shape.kind == "square":
        v = np.full_like(tt, shape.phi0 / period)
    else:
        v = np.zeros_like(tt)
        for k, a in enumerate(shape.fourier_amps, start=1):
            v += a * (1.0 - np.cos(2.0 * np.pi * k * tt / period))
        v *= shape.amplitude_scale
    return shape.sign * np.where(inside, v, 0.0)


def phase_profile(shape: PulseShape, t):
    """Accumulated angle phi(t) = int_0^t V dt' in closed form."""
    t = np.asarray(t, dtype=float)
    period = shape.support
    if np.any((t < -1e-12) | (t > period + 1e-12)):
        raise ValueError("t outside pulse support")
    t = np.clip(t, 0.0, period)
    if shape.kind == "square":
        phi = shape.phi0 * t / period
    else:
        phi = np.zeros_like(t)
        for k, a in enumerate(shape.fourier_amps, start=1):
            w = 2.0 * np.pi * k / period
            phi += a * (t - np.sin(w * t) / w)
        phi *= shape.amplitude_scale
    return shape.sign * phi


def symmetrized_phase(shape: PulseShape, t):
    """varphi(t) = phi(t) - phi_net/2, odd about the pulse midpoint."""
    return phase_profile(shape, t) - shape.net_angle / 2.0


@dataclass(frozen=True)
class PulseCoefficients:
    """The coefficient set (upsilon, beta, xi, delta_1..delta_5) at angle phi0."""

    upsilon: float
    beta: float
    xi: float
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    delta5: float
    phi0: float

    def as_dict(self) -> dict[str, float]:
        return {
            "upsilon": self.upsilon,
            "beta": self.beta,
            "xi": self.xi,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "delta4": self.delta4,
            "delta5": self.delta5,
            "phi0": self.phi0,
        }


def _check_symmetric(shape: PulseShape, samples: int = 257, tol: float = 1e-9):
    t = np.linspace(0.0, shape.support, samples)
    v = amplitude(shape, t)
    if np.max(np.abs(v - v[::-1])) > tol * max(1.0, np.max(np.abs(v))):
        raise ValueError("coefficient integrals require a symmetric pulse")


def compute_coefficients(shape: PulseShape, points: int | None = None) -> PulseCoefficients:
    """Evaluate upsilon, beta, xi and delta_1..5 by Gauss-Legendre quadrature.

    The triple integrals run over the ordered simplex 0 < t1 < t2 < t3 < tau
    via the substitution t3 = tau*u3, t2 = t3*u2, t1 = t2*u1 (Jacobian
    u3^2 u2), tensorized with `points` nodes per axis.  By default `points`
    scales with the shape's phase variation (see _quad_points); the simplex
    axes are capped at 128 nodes to bound memory.
    """
    _check_symmetric(shape)
    if points is None:
        points = _quad_points(getattr(shape, "fourier_amps", None)
                              or (shape.phi0,))
    tau = shape.support
    x, w = _leggauss(points)
    # nodes/weights on [0, 1]
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w

    t = tau * u
    varphi = symmetrized_phase(shape, t)
    cos_v = np.cos(varphi)
    sin_v = np.sin(varphi)

    upsilon = float(np.dot(wu, cos_v))
    xi = float(np.dot(wu, (u - 0.5) * sin_v))

    # beta: (1/(2 tau^2)) * double integral of sin(phi(t') - phi(t)), t < t'
    tp = tau * u  # outer variable t'
    # inner t = t' * u1  -> Jacobian t'
    T_outer = tp[:, None]
    T_inner = T_outer * u[None, :]
    phi_outer = phase_profile(shape, tp)[:, None]
    phi_inner = phase_profile(shape, T_inner.ravel()).reshape(T_inner.shape)
    integrand = np.sin(phi_outer - phi_inner)
    inner = (integrand * wu[None, :]).sum(axis=1) * tp  # int_0^{t'} dt
    beta = float(0.5 / tau**2 * np.dot(wu * tau, inner))

    # ordered-simplex triples: t3 = tau*u3, t2 = t3*u2, t1 = t2*u1
    p3 = min(points, 128)
    if p3 != points:
        x3, w3 = _leggauss(p3)
        u = 0.5 * (x3 + 1.0)
        wu = 0.5 * w3
    u3 = u[:, None, None]
    u2 = u[None, :, None]
    u1 = u[None, None, :]
    t3 = tau * u3
    t2 = t3 * u2
    t1 = t2 * u1
    jac = (u3**2) * u2  # (t3^2 t2)/tau^3 after normalizing by tau^3
    wgt = wu[:, None, None] * wu[None, :, None] * wu[None, None, :] * jac

    v3 = symmetrized_phase(shape, t3.ravel()).reshape(t3.shape)
    v2 = symmetrized_phase(shape, t2.ravel()).reshape(t2.shape)
    v1 = symmetrized_phase(shape, t1.ravel()).reshape(t1.shape)
    c3, s3 = np.cos(v3), np.sin(v3)
    c2, s2 = np.cos(v2), np.sin(v2)
    c1, _ = np.cos(v1), np.sin(v1)

    def simplex(f):
        return float((f * wgt).sum())

    delta1 = simplex(c3) - upsilon / 8.0
    delta2 = simplex(s3 * s2)
    delta3 = simplex(c3 * c2)
    delta4 = simplex(s3 * s2 * c1)
    delta5 = simplex(s3 * c2 * c1)

    return PulseCoefficients(
        upsilon=upsilon,
        beta=beta,
        xi=xi,
        delta1=delta1,
        delta2=delta2,
        delta3=delta3,
        delta4=delta4,
        delta5=delta5,
        phi0=shape.net_angle,
    )


def square_pulse(phi0: float, axis: str = "x") -> PulseShape:
    """Constant-amplitude pulse; analytic upsilon = (2/phi0) sin(phi0/2)."""
    return PulseShape(axis=axis, phi0=phi0, kind="square")


def generic_pulse(phi0: float, axis: str = "x") -> PulseShape:
    """Single-harmonic shape with no zeroed coefficients ("order 0")."""
    return PulseShape(axis=axis, phi0=phi0, fourier_amps=(phi0,))


def _quad_points(amps) -> int:
    """Gauss-Legendre node count resolving the pulse's phase oscillations.

    The total phase variation is bounded by sum|a_k|; the large-amplitude
    shapes produced by the zero-xi search (peak ~200) make cos(phase)
    oscillate fast enough that a fixed 64-node rule can report a zero
    integral for a shape whose true coefficient is ~4e-3.  1.5 nodes per
    radian of the bound is ~3x the empirically sufficient density.
    """
    bound = 1.5 * float(np.sum(np.abs(amps)))
    return int(min(max(64, np.ceil(bound)), 768))


def _upsilon_beta(amps: np.ndarray, points: int | None = None):
    """Fast upsilon/beta/xi evaluation (1D/2D quadrature) for the shape search."""
    if points is None:
        points = _quad_points(amps)
    shape = PulseShape(axis="x", phi0=float(np.sum(amps)), fourier_amps=tuple(amps))
    x, w = _leggauss(points)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    sym = symmetrized_phase(shape, u)
    upsilon = float(np.dot(wu, np.cos(sym)))
    xi = float(np.dot(wu, (u - 0.5) * np.sin(sym)))
    tp = u
    T_inner = tp[:, None] * u[None, :]
    phi_outer = phase_profile(shape, tp)[:, None]
    phi_inner = phase_profile(shape, T_inner.ravel()).reshape(T_inner.shape)
    inner = (np.sin(phi_outer - phi_inner) * wu[None, :]).sum(axis=1) * tp
    beta = float(0.5 * np.dot(wu, inner))
    return upsilon, beta, xi


def find_self_refocusing(order: int, phi0: float, num_harmonics: int | None = None,
                         zero_xi: bool = False) -> PulseShape:
    """Search Fourier amplitudes for a self-refocusing shape.

    Solves the constraint system {sum_k a_k = phi0, upsilon = 0} (order 1)
    or {..., beta = 0} (order 2) by damped Newton iteration with
    finite-difference Jacobians, from a fixed list of deterministic
    starting points.  Among converged solutions the one with the smallest
    peak amplitude max_t |V(t)| wins, which makes the result reproducible.
    With zero_xi=True (order 2 only) the first-order moment xi is zeroed
    as well, which silences the entire first-order average Hamiltonian.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if zero_xi and order != 2:
        raise ValueError("zero_xi requires order 2")
    min_harm = order + 1 + (1 if zero_xi else 0)
    if num_harmonics is None:
        # one spare harmonic when zeroing xi: the square system fails to
        # converge for some angles (e.g. phi0 = pi/2)
        num_harmonics = min_harm + (1 if zero_xi else 0)
    if num_harmonics < min_harm:
        raise ValueError(f"num_harmonics must be at least {min_harm}")

    n_con = min_harm  # normalization + upsilon (+ beta) (+ xi)

    def residual(amps: np.ndarray) -> np.ndarray:
        ups, bet, xiv = _upsilon_beta(amps)
        out = [float(np.sum(amps)) - phi0, ups]
        if order == 2:
            out.append(bet)
        if zero_xi:
            out.append(xiv)
        return np.array(out)

    def peak(amps: np.ndarray) -> float:
        shape = PulseShape(axis="x", phi0=float(np.sum(amps)), fourier_amps=tuple(amps))
        t = np.linspace(0.0, 1.0, 2049)
        return float(np.max(np.abs(amplitude(shape, t))))

    starts = []
    base = np.zeros(num_harmonics)
    base[0] = phi0
    for pattern in (
        (0.0,), (2.0,), (-2.0,), (4.0,), (-4.0,), (6.0,), (-6.0,),
        (2.0, -2.0), (-2.0, 2.0), (4.0, -2.0), (-4.0, 2.0),
        (3.0, 3.0), (-3.0, -3.0), (6.0, -3.0), (-6.0, 3.0),
    ):
        a0 = base.copy()
        for j, p in enumerate(pattern):
            if 1 + j < num_harmonics:
                a0[1 + j] += p
        a0[0] = phi0 - np.sum(a0[1:])
        starts.append(a0)

    best = None
    best_peak = np.inf
    for a0 in starts:
        a = a0.copy()
        ok = False
        for _ in range(60):
            r = residual(a)
            if np.max(np.abs(r)) < 1e-13:
                ok = True
                break
            # finite-difference Jacobian
            J = np.zeros((n_con, num_harmonics))
            eps = 1e-6
            for j in range(num_harmonics):
                ap = a.copy()
                ap[j] += eps
                J[:, j] = (residual(ap) - r) / eps
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            # damped line search
            lam = 1.0
            r0 = np.linalg.norm(r)
            while lam > 1e-6:
                a_try = a + lam * step
                if np.linalg.norm(residual(a_try)) < r0:
                    break
                lam *= 0.5
            else:
                break
            a = a + lam * step
        if ok:
            p = peak(a)
            if p < best_peak - 1e-9:
                best_peak = p
                best = a
    if best is None:
        raise RuntimeError(
            f"no self-refocusing shape found (order={order}, phi0={phi0}, "
            f"num_harmonics={num_harmonics})"
        )
    # polish at full quadrature density; the normalization is enforced
    # exactly by treating a_1 as dependent
    a = best

    def with_norm(tail: np.ndarray) -> np.ndarray:
        return np.concatenate(([phi0 - float(np.sum(tail))], tail))

    def residual64(tail: np.ndarray) -> np.ndarray:
        ups, bet, xiv = _upsilon_beta(with_norm(tail))
        out = [ups]
        if order == 2:
            out.append(bet)
        if zero_xi:
            out.append(xiv)
        return np.array(out)

    tail = a[1:].copy()
    for _ in range(12):
        r = residual64(tail)
        if np.max(np.abs(r)) < 1e-13:
            break
        J = np.zeros((n_con - 1, num_harmonics - 1))
        eps = 1e-7
        for j in range(num_harmonics - 1):
            tp2 = tail.copy()
            tp2[j] += eps
            J[:, j] = (residual64(tp2) - r) / eps
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        lam, r0 = 1.0, np.linalg.norm(r)
        while lam > 1e-6:
            if np.linalg.norm(residual64(tail + lam * step)) < r0:
                break
            lam *= 0.5
        else:
            break
        tail = tail + lam * step
    if np.max(np.abs(residual64(tail))) > 1e-10:
        raise RuntimeError(
            f"shape refinement failed to converge (order={order}, phi0={phi0}, "
            f"num_harmonics={num_harmonics}, zero_xi={zero_xi})")
    a = with_norm(tail)
    return PulseShape(axis="x", phi0=phi0, fourier_amps=tuple(float(v) for v in a))


def make_antipulse(shape: PulseShape) -> PulseShape:
    """The antipulse -V(t) of a shape (time-reversal is a no-op for symmetric V)."""
    return replace(shape, sign=-shape.sign)


def make_stretched(shape: PulseShape) -> PulseShape:
    """Stretched companion V(t/2)/2 over duration 2*tau_p (same net angle)."""
    if shape.duration != 1.0:
        raise ValueError("can only stretch a duration-1 pulse")
    return replace(shape, duration=2.0, amplitude_scale=shape.amplitude_scale * 0.5)


def make_identity_pair(shape: PulseShape) -> list[tuple[PulseShape, float]]:
    """Pulse followed by its antipulse: net angle 0 over 2*tau_p.

    Returns a schedule fragment as (shape, start-offset) pairs.
    """
    if shape.duration != 1.0:
        raise ValueError("identity pair requires a duration-1 pulse")
    return [(shape, 0.0), (make_antipulse(shape), TAU_P)]


def pulse_set(order: int) -> dict[str, PulseShape]:
    """The pulse family used by the gate compiler at a given self-refocusing order.

    Keys: "pi" (angle pi, decoupling pulse) and "half" (angle pi/2,
    rotation element).  Order 0 is the generic single-harmonic shape.
    """
    if order == 0:
        return {"pi": generic_pulse(np.pi), "half": generic_pulse(np.pi / 2)}
    return {
        "pi": find_self_refocusing(order, np.pi),
        "half": find_self_refocusing(order, np.pi / 2),
    }


def shape_to_json(shape: PulseShape) -> str:
    rec = {
        "axis": shape.axis,
        "phi0": shape.phi0,
        "fourier_amps": list(shape.fourier_amps),
        "duration": shape.duration,
        "sign": shape.sign,
        "amplitude_scale": shape.amplitude_scale,
    }
    if shape.kind != "fourier":
        rec["kind"] = shape.kind
    return json.dumps(rec)


def shape_from_json(text: str) -> PulseShape:
    rec = json.loads(text)
    return PulseShape(
        axis=rec["axis"],
        phi0=rec["phi0"],
        fourier_amps=tuple(rec.get("fourier_amps", ())),
        duration=rec.get("duration", 1.0),
        sign=rec.get("sign", 1),
        amplitude_scale=rec.get("amplitude_scale", 1.0),
        kind=rec.get("kind", "fourier"),
    )
