"""Tests for the RK4 propagator and effective-Hamiltonian extraction."""

import numpy as np
import pytest
from scipy.linalg import expm

from isingdd import network, propagator as prop, pulse, sequences as sq


def empty_schedule(n, T=16.0):
    return sq.Schedule(n, (), T, np.eye(2**n, dtype=complex))


def test_free_evolution_identity():
    g = network.build_graph("chain", 2, 0.0)
    r = prop.evolve(empty_schedule(2), g, np.zeros(2), steps_per_tau_p=32)
    np.testing.assert_allclose(r.unitary, np.eye(4), atol=1e-13)
    assert r.unitarity_defect < 1e-13


def test_constant_drift_exact_diagonal():
    g = network.build_graph("chain", 2, 0.3)
    deltas = np.array([0.25, -0.4])
    r = prop.evolve(empty_schedule(2), g, deltas, steps_per_tau_p=64)
    d = network.drift_diagonal(g, deltas)
    np.testing.assert_allclose(r.unitary, np.diag(np.exp(-1j * d * 16.0)),
                               atol=1e-11)


def test_spin_echo_hard_pulses():
    g = network.build_graph("chain", 2, 0.0)
    segs = (sq.hard_pulse_segment("x", np.pi, 0, 8.0),
            sq.hard_pulse_segment("x", np.pi, 0, 16.0),
            sq.hard_pulse_segment("x", np.pi, 1, 8.0),
            sq.hard_pulse_segment("x", np.pi, 1, 16.0))
    sched = sq.Schedule(2, segs, 16.0, np.eye(4, dtype=complex))
    r = prop.evolve(sched, g, np.array([0.7, -0.3]), steps_per_tau_p=64)
    # pi_x at T/2 and T refocuses any sigma_z drift exactly
    np.testing.assert_allclose(r.unitary, np.eye(4), atol=1e-11)


def test_kernel_matches_dense_reference():
    g = network.build_graph("chain", 2, 0.2)
    deltas = np.array([0.3, -0.1])
    shape = pulse.generic_pulse(np.pi, axis="y")
    segs = (sq.Segment(0, "y", shape, 1, 1.0, 1.0),
            sq.Segment(1, "x", shape, -1, 2.0, 1.0))
    sched = sq.Schedule(2, segs, 16.0, np.eye(4, dtype=complex))
    steps = 256

    diag = network.drift_diagonal(g, deltas)

    def h_func(t):
        H = np.diag(diag).astype(complex)
        for s in segs:
            amp = s.sign * float(pulse.amplitude(s.shape, t - s.start))
            H += 0.5 * amp * sq.embed_ops(2, {s.qubit: network._PAULI[s.axis]})
        return H

    U_ref = prop.evolve_operator(h_func, 16.0, steps * 16)
    r = prop.evolve(sched, g, deltas, steps_per_tau_p=steps)
    np.testing.assert_allclose(r.unitary, U_ref, atol=1e-10)


def test_rk4_convergence_order():
    gate = pulse.generic_pulse(np.pi / 2, axis="y")
    sched = sq.eulerian_dcg("partial", gate, pulse.generic_pulse(np.pi))
    g = network.build_graph("custom", 1, 0.0, edges=[])
    deltas = np.array([0.4])
    ref = prop.evolve(sched, g, deltas, steps_per_tau_p=4096).unitary
    errs = []
    for spp in (64, 128, 256):
        U = prop.evolve(sched, g, deltas, steps_per_tau_p=spp).unitary
        errs.append(np.max(np.abs(U - ref)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.5) and np.all(orders < 4.6)


def test_block_evolution_matches_flat():
    g = network.build_graph("chain", 2, 0.1)
    sched = sq.zz_sequence([(0, 1)], 2.0, 0.5, 3, g,
                           pulse.generic_pulse(np.pi))
    deltas = np.array([0.2, -0.15])
    fast = prop.evolve(sched, g, deltas, steps_per_tau_p=128)
    flat = sq.Schedule(2, sched.segments, sched.total_duration,
                       sched.ideal_unitary, blocks=None)
    slow = prop.evolve(flat, g, deltas, steps_per_tau_p=128)
    np.testing.assert_allclose(fast.unitary, slow.unitary, atol=1e-9)


def test_mismatched_sizes_rejected():
    g = network.build_graph("chain", 3, 0.1)
    with pytest.raises(ValueError, match="qubit counts"):
        prop.evolve(empty_schedule(2), g, np.zeros(3))


def test_extract_avg_hamiltonian_round_trip():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = (A + A.conj().T) / 2
    H *= 0.2 / np.linalg.norm(H, 2)  # keep eigenphases well inside (-pi, pi)
    T = 3.0
    U = expm(-1j * H * T)
    H2 = prop.extract_avg_hamiltonian(U, T)
    np.testing.assert_allclose(H2, H, atol=1e-10)


def test_extract_branch_guard():
    with pytest.raises(ValueError, match="branch"):
        prop.extract_avg_hamiltonian(np.diag([-1.0 + 0j, 1.0]), 1.0)


def test_unitary_io_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    Q, _ = np.linalg.qr(A)
    path = tmp_path / "u.bin"
    prop.write_unitary(path, Q)
    Q2 = prop.read_unitary(path)
    np.testing.assert_array_equal(Q, Q2)
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + b"\0" * 16)
    with pytest.raises(ValueError, match="magic"):
        prop.read_unitary(bad)
    with pytest.raises(ValueError, match="2\\^n"):
        prop.write_unitary(path, np.eye(3, dtype=complex))


def test_unitarity_defect_decreases_with_steps():
    gate = pulse.generic_pulse(np.pi / 2, axis="y")
    sched = sq.eulerian_dcg("full", gate, pulse.generic_pulse(np.pi))
    g = network.build_graph("custom", 1, 0.0, edges=[])
    deltas = np.array([0.3])
    d = [prop.evolve(sched, g, deltas, steps_per_tau_p=spp).unitarity_defect
         for spp in (128, 512)]
    assert d[1] < d[0] / 16
