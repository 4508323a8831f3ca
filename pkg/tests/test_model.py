import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwlsim.errors import ConfigError
from cwlsim.hilbert import trace_distance
from cwlsim.integrator import propagate
from cwlsim.model import (BinSpec, SystemConfig, build_hamiltonian,
                          build_jump_operators, liouvillian_apply, mode_gv,
                          resolve_cutoff)


def test_mode_gv_end_of_unit_bin():
    b = BinSpec(t0=0.0, tau=1.0)
    assert mode_gv(b, 1.0, kappa=1.0) == pytest.approx(-1.0)
    # value -1/sqrt(tau) = -sqrt(kappa) when tau = 1/kappa
    b2 = BinSpec(t0=0.0, tau=0.25)
    assert mode_gv(b2, 0.25, kappa=4.0) == pytest.approx(-2.0)


def test_mode_gv_outside_bin_zero():
    b = BinSpec(t0=1.0, tau=2.0)
    assert mode_gv(b, 0.5) == 0
    assert mode_gv(b, 1.0) == 0  # opening edge excluded
    assert mode_gv(b, 3.0 + 1e-9) == 0


def test_mode_gv_clamped_near_opening():
    b = BinSpec(t0=2.0, tau=1.0)
    assert mode_gv(b, 2.0 + 1e-8) == pytest.approx(-1e3)
    # clamp respects the configured magnitude
    b2 = BinSpec(t0=2.0, tau=1.0, g_max=10.0)
    assert mode_gv(b2, 2.0 + 1e-8) == pytest.approx(-10.0)


def test_mode_gv_interior_value():
    b = BinSpec(t0=1.5, tau=2.0)
    t = 2.5
    assert mode_gv(b, t) == pytest.approx(-1.0 / math.sqrt(t - 1.5))


def test_hamiltonian_m0_outside_bin_vanishes():
    cfg = SystemConfig(alpha=0.7, M=0)
    b = BinSpec(t0=1.0, tau=1.0)
    h = build_hamiltonian(cfg, b, 0.5).toarray()
    assert np.max(np.abs(h)) == 0.0


def test_hamiltonian_m1_drive_term_entrywise():
    # outside the bin H = i sqrt(k) a (s- - s+) for real drive a
    cfg = SystemConfig(alpha=0.8, M=1)
    b = BinSpec(t0=5.0, tau=1.0)
    h = build_hamiltonian(cfg, b, 1.0).toarray()
    cav = resolve_cutoff(cfg, b) + 1
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    expected = 1j * 0.8 * np.kron(lower - lower.T, np.eye(cav))
    assert np.max(np.abs(h - expected)) < 1e-12


def test_hamiltonian_m2_chiral_exchange_antisymmetric_part():
    # the emitter-emitter coupling is -i k/2 (s2+ s1- - s1+ s2-), i > j only
    cfg = SystemConfig(alpha=0.0, M=2)
    b = BinSpec(t0=5.0, tau=1.0)
    h = build_hamiltonian(cfg, b, 1.0).toarray()
    cav = resolve_cutoff(cfg, b) + 1
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    s1 = np.kron(np.kron(lower, np.eye(2)), np.eye(cav))
    s2 = np.kron(np.kron(np.eye(2), lower), np.eye(cav))
    expected = -0.5j * (s2.conj().T @ s1 - s1.conj().T @ s2)
    assert np.max(np.abs(h - expected)) < 1e-12


def test_hamiltonian_hermitian_at_sampled_times():
    cfg = SystemConfig(alpha=0.5 + 0.2j, M=2, Gamma=0.1)
    b = BinSpec(t0=0.5, tau=1.5)
    for t in (0.2, 0.5001, 0.9, 1.7, 2.0):
        h = build_hamiltonian(cfg, b, t).toarray()
        assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_jump_operators_m0_single_cavity_channel():
    cfg = SystemConfig(alpha=0.7, M=0)
    b = BinSpec(t0=0.0, tau=1.0)
    ops = build_jump_operators(cfg, b, 0.5)
    assert len(ops) == 1
    op, rate = ops[0]
    assert rate == 1.0
    g = mode_gv(b, 0.5)
    a = np.diag(np.sqrt(np.arange(1.0, op.shape[0])), k=1)
    assert np.max(np.abs(op.toarray() - np.conj(g) * a)) < 1e-12


def test_jump_operators_m1_collective_channel_in_bin():
    cfg = SystemConfig(alpha=0.9, M=1)
    b = BinSpec(t0=0.0, tau=2.0)
    t = 1.3
    ops = build_jump_operators(cfg, b, t)
    assert len(ops) == 2  # collective channel + Gamma channel at rate 0
    op, rate = ops[0]
    cav = op.shape[0] // 2
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    a = np.diag(np.sqrt(np.arange(1.0, cav)), k=1)
    g = mode_gv(b, t)
    expected = np.kron(lower, np.eye(cav)) + np.conj(g) * np.kron(np.eye(2), a)
    assert np.max(np.abs(op.toarray() - expected)) < 1e-12


def test_jump_operator_counting_m3():
    cfg = SystemConfig(alpha=0.5, M=3, Gamma=0.2, gamma_D=0.3)
    b = BinSpec(t0=0.0, tau=1.0)
    ops = build_jump_operators(cfg, b, 0.5)
    assert len(ops) == 1 + 3 + 3
    rates = [r for _, r in ops]
    assert rates == [1.0] + [0.2] * 3 + [0.3] * 3


def test_two_level_requires_zero_dark_rate():
    with pytest.raises(ConfigError):
        SystemConfig(alpha=0.5, M=1, gamma_D=0.5, emitter_levels=2)


def test_dimension_guard():
    from cwlsim.model import Numerics

    cfg = SystemConfig(alpha=0.5, M=6, numerics=Numerics(dim_limit=100))
    with pytest.raises(ConfigError):
        build_hamiltonian(cfg, BinSpec(t0=0.0, tau=2.0), 1.0)


def _random_state(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def test_liouvillian_trace_free_and_hermitian():
    cfg = SystemConfig(alpha=0.6, M=1, Gamma=0.3)
    b = BinSpec(t0=0.2, tau=1.0)
    dim = 2 * (resolve_cutoff(cfg, b) + 1)
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = _random_state(rng, dim)
        out = liouvillian_apply(cfg, b, 0.7, rho)
        assert abs(np.trace(out)) < 1e-10 * np.linalg.norm(rho)
        assert np.max(np.abs(out - out.conj().T)) < 1e-10


def test_liouvillian_stationary_vacuum():
    cfg = SystemConfig(alpha=0.0, M=1)
    b = BinSpec(t0=1.0, tau=1.0)
    dim = 2 * (resolve_cutoff(cfg, b) + 1)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    out = liouvillian_apply(cfg, b, 0.5, rho)
    assert np.max(np.abs(out)) < 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_liouvillian_linearity(seed):
    cfg = SystemConfig(alpha=0.4, M=1)
    b = BinSpec(t0=0.0, tau=1.0)
    dim = 2 * (resolve_cutoff(cfg, b) + 1)
    rng = np.random.default_rng(seed)
    r1 = _random_state(rng, dim)
    r2 = _random_state(rng, dim)
    a, c = rng.normal(), rng.normal()
    lhs = liouvillian_apply(cfg, b, 0.6, a * r1 + c * r2)
    rhs = a * liouvillian_apply(cfg, b, 0.6, r1) + c * liouvillian_apply(cfg, b, 0.6, r2)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_excited_population_decay_rate():
    # at zero drive the excited population obeys dp/dt = -(k + G + gD) p
    cfg = SystemConfig(alpha=0.0, M=1, Gamma=0.4, gamma_D=0.3, emitter_levels=3)
    b = BinSpec(t0=10.0, tau=1.0)
    cav = resolve_cutoff(cfg, b) + 1
    dim = 3 * cav
    rho = np.zeros((dim, dim), dtype=complex)
    rho[cav, cav] = 1.0  # emitter excited, cavity vacuum
    out = liouvillian_apply(cfg, b, 0.5, rho)
    p_dot = np.real(np.trace(out[cav : 2 * cav, cav : 2 * cav]))
    assert p_dot == pytest.approx(-(1.0 + 0.4 + 0.3), rel=1e-12)


def test_kappa_scaling_invariance():
    base_cfg = SystemConfig(alpha=0.6, M=1, Gamma=0.2, gamma_D=0.1)
    base_bin = BinSpec(t0=0.8, tau=1.2)
    r_ref = propagate(base_cfg, base_bin).rho_v
    for s in (0.5, 2.0):
        cfg = dataclasses.replace(base_cfg, kappa=s)
        b = BinSpec(t0=0.8 / s, tau=1.2 / s)
        r = propagate(cfg, b).rho_v
        assert trace_distance(r_ref.mat, r.mat) < 1e-6


def test_clamp_convergence():
    cfg = SystemConfig(alpha=0.7, M=1)
    r1 = propagate(cfg, BinSpec(t0=0.5, tau=1.0)).rho_v
    r2 = propagate(cfg, BinSpec(t0=0.5, tau=1.0, g_max=2e3)).rho_v
    assert trace_distance(r1.mat, r2.mat) < 1e-5
