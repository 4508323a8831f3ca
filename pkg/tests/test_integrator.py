import dataclasses
import math

import numpy as np
import pytest

from cwlsim.hilbert import (coherent_state, displacement_operator, fidelity,
                            pad_fock, partial_trace, pure_density,
                            trace_distance)
from cwlsim.integrator import propagate, propagate_displaced
from cwlsim.model import BinSpec, SystemConfig, resolve_cutoff
from cwlsim.shortbin import emitter_moments, shortbin_rho


def test_empty_chain_captures_coherent_state():
    cfg = SystemConfig(alpha=0.7, M=0)
    for b in (BinSpec(t0=0.0, tau=0.5), BinSpec(t0=0.5, tau=1.0), BinSpec(t0=2.0, tau=3.0)):
        traj = propagate(cfg, b)
        beta = cfg.alpha_phys * math.sqrt(b.tau)
        target = pure_density(coherent_state(beta, traj.rho_v.dim - 1))
        assert fidelity(traj.rho_v, target) >= 1 - 1e-4


def test_trace_and_positivity_diagnostics():
    traj = propagate(SystemConfig(alpha=0.9, M=1), BinSpec(t0=1.0, tau=2.0))
    assert traj.diagnostics.trace_drift_max < 1e-8
    assert traj.diagnostics.positivity_min > -1e-7
    assert traj.diagnostics.hermiticity_max < 1e-9
    assert np.all(traj.populations >= -1e-8)
    assert np.all(traj.populations <= 1 + 1e-8)


def test_rabi_frequency_close_to_drive_rate():
    cfg = SystemConfig(alpha=0.9, M=1)
    traj = propagate(cfg, BinSpec(t0=8.0, tau=0.5))
    pops = traj.populations[:, 0]
    half = len(pops) // 2
    i_peak = int(np.argmax(pops[:half]))
    omega_est = math.pi / traj.times[i_peak]
    omega_expected = 2.0 * abs(cfg.alpha_phys) * math.sqrt(cfg.kappa)
    assert abs(omega_est - omega_expected) / omega_expected < 0.05


def test_populations_on_uniform_grid():
    traj = propagate(SystemConfig(alpha=0.5, M=2), BinSpec(t0=0.5, tau=1.0))
    assert len(traj.times) == 500
    dt = np.diff(traj.times)
    assert np.allclose(dt, dt[0])
    assert traj.populations.shape == (500, 2)


def test_displaced_frame_matches_direct():
    cfg = SystemConfig(alpha=0.5, M=1)
    b = BinSpec(t0=1.0, tau=1.5)
    tr = propagate(cfg, b)
    trd = propagate_displaced(cfg, b)
    dim = tr.rho_v.dim
    d = displacement_operator(trd.frame_displacement, dim - 1)
    back = d @ pad_fock(trd.rho_v.mat, dim) @ d.conj().T
    assert trace_distance(tr.rho_v.mat, back) < 1e-5


def test_displaced_frame_m0_stays_vacuum():
    traj = propagate_displaced(SystemConfig(alpha=0.8, M=0), BinSpec(t0=0.0, tau=1.0))
    vac = np.zeros_like(traj.rho_v.mat)
    vac[0, 0] = 1.0
    assert np.max(np.abs(traj.rho_v.mat - vac)) < 1e-9


def test_displaced_frame_photon_support():
    # mid-bin single-emitter case: the non-displaced state is nearly confined
    # to the lowest three Fock levels
    from cwlsim.presets import SINGLE_DRIVE, SINGLE_MID_BIN

    cfg = SystemConfig(alpha=SINGLE_DRIVE, M=1)
    traj = propagate_displaced(cfg, SINGLE_MID_BIN)
    weight = float(np.real(np.diag(traj.rho_v.mat)[:3].sum()))
    assert weight > 0.99


def test_shortbin_limit_agreement():
    cfg = SystemConfig(alpha=0.9, M=1)
    b = BinSpec(t0=1.5, tau=1e-3)
    traj = propagate(cfg, b)
    rho_e = partial_trace(traj.rho_bin_start, (0,))
    mom = emitter_moments(rho_e, 1)
    pred = shortbin_rho(mom, cfg.alpha, b.tau, cfg.kappa, 1, cutoff=traj.rho_v.dim - 1)
    assert trace_distance(traj.rho_v, pred) < 5e-3


def test_determinism_bitwise():
    cfg = SystemConfig(alpha=0.6, M=1)
    b = BinSpec(t0=0.4, tau=0.9)
    t1 = propagate(cfg, b)
    t2 = propagate(cfg, b)
    assert np.array_equal(t1.rho_v.mat, t2.rho_v.mat)
    assert np.array_equal(t1.populations, t2.populations)


def test_tolerance_halving_stability():
    from cwlsim.model import Numerics
    from cwlsim.presets import SINGLE_DRIVE, SINGLE_MID_BIN

    cfg = SystemConfig(alpha=SINGLE_DRIVE, M=1)
    r1 = propagate(cfg, SINGLE_MID_BIN).rho_v
    tight = Numerics(rtol=0.5e-8, atol=0.5e-10)
    r2 = propagate(dataclasses.replace(cfg, numerics=tight), SINGLE_MID_BIN).rho_v
    assert trace_distance(r1.mat, r2.mat) < 1e-6


def test_cutoff_verification_runs():
    traj = propagate(SystemConfig(alpha=0.5, M=1), BinSpec(t0=0.5, tau=1.0),
                     verify_cutoff=True)
    assert traj.diagnostics.cutoff_check is not None
    assert traj.diagnostics.cutoff_check < 1e-6


def test_moment_stability_under_cutoff_growth():
    # growing the propagation cutoff by 4 leaves all metrology moments stable
    from cwlsim.metrology import extract_moments

    cfg = SystemConfig(alpha=0.18, M=1, gamma_D=0.1)
    b = BinSpec(t0=2.0, tau=5.0)
    cut = resolve_cutoff(cfg, b)
    m1 = extract_moments(propagate(cfg, b).rho_v)
    m2 = extract_moments(
        propagate(dataclasses.replace(cfg, cavity_cutoff=cut + 4), b).rho_v
    )
    assert np.max(np.abs(m1.table - m2.table)) < 1e-8


def test_steady_even_chain_returns_coherent():
    cfg = SystemConfig(alpha=0.5, M=2)
    b = BinSpec(t0=25.0, tau=4.0)
    traj = propagate(cfg, b)
    beta = cfg.alpha_phys * math.sqrt(b.tau)
    target = pure_density(coherent_state(beta, traj.rho_v.dim - 1))
    assert fidelity(traj.rho_v, target) > 0.99
