import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwlsim.bethe import transmission_phase
from cwlsim.errors import ConfigError


def test_resonant_phase_is_minus_one():
    for n in (1, 2, 3, 5):
        assert transmission_phase(0.0, n, 1.0) == -1.0 + 0.0j


def test_high_energy_limit():
    n = 2
    val = transmission_phase(1e6 * n * n, n, 1.0)
    assert abs(val - 1.0) < 2e-6
    assert val.imag < 0


def test_unimodular_on_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        e = rng.normal() * 10
        n = int(rng.integers(1, 6))
        assert abs(abs(transmission_phase(e, n, 1.0)) - 1.0) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3, allow_nan=False), st.integers(1, 8),
       st.floats(1e-3, 1e3))
def test_phase_times_conjugate_is_one(e, n, kappa):
    t = transmission_phase(e, n, kappa)
    assert abs(t * np.conj(t) - 1.0) < 1e-12


def test_parity_consequence():
    # M resonant scatterings compose to (-1)^M
    t0 = transmission_phase(0.0, 3, 2.0)
    for m in range(1, 7):
        assert t0**m == pytest.approx((-1.0) ** m)


def test_invalid_inputs_rejected():
    with pytest.raises(ConfigError):
        transmission_phase(1.0, 0, 1.0)
    with pytest.raises(ConfigError):
        transmission_phase(1.0, 1, 0.0)
