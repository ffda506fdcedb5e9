import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtqw_wigner import walk

thetas = st.floats(-np.pi, np.pi, allow_nan=False)


def test_coin_is_unitary():
    for th in (0, 0.3, np.pi / 4, np.pi / 2, 2.0):
        U = walk.coin(th)
        assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-15)


@given(st.integers(0, 2**32 - 1), thetas)
def test_step_preserves_norm(seed, theta):
    psi = walk.random_state(16, np.random.default_rng(seed))
    assert abs(walk.norm(walk.step(psi, theta)) - 1) < 1e-14


def test_step_matches_definition(rng):
    psi = walk.random_state(10, rng)
    th = 0.4
    c, s = np.cos(th), np.sin(th)
    L, R = np.roll(psi[0], -1), np.roll(psi[1], 1)
    ref = np.array([c * L - 1j * s * R, -1j * s * L + c * R])
    assert np.allclose(walk.step(psi, th), ref)


@given(thetas, st.floats(-np.pi, np.pi))
def test_dispersion_eigenpairs(theta, k):
    disp = walk.dispersion(theta, k)
    S = walk.one_step_symbol(theta, np.atleast_1d(k))
    for vec, sign in ((disp.positive, -1), (disp.negative, 1)):
        lam = np.exp(sign * 1j * disp.omega)
        res = np.einsum("kab,kb->ka", S, vec) - lam[:, None] * vec
        assert np.abs(res).max() < 1e-12
    assert np.allclose(np.cos(disp.omega), np.cos(theta) * np.cos(k), atol=1e-14)


def test_plane_wave_evolves_with_phase():
    N, th = 16, 0.3
    psi = walk.plane_wave(N, 3, th)
    om = walk.quasi_energy(th, 2 * np.pi * 3 / N)
    assert np.allclose(walk.step(psi, th), np.exp(-1j * om) * psi, atol=1e-14)


def test_momentum_support_is_conserved():
    N = 32
    psi = walk.plane_wave(N, 5, 0.7) + walk.plane_wave(N, -2, 0.7, branch=-1)
    out = walk.evolve(psi, 0.7, 20).states[-1]
    spec = np.abs(np.fft.fft(out, axis=-1))
    keep = np.zeros(N, bool)
    keep[[5, N - 2]] = True
    assert spec[:, ~keep].max() < 1e-13


@given(st.integers(0, 2**32 - 1))
def test_eom_audit_form_exact(seed):
    psi = walk.random_state(12, np.random.default_rng(seed))
    rep = walk.eom_residual(walk.evolve(psi, 0.3, 6))
    assert rep.max("audit-form") <= 1e-13
    assert rep.max("paper-form") > 1e-4


def test_eom_theta_zero_degenerate(rng):
    rep = walk.eom_residual(walk.evolve(walk.random_state(12, rng), 0.0, 6))
    assert rep.exact_variants() == ["paper-form", "audit-form"]


def test_packet_tail_guard():
    with pytest.raises(ValueError, match="exp"):
        walk.gaussian_packet(32, 0.7, 0.44, 0.3)
    psi = walk.localized_packet(32, 0.7, 0.7)
    assert walk.packet_tail(psi, 16) <= 1e-14
    with pytest.raises(ValueError):
        walk.localized_packet(32, 0.7, 3.0)


def test_single_band_tail_rate():
    # tails fall off like exp(-asinh(tan theta) |x|)
    th, N = 0.3, 256
    psi = walk.gaussian_packet(N, 0.7, 0.3, th, require_tail_clean=False)
    a = np.abs(psi).max(0)
    x = np.arange(N) - N / 2
    far = (np.abs(x) > 40) & (np.abs(x) < 90)
    rate = -np.polyfit(np.abs(x[far]), np.log(a[far]), 1)[0]
    assert rate == pytest.approx(np.arcsinh(np.tan(th)), rel=0.1)


def test_evolve_rejects_short_history():
    with pytest.raises(ValueError):
        walk.evolve(np.zeros((2, 8)), 0.3, 2)
