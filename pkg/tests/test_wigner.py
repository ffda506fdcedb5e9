import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtqw_wigner import walk, wigner
from dtqw_wigner.walk import SIGMA1, SIGMA3

seeds = st.integers(0, 2**32 - 1)


def random_history(seed, N=12, J=12, theta=0.3):
    psi = walk.random_state(N, np.random.default_rng(seed))
    return walk.evolve(psi, theta, J)


def test_right_action_acts_on_second_index(rng):
    W = rng.normal(size=(3, 2, 2, 5, 4)) + 0j
    out = wigner.right_act(SIGMA3, W)
    assert np.allclose(out[:, :, 0], W[:, :, 0])
    assert np.allclose(out[:, :, 1], -W[:, :, 1])
    assert np.allclose(wigner.right_act(SIGMA1, W)[:, :, 0], W[:, :, 1])


def test_correlation_definition(rng):
    h = random_history(7)
    j0, M = 5, 3
    om = wigner.build_omega(h, j0, M).values
    p, A, B, nj, npp = 4, 0, 1, -2, 3
    psi = h.states
    N = h.N
    ref = np.conj(psi[j0 - nj, A, (p - npp) % N]) * psi[j0 + nj, B, (p + npp) % N]
    assert om[p, A, B, nj + M, npp] == pytest.approx(ref)


@given(seeds)
@settings(max_examples=15)
def test_spin_hermiticity(seed):
    W = wigner.wigner_transform(wigner.build_omega(random_history(seed), 6, 4)).values
    assert wigner.hermiticity_defect(W) <= 1e-12


def test_window_precondition():
    h = random_history(1, J=10)
    with pytest.raises(ValueError, match="j0 - M >= 1"):
        wigner.build_omega(h, 3, 3)
    with pytest.raises(ValueError):
        wigner.transport_terms(h, 5, 4)


@given(seeds, st.sampled_from([0.15, 0.3, 0.9, 1.4]))
@settings(max_examples=10)
def test_transport_ledger_variant_is_unique(seed, theta):
    rep = wigner.transport_audit(random_history(seed, theta=theta), 6, 4)
    assert rep.notes["exact"] == [wigner.LEDGER_VARIANT]
    assert rep.max(wigner.PRINTED_VARIANT) > 1e-3
    assert rep.notes["k_split_identity"] <= 1e-11


@pytest.mark.parametrize("taper", ["hann", "gaussian"])
def test_transport_exact_with_taper(taper):
    rep = wigner.transport_audit(random_history(3), 6, 4, taper=taper)
    assert rep.notes["exact"] == [wigner.LEDGER_VARIANT]


def test_transport_invariances(rng):
    psi = walk.random_state(12, rng)
    j0, M = 6, 4

    def residual(state):
        t = wigner.transport_terms(walk.evolve(state, 0.3, 12), j0, M)
        return t["D"] + (t["Kc"] + t["Ks"] + t["Kw"]) - 2 * t["Mc"] - t["Ms"] - t["X"], t["W"]

    r0, W0 = residual(psi)
    r1, W1 = residual(np.exp(0.7j) * psi)
    r2, W2 = residual(np.roll(psi, 3, axis=-1))
    assert np.nanmax(np.abs(r1 - r0)) <= 1e-12
    assert np.nanmax(np.abs(r2 - np.roll(r0, 3, axis=0))) <= 1e-12
    assert np.allclose(W1, W0) and np.allclose(W2, np.roll(W0, 3, axis=0))


def test_theta_zero_flags_degenerate_masses(rng):
    rep = wigner.transport_audit(random_history(5, theta=0.0), 6, 4)
    assert rep.notes["degenerate_mass_variants"]
    assert wigner.LEDGER_VARIANT in rep.notes["exact"]


@given(seeds)
@settings(max_examples=10)
def test_omega_candidate_gap_is_cross_term(seed):
    rep = wigner.omega_derivative_audit(random_history(seed), 6, 4)
    assert rep.exact_variants() == ["time:b", "space:b"]
    assert rep.notes["time_candidate_gap_vs_cross"] <= 1e-13
    assert rep.notes["space_candidate_gap_vs_cross"] <= 1e-13


def test_plane_wave_concentrates():
    N, M = 16, 4
    k = 2 * np.pi * 3 / N
    omega = np.pi * 4 / (2 * M + 1)
    theta = walk.commensurate_theta(k, omega)
    h = walk.evolve(walk.plane_wave(N, 3, theta), theta, 2 * M + 4)
    W = wigner.wigner_transform(wigner.build_omega(h, M + 2, M)).values
    mass = np.sum(np.abs(W) ** 2, axis=(1, 2))
    frac = mass.max(axis=(1, 2)) / mass.sum(axis=(1, 2))
    assert frac.min() >= 1 - 1e-6


def test_zero_history_gives_zero_field():
    h = walk.evolve(np.zeros((2, 8), complex), 0.3, 10)
    W = wigner.wigner_transform(wigner.build_omega(h, 5, 3)).values
    assert not W.any()


def test_taper_profile_checks():
    assert np.allclose(wigner.taper_profile(3), 1)
    assert wigner.taper_profile(3, "hann")[0] > 0
    with pytest.raises(ValueError):
        wigner.taper_profile(3, "triangle")
    with pytest.raises(ValueError):
        wigner.taper_profile(3, np.ones(4))
