import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtqw_wigner import spectral
from dtqw_wigner.spectral import BrillouinGrid, dft_forward, dft_inverse


def random_field(seed, n):
    r = np.random.default_rng(seed)
    return r.normal(size=n) + 1j * r.normal(size=n)


def test_grid_is_ascending_and_in_zone():
    for n in (5, 8, 17, 64):
        k = BrillouinGrid(n).k
        assert np.all(np.diff(k) > 0)
        assert k.min() > -np.pi and k.max() <= np.pi + 1e-15


@given(st.integers(0, 2**32 - 1), st.integers(2, 48), st.integers(-20, 20))
def test_round_trip_and_plain_path(seed, n, n0):
    f = random_field(seed, n)
    fh = dft_forward(f, n0=n0)
    assert np.allclose(dft_inverse(fh, n0=n0), f, atol=1e-12)
    assert np.allclose(fh, dft_forward(f, n0=n0, fast=False), atol=1e-11)


def test_forward_kernel_sign():
    n = 8
    grid = BrillouinGrid(n)
    delta = np.zeros(n, complex)
    delta[1] = 1
    assert np.allclose(dft_forward(delta), np.exp(1j * grid.k))


@given(st.integers(0, 2**32 - 1), st.sampled_from([8, 16, 33, 64]))
def test_derivative_forms(seed, n):
    rep = spectral.spectral_derivative_check(random_field(seed, n))
    assert rep.max("sin") <= 1e-12
    assert rep.max("tan") <= 1e-10


def test_tan_form_needs_second_difference():
    rep = spectral.spectral_derivative_check(random_field(3, 32))
    assert rep.max("tan_with_d1d1") > 1e-3
    assert rep.notes["tan_inapplicable_k"] == pytest.approx([-np.pi / 2, np.pi / 2])


@given(st.integers(0, 2**32 - 1))
def test_pairing_matches_lattice_sum(seed):
    f, h = random_field(seed, 20), random_field(seed + 1, 20)
    lhs = spectral.pair_spectral(dft_forward(f), dft_forward(h))
    assert abs(lhs - np.sum(f * np.roll(h[::-1], 1))) < 1e-12


def test_pair_rejects_mismatch():
    with pytest.raises(ValueError):
        spectral.pair(np.zeros(4), np.zeros(5))
    with pytest.raises(ValueError):
        spectral.continuum_derivative_expansion(np.zeros(4), np.zeros(4), 0.1, 3)


def test_lattice_symbol_expansion_coefficient():
    # sin(x)/x = 1 - x^2/6 + ...
    K, eps = 1.3, 1e-2
    exact = spectral.lattice_derivative_symbol(K, eps)

    def gap(c):
        return abs(exact - (-1j * K * (1 - c * eps**2 * K**2)))

    assert gap(spectral.LATTICE_SECOND_ORDER) < 1e-9
    assert gap(spectral.PRINTED_SECOND_ORDER) > 1e-5


def test_expansion_remainder_orders():
    g = lambda x: np.exp(-x**2 / 2)
    r1 = spectral.expansion_remainder(g, 40, 0.1, "lattice", spectral.LATTICE_SECOND_ORDER)
    r2 = spectral.expansion_remainder(g, 40, 0.05, "lattice", spectral.LATTICE_SECOND_ORDER)
    assert 3.7 < np.log2(r1 / r2) < 4.3
    with pytest.raises(ValueError):
        spectral.expansion_remainder(g, 40, 0.1, "nope")
