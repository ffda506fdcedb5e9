"""Two-component discrete-time quantum walk on a periodic ring.

A state is an array of shape ``(2, N)``: component ``L`` (index 0) and
``R`` (index 1) over ``N`` sites.  One step is

    psi_{j+1, p} = U(theta) (psi^L_{j, p+1}, psi^R_{j, p-1})

with the coin ``U(theta) = [[cos, -i sin], [-i sin, cos]]``.
Plane waves use the spatial factor ``exp(+i k p)``; the positive branch
evolves as ``exp(-i omega j)`` with ``cos omega = cos theta cos k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice
from .report import ResidualReport

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def coin(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def translate(psi: np.ndarray) -> np.ndarray:
    """``T``: L takes its value from ``p+1``, R from ``p-1``."""
    out = np.empty_like(psi)
    out[0] = np.roll(psi[0], -1, axis=-1)
    out[1] = np.roll(psi[1], 1, axis=-1)
    return out


def step(psi: np.ndarray, theta: float) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 2 or psi.shape[0] != 2:
        raise ValueError(f"state must have shape (2, N), got {psi.shape}")
    return np.einsum("ab,bp->ap", coin(theta), translate(psi))


@dataclass(frozen=True)
class History:
    """States for ``j = 0 .. J-1``, shape ``(J, 2, N)``.

    ``eps`` and ``m`` are carried along for continuum-limit runs
    (``theta = eps m``).
    """

    states: np.ndarray
    theta: float
    eps: float | None = None
    m: float | None = None

    @property
    def J(self) -> int:
        return self.states.shape[0]

    @property
    def N(self) -> int:
        return self.states.shape[-1]

    def time_field(self) -> lattice.LatticeField:
        # time is windowed, space periodic
        return lattice.LatticeField(self.states, (False, True, True))


def evolve(initial: np.ndarray, theta: float, J: int, eps=None, m=None) -> History:
    if J < 3:
        raise ValueError(f"need at least 3 time steps, got J={J}")
    psi = np.asarray(initial, dtype=complex)
    states = np.empty((J,) + psi.shape, dtype=complex)
    states[0] = psi
    U = coin(theta)
    for j in range(1, J):
        states[j] = U @ translate(states[j - 1])
    return History(states, float(theta), eps, m)


def norm(psi) -> float:
    return float(np.sqrt(np.sum(np.abs(psi) ** 2)))


def inner(phi, psi) -> complex:
    return complex(np.vdot(phi, psi))


# -- momentum space -----------------------------------------------------------

def one_step_symbol(theta: float, k) -> np.ndarray:
    """Matrix acting on the spinor amplitude of ``exp(i k p)``; shape ``(..., 2, 2)``."""
    k = np.asarray(k, dtype=float)
    shift = np.zeros(k.shape + (2, 2), dtype=complex)
    shift[..., 0, 0] = np.exp(1j * k)
    shift[..., 1, 1] = np.exp(-1j * k)
    return coin(theta) @ shift


def quasi_energy(theta: float, k) -> np.ndarray:
    """``omega in [0, pi]`` with ``cos omega = cos theta cos k``."""
    k = np.asarray(k, dtype=float)
    c = np.cos(theta) * np.cos(k)
    # sin^2 omega written without cancellation
    s = np.sqrt(np.sin(theta) ** 2 + (np.cos(theta) * np.sin(k)) ** 2)
    return np.arctan2(s, c)


def group_velocity(theta: float, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return np.cos(theta) * np.sin(k) / np.sin(quasi_energy(theta, k))


@dataclass(frozen=True)
class Dispersion:
    k: np.ndarray
    omega: np.ndarray          # >= 0; the two branches are +omega and -omega
    positive: np.ndarray       # eigen-spinors for exp(-i omega), shape (..., 2)
    negative: np.ndarray       # eigen-spinors for exp(+i omega)


def _eigvec(theta, k, lam):
    """Normalised eigenvector of the one-step symbol for eigenvalue ``lam``.

    Row one of ``S - lam`` gives ``(s, -i e^{ik} a)`` and row two gives
    ``(b, i s e^{ik})`` with ``a = c e^{ik} - lam``, ``b = c e^{-ik} - lam``.
    The row whose difference is larger is the well-conditioned one.  The
    overall phase makes the L component real and non-negative.
    """
    c, s = np.cos(theta), np.sin(theta)
    ek = np.exp(1j * k)
    a = c * ek - lam
    b = c / ek - lam
    v = np.stack([s + 0 * a, -1j * ek * a], axis=-1)
    w = np.stack([b, 1j * s * ek + 0 * b], axis=-1)
    v = np.where((np.abs(a) >= np.abs(b))[..., None], v, w)
    nrm = np.linalg.norm(v, axis=-1)
    # fully degenerate points (theta = 0 and k in {0, pi}): any basis works
    dead = nrm < 1e-12
    nrm = np.where(dead, 1.0, nrm)
    v = v / nrm[..., None]
    lead = v[..., 0]
    phase = np.where(np.abs(lead) > 0, np.conj(lead) / np.maximum(np.abs(lead), 1e-300), 1.0)
    return v * phase[..., None], dead


def dispersion(theta: float, k) -> Dispersion:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    omega = quasi_energy(theta, k)
    pos, dead_p = _eigvec(theta, k, np.exp(-1j * omega))
    neg, dead_n = _eigvec(theta, k, np.exp(1j * omega))
    dead = dead_p | dead_n
    if dead.any():
        pos[dead] = [1, 0]
        neg[dead] = [0, 1]
    return Dispersion(k, omega, pos, neg)


def plane_wave(N: int, k_index: int, theta: float, branch: int = 1) -> np.ndarray:
    """Unit-norm eigenmode ``chi exp(i k p)`` with ``k = 2 pi k_index / N``."""
    k = 2 * np.pi * k_index / N
    disp = dispersion(theta, k)
    chi = disp.positive[0] if branch > 0 else disp.negative[0]
    p = np.arange(N)
    return chi[:, None] * np.exp(1j * k * p)[None, :] / np.sqrt(N)


def commensurate_theta(k: float, omega: float) -> float:
    """Coin angle that puts the mode ``k`` at quasi-energy ``omega``."""
    ratio = np.cos(omega) / np.cos(k)
    if not -1 <= ratio <= 1:
        raise ValueError(f"no coin angle gives omega={omega} at k={k}")
    return float(np.arccos(ratio))


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def packet_tail(psi: np.ndarray, center: float) -> float:
    """Largest amplitude at ring distance >= N/4 from ``center``."""
    N = psi.shape[-1]
    p = np.arange(N)
    dist = np.abs((p - center + N / 2) % N - N / 2)
    far = dist >= N / 4
    return float(np.abs(psi[:, far]).max()) if far.any() else 0.0


def gaussian_packet(N: int, k0: float, sigma_k: float, theta: float, branch: int = 1,
                    spin_mix: float = 0.0, center: float | None = None,
                    require_tail_clean: bool = True) -> np.ndarray:
    """Superposition of walk eigenmodes with Gaussian weights around ``k0``.

    Amplitudes go as ``exp(-(k - k0)^2 / (4 sigma_k^2))`` so the momentum
    density has standard deviation ``sigma_k``.  ``spin_mix`` is the weight
    put on the opposite branch (0 gives a single-band packet).
    """
    if sigma_k <= 0:
        raise ValueError("sigma_k must be positive")
    if not 0 <= spin_mix <= 1:
        raise ValueError("spin_mix must lie in [0, 1]")
    center = N / 2 if center is None else center
    k = 2 * np.pi * (np.arange(N) - (N - 1) // 2) / N
    a = np.exp(-_wrap(k - k0) ** 2 / (4 * sigma_k**2)) * np.exp(-1j * k * center)
    disp = dispersion(theta, k)
    main, other = (disp.positive, disp.negative) if branch > 0 else (disp.negative, disp.positive)
    coeff = (np.sqrt(1 - spin_mix) * main + np.sqrt(spin_mix) * other) * a[:, None]
    p = np.arange(N)
    psi = coeff.T @ np.exp(1j * np.outer(k, p))
    psi /= norm(psi)
    if require_tail_clean:
        tail = packet_tail(psi, center)
        if tail > 1e-14:
            # eigen-spinors branch at Im k = asinh(tan theta), so single-band
            # tails fall off only like exp(-asinh(tan theta) |x|)
            rate = np.arcsinh(abs(np.tan(theta))) if np.cos(theta) != 0 else np.inf
            raise ValueError(
                f"packet tail {tail:.2e} exceeds 1e-14 at N/4 from the centre; "
                f"single-band tails decay no faster than exp(-{rate:.3g}|x|), "
                f"increase N or use localized_packet")
    return psi


def localized_packet(N: int, k0: float, width: float, spinor=(1, 0),
                     center: float | None = None, require_tail_clean: bool = True) -> np.ndarray:
    """Real-space Gaussian ``spinor * exp(-d^2 / (4 width^2) + i k0 p)``, ``d`` the ring distance.

    Mixes both bands but is tail-clean on small rings (``width <= 0.7`` at ``N = 32``).
    """
    if width <= 0:
        raise ValueError("width must be positive")
    center = N / 2 if center is None else center
    p = np.arange(N)
    d = (p - center + N / 2) % N - N / 2
    chi = np.asarray(spinor, dtype=complex)
    psi = chi[:, None] * (np.exp(-d**2 / (4 * width**2)) * np.exp(1j * k0 * p))[None, :]
    psi /= norm(psi)
    if require_tail_clean:
        tail = packet_tail(psi, center)
        if tail > 1e-14:
            raise ValueError(f"packet tail {tail:.2e} exceeds 1e-14 at N/4; reduce width")
    return psi


def random_state(N: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=(2, N)) + 1j * rng.normal(size=(2, N))
    return psi / norm(psi)


# -- equation of motion -------------------------------------------------------

def derivatives(history: History) -> dict[str, np.ndarray]:
    """Discrete derivatives of the history, NaN on the two end times."""
    f = history.time_field()
    return {
        "Dj": lattice.d1(f, 0).values,
        "Djj": lattice.d2(f, 0).values,
        "Dp": lattice.d1(f, -1).values,
        "Dpp": lattice.d2(f, -1).values,
    }


def spin(M, psi):
    """Left action of a 2x2 matrix on the spin axis (axis -2)."""
    return np.einsum("ab,...bp->...ap", M, psi)


def eom_residual(history: History) -> ResidualReport:
    """Residual of the rewritten equation of motion on interior times.

    ``D_j psi - (U s3) D_p psi - c (U - 1) psi + D_jj psi - U D_pp psi``
    for the printed coefficient ``c = 1/2`` and for ``c = 1``.
    """
    if history.J < 3:
        raise ValueError("need J >= 3")
    d = derivatives(history)
    U = coin(history.theta)
    psi = history.states
    base = d["Dj"] - spin(U @ SIGMA3, d["Dp"]) + d["Djj"] - spin(U, d["Dpp"])
    mass = spin(U - IDENTITY, psi)
    rep = ResidualReport("eom", tolerance=1e-13)
    rep.add("paper-form", base - 0.5 * mass)
    rep.add("audit-form", base - mass)
    rep.terms["mass_term_half"] = float(np.abs(0.5 * mass[1:-1]).max())
    return rep
