"""Space-time correlation, lattice Wigner function and transport-equation terms.

Layout of every tensor here: ``(p, A, B, n_j or k_j, n_p or k_p)``.

The correlation at base time ``j0`` is

    Omega^{AB}[p, n_j, n_p] = conj(psi^A[j0 - n_j, p - n_p]) psi^B[j0 + n_j, p + n_p]

with ``n_j`` on the symmetric window ``-M .. M`` and ``n_p`` over the full
ring (``0 .. N-1``).  ``W`` is its forward transform over ``(n_j, n_p)``;
``k_j`` lives on the ``2M+1`` point grid, ``k_p`` on the ``N`` point grid.

Spin matrices act on the second index (right action)::

    (M |> W)^{AB} = M^B_C W^{AC}
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lattice, spectral
from .report import ResidualReport, norms
from .walk import IDENTITY, SIGMA3, History, coin, derivatives, spin

P_AXIS, A_AXIS, B_AXIS, NJ_AXIS, NP_AXIS = range(5)


class AuditFailure(RuntimeError):
    """No variant of an identity reached the failure threshold."""


def right_act(M: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.einsum("bc,xac...->xab...", M, W)


def n_window(M: int) -> np.ndarray:
    return np.arange(-M, M + 1)


def taper_profile(M: int, kind=None, width: float | None = None) -> np.ndarray:
    """Weights over ``n_j = -M .. M``.

    ``None``/``"none"``: all ones.  ``"hann"``: raised cosine vanishing at
    ``|n| = M + 1``.  ``"gaussian"``: ``exp(-n^2 / 2 width^2)``, default width
    ``M / 7.5`` (edge weight ~ 6e-13).  An array is passed through.
    """
    n = n_window(M)
    if kind is None or (isinstance(kind, str) and kind == "none"):
        return np.ones(n.size)
    if isinstance(kind, np.ndarray):
        if kind.shape != n.shape:
            raise ValueError("taper array must match the n_j window")
        return kind.astype(float)
    if kind == "hann":
        return 0.5 * (1 + np.cos(np.pi * n / (M + 1)))
    if kind == "gaussian":
        w = M / 7.5 if width is None else width
        return np.exp(-(n**2) / (2 * w**2))
    raise ValueError(f"unknown taper {kind!r}")


def _check_window(J: int, j0: int, M: int, extra: int = 0):
    if M < 1:
        raise ValueError("window half-width must be >= 1")
    if j0 - M - extra < 0 or j0 + M + extra > J - 1:
        raise ValueError(
            f"window j0={j0}, M={M} (+{extra}) does not fit in a history of {J} steps; "
            f"need j0 - M >= 1 and j0 + M <= J - 2")


def correlate(left: np.ndarray, right: np.ndarray, j0: int, M: int,
              p_sites=None) -> np.ndarray:
    """``conj(left^A[j0 - n_j, p - n_p]) right^B[j0 + n_j, p + n_p]``.

    ``left``/``right`` have shape ``(J, 2, N)``.
    """
    J, _, N = left.shape
    _check_window(J, j0, M)
    p_sites = np.arange(N) if p_sites is None else np.asarray(p_sites)
    nj = n_window(M)
    npv = np.arange(N)
    xm = (p_sites[:, None] - npv[None, :]) % N
    xp = (p_sites[:, None] + npv[None, :]) % N
    lm = left[j0 - nj][:, :, xm]     # (Lw, 2, P, N)
    rp = right[j0 + nj][:, :, xp]
    return np.einsum("aAxn,aBxn->xABan", lm.conj(), rp)


@dataclass
class OmegaTensor:
    values: np.ndarray            # tapered, (P, 2, 2, 2M+1, N)
    j0: int
    M: int
    p_sites: np.ndarray
    taper: np.ndarray
    edge_magnitude: float         # max |Omega| at |n_j| = M, before tapering
    notes: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.values.shape[-1]


def build_omega(history: History, j0: int, M: int, taper=None, p_sites=None,
                taper_width=None) -> OmegaTensor:
    _check_window(history.J, j0, M, extra=1)
    psi = history.states
    p_sites = np.arange(history.N) if p_sites is None else np.asarray(p_sites)
    raw = correlate(psi, psi, j0, M, p_sites)
    h = taper_profile(M, taper, taper_width)
    edge = float(np.abs(raw[:, :, :, [0, -1]]).max())
    omega = OmegaTensor(raw * h[:, None], j0, M, p_sites, h, edge)
    if taper is None and edge > 1e-12:
        omega.notes["warning"] = (f"|Omega| at the window edge is {edge:.2e} > 1e-12; "
                                  "the finite-window closure term is not negligible")
    return omega


@dataclass
class WignerField:
    values: np.ndarray            # (P, 2, 2, 2M+1, N)
    j0: int
    M: int
    p_sites: np.ndarray

    @property
    def kj(self) -> np.ndarray:
        return spectral.BrillouinGrid(self.values.shape[NJ_AXIS]).k

    @property
    def kp(self) -> np.ndarray:
        return spectral.BrillouinGrid(self.values.shape[NP_AXIS]).k


def transform(tensor: np.ndarray, M: int) -> np.ndarray:
    """Forward transform over ``(n_j, n_p)`` with the window origin at ``-M``."""
    return spectral.dft2_forward(tensor, (NJ_AXIS, NP_AXIS), (-M, 0))


def wigner_transform(omega: OmegaTensor) -> WignerField:
    return WignerField(transform(omega.values, omega.M), omega.j0, omega.M, omega.p_sites)


def hermiticity_defect(W: np.ndarray) -> float:
    """``max |W^{AB} - conj(W^{BA})|``."""
    return float(np.abs(W - np.conj(np.swapaxes(W, A_AXIS, B_AXIS))).max())


# -- transport-equation terms -------------------------------------------------

def _tan(k, mask: bool):
    singular = np.abs(np.cos(k)) < 1e-12
    if singular.any() and not mask:
        raise ValueError("grid contains |k| = pi/2 where tan is singular; pass mask=True")
    return np.where(singular, np.nan, np.tan(np.where(singular, 0.0, k)))


def _tan_factors(shape, mask):
    tj = _tan(spectral.BrillouinGrid(shape[NJ_AXIS]).k, mask)[:, None]
    tp = _tan(spectral.BrillouinGrid(shape[NP_AXIS]).k, mask)[None, :]
    return tj, tp


def kc_term(W: np.ndarray, theta: float, mask: bool = True) -> np.ndarray:
    """``-i (tan k_j - tan k_p (U s3) |>) W``; NaN where tan is singular."""
    tj, tp = _tan_factors(W.shape, mask)
    return -1j * (tj * W - tp * right_act(coin(theta) @ SIGMA3, W))


def ks_term(omega: OmegaTensor, theta: float, mask: bool = True) -> np.ndarray:
    """Transform of ``-i (tan k_j D_{n_j n_j} - tan k_p (U s3) D_{n_p n_p}) Omega``.

    The second differences wrap around the ``n_j`` window.
    """
    vals = omega.values
    gj = transform(lattice.d2(vals, NJ_AXIS), omega.M)
    gp = transform(lattice.d2(vals, NP_AXIS), omega.M)
    tj, tp = _tan_factors(vals.shape, mask)
    return -1j * (tj * gj - tp * right_act(coin(theta) @ SIGMA3, gp))


def mc_term(W: np.ndarray, theta: float, c_m: float = 1) -> np.ndarray:
    return c_m * right_act(coin(theta) - IDENTITY, W)


def _taper(M, taper):
    return taper_profile(M, taper) if not isinstance(taper, np.ndarray) else taper


def ms_term(history: History, j0: int, M: int, taper=None, p_sites=None) -> np.ndarray:
    """``-2`` times the transform of ``conj(psi)_- ((D_jj - U D_pp) psi)_+``."""
    d = derivatives(history)
    rhs = d["Djj"] - spin(coin(history.theta), d["Dpp"])
    corr = correlate(history.states, rhs, j0, M, p_sites)
    h = _taper(M, taper)
    return -2 * transform(corr * h[:, None], M)


def cross_term(history: History, j0: int, M: int, taper=None, p_sites=None) -> np.ndarray:
    """Transform of ``2 (D_jj psi)*_- (D_j psi)_+ - 2 (U s3) |> (D_pp psi)*_- (D_p psi)_+``.

    This is what the product rule leaves over once both ``Delta`` pieces
    are accounted for; it does not cancel.
    """
    d = derivatives(history)
    t = correlate(d["Djj"], d["Dj"], j0, M, p_sites)
    s = correlate(d["Dpp"], d["Dp"], j0, M, p_sites)
    h = _taper(M, taper)
    x = 2 * t - 2 * right_act(coin(history.theta) @ SIGMA3, s)
    return transform(x * h[:, None], M)


def _omega_ext(history, j0, M, p_sites):
    """Raw correlation on the window widened by one row on each side."""
    psi = history.states
    return correlate(psi, psi, j0, M + 1, p_sites)


def k_full(history: History, j0: int, M: int, taper=None, p_sites=None) -> np.ndarray:
    """Transform of ``h (D_{n_j} - (U s3) |> D_{n_p}) Omega`` with true neighbours.

    Equal to ``kc + ks + window_term``.
    """
    ext = _omega_ext(history, j0, M, p_sites)
    dnj = 0.5 * (ext[:, :, :, 2:] - ext[:, :, :, :-2])
    dnp = lattice.d1(ext[:, :, :, 1:-1], NP_AXIS)
    h = _taper(M, taper)
    body = dnj - right_act(coin(history.theta) @ SIGMA3, dnp)
    return transform(body * h[:, None], M)


def window_term(history: History, j0: int, M: int, taper=None, p_sites=None) -> np.ndarray:
    """Finite-window closure: transform of ``h D_{n_j} Omega - D_{n_j}(h Omega)``.

    The first derivative uses the true neighbours from the history, the
    second wraps around the window (which is what the spectral forms
    ``kc``/``ks`` assume).  Vanishes for data periodic over the window.
    """
    ext = _omega_ext(history, j0, M, p_sites)
    h = _taper(M, taper)
    true = 0.5 * (ext[:, :, :, 2:] - ext[:, :, :, :-2]) * h[:, None]
    wrapped = lattice.d1(ext[:, :, :, 1:-1] * h[:, None], NJ_AXIS)
    return transform(true - wrapped, M)


def derivative_block(history: History, j0: int, M: int, taper=None) -> np.ndarray:
    """``(D_j - (U s3) |> D_p) W`` at ``j0`` on every site."""
    psi = history.states
    h = _taper(M, taper)
    w_plus = transform(correlate(psi, psi, j0 + 1, M) * h[:, None], M)
    w_minus = transform(correlate(psi, psi, j0 - 1, M) * h[:, None], M)
    w0 = transform(correlate(psi, psi, j0, M) * h[:, None], M)
    djw = 0.5 * (w_plus - w_minus)
    dpw = lattice.d1(w0, P_AXIS)
    return djw - right_act(coin(history.theta) @ SIGMA3, dpw)


def transport_terms(history: History, j0: int, M: int, taper=None) -> dict[str, np.ndarray]:
    _check_window(history.J, j0, M, extra=1)
    h = _taper(M, taper)
    omega = build_omega(history, j0, M, h)
    W = wigner_transform(omega).values
    theta = history.theta
    return {
        "W": W,
        "D": derivative_block(history, j0, M, h),
        "Kc": kc_term(W, theta),
        "Ks": ks_term(omega, theta),
        "Kw": window_term(history, j0, M, h),
        "K": k_full(history, j0, M, h),
        "Mc": mc_term(W, theta, 1),
        "Ms": ms_term(history, j0, M, h),
        "X": cross_term(history, j0, M, h),
    }


PRINTED_VARIANT = "s=+1,c_m=1,cross=0"
LEDGER_VARIANT = "s=-1,c_m=2,cross=1"


def variant_name(s: int, c_m: int, cross: int) -> str:
    return f"s={s:+d},c_m={c_m},cross={cross}"


def transport_audit(history: History, j0: int, M: int, taper=None,
                    tol: float = 1e-11) -> ResidualReport:
    """Residual of every sign/coefficient variant of the discrete transport equation.

    Variant ``(s, c_m, cross)`` evaluates

        D - s (Kc + Ks + Kw) - c_m (U - 1) |> W - Ms - cross * X

    The printed equation is ``s=+1, c_m=1, cross=0``.  Points where
    ``tan`` is singular are left out.
    """
    t = transport_terms(history, j0, M, taper)
    K = t["Kc"] + t["Ks"] + t["Kw"]
    rep = ResidualReport("transport", tolerance=tol)
    for s in (+1, -1):
        for c_m in (1, 2):
            for x in (0, 1):
                r = t["D"] - s * K - c_m * t["Mc"] - t["Ms"] - x * t["X"]
                rep.add(variant_name(s, c_m, x), r)
    for key in ("W", "D", "Kc", "Ks", "Kw", "Mc", "Ms", "X"):
        rep.terms[key] = norms(t[key])["l2"]
    rep.notes["k_split_identity"] = norms(t["K"] - K)["max"]
    rep.notes["masked_points"] = int(np.sum(~np.isfinite(K)))
    rep.notes["degenerate_mass_variants"] = bool(np.abs(history.theta) < 1e-14)
    exact = rep.exact_variants()
    rep.notes["exact"] = exact
    best = min(n["max"] for n in rep.residuals.values())
    if best > 1e-8:
        raise AuditFailure(f"no transport variant below 1e-8 (best {best:.2e})")
    return rep


def omega_derivative_audit(history: History, j0: int, M: int,
                           tol: float = 1e-13) -> ResidualReport:
    """Pointwise check of ``(D_j + D_{n_j}) Omega`` and ``(D_p + D_{n_p}) Omega``.

    Candidate ``a`` is ``2 conj(psi)_- (D psi)_+``; candidate ``b`` adds the
    cross term ``2 (D_2 psi)*_- (D psi)_+`` (``D_2`` the matching second
    difference).
    """
    _check_window(history.J, j0, M, extra=1)
    psi = history.states
    N = history.N
    ext = _omega_ext(history, j0, M, None)
    om = ext[:, :, :, 1:-1]
    dnj = 0.5 * (ext[:, :, :, 2:] - ext[:, :, :, :-2])
    dj = 0.5 * (correlate(psi, psi, j0 + 1, M) - correlate(psi, psi, j0 - 1, M))
    dp = lattice.d1(om, P_AXIS)
    dnp = lattice.d1(om, NP_AXIS)
    d = derivatives(history)
    lead_t = 2 * correlate(psi, d["Dj"], j0, M)
    lead_x = 2 * correlate(psi, d["Dp"], j0, M)
    cross_t = 2 * correlate(d["Djj"], d["Dj"], j0, M)
    cross_x = 2 * correlate(d["Dpp"], d["Dp"], j0, M)
    res_ta = dj + dnj - lead_t
    res_xa = dp + dnp - lead_x
    rep = ResidualReport("omega_derivative", tolerance=tol)
    rep.add("time:a", res_ta)
    rep.add("time:b", res_ta - cross_t)
    rep.add("space:a", res_xa)
    rep.add("space:b", res_xa - cross_x)
    # independent closed form of the cross terms from raw shifts
    ct, cx = _cross_closed_form(psi, j0, M)
    rep.notes["time_candidate_gap_vs_cross"] = norms((res_ta - (res_ta - cross_t)) - ct)["max"]
    rep.notes["space_candidate_gap_vs_cross"] = norms((res_xa - (res_xa - cross_x)) - cx)["max"]
    rep.notes["printed_residual_minus_cross_time"] = norms(res_ta - ct)["max"]
    rep.notes["printed_residual_minus_cross_space"] = norms(res_xa - cx)["max"]
    rep.terms["cross_time_l2"] = norms(ct)["l2"]
    rep.terms["cross_space_l2"] = norms(cx)["l2"]
    rep.notes["N"] = N
    return rep


def _cross_closed_form(psi, j0, M):
    """``(psi*_{u+1} + psi*_{u-1} - 2 psi*_u)(psi_{v+1} - psi_{v-1}) / 2`` by direct indexing,
    ``u = j0 - n_j``, ``v = j0 + n_j`` (and the same along space)."""
    J, _, N = psi.shape
    nj = n_window(M)
    npv = np.arange(N)
    pp = np.arange(N)
    xm = (pp[:, None] - npv[None, :]) % N
    xp = (pp[:, None] + npv[None, :]) % N
    u, v = j0 - nj, j0 + nj

    def take(t, x):
        return psi[t][:, :, x]      # (Lw, 2, P, N)

    sec_t = take(u + 1, xm) + take(u - 1, xm) - 2 * take(u, xm)
    fst_t = take(v + 1, xp) - take(v - 1, xp)
    ct = 0.5 * np.einsum("aAxn,aBxn->xABan", sec_t.conj(), fst_t)
    sec_x = take(u, (xm + 1) % N) + take(u, (xm - 1) % N) - 2 * take(u, xm)
    fst_x = take(v, (xp + 1) % N) - take(v, (xp - 1) % N)
    cx = 0.5 * np.einsum("aAxn,aBxn->xABan", sec_x.conj(), fst_x)
    return ct, cx
