"""Continuum limit of the lattice transport equation.

Scaling: ``t = j eps``, ``x = p eps``, ``theta = eps m``, physical wave
numbers ``k_t = k_j / eps`` and ``k_x = k_p / eps``.  Derivatives are the
lattice ``d1`` divided by ``eps`` so that residuals measure modelling
error, not stencil mismatch.

The time window is weighted by a Gaussian test function ``h`` of fixed
physical width.  The weighted transform satisfies, in the continuum,

    int dtau e^{i k tau} h d_tau Omega = -i k W_h - W_{h'}

so the weight-derivative transform ``W_{h'}`` enters next to the phase
block.  With that term included the lattice-exact equation reduces to

    (d_t - s3 d_x) W - i (k_t - k_x s3) W - W_{h'} + 2 i m s1 W
        = -eps m s2 (d_x - i k_x) W + O(eps^2)

(all spin matrices acting on the second index).  The printed form differs
in the phase sign, the mass coefficient and the correction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import walk, wigner
from .report import ResidualReport
from .walk import SIGMA1, SIGMA2, SIGMA3
from .wigner import right_act

AUDIT_FLAGS = {"phase_sign": -1, "mass_coeff": 2, "correction": "derived"}
PRINTED_FLAGS = {"phase_sign": +1, "mass_coeff": 1, "correction": "printed"}

VARIANTS = {
    "ledger": AUDIT_FLAGS,
    "printed": PRINTED_FLAGS,
    "ledger-printedcorr": {**AUDIT_FLAGS, "correction": "printed"},
}


def expand_coin(theta: float) -> np.ndarray:
    """Second-order expansion of the coin in ``theta = eps m``."""
    d = 1 - theta**2 / 2
    return np.array([[d, -1j * theta], [-1j * theta, d]])


@dataclass(frozen=True)
class ScalingFamily:
    """Fixed physical set-up refined along ``eps``.

    ``window`` is the physical half-length of the ``n_j`` window and
    ``taper_width`` the physical width of its Gaussian weight.  Residuals
    are sampled at ``n_samples`` equally spaced physical positions.
    """

    eps: tuple[float, ...] = (1 / 8, 1 / 16, 1 / 32, 1 / 64)
    m: float = 1.0
    L: float = 8.0
    t_f: float = 8.0
    k0: float = 1.0
    sigma_k: float = 1.0
    branch: int = 1
    window: float = 3.0
    taper_width: float = 0.4
    n_samples: int = 32

    def __post_init__(self):
        if len(self.eps) < 1:
            raise ValueError("need at least one eps")
        for e in self.eps:
            self.lattice(e)

    def lattice(self, eps: float) -> dict:
        N = int(round(self.L / eps))
        J = int(round(self.t_f / eps))
        theta = eps * self.m
        if abs(N * eps - self.L) > 1e-9 or N % 2 or N < 4:
            raise ValueError(f"L/eps = {self.L / eps} must be an even integer")
        if not abs(theta) < np.pi / 2:
            raise ValueError(f"theta = eps m = {theta} must stay below pi/2")
        j0 = J // 2
        M = int(round(self.window / eps))
        if j0 - M < 1 or j0 + M > J - 2:
            raise ValueError(f"window {self.window} too long for t_f = {self.t_f}")
        return {"N": N, "J": J, "theta": theta, "j0": j0, "M": M}


@dataclass
class Stencil:
    """Wigner data around ``(j0, sampled sites)`` for one family member."""

    eps: float
    m: float
    W: np.ndarray
    W_tplus: np.ndarray
    W_tminus: np.ndarray
    W_xplus: np.ndarray
    W_xminus: np.ndarray
    W_dtaper: np.ndarray
    Ms: np.ndarray
    kj: np.ndarray
    kp: np.ndarray
    info: dict = field(default_factory=dict)


def _weighted(corr, h, M):
    return wigner.transform(corr * h[:, None], M)


def build_stencil(history: walk.History, eps: float, m: float, j0: int, M: int,
                  taper_width: float, sites, chunk: int = 8) -> Stencil:
    psi = history.states
    N = history.N
    n = wigner.n_window(M)
    tau = n * eps
    h = np.exp(-(tau**2) / (2 * taper_width**2))
    dh = -tau / taper_width**2 * h
    d = walk.derivatives(history)
    ms_field = d["Djj"] - walk.spin(walk.coin(history.theta), d["Dpp"])
    parts = {k: [] for k in ("W", "tp", "tm", "xp", "xm", "dh", "Ms")}
    sites = np.asarray(sites)
    for start in range(0, sites.size, chunk):
        s = sites[start:start + chunk]
        om = wigner.correlate(psi, psi, j0, M, s)
        parts["W"].append(_weighted(om, h, M))
        parts["dh"].append(_weighted(om, dh, M))
        parts["tp"].append(_weighted(wigner.correlate(psi, psi, j0 + 1, M, s), h, M))
        parts["tm"].append(_weighted(wigner.correlate(psi, psi, j0 - 1, M, s), h, M))
        parts["xp"].append(_weighted(wigner.correlate(psi, psi, j0, M, (s + 1) % N), h, M))
        parts["xm"].append(_weighted(wigner.correlate(psi, psi, j0, M, (s - 1) % N), h, M))
        parts["Ms"].append(-2 * _weighted(wigner.correlate(psi, ms_field, j0, M, s), h, M))
    cat = {k: np.concatenate(v, axis=0) for k, v in parts.items()}
    grid_j = wigner.spectral.BrillouinGrid(2 * M + 1)
    grid_p = wigner.spectral.BrillouinGrid(N)
    return Stencil(eps, m, cat["W"], cat["tp"], cat["tm"], cat["xp"], cat["xm"],
                   cat["dh"], cat["Ms"], grid_j.k, grid_p.k,
                   {"taper_edge": float(h[0]), "N": N, "M": M, "j0": j0})


def support_mask(W: np.ndarray, rel: float = 1e-10) -> np.ndarray:
    a = np.abs(W)
    return a > rel * a.max()


def _rel(R, W, mask):
    den = np.linalg.norm(W[mask])
    return float(np.linalg.norm(R[mask]) / den) if den > 0 else 0.0


def operator_blocks(st: Stencil) -> dict[str, np.ndarray]:
    """Every block of the continuous operator, evaluated on the lattice data."""
    eps, m, W = st.eps, st.m, st.W
    dtW = (st.W_tplus - st.W_tminus) / (2 * eps)
    dxW = (st.W_xplus - st.W_xminus) / (2 * eps)
    kt = (st.kj / eps)[:, None]
    kx = (st.kp / eps)[None, :]
    return {
        "derivative": dtW - right_act(SIGMA3, dxW),
        # -i (k_t - k_x s3) W - W_{h'}
        "phase": -1j * (kt * W - kx * right_act(SIGMA3, W)) - st.W_dtaper,
        "mass": 1j * m * right_act(SIGMA1, W),
        "s2_shift": right_act(SIGMA2, dxW - 1j * kx * W),
    }


def correction(blocks: dict, st: Stencil, kind: str) -> np.ndarray:
    eps, m = st.eps, st.m
    if kind == "derived":
        return -eps * m * blocks["s2_shift"]
    if kind == "printed":
        return eps * (m * blocks["s2_shift"] - 2.5 * m**2 * st.W)
    if kind == "none":
        return np.zeros_like(st.W)
    raise ValueError(f"unknown correction {kind!r}")


def continuous_residual(st: Stencil, phase_sign: int = -1, mass_coeff: float = 2,
                        correction_kind: str = "none") -> float:
    """Relative L2 residual of the continuous transport operator on lattice data.

    ``(d_t - s3 d_x) W - phase_sign * Phase + mass_coeff * i m s1 W - corr``,
    normalised by ``|W|`` over the support ``|W| > 1e-10 max |W|``.
    """
    b = operator_blocks(st)
    lhs = b["derivative"] - phase_sign * b["phase"] + mass_coeff * b["mass"]
    R = lhs - correction(b, st, correction_kind)
    return _rel(R, st.W, support_mask(st.W))


def ms_reduction(st: Stencil) -> dict[str, float]:
    """Relative gap between ``Ms`` and its second-order reductions.

    ``printed``: ``-2 eps^2 m^2 W``; ``klein_gordon``: ``+eps^2 m^2 W``
    (from ``(d_t^2 - d_x^2) psi = -m^2 psi``).
    """
    mask = support_mask(st.W)
    e2m2 = (st.eps * st.m) ** 2
    return {
        "printed": _rel(st.Ms + 2 * e2m2 * st.W, st.W, mask),
        "klein_gordon": _rel(st.Ms - e2m2 * st.W, st.W, mask),
        "ms_size": _rel(st.Ms, st.W, mask),
    }


def coin_expansion_error(theta: float) -> float:
    return float(np.linalg.norm(walk.coin(theta) - expand_coin(theta), 2))


def run_member(family: ScalingFamily, eps: float) -> dict:
    """Evolve one lattice of the family and evaluate all residual variants."""
    lat = family.lattice(eps)
    N, J, theta, j0, M = lat["N"], lat["J"], lat["theta"], lat["j0"], lat["M"]
    psi0 = walk.gaussian_packet(N, family.k0 * eps, family.sigma_k * eps, theta,
                                family.branch, center=N / 2, require_tail_clean=False)
    hist = walk.evolve(psi0, theta, J, eps=eps, m=family.m)
    x = np.arange(family.n_samples) * family.L / family.n_samples
    sites = np.unique(np.round(x / eps).astype(int) % N)
    st = build_stencil(hist, eps, family.m, j0, M, family.taper_width, sites)
    rows = []
    for name, flags in VARIANTS.items():
        for with_corr in (False, True):
            r = continuous_residual(st, flags["phase_sign"], flags["mass_coeff"],
                                    flags["correction"] if with_corr else "none")
            rows.append({"eps": eps, "variant": name, "with_correction": int(with_corr),
                         "residual_norm": r})
    return {"eps": eps, "lattice": lat, "rows": rows, "ms": ms_reduction(st),
            "coin_error": coin_expansion_error(theta), "taper_edge": st.info["taper_edge"]}


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


def convergence_order(points) -> Fit:
    """Least-squares slope of ``log r`` against ``log eps``."""
    pts = list(points)
    if len(pts) < 4:
        raise ValueError(f"need at least 4 (eps, r) points, got {len(pts)}")
    e = np.array([p[0] for p in pts], dtype=float)
    r = np.array([p[1] for p in pts], dtype=float)
    if np.any(r <= 0) or np.any(e <= 0):
        raise ValueError("eps and residuals must be positive")
    x, y = np.log(e), np.log(r)
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = np.sum((y - fit) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return Fit(float(slope), float(intercept), float(r2))


def run_family(family: ScalingFamily, jobs: int = 1) -> dict:
    """Run every member; results are ordered by ``eps`` regardless of ``jobs``."""
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            members = list(pool.map(run_member, [family] * len(family.eps), family.eps))
    else:
        members = [run_member(family, e) for e in family.eps]
    rows = [r for mem in members for r in mem["rows"]]
    return {"members": members, "rows": rows}


def slope_table(result: dict) -> dict:
    """Fitted slopes per (variant, with_correction) and for the ``Ms`` reductions."""
    table = {}
    rows = result["rows"]
    keys = sorted({(r["variant"], r["with_correction"]) for r in rows})
    for variant, wc in keys:
        pts = [(r["eps"], r["residual_norm"]) for r in rows
               if r["variant"] == variant and r["with_correction"] == wc]
        try:
            fit = convergence_order(pts)
            table[f"{variant}:{wc}"] = fit.__dict__
        except ValueError as exc:
            table[f"{variant}:{wc}"] = {"error": str(exc)}
    for key in ("printed", "klein_gordon"):
        pts = [(mem["eps"], mem["ms"][key]) for mem in result["members"]]
        try:
            table[f"ms:{key}"] = convergence_order(pts).__dict__
        except ValueError as exc:
            table[f"ms:{key}"] = {"error": str(exc)}
    return table


def convergence_checks(table: dict, variant: str = "ledger") -> ResidualReport:
    """The three slope criteria, as a pass/fail report, for one flag set."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    rep = ResidualReport("convergence")
    rep.notes["variant"] = variant
    without = table.get(f"{variant}:0", {}).get("slope", np.nan)
    with_ = table.get(f"{variant}:1", {}).get("slope", np.nan)
    ms = table.get("ms:printed", {}).get("slope", np.nan)
    rep.notes["checks"] = {
        "slope_without_correction>=0.7": bool(without >= 0.7),
        "slope_gain_with_correction>=0.5": bool(with_ - without >= 0.5),
        "ms_printed_reduction_slope>=2.5": bool(ms >= 2.5),
    }
    rep.terms.update({"slope_without": without, "slope_with": with_, "ms_printed_slope": ms,
                      "ms_klein_gordon_slope": table.get("ms:klein_gordon", {}).get("slope", np.nan)})
    return rep
