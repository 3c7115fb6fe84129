"""Initial conditions for the benchmark experiments, and the mid-run echo
perturbation injection.

Physically the initial data is rank one or rank two; it is padded to the
requested rank with Fourier modes orthogonalized against the physical
factors, with zero rows/columns in the coupling matrix.  Every builder
represents its analytic f0 exactly (to rounding) in the low-rank format.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import FunctionFamily, Grid, fourier_modes, orthonormalize
from .splitting import LowRankState2D
from .tucker import HierarchicalState4D, TuckerFactor, core_gram_schmidt


@dataclass(frozen=True)
class Scenario:
    """A benchmark setup: domain, physical parameters, and the analytic
    reference quantities used for reporting."""

    name: str
    dims: int
    domain: tuple
    params: dict = field(default_factory=dict)
    rate_reference: float | None = None
    rate_window: tuple | None = None
    peak_windows: tuple = ()


SCENARIOS = {
    "landau_2d": Scenario(
        name="landau_2d",
        dims=2,
        domain=((0.0, 4 * np.pi), (-6.0, 6.0)),
        params={"alpha": 0.01, "k": 0.5},
        rate_reference=-0.153,
        rate_window=(0.0, 30.0),
    ),
    "twostream_2d": Scenario(
        name="twostream_2d",
        dims=2,
        domain=((0.0, 10 * np.pi), (-9.0, 9.0)),
        params={"alpha": 1e-3, "k": 0.2, "v0": 2.4},
        rate_window=(10.0, 35.0),
    ),
    "echo": Scenario(
        name="echo",
        dims=2,
        domain=((0.0, 100.0), (-8.0, 8.0)),
        params={"alpha": 1e-3, "k1": 12 * np.pi / 100},
        peak_windows=((250.0, 600.0), (600.0, 900.0)),
    ),
    "landau_4d": Scenario(
        name="landau_4d",
        dims=4,
        domain=((0.0, 4 * np.pi), (0.0, 4 * np.pi), (-6.0, 6.0), (-6.0, 6.0)),
        params={"alpha": 0.01, "k1": 0.5, "k2": 0.5},
        rate_reference=-0.153,
        rate_window=(0.0, 10.0),
    ),
    "landau_4d_nonaligned": Scenario(
        name="landau_4d_nonaligned",
        dims=4,
        domain=((0.0, 5 * np.pi), (0.0, 5 * np.pi), (-6.0, 6.0), (-6.0, 6.0)),
        params={"alpha": 0.01, "k1": 0.4, "k2": 0.4},
    ),
    "twostream_4d": Scenario(
        name="twostream_4d",
        dims=4,
        domain=((0.0, 10 * np.pi), (0.0, 10 * np.pi), (-9.0, 9.0), (-9.0, 9.0)),
        params={"alpha": 1e-3, "k1": 0.2, "k2": 0.2, "v0": 2.4},
    ),
}


def _check_wavenumber(k: float, grid: Grid, name: str = "k"):
    cycles = k * grid.length / (2 * np.pi)
    if abs(cycles - round(cycles)) > 1e-9 or k <= 0:
        raise ValueError(
            f"wavenumber {name}={k} does not fit the domain length {grid.length} "
            "(k*L must be a positive multiple of 2*pi)"
        )


def _padded_family(rows, grid: Grid, r: int) -> tuple[FunctionFamily, np.ndarray]:
    """Stack the physical rows, pad with Fourier modes to r members, and
    orthonormalize.  Returns (family, R) with raw_row_a = sum_s family_s R[s, a]."""
    if len(rows) > r:
        raise ValueError(f"rank {r} too small for {len(rows)} physical factors")
    modes = fourier_modes(grid)
    stacked = list(rows) + [next(modes) for _ in range(r - len(rows))]
    return orthonormalize(FunctionFamily(grid, np.array(stacked)))


def _rank_one_state(xrow, vrow, gx: Grid, gv: Grid, r: int, weight: float) -> LowRankState2D:
    X, RX = _padded_family([xrow], gx, r)
    V, RV = _padded_family([vrow], gv, r)
    S = weight * np.outer(RX[:, 0], RV[:, 0])
    return LowRankState2D(X, S, V, 0.0)


def init_landau_2d(alpha: float, k: float, grids, r: int) -> LowRankState2D:
    """Weak Landau damping: f0 = (1/sqrt(2 pi)) exp(-v^2/2) (1 + alpha cos(k x))."""
    gx, gv = grids
    _check_wavenumber(k, gx)
    xrow = 1.0 + alpha * np.cos(k * gx.points)
    vrow = np.exp(-gv.points**2 / 2) / np.sqrt(2 * np.pi)
    return _rank_one_state(xrow, vrow, gx, gv, r, 1.0)


def init_twostream_2d(alpha: float, k: float, v0: float, grids, r: int) -> LowRankState2D:
    """Two-stream instability: two counter-propagating beams at +-v0 with a
    small spatial perturbation."""
    gx, gv = grids
    _check_wavenumber(k, gx)
    xrow = 1.0 + alpha * np.cos(k * gx.points)
    v = gv.points
    vrow = (np.exp(-((v - v0) ** 2) / 2) + np.exp(-((v + v0) ** 2) / 2)) / (2 * np.sqrt(2 * np.pi))
    return _rank_one_state(xrow, vrow, gx, gv, r, 1.0)


def init_echo(alpha: float, k1: float, grids, r: int) -> LowRankState2D:
    """Plasma echo base state: f0 = (1/(2 pi)) exp(-v^2/2) (1 + alpha cos(k1 x)).

    A second perturbation is added mid-run via inject_echo_perturbation."""
    gx, gv = grids
    _check_wavenumber(k1, gx)
    xrow = 1.0 + alpha * np.cos(k1 * gx.points)
    vrow = np.exp(-gv.points**2 / 2) / (2 * np.pi)
    return _rank_one_state(xrow, vrow, gx, gv, r, 1.0)


def _append_direction(values, row, grid: Grid):
    """Coordinates of `row` in the span of the orthonormal rows `values`,
    plus the normalized out-of-span component (or a Fourier complement when
    the row is already in the span, with zero coefficient)."""
    coords = np.zeros(values.shape[0])
    resid = row.astype(float).copy()
    for _ in range(2):
        c = grid.h * (values @ resid)
        coords += c
        resid -= c @ values
    norm = float(np.sqrt(grid.h * (resid @ resid)))
    scale = float(np.sqrt(grid.h * (row @ row)))
    if norm <= 1e-14 * max(scale, 1.0):
        for cand in fourier_modes(grid):
            w = cand.copy()
            for _ in range(2):
                w -= (grid.h * (values @ w)) @ values
            n = float(np.sqrt(grid.h * (w @ w)))
            if n > 0.5:
                return coords, 0.0, w / n
    return coords, norm, resid / norm


def inject_echo_perturbation(state: LowRankState2D, alpha: float, k2: float):
    """Add the second echo perturbation (alpha/(2 pi)) exp(-v^2/2) cos(k2 x)
    to a running state.

    The rank-1 perturbation is appended to the factorization (rank r+1) and
    the expanded coupling matrix is re-compressed to rank r by SVD, keeping
    the r largest singular values.  Returns (new_state, remainder) where
    remainder is the L2 norm of the truncated component."""
    gx, gv = state.X.grid, state.V.grid
    _check_wavenumber(k2, gx, name="k2")
    r = state.rank
    c = alpha / (2 * np.pi)

    u, cx, phi = _append_direction(state.X.values, np.cos(k2 * gx.points), gx)
    w, cv, psi = _append_direction(state.V.values, np.exp(-gv.points**2 / 2), gv)

    S = np.zeros((r + 1, r + 1))
    S[:r, :r] = state.S + c * np.outer(u, w)
    S[:r, r] = c * cv * u
    S[r, :r] = c * cx * w
    S[r, r] = c * cx * cv

    U, sv, Wt = np.linalg.svd(S)
    Xv = np.vstack([state.X.values, phi])
    Vv = np.vstack([state.V.values, psi])
    Xnew = FunctionFamily(gx, U[:, :r].T @ Xv)
    Vnew = FunctionFamily(gv, Wt[:r, :] @ Vv)
    new = LowRankState2D(Xnew, np.diag(sv[:r]), Vnew, state.t)
    return new, float(sv[r])


# ---------------------------------------------------------------------------
# Hierarchical (2x2v) builders


def _tucker_side(rows1, rows2, phys_core, g1: Grid, g2: Grid, r: int, r1: int, r2: int):
    """Exact Tucker factorization of sum_p phys_core[p,a,b] rows1_a rows2_b,
    padded to (r, r1, r2).  Returns (TuckerFactor, side_matrix) with
    physical_member_p = sum_i factor_i side_matrix[i, p]."""
    p, n1, n2 = np.asarray(phys_core).shape
    if p > r or n1 > r1 or n2 > r2:
        raise ValueError(
            f"ranks ({r},{r1},{r2}) too small for initial data of exact ranks ({p},{n1},{n2})"
        )
    f1, R1 = _padded_family(rows1, g1, r1)
    f2, R2 = _padded_family(rows2, g2, r2)
    core = np.zeros((r, r1, r2))
    for i in range(p):
        core[i] = R1[:, :n1] @ phys_core[i] @ R2[:, :n2].T
    return (*_make_factor(core, f1, f2),)


def _make_factor(core, f1, f2):
    core, side = core_gram_schmidt(core)
    return TuckerFactor(core, f1, f2), side


def _hier_state(xside, vside, weights) -> HierarchicalState4D:
    xfac, SX = xside
    vfac, SV = vside
    A = np.zeros((xfac.count, vfac.count))
    A[: weights.shape[0], : weights.shape[1]] = weights
    return HierarchicalState4D(SX @ A @ SV.T, xfac, vfac, 0.0)


def init_landau_4d(alpha: float, k1: float, k2: float, grids, ranks) -> HierarchicalState4D:
    """Aligned 4D Landau damping:
    f0 = (1/(2 pi)) exp(-(v1^2+v2^2)/2) (1 + alpha cos(k1 x1) + alpha cos(k2 x2))."""
    gx1, gx2, gv1, gv2 = grids
    r, rx, rv = ranks
    _check_wavenumber(k1, gx1, "k1")
    _check_wavenumber(k2, gx2, "k2")
    xcore = np.array([[[1.0, alpha], [alpha, 0.0]]])
    xside = _tucker_side(
        [np.ones(gx1.n), np.cos(k1 * gx1.points)],
        [np.ones(gx2.n), np.cos(k2 * gx2.points)],
        xcore,
        gx1, gx2, r, rx, rx,
    )
    vside = _tucker_side(
        [np.exp(-gv1.points**2 / 2)],
        [np.exp(-gv2.points**2 / 2)],
        np.array([[[1.0 / (2 * np.pi)]]]),
        gv1, gv2, r, rv, rv,
    )
    return _hier_state(xside, vside, np.array([[1.0]]))


def init_landau_4d_nonaligned(alpha: float, k1: float, k2: float, grids, ranks) -> HierarchicalState4D:
    """Non-aligned 4D Landau damping:
    f0 = (1/(2 pi)) exp(-(v1^2+v2^2)/2) (1 + alpha cos(k1 x1) cos(k2 x2))."""
    gx1, gx2, gv1, gv2 = grids
    r, rx, rv = ranks
    _check_wavenumber(k1, gx1, "k1")
    _check_wavenumber(k2, gx2, "k2")
    xcore = np.array([[[1.0, 0.0], [0.0, alpha]]])
    xside = _tucker_side(
        [np.ones(gx1.n), np.cos(k1 * gx1.points)],
        [np.ones(gx2.n), np.cos(k2 * gx2.points)],
        xcore,
        gx1, gx2, r, rx, rx,
    )
    vside = _tucker_side(
        [np.exp(-gv1.points**2 / 2)],
        [np.exp(-gv2.points**2 / 2)],
        np.array([[[1.0 / (2 * np.pi)]]]),
        gv1, gv2, r, rv, rv,
    )
    return _hier_state(xside, vside, np.array([[1.0]]))


def init_twostream_4d(alpha: float, k1: float, k2: float, v0: float, grids, ranks) -> HierarchicalState4D:
    """4D two-stream instability: four propagating beams at (+-v0, +-v0) with
    small perturbations in both spatial directions."""
    gx1, gx2, gv1, gv2 = grids
    r, rx, rv = ranks
    _check_wavenumber(k1, gx1, "k1")
    _check_wavenumber(k2, gx2, "k2")
    xcore = np.array([[[1.0, alpha], [alpha, 0.0]]])
    xside = _tucker_side(
        [np.ones(gx1.n), np.cos(k1 * gx1.points)],
        [np.ones(gx2.n), np.cos(k2 * gx2.points)],
        xcore,
        gx1, gx2, r, rx, rx,
    )

    def beams(g):
        v = g.points
        return np.exp(-((v - v0) ** 2) / 2) + np.exp(-((v + v0) ** 2) / 2)

    vside = _tucker_side(
        [beams(gv1)],
        [beams(gv2)],
        np.array([[[1.0 / (8 * np.pi)]]]),
        gv1, gv2, r, rv, rv,
    )
    return _hier_state(xside, vside, np.array([[1.0]]))


def build_initial_state(name: str, grids, ranks):
    """Dispatch a scenario name to its builder.  `ranks` is r for 2D
    scenarios and (r, r_x, r_v) for hierarchical ones."""
    sc = SCENARIOS[name]
    p = sc.params
    if name == "landau_2d":
        return init_landau_2d(p["alpha"], p["k"], grids, ranks)
    if name == "twostream_2d":
        return init_twostream_2d(p["alpha"], p["k"], p["v0"], grids, ranks)
    if name == "echo":
        return init_echo(p["alpha"], p["k1"], grids, ranks)
    if name == "landau_4d":
        return init_landau_4d(p["alpha"], p["k1"], p["k2"], grids, ranks)
    if name == "landau_4d_nonaligned":
        return init_landau_4d_nonaligned(p["alpha"], p["k1"], p["k2"], grids, ranks)
    if name == "twostream_4d":
        return init_twostream_4d(p["alpha"], p["k1"], p["k2"], p["v0"], grids, ranks)
    raise KeyError(f"unknown scenario {name!r}")
