"""Charge density and the periodic Poisson solve for the electric field.

The field is obtained spectrally from -laplace(phi) = rho + 1, E = -grad phi,
using the same Nyquist-zeroed derivative symbol as spectral_derivative, so
the discrete Gauss law holds exactly on every mode the derivative can see.
"""

import warnings

import numpy as np

from .grid import FunctionFamily, Grid, gram


class ChargeDensity:
    """Charge density on the spatial grid(s).

    values is a length-n vector (one spatial dimension) or an n1 x n2 table.
    """

    def __init__(self, grids, values):
        self.grids = tuple(grids)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != tuple(g.n for g in self.grids):
            raise ValueError("charge density shape does not match grids")


class ElectricField:
    """Electric field components on the spatial grid(s).

    components holds one length-n vector (1D) or two n1 x n2 tables (2D).
    For 2D fields a separable form may be attached: lowrank[m] is a pair of
    sample stacks (A, B) with E_m(x1, x2) = sum_mu A[mu](x1) * B[mu](x2).
    """

    def __init__(self, grids, components, lowrank=None):
        self.grids = tuple(grids)
        self.components = tuple(np.asarray(c, dtype=float) for c in components)
        self.lowrank = lowrank

    def electric_energy(self) -> float:
        """(1/2) integral of |E|^2 over the spatial domain."""
        w = np.prod([g.h for g in self.grids])
        return 0.5 * w * float(sum(np.sum(c**2) for c in self.components))


def charge_density_2d(K: FunctionFamily, V: FunctionFamily) -> ChargeDensity:
    """rho(x) = -sum_j K_j(x) * integral(V_j) for the 1x1v low-rank state."""
    if K.count != V.count:
        raise ValueError("K and V must have the same number of members")
    weights = V.grid.h * V.values.sum(axis=1)
    return ChargeDensity((K.grid,), -(weights @ K.values))


def _check_neutrality(rho1_flat):
    mean = float(np.mean(rho1_flat))
    rms = float(np.sqrt(np.mean(rho1_flat**2)))
    if abs(mean) > 1e-8 * rms:
        # fixed message text: the warnings registry then deduplicates the
        # (benign, recurring) diagnostic to one line per call site
        warnings.warn(
            "plasma is not neutral; zeroing the mean field mode",
            RuntimeWarning,
            stacklevel=3,
        )


def solve_poisson(rho: ChargeDensity) -> ElectricField:
    """Solve -laplace(phi) = rho + 1 with periodic BC and return E = -grad phi.

    The mean mode of E is zeroed unconditionally; a non-neutral density (mean
    of rho+1 beyond 1e-8 relative) triggers a warning.
    """
    rho1 = rho.values + 1.0
    _check_neutrality(rho1.ravel())
    if len(rho.grids) == 1:
        (grid,) = rho.grids
        k = grid.rfft_wavenumbers
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(k != 0.0, 1.0 / np.where(k != 0.0, k, 1.0), 0.0)
        ehat = -1j * inv * np.fft.rfft(rho1)
        return ElectricField(rho.grids, (np.fft.irfft(ehat, n=grid.n),))
    g1, g2 = rho.grids
    k1 = _deriv_wavenumbers(g1)[:, None]
    k2 = _deriv_wavenumbers(g2)[None, :]
    ksq = k1**2 + k2**2
    rhat = np.fft.fft2(rho1)
    with np.errstate(divide="ignore", invalid="ignore"):
        phihat = np.where(ksq > 0.0, rhat / np.where(ksq > 0.0, ksq, 1.0), 0.0)
    e1 = np.fft.ifft2(-1j * k1 * phihat).real
    e2 = np.fft.ifft2(-1j * k2 * phihat).real
    return ElectricField(rho.grids, (e1, e2))


def _deriv_wavenumbers(grid: Grid):
    k = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    if grid.n % 2 == 0:
        k[grid.n // 2] = 0.0
    return k


def lowrank_field(E: ElectricField, r_E: int | None = None, tol: float | None = None) -> ElectricField:
    """Attach a separable low-rank form to a 2D field via per-component SVD.

    Exactly one of r_E (fixed rank) or tol (Frobenius truncation tolerance)
    may be given; the default is tol=1e-12 capped at rank 16.  At least one
    pair is always kept.
    """
    if len(E.grids) != 2:
        raise ValueError("low-rank form only applies to 2D fields")
    cap = None
    if r_E is None and tol is None:
        tol, cap = 1e-12, 16
    lowrank = []
    for comp in E.components:
        u, s, vt = np.linalg.svd(comp, full_matrices=False)
        if r_E is not None:
            q = min(r_E, s.size)
        else:
            tails = np.sqrt(np.cumsum(s[::-1] ** 2))[::-1]  # tails[q] = ||s[q:]||
            keep = np.nonzero(tails > tol)[0]
            q = keep[-1] + 1 if keep.size else 1
            if cap is not None:
                q = min(q, cap)
        q = max(q, 1)
        lowrank.append(((u[:, :q] * s[:q]).T.copy(), vt[:q].copy()))
    return ElectricField(E.grids, E.components, lowrank=lowrank)
