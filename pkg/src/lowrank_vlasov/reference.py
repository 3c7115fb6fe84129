"""Dense full-grid reference solver (1x1v), used as a test oracle.

Classical Strang split-step spectral scheme on the (x, v) tensor grid:
half-step x-advection, full-step v-advection with the field frozen at the
half-time density, half-step x-advection.  Exact on each sub-flow (pure
shifts in Fourier space), second order overall.
"""

import numpy as np

from .field import ChargeDensity, ElectricField, solve_poisson
from .grid import Grid


class EulerianSolver2D:
    """Dense spectral Vlasov-Poisson solver on an (n_x, n_v) grid.

    `f` holds point values f[i, j] = f(x_i, v_j).  Set self_consistent=False
    to force E = 0 (free streaming), which has the analytic solution
    f(t, x, v) = f0(x - v t, v)."""

    def __init__(self, xgrid: Grid, vgrid: Grid, f0, self_consistent: bool = True):
        self.xgrid = xgrid
        self.vgrid = vgrid
        self.f = np.array(f0, dtype=float)
        if self.f.shape != (xgrid.n, vgrid.n):
            raise ValueError("initial table shape does not match the grids")
        self.self_consistent = self_consistent
        self.t = 0.0

    def density(self) -> ChargeDensity:
        rho = -self.vgrid.h * self.f.sum(axis=1)
        return ChargeDensity((self.xgrid,), rho)

    def field(self) -> ElectricField:
        if not self.self_consistent:
            return ElectricField((self.xgrid,), (np.zeros(self.xgrid.n),))
        return solve_poisson(self.density())

    def electric_energy(self) -> float:
        return self.field().electric_energy()

    def mass(self) -> float:
        return float(self.xgrid.h * self.vgrid.h * self.f.sum())

    def l2_norm(self) -> float:
        return float(np.sqrt(self.xgrid.h * self.vgrid.h * (self.f**2).sum()))

    def _shift_x(self, tau: float):
        k = self.xgrid.rfft_wavenumbers[:, None]
        v = self.vgrid.points[None, :]
        fhat = np.fft.rfft(self.f, axis=0)
        fhat *= np.exp(-1j * k * v * tau)
        self.f = np.fft.irfft(fhat, n=self.xgrid.n, axis=0)

    def _shift_v(self, tau: float, E: np.ndarray):
        k = self.vgrid.rfft_wavenumbers[None, :]
        fhat = np.fft.rfft(self.f, axis=1)
        fhat *= np.exp(1j * k * E[:, None] * tau)
        self.f = np.fft.irfft(fhat, n=self.vgrid.n, axis=1)

    def step(self, tau: float):
        """One Strang step: x half, v full (frozen field), x half."""
        self._shift_x(tau / 2)
        E = self.field().components[0]
        self._shift_v(tau, E)
        self._shift_x(tau / 2)
        self.t += tau
        return self

    def run(self, T: float, tau: float):
        n = int(round(T / tau))
        for _ in range(n):
            self.step(tau)
        return self
