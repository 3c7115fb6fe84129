"""Conserved-quantity diagnostics, drift tracking, and rate fitting.

All observables are contracted through the low-rank factors (never a dense
phase-space grid): mass and energies reduce to quadrature vectors against
the 1D families, and the L2 norm of f equals the Frobenius norm of the
coupling matrix because the factors are orthonormal.
"""

from dataclasses import dataclass, replace

import numpy as np

from .splitting import LowRankState2D, default_field_provider
from .tucker import HierarchicalState4D, hierarchical_field


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Observables of one state, plus drifts relative to a reference."""

    t: float
    mass: float
    electric_energy: float
    kinetic_energy: float
    total_energy: float
    l2_norm: float
    mass_rel_err: float | None = None
    energy_rel_err: float | None = None
    l2_rel_err: float | None = None


def _diagnostics_2d(state: LowRankState2D) -> DiagnosticsRecord:
    gx, gv = state.X.grid, state.V.grid
    ux = gx.h * state.X.values.sum(axis=1)
    wv = gv.h * state.V.values.sum(axis=1)
    w2 = gv.h * (state.V.values * gv.points**2).sum(axis=1)
    mass = float(ux @ state.S @ wv)
    kinetic = 0.5 * float(ux @ state.S @ w2)
    E = default_field_provider(state.K(), state.V)
    ee = E.electric_energy()
    return DiagnosticsRecord(
        t=state.t,
        mass=mass,
        electric_energy=ee,
        kinetic_energy=kinetic,
        total_energy=kinetic + ee,
        l2_norm=float(np.linalg.norm(state.S)),
    )


def _diagnostics_4d(state: HierarchicalState4D) -> DiagnosticsRecord:
    ux = state.xfac.integrals()
    vfac = state.vfac
    w1 = vfac.f1.grid.h * vfac.f1.values.sum(axis=1)
    w2 = vfac.f2.grid.h * vfac.f2.values.sum(axis=1)
    q1 = vfac.f1.grid.h * (vfac.f1.values * vfac.f1.grid.points**2).sum(axis=1)
    q2 = vfac.f2.grid.h * (vfac.f2.values * vfac.f2.grid.points**2).sum(axis=1)
    wv = np.einsum("jab,a,b->j", vfac.core, w1, w2)
    wsq = np.einsum("jab,a,b->j", vfac.core, q1, w2) + np.einsum("jab,a,b->j", vfac.core, w1, q2)
    mass = float(ux @ state.S @ wv)
    kinetic = 0.5 * float(ux @ state.S @ wsq)
    ee = hierarchical_field(state).electric_energy()
    return DiagnosticsRecord(
        t=state.t,
        mass=mass,
        electric_energy=ee,
        kinetic_energy=kinetic,
        total_energy=kinetic + ee,
        l2_norm=float(np.linalg.norm(state.S)),
    )


def diagnostics(state) -> DiagnosticsRecord:
    """Mass, electric/kinetic/total energy, and L2 norm of a state."""
    if isinstance(state, LowRankState2D):
        return _diagnostics_2d(state)
    if isinstance(state, HierarchicalState4D):
        return _diagnostics_4d(state)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _rel(value: float, reference: float) -> float:
    scale = abs(reference)
    return abs(value - reference) / scale if scale > 0 else abs(value - reference)


class ConservationTracker:
    """Relative drifts of mass, total energy, and L2 norm against a
    reference record (t=0, or the last reset)."""

    def __init__(self, reference: DiagnosticsRecord):
        self.reference = reference

    def reset(self, reference: DiagnosticsRecord):
        self.reference = reference

    def annotate(self, record: DiagnosticsRecord) -> DiagnosticsRecord:
        ref = self.reference
        return replace(
            record,
            mass_rel_err=_rel(record.mass, ref.mass),
            energy_rel_err=_rel(record.total_energy, ref.total_energy),
            l2_rel_err=_rel(record.l2_norm, ref.l2_norm),
        )


class InsufficientDataError(Exception):
    """Raised when a rate fit has fewer than 3 energy maxima to work with."""


def fit_rate(t, electric_energy, window) -> float:
    """Field-amplitude decay/growth rate from an electric-energy series.

    Least-squares slope of log(local maxima of the energy) over the window,
    halved: the energy envelope moves at twice the field rate."""
    t = np.asarray(t, dtype=float)
    e = np.asarray(electric_energy, dtype=float)
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    tw, ew = t[mask], e[mask]
    if ew.size and ew.min() <= 0:
        raise ValueError("electric energy must be positive inside the fit window")
    keep = [i for i in range(1, ew.size - 1) if ew[i - 1] <= ew[i] >= ew[i + 1]]
    if len(keep) < 3:
        raise InsufficientDataError(
            f"found {len(keep)} energy maxima in window {window}; need at least 3"
        )
    slope = np.polyfit(tw[keep], np.log(ew[keep]), 1)[0]
    return float(slope) / 2.0


def peak_time(t, electric_energy, window) -> float:
    """Time of the largest electric energy inside the window."""
    t = np.asarray(t, dtype=float)
    e = np.asarray(electric_energy, dtype=float)
    mask = (t >= window[0]) & (t <= window[1])
    if not mask.any():
        raise InsufficientDataError(f"no samples in window {window}")
    idx = np.argmax(e[mask])
    return float(t[mask][idx])
