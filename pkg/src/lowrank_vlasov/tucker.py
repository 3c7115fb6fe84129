"""Hierarchical low-rank integrator for the 2x2v Vlasov-Poisson system.

The phase-space density keeps the outer form f = sum_ij X_i(x) S_ij V_j(v)
of the 1x1v solver, but X and V are themselves stored as Tucker factors
over 1D families:

    X_i(x1, x2) = sum_ab  C_{iab} X1_a(x1) X2_b(x2)      (core C, families X1, X2)
    V_j(v1, v2) = sum_ab  D_{jab} V1_a(v1) V2_b(v2)      (core D, families V1, V2)

A time step never touches a 2D grid except for the Poisson solve: the x- and
v-updates are direction sweeps that solve systems of 1D advection equations
for the first family (M flow), a small matrix ODE (R flow), the same pair
for the second family (N flow, R flow), and a core tensor ODE (C flow),
followed by a Gram-Schmidt pass on the core that restores the outer
factor/S split.  Both sweeps share one driver for the generic equation

    dK_j/dt = -sum_l c1_jl . grad K_l  -  sum_l c2_jl . F K_l ,

instantiated with (c1, c2, F) = (c1, c2, -E) for the x-update and
(-d1[E], d2, v) for the v-update.

The electric field enters only through separable (rank-r_E) forms, so every
coefficient assembly reduces to 1D integrals; the quartic tensors B/G/e are
contracted right-to-left so no intermediate exceeds O(R^5) work.

The 1D sub-flows have the same transport-plus-pointwise-rotation structure
as the 1x1v K and L equations (the zero-order coefficient matrices are
antisymmetric at every grid point), and are solved the same way: exact
spectral transport in the eigenbasis of the symmetric first-order
coefficient, composed by Strang splitting with exact pointwise orthogonal
rotations.  The matrix/tensor ODEs use the same sub-stepped classical RK4
as the 1x1v S equation.
"""

from dataclasses import dataclass

import numpy as np

from .field import ElectricField, ChargeDensity, solve_poisson, lowrank_field
from .grid import FunctionFamily, Grid, gram, orthonormalize, spectral_derivative
from .splitting import S_step, advect_transport


class TuckerFactor:
    """A family of 2D functions in Tucker form: member_i = sum_ab core[i,a,b] f1_a f2_b."""

    def __init__(self, core, f1: FunctionFamily, f2: FunctionFamily):
        core = np.asarray(core, dtype=float)
        if core.ndim != 3 or core.shape[1] != f1.count or core.shape[2] != f2.count:
            raise ValueError("core shape does not match factor families")
        self.core = core
        self.f1 = f1
        self.f2 = f2

    @property
    def count(self) -> int:
        return self.core.shape[0]

    @property
    def ranks(self):
        return self.core.shape

    def member_values(self):
        """Dense samples of every member on the full 2D grid (tests and
        field assembly only; O(count * n1 * n2) memory)."""
        return np.einsum("iab,an,bm->inm", self.core, self.f1.values, self.f2.values)

    def integrals(self):
        """Vector of member integrals over the 2D domain."""
        w1 = self.f1.grid.h * self.f1.values.sum(axis=1)
        w2 = self.f2.grid.h * self.f2.values.sum(axis=1)
        return np.einsum("iab,a,b->i", self.core, w1, w2)

    def copy(self) -> "TuckerFactor":
        return TuckerFactor(self.core.copy(), self.f1.copy(), self.f2.copy())


class HierarchicalState4D:
    """2x2v low-rank state: f = sum_ij X_i S_ij V_j with Tucker-form X and V."""

    def __init__(self, S, xfac: TuckerFactor, vfac: TuckerFactor, t: float = 0.0):
        S = np.asarray(S, dtype=float)
        if S.shape != (xfac.count, vfac.count):
            raise ValueError("S shape does not match factor counts")
        self.S = S
        self.xfac = xfac
        self.vfac = vfac
        self.t = t

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    def evaluate_at(self, i1, i2, j1, j2):
        """f at grid points selected by index arrays (one per direction)."""
        X = np.einsum(
            "iab,an,bn->in", self.xfac.core, self.xfac.f1.values[:, i1], self.xfac.f2.values[:, i2]
        )
        V = np.einsum(
            "jcd,cn,dn->jn", self.vfac.core, self.vfac.f1.values[:, j1], self.vfac.f2.values[:, j2]
        )
        return np.einsum("in,ij,jn->n", X, self.S, V)

    def reconstruct(self):
        """Dense (n_x1, n_x2, n_v1, n_v2) table of f; small tests only."""
        X = self.xfac.member_values()
        V = self.vfac.member_values()
        return np.einsum("inm,ij,jpq->nmpq", X, self.S, V)

    def copy(self) -> "HierarchicalState4D":
        return HierarchicalState4D(self.S.copy(), self.xfac.copy(), self.vfac.copy(), self.t)


# ---------------------------------------------------------------------------
# QR plumbing on cores


def _mgs_columns(A):
    """Modified Gram-Schmidt on the columns of A (plain dot product), with
    one re-orthogonalization pass and deterministic completion of
    rank-deficient columns by canonical basis vectors; R diagonal >= 0,
    A[:, j] = sum_i Q[:, i] R[i, j]."""
    m, k = A.shape
    Q = np.zeros((m, k))
    R = np.zeros((k, k))
    largest = 0.0
    cand = 0
    for j in range(k):
        w = A[:, j].astype(float).copy()
        for _ in range(2):
            for i in range(j):
                c = float(Q[:, i] @ w)
                R[i, j] += c
                w -= c * Q[:, i]
        nrm = float(np.linalg.norm(w))
        largest = max(largest, nrm)
        if largest == 0.0 or nrm <= 1e-14 * largest:
            while True:
                w = np.zeros(m)
                w[cand % m] = 1.0
                cand += 1
                for _ in range(2):
                    for i in range(j):
                        w -= (Q[:, i] @ w) * Q[:, i]
                nrm = float(np.linalg.norm(w))
                if nrm > 0.5:
                    break
            Q[:, j] = w / nrm
            R[j, j] = 0.0
        else:
            Q[:, j] = w / nrm
            R[j, j] = nrm
    return Q, R


@dataclass
class UnfoldQR:
    """QR of a core unfolded along one factor mode.

    Q keeps the core's index layout with the isolated mode replaced by the
    orthonormal connecting index; core = contract(Q, R) along that mode.  W
    optionally holds the contraction of Q with the counterpart 1D family.
    """

    Q: np.ndarray
    R: np.ndarray
    mode: int
    W: np.ndarray | None = None


def unfold_qr(core, mode: int, family: FunctionFamily | None = None) -> UnfoldQR:
    """Matricize `core` with index `mode` isolated as columns, QR-factor, and
    fold the orthonormal columns back into a tensor.

    core[..., a_mode, ...] = sum_q Q[..., q_mode, ...] R[q, a].  When the
    counterpart `family` is given (the 1D family attached to the *other*
    factor mode), W[j, q] = sum_b Q[j, q-at-mode, b] family_b is returned as
    sample rows W[j, q, :].
    """
    core = np.asarray(core, dtype=float)
    mat = np.moveaxis(core, mode, -1).reshape(-1, core.shape[mode])
    Qm, R = _mgs_columns(mat)
    shape = list(core.shape)
    shape[mode] = Qm.shape[1]
    Q = np.moveaxis(Qm.reshape([s for i, s in enumerate(shape) if i != mode] + [shape[mode]]), -1, mode)
    W = None
    if family is not None:
        if mode == 1:
            W = np.einsum("jqb,bn->jqn", Q, family.values)
        elif mode == 2:
            W = np.einsum("jaq,an->jqn", Q, family.values)
        else:
            raise ValueError("W contraction defined for factor modes 1 and 2 only")
    return UnfoldQR(Q=Q, R=R, mode=mode, W=W)


def core_gram_schmidt(core):
    """Orthonormalize the leading-index slices of a core under the Frobenius
    pairing: returns (core', S) with S upper triangular, S diagonal >= 0,
    core_j = sum_i core'_i S[i, j], and <core'_i, core'_k> = delta_ik.
    Zero-norm slices are completed with a deterministic orthonormal
    complement and get S diagonal 0."""
    core = np.asarray(core, dtype=float)
    r = core.shape[0]
    Qm, S = _mgs_columns(core.reshape(r, -1).T)
    return Qm.T.reshape(core.shape), S


# ---------------------------------------------------------------------------
# Separable fields and coefficient assemblies

# A separable field is a list over spatial directions m of pairs (F1, F2)
# of sample stacks: F_m(y1, y2) = sum_mu F1[mu](y1) * F2[mu](y2).


def field_as_separable(E: ElectricField, negate: bool = False):
    """Separable per-component form of a 2D field (requires attached
    low-rank data; see lowrank_field)."""
    if E.lowrank is None:
        raise ValueError("field carries no separable form; apply lowrank_field first")
    sign = -1.0 if negate else 1.0
    return [(sign * A, B) for (A, B) in E.lowrank]


def velocity_separable(g1: Grid, g2: Grid):
    """The identity field F_m(v) = v_m in separable form."""
    one1 = np.ones((1, g1.n))
    one2 = np.ones((1, g2.n))
    return [
        (g1.points[None, :].copy(), one2),
        (one1, g2.points[None, :].copy()),
    ]


def _pairing(fam_values, weights_grid: Grid, profile, other_values):
    """Matrix of <f_a, profile * g_c> 1D inner products."""
    return weights_grid.h * np.einsum("an,n,cn->ac", fam_values, profile, other_values)


def step1_coefficients(c1pair, c2pair, Q, W, f2: FunctionFamily, F):
    """a1 (transport), a2 and a3(x1) (rotation) for the M flow of step 1."""
    a1 = np.einsum("ik,iqb,kpb->qp", c1pair[0], Q, Q)
    dgram2 = gram(f2.values, spectral_derivative(f2.values, f2.grid), f2.grid)
    a2 = np.einsum("ik,iqb,kpd,bd->qp", c1pair[1], Q, Q, dgram2, optimize=True)
    q = Q.shape[1]
    n1 = F[0][0].shape[1]
    a3 = np.zeros((n1, q, q))
    h2 = f2.grid.h
    for m, (F1, F2) in enumerate(F):
        for mu in range(F1.shape[0]):
            T = h2 * np.einsum("ik,iqn,n,kpn->qp", c2pair[m], W, F2[mu], W, optimize=True)
            a3 += F1[mu][:, None, None] * T[None, :, :]
    return a1, a2, a3


def assemble_B(c2pair, W, f2: FunctionFamily, f1new: FunctionFamily, F):
    """The quartic coupling B[s,q,s',q'] of the first R flow, contracted
    right-to-left through the separable field so the work stays O(R^5)."""
    s = f1new.count
    q = W.shape[1]
    B = np.zeros((s, q, s, q))
    h2 = f2.grid.h
    for m, (F1, F2) in enumerate(F):
        for mu in range(F1.shape[0]):
            P = _pairing(f1new.values, f1new.grid, F1[mu], f1new.values)
            Z = h2 * np.einsum("ik,iqn,n,kpn->qp", c2pair[m], W, F2[mu], W, optimize=True)
            B += np.einsum("ac,qp->aqcp", P, Z)
    return B


def step2_coefficients(c1pair, c2pair, Q2, f1new: FunctionFamily, f2: FunctionFamily, F):
    """h1 (transport), h2 and h3(x2) (rotation) for the N flow of step 2."""
    h1 = np.einsum("ik,iaq,kap->qp", c1pair[1], Q2, Q2)
    b1 = gram(f1new.values, spectral_derivative(f1new.values, f1new.grid), f1new.grid)
    h2 = np.einsum("ik,iaq,kcp,ac->qp", c1pair[0], Q2, Q2, b1, optimize=True)
    q = Q2.shape[2]
    n2 = F[0][1].shape[1]
    h3 = np.zeros((n2, q, q))
    for m, (F1, F2) in enumerate(F):
        for mu in range(F1.shape[0]):
            U = _pairing(f1new.values, f1new.grid, F1[mu], f1new.values)
            T = np.einsum("ik,iaq,kcp,ac->qp", c2pair[m], Q2, Q2, U, optimize=True)
            h3 += F2[mu][:, None, None] * T[None, :, :]
    return h1, h2, h3


def assemble_G(c2pair, Q2, f1new: FunctionFamily, f2new: FunctionFamily, F):
    """The quartic coupling G[s,q,s',q'] of the second R flow."""
    s = f2new.count
    q = Q2.shape[2]
    G = np.zeros((s, q, s, q))
    for m, (F1, F2) in enumerate(F):
        for mu in range(F1.shape[0]):
            U = _pairing(f1new.values, f1new.grid, F1[mu], f1new.values)
            T = np.einsum("ik,iaq,kcp,ac->qp", c2pair[m], Q2, Q2, U, optimize=True)
            V2 = _pairing(f2new.values, f2new.grid, F2[mu], f2new.values)
            G += np.einsum("st,qp->sqtp", V2, T)
    return G


def assemble_e(f1: FunctionFamily, f2: FunctionFamily, F):
    """Per-direction pairing tensors e[m][a,b,c,d] = <f1_a f2_b, F_m f1_c f2_d>,
    assembled from 1D integrals of the separable field."""
    out = []
    for F1, F2 in F:
        r1, r2 = f1.count, f2.count
        e = np.zeros((r1, r2, r1, r2))
        for mu in range(F1.shape[0]):
            P1 = _pairing(f1.values, f1.grid, F1[mu], f1.values)
            P2 = _pairing(f2.values, f2.grid, F2[mu], f2.values)
            e += np.einsum("ac,bd->abcd", P1, P2)
        out.append(e)
    return out


# ---------------------------------------------------------------------------
# Sub-flow solvers


def _batched_rotation(W, C, tau: float):
    """Exact flow over tau of dW(:,p)/dt = -C[p] W(:,p) for a stack of
    antisymmetric generators C (n, q, q); orthogonal at every point."""
    mu, U = np.linalg.eigh(1j * C)
    tmp = np.matmul(U.conj().transpose(0, 2, 1), W.T[:, :, None])[:, :, 0]
    tmp = np.exp(1j * tau * mu) * tmp
    return np.matmul(U, tmp[:, :, None])[:, :, 0].real.T


def _advect_rotate(W0, A_sym, rot, grid: Grid, tau: float):
    """Strang composition of exact transport (symmetric A_sym) and the exact
    pointwise rotation generated by rot (n, q, q)."""
    W = advect_transport(W0, A_sym, grid, tau / 2)
    W = _batched_rotation(W, rot, tau)
    return advect_transport(W, A_sym, grid, tau / 2)


def _rk4(y0, rhs, tau: float, scale: float):
    """Sub-stepped classical RK4 (shared convention with the S flow)."""
    nsub = max(1, int(np.ceil(abs(tau) * scale / 0.003)))
    dt = tau / nsub
    y = y0
    for _ in range(nsub):
        k1 = rhs(y)
        k2 = rhs(y + dt / 2 * k1)
        k3 = rhs(y + dt / 2 * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _norm2(M):
    return float(np.linalg.norm(np.asarray(M), 2))


def step1_factor_update(core, f1: FunctionFamily, f2: FunctionFamily, c1pair, c2pair, field_getter, tau: float):
    """Step 1 of the sweep: update the first 1D family and the core.

    Solves the M flow (1D advection system in the first direction), QR-
    refactors, then integrates the first R flow forward and recombines.
    Returns (core1, f1new).
    """
    uq = unfold_qr(core, 1, family=f2)
    Q, W = uq.Q, uq.W

    # one field serves the factor flow and its R correction: the R flow is
    # the backward projector term of the same advection, and feeding it a
    # field rebuilt from the half-updated representation doubles the
    # first-order energy drift of the outer step
    F = field_getter(core, f1, f2)
    a1, a2, a3 = step1_coefficients(c1pair, c2pair, Q, W, f2, F)
    M0 = uq.R @ f1.values
    M1 = _advect_rotate(M0, a1, a2[None, :, :] + a3, f1.grid, tau)
    f1new, RM = orthonormalize(FunctionFamily(f1.grid, M1))

    b1 = gram(f1new.values, spectral_derivative(f1new.values, f1new.grid), f1new.grid)
    B = assemble_B(c2pair, W, f2, f1new, F)

    def rhs(rho):
        return b1 @ rho @ a1.T + rho @ a2.T + np.einsum("sqtp,tp->sq", B, rho)

    scale = _norm2(b1) * _norm2(a1) + _norm2(a2) + _norm2(B.reshape(B.shape[0] * B.shape[1], -1))
    rho = _rk4(RM, rhs, tau, scale)
    return np.einsum("jqb,sq->jsb", Q, rho), f1new


def step2_factor_update(core, f1new: FunctionFamily, f2: FunctionFamily, c1pair, c2pair, field_getter, tau: float):
    """Step 2 of the sweep: update the second 1D family and the core.

    Mirror of step 1 acting on the last factor mode (N flow, QR, second R
    flow).  Returns (core2, f2new)."""
    uq = unfold_qr(core, 2)
    Q2 = uq.Q

    # field frozen across the N flow and its R correction, as in step 1
    F = field_getter(core, f1new, f2)
    h1, h2, h3 = step2_coefficients(c1pair, c2pair, Q2, f1new, f2, F)
    N0 = uq.R @ f2.values
    N1 = _advect_rotate(N0, h1, h2[None, :, :] + h3, f2.grid, tau)
    f2new, RN = orthonormalize(FunctionFamily(f2.grid, N1))

    dd = gram(f2new.values, spectral_derivative(f2new.values, f2new.grid), f2new.grid)
    G = assemble_G(c2pair, Q2, f1new, f2new, F)

    def rhs(rho):
        return dd @ rho @ h1.T + rho @ h2.T + np.einsum("sqtp,tp->sq", G, rho)

    scale = _norm2(dd) * _norm2(h1) + _norm2(h2) + _norm2(G.reshape(G.shape[0] * G.shape[1], -1))
    rho = _rk4(RN, rhs, tau, scale)
    return np.einsum("iaq,sq->ias", Q2, rho), f2new


def step3_core_update(core, f1: FunctionFamily, f2: FunctionFamily, c1pair, c2pair, field_getter, tau: float):
    """Step 3 of the sweep: integrate the core tensor ODE over tau."""
    F = field_getter(core, f1, f2)
    b1 = gram(f1.values, spectral_derivative(f1.values, f1.grid), f1.grid)
    dd = gram(f2.values, spectral_derivative(f2.values, f2.grid), f2.grid)
    e = assemble_e(f1, f2, F)

    def rhs(C):
        out = -np.einsum("ik,ax,kxb->iab", c1pair[0], b1, C, optimize=True)
        out -= np.einsum("ik,bh,kah->iab", c1pair[1], dd, C, optimize=True)
        for m in range(2):
            out -= np.einsum("ik,abxh,kxh->iab", c2pair[m], e[m], C, optimize=True)
        return out

    scale = _norm2(c1pair[0]) * _norm2(b1) + _norm2(c1pair[1]) * _norm2(dd)
    for m in range(2):
        r1r2 = e[m].shape[0] * e[m].shape[1]
        scale += _norm2(c2pair[m]) * _norm2(e[m].reshape(r1r2, r1r2))
    return _rk4(core, rhs, tau, scale)


def _sweep(core, f1, f2, c1pair, c2pair, field_getter, tau):
    core, f1 = step1_factor_update(core, f1, f2, c1pair, c2pair, field_getter, tau)
    core, f2 = step2_factor_update(core, f1, f2, c1pair, c2pair, field_getter, tau)
    core = step3_core_update(core, f1, f2, c1pair, c2pair, field_getter, tau)
    return core, f1, f2


# ---------------------------------------------------------------------------
# Field and coefficient assembly for the full state


def hierarchical_density(core, xfac_f1: FunctionFamily, xfac_f2: FunctionFamily, v_weights) -> ChargeDensity:
    """rho(x) = -sum_j K_j(x) * integral(V_j) for a working x-core."""
    u = np.einsum("jab,j->ab", np.asarray(core, dtype=float), v_weights)
    rho = -np.einsum("ab,an,bm->nm", u, xfac_f1.values, xfac_f2.values)
    return ChargeDensity((xfac_f1.grid, xfac_f2.grid), rho)


def hierarchical_field(state: HierarchicalState4D, r_E: int | None = None) -> ElectricField:
    """Self-consistent 2D field of a hierarchical state, with separable form."""
    core = np.einsum("iab,ij->jab", state.xfac.core, state.S)
    E = solve_poisson(hierarchical_density(core, state.xfac.f1, state.xfac.f2, state.vfac.integrals()))
    return lowrank_field(E, r_E=r_E) if r_E is not None else lowrank_field(E)


def hierarchical_coefficients(state: HierarchicalState4D, E: ElectricField):
    """The projected-advection coefficient tuples (c1, c2, d1, d2) of the
    outer S equation, assembled through the Tucker factors."""
    D = state.vfac.core
    V1, V2 = state.vfac.f1, state.vfac.f2
    mv1 = gram(V1.values * V1.grid.points, V1.values, V1.grid)
    mv2 = gram(V2.values * V2.grid.points, V2.values, V2.grid)
    g1 = gram(V1.values, V1.values, V1.grid)
    g2 = gram(V2.values, V2.values, V2.grid)
    dv1 = gram(V1.values, spectral_derivative(V1.values, V1.grid), V1.grid)
    dv2 = gram(V2.values, spectral_derivative(V2.values, V2.grid), V2.grid)
    c1 = (
        np.einsum("jab,lcd,ac,bd->jl", D, D, mv1, g2, optimize=True),
        np.einsum("jab,lcd,ac,bd->jl", D, D, g1, mv2, optimize=True),
    )
    c2 = (
        np.einsum("jab,lcd,ac,bd->jl", D, D, dv1, g2, optimize=True),
        np.einsum("jab,lcd,ac,bd->jl", D, D, g1, dv2, optimize=True),
    )

    C = state.xfac.core
    X1, X2 = state.xfac.f1, state.xfac.f2
    dx1 = gram(X1.values, spectral_derivative(X1.values, X1.grid), X1.grid)
    dx2 = gram(X2.values, spectral_derivative(X2.values, X2.grid), X2.grid)
    gx1 = gram(X1.values, X1.values, X1.grid)
    gx2 = gram(X2.values, X2.values, X2.grid)
    d2 = (
        np.einsum("iab,kcd,ac,bd->ik", C, C, dx1, gx2, optimize=True),
        np.einsum("iab,kcd,ac,bd->ik", C, C, gx1, dx2, optimize=True),
    )
    eten = assemble_e(X1, X2, field_as_separable(E))
    d1 = tuple(np.einsum("iab,abcd,kcd->ik", C, em, C, optimize=True) for em in eten)
    return c1, c2, d1, d2


# ---------------------------------------------------------------------------
# Outer updates


def hierarchical_x_update(state: HierarchicalState4D, tau: float, r_E: int | None = None) -> HierarchicalState4D:
    """Advance the x-side factor (the K analogue) over tau.

    The outer S is folded into the x-core, the direction sweep is run with
    F = -E (the field rebuilt from the working factors at the start of each
    factor/core flow and truncated to separable form), and the core
    Gram-Schmidt pass restores the factor/S split."""
    wv = state.vfac.integrals()
    xg1, xg2 = state.xfac.f1.grid, state.xfac.f2.grid

    def field_getter(core, f1, f2):
        E = solve_poisson(hierarchical_density(core, f1, f2, wv))
        E = lowrank_field(E, r_E=r_E) if r_E is not None else lowrank_field(E)
        return field_as_separable(E, negate=True)

    E0 = hierarchical_field(state, r_E=r_E)
    c1, c2, _, _ = hierarchical_coefficients(state, E0)

    core = np.einsum("iab,ij->jab", state.xfac.core, state.S)
    core, f1, f2 = _sweep(core, state.xfac.f1, state.xfac.f2, c1, c2, field_getter, tau)
    core, S = core_gram_schmidt(core)
    return HierarchicalState4D(S, TuckerFactor(core, f1, f2), state.vfac, state.t)


def hierarchical_v_update(state: HierarchicalState4D, tau: float, r_E: int | None = None) -> HierarchicalState4D:
    """Advance the v-side factor (the L analogue) over tau.

    The generic sweep runs with coefficients (-d1[E], d2) and F = v; the
    field (hence d1) is frozen at entry, as in the 1x1v L flow."""
    E = hierarchical_field(state, r_E=r_E)
    _, _, d1, d2 = hierarchical_coefficients(state, E)
    c1pair = tuple(-m for m in d1)
    c2pair = d2

    vg1, vg2 = state.vfac.f1.grid, state.vfac.f2.grid
    vfield = velocity_separable(vg1, vg2)

    def field_getter(core, f1, f2):
        return vfield

    core = np.einsum("ij,jab->iab", state.S, state.vfac.core)
    core, f1, f2 = _sweep(core, state.vfac.f1, state.vfac.f2, c1pair, c2pair, field_getter, tau)
    core, T = core_gram_schmidt(core)
    return HierarchicalState4D(T.T, state.xfac, TuckerFactor(core, f1, f2), state.t)


def hierarchical_lie_step(state: HierarchicalState4D, tau: float, r_E: int | None = None) -> HierarchicalState4D:
    """First-order outer step: x-update, S flow, v-update."""
    st = hierarchical_x_update(state, tau, r_E=r_E)

    E = hierarchical_field(st, r_E=r_E)
    c1, c2, d1, d2 = hierarchical_coefficients(st, E)
    S = S_step(st.S, c1, c2, d1, d2, tau)
    st = HierarchicalState4D(S, st.xfac, st.vfac, st.t)

    st = hierarchical_v_update(st, tau, r_E=r_E)
    return HierarchicalState4D(st.S, st.xfac, st.vfac, state.t + tau)
