"""Uniform periodic grids and the spectral primitives built on them.

Provides rectangle-rule quadrature (spectrally accurate for smooth periodic
data), FFT differentiation, and weighted Gram-Schmidt orthonormalization of
function families.  Everything else in the package sits on top of these.
"""

import numpy as np


class Grid:
    """Uniform periodic grid on [a, b) with n points."""

    def __init__(self, n: int, a: float, b: float):
        if n < 1:
            raise ValueError("grid point count must be positive")
        if not b > a:
            raise ValueError("grid interval is empty")
        self.n = n
        self.a = a
        self.b = b
        self.length = b - a
        self.h = (b - a) / n
        self.points = a + self.h * np.arange(n)
        # angular wavenumbers 2*pi*m/(b-a) in standard FFT ordering
        self.wavenumbers = 2 * np.pi * np.fft.fftfreq(n, d=self.h)
        # wavenumbers of the real-FFT half spectrum, with the Nyquist mode
        # zeroed: differentiation must kill it for the result to stay real
        self.rfft_wavenumbers = 2 * np.pi * np.fft.rfftfreq(n, d=self.h)
        if n % 2 == 0:
            self.rfft_wavenumbers[-1] = 0.0

    def __repr__(self):
        return f"Grid(n={self.n}, a={self.a}, b={self.b})"


class FunctionFamily:
    """A stack of real functions sampled on a shared grid.

    values has shape (count, n); row i holds the samples of member i.
    """

    def __init__(self, grid: Grid, values):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.ndim != 2 or values.shape[1] != grid.n:
            raise ValueError("family values must have shape (count, grid.n)")
        self.grid = grid
        self.values = values

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def copy(self) -> "FunctionFamily":
        return FunctionFamily(self.grid, self.values.copy())


def inner_product(f, g, grid: Grid) -> float:
    """Rectangle-rule inner product h * sum_i f_i g_i."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != (grid.n,) or g.shape != (grid.n,):
        raise ValueError("sample count does not match grid")
    return grid.h * float(np.dot(f, g))


def gram(fvals, gvals, grid: Grid):
    """All pairwise inner products of two sample stacks: h * F @ G^T."""
    return grid.h * (np.atleast_2d(fvals) @ np.atleast_2d(gvals).T)


def spectral_derivative(f, grid: Grid):
    """Differentiate periodic samples via FFT (Nyquist mode zeroed).

    Works along the last axis, so a whole family can be differentiated at
    once.  Real input gives real output.
    """
    f = np.asarray(f)
    if f.shape[-1] != grid.n:
        raise ValueError("sample count does not match grid")
    if np.iscomplexobj(f):
        k = np.fft.fftfreq(grid.n, d=grid.h) * 2 * np.pi
        if grid.n % 2 == 0:
            k[grid.n // 2] = 0.0
        return np.fft.ifft(1j * k * np.fft.fft(f, axis=-1), axis=-1)
    fh = np.fft.rfft(f, axis=-1)
    return np.fft.irfft(1j * grid.rfft_wavenumbers * fh, n=grid.n, axis=-1)


def fourier_modes(grid: Grid):
    """Yield an endless sequence of normalized real Fourier modes.

    Order: constant, cos, sin, cos of the next harmonic, ...  Used to pad
    rank-deficient families with a deterministic orthonormal complement.
    """
    x = grid.points
    yield np.full(grid.n, 1.0 / np.sqrt(grid.length))
    m = 1
    while True:
        w = 2 * np.pi * m / grid.length
        scale = np.sqrt(2.0 / grid.length)
        yield scale * np.cos(w * x)
        yield scale * np.sin(w * x)
        m += 1


def _project_out(w, Q, j, grid: Grid):
    """Subtract from w its components along the first j rows of Q."""
    coeffs = np.zeros(j)
    for _ in range(2):  # one re-orthogonalization pass
        for i in range(j):
            c = grid.h * float(np.dot(Q[i], w))
            coeffs[i] += c
            w = w - c * Q[i]
    return w, coeffs


def orthonormalize(family: FunctionFamily):
    """Orthonormalize a family by modified Gram-Schmidt under the h-weighted
    inner product (one re-orthogonalization pass).

    Returns (Q, R) with R upper triangular, R diagonal >= 0, and
    member_j = sum_i Q_i * R[i, j].  A member whose pivot falls below
    1e-14 times the largest pivot is replaced by a deterministic orthonormal
    complement (drawn from the Fourier modes) and its R diagonal set to 0.
    """
    m = family.count
    grid = family.grid
    Q = np.zeros_like(family.values)
    R = np.zeros((m, m))
    largest = 0.0
    complements = fourier_modes(grid)
    for j in range(m):
        w, coeffs = _project_out(family.values[j].copy(), Q, j, grid)
        R[:j, j] = coeffs
        nrm = np.sqrt(grid.h * float(np.dot(w, w)))
        largest = max(largest, nrm)
        if largest == 0.0 or nrm <= 1e-14 * largest:
            # rank-deficient member: park an arbitrary orthonormal direction
            for cand in complements:
                w, _ = _project_out(cand.copy(), Q, j, grid)
                nrm = np.sqrt(grid.h * float(np.dot(w, w)))
                if nrm > 0.5:
                    break
            Q[j] = w / nrm
            R[j, j] = 0.0
        else:
            Q[j] = w / nrm
            R[j, j] = nrm
    return FunctionFamily(grid, Q), R
