"""Pointwise Hermitian linear algebra for curvature-type forms.

A curvature form evaluated at a point is a Hermitian matrix; its geometry
enters only through the eigenvalues relative to a positive reference metric.
This module computes those relative eigenvalues, splits a spectrum into a
rank-r block and its complement, classifies the signature (the index q used
throughout the torus and model checks), and evaluates the relative
determinant that normalizes all kernel limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrum, NonPositiveMetric

#: relative width of the zero band, as a fraction of the spectral radius
DEFAULT_DEGENERACY_TOL = 1e-9

#: sentinel returned by classify_point when an eigenvalue sits in the zero band
DEGENERATE = "degenerate"


def check_hermitian(mat: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate conjugate symmetry and finiteness; return the array as complex."""
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix entries must be finite")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.conj().T).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Relative eigenvalues at a point, split into a rank block and its complement.

    ``lambdas`` holds the r values attached to the normal directions of the
    degenerate block, ``nus`` the n - r values on the complementary (leaf)
    directions.  Values are stored sorted descending within each block.  A
    value v counts as degenerate when ``|v| <= tolerance``; the default
    tolerance is relative to the spectral radius, since the signature strata
    are open sets and boundary points are deliberately excluded.
    """

    lambdas: tuple
    nus: tuple
    tolerance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(sorted(self.lambdas, reverse=True)))
        object.__setattr__(self, "nus", tuple(sorted(self.nus, reverse=True)))
        if self.tolerance is not None and self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.lambdas) + len(self.nus)

    @property
    def r(self) -> int:
        return len(self.lambdas)

    @property
    def values(self) -> tuple:
        """Concatenated eigenvalues, rank block first."""
        return self.lambdas + self.nus

    def zero_band(self) -> float:
        """Absolute half-width of the band treated as zero."""
        if self.tolerance is not None:
            return self.tolerance
        radius = max((abs(float(v)) for v in self.values), default=0.0)
        return DEFAULT_DEGENERACY_TOL * radius



def eigen_rel(theta: np.ndarray, omega0: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``theta`` relative to the positive metric ``omega0``.

    Solves det(theta - t * omega0) = 0 by reducing with the Cholesky factor
    of omega0 and then running a standard Hermitian solve, which keeps the
    problem symmetric throughout.  The result is sorted descending and is
    invariant under simultaneous congruence of both inputs.
    """
    t = check_hermitian(theta)
    w = check_hermitian(omega0)
    if t.shape != w.shape:
        raise ValueError("theta and omega0 must have the same shape")
    try:
        chol = scipy.linalg.cholesky(w, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NonPositiveMetric("reference metric is not positive-definite") from exc
    inv_l = scipy.linalg.solve_triangular(chol, np.eye(w.shape[0], dtype=complex), lower=True)
    reduced = inv_l @ t @ inv_l.conj().T
    vals = np.linalg.eigvalsh(reduced)
    return vals[::-1].copy()


def split_spectrum(theta: np.ndarray, omega0: np.ndarray, r: int,
                   tolerance: float | None = None) -> CurvatureSpectrum:
    """Package relative eigenvalues of a block-diagonal form into a spectrum.

    ``theta`` must be block diagonal with an r x r rank block leading, so the
    two blocks can be solved independently against the matching blocks of
    ``omega0``.
    """
    lam = eigen_rel(theta[:r, :r], omega0[:r, :r]) if r else np.array([])
    nu = eigen_rel(theta[r:, r:], omega0[r:, r:]) if r < theta.shape[0] else np.array([])
    return CurvatureSpectrum(tuple(lam), tuple(nu), tolerance)


def classify_point(spec: CurvatureSpectrum):
    """Signature index of the spectrum: q negatives, or DEGENERATE.

    Returns the integer count of strictly negative eigenvalues across both
    blocks, or the DEGENERATE sentinel if any value sits in the zero band.
    """
    band = spec.zero_band()
    vals = [float(v) for v in spec.values]
    if any(abs(v) <= band for v in vals):
        return DEGENERATE
    return sum(1 for v in vals if v < 0)


def det_rel(spec: CurvatureSpectrum):
    """Product of the absolute eigenvalues; errors out on a degenerate spectrum.

    Exact (Fraction) arithmetic survives when the stored values are rational.
    """
    if classify_point(spec) == DEGENERATE:
        raise DegenerateSpectrum("relative determinant undefined on a degenerate spectrum")
    prod = Fraction(1)
    exact = True
    for v in spec.values:
        if isinstance(v, (int, Fraction)):
            prod *= abs(Fraction(v))
        else:
            exact = False
    if exact:
        return prod
    out = 1.0
    for v in spec.values:
        out *= abs(float(v))
    return out


def negatives_first(spec: CurvatureSpectrum) -> CurvatureSpectrum:
    """Rearrange so all negative eigenvalues lead the concatenated sequence.

    The blocks are repartitioned by sign: the rank block of the result holds
    exactly the negative values, so the concatenation is negatives-first while
    both blocks stay internally descending.  Use this only to feed
    constructions that require the negatives-first convention; geometric block
    identity is irrelevant for those, and the resulting split (negative
    directions | positive directions) is the natural grouping for cutoff and
    tail geometry.
    """
    neg = tuple(v for v in spec.values if float(v) < 0)
    pos = tuple(v for v in spec.values if float(v) >= 0)
    return CurvatureSpectrum(neg, pos, spec.tolerance)
