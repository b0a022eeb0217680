"""Exact algebra of polynomial-times-Gaussian antiholomorphic forms on C^n.

Objects are (0, q)-forms

    f = sum_I p_I(w, wbar) * exp(sum_i a_i |w_i|^2) dwbar_I,

with polynomial coefficients stored as a finite map from (I, alpha, gamma)
to a scalar, where the monomial is w^alpha * wbar^gamma and I is a strictly
increasing index tuple.  This class is closed under the weighted operators
dbar, dbar_star and the associated Laplacian, so all compositions stay exact:
no truncation ever happens, and coefficient cancellations are literal.

Inner products are taken against a diagonal quadratic weight
exp(-sum_i mu_i |w_i|^2) using Lebesgue measure on C^n and pointwise
orthonormal components dwbar_I.  Every integral then factorizes into
one-dimensional Gaussian moments

    integral of w^p wbar^s e^{-c|w|^2} dm  =  [p == s] * p! * pi / c^(p+1),

which the code evaluates in closed form (and exactly over the rationals when
all inputs are rational).  Scalars may be ints, Fractions, floats or complex;
the operators never introduce rounding of their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .errors import (
    DegreeMismatch,
    NonIntegrable,
    TopDegree,
)

Key = tuple  # (I, alpha, gamma), all tuples of ints


def _conj(c):
    if isinstance(c, (int, Fraction, float)):
        return c
    return np.conjugate(c) if isinstance(c, np.generic) else complex(c).conjugate()


def _is_zero(c) -> bool:
    return c == 0


@dataclass(frozen=True)
class ModelWeight:
    """Diagonal quadratic weight coefficients mu_i; all must be nonzero."""

    mu: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(self.mu))
        if any(m == 0 for m in self.mu):
            raise ValueError("model weight coefficients must be nonzero")

    @property
    def n(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class GaussPolyForm:
    """A (0, q)-form with polynomial coefficients and a fixed Gaussian factor."""

    n: int
    q: int
    a: tuple
    terms: dict

    def __post_init__(self):
        if not (0 <= self.q <= self.n):
            raise ValueError(f"degree q={self.q} outside [0, {self.n}]")
        if len(self.a) != self.n:
            raise ValueError("exponent vector must have length n")
        object.__setattr__(self, "a", tuple(self.a))
        clean = {}
        for (I, alpha, gamma), c in self.terms.items():
            I, alpha, gamma = tuple(I), tuple(alpha), tuple(gamma)
            if len(I) != self.q or list(I) != sorted(set(I)):
                raise ValueError(f"bad index set {I} for degree {self.q}")
            if I and (I[0] < 0 or I[-1] >= self.n):
                raise ValueError(f"index set {I} out of range")
            if len(alpha) != self.n or len(gamma) != self.n:
                raise ValueError("monomial exponents must have length n")
            if any(x < 0 for x in alpha + gamma):
                raise ValueError("monomial exponents must be nonnegative")
            if not _is_zero(c):
                clean[(I, alpha, gamma)] = c
        object.__setattr__(self, "terms", clean)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GaussPolyForm") -> "GaussPolyForm":
        if (self.n, self.q) != (other.n, other.q):
            raise DegreeMismatch("cannot add forms of different (n, q)")
        if self.a != other.a and not (self.is_zero() or other.is_zero()):
            raise ValueError("cannot add forms with different Gaussian factors")
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if _is_zero(s):
                out.pop(k, None)
            else:
                out[k] = s
        return GaussPolyForm(self.n, self.q, self.a if not self.is_zero() else other.a, out)

    def __mul__(self, scalar) -> "GaussPolyForm":
        if _is_zero(scalar):
            return GaussPolyForm(self.n, self.q, self.a, {})
        return GaussPolyForm(self.n, self.q, self.a,
                             {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def evaluate(self, w) -> dict:
        """Componentwise value at a point (or numpy array of points).

        ``w`` has shape (..., n); returns a dict mapping each index set to the
        coefficient value, including the Gaussian factor.
        """
        w = np.asarray(w, dtype=complex)
        gauss = np.exp(sum(float(ai) * np.abs(w[..., i]) ** 2
                           for i, ai in enumerate(self.a)))
        out = {}
        for (I, alpha, gamma), c in self.terms.items():
            mono = np.ones_like(gauss, dtype=complex)
            for i in range(self.n):
                if alpha[i]:
                    mono = mono * w[..., i] ** alpha[i]
                if gamma[i]:
                    mono = mono * np.conj(w[..., i]) ** gamma[i]
            out[I] = out.get(I, 0) + complex(c) * mono * gauss
        return out


def zero_form(n: int, q: int, a=None) -> GaussPolyForm:
    return GaussPolyForm(n, q, tuple(a) if a is not None else (0,) * n, {})


def monomial_form(n: int, I, alpha, gamma, a=None, coeff=1) -> GaussPolyForm:
    """Single-term form coeff * w^alpha wbar^gamma e^{a|w|^2} dwbar_I."""
    I = tuple(I)
    return GaussPolyForm(n, len(I), tuple(a) if a is not None else (0,) * n,
                         {(I, tuple(alpha), tuple(gamma)): coeff})


def _unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _add_index(base: tuple, i: int, delta: int) -> tuple:
    out = list(base)
    out[i] += delta
    return tuple(out)


def _wedge(j: int, I: tuple):
    """Sign and sorted index set of dwbar_j wedge dwbar_I; None if j in I."""
    if j in I:
        return None
    pos = sum(1 for i in I if i < j)
    return ((-1) ** pos, tuple(sorted(I + (j,))))


def _accumulate(terms: dict, key: Key, coeff) -> None:
    s = terms.get(key, 0) + coeff
    if _is_zero(s):
        terms.pop(key, None)
    else:
        terms[key] = s


def dbar(f: GaussPolyForm) -> GaussPolyForm:
    """Antiholomorphic differential; raises TopDegree at q = n.

    Acting on p * e^{sum a_i|w_i|^2} dwbar_I the j-th component contributes
    (d p/d wbar_j + a_j w_j p) dwbar_j wedge dwbar_I, with the sign convention
    of wedging from the left.
    """
    if f.q == f.n:
        raise TopDegree("dbar of a top-degree form")
    out: dict = {}
    for (I, alpha, gamma), c in f.terms.items():
        for j in range(f.n):
            w = _wedge(j, I)
            if w is None:
                continue
            sign, newI = w
            if gamma[j]:
                _accumulate(out, (newI, alpha, _add_index(gamma, j, -1)),
                            sign * c * gamma[j])
            if not _is_zero(f.a[j]):
                _accumulate(out, (newI, _add_index(alpha, j, 1), gamma),
                            sign * c * f.a[j])
    return GaussPolyForm(f.n, f.q + 1, f.a, out)


def _check_integrable(f: GaussPolyForm, weight: ModelWeight) -> None:
    if f.n != weight.n:
        raise DegreeMismatch("form and weight dimensions differ")
    for ai, mi in zip(f.a, weight.mu):
        if not (2 * ai - mi < 0):
            raise NonIntegrable(
                f"exponent {ai} not square-integrable against weight {mi}")


def dbar_star(f: GaussPolyForm, weight: ModelWeight) -> GaussPolyForm:
    """Formal adjoint of dbar in the weighted inner product.

    Defined by (dbar_star v)_I = -sum_j (d/dw_j - mu_j wbar_j) v_{jI}; on the
    Gaussian class this stays inside the class with the same exponent.  On
    (0,0)-forms the adjoint vanishes and the zero form is returned.
    """
    _check_integrable(f, weight)
    if f.q == 0:
        return zero_form(f.n, 0, f.a)
    out: dict = {}
    for (I, alpha, gamma), c in f.terms.items():
        for pos, j in enumerate(I):
            sign = (-1) ** pos
            newI = I[:pos] + I[pos + 1:]
            if alpha[j]:
                _accumulate(out, (newI, _add_index(alpha, j, -1), gamma),
                            -sign * c * alpha[j])
            shift = f.a[j] - weight.mu[j]
            if not _is_zero(shift):
                _accumulate(out, (newI, alpha, _add_index(gamma, j, 1)),
                            -sign * c * shift)
    return GaussPolyForm(f.n, f.q - 1, f.a, out)


def laplacian(f: GaussPolyForm, weight: ModelWeight) -> GaussPolyForm:
    """Weighted dbar-Laplacian, composed symbolically with no truncation."""
    _check_integrable(f, weight)
    up = dbar_star(dbar(f), weight) if f.q < f.n else zero_form(f.n, f.q, f.a)
    down = dbar(dbar_star(f, weight)) if f.q > 0 else zero_form(f.n, f.q, f.a)
    return up + down


def _moment(p: int, c) -> tuple:
    """One-coordinate moment integral, returned as (rational-part, uses pi).

    Value is p! / c^(p+1) times pi; the caller multiplies the pi powers in.
    Exact when c is rational.
    """
    fact = math.factorial(p)
    if isinstance(c, (int, Fraction)):
        return Fraction(fact) / (Fraction(c) ** (p + 1))
    return fact / float(c) ** (p + 1)


def _pair_iter(f: GaussPolyForm, g: GaussPolyForm):
    """Yield matched term pairs contributing to <f, g>.

    A pair contributes only when the index sets agree and the per-coordinate
    monomial charge alpha - gamma matches; the lookup is keyed on that charge.
    """
    index = {}
    for (I, alpha, gamma), c in g.terms.items():
        delta = tuple(x - y for x, y in zip(alpha, gamma))
        index.setdefault((I, delta), []).append((alpha, gamma, c))
    for (I, alpha, gamma), c in f.terms.items():
        delta = tuple(x - y for x, y in zip(alpha, gamma))
        for (ga, gg, gc) in index.get((I, delta), ()):
            yield (alpha, gamma, c), (ga, gg, gc)


def inner_product(f: GaussPolyForm, g: GaussPolyForm, weight: ModelWeight) -> complex:
    """Weighted L2 pairing sum_I integral f_I conj(g_I) e^{-gamma_0} dm.

    Evaluated exactly by factorized Gaussian moments; components dwbar_I are
    pairwise orthonormal and the measure is Lebesgue measure on C^n.
    """
    if (f.n, f.q) != (g.n, g.q):
        raise DegreeMismatch("inner product needs matching (n, q)")
    _check_integrable(f, weight)
    _check_integrable(g, weight)
    total = 0j
    pi_n = math.pi ** f.n
    for (fa, fg, fc), (ga, gg, gc) in _pair_iter(f, g):
        val = 1.0
        for i in range(f.n):
            p = fa[i] + gg[i]
            c = weight.mu[i] - f.a[i] - g.a[i]
            val *= float(_moment(p, c))
        total += complex(fc) * _conj(complex(gc)) * val
    return complex(total * pi_n)


def inner_product_exact(f: GaussPolyForm, g: GaussPolyForm, weight: ModelWeight) -> Fraction:
    """Exact pairing for rational data; returns the coefficient of pi^n.

    All coefficients, exponents and weight entries must be ints or Fractions.
    """
    if (f.n, f.q) != (g.n, g.q):
        raise DegreeMismatch("inner product needs matching (n, q)")
    _check_integrable(f, weight)
    _check_integrable(g, weight)
    total = Fraction(0)
    for (fa, fg, fc), (ga, gg, gc) in _pair_iter(f, g):
        val = Fraction(1)
        for i in range(f.n):
            p = fa[i] + gg[i]
            c = Fraction(weight.mu[i]) - Fraction(f.a[i]) - Fraction(g.a[i])
            val *= _moment(p, c)
        total += Fraction(fc) * Fraction(gc) * val
    return total


def norm_sq(f: GaussPolyForm, weight: ModelWeight) -> float:
    return float(inner_product(f, f, weight).real)


def _gamma_sum_cdf(shapes, rates, t: float) -> float:
    """P(sum of independent Gamma(shape_i, rate_i) <= t).

    Closed form (regularized lower incomplete gamma) when all rates agree;
    otherwise reduced recursively by one-dimensional quadrature.
    """
    if t <= 0:
        return 0.0
    if len(set(float(r) for r in rates)) == 1:
        return float(special.gammainc(sum(shapes), float(rates[0]) * t))
    k, c = shapes[0], float(rates[0])
    rest_s, rest_r = shapes[1:], rates[1:]

    def integrand(x):
        pdf = c ** k * x ** (k - 1) * math.exp(-c * x) / math.factorial(k - 1)
        return pdf * _gamma_sum_cdf(rest_s, rest_r, t - x)

    val, _ = integrate.quad(integrand, 0.0, t, limit=200)
    return float(val)


def tail_norm(f: GaussPolyForm, weight: ModelWeight, R: float,
              split: int | None = None) -> float:
    """Squared norm of f outside the box where every group radius is < R.

    Coordinates are grouped as (first ``split``, rest) when ``split`` is
    given, else each coordinate is its own group; the excluded box is the
    set where all group Euclidean radii stay below R.  Each term-pair
    integral factorizes over groups into incomplete-gamma evaluations (exact
    per group when the decay rates inside the group agree), combined by
    complement: tail = full norm - box integral.
    """
    _check_integrable(f, weight)
    if R < 0:
        raise ValueError("radius must be nonnegative")
    if split is None:
        groups = [(i,) for i in range(f.n)]
    else:
        groups = [g for g in (tuple(range(split)), tuple(range(split, f.n))) if g]
    total = inner_product(f, f, weight).real
    if R == 0:
        return float(total)
    box = 0.0
    for (fa, fg, fc), (ga, gg, gc) in _pair_iter(f, f):
        coef = (complex(fc) * _conj(complex(gc))).real
        val = coef
        for grp in groups:
            shapes = []
            rates = []
            full = 1.0
            for i in grp:
                p = fa[i] + gg[i]
                c = float(weight.mu[i] - 2 * f.a[i])
                shapes.append(p + 1)
                rates.append(c)
                full *= math.pi * float(_moment(p, c))
            val *= full * _gamma_sum_cdf(shapes, rates, R * R)
        box += val
    # imaginary parts of conjugate term pairs cancel in the real total
    return float(max(total - box, 0.0))
