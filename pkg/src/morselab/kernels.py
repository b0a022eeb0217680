"""Model-space kernels for the flat Gaussian weight.

On C^n with weight exp(-gamma_0), gamma_0 = sum mu_i |w_i|^2 and mixed signs
among the mu_i, the harmonic (0, q)-forms valued at the origin are governed by
a single explicit Gaussian test form.  This module builds that form, reports
the closed-form Bergman/extremal value at the origin, and provides an
independent finite-dimensional oracle: a Galerkin (Rayleigh-Ritz) search for
the harmonic subspace of a polynomial-times-Gaussian candidate space, from
which Bergman and extremal values at the origin are reassembled and the
kernel sandwich S <= B <= sum_I S_I is checked.

Conventions fixed throughout: Lebesgue measure on C^n, pointwise orthonormal
dwbar_I, weight exp(-gamma_0).  Under these, the peak value of the normalized
test form is prod|mu_i| / pi^n, which is the module's kernel constant; the
corresponding one-dimensional constant is pinned by the Fock-space oracle in
the tests (constant holomorphic section, mu = pi, Bergman value 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateSpectrum,
    EmptySpace,
    IllConditionedGram,
    SignPatternMismatch,
)
from .forms import GaussPolyForm, ModelWeight, dbar, dbar_star, inner_product
from .hermitian import DEGENERATE, CurvatureSpectrum, classify_point

DEFAULT_HARMONIC_TOL = 1e-8
DEFAULT_GRAM_CUTOFF = 1e-12


def model_weight_of(spec: CurvatureSpectrum) -> ModelWeight:
    """Weight coefficients in block order (rank block first)."""
    return ModelWeight(spec.values)


def beta_peak(spec: CurvatureSpectrum) -> float:
    """Squared peak value prod|mu_i| / pi^n of the normalized test form."""
    out = 1.0
    for v in spec.values:
        out *= abs(float(v))
    return out / math.pi ** spec.n


def model_test_form(spec: CurvatureSpectrum, normalized: bool = True) -> GaussPolyForm:
    """The extremal Gaussian (0, q)-form for a negatives-first spectrum.

    With mu_1..mu_q < 0 < mu_{q+1}..mu_n the form is

        beta = c * exp(sum_{i<=q} mu_i |w_i|^2) dwbar_1 ^ ... ^ dwbar_q,

    c = (prod|mu_i| / pi^n)^(1/2).  It has unit weighted norm, is annihilated
    exactly by dbar, dbar_star and the Laplacian, and peaks at
    |beta(0)|^2 = prod|mu_i| / pi^n.  ``normalized=False`` keeps the leading
    coefficient at exactly 1 (useful for exact-cancellation checks with
    rational spectra).
    """
    if classify_point(spec) == DEGENERATE:
        raise DegenerateSpectrum("test form undefined for degenerate spectra")
    mu = spec.values
    q = sum(1 for v in mu if float(v) < 0)
    for i, v in enumerate(mu):
        if (i < q) != (float(v) < 0):
            raise SignPatternMismatch(
                "spectrum must list its negative eigenvalues first; "
                "see hermitian.negatives_first")
    a = tuple(mu[i] if i < q else 0 for i in range(spec.n))
    coeff = math.sqrt(beta_peak(spec)) if normalized else Fraction(1)
    key = (tuple(range(q)), (0,) * spec.n, (0,) * spec.n)
    return GaussPolyForm(spec.n, q, a, {key: coeff})


def model_bergman(spec: CurvatureSpectrum, q: int) -> float:
    """Model Bergman kernel value at the origin in degree q.

    Zero unless the signature index equals q; on the matching stratum the
    value is the kernel constant prod|mu_i| / pi^n.
    """
    cls = classify_point(spec)
    if cls == DEGENERATE:
        raise DegenerateSpectrum("model kernel undefined for degenerate spectra")
    if cls != q:
        return 0.0
    return beta_peak(spec)


def _monomials_up_to(n: int, total: int):
    """All exponent tuples in N^n with |gamma| <= total."""
    if n == 0:
        yield ()
        return
    for head in range(total + 1):
        for rest in _monomials_up_to(n - 1, total - head):
            yield (head,) + rest


@dataclass
class GalerkinResult:
    """Origin values extracted from the Galerkin harmonic subspace."""

    q: int
    degree: int
    S: float
    S_by_component: dict
    B: float
    harmonic_dims: dict
    max_rayleigh: float
    gram_condition: float

    @property
    def sum_S_components(self) -> float:
        return float(sum(self.S_by_component.values()))


def _block_basis(n: int, q: int, target: tuple, degree: int, weight: ModelWeight):
    """Candidate monomial forms in the rotation class that can hit the origin.

    The weight torus action w -> e^{i theta} w splits the candidate space
    {w^alpha wbar^gamma e^{Gaussian} dwbar_J} into invariant classes labelled
    by the charge alpha - gamma - 1_J; the Laplacian and the Gram pairing never
    couple different classes, so each class is solved independently.  Only the
    class of charge -1_target contains elements with a nonzero value at the
    origin, which is all the origin-kernel quantities need.
    """
    a = tuple(m if float(m) < 0 else 0.0 for m in weight.mu)
    charge = tuple(-1 if i in target else 0 for i in range(n))
    basis = []
    for J in itertools.combinations(range(n), q):
        shift = tuple(charge[i] + (1 if i in J else 0) for i in range(n))
        for gamma in _monomials_up_to(n, degree):
            alpha = tuple(g + s for g, s in zip(gamma, shift))
            if any(x < 0 for x in alpha):
                continue
            if sum(alpha) + sum(gamma) > degree:
                continue
            basis.append((J, alpha, gamma))
    forms = []
    for (J, alpha, gamma) in basis:
        raw = GaussPolyForm(n, q, a, {(J, alpha, gamma): 1.0})
        nrm = math.sqrt(inner_product(raw, raw, weight).real)
        forms.append(raw * (1.0 / nrm))
    return basis, forms


class _MomentTable:
    """Cached one-coordinate moments p! / c^(p+1) for the block's decay rates."""

    def __init__(self, n: int, weight: ModelWeight, a: tuple, max_p: int):
        self.n = n
        self.pi_n = math.pi ** n
        rates = [float(m) - 2.0 * float(ai) for m, ai in zip(weight.mu, a)]
        self.mom = [[math.factorial(p) * (1.0 / c) ** (p + 1)
                     for p in range(max_p + 1)] for c in rates]

    def pair(self, alpha_f, gamma_f, gamma_g) -> float:
        out = self.pi_n
        for i in range(self.n):
            out *= self.mom[i][alpha_f[i] + gamma_g[i]]
        return out


def _accumulate_pairs(mat: np.ndarray, items, table: _MomentTable) -> None:
    """Add sum over matched term pairs of c_f * c_g * moment to mat[i, j].

    ``items`` holds (owner index, I, alpha, gamma, coeff) with real
    coefficients; only pairs with equal component set and equal monomial
    charge contribute, and for those the pairing is symmetric in the owners.
    """
    groups: dict = {}
    for (i, I, alpha, gamma, c) in items:
        delta = tuple(x - y for x, y in zip(alpha, gamma))
        groups.setdefault((I, delta), []).append((i, alpha, gamma, c))
    for members in groups.values():
        for t1, (i, a1, g1, c1) in enumerate(members):
            for t2 in range(t1, len(members)):
                (j, a2, g2, c2) = members[t2]
                val = c1 * c2 * table.pair(a1, g1, g2)
                if i != j:
                    mat[i, j] += val
                    mat[j, i] += val
                elif t1 == t2:
                    mat[i, i] += val
                else:
                    mat[i, i] += 2 * val


def _real_terms(owner: int, form: GaussPolyForm):
    return [(owner, I, alpha, gamma, float(c))
            for (I, alpha, gamma), c in form.terms.items()]


def _assemble_block(basis, forms, weight: ModelWeight, degree: int):
    """Gram and energy matrices of one rotation class.

    The energy form is assembled from the first-order pieces,
    <dbar b_i, dbar b_j> + <dbar_star b_i, dbar_star b_j>, which equals the
    Laplacian pairing (verified against it in the tests) and is symmetric
    positive semidefinite by construction.
    """
    n, q = forms[0].n, forms[0].q
    a = forms[0].a
    size = len(basis)
    table = _MomentTable(n, weight, a, 2 * degree + 4)
    gram = np.zeros((size, size))
    gram_items = []
    for i, form in enumerate(forms):
        gram_items.extend(_real_terms(i, form))
    _accumulate_pairs(gram, gram_items, table)
    energy = np.zeros((size, size))
    up_items = []
    down_items = []
    for i, form in enumerate(forms):
        if q < n:
            up_items.extend(_real_terms(i, dbar(form)))
        if q > 0:
            down_items.extend(_real_terms(i, dbar_star(form, weight)))
    _accumulate_pairs(energy, up_items, table)
    _accumulate_pairs(energy, down_items, table)
    return gram, energy


def _solve_block(gram, lap, gram_cutoff: float):
    """Ritz values and M-orthonormal Ritz vectors via truncated whitening."""
    svals, svecs = np.linalg.eigh(gram)
    keep = svals > gram_cutoff * svals.max()
    if not np.any(keep):
        raise IllConditionedGram("no usable direction survives Gram whitening")
    cond = float(svals.max() / svals[keep].min())
    white = svecs[:, keep] / np.sqrt(svals[keep])
    reduced = white.conj().T @ lap @ white
    reduced = (reduced + reduced.conj().T) / 2
    theta, y = np.linalg.eigh(reduced)
    vectors = white @ y
    return theta, vectors, cond


def galerkin_extremal(spec: CurvatureSpectrum, q: int, degree: int,
                      harmonic_tol: float = DEFAULT_HARMONIC_TOL,
                      gram_cutoff: float = DEFAULT_GRAM_CUTOFF) -> GalerkinResult:
    """Finite-dimensional harmonic search; Bergman/extremal values at 0.

    Builds the candidate space of monomials times the negative-direction
    Gaussian up to total degree ``degree``, one rotation class per component
    index set, assembles Gram and Laplacian matrices through the exact moment
    algebra, and keeps the Ritz directions whose Rayleigh quotient is at most
    ``harmonic_tol`` relative to the largest quotient seen.  Because the
    energy form is |dbar u|^2 + |dbar_star u|^2, a zero Ritz value certifies a
    genuinely harmonic element, not merely a projected one.  Values are
    nondecreasing in ``degree`` on a fixed spectrum (nested spaces).
    """
    if classify_point(spec) == DEGENERATE:
        raise DegenerateSpectrum("Galerkin oracle needs a nondegenerate spectrum")
    if not (0 <= q <= spec.n):
        raise EmptySpace(f"no component sets of size {q} in dimension {spec.n}")
    if degree < 0:
        raise EmptySpace("candidate space empty for negative degree")
    weight = model_weight_of(spec)
    blocks = []
    max_rayleigh = 0.0
    worst_cond = 1.0
    for target in itertools.combinations(range(spec.n), q):
        basis, forms = _block_basis(spec.n, q, target, degree, weight)
        if not basis:
            raise EmptySpace(f"no candidate monomials for component {target}")
        gram, lap = _assemble_block(basis, forms, weight, degree)
        theta, vectors, cond = _solve_block(gram, lap, gram_cutoff)
        worst_cond = max(worst_cond, cond)
        max_rayleigh = max(max_rayleigh, float(theta.max(initial=0.0)))
        value_row = np.zeros(len(basis), dtype=complex)
        for idx, ((J, alpha, gamma), form) in enumerate(zip(basis, forms)):
            if J == target and not any(alpha) and not any(gamma):
                ((_, _, _), coeff), = form.terms.items()
                value_row[idx] = coeff
        blocks.append((target, theta, value_row @ vectors))
    tol_abs = harmonic_tol * max_rayleigh
    s_comp = {}
    dims = {}
    for target, theta, values in blocks:
        mask = theta <= tol_abs
        s_comp[target] = float(np.sum(np.abs(values[mask]) ** 2))
        dims[target] = int(np.count_nonzero(mask))
    bergman = float(sum(s_comp.values()))
    extremal = float(max(s_comp.values(), default=0.0))
    return GalerkinResult(q=q, degree=degree, S=extremal, S_by_component=s_comp,
                          B=bergman, harmonic_dims=dims,
                          max_rayleigh=max_rayleigh, gram_condition=worst_cond)


@dataclass
class SandwichReport:
    ok: bool
    S: float
    B: float
    sum_S_components: float
    slack: float

    def __bool__(self) -> bool:
        return self.ok


def sandwich_check(spec: CurvatureSpectrum, q: int, degree: int,
                   slack: float = 1e-9,
                   harmonic_tol: float = DEFAULT_HARMONIC_TOL) -> SandwichReport:
    """Verify S <= B <= sum_I S_I at the origin on the Galerkin subspace."""
    res = galerkin_extremal(spec, q, degree, harmonic_tol=harmonic_tol)
    total = res.sum_S_components
    ok = (res.S <= res.B + slack) and (res.B <= total + slack)
    return SandwichReport(ok=ok, S=res.S, B=res.B, sum_S_components=total,
                          slack=slack)
