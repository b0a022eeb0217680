"""Anisotropic scaling machinery: weight jets, split metrics, convergence sups.

The localization argument rescales the first r coordinates by 1/sqrt(k) and
the rest by 1/sqrt(l), multiplies the two potential jets by k and l, and
watches everything converge to the flat model: the scaled combined weight to
the quadratic gamma_0, the pulled-back metric coefficients to the identity.
This module represents jets exactly as polynomials in (z, zbar), performs the
scaling substitution exactly, and measures sup-norm deviations on refining
grids.  The only inequality imported from the geometry is the structural
constraint on the cubic remainder of the first potential: each cubic monomial
must touch the first r coordinates at least twice, which is what makes the
k-scaled remainder vanish in the limit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import GridTooCoarse, NonPositiveMetric


def _pow_exact(base: int, expo: Fraction):
    """base**expo, exact (int or Fraction) for integer exponents."""
    if expo == 0:
        return 1
    if expo.denominator == 1:
        p = expo.numerator
        return base ** p if p > 0 else Fraction(1, base ** (-p))
    return float(base) ** float(expo)

# ------------------------------------------------------------------ ZPoly


class ZPoly:
    """Polynomial in (z, zbar) on C^n: finite map (alpha, gamma) -> coeff."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms = {}
        for (alpha, gamma), c in (terms or {}).items():
            if c == 0:
                continue
            alpha, gamma = tuple(alpha), tuple(gamma)
            if len(alpha) != n or len(gamma) != n:
                raise ValueError("exponent tuples must have length n")
            self.terms[(alpha, gamma)] = self.terms.get((alpha, gamma), 0) + c

    def __add__(self, other: "ZPoly") -> "ZPoly":
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return ZPoly(self.n, out)

    def __mul__(self, scalar) -> "ZPoly":
        return ZPoly(self.n, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other: "ZPoly") -> "ZPoly":
        return self + other * (-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_real(self, tol: float = 0.0) -> bool:
        """Whether the polynomial is real-valued: c(alpha,gamma) = conj(c(gamma,alpha))."""
        for (alpha, gamma), c in self.terms.items():
            mirror = self.terms.get((gamma, alpha), 0)
            if abs(np.conj(complex(mirror)) - complex(c)) > tol:
                return False
        return True

    def deriv(self, i: int, bar: bool) -> "ZPoly":
        out = {}
        for (alpha, gamma), c in self.terms.items():
            e = gamma if bar else alpha
            if e[i] == 0:
                continue
            new = list(e)
            new[i] -= 1
            key = (alpha, tuple(new)) if bar else (tuple(new), gamma)
            out[key] = out.get(key, 0) + c * e[i]
        return ZPoly(self.n, out)

    def scaled(self, k: int, l: int, r: int, k_power: "Fraction" = None,
               l_power: "Fraction" = None) -> "ZPoly":
        """Substitute z' -> z'/sqrt(k), z'' -> z''/sqrt(l) per monomial.

        Optional extra powers of k and l are folded into the same factor so
        integer net exponents are evaluated exactly (no rounding); a monomial
        whose net factor is 1 keeps its coefficient bit-for-bit.
        """
        k_power = k_power if k_power is not None else Fraction(0)
        l_power = l_power if l_power is not None else Fraction(0)
        out = {}
        for (alpha, gamma), c in self.terms.items():
            deg_fast = sum(alpha[i] + gamma[i] for i in range(r))
            deg_slow = sum(alpha[i] + gamma[i] for i in range(r, self.n))
            factor = _pow_exact(k, k_power - Fraction(deg_fast, 2)) \
                * _pow_exact(l, l_power - Fraction(deg_slow, 2))
            if factor == 1:
                out[(alpha, gamma)] = c
            else:
                out[(alpha, gamma)] = c * factor
        return ZPoly(self.n, out)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for (alpha, gamma), c in self.terms.items():
            mono = np.ones(z.shape[:-1], dtype=complex)
            for i in range(self.n):
                if alpha[i]:
                    mono = mono * z[..., i] ** alpha[i]
                if gamma[i]:
                    mono = mono * np.conj(z[..., i]) ** gamma[i]
            out = out + complex(c) * mono
        return out


def hermitian_pair_poly(n: int, i: int, j: int, coeff) -> ZPoly:
    """The real polynomial coeff * z_i zbar_j + conj(coeff) * zbar_i z_j."""
    ei = tuple(1 if t == i else 0 for t in range(n))
    ej = tuple(1 if t == j else 0 for t in range(n))
    terms = {(ei, ej): coeff}
    other = (ej, ei)
    terms[other] = terms.get(other, 0) + np.conj(complex(coeff))
    return ZPoly(n, terms)

# --------------------------------------------------------------- scaling


def r_scale(k: int, l: int) -> float:
    """Localization radius log min(k/l, l)."""
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive integers")
    return math.log(min(k / l, l))


@dataclass(frozen=True)
class WeightJet:
    """Order-3 Taylor data of the two potentials around a point.

    ``lambdas`` and ``nus`` are the diagonal quadratic coefficients of the
    fast and slow potentials; ``mixed`` holds the slow potential's Hermitian
    cross terms keyed (i, j) with i < r (each contributing
    nu_ij z_i zbar_j + conjugate); the two cubics are homogeneous degree-3
    real polynomials carrying the remainders exactly.  Every cubic monomial
    of the fast potential must involve the first r coordinates (z or zbar)
    at least twice; that constraint is what keeps the k-scaled remainder of
    order 1/(k sqrt(l)) and is validated here.
    """

    n: int
    r: int
    lambdas: tuple
    nus: tuple
    mixed: dict = field(default_factory=dict)
    phi_cubic: ZPoly | None = None
    psi_cubic: ZPoly | None = None

    def __post_init__(self):
        if not (1 <= self.r <= self.n):
            raise ValueError("need 1 <= r <= n")
        if len(self.lambdas) != self.r or len(self.nus) != self.n - self.r:
            raise ValueError("quadratic coefficient lengths must match (r, n-r)")
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "nus", tuple(self.nus))
        for (i, j) in self.mixed:
            if not (0 <= i < self.r) or not (0 <= j < self.n) or i == j:
                raise ValueError(f"mixed key {(i, j)} must pair a fast index "
                                 "with a distinct index")
        for name, cubic in (("phi", self.phi_cubic), ("psi", self.psi_cubic)):
            if cubic is None:
                continue
            if cubic.n != self.n or not cubic.is_real(tol=1e-12):
                raise ValueError(f"{name} cubic must be a real polynomial on C^n")
            for (alpha, gamma) in cubic.terms:
                if sum(alpha) + sum(gamma) != 3:
                    raise ValueError(f"{name} cubic must be homogeneous of degree 3")
                if name == "phi":
                    fast = sum(alpha[i] + gamma[i] for i in range(self.r))
                    if fast < 2:
                        raise ValueError(
                            "fast-potential cubic monomials must touch the "
                            "first r coordinates at least twice")

    def gamma0(self) -> ZPoly:
        terms = {}
        for i, lam in enumerate(self.lambdas):
            e = tuple(1 if t == i else 0 for t in range(self.n))
            terms[(e, e)] = lam
        for j, nu in enumerate(self.nus):
            e = tuple(1 if t == j + self.r else 0 for t in range(self.n))
            terms[(e, e)] = nu
        return ZPoly(self.n, terms)

    def phi(self) -> ZPoly:
        terms = {}
        for i, lam in enumerate(self.lambdas):
            e = tuple(1 if t == i else 0 for t in range(self.n))
            terms[(e, e)] = lam
        out = ZPoly(self.n, terms)
        if self.phi_cubic is not None:
            out = out + self.phi_cubic
        return out

    def psi(self) -> ZPoly:
        terms = {}
        for j, nu in enumerate(self.nus):
            e = tuple(1 if t == j + self.r else 0 for t in range(self.n))
            terms[(e, e)] = nu
        out = ZPoly(self.n, terms)
        for (i, j), coeff in self.mixed.items():
            out = out + hermitian_pair_poly(self.n, i, j, coeff)
        if self.psi_cubic is not None:
            out = out + self.psi_cubic
        return out


def scaled_weights(jet: WeightJet, k: int, l: int) -> ZPoly:
    """k * phi(z'/sqrt k, z''/sqrt l) + l * psi(same), exact on the jet.

    The k and l multipliers are folded into the per-monomial scale factors,
    so monomials with net factor 1 (the diagonal quadratic parts) keep their
    coefficients exactly and a quadratic diagonal jet reproduces gamma_0
    coefficientwise.
    """
    phi_part = jet.phi().scaled(k, l, jet.r, k_power=Fraction(1))
    psi_part = jet.psi().scaled(k, l, jet.r, l_power=Fraction(1))
    return phi_part + psi_part

# ---------------------------------------------------------------- grids


def _polydisc_grid(n: int, radius: float, n_rad: int, n_ang: int) -> np.ndarray:
    """Deterministic tensor grid on the polydisc |z_i| <= radius.

    One complex coordinate is sampled on rings (plus the origin); the tensor
    product covers the polydisc, which contains the group-radius box, so the
    reported sups are conservative for it.
    """
    rho = np.linspace(0.0, radius, n_rad + 1)[1:]
    theta = np.arange(n_ang) * (2 * math.pi / n_ang)
    ring = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    axis = np.concatenate([[0.0 + 0.0j], ring])
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass
class SupResult:
    value: float
    coarse: float

    def __float__(self) -> float:
        return self.value


def _deriv_family(poly: ZPoly, order: int):
    if order == 0:
        return [poly]
    out = []
    dirs = [(i, bar) for i in range(poly.n) for bar in (False, True)]
    for combo in itertools.product(dirs, repeat=order):
        p = poly
        for (i, bar) in combo:
            p = p.deriv(i, bar)
        out.append(p)
    return out


def _sup_on_grid(polys, n: int, radius: float, n_rad: int, n_ang: int) -> float:
    if radius <= 0:
        pts = np.zeros((1, n), dtype=complex)
    else:
        pts = _polydisc_grid(n, radius, n_rad, n_ang)
    best = 0.0
    for p in polys:
        if p.is_zero():
            continue
        best = max(best, float(np.max(np.abs(p(pts)))))
    return best


def _refined_sup(polys, n: int, radius: float, n_rad: int, n_ang: int) -> SupResult:
    coarse = _sup_on_grid(polys, n, radius, n_rad, n_ang)
    fine = _sup_on_grid(polys, n, radius, 2 * n_rad, 2 * n_ang)
    if fine > 0 and abs(fine - coarse) > 0.10 * fine:
        raise GridTooCoarse(f"sup changed {coarse} -> {fine} under refinement")
    return SupResult(value=fine, coarse=coarse)


def deviation_sup(jet: WeightJet, k: int, l: int, order: int = 0,
                  n_rad: int = 8, n_ang: int = 16) -> SupResult:
    """Sup over the scaled box of |d^order (scaled weights - gamma_0)|.

    Order 1 and 2 run over all Wirtinger directions and pairs.  The sup is
    exact (zero) for purely quadratic diagonal jets; otherwise it is a grid
    maximum with a one-step refinement guard.
    """
    if order not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    diff = scaled_weights(jet, k, l) - jet.gamma0()
    polys = _deriv_family(diff, order)
    return _refined_sup(polys, jet.n, r_scale(k, l), n_rad, n_ang)

# --------------------------------------------------------------- metrics


@dataclass(frozen=True)
class SplitMetric:
    """Two Hermitian coefficient blocks with identity values at the center.

    ``eta`` maps (i, j) with i, j < r to the ZPoly coefficient of
    dz_i dzbar_j; ``zeta`` likewise on the complementary indices.  Only the
    upper triangle including the diagonal needs to be given; the conjugate
    entries are implied.  Entries may depend on all coordinates.
    """

    n: int
    r: int
    eta: dict
    zeta: dict

    def __post_init__(self):
        zero = np.zeros((1, self.n), dtype=complex)
        for name, block, lo, hi in (("eta", self.eta, 0, self.r),
                                    ("zeta", self.zeta, self.r, self.n)):
            for d in range(lo, hi):
                if (d, d) not in block:
                    raise ValueError(f"{name} must provide its diagonal entry {d}")
            for (i, j), entry in block.items():
                if not (lo <= i <= j < hi):
                    raise ValueError(f"{name} entry {(i, j)} outside its block "
                                     "upper triangle")
                v = complex(entry(zero)[0])
                want = 1.0 if i == j else 0.0
                if abs(v - want) > 1e-12:
                    raise ValueError(f"{name} must be the identity at the center")

    def coefficient(self, i: int, j: int) -> ZPoly:
        block = self.eta if max(i, j) < self.r else self.zeta
        if (i, j) in block:
            return block[(i, j)]
        if (j, i) in block:
            p = block[(j, i)]
            return ZPoly(self.n, {(g, a): np.conj(complex(c))
                                  for (a, g), c in p.terms.items()})
        raise KeyError((i, j))

    def matrix_at(self, pts: np.ndarray, k: int = 1, l: int = 1) -> np.ndarray:
        """Stacked Hermitian matrices k*eta + l*zeta at the given points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=complex))
        m = np.zeros(pts.shape[:-1] + (self.n, self.n), dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                same_block = (i < self.r) == (j < self.r)
                if not same_block:
                    continue
                scale = k if i < self.r else l
                try:
                    m[..., i, j] = scale * self.coefficient(i, j)(pts)
                except KeyError:
                    pass
        return m


def identity_metric(n: int, r: int) -> SplitMetric:
    one = {(i, i): ZPoly(n, {((0,) * n, (0,) * n): 1.0}) for i in range(r)}
    two = {(i, i): ZPoly(n, {((0,) * n, (0,) * n): 1.0}) for i in range(r, n)}
    return SplitMetric(n=n, r=r, eta=one, zeta=two)


def metric_deviation_sup(metric: SplitMetric, k: int, l: int, order: int = 0,
                         n_rad: int = 8, n_ang: int = 16) -> SupResult:
    """Sup of the pulled-back metric coefficients minus the identity.

    Pulling back k*eta + l*zeta by the scaling map multiplies dz_i by
    1/sqrt(k) or 1/sqrt(l), which exactly cancels the k and l prefactors
    blockwise; what remains is each coefficient evaluated along the shrinking
    argument, so the deviation is coefficient(scaled z) - delta_ij.
    """
    if order not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    n = metric.n
    polys = []
    const_one = ZPoly(n, {((0,) * n, (0,) * n): 1.0})
    for i in range(n):
        for j in range(n):
            if (i < metric.r) != (j < metric.r):
                continue
            try:
                entry = metric.coefficient(i, j).scaled(k, l, metric.r)
            except KeyError:
                continue
            if i == j:
                entry = entry - const_one
            polys.extend(_deriv_family(entry, order))
    return _refined_sup(polys, n, r_scale(k, l), n_rad, n_ang)


def volume_identity_check(metric: SplitMetric, k: int, l: int,
                          points: np.ndarray) -> float:
    """Max relative error of det(k eta + l zeta) = k^r l^(n-r) det(eta + zeta).

    Checked pointwise through top-wedge determinants; the identity is exact
    algebra, so the only error is floating-point.  Raises NonPositiveMetric
    if a sample point leaves the positivity domain.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    scaled = metric.matrix_at(pts, k, l)
    base = metric.matrix_at(pts, 1, 1)
    eigs = np.linalg.eigvalsh(base)
    if np.min(eigs) <= 0:
        raise NonPositiveMetric("metric not positive at a sample point")
    lhs = np.linalg.det(scaled).real
    rhs = float(k) ** metric.r * float(l) ** (metric.n - metric.r) \
        * np.linalg.det(base).real
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))

# -------------------------------------------------- norm localization


def _masked_box_points(n: int, r: int, radius: float, n_rad: int, n_ang: int):
    """Polar tensor points restricted to both group balls, with weights."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_rad)
    rho = 0.5 * radius * (gl_x + 1.0)
    rw = 0.5 * radius * gl_w * rho * (2 * math.pi / n_ang)
    theta = np.arange(n_ang) * (2 * math.pi / n_ang)
    ring = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    ringw = np.repeat(rw, n_ang)
    axes = [ring] * n
    wts = [ringw] * n
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    weight = np.ones(pts.shape[0])
    for w_axis, idx in zip(np.meshgrid(*wts, indexing="ij"), range(n)):
        weight = weight * w_axis.ravel()
    rad_fast = np.sqrt(np.sum(np.abs(pts[:, :r]) ** 2, axis=1))
    rad_slow = np.sqrt(np.sum(np.abs(pts[:, r:]) ** 2, axis=1)) if r < n else \
        np.zeros(pts.shape[0])
    mask = (rad_fast <= radius) & (rad_slow <= radius)
    return pts[mask], weight[mask]


def _component_minors(inv: np.ndarray, q: int):
    """q-th compound matrices of the inverse metric, per index-set pair."""
    n = inv.shape[-1]
    sets = list(itertools.combinations(range(n), q))
    out = {}
    for I in sets:
        for J in sets:
            if q == 0:
                out[(I, J)] = np.ones(inv.shape[:-2])
            elif q == 1:
                out[(I, J)] = inv[..., I[0], J[0]]
            else:
                out[(I, J)] = np.linalg.det(inv[..., I, :][..., :, J])
    return sets, out


def norm_localization_ratio(form, jet: WeightJet, k: int, l: int,
                            metric: SplitMetric | None = None,
                            n_rad: int = 24, n_ang: int = 12) -> float:
    """Weighted-norm ratio on the scaled box: scaled data over flat model.

    Numerator: the squared norm of the form against the scaled weights and
    (optionally) the pulled-back metric, including its volume density;
    denominator: the same form against gamma_0 and the flat metric, over the
    same box.  For a purely quadratic diagonal jet with flat metric the two
    integrands coincide and the ratio is exactly 1; generically it tends to 1
    along admissible scaling sequences.
    """
    radius = r_scale(k, l)
    if radius <= 0:
        raise ValueError("scaled box is empty; pick k, l with r_scale > 0")
    pts, wts = _masked_box_points(jet.n, jet.r, radius, n_rad, n_ang)
    comps = form.evaluate(pts)
    w_scaled = scaled_weights(jet, k, l)(pts).real
    w_flat = jet.gamma0()(pts).real
    flat_density = sum(np.abs(v) ** 2 for v in comps.values())
    den = float(np.sum(flat_density * np.exp(-w_flat) * wts))
    if metric is None:
        num = float(np.sum(flat_density * np.exp(-w_scaled) * wts))
        return num / den
    # pulled-back k*eta + l*zeta has blockwise-cancelled prefactors but a
    # shrunken argument
    h = metric.matrix_at(pts / np.concatenate(
        [np.full(jet.r, math.sqrt(k)), np.full(jet.n - jet.r, math.sqrt(l))]), 1, 1)
    inv = np.linalg.inv(h)
    det = np.linalg.det(h).real
    sets, minors = _component_minors(inv, form.q)
    density = np.zeros(pts.shape[0])
    for I in sets:
        for J in sets:
            if I in comps and J in comps:
                density = density + (comps[I] * np.conj(comps[J])
                                     * minors[(I, J)]).real
    num = float(np.sum(density * det * np.exp(-w_scaled) * wts))
    return num / den
