"""Cutoff program: localized test forms, their energies, and decay bounds.

The model test form has unit norm but infinite support; multiplying by a
radial bump chi supported in the box of group-radius R produces a compactly
supported form whose norm tends to 1 and whose Laplacian energy tends to 0 as
R grows.  Because dbar and dbar_star both annihilate the test form, the energy
reduces exactly to first-derivative terms of the bump,

    energy = integral of |grad chi_R|^2-type factor times |beta|^2,

which is evaluated by radial quadrature, and is dominated by the explicit
Leibniz bound

    delta = sup|chi'|^2 / (2 R^2) * tail(beta, inner * R),

with the tail an exact incomplete-gamma evaluation.  The square root of delta
is the truncation threshold sequence used by the spectral checks downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureFailure
from .forms import ModelWeight, tail_norm
from .hermitian import CurvatureSpectrum, classify_point
from .kernels import beta_peak, model_test_form, model_weight_of


def _smoothstep_coeffs(k: int) -> np.polynomial.Polynomial:
    """The degree 2k+1 polynomial rising 0 -> 1 on [0, 1] with C^k junctions."""
    poly = np.polynomial.Polynomial([0.0])
    for i in range(k + 1):
        c = math.comb(k + i, i) * math.comb(2 * k + 1, k - i) * (-1) ** i
        poly = poly + c * np.polynomial.Polynomial([0.0, 1.0]) ** (k + 1 + i)
    return poly


def _poly_sup_abs(poly: np.polynomial.Polynomial) -> float:
    """sup of |poly| on [0, 1] via critical points."""
    candidates = [0.0, 1.0]
    for root in poly.deriv().roots():
        if abs(root.imag) < 1e-12 and 0.0 <= root.real <= 1.0:
            candidates.append(float(root.real))
    return max(abs(float(poly(t))) for t in candidates)


@dataclass(frozen=True)
class CutoffProfile:
    """Radial bump: 1 on [0, inner], 0 on [1, inf), C^smoothness in between.

    The transition is the unique degree 2*smoothness+1 polynomial matching
    the required derivatives at both junctions; the default smoothness 2
    gives the quintic bump.  Derivative sup norms are exposed because the
    analytic energy bound needs them explicitly.
    """

    inner: float = 0.5
    smoothness: int = 2

    def __post_init__(self):
        if not (0.0 < self.inner < 1.0):
            raise ValueError("inner radius fraction must lie in (0, 1)")
        if self.smoothness < 2:
            raise ValueError("bump must be at least C^2")
        step = _smoothstep_coeffs(self.smoothness)
        object.__setattr__(self, "_h", 1.0 - step)

    def _map(self, t):
        return (np.asarray(t, dtype=float) - self.inner) / (1.0 - self.inner)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        s = np.clip(self._map(t), 0.0, 1.0)
        return np.asarray(self._h(s), dtype=float)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        s = self._map(t)
        inside = (s > 0.0) & (s < 1.0)
        out = np.zeros_like(t)
        out[inside] = self._h.deriv(1)(s[inside]) / (1.0 - self.inner)
        return out

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        s = self._map(t)
        inside = (s > 0.0) & (s < 1.0)
        out = np.zeros_like(t)
        out[inside] = self._h.deriv(2)(s[inside]) / (1.0 - self.inner) ** 2
        return out

    @property
    def sup_d1(self) -> float:
        return _poly_sup_abs(self._h.deriv(1)) / (1.0 - self.inner)

    @property
    def sup_d2(self) -> float:
        return _poly_sup_abs(self._h.deriv(2)) / (1.0 - self.inner) ** 2


def _group_radial_rule(rates, R: float, inner: float, nodes: int):
    """Quadrature nodes/weights for one coordinate group on [0, R].

    For a group with equal Gaussian rates the integrand is radial in the
    group radius, so a single one-dimensional rule with the measure
    2 pi^g / (g-1)! * rho^(2g-1) e^{-c rho^2} suffices; pieces are split at
    the bump junctions so each panel is smooth.  Groups with distinct rates
    fall back to a per-coordinate tensor rule (handled by the caller).
    """
    g = len(rates)
    c = rates[0]
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    pts = []
    wts = []
    for lo, hi in ((0.0, inner * R), (inner * R, R)):
        half = (hi - lo) / 2
        mid = (hi + lo) / 2
        x = mid + half * gl_x
        w = half * gl_w
        pts.append(x)
        wts.append(w)
    rho = np.concatenate(pts)
    w = np.concatenate(wts)
    density = (2 * math.pi ** g / math.factorial(g - 1)) * rho ** (2 * g - 1) \
        * np.exp(-c * rho ** 2)
    return rho, w * density


def _grid_eval(spec: CurvatureSpectrum, R: float, profile: CutoffProfile,
               nodes: int):
    """(norm, energy) of the cut-off test form by grouped radial quadrature."""
    mus = [abs(float(v)) for v in spec.values]
    r = spec.r
    groups = [g for g in (tuple(range(r)), tuple(range(r, spec.n))) if g]
    rules = []
    for grp in groups:
        rates = [mus[i] for i in grp]
        if len(set(rates)) != 1:
            raise QuadratureFailure(
                "grouped radial quadrature needs equal decay rates inside "
                "each coordinate group")
        rules.append(_group_radial_rule(rates, R, profile.inner, nodes))
    peak = beta_peak(spec)
    if len(rules) == 1:
        rho, w = rules[0]
        chi = profile.value(rho / R)
        dchi = profile.d1(rho / R)
        norm = peak * float(np.sum(w * chi ** 2))
        energy = peak * float(np.sum(w * dchi ** 2)) / (4 * R * R)
        return norm, energy
    (r1, w1), (r2, w2) = rules
    chi1, chi2 = profile.value(r1 / R), profile.value(r2 / R)
    d1, d2 = profile.d1(r1 / R), profile.d1(r2 / R)
    joint = np.outer(w1, w2)
    norm = peak * float(np.sum(joint * np.outer(chi1 ** 2, chi2 ** 2)))
    grad_sq = np.outer(d1 ** 2, chi2 ** 2) + np.outer(chi1 ** 2, d2 ** 2)
    energy = peak * float(np.sum(joint * grad_sq)) / (4 * R * R)
    return norm, energy


@dataclass
class CutoffEnergy:
    R: float
    norm: float
    energy: float
    delta_bound: float

    @property
    def mu(self) -> float:
        """Truncation threshold sqrt(delta); delta/mu = sqrt(delta) -> 0."""
        return math.sqrt(self.delta_bound)


def cutoff_energy(spec: CurvatureSpectrum, q: int, R: float,
                  profile: CutoffProfile | None = None,
                  nodes: int = 64) -> CutoffEnergy:
    """Norm, energy and analytic bound for the cut-off test form at radius R.

    The spectrum must be negatives-first (the test-form convention) with the
    realized signature ``q``; the cutoff is the product of one bump per
    coordinate group, evaluated on piecewise Gauss-Legendre radial panels
    aligned with the bump junctions.  ``energy <= delta_bound`` holds
    analytically; refinement instability raises QuadratureFailure.
    """
    if R < 1:
        raise ValueError("cutoff radius must be at least 1")
    if classify_point(spec) != q:
        raise ValueError(f"spectrum realizes q={classify_point(spec)}, not {q}")
    profile = profile or CutoffProfile()
    norm, energy = _grid_eval(spec, R, profile, nodes)
    norm2, energy2 = _grid_eval(spec, R, profile, 2 * nodes)
    if abs(norm2 - norm) > 1e-6 * max(abs(norm2), 1e-14):
        raise QuadratureFailure(f"norm quadrature unstable: {norm} vs {norm2}")
    if abs(energy2 - energy) > 1e-6 * max(abs(energy2), 1e-12 * max(norm2, 1.0)):
        raise QuadratureFailure(f"energy quadrature unstable: {energy} vs {energy2}")
    beta = model_test_form(spec)
    weight = model_weight_of(spec)
    shell = tail_norm(beta, weight, profile.inner * R, split=spec.r)
    delta = profile.sup_d1 ** 2 / (2 * R * R) * shell
    return CutoffEnergy(R=float(R), norm=norm2, energy=energy2, delta_bound=delta)
