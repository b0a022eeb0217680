"""Gaussian form algebra: operators, inner products, tails, and their oracles."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from morselab.errors import DegreeMismatch, NonIntegrable, TopDegree
from morselab.forms import (
    GaussPolyForm,
    ModelWeight,
    dbar,
    dbar_star,
    inner_product,
    inner_product_exact,
    laplacian,
    monomial_form,
    norm_sq,
    tail_norm,
    zero_form,
)

# ---------------------------------------------------------------- oracles


def wirtinger_bar_fd(func, w, j, h=1e-5):
    """Finite-difference d/dwbar_j of a scalar function on C^n."""
    ej = np.zeros_like(w)
    ej[j] = 1.0
    dx = (func(w + h * ej) - func(w - h * ej)) / (2 * h)
    dy = (func(w + 1j * h * ej) - func(w - 1j * h * ej)) / (2 * h)
    return (dx + 1j * dy) / 2


def quad_inner_product(f, g, weight, rmax=8.0, nr=60, nt=24):
    """Polar tensor quadrature oracle for the weighted pairing, n <= 2."""
    n = f.n
    rho_nodes, rho_w = np.polynomial.legendre.leggauss(nr)
    rho = 0.5 * rmax * (rho_nodes + 1.0)
    rw = 0.5 * rmax * rho_w
    theta = np.arange(nt) * (2 * np.pi / nt)
    tw = 2 * np.pi / nt
    pts_1d = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    wts_1d = np.repeat(rw * rho * tw, nt)
    if n == 1:
        pts = pts_1d[:, None]
        wts = wts_1d
    elif n == 2:
        pts = np.stack(
            [np.repeat(pts_1d, pts_1d.size), np.tile(pts_1d, pts_1d.size)], axis=-1)
        wts = np.repeat(wts_1d, wts_1d.size) * np.tile(wts_1d, wts_1d.size)
    else:
        raise NotImplementedError
    fv = f.evaluate(pts)
    gv = g.evaluate(pts)
    dens = np.exp(-sum(float(m) * np.abs(pts[:, i]) ** 2
                       for i, m in enumerate(weight.mu)))
    out = 0j
    for I, vals in fv.items():
        if I in gv:
            out += np.sum(vals * np.conj(gv[I]) * dens * wts)
    return complex(out)


def random_form(rng, n, q, weight, nterms=4, max_deg=3, gaussian=False):
    a = tuple(float(m) if (gaussian and m < 0) else 0.0 for m in weight.mu)
    terms = {}
    combos = [tuple(sorted(rng.choice(n, size=q, replace=False))) if q else ()
              for _ in range(nterms)]
    for I in combos:
        alpha = tuple(int(x) for x in rng.integers(0, max_deg + 1, size=n))
        gamma = tuple(int(x) for x in rng.integers(0, max_deg + 1, size=n))
        c = complex(rng.normal(), rng.normal())
        terms[(I, alpha, gamma)] = terms.get((I, alpha, gamma), 0) + c
    return GaussPolyForm(n, q, a, terms)


def random_rational_form(rng, n, q, weight, nterms=4, max_deg=3):
    """Random form with Fraction coefficients and the weight's negative Gaussian."""
    a = tuple(m if m < 0 else Fraction(0) for m in weight.mu)
    terms = {}
    for _ in range(nterms):
        I = tuple(sorted(rng.choice(n, size=q, replace=False))) if q else ()
        alpha = tuple(int(x) for x in rng.integers(0, max_deg + 1, size=n))
        gamma = tuple(int(x) for x in rng.integers(0, max_deg + 1, size=n))
        c = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 8)))
        terms[(I, alpha, gamma)] = terms.get((I, alpha, gamma), 0) + c
    return GaussPolyForm(n, q, a, terms)


def random_rational_weight(rng, n):
    return ModelWeight(tuple(
        Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 4)))
        * int(rng.choice([-1, 1])) for _ in range(n)))


WEIGHT2 = ModelWeight((1.5, 2.0))
WEIGHT2M = ModelWeight((-1.0, 2.0))

# ---------------------------------------------------------------- dbar


def test_dbar_constant_vanishes():
    f = monomial_form(2, (), (0, 0), (0, 0))
    assert dbar(f).is_zero()


def test_dbar_of_wbar_is_basis_form():
    f = monomial_form(1, (), (0,), (1,))
    out = dbar(f)
    assert out.terms == {((0,), (0,), (0,)): 1}


def test_dbar_gaussian_chain_rule():
    lam = 0.7
    f = GaussPolyForm(1, 0, (lam,), {((), (0,), (0,)): 1.0})
    out = dbar(f)
    assert out.terms == {((0,), (1,), (0,)): lam}


def test_dbar_matches_finite_differences():
    rng = np.random.default_rng(20)
    f = random_form(rng, 2, 0, WEIGHT2, gaussian=False)
    out = dbar(f)

    def scalar(w):
        return f.evaluate(w)[()]

    for _ in range(5):
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        vals = out.evaluate(w)
        for j in range(2):
            got = vals.get((j,), 0.0)
            want = wirtinger_bar_fd(scalar, w, j)
            assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_dbar_wedge_signs_on_one_forms():
    rng = np.random.default_rng(21)
    g = random_form(rng, 2, 0, WEIGHT2)
    h = random_form(rng, 2, 0, WEIGHT2)
    f = GaussPolyForm(2, 1, g.a, {})
    f = f + GaussPolyForm(2, 1, g.a, {((0,),) + k[1:]: c for k, c in g.terms.items()})
    f = f + GaussPolyForm(2, 1, h.a, {((1,),) + k[1:]: c for k, c in h.terms.items()})
    out = dbar(f)

    def g_scalar(w):
        return g.evaluate(w)[()]

    def h_scalar(w):
        return h.evaluate(w)[()]

    for _ in range(4):
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        got = out.evaluate(w).get((0, 1), 0.0)
        want = wirtinger_bar_fd(h_scalar, w, 0) - wirtinger_bar_fd(g_scalar, w, 1)
        assert abs(got - want) <= 1e-7 * max(1.0, abs(want))


def test_dbar_top_degree_raises():
    f = monomial_form(1, (0,), (0,), (0,))
    with pytest.raises(TopDegree):
        dbar(f)


def test_dbar_squares_to_zero():
    rng = np.random.default_rng(22)
    for _ in range(200):
        n = int(rng.integers(2, 4))
        q = int(rng.integers(0, n - 1))
        w = random_rational_weight(rng, n)
        f = random_rational_form(rng, n, q, w)
        assert dbar(dbar(f)).is_zero()


def test_dbar_star_squares_to_zero():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = int(rng.integers(2, 4))
        q = int(rng.integers(2, n + 1))
        w = random_rational_weight(rng, n)
        f = random_rational_form(rng, n, q, w)
        assert dbar_star(dbar_star(f, w), w).is_zero()


def test_operator_squares_near_zero_in_floats():
    # with float coefficients the pairwise cancellations agree to the last ulp
    rng = np.random.default_rng(30)
    for _ in range(50):
        n = int(rng.integers(2, 4))
        mu = tuple(rng.uniform(0.5, 3.0, size=n) * rng.choice([-1, 1], size=n))
        w = ModelWeight(mu)
        f = random_form(rng, n, 0, w, gaussian=True)
        dd = dbar(dbar(f))
        residue = max((abs(c) for c in dd.terms.values()), default=0.0)
        assert residue <= 1e-13

# ---------------------------------------------------------------- adjoint


def test_dbar_star_on_functions_is_zero():
    f = monomial_form(2, (), (1, 0), (0, 2))
    out = dbar_star(f, WEIGHT2)
    assert out.is_zero() and out.q == 0


def test_adjointness_random_pairs():
    rng = np.random.default_rng(24)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        q = int(rng.integers(0, n))
        mu = tuple(rng.uniform(0.5, 3.0, size=n) * rng.choice([-1, 1], size=n))
        w = ModelWeight(mu)
        u = random_form(rng, n, q, w, gaussian=True)
        v = random_form(rng, n, q + 1, w, gaussian=True)
        lhs = inner_product(dbar(u), v, w)
        rhs = inner_product(u, dbar_star(v, w), w)
        scale = math.sqrt(norm_sq(u, w) * norm_sq(v, w)) + 1e-30
        assert abs(lhs - rhs) <= 1e-10 * scale


def test_dbar_star_requires_integrability():
    f = monomial_form(1, (0,), (0,), (0,), a=(1.0,))
    with pytest.raises(NonIntegrable):
        dbar_star(f, ModelWeight((1.0,)))

# ---------------------------------------------------------------- laplacian


def test_laplacian_of_constant_positive_weight():
    f = monomial_form(2, (), (0, 0), (0, 0))
    assert laplacian(f, WEIGHT2).is_zero()


def test_laplacian_wbar_eigenfunction():
    mu = ModelWeight((1.5, 2.0))
    f = monomial_form(2, (), (0, 0), (1, 0))
    out = laplacian(f, mu)
    assert out.terms == {((), (0, 0), (1, 0)): 1.5}


def test_laplacian_self_adjoint_and_nonnegative():
    rng = np.random.default_rng(25)
    for _ in range(40):
        n = int(rng.integers(1, 3))
        q = int(rng.integers(0, n + 1))
        mu = tuple(rng.uniform(0.5, 3.0, size=n) * rng.choice([-1, 1], size=n))
        w = ModelWeight(mu)
        f = random_form(rng, n, q, w, gaussian=True)
        g = random_form(rng, n, q, w, gaussian=True)
        lhs = inner_product(laplacian(f, w), g, w)
        rhs = inner_product(f, laplacian(g, w), w)
        scale = math.sqrt(norm_sq(f, w) * norm_sq(g, w)) + 1e-30
        assert abs(lhs - rhs) <= 1e-9 * scale
        energy = inner_product(laplacian(f, w), f, w).real
        assert energy >= -1e-12 * norm_sq(f, w)


def test_laplacian_energy_matches_first_order_route():
    rng = np.random.default_rng(26)
    for _ in range(30):
        n = int(rng.integers(1, 3))
        q = int(rng.integers(0, n + 1))
        mu = tuple(rng.uniform(0.5, 3.0, size=n) * rng.choice([-1, 1], size=n))
        w = ModelWeight(mu)
        f = random_form(rng, n, q, w, gaussian=True)
        via_lap = inner_product(laplacian(f, w), f, w).real
        energy = 0.0
        if q < n:
            energy += norm_sq(dbar(f), w)
        if q > 0:
            energy += norm_sq(dbar_star(f, w), w)
        assert abs(via_lap - energy) <= 1e-9 * max(1.0, energy)


def test_laplacian_rayleigh_quotient_against_quadrature():
    rng = np.random.default_rng(27)
    w = ModelWeight((1.25, 2.5))
    f = random_form(rng, 2, 1, w, max_deg=2)
    sym = inner_product(laplacian(f, w), f, w).real
    quad = 0.0
    quad += quad_inner_product(dbar(f), dbar(f), w).real
    quad += quad_inner_product(dbar_star(f, w), dbar_star(f, w), w).real
    assert abs(sym - quad) <= 1e-7 * max(1.0, abs(sym))

# ---------------------------------------------------------------- products


def test_component_orthogonality():
    f = monomial_form(2, (0,), (0, 0), (1, 0))
    g = monomial_form(2, (1,), (0, 0), (0, 0))
    assert inner_product(f, g, WEIGHT2) == 0


def test_inner_product_against_quadrature():
    rng = np.random.default_rng(28)
    for n in (1, 2):
        mu = tuple(rng.uniform(1.0, 2.5, size=n))
        w = ModelWeight(mu)
        for _ in range(5):
            q = int(rng.integers(0, n + 1))
            f = random_form(rng, n, q, w, max_deg=2)
            g = random_form(rng, n, q, w, max_deg=2)
            exact = inner_product(f, g, w)
            approx = quad_inner_product(f, g, w)
            scale = max(1.0, abs(exact))
            assert abs(exact - approx) <= 1e-8 * scale


def test_inner_product_exact_rational():
    w = ModelWeight((Fraction(2), Fraction(3)))
    f = monomial_form(2, (), (1, 0), (1, 0), coeff=Fraction(1, 2))
    val = inner_product_exact(f, f, w)
    # |w_0|^2 moment against rate 2 gives 1!/2^2, and 1/3 from the second factor
    assert val == Fraction(1, 4) * Fraction(1, 4) * Fraction(1, 3)
    assert abs(inner_product(f, f, w) - float(val) * math.pi ** 2) <= 1e-15


def test_inner_product_mismatch_raises():
    f = monomial_form(2, (), (0, 0), (0, 0))
    g = monomial_form(2, (0,), (0, 0), (0, 0))
    with pytest.raises(DegreeMismatch):
        inner_product(f, g, WEIGHT2)


def test_non_integrable_raises():
    f = monomial_form(1, (), (0,), (0,), a=(-0.4,))
    with pytest.raises(NonIntegrable):
        inner_product(f, f, ModelWeight((-1.0,)))

# ---------------------------------------------------------------- tails


def test_tail_norm_at_zero_radius_is_full_norm():
    rng = np.random.default_rng(29)
    w = ModelWeight((1.0, 2.0))
    f = random_form(rng, 2, 1, w, max_deg=2)
    assert tail_norm(f, w, 0.0) == pytest.approx(norm_sq(f, w), rel=1e-12)


def test_tail_norm_gaussian_decay_rate():
    w = ModelWeight((1.0, 2.0))
    f = monomial_form(2, (0,), (0, 0), (0, 0))
    c = 1.0  # smallest decay rate
    for R in (2.0, 2.5, 3.0):
        ratio = tail_norm(f, w, R + 1) / tail_norm(f, w, R)
        assert ratio <= math.exp(-c)


def test_tail_norm_monotone_to_zero():
    w = ModelWeight((1.0, 2.0))
    f = monomial_form(2, (0,), (1, 0), (0, 1))
    vals = [tail_norm(f, w, R) for R in (0.0, 1.0, 2.0, 4.0, 6.0)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 1e-10 * vals[0]


def test_tail_norm_split_groups_against_quadrature():
    # two coordinates in one group with distinct decay rates: quadrature oracle
    w = ModelWeight((1.0, 2.0))
    f = monomial_form(2, (), (1, 0), (1, 0))
    R = 1.5
    got = tail_norm(f, w, R, split=2)

    nr = 600
    edges = np.linspace(0, 8.0, nr + 1)
    rho = (edges[:-1] + edges[1:]) / 2
    dr = edges[1] - edges[0]
    r1, r2 = np.meshgrid(rho, rho, indexing="ij")
    integrand = (r1 ** 4) * np.exp(-1.0 * r1 ** 2 - 2.0 * r2 ** 2)
    measure = (2 * np.pi) ** 2 * r1 * r2 * dr * dr
    outside = (r1 ** 2 + r2 ** 2) >= R ** 2
    want = float(np.sum(integrand * measure * outside))
    assert got == pytest.approx(want, rel=5e-4)


def test_tail_norm_per_coordinate_groups_exact():
    # singleton groups against the closed-form complement of a product of discs
    w = ModelWeight((1.0, 2.0))
    f = monomial_form(2, (), (0, 0), (0, 0))
    R = 1.2
    got = tail_norm(f, w, R)
    full = math.pi / 1.0 * math.pi / 2.0
    box = (math.pi / 1.0) * (1 - math.exp(-R * R)) * (math.pi / 2.0) * (
        1 - math.exp(-2 * R * R))
    assert got == pytest.approx(full - box, rel=1e-12)
