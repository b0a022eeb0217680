"""Cutoff profile and localized-energy program."""

from __future__ import annotations

import math

import numpy as np
import pytest

from morselab.cutoff import CutoffEnergy, CutoffProfile, cutoff_energy
from morselab.hermitian import CurvatureSpectrum

SPEC = CurvatureSpectrum((-2 * math.pi,), (2 * math.pi,))


def test_profile_plateau_and_support():
    chi = CutoffProfile()
    t = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5])
    v = chi.value(t)
    assert v[0] == v[1] == v[2] == 1.0
    assert 0.0 < v[3] < 1.0
    assert v[4] == v[5] == 0.0
    assert np.all((0.0 <= v) & (v <= 1.0))


def test_profile_c2_junctions():
    chi = CutoffProfile()
    eps = 1e-7
    for t0 in (0.5, 1.0):
        for f in (chi.value, chi.d1, chi.d2):
            left = f(t0 - eps)
            right = f(t0 + eps)
            assert abs(float(left) - float(right)) <= 1e-4


def test_profile_derivative_sups_quintic():
    chi = CutoffProfile()
    # transition h(s) = 1 - (10 s^3 - 15 s^4 + 6 s^5) on a half-width window
    assert chi.sup_d1 == pytest.approx((15 / 8) / 0.5, rel=1e-12)
    assert chi.sup_d2 == pytest.approx((10 / math.sqrt(3)) / 0.25, rel=1e-12)
    t = np.linspace(0, 1, 20001)
    assert np.max(np.abs(chi.d1(t))) <= chi.sup_d1 * (1 + 1e-9)
    assert np.max(np.abs(chi.d2(t))) <= chi.sup_d2 * (1 + 1e-9)


def test_profile_derivatives_match_finite_differences():
    chi = CutoffProfile()
    h = 1e-6
    for t0 in (0.55, 0.7, 0.9):
        fd1 = (chi.value(t0 + h) - chi.value(t0 - h)) / (2 * h)
        fd2 = (chi.value(t0 + h) - 2 * chi.value(t0) + chi.value(t0 - h)) / h ** 2
        assert float(fd1) == pytest.approx(float(chi.d1(t0)), rel=1e-6)
        assert float(fd2) == pytest.approx(float(chi.d2(t0)), rel=1e-3)


def test_norm_tends_to_one_energy_to_zero():
    results = [cutoff_energy(SPEC, 1, R) for R in (1.5, 2.5, 3.5)]
    norms = [r.norm for r in results]
    energies = [r.energy for r in results]
    assert norms[-1] >= 1 - 1e-6
    assert all(n <= 1 + 1e-12 for n in norms)
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert energies[-1] <= 1e-9


def test_energy_below_analytic_bound():
    for R in (1.0, 1.5, 2.0, 3.0):
        res = cutoff_energy(SPEC, 1, R)
        assert res.energy <= res.delta_bound


def test_energy_halves_when_radius_doubles():
    for R in (1.0, 1.5, 2.0):
        e1 = cutoff_energy(SPEC, 1, R).energy
        e2 = cutoff_energy(SPEC, 1, 2 * R).energy
        assert e2 <= e1 / 2


def test_threshold_sequence_vanishes():
    res = [cutoff_energy(SPEC, 1, math.log(m)) for m in (4, 10, 20)]
    mus = [r.mu for r in res]
    assert all(b < a for a, b in zip(mus, mus[1:]))
    for r in res:
        assert r.delta_bound / r.mu == pytest.approx(r.mu, rel=1e-12)


def test_wrong_signature_rejected():
    with pytest.raises(ValueError):
        cutoff_energy(SPEC, 0, 2.0)


def test_small_radius_rejected():
    with pytest.raises(ValueError):
        cutoff_energy(SPEC, 1, 0.5)


def test_grouped_three_dimensional_case():
    spec = CurvatureSpectrum((-1.5,), (2.0, 2.0))
    res = cutoff_energy(spec, 1, 4.0)
    assert res.norm == pytest.approx(1.0, abs=1e-3)
    assert res.energy <= res.delta_bound
