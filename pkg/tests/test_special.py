import cmath
import math

import numpy as np
import pytest
import scipy.special as sc

from entangledyn.errors import BranchCutError
from entangledyn.special import (
    EULER_GAMMA,
    cauchy_derivative,
    digamma,
    distance_to_cuts,
    ln_up,
    log_gamma,
)


def off_cut_points(rng, n, lo=-6, hi=6):
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(lo, hi), rng.uniform(lo, hi))
        if distance_to_cuts(z) > 0.05:
            pts.append(z)
    return pts


class TestLogGamma:
    def test_values(self):
        assert abs(log_gamma(1.0)) < 1e-14
        assert abs(log_gamma(2.0)) < 1e-14
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-14)

    def test_principal_branch_right_half_plane(self, rng):
        for z in off_cut_points(rng, 50, 0.1, 20):
            assert log_gamma(z) == pytest.approx(complex(sc.loggamma(z)), abs=1e-12)

    def test_exponential_is_gamma(self, rng):
        for z in off_cut_points(rng, 50):
            assert cmath.exp(log_gamma(z)) == pytest.approx(complex(sc.gamma(z)), rel=1e-12)

    def test_recurrence(self, rng):
        for z in off_cut_points(rng, 50):
            if distance_to_cuts(z + 1) > 0.05:
                assert log_gamma(z + 1) == pytest.approx(log_gamma(z) + ln_up(z), abs=1e-12)

    def test_derivative_is_digamma(self, rng):
        h = 1e-6
        for z in off_cut_points(rng, 100):
            fd = (log_gamma(z + h) - log_gamma(z - h)) / (2 * h)
            assert abs(fd - digamma(z)) < 1e-6 * max(1.0, abs(digamma(z)))

    def test_rejects_cut(self):
        for z in (0.0, -2.0, -3 + 0.5j, 1e-14j):
            with pytest.raises(BranchCutError):
                log_gamma(z)

    def test_continuous_below_negative_axis(self):
        # crossing the real axis between poles is allowed; no jump
        path = [-2.5 + 1j * y for y in np.linspace(-1, -1e-3, 200)] + [-2.5 + 0j]
        path += [-2.5 + 1j * y for y in np.linspace(1e-3, 2, 200)]
        vals = [log_gamma(z) for z in path]
        for a, b, za, zb in zip(vals, vals[1:], path, path[1:]):
            assert abs(b - a) < 10 * abs(zb - za) * max(1.0, abs(digamma(za)))

    def test_vectorized(self):
        out = log_gamma(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out, [0, 0, math.log(2)], atol=1e-14)


class TestDigamma:
    def test_value_at_one(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-15)

    def test_recurrence_and_conjugation(self, rng):
        for z in off_cut_points(rng, 50):
            assert digamma(z + 1) == pytest.approx(digamma(z) + 1 / z, abs=1e-12)
            assert digamma(z.conjugate()) == pytest.approx(digamma(z).conjugate(), abs=1e-13)

    def test_matches_scipy(self, rng):
        for z in off_cut_points(rng, 50):
            assert digamma(z) == pytest.approx(complex(sc.psi(z)), abs=1e-12)

    def test_rejects_poles(self):
        with pytest.raises(BranchCutError):
            digamma(-3.0)


def test_ln_up_branch():
    assert ln_up(1j) == pytest.approx(1j * math.pi / 2)
    assert ln_up(-1 + 1e-300j) == pytest.approx(-1j * math.pi)
    assert ln_up(-1 - 1e-12j) == pytest.approx(-1j * math.pi, abs=1e-11)
    assert ln_up(2.0) == pytest.approx(math.log(2))


def test_cauchy_derivative():
    assert cauchy_derivative(cmath.exp, 0.3 + 0.2j, 0.1) == pytest.approx(cmath.exp(0.3 + 0.2j), rel=1e-13)
