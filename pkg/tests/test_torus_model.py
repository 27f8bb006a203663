import math

import numpy as np
import pytest

from algdyn.coeff_window import TorusConfiguration, WindowFunction
from algdyn.errors import NotWellBalanced, WindowTooSmall
from algdyn.group_ring import GroupRingElement
from algdyn.inverse_engine import best_inverse, invert_spectral
from algdyn.torus_model import (
    decay_profile,
    fixed_constant_points,
    fundamental_homoclinic,
    fundamental_homoclinic_checked,
    homoclinic_point,
    maximum_principle_check,
    membership_defect,
    membership_defect_dense,
    sample_dense_points,
)
from conftest import CAT, P


@pytest.fixture(scope="module")
def cat_omega():
    return invert_spectral(P(CAT), 40)


def dirichlet_relaxation(boundary, iters=4000):
    """Discrete harmonic extension of the boundary values by Jacobi sweeps."""
    g = boundary.copy()
    for _ in range(iters):
        g[1:-1, 1:-1] = 0.25 * (g[:-2, 1:-1] + g[2:, 1:-1] + g[1:-1, :-2] + g[1:-1, 2:])
    return g


class TestMembership:
    def test_fundamental_homoclinic_in_X_f(self, cat_omega):
        x = fundamental_homoclinic(cat_omega)
        assert membership_defect(x, P(CAT)) < 1e-12
        assert x.distance_to_zero() > 0.1

    def test_dense_and_sparse_defects_agree(self, rng):
        x = TorusConfiguration(rng.random((9, 9)))
        f = P("2 - u1 - u2 + 3u1^-1 u2")
        assert abs(membership_defect(x, f) - membership_defect_dense(x, f)) < 1e-12

    def test_random_configuration_is_not_member(self, rng):
        x = TorusConfiguration(rng.random(41))
        assert membership_defect(x, P(CAT)) > 0.1

    def test_window_too_small(self):
        with pytest.raises(WindowTooSmall):
            membership_defect(TorusConfiguration.zeros(1, 1), P(CAT))

    def test_uncertified_omega_warns(self):
        w = WindowFunction(np.zeros(9), certificate={"method": "manual"})
        res = fundamental_homoclinic_checked(w)
        assert not res.certified and "no certificate" in res.warning

    def test_zero_h_gives_zero_point(self, cat_omega):
        x = homoclinic_point(GroupRingElement.zero(1), fundamental_homoclinic(cat_omega))
        assert x.distance_to_zero() == 0.0


class TestSamples:
    def test_hundred_samples_in_X_f(self, cat_omega):
        pts = sample_dense_points(P(CAT), cat_omega, 100, seed=5)
        assert len(pts) == 100
        assert max(s.defect for s in pts) < 1e-7

    def test_deterministic_under_seed(self, cat_omega):
        a = sample_dense_points(P(CAT), cat_omega, 10, seed=11)
        b = sample_dense_points(P(CAT), cat_omega, 10, seed=11)
        assert [s.h for s in a] == [s.h for s in b]
        assert all(np.array_equal(s.configuration.values, t.configuration.values) for s, t in zip(a, b))

    def test_force_zero(self, cat_omega):
        pts = sample_dense_points(P(CAT), cat_omega, 3, force_zero=True)
        assert all(s.h.is_zero() and s.configuration.distance_to_zero() == 0 for s in pts)

    def test_two_dimensional_samples(self):
        f = P("3 - u1 + u2 - u1^-1 u2")
        w = best_inverse(f, 12)
        pts = sample_dense_points(f, w, 20, seed=1)
        assert max(s.defect for s in pts) < 1e-9


class TestDecay:
    def test_cat_map_rate_is_log_golden_ratio(self, cat_omega):
        prof = decay_profile(fundamental_homoclinic(cat_omega))
        target = -math.log((math.sqrt(5) - 1) / 2)
        assert prof.decaying
        assert abs(prof.rate - target) / target < 0.10

    def test_constant_configuration_not_decaying(self):
        prof = decay_profile(TorusConfiguration(np.full(21, 0.3)))
        assert not prof.decaying

    def test_csv_header(self, cat_omega):
        text = decay_profile(fundamental_homoclinic(cat_omega)).to_csv()
        assert text.splitlines()[0] == "shell,magnitude"
        assert len(text.splitlines()) == 42


class TestFixedPoints:
    def test_nonzero_sum(self):
        fp = fixed_constant_points(P("3 - u"))
        assert [str(v) for v in fp.values] == ["0", "1/2"]
        assert fp.contains(0.5) and not fp.contains(0.25)

    def test_zero_sum_allows_everything(self):
        fp = fixed_constant_points(P("2 - u1 - u2"))
        assert fp.all_constants and fp.contains(0.123)

    def test_constants_are_members(self):
        f = P("u^2 - 3u + 7")
        for c in fixed_constant_points(f).values:
            x = TorusConfiguration(np.full(11, float(c)))
            assert membership_defect(x, f) < 1e-12


class TestMaximumPrinciple:
    def test_harmonic_extension_passes(self, rng):
        n = 17
        b = np.zeros((n, n))
        b[0, :], b[-1, :] = rng.random(n), rng.random(n)
        b[:, 0], b[:, -1] = rng.random(n), rng.random(n)
        g = dirichlet_relaxation(b)
        f = P("4 - u1 - u1^-1 - u2 - u2^-1")
        rep = maximum_principle_check(f, WindowFunction(g), atol=1e-9)
        assert rep.passed
        assert rep.harmonic_cells == (n - 2) ** 2
        assert rep.interior_max <= rep.boundary_max + 1e-9

    def test_interior_spike_is_not_harmonic(self):
        g = np.zeros((9, 9))
        g[4, 4] = 1.0
        rep = maximum_principle_check(P("4 - u1 - u1^-1 - u2 - u2^-1"), WindowFunction(g))
        assert rep.passed  # f g != 0 at the spike, so nothing is claimed there
        assert rep.harmonic_cells < 49

    def test_green_function_obeys_principle_off_origin(self):
        f = P("6 - u1 - u1^-1 - u2 - u2^-1 - u3 - u3^-1")
        w = best_inverse(f, 6)
        rep = maximum_principle_check(f, w, atol=1e-7)
        assert rep.passed

    def test_requires_well_balanced(self):
        with pytest.raises(NotWellBalanced):
            maximum_principle_check(P("3 - u"), WindowFunction(np.zeros(5)))


class TestHomoclinicDiagnostics:
    def test_cat_map_xdelta_is_l1_consistent(self, cat_omega):
        from algdyn.coeff_window import Character, p_homoclinic_estimate

        x = fundamental_homoclinic(cat_omega)
        assert p_homoclinic_estimate(x, 1.0, Character(P("1"), P(CAT))).verdict == "consistent"

    def test_harmonic_xdelta_inconclusive_on_small_window(self):
        from algdyn.coeff_window import Character, p_homoclinic_estimate

        f = P("6 - u1 - u1^-1 - u2 - u2^-1 - u3 - u3^-1")
        x = fundamental_homoclinic(best_inverse(f, 8))
        assert p_homoclinic_estimate(x, 1.0, Character(P("1", 3), f)).verdict == "inconclusive"
