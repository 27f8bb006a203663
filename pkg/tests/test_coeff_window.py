import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algdyn.coeff_window import (
    Character,
    TorusConfiguration,
    WindowFunction,
    comparability_identity_residual,
    convolve_window,
    dist_to_int,
    lp_norm,
    p_homoclinic_estimate,
    pairing,
    project_to_torus,
    psi,
    psi_field,
    psi_prime,
    psi_prime_field,
    translated_pairings,
)
from algdyn.errors import DimensionMismatch, WindowTooSmall
from conftest import P, elements


def direct_convolution(f, arr):
    """Reference ``(f g)`` on the shrunken box by explicit loops."""
    R = (arr.shape[0] - 1) // 2
    s = f.extent()
    r = R - s
    out = np.zeros((2 * r + 1,) * arr.ndim)
    for idx in np.ndindex(out.shape):
        gamma = [i - r for i in idx]
        out[idx] = sum(float(c) * arr[tuple(g - e + R for g, e in zip(gamma, m))] for m, c in f.items())
    return out


class TestWindowFunction:
    def test_delta_and_indexing(self):
        w = WindowFunction.delta(2, 3, at=(1, -2), value=2.5)
        assert w[(1, -2)] == 2.5
        assert w.values.sum() == 2.5
        assert w.tail_bound == 0.0 and w.tail_l1_bound == 0.0

    def test_even_side_rejected(self):
        with pytest.raises(ValueError):
            WindowFunction(np.zeros((4, 4)))

    def test_values_are_read_only(self):
        w = WindowFunction(np.zeros(5))
        with pytest.raises(ValueError):
            w.values[0] = 1.0

    def test_from_polynomial_too_small(self):
        with pytest.raises(WindowTooSmall):
            WindowFunction.from_polynomial(P("u^3"), 2)

    def test_crop_folds_shell_into_tail(self, rng):
        w = WindowFunction(rng.normal(size=(7, 7)), 0.0, 0.0)
        c = w.crop(1)
        outer = np.abs(w.values).sum() - np.abs(c.values).sum()
        assert c.tail_l1_bound == pytest.approx(outer)
        assert c.tail_bound == pytest.approx(np.abs(w.values).max() if np.abs(w.values).max() > np.abs(c.values).max() else c.tail_bound)

    def test_reversed_is_involution(self, rng):
        w = WindowFunction(rng.normal(size=(5, 5, 5)))
        assert np.array_equal(w.reversed().reversed().values, w.values)
        assert w.reversed()[(1, 2, -1)] == w[(-1, -2, 1)]

    def test_csv_and_npz_round_trip(self, rng, tmp_path):
        w = WindowFunction(rng.normal(size=(5, 5)), 0.5, 2.0)
        assert np.array_equal(WindowFunction.from_csv(w.to_csv()).values, w.values)
        path = tmp_path / "w.npz"
        w.save_npz(path)
        back = WindowFunction.load_npz(path)
        assert np.array_equal(back.values, w.values)
        assert (back.tail_bound, back.tail_l1_bound) == (0.5, 2.0)


class TestConvolution:
    @settings(max_examples=60, deadline=None)
    @given(elements(2, radius=2), st.integers(0, 2**32 - 1))
    def test_matches_loop_reference(self, f, seed):
        arr = np.random.default_rng(seed).normal(size=(9, 9))
        got = convolve_window(f, WindowFunction(arr))
        assert np.allclose(got.values, direct_convolution(f, arr), atol=1e-12)

    def test_polynomial_product_exact(self):
        f, g = P("1 + 2u1 - u2"), P("3 - u1 u2 + u2^-1")
        prod = convolve_window(f, WindowFunction.from_polynomial(g, 4))
        assert np.array_equal(prod.values, WindowFunction.from_polynomial(f * g, 3).values)

    def test_radius_shrinks_by_extent(self):
        w = convolve_window(P("u^2 - u - 1"), WindowFunction(np.zeros(21)))
        assert w.radius == 8

    def test_errors(self):
        with pytest.raises(DimensionMismatch):
            convolve_window(P("1 + u1", 2), WindowFunction(np.zeros(5)))
        with pytest.raises(WindowTooSmall):
            convolve_window(P("u^3"), WindowFunction(np.zeros(5)))

    def test_tail_bound_dominates_truth(self):
        # g = 2^-|n|, known beyond the radius 10 window
        full = 0.5 ** np.abs(np.arange(-40, 41))
        g = WindowFunction(full[30:51], tail_bound=0.5 ** 11, tail_l1_bound=2 * 0.5 ** 11 / 0.5)
        f = P("1 + u^2 - 3u^-1")
        out = convolve_window(f, g)
        truth = direct_convolution(f, full)  # radius 38
        c = (truth.shape[0] - 1) // 2
        inner = truth[c - out.radius:c + out.radius + 1]
        assert np.allclose(inner, out.values)
        outside = np.concatenate([truth[:c - out.radius], truth[c + out.radius + 1:]])
        assert np.abs(outside).max() <= out.tail_bound
        assert np.abs(outside).sum() <= out.tail_l1_bound


class TestTorus:
    def test_projection_wraps(self):
        x = project_to_torus(WindowFunction(np.array([-0.25, 1.5, 3.0])))
        assert np.allclose(x.values, [0.75, 0.5, 0.0])

    def test_addition_and_distance(self):
        x = TorusConfiguration(np.array([0.9, 0.2, 0.6]))
        y = TorusConfiguration(np.array([0.2, 0.9, 0.5]))
        assert np.allclose((x + y).values, [0.1, 0.1, 0.1])
        assert x.distance_to_zero() == pytest.approx(0.4)

    def test_csv_round_trip(self, rng):
        x = TorusConfiguration(rng.random((3, 3)))
        assert np.array_equal(TorusConfiguration.from_csv(x.to_csv()).values, x.values)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50, 50, allow_nan=False))
    def test_dist_to_int_range(self, t):
        d = float(dist_to_int(t))
        assert 0.0 <= d <= 0.5
        assert abs(d - abs(t - round(t))) < 1e-9


class TestCharacters:
    def test_equality_modulo_ideal(self):
        f = P("u^2 - u - 1")
        assert Character(P("1 + u"), f) == Character(P("u^2"), f)
        assert Character(P("1"), f) != Character(P("u"), f)
        assert Character(f * P("u^3 + 2"), f).is_trivial()

    def test_reduction_keeps_class(self):
        f = P("u^2 - u - 1")
        chi = Character(P("u^5 + 3"), f)
        assert chi.reduced() == chi
        assert chi.reduced().rep.extent() <= 2

    def test_pairing_linear(self, rng):
        x = TorusConfiguration(rng.random((5, 5)))
        a, b = P("2 - u1 u2", 2), P("u1^-1 + 3u2^2", 2)
        f = P("1 + u1 + u2")
        lhs = pairing(Character(a + b, f), x)
        rhs = pairing(Character(a, f), x) + pairing(Character(b, f), x)
        assert dist_to_int(lhs - rhs) < 1e-12

    def test_translated_pairings_match_pointwise(self, rng):
        x = TorusConfiguration(rng.random((7, 7)))
        chi = Character(P("1 + 2u1 - u2^-1", 2), P("3 - u1", 2))
        field_ = translated_pairings(x, chi)
        r = (field_.shape[0] - 1) // 2
        for gamma in [(0, 0), (1, -2), (-2, 2)]:
            direct = psi(x, chi, gamma)
            assert abs(float(dist_to_int(field_[tuple(g + r for g in gamma)])) - direct) < 1e-12
        assert np.allclose(psi_field(x, chi), dist_to_int(field_))
        assert abs(psi_prime_field(x, chi)[r, r] - psi_prime(x, chi, (0, 0))) < 1e-12

    def test_psi_comparability(self, rng):
        t = rng.uniform(-3, 3, 2000)
        assert comparability_identity_residual(t) < 1e-12
        # 4 |t + Z| <= |e(t) - 1| <= 2 pi |t + Z|
        lhs = np.abs(np.exp(2j * np.pi * t) - 1)
        d = dist_to_int(t)
        assert np.all(4 * d <= lhs + 1e-12) and np.all(lhs <= 2 * math.pi * d + 1e-12)


class TestNorms:
    def test_lp_norm_flags_unknown_tail(self):
        w = WindowFunction(np.array([1.0, -2.0, 2.0]))
        est = lp_norm(w, 1)
        assert est.value == 5.0 and est.tail_uncertain
        est2 = lp_norm(WindowFunction(w.values, 0.0, 0.0), 2)
        assert est2.value == pytest.approx(3.0) and not est2.tail_uncertain
        assert lp_norm(w, math.inf).value == 2.0

    def test_p_homoclinic_finite_support_consistent(self):
        vals = np.zeros((41,))
        vals[20] = 0.5
        est = p_homoclinic_estimate(TorusConfiguration(vals), 1.0, Character(P("1"), P("3 - u")))
        assert est.verdict == "consistent"

    def test_p_homoclinic_constant_inconsistent(self):
        x = TorusConfiguration(np.full(81, 0.25))
        est = p_homoclinic_estimate(x, 1.0, Character(P("1"), P("u")))
        assert est.verdict == "inconsistent"


class TestInvariants:
    @settings(max_examples=60, deadline=None)
    @given(elements(2, radius=1), elements(2, radius=1), st.integers(0, 2**32 - 1))
    def test_convolution_associative_on_common_window(self, f, g, seed):
        w = WindowFunction(np.random.default_rng(seed).normal(size=(11, 11)))
        lhs = convolve_window(f, convolve_window(g, w))
        rhs = convolve_window(f * g, w)
        r = min(lhs.radius, rhs.radius)
        assert np.abs(lhs.crop(r).values - rhs.crop(r).values).max(initial=0.0) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_projection_ignores_integer_windows(self, seed):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(5, 5))
        k = rng.integers(-5, 6, size=(5, 5))
        a = project_to_torus(WindowFunction(g)).values
        b = project_to_torus(WindowFunction(g + k)).values
        assert np.all(dist_to_int(a - b) < 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(elements(2, radius=1), st.integers(0, 2**32 - 1))
    def test_psi_bounds(self, rep, seed):
        x = TorusConfiguration(np.random.default_rng(seed).random((7, 7)))
        chi = Character(rep, P("3 - u1", 2))
        assert np.all(psi_field(x, chi) <= 0.5)
        assert np.all(psi_prime_field(x, chi) <= 2.0 + 1e-15)

    def test_zero_configuration_consistent(self):
        est = p_homoclinic_estimate(TorusConfiguration.zeros(2, 6), 1.0, Character(P("1", 2), P("2 - u1 - u2")))
        assert est.verdict == "consistent" and est.partial_norms[-1][1] == 0.0
