"""Acceptance criteria, one test each, with a one-line PASS/FAIL summary."""
import itertools
import math
import time

import numpy as np

from algdyn.coeff_window import dist_to_int
from algdyn.goe_harness import (
    fixture_shift_doubling,
    fixture_trivial_homoclinic,
    goe_verdict,
    is_pre_injective,
    is_surjective,
    oracle_d1,
    random_element,
    randomized_theorem_check,
)
from algdyn.group_ring import divides, involution
from algdyn.inverse_engine import green_function, invert_lopsided, invert_spectral
from algdyn.spectral import zero_scan
from algdyn.torus_model import homoclinic_point
from conftest import ACCEPTANCE_LINES, CAT, HARMONIC3, P
from oracles import brute_force_divides, geometric_inverse, golden_inverse


def record(n, ok, detail):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _near(center, target, tol=1e-6):
    diff = [abs((a - b + 0.5) % 1.0 - 0.5) for a, b in zip(center, target)]
    return max(diff) < tol


def test_acceptance_1_zero_set_catalog():
    t0 = time.perf_counter()
    checks = {}
    rep = zero_scan(P(CAT), 512)
    checks["cat EMPTY"] = rep.classification == "EMPTY"
    for text in ("2 - u1 - u2", "4 - u1 - u1^-1 - u2 - u2^-1"):
        rep = zero_scan(P(text), 512)
        pts = [p["center"] for p in rep.points]
        checks[text] = rep.classification == "FINITE" and len(pts) == 1 and _near(pts[0], (0, 0))
    rep = zero_scan(P("1 + u1 + u2"), 512)
    pts = [p["center"] for p in rep.points]
    want = [(1 / 3, 2 / 3), (2 / 3, 1 / 3)]
    checks["1+u1+u2"] = (
        rep.classification == "FINITE"
        and len(pts) == 2
        and all(any(_near(p, w) for p in pts) for w in want)
    )
    rep = zero_scan(P("1 + u1 + u2 + u3"), 128)
    checks["1+u1+u2+u3"] = rep.classification == "POSITIVE_DIMENSIONAL" and rep.components == 3
    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 30
    failed = [k for k, v in checks.items() if not v]
    record(1, ok, f"zero-set catalog ({len(checks) - len(failed)}/{len(checks)} match, {elapsed:.1f}s < 30s)"
           + (f" failed: {failed}" if failed else ""))


def test_acceptance_2_inverse_certificates():
    t0 = time.perf_counter()
    R = 40
    w = invert_spectral(P(CAT), R)
    res = w.certificate["residual_inf"]
    oracle = np.array([golden_inverse(n) for n in range(-R, R + 1)])
    err_spec = float(np.abs(w.values - oracle).max())
    lw = invert_lopsided(P("3 - u"), radius=R)
    geo = np.array([geometric_inverse(3.0, n) for n in range(-R, R + 1)])
    err_lop = float(np.abs(lw.values - geo).max())
    elapsed = time.perf_counter() - t0
    ok = res < 1e-9 and err_spec < 1e-9 and err_lop < 1e-12 and elapsed < 5
    record(2, ok, f"spectral residual {res:.2e}, oracle error {err_spec:.2e}; "
                  f"lopsided error {err_lop:.2e} ({elapsed:.1f}s < 5s)")


def test_acceptance_3_harmonic_green_function():
    t0 = time.perf_counter()
    f = P(HARMONIC3)
    R = 20
    w1 = green_function(f, R)
    K1 = w1.certificate["steps"]
    eps = w1.certificate["eps_increment"]
    w2 = green_function(f, R, K=2 * K1, eps_increment=0.0)
    v1, v2 = float(w1[(0, 0, 0)]), float(w2[(0, 0, 0)])
    sym = 0.0
    for perm in itertools.permutations(range(3)):
        for flips in itertools.product((False, True), repeat=3):
            t = np.transpose(w2.values, perm)
            axes = [i for i, fl in enumerate(flips) if fl]
            if axes:
                t = np.flip(t, axis=axes)
            sym = max(sym, float(np.abs(t - w2.values).max()))
    res = w1.certificate["residual_inf"]
    elapsed = time.perf_counter() - t0
    ok = (abs(v1 - v2) < 1e-3 and 0.24 <= v1 <= 0.26 and 0.24 <= v2 <= 0.26
          and sym < 1e-12 and res < eps and elapsed < 120)
    record(3, ok, f"omega(0) {v1:.5f} (K={K1}) vs {v2:.5f} (2K), diff {abs(v1 - v2):.1e}; "
                  f"symmetry {sym:.1e}; residual {res:.1e} < {eps:g} ({elapsed:.0f}s < 120s)")


def test_acceptance_4_garden_of_eden_theorem():
    systems = [P(CAT), (P("2 - u1 - u2"), True), P(HARMONIC3)]
    summary = randomized_theorem_check(systems, 1002, seed=2024)
    direct_mismatch = 0
    rng = np.random.default_rng(99)
    for f in (P(CAT), P(HARMONIC3)):
        for _ in range(30):
            r = random_element(rng, f.dim)
            if rng.random() < 0.3:
                r = involution(f) * random_element(rng, f.dim, support=1, coef=2)
            direct_mismatch += is_surjective(r, f, True) != is_pre_injective(r, f, True)
    oracle_mismatch = 0
    for text in (CAT, "3 - u"):
        f = P(text)
        rng = np.random.default_rng(7)
        for i in range(200):
            r = random_element(rng, 1)
            if i % 5 == 0:
                r = involution(f) * random_element(rng, 1, support=1, coef=2)
            oracle_mismatch += oracle_d1(r, f) != is_surjective(r, f)
    ok = summary.trials >= 1000 and summary.violations == 0 and direct_mismatch == 0 and oracle_mismatch == 0
    record(4, ok, f"{summary.trials} trials, {summary.violations} violations, {summary.negatives} negatives; "
                  f"d=1 oracle mismatches {oracle_mismatch}/400")


def test_acceptance_5_witness_validity():
    cases = [
        (P(CAT), False, involution(P(CAT)) * P("2 + u^3")),
        (P(CAT), False, involution(P(CAT))),
        (P("3 - u"), False, involution(P("3 - u")) * P("u^-2 - 1")),
        (P("2 - u1 - u2"), True, involution(P("2 - u1 - u2")) * P("1 + u2", 2)),
        (P(HARMONIC3), True, involution(P(HARMONIC3))),
    ]
    worst_image, worst_pair, min_far = 0.0, 0.0, math.inf
    all_ok = True
    for f, asserted, r in cases:
        v = goe_verdict(r, f, irreducible_asserted=f.dim > 1, assert_weakly_expansive=asserted, samples=50)
        kw, cw = v.kernel_witness, v.character_witness
        if v.surjective or kw is None or cw is None:
            all_ok = False
            continue
        image = float(dist_to_int(homoclinic_point(r, kw.configuration).values).max())
        worst_image = max(worst_image, image)
        min_far = min(min_far, kw.configuration.distance_to_zero())
        worst_pair = max(worst_pair, cw.max_pairing_residual)
        all_ok &= image <= 1e-6 and kw.configuration.distance_to_zero() > 0.01
        all_ok &= cw.samples >= 50 and cw.max_pairing_residual < 1e-5
    record(5, all_ok, f"{len(cases)} negative verdicts; worst image distance {worst_image:.1e}, "
                      f"min max-distance of x {min_far:.3f}, worst pairing residual {worst_pair:.1e}")


def test_acceptance_6_counterexample_regressions():
    a = fixture_shift_doubling()
    b = fixture_trivial_homoclinic(tol=1e-10)
    half = float(a.witness.values[a.witness.radius])
    ok = (a.passed and a.surjective and not a.pre_injective and half == 0.5
          and b.passed and (b.on_circle, b.inside, b.outside) == (2, 1, 1) and b.refused)
    record(6, ok, f"shift doubling surjective={a.surjective} pre_injective={a.pre_injective} witness 1/2; "
                  f"root pattern on/in/out = {b.on_circle}/{b.inside}/{b.outside}; refused={b.refused}")


def test_acceptance_7_algebra_property_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    identities = 0
    bad = 0
    for _ in range(500):
        d = int(rng.integers(1, 4))
        a, b, c = (random_element(rng, d, support=1 if d == 3 else 2) for _ in range(3))
        ok = (a * b) * c == a * (b * c) and a * b == b * a
        ok &= involution(a * b) == involution(a) * involution(b) and involution(involution(a)) == a
        bad += not ok
        identities += 1
    div_cases = div_bad = 0
    for _ in range(300):
        d = int(rng.integers(1, 3))
        f = random_element(rng, d, support=1)
        if f.is_zero():
            continue
        q = random_element(rng, d, support=2)
        g = f * q
        if rng.random() < 0.5:
            g = g + random_element(rng, d, support=2, coef=1, density=0.2)
        div_cases += 1
        div_bad += divides(f, g) != brute_force_divides(f, g)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and div_bad == 0 and elapsed < 60
    record(7, ok, f"{identities} identity checks, {bad} failures; divisibility vs brute force "
                  f"{div_cases - div_bad}/{div_cases} agree ({elapsed:.1f}s < 60s)")
