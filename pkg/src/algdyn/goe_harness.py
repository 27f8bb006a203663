"""Surjectivity versus pre-injectivity for affine endomorphisms of X_f.

An affine endomorphism ``tau(x) = r x + t`` of ``(X_f, shift)`` is decided
by exact divisibility in Q[Z^d]:

* surjective iff ``f`` does not divide ``r*`` (dual map injective on
  ``Z[Z^d] / Z[Z^d] f``, which is torsion-free for primitive ``f``);
* pre-injective iff ``f*`` does not divide ``r``, reached through the
  homoclinic group ``Delta = Z[Z^d] x^Delta`` isomorphic to
  ``Z[Z^d] / Z[Z^d] f*``.

The two predicates are separate code paths (different polynomial divisions
under different monomial orders) and are compared on every call. A
weak-expansivity certificate path is required before any verdict is
issued; without one the harness refuses.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import sympy

from .coeff_window import (
    Character,
    TorusConfiguration,
    WindowFunction,
    dist_to_int,
    p_homoclinic_estimate,
    pairing,
)
from .errors import (
    CertificateUnavailable,
    DimensionMismatch,
    PreconditionError,
    TheoremViolation,
    WitnessValidationError,
    ZeroElementError,
)
from .group_ring import (
    GroupRingElement,
    LaurentPolynomial,
    content,
    divides,
    involution,
    is_lopsided,
    is_primitive,
    is_well_balanced,
    primitive_part,
)
from .inverse_engine import best_inverse
from .spectral import is_expansive_zd, zero_scan
from .torus_model import (
    decay_profile,
    fixed_constant_points,
    fundamental_homoclinic,
    homoclinic_point,
    membership_defect,
    sample_dense_points,
)

log = logging.getLogger(__name__)

PATHS = ("lopsided", "spectral", "green", "asserted")
DEFAULT_RADIUS = {1: 40, 2: 24, 3: 12}
KERNEL_TOL = 1e-6
NONZERO_MARGIN = 0.01
PAIRING_TOL = 1e-5


@dataclass(frozen=True)
class AffineEndomorphism:
    """``tau(x) = r x + t``; ``t`` is a constant in [0, 1), a configuration, or ``None`` (zero)."""

    r: GroupRingElement
    t: Union[None, float, Fraction, TorusConfiguration] = None


@dataclass
class KernelWitness:
    configuration: TorusConfiguration
    h: GroupRingElement
    image_distance: float  # max |(r h x^Delta)(g) + Z| over the window
    membership_defect: float
    max_distance_from_zero: float
    valid: bool


@dataclass
class CharacterWitness:
    character: Character
    max_pairing_residual: float
    samples: int
    nontrivial_on_samples: bool
    valid: bool


@dataclass
class P1Estimate:
    value: Union[bool, str]  # True, False or "unknown"
    l1_certified: bool
    caveat: Optional[str] = None
    witness_h: Optional[GroupRingElement] = None


@dataclass
class GoeVerdict:
    surjective: bool
    pre_injective: bool
    p1_pre_injective: Union[bool, str]
    assumptions: dict
    justification: list
    kernel_witness: Optional[KernelWitness] = None
    character_witness: Optional[CharacterWitness] = None
    translation: dict = field(default_factory=dict)
    p1_caveat: Optional[str] = None

    @property
    def witness(self):
        return self.kernel_witness, self.character_witness

    def to_json_obj(self) -> dict:
        from .polyio import format_expression

        obj = {
            "surjective": self.surjective,
            "pre_injective": self.pre_injective,
            "p1_pre_injective": self.p1_pre_injective,
            "p1_caveat": self.p1_caveat,
            "assumptions": self.assumptions,
            "justification": self.justification,
            "translation": self.translation,
        }
        if self.kernel_witness is not None:
            k = self.kernel_witness
            obj["kernel_witness"] = {
                "h": format_expression(k.h),
                "radius": k.configuration.radius,
                "image_distance": k.image_distance,
                "membership_defect": k.membership_defect,
                "max_distance_from_zero": k.max_distance_from_zero,
                "valid": k.valid,
            }
        if self.character_witness is not None:
            c = self.character_witness
            obj["annihilating_character"] = {
                "representative": format_expression(c.character.rep),
                "modulus": format_expression(c.character.modulus),
                "max_pairing_residual": c.max_pairing_residual,
                "samples": c.samples,
                "valid": c.valid,
            }
        return obj


# --- preconditions -----------------------------------------------------------

def _is_unit(f: LaurentPolynomial) -> bool:
    return len(f) == 1 and abs(next(iter(f.terms.values()))) == 1


@lru_cache(maxsize=256)
def irreducible_d1(f: GroupRingElement) -> bool:
    """Irreducibility over Q of a univariate Laurent polynomial, up to units."""
    if f.dim != 1:
        raise DimensionMismatch("univariate input required")
    lo = f.min_exponents()[0]
    coeffs = {m[0] - lo: int(c) for m, c in f.items()}
    deg = max(coeffs)
    if deg <= 1:
        return True
    x = sympy.Symbol("x")
    poly = sympy.Poly(sum(c * x ** k for k, c in coeffs.items()), x, domain="QQ")
    return bool(poly.is_irreducible)


def normalize_modulus(f: LaurentPolynomial, irreducible_asserted: bool = False):
    """Validate ``f`` and return ``(primitive f, assumptions dict)``."""
    if f.is_zero():
        raise ZeroElementError("f = 0 is excluded: the full shift is not weakly expansive")
    f = GroupRingElement(f.dim, f.terms) if not isinstance(f, GroupRingElement) else f
    assumptions = {"primitive": True, "content": 1}
    if not is_primitive(f):
        c = content(f)
        log.warning("f has content %d; replacing it by its primitive part", c)
        assumptions.update(primitive=False, content=c, normalized_to_primitive=True)
        f = primitive_part(f)
    if f.dim == 1:
        irr = irreducible_d1(f)
        if not irr:
            raise PreconditionError(f"{f!r} is reducible over Q")
        assumptions.update(irreducible_asserted=bool(irreducible_asserted), irreducible_verified=True)
    else:
        if not irreducible_asserted:
            raise PreconditionError(
                "irreducibility of f must be asserted by the caller in dimension >= 2"
            )
        assumptions.update(irreducible_asserted=True, irreducible_verified=False)
    return f, assumptions


@lru_cache(maxsize=256)
def certificate_path(f: GroupRingElement, assert_weakly_expansive: bool = False) -> str:
    """First applicable weak-expansivity route for ``f``.

    Raises ``CertificateUnavailable`` when none applies and the caller did
    not assert weak expansivity.
    """
    if is_lopsided(f):
        return "lopsided"
    try:
        if is_expansive_zd(f):
            return "spectral"
    except CertificateUnavailable:
        pass
    if f.dim >= 3 and is_well_balanced(f):
        return "green"
    if assert_weakly_expansive:
        return "asserted"
    raise CertificateUnavailable(
        f"no weak-expansivity certificate for {f!r} (not lopsided, zeros on the torus, "
        "not well-balanced in dimension >= 3) and none was asserted"
    )


@lru_cache(maxsize=64)
def certified_inverse(f: GroupRingElement, radius: int, assert_weakly_expansive: bool = False) -> WindowFunction:
    path = certificate_path(f, assert_weakly_expansive)
    return best_inverse(f, radius, allow_experimental=(path == "asserted"))


# --- the two predicates ------------------------------------------------------

def is_surjective(r: LaurentPolynomial, f: LaurentPolynomial, irreducible_asserted: bool = False) -> bool:
    """``x -> r x`` is onto X_f iff ``r*`` is not in ``Q[Z^d] f``."""
    f, _ = normalize_modulus(f, irreducible_asserted)
    if r.dim != f.dim:
        raise DimensionMismatch("r and f live in different dimensions")
    return not divides(f, involution(r))


def is_pre_injective(
    r: LaurentPolynomial,
    f: LaurentPolynomial,
    irreducible_asserted: bool = False,
    path: Optional[str] = None,
    assert_weakly_expansive: bool = False,
) -> bool:
    """``x -> r x`` is injective on homoclinic classes iff ``r`` is not in ``Q[Z^d] f*``.

    Uses lexicographic division by ``f*`` so it shares no division with
    ``is_surjective`` (graded order, divisor ``f``).
    """
    f, _ = normalize_modulus(f, irreducible_asserted)
    if r.dim != f.dim:
        raise DimensionMismatch("r and f live in different dimensions")
    if path is None:
        path = certificate_path(f, assert_weakly_expansive)
    elif path not in PATHS:
        raise ValueError(f"unknown certificate path {path!r}")
    return not divides(involution(f), r, order="lex")


# --- witnesses ----------------------------------------------------------------

def kernel_witness(
    r: LaurentPolynomial,
    f: LaurentPolynomial,
    omega: WindowFunction,
    h: Optional[GroupRingElement] = None,
    tol: float = KERNEL_TOL,
) -> KernelWitness:
    """A nonzero homoclinic point killed by ``x -> r x``.

    When ``f`` divides ``r*`` the point ``x^Delta`` itself works:
    ``r x^Delta = pi((r* omega)*) = pi(q*)`` with ``q = r*/f`` integral.
    Validation requires every window value of ``r h x^Delta`` within ``tol``
    of Z, ``x`` consistent with X_f within ``tol`` and some value farther
    than 0.01 from Z.
    """
    if not r.is_zero() and not divides(f, involution(r)):
        raise PreconditionError("f does not divide r*: x -> r x is surjective and no kernel witness exists")
    d = f.dim
    h = GroupRingElement.one(d) if h is None else h
    x = homoclinic_point(h, fundamental_homoclinic(omega))
    if r.is_zero():
        image = 0.0
    else:
        if x.radius < r.extent():
            raise WitnessValidationError("window too small for r")
        image = float(dist_to_int(homoclinic_point(r, x).values).max(initial=0.0))
    defect = membership_defect(x, f)
    far = x.distance_to_zero()
    valid = image <= tol and defect <= tol and far > NONZERO_MARGIN
    if not valid:
        raise WitnessValidationError(
            f"kernel witness failed: image {image:.3g}, defect {defect:.3g}, max distance {far:.3g}"
        )
    return KernelWitness(x, h, image, defect, far, valid)


def annihilating_character(
    r: LaurentPolynomial,
    f: LaurentPolynomial,
    omega: WindowFunction,
    samples: int = 50,
    seed: int = 0,
    tol: float = PAIRING_TOL,
) -> CharacterWitness:
    """The character ``chi = 1 + Z[Z^d] f``, which annihilates ``r X_f``.

    Since ``r* . 1`` lies in ``(f)``, ``<chi, r x> = <r*, x>`` is an integer
    for every ``x`` in X_f. This is checked on ``samples`` dense homoclinic
    points; the character must also be nontrivial (``1`` not in ``(f)``) and
    seen to be nonzero on at least one sample.
    """
    if not r.is_zero() and not divides(f, involution(r)):
        raise PreconditionError("f does not divide r*: the image of x -> r x is everything")
    d = f.dim
    chi = Character(GroupRingElement.one(d), f)
    if chi.is_trivial():
        raise PreconditionError("f is a unit: X_f is trivial and has no nonzero character")
    pulled = Character(involution(r) if not r.is_zero() else GroupRingElement.zero(d), f)
    pts = sample_dense_points(f, omega, samples, support_bound=2, coef_bound=3, seed=seed)
    worst, nonzero = 0.0, False
    for s in pts:
        x = s.configuration
        if not pulled.rep.is_zero():
            worst = max(worst, float(dist_to_int(pairing(pulled, x))))
        if dist_to_int(pairing(chi, x)) > NONZERO_MARGIN:
            nonzero = True
    valid = worst <= tol and nonzero
    if not valid:
        raise WitnessValidationError(
            f"annihilating character failed: residual {worst:.3g}, nonzero on samples: {nonzero}"
        )
    return CharacterWitness(chi, worst, len(pts), nonzero, valid)


# --- 1-pre-injectivity ----------------------------------------------------------

def p1_pre_injectivity_estimate(
    r: LaurentPolynomial,
    f: LaurentPolynomial,
    omega: WindowFunction,
    irreducible_asserted: bool = False,
) -> P1Estimate:
    """1-pre-injectivity: exact for l^1-certified inverses, otherwise partial.

    Every 1-homoclinic point is homoclinic, so pre-injective implies
    1-pre-injective and TRUE always propagates. A FALSE answer for a
    C0-only inverse needs a kernel element that looks summable: the
    candidates ``(1 - u_1)^k x^Delta`` (``k <= 3``) are tested with the
    windowed l^1 diagnostic; if none passes the answer is "unknown".
    """
    f, _ = normalize_modulus(f, irreducible_asserted)
    cert = omega.certificate or {}
    l1 = bool(cert.get("l1_certified", False))
    exact = not divides(involution(f), r, order="lex")
    if exact:
        return P1Estimate(True, l1)
    if l1:
        return P1Estimate(False, True, witness_h=GroupRingElement.one(f.dim))
    d = f.dim
    xdelta = fundamental_homoclinic(omega)
    chi = Character(GroupRingElement.one(d), f)
    step = GroupRingElement.one(d) - GroupRingElement.variable(d, 1)
    h = GroupRingElement.one(d)
    for k in range(4):
        x = homoclinic_point(h, xdelta)
        est = p_homoclinic_estimate(x, 1.0, chi)
        if est.verdict == "consistent" and x.distance_to_zero() > 1e-9:
            return P1Estimate(
                False,
                False,
                caveat="l^1 membership of the kernel witness is a windowed estimate, not a proof",
                witness_h=h,
            )
        h = h * step
    return P1Estimate(
        "unknown",
        False,
        caveat="inverse only C0-certified and no candidate kernel element looked summable on the window",
    )


# --- verdict ---------------------------------------------------------------------

JUSTIFICATION = [
    "tau = lambda + t with lambda(x) = r x; tau is surjective / pre-injective exactly when lambda is",
    "lambda onto X_f <=> its dual, multiplication by r* on Z[Z^d]/Z[Z^d]f, is injective",
    "f primitive => Z[Z^d]/Z[Z^d]f torsion-free => injective <=> r* not in Q[Z^d]f",
    "weak expansivity => Delta(X_f) = Z[Z^d] x^Delta isomorphic to Z[Z^d]/Z[Z^d]f*",
    "lambda injective on Delta <=> r not in Q[Z^d]f* (f* irreducible as f is)",
    "pre-injective <=> lambda has no nonzero homoclinic point in its kernel",
]


def _check_translation(t, f):
    if t is None:
        return {"kind": "zero", "valid": True}
    if isinstance(t, TorusConfiguration):
        defect = membership_defect(t, f)
        return {"kind": "configuration", "membership_defect": defect, "valid": defect <= 1e-9}
    fixed = fixed_constant_points(f)
    ok = fixed.contains(t)
    if not ok:
        raise PreconditionError(f"translation constant {t} is not a point of X_f; allowed: {fixed.describe()}")
    return {"kind": "constant", "value": str(t), "allowed": fixed.describe(), "valid": True}


def goe_verdict(
    tau: Union[AffineEndomorphism, LaurentPolynomial],
    f: LaurentPolynomial,
    irreducible_asserted: bool = False,
    assert_weakly_expansive: bool = False,
    radius: Optional[int] = None,
    omega: Optional[WindowFunction] = None,
    witnesses: bool = True,
    samples: int = 50,
    seed: int = 0,
) -> GoeVerdict:
    """Decide surjectivity and pre-injectivity of ``tau`` and cross-check them.

    Raises ``CertificateUnavailable`` (a refusal) when no weak-expansivity
    path applies, and ``TheoremViolation`` if the two predicates disagree.
    """
    if not isinstance(tau, AffineEndomorphism):
        tau = AffineEndomorphism(tau)
    r = tau.r
    f, assumptions = normalize_modulus(f, irreducible_asserted)
    if r.dim != f.dim:
        raise DimensionMismatch("r and f live in different dimensions")
    path = certificate_path(f, assert_weakly_expansive)
    assumptions["weakly_expansive_path"] = path
    translation = _check_translation(tau.t, f)
    if _is_unit(f):
        assumptions["trivial_system"] = True
        return GoeVerdict(
            True, True, True, assumptions,
            ["f is a unit, so X_f is a single point and every map is bijective"],
            translation=translation,
        )
    surj = is_surjective(r, f, irreducible_asserted)
    pre = is_pre_injective(r, f, irreducible_asserted, path=path)
    if surj != pre:
        raise TheoremViolation(
            "surjectivity and pre-injectivity predicates disagree",
            state={"r": repr(r), "f": repr(f), "surjective": surj, "pre_injective": pre,
                   "assumptions": assumptions},
        )
    verdict = GoeVerdict(surj, pre, surj, assumptions, list(JUSTIFICATION), translation=translation)
    if not witnesses:
        if not surj:
            # l^1-certified routes make x^Delta itself a 1-homoclinic kernel element
            verdict.p1_pre_injective = False if path in ("lopsided", "spectral") else "unknown"
        return verdict
    R = radius or DEFAULT_RADIUS.get(f.dim, 8)
    w = omega if omega is not None else certified_inverse(f, R, path == "asserted")
    p1 = p1_pre_injectivity_estimate(r, f, w, irreducible_asserted)
    verdict.p1_pre_injective = p1.value
    verdict.p1_caveat = p1.caveat
    if not surj:
        verdict.kernel_witness = kernel_witness(r, f, w)
        verdict.character_witness = annihilating_character(r, f, w, samples=samples, seed=seed)
    return verdict


# --- independent oracle for d = 1 ----------------------------------------------------

def oracle_d1(r: LaurentPolynomial, f: LaurentPolynomial) -> bool:
    """Surjectivity of ``x -> r x`` on X_f for univariate ``f``, by a determinant.

    The shift acts on the coordinates ``(x_0, ..., x_{n-1})`` of X_f through
    the companion matrix ``C`` of ``f*`` (made monic over Q), so
    ``x -> r x`` becomes ``r(C)``; it is onto iff ``det r(C) != 0``. Computed
    in exact rational arithmetic.
    """
    if f.dim != 1 or r.dim != 1:
        raise DimensionMismatch("oracle_d1 needs univariate r and f")
    if f.is_zero():
        raise ZeroElementError("f must be nonzero")
    fs = involution(f)
    lo = fs.min_exponents()[0]
    coeffs = {m[0] - lo: Fraction(c) for m, c in fs.items()}
    n = max(coeffs)
    if n == 0:
        return True  # X_f is a point
    lead = coeffs[n]
    C = sympy.zeros(n, n)
    for i in range(1, n):
        C[i, i - 1] = 1
    for k in range(n):
        C[k, n - 1] = -sympy.Rational(coeffs.get(k, 0) / lead)
    M = sympy.zeros(n, n)
    for m, c in r.items():
        M += int(c) * (C ** m[0])
    return M.det() != 0


# --- regression fixtures -------------------------------------------------------------

@dataclass
class ShiftDoublingReport:
    surjective: bool
    pre_injective: bool
    witness: TorusConfiguration
    image_is_zero: bool
    witness_decaying: bool
    weakly_expansive: bool
    passed: bool
    notes: list


def fixture_shift_doubling(radius: int = 8) -> ShiftDoublingReport:
    """Full shift on T^(Z^d) (``f = 0``) with ``tau(x) = 2x``.

    Doubling on T is onto, so tau is surjective. The configuration ``y``
    equal to 1/2 at the origin and 0 elsewhere is homoclinic and
    ``tau(y) = 0 = tau(0)``, so tau is not pre-injective. ``f = 0`` has no
    convolution inverse, which is why it is excluded from the theorem.
    """
    vals = np.zeros(2 * radius + 1)
    vals[radius] = 0.5
    y = TorusConfiguration(vals)
    image = TorusConfiguration(2.0 * y.values)
    image_zero = bool(np.all(image.values == 0.0))
    profile = decay_profile(y)
    surjective = True  # t -> 2t is onto T, coordinatewise
    pre_injective = not (image_zero and y.distance_to_zero() > 0)
    weakly = is_expansive_zd(GroupRingElement.zero(1))
    passed = surjective and not pre_injective and image_zero and profile.decaying and not weakly
    return ShiftDoublingReport(
        surjective, pre_injective, y, image_zero, profile.decaying, weakly, passed,
        ["f = 0 admits no omega with f omega = delta, so it is not weakly expansive",
         "witness y: 1/2 at the origin, 0 elsewhere; 2y = 0 exactly"],
    )


@dataclass
class TrivialHomoclinicReport:
    roots: list
    on_circle: int
    inside: int
    outside: int
    pattern_ok: bool
    zero_scan_classification: str
    zero_points: list
    refused: bool
    refusal_reason: str
    zero_map_pre_injective: bool
    zero_map_surjective: bool
    passed: bool


def fixture_trivial_homoclinic(tol: float = 1e-10) -> TrivialHomoclinicReport:
    """``f = 1 - 2u + u^2 - 2u^3 + u^4``: zeros on the circle, no certificate.

    With roots on, inside and outside the unit circle there is no inverse on
    any route, the homoclinic group is trivial, the zero map is vacuously
    pre-injective but not surjective, and the harness must refuse.
    """
    from .polyio import parse_expression

    f = parse_expression("1 - 2u + u^2 - 2u^3 + u^4")
    roots = np.roots([1, -2, 1, -2, 1])
    mags = np.abs(roots)
    on = int(np.sum(np.abs(mags - 1) < tol))
    inside = int(np.sum(mags < 1 - tol))
    outside = int(np.sum(mags > 1 + tol))
    rep = zero_scan(f, 1024)
    refused, reason = False, ""
    try:
        goe_verdict(AffineEndomorphism(GroupRingElement.one(1)), f)
    except CertificateUnavailable as exc:
        refused, reason = True, str(exc)
    pattern = (on, inside, outside) == (2, 1, 1)
    passed = pattern and rep.classification == "FINITE" and len(rep.points) == 2 and refused
    return TrivialHomoclinicReport(
        [complex(z) for z in roots], on, inside, outside, pattern, rep.classification,
        rep.points, refused, reason, True, False, passed,
    )


# --- randomized theorem check ---------------------------------------------------------

def random_element(rng, d: int, support: int = 2, coef: int = 3, density: float = 0.4) -> GroupRingElement:
    side = 2 * support + 1
    coeffs = rng.integers(-coef, coef + 1, size=(side,) * d)
    mask = rng.random((side,) * d) < density
    return GroupRingElement(
        d, {tuple(int(i) - support for i in idx): int(coeffs[tuple(idx)]) for idx in np.argwhere(mask)}
    )


@dataclass
class TheoremCheckSummary:
    trials: int
    violations: int
    negatives: int
    by_system: dict


def randomized_theorem_check(
    systems,
    trials: int,
    seed: int = 0,
    multiple_fraction: float = 0.2,
    irreducible_asserted: bool = True,
    assert_weakly_expansive: bool = False,
) -> TheoremCheckSummary:
    """Compare the two predicates on random ``r``; a fraction are multiples of ``f*``.

    ``systems`` is a sequence of ``f`` (or ``(f, assert_weakly_expansive)``
    pairs); trials are spread round-robin across them.
    """
    rng = np.random.default_rng(seed)
    systems = [s if isinstance(s, tuple) else (s, assert_weakly_expansive) for s in systems]
    violations = negatives = 0
    by_system = {}
    for i in range(trials):
        f, awe = systems[i % len(systems)]
        r = random_element(rng, f.dim)
        if rng.random() < multiple_fraction:
            r = involution(f) * random_element(rng, f.dim, support=1, coef=2)
        key = repr(f)
        stats = by_system.setdefault(key, {"trials": 0, "negatives": 0})
        stats["trials"] += 1
        try:
            v = goe_verdict(r, f, irreducible_asserted, awe, witnesses=False)
        except TheoremViolation:
            violations += 1
            continue
        if not v.surjective:
            negatives += 1
            stats["negatives"] += 1
    return TheoremCheckSummary(trials, violations, negatives, by_system)
