"""Points of X_f on finite windows.

X_f is the set of configurations ``x in T^(Z^d)`` with ``x f* = 0 mod 1``.
It is only ever touched through windows: a configuration on ``[-R, R]^d``
is consistent with membership when the windowed convolution ``x f*`` is
integer-valued on the shrunken box.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy import signal

from .coeff_window import (
    TorusConfiguration,
    WindowFunction,
    convolve_window,
    dist_to_int,
    project_to_torus,
    shell_index,
)
from .errors import NotWellBalanced, WindowTooSmall
from .group_ring import GroupRingElement, LaurentPolynomial, involution, is_well_balanced
from .inverse_engine import walk_measure

log = logging.getLogger(__name__)


def membership_defect(x: TorusConfiguration, f: LaurentPolynomial) -> float:
    """``max |(x f*)_g + Z|`` over the shrunken window (0 when consistent with X_f)."""
    fs = involution(f)
    if x.radius < fs.extent():
        raise WindowTooSmall(f"window radius {x.radius} < support extent {fs.extent()}")
    w = convolve_window(fs, x.lift())
    return float(dist_to_int(w.values).max(initial=0.0))


def membership_defect_dense(x: TorusConfiguration, f: LaurentPolynomial) -> float:
    """Same quantity as ``membership_defect`` through a dense valid-mode convolution."""
    s = f.extent()
    if x.radius < s:
        raise WindowTooSmall(f"window radius {x.radius} < support extent {s}")
    kernel = np.zeros((2 * s + 1,) * f.dim)
    for m, c in involution(f).items():
        kernel[tuple(e + s for e in m)] = float(c)
    w = signal.convolve(x.values, kernel, mode="valid", method="direct")
    return float(dist_to_int(w).max(initial=0.0))


@dataclass(frozen=True)
class HomoclinicResult:
    configuration: TorusConfiguration
    certified: bool
    warning: Optional[str] = None


def fundamental_homoclinic(omega: WindowFunction) -> TorusConfiguration:
    """``x^Delta = pi(omega*)``: reverse the window and reduce mod 1.

    An uncertified ``omega`` is still used; a warning is logged and recorded
    by ``fundamental_homoclinic_checked``.
    """
    return fundamental_homoclinic_checked(omega).configuration


def fundamental_homoclinic_checked(omega: WindowFunction) -> HomoclinicResult:
    cert = omega.certificate or {}
    certified = bool(cert.get("certified", False))
    warning = None
    if not certified:
        warning = f"omega from method {cert.get('method')!r} carries no certificate"
        log.warning(warning)
    return HomoclinicResult(project_to_torus(omega.reversed()), certified, warning)


def homoclinic_point(h: LaurentPolynomial, xdelta: TorusConfiguration) -> TorusConfiguration:
    """``h . x^Delta`` by window convolution, re-projected to [0, 1)."""
    if h.is_zero():
        return TorusConfiguration.zeros(xdelta.dim, xdelta.radius)
    return project_to_torus(convolve_window(h, xdelta.lift()))


@dataclass(frozen=True)
class DecayProfile:
    shells: np.ndarray  # shell radius s = 0..R
    magnitudes: np.ndarray  # max |x(g) + Z| over |g|_inf = s
    envelope: np.ndarray
    decaying: bool
    rate: Optional[float]  # fitted -d log(envelope)/ds over the tail

    def to_csv(self) -> str:
        lines = ["shell,magnitude"]
        lines += [f"{int(s)},{float(m)!r}" for s, m in zip(self.shells, self.magnitudes)]
        return "\n".join(lines) + "\n"


def decay_profile(x: TorusConfiguration, atol: float = 1e-12) -> DecayProfile:
    """Shellwise max of ``|x(g) + Z|`` and a diagnostic decay verdict.

    The envelope is the suffix maximum of the profile. The verdict is
    "decaying" when the envelope ends below ``atol``, or when it ends below
    half its starting value with a negative log-slope over the outer half.
    """
    R = x.radius
    dist = dist_to_int(x.values)
    shells = shell_index(R, x.dim)
    mags = np.array([dist[shells == s].max() for s in range(R + 1)])
    env = np.maximum.accumulate(mags[::-1])[::-1]
    rate = None
    if env[-1] <= atol:
        decaying = True
        pos = env > atol
        if pos.sum() >= 3:
            rate = float(-np.polyfit(np.nonzero(pos)[0], np.log(env[pos]), 1)[0])
    else:
        tail = np.arange(R // 2, R + 1)
        pos = env[tail] > 0
        if pos.sum() >= 3:
            rate = float(-np.polyfit(tail[pos], np.log(env[tail][pos]), 1)[0])
        decaying = bool(env[-1] < 0.5 * env[0] and rate is not None and rate > 0)
    return DecayProfile(np.arange(R + 1), mags, env, decaying, rate)


@dataclass(frozen=True)
class ConstantFixedPoints:
    coefficient_sum: int
    all_constants: bool
    values: tuple  # Fractions k/|S|, empty when all_constants

    def contains(self, c, tol: float = 1e-12) -> bool:
        if self.all_constants:
            return True
        return abs(float(dist_to_int(float(c) * abs(self.coefficient_sum)))) <= tol * max(1, abs(self.coefficient_sum))

    def describe(self) -> str:
        if self.all_constants:
            return "every constant configuration"
        return "{" + ", ".join(str(v) for v in self.values) + "}"


def fixed_constant_points(f: LaurentPolynomial) -> ConstantFixedPoints:
    """Constant configurations ``x = c`` lying in X_f: those with ``c S`` integral, ``S = sum f``.

    Non-constant fixed points are not enumerated.
    """
    S = int(f.coefficient_sum())
    if S == 0:
        return ConstantFixedPoints(0, True, ())
    n = abs(S)
    return ConstantFixedPoints(S, False, tuple(Fraction(k, n) for k in range(n)))


@dataclass(frozen=True)
class MaximumPrincipleReport:
    passed: bool
    checked_cells: int
    harmonic_cells: int
    violations: list  # (cell, |g|, max over neighbours)
    interior_max: float
    boundary_max: float


def maximum_principle_check(f: LaurentPolynomial, g: WindowFunction, atol: float = 1e-12) -> MaximumPrincipleReport:
    """Check ``|g_x| <= max_{y in x + supp(mu)} |g_y|`` wherever ``(f g)_x = 0``.

    ``mu = delta - f/f_0`` is the walk of a well-balanced ``f``. A cell where
    ``f g`` vanishes but ``|g|`` strictly exceeds every neighbour is a
    violation. Only cells of the shrunken window are examined.
    """
    if not is_well_balanced(f):
        raise NotWellBalanced(f"{f!r} is not well-balanced")
    _, mu = walk_measure(f)
    fg = convolve_window(f, g).values
    R, s = g.radius, f.extent()
    r = R - s
    a = np.abs(g.values)
    neigh = np.full((2 * r + 1,) * g.dim, -np.inf)
    for m in mu:
        sl = tuple(slice(R - r + e, R + r + e + 1) for e in m)
        neigh = np.maximum(neigh, a[sl])
    inner = a[tuple(slice(R - r, R + r + 1) for _ in range(g.dim))]
    harmonic = np.abs(fg) <= atol
    bad = harmonic & (inner > neigh + atol)
    violations = [
        (tuple(int(i) - r for i in idx), float(inner[tuple(idx)]), float(neigh[tuple(idx)]))
        for idx in np.argwhere(bad)
    ]
    shells = shell_index(R, g.dim)
    return MaximumPrincipleReport(
        passed=not violations,
        checked_cells=int(inner.size),
        harmonic_cells=int(harmonic.sum()),
        violations=violations,
        interior_max=float(a[shells < R].max(initial=0.0)),
        boundary_max=float(a[shells == R].max(initial=0.0)),
    )


@dataclass(frozen=True)
class DenseSample:
    h: GroupRingElement
    configuration: TorusConfiguration
    defect: float


def sample_dense_points(
    f: LaurentPolynomial,
    omega: WindowFunction,
    count: int,
    support_bound: int = 2,
    coef_bound: int = 3,
    seed: int = 0,
    force_zero: bool = False,
) -> List[DenseSample]:
    """Seeded sample of homoclinic points ``h . x^Delta``.

    Each ``h`` has support in ``[-support_bound, support_bound]^d`` and
    integer coefficients in ``[-coef_bound, coef_bound]``; the membership
    defect of every output is recorded. ``force_zero`` pins ``h = 0``.
    """
    rng = np.random.default_rng(seed)
    d = f.dim
    xdelta = fundamental_homoclinic(omega)
    if xdelta.radius < support_bound + f.extent():
        raise WindowTooSmall("omega window too small for the requested support bound")
    side = 2 * support_bound + 1
    out = []
    for _ in range(count):
        if force_zero:
            h = GroupRingElement.zero(d)
        else:
            coeffs = rng.integers(-coef_bound, coef_bound + 1, size=(side,) * d)
            mask = rng.random((side,) * d) < 0.4
            terms = {
                tuple(int(i) - support_bound for i in idx): int(coeffs[tuple(idx)])
                for idx in np.argwhere(mask)
            }
            h = GroupRingElement(d, terms)
        x = homoclinic_point(h, xdelta)
        out.append(DenseSample(h, x, membership_defect(x, f)))
    return out
