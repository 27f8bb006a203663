"""Finite box windows of functions on Z^d and of torus-valued configurations.

A window of radius ``R`` stores values on the box ``[-R, R]^d`` as a dense
array of shape ``(2R+1,)*d``; array index ``i`` corresponds to lattice
coordinate ``i - R`` along every axis. Window math uses 64-bit floats;
comparisons use ``WINDOW_ATOL``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, PreconditionError, WindowTooSmall
from .group_ring import (
    GroupRingElement,
    LaurentPolynomial,
    divide_with_remainder,
    divides,
    involution,
    norm,
)

WINDOW_ATOL = 1e-12
NPZ_FORMAT_VERSION = 1


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _radius_of(shape):
    n = shape[0]
    if n % 2 != 1 or any(s != n for s in shape):
        raise ValueError(f"window arrays must be cubes of odd side, got {shape}")
    return (n - 1) // 2


def dist_to_int(t):
    """``|t + Z|`` computed as ``min(frac(t), 1 - frac(t))``."""
    fr = np.mod(t, 1.0)
    return np.minimum(fr, 1.0 - fr)


def shell_index(radius: int, dim: int) -> np.ndarray:
    """Array of ``|gamma|_inf`` over the box."""
    ax = np.abs(np.arange(-radius, radius + 1))
    grids = np.meshgrid(*([ax] * dim), indexing="ij")
    return np.max(np.stack(grids), axis=0) if dim > 1 else grids[0]


@dataclass(frozen=True)
class WindowFunction:
    """Real coefficients on ``[-R, R]^d`` plus certified tail bounds.

    ``tail_bound`` bounds ``sup |g|`` outside the box and ``tail_l1_bound``
    bounds the l^1 mass outside the box; ``inf`` means "unknown".
    ``certificate`` carries whatever the producing routine wants to record.
    """

    values: np.ndarray
    tail_bound: float = math.inf
    tail_l1_bound: float = math.inf
    certificate: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _radius_of(self.values.shape)
        if self.tail_bound < 0 or self.tail_l1_bound < 0:
            raise ValueError("tail bounds must be nonnegative")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def radius(self) -> int:
        return _radius_of(self.values.shape)

    @classmethod
    def delta(cls, dim: int, radius: int, at=None, value: float = 1.0):
        arr = np.zeros((2 * radius + 1,) * dim)
        at = (0,) * dim if at is None else tuple(at)
        arr[tuple(a + radius for a in at)] = value
        return cls(arr, tail_bound=0.0, tail_l1_bound=0.0)

    @classmethod
    def from_polynomial(cls, f: LaurentPolynomial, radius: int):
        arr = np.zeros((2 * radius + 1,) * f.dim)
        for m, c in f.items():
            if max(abs(e) for e in m) > radius:
                raise WindowTooSmall(f"support of {f!r} exceeds radius {radius}")
            arr[tuple(e + radius for e in m)] = float(c)
        return cls(arr, tail_bound=0.0, tail_l1_bound=0.0)

    def __getitem__(self, gamma):
        R = self.radius
        return self.values[tuple(g + R for g in gamma)]

    def crop(self, radius: int) -> "WindowFunction":
        """Restrict to a smaller box; the discarded shell is folded into the tail bounds."""
        R = self.radius
        if radius > R:
            raise WindowTooSmall(f"cannot crop radius {R} window to {radius}")
        if radius == R:
            return self
        sl = tuple(slice(R - radius, R + radius + 1) for _ in range(self.dim))
        inner = self.values[sl]
        outside = np.abs(self.values).copy()
        outside[sl] = 0.0
        return WindowFunction(
            inner,
            tail_bound=max(self.tail_bound, float(outside.max(initial=0.0))),
            tail_l1_bound=self.tail_l1_bound + float(outside.sum()),
            certificate=dict(self.certificate),
        )

    def reversed(self) -> "WindowFunction":
        """The involution ``g*`` (reverse every axis)."""
        return WindowFunction(
            self.values[(slice(None, None, -1),) * self.dim],
            self.tail_bound,
            self.tail_l1_bound,
            dict(self.certificate),
        )

    def to_csv(self) -> str:
        return _dump_csv(self.values, self.radius)

    @classmethod
    def from_csv(cls, text: str, **kwargs):
        return cls(_load_csv(text), **kwargs)

    def save_npz(self, path):
        np.savez(
            path,
            format_version=NPZ_FORMAT_VERSION,
            values=self.values,
            tail_bound=self.tail_bound,
            tail_l1_bound=self.tail_l1_bound,
        )

    @classmethod
    def load_npz(cls, path):
        with np.load(path) as z:
            if int(z["format_version"]) != NPZ_FORMAT_VERSION:
                raise ValueError(f"unsupported window format version {int(z['format_version'])}")
            return cls(z["values"], float(z["tail_bound"]), float(z["tail_l1_bound"]))


@dataclass(frozen=True)
class TorusConfiguration:
    """Values in [0, 1) on ``[-R, R]^d``: a finite window of a point of T^(Z^d)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.mod(np.asarray(self.values, dtype=float), 1.0)
        arr[arr >= 1.0] = 0.0  # mod can round up to exactly 1.0
        object.__setattr__(self, "values", _frozen(arr))
        _radius_of(self.values.shape)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def radius(self) -> int:
        return _radius_of(self.values.shape)

    @classmethod
    def zeros(cls, dim: int, radius: int):
        return cls(np.zeros((2 * radius + 1,) * dim))

    def __getitem__(self, gamma):
        R = self.radius
        return self.values[tuple(g + R for g in gamma)]

    def lift(self) -> WindowFunction:
        return WindowFunction(self.values)

    def crop(self, radius: int) -> "TorusConfiguration":
        R = self.radius
        if radius > R:
            raise WindowTooSmall(f"cannot crop radius {R} configuration to {radius}")
        sl = tuple(slice(R - radius, R + radius + 1) for _ in range(self.dim))
        return TorusConfiguration(self.values[sl])

    def __add__(self, other: "TorusConfiguration") -> "TorusConfiguration":
        r = min(self.radius, other.radius)
        return TorusConfiguration(self.crop(r).values + other.crop(r).values)

    def distance_to_zero(self) -> float:
        """``max |x(gamma) + Z|`` over the window."""
        return float(dist_to_int(self.values).max(initial=0.0))

    def to_csv(self) -> str:
        return _dump_csv(self.values, self.radius)

    @classmethod
    def from_csv(cls, text: str):
        return cls(_load_csv(text))


def _dump_csv(values, radius):
    d = values.ndim
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"exp_{i + 1}" for i in range(d)] + ["value"])
    for idx in np.ndindex(values.shape):
        w.writerow([i - radius for i in idx] + [repr(float(values[idx]))])
    return buf.getvalue()


def _load_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    d = len(header) - 1
    pts = np.array([[int(v) for v in r[:d]] for r in body])
    R = int(np.abs(pts).max()) if len(pts) else 0
    arr = np.zeros((2 * R + 1,) * d)
    for r, p in zip(body, pts):
        arr[tuple(p + R)] = float(r[d])
    return arr


@dataclass(frozen=True)
class Character:
    """A coset ``rep + Z[Z^d] modulus`` of the dual group of X_f."""

    rep: GroupRingElement
    modulus: GroupRingElement

    def __post_init__(self):
        if self.modulus.is_zero():
            raise PreconditionError("character modulus must be nonzero")
        if self.rep.dim != self.modulus.dim:
            raise DimensionMismatch("rep and modulus dimensions differ")

    def reduced(self) -> "Character":
        """Remainder normal form of ``rep`` modulo ``modulus`` (graded-lex).

        The reduction only runs when the divisor's leading coefficient is
        +-1, so the representative stays integral.
        """
        if self.rep.is_zero():
            return self
        q, r = divide_with_remainder(self.modulus, self.rep)
        if not r.is_integral() or not q.is_integral():
            return self
        return Character(r.to_integral(), self.modulus)

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        if self.modulus != other.modulus:
            return False
        return divides(self.modulus, self.rep - other.rep)

    def __hash__(self):
        return hash(self.modulus)

    def is_trivial(self) -> bool:
        return divides(self.modulus, self.rep)


def convolve_window(f: LaurentPolynomial, g: WindowFunction) -> WindowFunction:
    """``(f g)_gamma = sum_delta f_delta g_{gamma - delta}`` on the shrunken box.

    The result has radius ``R - s`` with ``s`` the extent of ``supp(f)``;
    every value there only reads cells of ``g`` inside its box, so it is the
    exact convolution of the window data.
    """
    if f.dim != g.dim:
        raise DimensionMismatch(f"polynomial dim {f.dim} vs window dim {g.dim}")
    R, s, d = g.radius, f.extent(), g.dim
    if R < s:
        raise WindowTooSmall(f"window radius {R} smaller than support extent {s}")
    r = R - s
    out = np.zeros((2 * r + 1,) * d)
    for delta, c in f.items():
        sl = tuple(slice(R - r - e, R + r - e + 1) for e in delta)
        out += float(c) * g.values[sl]
    # values outside radius r read cells with |eta|_inf > r - s of g
    l1 = float(norm(f, 1))
    shells = shell_index(R, d)
    outer = np.abs(g.values[shells > r - s]) if r - s >= 0 else np.abs(g.values).ravel()
    shell_max = float(outer.max(initial=0.0))
    shell_sum = float(outer.sum())
    return WindowFunction(
        out,
        tail_bound=l1 * (g.tail_bound + shell_max),
        tail_l1_bound=l1 * (g.tail_l1_bound + shell_sum),
        certificate=dict(g.certificate),
    )


def project_to_torus(g: WindowFunction) -> TorusConfiguration:
    return TorusConfiguration(g.values)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    tail_uncertain: bool
    tail_contribution: float


def lp_norm(g: WindowFunction, p=1, tol: float = WINDOW_ATOL) -> NormEstimate:
    """Window p-norm; flags when the tail bounds do not certify the tail below ``tol``."""
    a = np.abs(g.values)
    if p in (math.inf, "inf"):
        val = float(a.max(initial=0.0))
        tail = g.tail_bound
    else:
        p = float(p)
        if p < 1:
            raise ValueError("p must be >= 1")
        val = float(np.sum(a ** p) ** (1.0 / p))
        if p == 1:
            tail = g.tail_l1_bound
        elif math.isinf(g.tail_l1_bound) or math.isinf(g.tail_bound):
            tail = math.inf
        else:
            tail = g.tail_l1_bound ** (1 / p) * g.tail_bound ** (1 - 1 / p)
    return NormEstimate(val, bool(tail > tol), float(tail))


def _check_support(rep, x):
    if rep.dim != x.dim:
        raise DimensionMismatch("character and configuration dimensions differ")
    if rep.extent() > x.radius:
        raise WindowTooSmall("character support exceeds the configuration window")


def pairing(chi: Character, x: TorusConfiguration) -> float:
    """``<rep, x> = sum_eta rep_eta x(eta) mod 1``."""
    _check_support(chi.rep, x)
    R = x.radius
    total = math.fsum(float(c) * x.values[tuple(e + R for e in m)] for m, c in chi.rep.items())
    return total % 1.0


def translated_pairings(x: TorusConfiguration, chi: Character) -> np.ndarray:
    """``<gamma x, chi> mod 1`` for all gamma in ``[-(R-s), R-s]^d``.

    Uses ``(gamma x)(eta) = x(eta - gamma)``, so the value at gamma is
    ``(rep* x)(-gamma)``.
    """
    _check_support(chi.rep, x)
    w = convolve_window(involution(chi.rep), x.lift())
    return np.mod(w.values[(slice(None, None, -1),) * x.dim], 1.0)


def _pairing_at(x, chi, gamma):
    _check_support(chi.rep, x)
    R = x.radius
    vals = []
    for m, c in chi.rep.items():
        idx = tuple(e - g + R for e, g in zip(m, gamma))
        if any(i < 0 or i > 2 * R for i in idx):
            raise WindowTooSmall(f"translate by {tuple(gamma)} leaves the window")
        vals.append(float(c) * x.values[idx])
    return math.fsum(vals) % 1.0


def psi(x: TorusConfiguration, chi: Character, gamma) -> float:
    """``|<gamma x, chi>|`` in the distance-to-Z metric, so in [0, 1/2]."""
    return float(dist_to_int(_pairing_at(x, chi, gamma)))


def psi_prime(x: TorusConfiguration, chi: Character, gamma) -> float:
    """``|exp(2 pi i <gamma x, chi>) - 1|``, in [0, 2]."""
    t = _pairing_at(x, chi, gamma)
    return float(abs(np.exp(2j * np.pi * t) - 1.0))


def psi_field(x: TorusConfiguration, chi: Character) -> np.ndarray:
    return dist_to_int(translated_pairings(x, chi))


def psi_prime_field(x: TorusConfiguration, chi: Character) -> np.ndarray:
    return np.abs(np.exp(2j * np.pi * translated_pairings(x, chi)) - 1.0)


@dataclass(frozen=True)
class HomoclinicEstimate:
    p: float
    partial_norms: list  # (radius, windowed p-norm) over nested boxes
    shell_sums: list
    decay_rate: Optional[float]  # exponential fit of shell sums (positive = decaying)
    power_exponent: Optional[float]  # log-log slope of shell sums
    verdict: str  # "consistent" | "inconsistent" | "inconclusive"


def p_homoclinic_estimate(
    x: TorusConfiguration,
    p: float,
    chi: Character,
    tail_tol: float = 1e-6,
    min_radius_for_inconsistent: int = 32,
) -> HomoclinicEstimate:
    """Windowed ``||Psi'_{x,chi}||_p`` with a growth diagnostic. Never a proof.

    Shell sums ``S(s) = sum_{|gamma|_inf = s} Psi'^p`` are fitted both as
    ``exp(-a s)`` and as ``s^b``. Geometric decay whose extrapolated tail is
    below ``tail_tol`` times the total, or a power law with ``b < -1.5``, is
    reported "consistent". Shell sums decaying no faster than ``1/s`` (a
    divergent series) are reported "inconsistent" only once the window is at
    least ``min_radius_for_inconsistent``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    field_ = psi_prime_field(x, chi) ** p
    r = (field_.shape[0] - 1) // 2
    shells = shell_index(r, x.dim)
    sums = np.array([field_[shells == s].sum() for s in range(r + 1)])
    partial = np.cumsum(sums)
    partial_norms = [(s, float(partial[s] ** (1 / p))) for s in range(r + 1)]
    total = float(partial[-1])
    if total == 0.0:
        return HomoclinicEstimate(p, partial_norms, sums.tolist(), None, None, "consistent")
    s_idx = np.arange(r + 1)
    tail = slice(max(1, r // 2), r + 1)
    ts, ys = s_idx[tail], sums[tail]
    pos = ys > 0
    rate = power = None
    verdict = "inconclusive"
    if pos.sum() >= 3:
        ly = np.log(ys[pos])
        rate = float(-np.polyfit(ts[pos], ly, 1)[0])
        power = float(np.polyfit(np.log(ts[pos]), ly, 1)[0])
        if rate > 0.05:
            q = math.exp(-rate)
            extrapolated = ys[-1] * q / (1 - q)
            if extrapolated <= tail_tol * total:
                verdict = "consistent"
        if verdict != "consistent" and power < -1.5:
            verdict = "consistent"
        if verdict == "inconclusive" and power >= -1.0 and r >= min_radius_for_inconsistent:
            verdict = "inconsistent"
    elif not pos.any():
        verdict = "consistent"  # finitely supported on the window
    return HomoclinicEstimate(p, partial_norms, sums.tolist(), rate, power, verdict)


def comparability_identity_residual(t: Sequence[float]) -> float:
    """max | |e^{2 pi i t} - 1| - 2 sin(pi |t + Z|) | over samples ``t``."""
    t = np.asarray(t, dtype=float)
    lhs = np.abs(np.exp(2j * np.pi * t) - 1.0)
    rhs = 2.0 * np.sin(np.pi * dist_to_int(t))
    return float(np.max(np.abs(lhs - rhs), initial=0.0))
