"""Convolution inverses ``omega`` with ``f omega = delta_0``.

Three certified routes are provided, each with its own applicability test:

* ``invert_lopsided``: Neumann series when one coefficient dominates.
* ``invert_spectral``: trapezoid quadrature of ``1/f`` on the torus when
  ``f`` has no zeros there (l^1 invertibility).
* ``green_function``: the random-walk Green series for well-balanced ``f``
  in dimension >= 3, plus an exact continuous-time quadrature
  (``green_function_bessel``) for axis-separable operators.

``experimental_summation`` sums the same series for nonnegative walks that
are not well balanced. Its output is marked UNCERTIFIED.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import signal, special

from .coeff_window import WindowFunction, convolve_window
from .errors import (
    CertificateUnavailable,
    NotLopsided,
    NotWellBalanced,
    PreconditionError,
    WindowTooSmall,
)
from .group_ring import (
    LaurentPolynomial,
    dominant_monomial,
    is_lopsided,
    is_well_balanced,
    norm,
)
from .spectral import grid_values, is_expansive_zd

log = logging.getLogger(__name__)

MAX_BOX_CELLS = 40_000_000


def _box_convolve(poly_terms, arr):
    """Convolve a dense box array with a sparse kernel, keeping the box.

    Returns ``(out, lost)`` where ``lost`` is the l^1 mass that fell outside.
    """
    R = (arr.shape[0] - 1) // 2
    s = max((max(abs(e) for e in m) for m, _ in poly_terms), default=0)
    big = np.zeros(tuple(n + 2 * s for n in arr.shape))
    for m, c in poly_terms:
        sl = tuple(slice(s + e, s + e + 2 * R + 1) for e in m)
        big[sl] += c * arr
    inner = tuple(slice(s, s + 2 * R + 1) for _ in range(arr.ndim))
    out = big[inner].copy()
    big[inner] = 0.0
    return out, float(np.abs(big).sum())


def _residual(f, omega: WindowFunction):
    fw = convolve_window(f, omega)
    r = fw.values.copy()
    c = (r.shape[0] - 1) // 2
    r[(c,) * r.ndim] -= 1.0
    return r


def _certificate(method, radius, **kw):
    cert = {"method": method, "radius": radius}
    cert.update(kw)
    return cert


# --- lopsided --------------------------------------------------------------

def invert_lopsided(f: LaurentPolynomial, tol: float = 1e-12, radius: Optional[int] = None) -> WindowFunction:
    """Neumann-series inverse for lopsided ``f``.

    Writes ``f = c0 u^g0 (1 - h)`` with ``q = ||h||_1 < 1`` and sums
    ``h^k`` for ``k <= K`` where ``K`` is minimal with
    ``q^(K+1) / (1 - q) <= tol |c0|``. The sum is carried on a box large
    enough to hold every retained power (when memory allows), then cropped to
    ``radius``; discarded mass is added to ``tail_l1_bound``.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    g0 = dominant_monomial(f)
    if g0 is None:
        raise NotLopsided(f"{f!r} is not lopsided")
    d = f.dim
    c0 = Fraction(f.coefficient(g0))
    h_terms = [
        (tuple(a - b for a, b in zip(m, g0)), float(-Fraction(c) / c0))
        for m, c in f.items()
        if m != g0
    ]
    q = sum(abs(c) for _, c in h_terms)
    q_exact = sum(abs(Fraction(c)) for m, c in f.items() if m != g0) / abs(c0)
    if q_exact == 0:
        K = 0
    else:
        K = 0
        while float(q_exact) ** (K + 1) / (1 - float(q_exact)) > tol * abs(float(c0)):
            K += 1
    ext_h = max((max(abs(e) for e in m) for m, _ in h_terms), default=0)
    shift = max(abs(e) for e in g0)
    needed = K * ext_h + shift
    R_out = needed if radius is None else int(radius)
    R_box = max(needed, R_out)
    if (2 * R_box + 1) ** d > MAX_BOX_CELLS:
        R_box = max(R_out + shift, 1)
        if (2 * R_box + 1) ** d > MAX_BOX_CELLS:
            raise WindowTooSmall(f"radius {R_out} is too large for a dense box in dimension {d}")
    # Sum of h^k on the box, tracking the mass pushed out of it
    term = np.zeros((2 * R_box + 1,) * d)
    term[(R_box,) * d] = 1.0
    total = term.copy()
    lost = 0.0
    for _ in range(K):
        term, out = _box_convolve(h_terms, term)
        lost += out
        total += term
    # every unit of lost mass generates at most 1/(1-q) further mass
    spill = lost / (1.0 - q) if q < 1 else math.inf
    # omega = c0^-1 u^-g0 * total
    omega = np.zeros_like(total)
    src = tuple(slice(max(0, gi), 2 * R_box + 1 + min(0, gi)) for gi in g0)
    dst = tuple(slice(max(0, -gi), 2 * R_box + 1 + min(0, -gi)) for gi in g0)
    omega[dst] = total[src]
    shifted_out = float(np.abs(total).sum() - np.abs(total[src]).sum())
    inv_c0 = 1.0 / float(c0)
    omega *= inv_c0
    tail_l1 = (float(q_exact) ** (K + 1) / (1 - float(q_exact)) + spill + shifted_out) * abs(inv_c0)
    w = WindowFunction(omega, tail_bound=tail_l1, tail_l1_bound=tail_l1)
    w = w.crop(R_out) if R_out < R_box else w
    res = _residual(f, w) if w.radius >= f.extent() else np.zeros(1)
    cert = _certificate(
        "lopsided",
        w.radius,
        certified=True,
        l1_certified=True,
        steps=K,
        q=float(q_exact),
        dominant_monomial=list(g0),
        tolerance=tol,
        tail_l1_bound=w.tail_l1_bound,
        residual_inf=float(np.abs(res).max(initial=0.0)),
        residual_l1_bound=float(norm(f, 1)) * w.tail_l1_bound,
    )
    return WindowFunction(w.values, w.tail_bound, w.tail_l1_bound, cert)


# --- spectral --------------------------------------------------------------

def _box_from_periodic(arr, R):
    idx = np.arange(-R, R + 1) % arr.shape[0]
    return arr[np.ix_(*([idx] * arr.ndim))]


def _spectral_once(f, R, N):
    F = grid_values(f, N)
    inv = 1.0 / F
    w_full = np.fft.fftn(inv) / N ** f.dim
    imag_max = float(np.abs(w_full.imag).max())
    w_full = w_full.real
    shells = _fold_shells(N, f.dim)
    outer = np.abs(w_full[shells >= (3 * N) // 8])
    outer_max = float(outer.max(initial=0.0))
    floor = 1e3 * np.finfo(float).eps * float(np.abs(inv).max())
    decay_part = (2 ** f.dim) * outer_max
    alias = decay_part + floor
    box = _box_from_periodic(w_full, R)
    mask = np.ones(w_full.shape, dtype=bool)
    idx = np.arange(-R, R + 1) % N
    mask[np.ix_(*([idx] * f.dim))] = False
    outside_l1 = float(np.abs(w_full[mask]).sum())
    outside_max = float(np.abs(w_full[mask]).max(initial=0.0))
    return box, alias, decay_part, imag_max, outside_l1, outside_max


def _fold_shells(N, d):
    """``|gamma|_inf`` for periodic indices, using the representative in (-N/2, N/2]."""
    a = np.arange(N)
    a = np.minimum(a, N - a)
    grids = np.meshgrid(*([a] * d), indexing="ij")
    return np.max(np.stack(grids), axis=0) if d > 1 else grids[0]


def invert_spectral(
    f: LaurentPolynomial,
    radius: int,
    N: Optional[int] = None,
    alias_target: float = 1e-13,
    max_cells: int = 1 << 24,
    zero_report=None,
) -> WindowFunction:
    """Fourier-quadrature inverse for ``f`` without zeros on the torus.

    ``omega_g ~ int exp(-2 pi i <g, t>) / f(t) dt`` by the N^d trapezoid
    rule. When ``N`` is not given it starts at the smallest power of two
    >= max(4 radius, 64) and doubles until the decay part of the aliasing
    estimate drops below ``alias_target`` (or the grid would exceed ``max_cells``). The aliasing
    estimate is read off the computed coefficients on the outer part of the
    grid; it is an estimate, not a bound.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if zero_report is None:
        expansive = is_expansive_zd(f)
    else:
        expansive = zero_report.classification == "EMPTY"
    if not expansive:
        raise CertificateUnavailable(f"{f!r} has zeros on the torus; no l^1 inverse exists")
    d = f.dim
    adaptive = N is None
    if N is None:
        N = 64
        while N < 4 * radius:
            N *= 2
    if N < 4 * radius or N & (N - 1):
        raise PreconditionError(f"grid N={N} must be a power of two >= 4 * radius")
    if N < 2 * f.extent() + 1:
        raise PreconditionError("grid too small for the support of f")
    while True:
        box, alias, decay_part, imag_max, out_l1, out_max = _spectral_once(f, radius, N)
        if not adaptive or decay_part <= alias_target or (2 * N) ** d > max_cells:
            break
        N *= 2
    w = WindowFunction(box, tail_bound=out_max + alias, tail_l1_bound=out_l1 + alias)
    res = _residual(f, w) if radius >= f.extent() else np.zeros(1)
    cert = _certificate(
        "spectral",
        radius,
        certified=True,
        l1_certified=True,
        grid=N,
        aliasing_estimate=alias,
        imag_max=imag_max,
        tail_l1_bound=w.tail_l1_bound,
        tail_bounds_estimated=True,
        residual_inf=float(np.abs(res).max(initial=0.0)),
        steps=None,
    )
    return WindowFunction(w.values, w.tail_bound, w.tail_l1_bound, cert)


# --- well-balanced: Green series ---------------------------------------------

def walk_measure(f: LaurentPolynomial):
    """``mu = delta_0 - f / f_0`` as exact Fractions; requires ``f_0 > 0``."""
    f0 = Fraction(f.identity_coefficient())
    if f0 <= 0:
        raise PreconditionError("identity coefficient must be positive")
    origin = (0,) * f.dim
    mu = {m: -Fraction(c) / f0 for m, c in f.items() if m != origin}
    return f0, mu


def _require_green(f):
    if not is_well_balanced(f):
        raise NotWellBalanced(f"{f!r} is not well-balanced")
    if f.dim < 3:
        raise PreconditionError(
            f"dimension {f.dim} < 3: the walk defined by f is recurrent, so the "
            "Green series diverges at every cell and no C0 inverse exists"
        )


def _bernstein_alias(N, R, K, d, sigma2, b):
    a = N - R
    if a <= 0:
        return math.inf
    return 2 * d * K * math.exp(-(a * a) / (2 * (K * sigma2 + b * a / 3.0)))


def green_grid_size(R, K, d, sigma2, b, alias_tol):
    N = 2 * R + 8
    N += N % 8 and 8 - N % 8
    while _bernstein_alias(N, R, K, d, sigma2, b) > alias_tol:
        N += 8
    return N


def green_function(
    f: LaurentPolynomial,
    radius: int,
    K: int = 4000,
    eps_increment: float = 5e-5,
    batch: int = 50,
    alias_tol: float = 1e-7,
) -> WindowFunction:
    """Partial sums ``(1/f_0) sum_{k < K'} mu^k`` of the Green series on a box.

    The series is evaluated exactly in the Fourier domain: ``mu^k`` has
    symbol ``mu_hat^k``, and a batch of ``B`` steps is the geometric block
    ``mu_hat^k (1 - mu_hat^B) / (1 - mu_hat)``. Coefficients on the box are
    obtained by a separable partial DFT on an ``N^d`` grid whose size is
    chosen so that a Bernstein tail bound on the walk caps the aliasing at
    ``alias_tol`` per cell. Iteration stops after the first batch adding
    less than ``eps_increment`` at every box cell, or when ``K`` steps are
    exhausted (``certificate["exhausted"]``).
    """
    _require_green(f)
    if batch < 1 or K < 1:
        raise ValueError("batch and K must be positive")
    d, R = f.dim, int(radius)
    f0, mu = walk_measure(f)
    mass = sum(mu.values(), Fraction(0))
    if mass != 1:
        raise PreconditionError(f"walk mass is {mass}, expected exactly 1")
    mu_f = [(m, float(c)) for m, c in mu.items()]
    sigma2 = max(sum(c * m[i] ** 2 for m, c in mu_f) for i in range(d))
    b = max(max(abs(e) for e in m) for m, _ in mu_f)
    N = green_grid_size(R, K, d, sigma2, b, alias_tol)
    half = N // 2 + 1
    # 1 - mu_hat = 2 sum mu sin^2(pi <g, t>), kept separately for accuracy near t = 0
    axes = [np.arange(N)] * (d - 1) + [np.arange(half)]
    shape = [N] * (d - 1) + [half]
    D = np.zeros(shape)
    for m, c in mu_f:
        phase = np.zeros(shape)
        for i, e in enumerate(m):
            if e:
                sh = [1] * d
                sh[i] = shape[i]
                phase = phase + (e * axes[i] / N).reshape(sh)
        D += 2.0 * c * np.sin(np.pi * phase) ** 2
    mu_hat = 1.0 - D
    weights = np.full(half, 2.0)
    weights[0] = 1.0
    if N % 2 == 0:
        weights[-1] = 1.0
    scale = weights.reshape([1] * (d - 1) + [half]) / float(N) ** d
    xs = np.arange(-R, R + 1)
    E_full = np.exp(2j * np.pi * np.outer(xs, np.arange(N)) / N)
    C_half = np.ascontiguousarray(E_full[:, :half].real.T)
    S_half = np.ascontiguousarray(E_full[:, :half].imag.T)

    def to_box(arr):
        flat = (arr * scale).reshape(-1, half)
        # last axis first, with real matrix products
        out = (flat @ C_half + 1j * (flat @ S_half)).reshape(tuple(shape[:-1]) + (2 * R + 1,))
        for _ in range(d - 1):
            out = np.tensordot(out, E_full, axes=([0], [1]))
        return out.real

    with np.errstate(divide="ignore", invalid="ignore"):
        small = D < 0.5
        logm = np.log1p(-np.where(small, D, 0.0))
        block = np.where(
            D == 0,
            float(batch),
            np.where(small, -np.expm1(batch * logm), 1.0 - mu_hat ** batch) / np.where(D == 0, 1.0, D),
        )
    mu_hat_B = mu_hat ** batch
    P = np.ones(shape)
    S_box = np.zeros((2 * R + 1,) * d)
    steps = 0
    last_inc = math.inf
    monotone = True
    exhausted = False
    while True:
        inc_box = to_box(P * block)
        S_box += inc_box
        steps += batch
        if inc_box.min() < -1e-12:
            monotone = False
        last_inc = float(inc_box.max()) / float(f0)
        if last_inc < eps_increment:
            break
        if steps >= K:
            exhausted = True
            break
        P *= mu_hat_B
    omega = S_box / float(f0)
    float_drift = abs(sum(c for _, c in mu_f) - 1.0)
    w = WindowFunction(omega)
    res = _residual(f, w)
    cert = _certificate(
        "green",
        R,
        certified=not exhausted,
        l1_certified=False,
        steps=steps,
        batch=batch,
        eps_increment=eps_increment,
        last_batch_increment=last_inc,
        exhausted=exhausted,
        monotone=monotone,
        grid=N,
        aliasing_bound=_bernstein_alias(N, R, steps, d, sigma2, b),
        rational_mass=str(mass),
        float_mass_drift=float_drift,
        tail_l1_bound=math.inf,
        residual_inf=float(np.abs(res).max(initial=0.0)),
    )
    if exhausted:
        log.warning("green_function: K=%d exhausted before the increment test passed", K)
    return WindowFunction(omega, tail_bound=math.inf, tail_l1_bound=math.inf, certificate=cert)


def axis_rates(f: LaurentPolynomial):
    """Per-axis walk rates ``m_i`` when ``mu`` lives on ``{+-e_i}``, else ``None``."""
    d = f.dim
    _, mu = walk_measure(f)
    rates = [Fraction(0)] * d
    for m, c in mu.items():
        nz = [i for i, e in enumerate(m) if e]
        if len(nz) != 1 or abs(m[nz[0]]) != 1:
            return None
        rates[nz[0]] = c
    for i in range(d):
        e = tuple(1 if j == i else 0 for j in range(d))
        if mu.get(e, 0) != mu.get(tuple(-x for x in e), 0):
            return None
    if any(r == 0 for r in rates):
        return None
    return rates


def _bessel_asym_coeffs(n, order):
    # ive(n, z) ~ (2 pi z)^-1/2 sum_k (-1)^k a_k / z^k
    out, a = [], 1.0
    for k in range(order + 1):
        if k:
            a *= (4 * n * n - (2 * k - 1) ** 2) / (k * 8.0)
        out.append((-1) ** k * a)
    return np.array(out)


def _bessel_quadrature(xs, rates, T, s_min, nodes, panel):
    d = len(rates)
    lo, hi = math.log(s_min), math.log(T)
    n_panels = int(math.ceil((hi - lo) / panel))
    edges = np.linspace(lo, hi, n_panels + 1)
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    v = (0.5 * (edges[1:] - edges[:-1])[:, None] * gx[None, :] + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    wv = (0.5 * (edges[1:] - edges[:-1])[:, None] * gw[None, :]).ravel()
    s = np.exp(v)
    weights = wv * s
    n = np.abs(xs)
    factors = [special.ive(n[None, :], 2.0 * float(m) * s[:, None]) for m in rates]
    # initial segment [0, s_min]: the integrand is ~ its value at s_min
    weights = weights.copy()
    weights[0] += s_min
    letters = "abcdefghijklmnopqr"[:d]
    expr = "s," + ",".join("s" + c for c in letters) + "->" + letters
    return np.einsum(expr, weights, *factors, optimize=True)


def _bessel_tail(xs, rates, T, order=5):
    """``int_T^inf prod_i ive(|x_i|, 2 m_i s) ds`` from the large-argument expansion."""
    d = len(rates)
    n = np.abs(xs)
    per_axis = []
    for m in rates:
        z = 2.0 * float(m)
        # series in 1/s: (2 pi z s)^-1/2 sum_k c_k(n) z^-k s^-k
        cs = np.stack([_bessel_asym_coeffs(int(k), order) for k in n])  # (len(xs), order+1)
        cs = cs * (z ** -np.arange(order + 1))[None, :] / math.sqrt(2 * math.pi * z)
        per_axis.append(cs)
    # multiply the series over axes (outer product over cells, convolution in powers)
    out = per_axis[0]  # shape (x1, p)
    for i in range(1, d):
        nxt = per_axis[i]
        comb = np.zeros(out.shape[:-1] + (len(xs), order + 1))
        for p in range(order + 1):
            for q in range(order + 1 - p):
                comb[..., p + q] += out[..., p][..., None] * nxt[:, q]
        out = comb
    # prod (..)^-1/2 gives s^-(d/2); integrate s^-(d/2 + j) from T
    j = np.arange(order + 1)
    ex = d / 2.0 + j
    integrals = T ** (1 - ex) / (ex - 1)
    return (out * integrals).sum(axis=-1)


def green_function_bessel(
    f: LaurentPolynomial,
    radius: int,
    nodes: int = 16,
    panel: float = 0.25,
) -> WindowFunction:
    """Green function of an axis-separable well-balanced ``f`` by quadrature.

    With ``mu = sum_i m_i (u_i + u_i^-1)`` the continuous-time walk gives
    ``sum_k mu^k = int_0^inf exp(-s (1 - mu)) ds`` and the kernel factorises
    into scaled modified Bessel functions::

        omega(x) = (1 / f_0) int_0^inf prod_i ive(|x_i|, 2 m_i s) ds

    The integral is computed in the variable ``log s`` with composite
    Gauss-Legendre panels up to ``T`` and the large-argument Bessel expansion
    beyond. The error estimate compares two node counts.
    """
    _require_green(f)
    rates = axis_rates(f)
    if rates is None:
        raise PreconditionError("f is not axis-separable (mu must live on +-e_i)")
    R = int(radius)
    f0 = float(f.identity_coefficient())
    xs = np.arange(-R, R + 1)
    c_min = min(2.0 * float(m) for m in rates)
    T = max(1e4, 40.0 * max(R, 1) ** 2 / c_min)
    s_min = 1e-10
    tail = _bessel_tail(xs, rates, T)
    main = _bessel_quadrature(xs, rates, T, s_min, nodes, panel)
    check = _bessel_quadrature(xs, rates, T, s_min, nodes + 8, panel)
    omega = (main + tail) / f0
    err = float(np.abs(main - check).max()) / f0
    w = WindowFunction(omega)
    res = _residual(f, w)
    cert = _certificate(
        "green-bessel",
        R,
        certified=True,
        l1_certified=False,
        steps=None,
        quadrature_error_estimate=err,
        tail_cutoff=T,
        rates=[str(m) for m in rates],
        tail_l1_bound=math.inf,
        residual_inf=float(np.abs(res).max(initial=0.0)),
    )
    return WindowFunction(omega, tail_bound=math.inf, tail_l1_bound=math.inf, certificate=cert)


# --- experimental summation ---------------------------------------------------

def _drift_direction(support):
    """An integer vector ``v`` with ``<v, g> > 0`` on the support, if an easy one exists."""
    s = np.array(support, dtype=float)
    candidates = [s.sum(axis=0)] + [row for row in s]
    for v in candidates:
        if np.all(s @ v > 0):
            return v
    return None


def experimental_summation(
    f: LaurentPolynomial,
    radius: int,
    K: int = 100_000,
    eps_increment: float = 1e-12,
) -> WindowFunction:
    """Sum ``(1/f_0) sum_k mu^k`` directly on the box, without a certificate.

    Requires ``mu = delta_0 - f/f_0`` to be a probability vector. When the
    support of ``mu`` lies in an open half-space the walk never returns to
    the box after leaving it, so the finite sum is the exact series on the
    box. Otherwise the sum is stopped by a cellwise increment test. The
    result is always flagged UNCERTIFIED: nothing here shows that the series
    converges to the canonical C0 inverse.
    """
    f0, mu = walk_measure(f)
    if any(c < 0 for c in mu.values()) or sum(mu.values(), Fraction(0)) != 1:
        raise PreconditionError("experimental summation needs a probability walk measure")
    d, R = f.dim, int(radius)
    terms = [(m, float(c)) for m, c in mu.items()]
    v = _drift_direction(list(mu))
    if v is not None:
        corner = np.abs(v).sum() * R
        min_gain = float(min(np.array(m) @ v for m in mu))
        K_eff = int(math.ceil(2 * corner / min_gain)) + 1
    else:
        K_eff = K
    cur = np.zeros((2 * R + 1,) * d)
    cur[(R,) * d] = 1.0
    total = cur.copy()
    steps = 0
    for steps in range(1, K_eff + 1):
        cur, _ = _box_convolve(terms, cur)
        total += cur
        if v is None and cur.max() < eps_increment:
            break
        if not cur.any():
            break
    omega = total / float(f0)
    w = WindowFunction(omega)
    res = _residual(f, w) if R >= f.extent() else np.zeros(1)
    cert = _certificate(
        "experimental",
        R,
        certified=False,
        l1_certified=False,
        status="UNCERTIFIED",
        exact_on_box=v is not None,
        steps=steps,
        tail_l1_bound=math.inf,
        residual_inf=float(np.abs(res).max(initial=0.0)),
    )
    return WindowFunction(omega, certificate=cert)


# --- residual report and dispatcher ------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    left_residual_inf: float
    right_residual_inf: float
    sides_agree: bool
    tolerance: float
    within_tolerance: bool
    interior_radius: int


def path_tolerance(f: LaurentPolynomial, omega: WindowFunction) -> float:
    """The residual level the producing route vouches for."""
    cert = omega.certificate or {}
    method = cert.get("method")
    l1 = float(norm(f, 1))
    if method == "lopsided":
        return max(l1 * omega.tail_l1_bound, 1e-12)
    if method == "spectral":
        return max(1e3 * l1 * cert.get("aliasing_estimate", 0.0), 1e-9)
    if method == "green":
        return cert.get("eps_increment", 0.0) * l1
    if method == "green-bessel":
        return max(1e3 * l1 * cert.get("quadrature_error_estimate", 0.0), 1e-9)
    return 1e-9


def verify_weak_expansivity_witness(f: LaurentPolynomial, omega: WindowFunction) -> WitnessReport:
    """Window residuals of ``f omega - delta`` and ``omega f - delta``.

    The two sides use separate code paths (sparse shifted sums versus a
    dense ``scipy.signal.convolve`` in valid mode).
    """
    left = _residual(f, omega)
    s = f.extent()
    dense = np.zeros((2 * s + 1,) * f.dim)
    for m, c in f.items():
        dense[tuple(e + s for e in m)] = float(c)
    right = signal.convolve(omega.values, dense, mode="valid", method="direct")
    c = (right.shape[0] - 1) // 2
    right[(c,) * right.ndim] -= 1.0
    l_inf = float(np.abs(left).max(initial=0.0))
    r_inf = float(np.abs(right).max(initial=0.0))
    tol = path_tolerance(f, omega)
    agree = bool(np.abs(left - right).max(initial=0.0) <= 1e-12)
    return WitnessReport(l_inf, r_inf, agree, tol, bool(max(l_inf, r_inf) <= tol), omega.radius - s)


def best_inverse(
    f: LaurentPolynomial,
    radius: int,
    allow_experimental: bool = False,
    tol: float = 1e-12,
    prefer_bessel: bool = True,
    zero_report=None,
) -> WindowFunction:
    """Pick the first applicable route: lopsided, spectral, Green, experimental.

    ``certificate["path"]`` records the weak-expansivity path:
    ``lopsided``, ``spectral``, ``green`` or ``asserted``.
    """
    def tagged(w, path):
        cert = dict(w.certificate)
        cert["path"] = path
        return WindowFunction(w.values, w.tail_bound, w.tail_l1_bound, cert)

    if is_lopsided(f):
        return tagged(invert_lopsided(f, tol, radius), "lopsided")
    try:
        expansive = is_expansive_zd(f) if zero_report is None else zero_report.classification == "EMPTY"
    except CertificateUnavailable:
        expansive = False
    if expansive:
        return tagged(invert_spectral(f, radius), "spectral")
    if f.dim >= 3 and is_well_balanced(f):
        if prefer_bessel and axis_rates(f) is not None:
            return tagged(green_function_bessel(f, radius), "green")
        return tagged(green_function(f, radius), "green")
    if allow_experimental:
        try:
            return tagged(experimental_summation(f, radius), "asserted")
        except PreconditionError as exc:
            raise CertificateUnavailable(f"no inversion route for {f!r}: {exc}") from exc
    raise CertificateUnavailable(
        f"no weak-expansivity certificate for {f!r}: not lopsided, has zeros on the "
        "torus, and is not well-balanced in dimension >= 3"
    )
