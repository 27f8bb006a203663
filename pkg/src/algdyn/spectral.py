"""Evaluation of Laurent polynomials on the torus and zero-set scanning.

Torus points use additive coordinates ``t`` in ``[0, 1)^d``; the
multiplicative point ``(exp(2 pi i t_1), ..., exp(2 pi i t_d))`` is what a
polynomial is evaluated at. So the multiplicative point ``(1, 1)`` is
``t = (0, 0)`` and a pair of primitive cube roots of unity ``(w, w^2)`` is
``t = (1/3, 2/3)``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import CertificateUnavailable, DimensionMismatch
from .group_ring import LaurentPolynomial

EMPTY = "EMPTY"
FINITE = "FINITE"
POSITIVE_DIMENSIONAL = "POSITIVE_DIMENSIONAL"
UNKNOWN = "UNKNOWN"

COORDINATE_NOTE = (
    "additive torus coordinates t in [0,1)^d; t corresponds to the "
    "multiplicative point (exp(2 pi i t_1), ..., exp(2 pi i t_d))"
)

CONFIRM_RESIDUAL = 1e-10
MAX_DENOMINATOR = 64


@dataclass(frozen=True)
class TorusPoint:
    coordinates: tuple

    def __post_init__(self):
        coords = tuple(self.coordinates)
        for c in coords:
            if not 0 <= c < 1:
                raise ValueError(f"torus coordinate {c} outside [0, 1)")
        object.__setattr__(self, "coordinates", coords)

    @classmethod
    def wrap(cls, coords):
        out = []
        for c in coords:
            if isinstance(c, Fraction):
                out.append(c - math.floor(c))
            else:
                v = float(c) % 1.0
                out.append(0.0 if v >= 1.0 else v)
        return cls(tuple(out))

    @property
    def dim(self):
        return len(self.coordinates)


def _as_rational(c) -> Optional[Fraction]:
    if isinstance(c, Fraction):
        return c if c.denominator <= MAX_DENOMINATOR else None
    fr = Fraction(float(c)).limit_denominator(MAX_DENOMINATOR)
    return fr if abs(float(fr) - float(c)) < 1e-15 else None


def evaluate(f: LaurentPolynomial, t) -> complex:
    """``sum_m f_m exp(2 pi i <m, t>)``.

    At rational points with denominator <= 64 the coefficients are bucketed
    by the residue of ``<m, t>`` modulo 1. Because the q-th roots of unity
    sum to zero, the most common bucket total can be subtracted from every
    bucket; cancellations such as ``1 + u1 + u2`` at ``(1/3, 2/3)`` then come
    out exactly zero.
    """
    coords = t.coordinates if isinstance(t, TorusPoint) else tuple(t)
    if len(coords) != f.dim:
        raise DimensionMismatch(f"point of dim {len(coords)} for polynomial of dim {f.dim}")
    rat = [_as_rational(c) for c in coords]
    if all(r is not None for r in rat):
        q = math.lcm(*(r.denominator for r in rat))
        nums = [int(r * q) for r in rat]
        buckets = Counter()
        for m, c in f.items():
            buckets[sum(a * b for a, b in zip(m, nums)) % q] += Fraction(c)
        totals = [buckets.get(k, Fraction(0)) for k in range(q)]
        mode = Counter(totals).most_common(1)[0][0] if q > 1 else Fraction(0)
        z = 0j
        for k, s in enumerate(totals):
            s = s - mode
            if s:
                if k == 0:
                    z += float(s)
                elif 2 * k == q:
                    z -= float(s)
                else:
                    z += float(s) * complex(math.cos(2 * math.pi * k / q), math.sin(2 * math.pi * k / q))
        return z
    ts = np.array([float(c) for c in coords])
    return complex(sum(float(c) * np.exp(2j * np.pi * float(np.dot(m, ts))) for m, c in f.items()))


def grid_values(f: LaurentPolynomial, N: int) -> np.ndarray:
    """``f(j / N)`` on the full ``N^d`` grid via one inverse FFT."""
    coeffs = np.zeros((N,) * f.dim, dtype=complex)
    for m, c in f.items():
        coeffs[tuple(e % N for e in m)] += float(c)
    return np.fft.ifftn(coeffs) * N ** f.dim


def lipschitz_constant(f: LaurentPolynomial) -> float:
    """``2 pi sum_m ||m||_2 |f_m|``, a Lipschitz constant of ``t -> f(t)``."""
    return 2 * math.pi * sum(math.sqrt(sum(e * e for e in m)) * abs(float(c)) for m, c in f.items())


@dataclass(frozen=True)
class ZeroSetReport:
    classification: str
    points: list  # FINITE: dicts with center, residual, cluster_radius
    min_abs: float
    grid: int
    refine_iters: int
    threshold: float
    lipschitz: float
    dimension_estimate: Optional[float] = None
    components: Optional[int] = None
    sample_cloud: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    stable_under_doubling: Optional[bool] = None
    irreducible_asserted: Optional[bool] = None
    notes: tuple = ()

    def to_json_obj(self, include_cloud: bool = False) -> dict:
        obj = {
            "classification": self.classification,
            "points": self.points,
            "min_abs": self.min_abs,
            "grid": self.grid,
            "refine_iters": self.refine_iters,
            "threshold": self.threshold,
            "lipschitz": self.lipschitz,
            "dimension_estimate": self.dimension_estimate,
            "components": self.components,
            "stable_under_doubling": self.stable_under_doubling,
            "coordinates": COORDINATE_NOTE,
            "notes": list(self.notes),
        }
        if include_cloud and self.sample_cloud is not None:
            obj["sample_cloud"] = np.round(self.sample_cloud, 12).tolist()
        return obj


def _eval_with_jacobian(f, pts):
    """Values and Jacobians (as real 2 x d) of ``f`` at an ``(n, d)`` array of points."""
    ms = np.array([m for m, _ in f.items()], dtype=float)
    cs = np.array([float(c) for _, c in f.items()])
    e = np.exp(2j * np.pi * pts @ ms.T) * cs  # (n, terms)
    val = e.sum(axis=1)
    grad = 2j * np.pi * (e @ ms)  # (n, d) complex
    J = np.stack([grad.real, grad.imag], axis=1)  # (n, 2, d)
    return val, J


def _refine(f, pts, iters):
    """Damped Gauss-Newton on ``t -> (Re f, Im f)`` with backtracking."""
    pts = pts.copy()
    val, J = _eval_with_jacobian(f, pts)
    res = np.abs(val)
    for _ in range(iters):
        active = res > 1e-15
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        F = np.stack([val[idx].real, val[idx].imag], axis=1)[..., None]
        step = -(np.linalg.pinv(J[idx], rcond=1e-10) @ F)[..., 0]
        lam = np.ones(len(idx))
        improved = np.zeros(len(idx), dtype=bool)
        for _ in range(12):
            trial = pts[idx] + lam[:, None] * step
            tv, tJ = _eval_with_jacobian(f, trial)
            ok = (np.abs(tv) < res[idx]) & ~improved
            sel = idx[ok]
            pts[sel] = trial[ok]
            val[sel] = tv[ok]
            J[sel] = tJ[ok]
            res[sel] = np.abs(tv[ok])
            improved |= ok
            if improved.all():
                break
            lam = np.where(improved, lam, lam * 0.5)
        if not improved.any():
            break
    return np.mod(pts, 1.0), res


def _periodic_tree(pts):
    pts = np.mod(pts, 1.0)
    pts[pts >= 1.0] = 0.0
    return cKDTree(pts, boxsize=1.0), pts


def _link_components(n, pairs):
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    if len(pairs) == 0:
        return n, np.arange(n)
    pairs = np.asarray(pairs)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    return connected_components(g, directed=False)


def _periodic_diff(a, b):
    d = a - b
    return d - np.round(d)


def _cluster_summary(pts, res, labels, k):
    out = []
    for c in range(k):
        sel = labels == c
        p = pts[sel]
        ref = p[0]
        offs = _periodic_diff(p, ref)
        center = np.mod(ref + offs.mean(axis=0), 1.0)
        center[center >= 1.0] = 0.0
        radius = float(np.abs(_periodic_diff(p, center)).max()) if len(p) else 0.0
        out.append((center, float(res[sel].min()), radius, int(sel.sum())))
    return out


def _box_count(pts, eps):
    return len({tuple(x) for x in np.floor(pts / eps).astype(int)})


def _curve_components(pts, rho=0.03, junction_ratio=0.1, align=0.95, max_points=5000):
    """Count smooth branches of a curve-like cloud.

    Points whose local covariance is not line-like (junctions) are dropped;
    remaining points are linked when they are close, share a tangent, and
    lie along that tangent. Transversal crossings therefore do not merge
    branches, while gaps left by junction removal are bridged.
    """
    if len(pts) > max_points:
        pts = pts[np.random.default_rng(0).choice(len(pts), max_points, replace=False)]
    tree, pts = _periodic_tree(pts)
    n = len(pts)
    tangents = np.zeros_like(pts)
    linear = np.zeros(n, dtype=bool)
    for i, nb in enumerate(tree.query_ball_point(pts, rho)):
        if len(nb) < 3:
            continue
        off = _periodic_diff(pts[nb], pts[i])
        w, v = np.linalg.eigh(off.T @ off)
        tangents[i] = v[:, -1]
        linear[i] = w[-2] <= junction_ratio * w[-1]
    keep = np.nonzero(linear)[0]
    if len(keep) == 0:
        return 0
    sub_tree, sub = _periodic_tree(pts[keep])
    tan = tangents[keep]
    pairs = sub_tree.query_pairs(4 * rho, output_type="ndarray")
    if len(pairs):
        disp = _periodic_diff(sub[pairs[:, 1]], sub[pairs[:, 0]])
        dn = np.linalg.norm(disp, axis=1)
        cos_t = np.abs(np.sum(tan[pairs[:, 0]] * tan[pairs[:, 1]], axis=1))
        cos_d = np.abs(np.sum(tan[pairs[:, 0]] * disp, axis=1)) / np.where(dn > 0, dn, 1)
        ok = (cos_t > align) & ((cos_d > align) | (dn < rho / 3))
        pairs = pairs[ok]
    k, labels = _link_components(len(sub), pairs)
    sizes = np.bincount(labels, minlength=k)
    # tiny fragments left around junctions are not branches
    return int(np.sum(sizes >= max(5, 0.02 * len(sub))))


def _scan_once(f, N, refine_iters, max_seeds):
    d = f.dim
    F = grid_values(f, N)
    absF = np.abs(F)
    L = lipschitz_constant(f)
    delta = L * math.sqrt(d) / (2 * N)
    gmin = float(absF.min())
    if gmin > delta:
        return dict(kind=EMPTY, min_abs=gmin - delta, delta=delta, L=L)
    seed_idx = np.argwhere(absF <= delta)
    if len(seed_idx) > max_seeds:
        order = np.argsort(absF[tuple(seed_idx.T)])
        seed_idx = seed_idx[order[:max_seeds]]
    seeds = seed_idx / N
    pts, res = _refine(f, seeds, refine_iters)
    good = res < CONFIRM_RESIDUAL
    return dict(kind="SEEDS", pts=pts[good], res=res[good], absF=absF, delta=delta, L=L, n_seeds=len(seeds))


def _off_cluster_min(absF, N, cloud, delta, radius, batch=50000):
    """Certified lower bound on ``|f|`` farther than ``radius`` from ``cloud``.

    Cells are visited in increasing ``|f|`` order in batches; the first batch
    containing an off-cloud cell settles the minimum, and if none does the
    largest value seen bounds every unvisited cell from below.
    """
    if len(cloud) == 0:
        return max(0.0, float(absF.min()) - delta)
    flat = absF.ravel()
    order = np.argsort(flat, kind="stable")
    tree, _ = _periodic_tree(np.asarray(cloud, dtype=float))
    for start in range(0, min(len(order), 20 * batch), batch):
        idx = order[start:start + batch]
        pts = np.stack(np.unravel_index(idx, absF.shape), axis=1) / N
        dist, _ = tree.query(pts, k=1)
        off = dist > radius
        if off.any():
            return max(0.0, float(flat[idx[off]].min()) - delta)
    last = order[min(len(order), 20 * batch) - 1]
    return max(0.0, float(flat[last]) - delta)


def zero_scan(
    f: LaurentPolynomial,
    N: int = 64,
    refine_iters: int = 80,
    max_grid: Optional[int] = None,
    max_seeds: int = 20000,
    irreducible_asserted: Optional[bool] = None,
) -> ZeroSetReport:
    """Scan ``|f|`` on an ``N^d`` grid and classify ``Z(f)``.

    EMPTY is certified by the Lipschitz bound ``|f| >= grid_min - L sqrt(d)/(2N)``.
    Otherwise sub-threshold cells seed a damped Gauss-Newton refinement;
    confirmed zeros (``|f| < 1e-10``) are clustered with radius ``2/N`` on
    the periodic torus. All clusters point-like and stable under ``N -> 2N``
    gives FINITE; extended clusters give POSITIVE_DIMENSIONAL with a
    box-counting dimension estimate and a branch count. When nothing is
    confirmed the grid is doubled up to ``max_grid`` and then UNKNOWN is
    returned.
    """
    if N < 8:
        raise ValueError("grid must have N >= 8")
    d = f.dim
    if max_grid is None:
        max_grid = {1: 1 << 16, 2: 2048, 3: 256}.get(d, 32)
    max_grid = max(max_grid, N)
    if f.is_zero():
        return ZeroSetReport(
            POSITIVE_DIMENSIONAL, [], 0.0, N, refine_iters, 0.0, 0.0,
            dimension_estimate=float(d), components=1,
            irreducible_asserted=irreducible_asserted,
            notes=("zero polynomial: Z(f) is the whole torus", COORDINATE_NOTE),
        )
    n = N
    while True:
        scan = _scan_once(f, n, refine_iters, max_seeds)
        if scan["kind"] == EMPTY:
            return ZeroSetReport(
                EMPTY, [], scan["min_abs"], n, refine_iters, scan["delta"], scan["L"],
                irreducible_asserted=irreducible_asserted, notes=(COORDINATE_NOTE,),
            )
        if len(scan["pts"]) or 2 * n > max_grid:
            break
        n *= 2
    if not len(scan["pts"]):
        return ZeroSetReport(
            UNKNOWN, [], 0.0, n, refine_iters, scan["delta"], scan["L"],
            irreducible_asserted=irreducible_asserted,
            notes=("sub-threshold cells found but no zero confirmed", COORDINATE_NOTE),
        )
    N = n
    pts, res = scan["pts"], scan["res"]
    tree, pts = _periodic_tree(pts)
    k, labels = _link_components(len(pts), tree.query_pairs(2.0 / N, output_type="ndarray"))
    clusters = _cluster_summary(pts, res, labels, k)
    point_like = all(c[2] < 1e-6 for c in clusters)
    if point_like:
        centers = np.array([c[0] for c in clusters])
        stable = None
        if (2 * N) ** d <= (max_grid ** d if d <= 2 else 256 ** 3):
            fine = _scan_once(f, 2 * N, refine_iters, max_seeds)
            if fine["kind"] == "SEEDS" and len(fine["pts"]):
                ft, fp = _periodic_tree(fine["pts"])
                fk, fl = _link_components(len(fp), ft.query_pairs(1.0 / N, output_type="ndarray"))
                fc = _cluster_summary(fp, fine["res"], fl, fk)
                if len(fc) == len(clusters):
                    ct, _ = _periodic_tree(centers)
                    dist, _ = ct.query(np.array([c[0] for c in fc]), k=1)
                    stable = bool(np.all(dist < 2.0 / N))
                else:
                    stable = False
            else:
                stable = False
        points = []
        for center, r, radius, count in sorted(clusters, key=lambda c: tuple(np.round(c[0], 9))):
            snapped = _snap(center)
            points.append(
                {
                    "center": [float(x) for x in snapped],
                    "residual": float(abs(evaluate(f, snapped))) if _all_rational(snapped) else r,
                    "cluster_radius": radius,
                    "members": count,
                }
            )
        min_abs = _off_cluster_min(scan["absF"], N, centers, scan["delta"], 4.0 / N)
        return ZeroSetReport(
            FINITE, points, min_abs, N, refine_iters, scan["delta"], scan["L"],
            dimension_estimate=0.0, components=len(points), stable_under_doubling=stable,
            sample_cloud=pts, irreducible_asserted=irreducible_asserted,
            notes=("cluster centers snapped to rationals with denominator <= 64 when within 1e-9",
                   COORDINATE_NOTE),
        )
    # positive dimensional
    n1, n2 = _box_count(pts, 1 / 16), _box_count(pts, 1 / 64)
    dim_est = math.log(max(n2, 1) / max(n1, 1)) / math.log(4)
    dim_round = int(round(dim_est))
    if dim_round <= 1:
        comps = _curve_components(pts)
    else:
        comps = int(k)
    min_abs = _off_cluster_min(scan["absF"], N, pts, scan["delta"], 4.0 / N)
    return ZeroSetReport(
        POSITIVE_DIMENSIONAL, [], min_abs, N, refine_iters, scan["delta"], scan["L"],
        dimension_estimate=dim_est, components=comps, sample_cloud=pts,
        irreducible_asserted=irreducible_asserted,
        notes=("dimension by box counting at scales 1/16 and 1/64 (heuristic)",
               "components counted as smooth branches after junction removal (heuristic)",
               COORDINATE_NOTE),
    )


def _snap(center):
    out = []
    for c in center:
        fr = Fraction(float(c)).limit_denominator(MAX_DENOMINATOR)
        v = float(fr) % 1.0
        out.append(v if abs(float(fr) - c) < 1e-9 or abs(float(fr) - c - 1) < 1e-9 else float(c))
    return out


def _all_rational(pt):
    return all(_as_rational(c) is not None for c in pt)


def certify_zero_free(f: LaurentPolynomial, N: int = 64) -> Optional[float]:
    """A certified lower bound on ``min |f|`` over the torus, or ``None``."""
    rep = zero_scan(f, N)
    return rep.min_abs if rep.classification == EMPTY else None


_DEFAULT_GRID = {1: 4096, 2: 256, 3: 64}


@lru_cache(maxsize=256)
def _cached_scan(f, N):
    return zero_scan(f, N)


def is_expansive_zd(f: LaurentPolynomial, N: Optional[int] = None) -> bool:
    """True iff the zero scan certifies ``Z(f)`` empty (Wiener's lemma on Z^d).

    False when a zero is confirmed; an inconclusive scan raises
    ``CertificateUnavailable`` instead of guessing.
    """
    if f.is_zero():
        return False
    N = N or _DEFAULT_GRID.get(f.dim, 16)
    rep = _cached_scan(f, N)
    if rep.classification == EMPTY:
        return True
    if rep.classification == UNKNOWN:
        raise CertificateUnavailable("zero scan inconclusive; expansivity undecided")
    return False


@dataclass(frozen=True)
class AtoralityHint:
    verdict: str  # "consistent with atoral" | "toral-looking" | "undetermined"
    classification: str
    dimension_estimate: Optional[float]
    irreducible_asserted: bool
    heuristic: bool = True
    note: str = "heuristic classification from a numerical zero scan; not a proof"


def atorality_hint(f: LaurentPolynomial, irreducible_asserted: bool = False, N: Optional[int] = None) -> AtoralityHint:
    d = f.dim
    rep = zero_scan(f, N or _DEFAULT_GRID.get(d, 16))
    cls = rep.classification
    if cls == EMPTY:
        verdict = "consistent with atoral"
        dim = None
    elif cls == FINITE:
        dim = 0.0
        verdict = "consistent with atoral" if d >= 2 else "toral-looking"
    elif cls == POSITIVE_DIMENSIONAL:
        dim = rep.dimension_estimate
        verdict = "consistent with atoral" if round(dim) <= d - 2 else "toral-looking"
    else:
        dim = None
        verdict = "undetermined"
    return AtoralityHint(verdict, cls, dim, bool(irreducible_asserted))
