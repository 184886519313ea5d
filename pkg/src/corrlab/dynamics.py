"""Escape-time dynamics, connectedness tests, and equipotential machinery.

Covers the scalar (per-point) side: bounded-orbit classification, the
escape-rate (Green) function, and inverse-iteration sampling of
equipotential curves, including the fundamental annulus between levels t
and t^d and its boundary involution.  The raster module re-implements the
hot escape loops in vectorized form; the functions here stay scalar and
serve as the reference semantics.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

from .algebra import Polynomial, poly_roots
from .errors import BranchAmbiguity, DegenerateParams

# pullbacks start from the largest equipotential level that fits doubles
_BIG_LEVEL = 1e12
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Families and escape results


@dataclass(frozen=True)
class FamilySpec:
    """One of the named one-parameter families, or a fixed polynomial."""

    kind: str  # "unicritical" | "parabolic_cubic" | "fixed"
    degree: int = 2
    poly: Polynomial | None = None

    @classmethod
    def unicritical(cls, degree: int) -> "FamilySpec":
        if degree < 2:
            raise DegenerateParams("unicritical degree must be >= 2")
        return cls(kind="unicritical", degree=degree)

    @classmethod
    def parabolic_cubic(cls) -> "FamilySpec":
        return cls(kind="parabolic_cubic", degree=3)

    @classmethod
    def fixed(cls, poly: Polynomial) -> "FamilySpec":
        return cls(kind="fixed", degree=poly.degree, poly=poly)

    def polynomial(self, param: complex = 0j) -> Polynomial:
        if self.kind == "unicritical":
            return Polynomial([param] + [0] * (self.degree - 1) + [1])
        if self.kind == "parabolic_cubic":
            # z^3 + a z^2 + z: fixes 0 with multiplier exactly 1 for every a
            return Polynomial([0, 1, param, 1])
        if self.kind == "fixed":
            return self.poly
        raise DegenerateParams(f"unknown family kind {self.kind!r}")


@dataclass(frozen=True)
class EscapeResult:
    escaped: bool
    first_exit_index: int | None
    last_point: complex

    @property
    def bounded(self) -> bool:
        return not self.escaped


def escape_radius(f: Polynomial) -> float:
    """Radius beyond which |f(z)| > |z| is guaranteed.

    Uses max(2, (2 + sum of lower coefficient moduli) / |lead|), a coarse
    Cauchy-type bound chosen so the growth inequality is provable for any
    polynomial of degree >= 2, not just monic ones.
    """
    n = f.degree
    if n < 2:
        raise ValueError("escape radius needs degree >= 2")
    s = sum(abs(c) for c in f.coeffs[:-1])
    return max(2.0, (2.0 + s) / abs(f.leading))


def escape_time(f: Polynomial, z0: complex, max_iter: int = 1000,
                radius: float | None = None) -> EscapeResult:
    """First orbit index with |z| > radius, else bounded after max_iter steps."""
    r = escape_radius(f) if radius is None else float(radius)
    r2 = r * r
    z = complex(z0)
    for n in range(max_iter + 1):
        if z.real * z.real + z.imag * z.imag > r2:
            return EscapeResult(True, n, z)
        if n < max_iter:
            z = f(z)
    return EscapeResult(False, None, z)


def critical_points(f: Polynomial) -> list[complex]:
    """Roots of f', with multiplicity."""
    if f.degree < 2:
        raise ValueError("critical points need degree >= 2")
    return poly_roots(f.derivative())


def in_connectedness_locus(family: FamilySpec, param: complex,
                           max_iter: int = 1000,
                           radius: float | None = None) -> bool:
    """True iff every finite critical orbit stays bounded for max_iter steps.

    Finite-iteration approximation with one-sided error: slow escapers can
    be misreported as inside; raising max_iter tightens the answer.
    """
    f = family.polynomial(param)
    if family.kind == "unicritical":
        crits = [0j]
    else:
        crits = critical_points(f)
    return all(not escape_time(f, c, max_iter, radius).escaped for c in crits)


# ---------------------------------------------------------------------------
# Monic-centered normalization


@dataclass(frozen=True)
class AffineConjugacy:
    """z -> alpha z + beta and its inverse."""

    alpha: complex
    beta: complex

    def apply(self, z: complex) -> complex:
        return self.alpha * z + self.beta

    def inverse_apply(self, z: complex) -> complex:
        return (z - self.beta) / self.alpha


@functools.lru_cache(maxsize=256)
def _monic_centered_cached(coeffs):
    f = Polynomial(coeffs)
    n = f.degree
    lead = f.leading
    alpha = lead ** (-1.0 / (n - 1)) if lead != 1 else 1.0 + 0j
    g1 = Polynomial([c * alpha ** (k - 1) for k, c in enumerate(f.coeffs)])
    # force the leading coefficient to exactly 1 (it is 1 up to rounding)
    g1 = Polynomial(list(g1.coeffs[:-1]) + [1.0 + 0j])
    shift = -g1.coeffs[n - 1] / n
    g = g1.compose_affine(1.0 + 0j, shift) - Polynomial([shift])
    g = Polynomial(list(g.coeffs[:-1]) + [1.0 + 0j])
    return g, AffineConjugacy(alpha, alpha * shift)


def monic_centered(f: Polynomial):
    """Affine conjugacy f = A o g o A^{-1} with g monic and centered."""
    if f.degree < 2:
        raise ValueError("normalization needs degree >= 2")
    return _monic_centered_cached(f.coeffs)


# ---------------------------------------------------------------------------
# Green's function


def green_function(f: Polynomial, z: complex, max_iter: int = 1000) -> float:
    """Escape rate lim d^{-n} log|f^n(z)|; 0 for points judged bounded.

    Exact for monic maps; others are affinely conjugated to monic-centered
    form first, and the stored conjugacy is applied to the argument.
    """
    g, aff = monic_centered(f)
    d = g.degree
    w = aff.inverse_apply(complex(z))
    dinv = 1.0
    for _ in range(max_iter):
        aw = abs(w)
        if aw > _BIG_LEVEL:
            return math.log(aw) * dinv
        w = g(w)
        dinv /= d
    return 0.0


# ---------------------------------------------------------------------------
# Equipotential pullbacks (inverse Boettcher sampling)


def _require_connected(g: Polynomial, max_iter: int = 256):
    # heuristic: all critical orbits bounded for a few hundred steps
    r = escape_radius(g)
    for c in critical_points(g):
        if escape_time(g, c, max_iter, r).escaped:
            raise ValueError(
                "filled Julia set appears disconnected (a critical orbit escapes)"
            )


def _select_branch(cands, ref):
    ranked = sorted(cands, key=lambda c: (abs(c - ref), c.real, c.imag))
    best = ranked[0]
    if len(ranked) > 1:
        second = ranked[1]
        if abs(best - second) < 1e-9 * (1.0 + abs(best)):
            raise BranchAmbiguity("preimage candidates collide (critical pullback)")
        d1, d2 = abs(best - ref), abs(second - ref)
        if d2 - d1 < 1e-9 * (1.0 + d1):
            raise BranchAmbiguity("branch selection is a numerical tie")
    return best


def _equipotential_pullback(g: Polynomial, t: float, theta: float, depth: int):
    d = g.degree
    logt = math.log(t)
    cap = math.log(_BIG_LEVEL)
    m = 0
    while m < depth and (d ** (m + 1)) * logt <= cap:
        m += 1
    levels = [math.exp((d ** j) * logt) for j in range(m + 1)]
    angles = [math.remainder((d ** j) * theta, TWO_PI) for j in range(m + 1)]
    z = levels[m] * cmath.exp(1j * angles[m])
    for j in range(m - 1, -1, -1):
        target = levels[j] * cmath.exp(1j * angles[j])
        prev_target = levels[j + 1] * cmath.exp(1j * angles[j + 1])
        # conformal prediction: rotate/scale the previous point by the exact
        # coordinate ratio, which tracks the correct root branch continuously
        ref = z * (target / prev_target)
        cands = poly_roots(g - Polynomial([z]))
        z = _select_branch(cands, ref)
    return z


def bottcher_equipotential_point(f: Polynomial, t: float, theta: float,
                                 depth: int = 24) -> complex:
    """Approximate the point at equipotential level t and external angle theta.

    Starts from the exact coordinate at the deepest level whose modulus
    t^(d^m) still fits comfortably in doubles (capped by `depth`) and pulls
    back under f, selecting the root branch nearest a conformal prediction.
    The escape rate of the result lies within 1e-6 of log t.
    """
    if t <= 1.0:
        raise ValueError("equipotential level must satisfy t > 1")
    g, aff = monic_centered(f)
    _require_connected(g)
    z = _equipotential_pullback(g, float(t), float(theta), int(depth))
    return aff.apply(z)


@dataclass(frozen=True)
class AnnulusSample:
    """Sampled boundaries of the annulus between levels t and t^d."""

    t: float
    inner_boundary: tuple
    outer_boundary: tuple


def fundamental_annulus(f: Polynomial, t: float, n_points: int,
                        depth: int = 24) -> AnnulusSample:
    """Inner (level t) and outer (level t^d) equipotential polylines.

    Sampled at angles 2 pi i / n_points; the map sends the inner sample at
    angle theta to the outer sample at angle d * theta, which is the d:1
    covering the surgery construction glues along.
    """
    if n_points < 1:
        raise ValueError("need at least one sample point")
    d = f.degree
    t = float(t)
    inner = []
    outer = []
    for i in range(n_points):
        theta = TWO_PI * i / n_points
        inner.append(bottcher_equipotential_point(f, t, theta, depth))
        outer.append(bottcher_equipotential_point(f, t ** d, theta, depth))
    return AnnulusSample(t=t, inner_boundary=tuple(inner), outer_boundary=tuple(outer))


def boundary_involution_j(f: Polynomial, t: float, theta: float,
                          depth: int = 24) -> complex:
    """Outer-boundary involution: the point at level t^d and angle -theta.

    Orientation-reversing on the outer boundary, with fixed points at the
    angles 0 and pi.
    """
    d = f.degree
    return bottcher_equipotential_point(f, float(t) ** d, -float(theta), depth)
