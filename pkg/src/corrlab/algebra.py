"""Moebius maps, polynomials, and rational maps on the Riemann sphere.

Everything downstream reduces to the primitives collected here: sphere
points with an explicit point at infinity, projectivized 2x2 complex
matrices, a simultaneous-iteration polynomial root finder with
deterministic initialization, and the deleted-covering equation that
turns "all the other points with the same image under q" into a
root-finding problem.

All types are immutable values and all operations are pure functions, so
they are safe to evaluate from many threads at once.
"""

from __future__ import annotations

import cmath
import math

from .constants import ALGEBRAIC_TOL, CHORDAL_TOL, INF_THRESHOLD
from .errors import (
    DegenerateAxis,
    DegenerateConfiguration,
    DegenerateMap,
    IdentityMap,
    NoConvergence,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_TRIM_TOL = 1e-14


# ---------------------------------------------------------------------------
# Points on the sphere


class SpherePoint:
    """A point of the Riemann sphere: a finite complex value or infinity.

    Infinity is a distinct tag, never a large float; finite values are
    required to be free of NaNs.  Comparisons should go through the
    chordal metric (see :func:`chordal`), which is uniformly accurate on
    the whole sphere.
    """

    __slots__ = ("value", "is_infinity")

    def __init__(self, value=0j, is_infinity=False):
        if is_infinity:
            object.__setattr__(self, "value", 0j)
            object.__setattr__(self, "is_infinity", True)
            return
        v = complex(value)
        if math.isnan(v.real) or math.isnan(v.imag):
            raise ValueError("sphere point cannot be NaN")
        if math.isinf(v.real) or math.isinf(v.imag):
            object.__setattr__(self, "value", 0j)
            object.__setattr__(self, "is_infinity", True)
            return
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "is_infinity", False)

    def __setattr__(self, name, val):
        raise AttributeError("SpherePoint is immutable")

    @classmethod
    def infinity(cls):
        return cls(is_infinity=True)

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.value == other.value

    def __hash__(self):
        return hash(("inf",)) if self.is_infinity else hash(self.value)

    def __repr__(self):
        return "SpherePoint(inf)" if self.is_infinity else f"SpherePoint({self.value!r})"


INFINITY = SpherePoint.infinity()


def as_point(z) -> SpherePoint:
    """Coerce a complex number (or SpherePoint) to a SpherePoint."""
    if isinstance(z, SpherePoint):
        return z
    return SpherePoint(z)


def chordal(z, w) -> float:
    """Chordal distance on the sphere, d(z, w) = 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)).

    Exact isometry under z -> 1/z is used to keep the formula stable for
    huge inputs; the maximum distance (antipodes) is 2.
    """
    p, q = as_point(z), as_point(w)
    if p.is_infinity and q.is_infinity:
        return 0.0
    if p.is_infinity or q.is_infinity:
        v = q.value if p.is_infinity else p.value
        return 2.0 / math.hypot(1.0, abs(v))
    zv, wv = p.value, q.value
    az, aw = abs(zv), abs(wv)
    if az > 1e150 and aw > 1e150:
        zv, wv = 1.0 / zv, 1.0 / wv
        az, aw = abs(zv), abs(wv)
    return 2.0 * ((abs(zv - wv) / math.hypot(1.0, az)) / math.hypot(1.0, aw))


def _point_key(p: SpherePoint):
    # deterministic ordering: finite points by (Re, Im), infinity last
    if p.is_infinity:
        return (1, 0.0, 0.0)
    return (0, p.value.real, p.value.imag)


def ordered_pair(p: SpherePoint, q: SpherePoint):
    """Sort two sphere points by the library's fixed convention."""
    return (p, q) if _point_key(p) <= _point_key(q) else (q, p)


# ---------------------------------------------------------------------------
# Moebius maps


class MobiusMap:
    """z -> (a z + b) / (c z + d), stored with determinant normalized to 1.

    The normalization leaves the usual PSL sign ambiguity; identity tests
    and residuals account for it.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        scale = max(abs(a), abs(b), abs(c), abs(d))
        det = a * d - b * c
        # long word products legitimately have det << scale^2 (nearly
        # rank-1 projectively), so only reject hard degeneracy
        if scale == 0.0 or abs(det) < 1e-30 * scale * scale:
            raise DegenerateMap(f"determinant {det!r} vanishes")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    def __setattr__(self, name, val):
        raise AttributeError("MobiusMap is immutable")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def inversion(cls):
        """z -> 1/z."""
        return cls(0, 1, 1, 0)

    @classmethod
    def negation(cls):
        """z -> -z."""
        return cls(-1, 0, 0, 1)

    def apply(self, z) -> SpherePoint:
        p = as_point(z)
        if p.is_infinity:
            if self.c == 0:
                return INFINITY
            return SpherePoint(self.a / self.c)
        v = p.value
        if abs(v) > INF_THRESHOLD:
            # chart swap: evaluate (a + b w)/(c + d w) at w = 1/z
            w = 1.0 / v
            num = self.a + self.b * w
            den = self.c + self.d * w
        else:
            num = self.a * v + self.b
            den = self.c * v + self.d
        if den == 0:
            return INFINITY
        out = num / den
        if math.isinf(out.real) or math.isinf(out.imag):
            return INFINITY
        return SpherePoint(out)

    __call__ = apply

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "MobiusMap":
        if n < 0:
            return self.inverse().power(-n)
        out = MobiusMap.identity()
        base = self
        while n:
            if n & 1:
                out = out.compose(base)
            base = base.compose(base)
            n >>= 1
        return out

    def trace(self) -> complex:
        return self.a + self.d

    def identity_residual(self) -> float:
        """Entrywise distance to +-identity (PSL sign folded out)."""
        r_plus = max(abs(self.a - 1), abs(self.b), abs(self.c), abs(self.d - 1))
        r_minus = max(abs(self.a + 1), abs(self.b), abs(self.c), abs(self.d + 1))
        return min(r_plus, r_minus)

    def is_identity(self, tol=CHORDAL_TOL) -> bool:
        return self.identity_residual() <= tol

    def fixed_points(self):
        """Both fixed points, ordered; a parabolic map returns a doubled point."""
        if self.is_identity():
            raise IdentityMap("identity fixes everything")
        if abs(self.c) <= 1e-14:
            if abs(self.a - self.d) <= 1e-14:
                return (INFINITY, INFINITY)
            return ordered_pair(SpherePoint(self.b / (self.d - self.a)), INFINITY)
        disc = (self.d - self.a) ** 2 + 4.0 * self.b * self.c
        s = cmath.sqrt(disc)
        r1 = (self.a - self.d + s) / (2.0 * self.c)
        r2 = (self.a - self.d - s) / (2.0 * self.c)
        return ordered_pair(SpherePoint(r1), SpherePoint(r2))

    def multiplier_at(self, p) -> complex:
        """Derivative of the map at a fixed point (in the chart at that point)."""
        p = as_point(p)
        if p.is_infinity:
            inv = MobiusMap.inversion()
            return (inv @ self @ inv).multiplier_at(SpherePoint(0j))
        den = self.c * p.value + self.d
        return 1.0 / (den * den)

    def __repr__(self):
        return f"MobiusMap({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


def mobius_to_zero_one_inf(z0, z1, zinf) -> MobiusMap:
    """The Moebius map sending z0 -> 0, z1 -> 1, zinf -> infinity."""
    p0, p1, pi = as_point(z0), as_point(z1), as_point(zinf)
    if p0.is_infinity:
        return MobiusMap(0, p1.value - pi.value, 1, -pi.value)
    if p1.is_infinity:
        return MobiusMap(1, -p0.value, 1, -pi.value)
    if pi.is_infinity:
        return MobiusMap(1, -p0.value, 0, p1.value - p0.value)
    return MobiusMap(
        p1.value - pi.value,
        -p0.value * (p1.value - pi.value),
        p1.value - p0.value,
        -pi.value * (p1.value - p0.value),
    )


def _send_zero_inf(p: SpherePoint, q: SpherePoint) -> MobiusMap:
    # any Moebius map with g(0) = p, g(inf) = q
    if p.is_infinity:
        return MobiusMap(q.value, 1, 1, 0)
    if q.is_infinity:
        return MobiusMap(1, p.value, 0, 1)
    return MobiusMap(q.value, p.value, 1, 1)


def elliptic_about(p, q, theta: float) -> MobiusMap:
    """Rotation by angle theta about the axis through p and q.

    Conjugates z -> e^{i theta} z by a map sending 0 -> p, inf -> q, so
    the result fixes p and q with multiplier e^{i theta} at p.
    """
    pp, qq = as_point(p), as_point(q)
    if chordal(pp, qq) < CHORDAL_TOL:
        raise DegenerateAxis("axis endpoints coincide")
    rot = MobiusMap(cmath.exp(0.5j * theta), 0, 0, cmath.exp(-0.5j * theta))
    g = _send_zero_inf(pp, qq)
    return g @ rot @ g.inverse()


def cross_ratio(z1, z2, w1, w2) -> complex:
    """Image of z1 under the Moebius map sending w1 -> 0, z2 -> 1, w2 -> inf.

    With (w1, w2, z2) = (0, inf, 1) this is just z1, which fixes the
    convention used for parametrizing group representations.
    """
    pts = [as_point(x) for x in (z1, z2, w1, w2)]
    for i in range(4):
        for j in range(i + 1, 4):
            if chordal(pts[i], pts[j]) < CHORDAL_TOL:
                raise DegenerateConfiguration("cross-ratio arguments must be distinct")
    m = mobius_to_zero_one_inf(pts[2], pts[1], pts[3])
    image = m.apply(pts[0])
    if image.is_infinity:
        raise DegenerateConfiguration("degenerate cross-ratio value")
    return image.value


# ---------------------------------------------------------------------------
# Polynomials


class Polynomial:
    """Complex polynomial; coeffs[k] multiplies z**k.

    Trailing coefficients below 1e-14 of the largest modulus are trimmed
    at construction so `degree` is meaningful.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [complex(c) for c in coeffs] or [0j]
        for c in cs:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("polynomial coefficients must be finite")
        top = max(abs(c) for c in cs)
        if top > 0.0:
            while len(cs) > 1 and abs(cs[-1]) <= _TRIM_TOL * top:
                cs.pop()
        else:
            cs = [0j]
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, val):
        raise AttributeError("Polynomial is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def eval_point(self, p) -> SpherePoint:
        p = as_point(p)
        if p.is_infinity:
            return INFINITY if self.degree >= 1 else SpherePoint(self.coeffs[0])
        v = self(p.value)
        if math.isinf(v.real) or math.isinf(v.imag) or math.isnan(v.real) or math.isnan(v.imag):
            return INFINITY
        return SpherePoint(v)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0])
        return Polynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def __add__(self, other):
        o = other if isinstance(other, Polynomial) else Polynomial([other])
        n = max(len(self.coeffs), len(o.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(o.coeffs) + [0j] * (n - len(o.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        o = other if isinstance(other, Polynomial) else Polynomial([other])
        return self + (o * (-1))

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Polynomial(out)
        s = complex(other)
        return Polynomial([c * s for c in self.coeffs])

    __rmul__ = __mul__

    def compose_affine(self, alpha: complex, beta: complex) -> "Polynomial":
        """Coefficients of p(alpha z + beta)."""
        lin = Polynomial([beta, alpha])
        acc = Polynomial([0])
        for c in reversed(self.coeffs):
            acc = acc * lin + Polynomial([c])
        return acc

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"


def _horner(cs, z):
    acc = 0j
    for c in reversed(cs):
        acc = acc * z + c
    return acc


def _eval_scale(cs, z):
    # magnitude bound for the evaluation, used to scale residuals
    az = abs(z)
    acc = 0.0
    p = 1.0
    for c in cs:
        acc += abs(c) * p
        p *= az
    return max(acc, 1e-30)


def _cluster_polish(zs, cs):
    """Average numerically unresolvable root clusters onto their mean.

    Simultaneous iteration leaves an m-fold root smeared over a disk of
    radius about eps^(1/m); the cluster mean is far more accurate than any
    member, and the largest merged cluster is then recentered so the total
    root sum matches the (perfectly conditioned) Vieta coefficient ratio.
    Pairs farther apart than ~sqrt(eps) are genuinely resolvable and left
    untouched.
    """
    m = len(zs)
    out = list(zs)
    used = [False] * m
    merged = []
    for i in range(m):
        if used[i]:
            continue
        cluster = [i]
        used[i] = True
        frontier = [i]
        while frontier:
            a = frontier.pop()
            for j in range(m):
                if not used[j] and abs(zs[a] - zs[j]) <= 5e-7 * (1.0 + abs(zs[a])):
                    used[j] = True
                    cluster.append(j)
                    frontier.append(j)
        if len(cluster) > 1:
            mean = sum(zs[j] for j in cluster) / len(cluster)
            for j in cluster:
                out[j] = mean
            merged.append(cluster)
    if merged:
        merged.sort(key=len, reverse=True)
        target = -cs[-2] / cs[-1]
        diff = target - sum(out)
        big = merged[0]
        for j in big:
            out[j] += diff / len(big)
    return out


def poly_roots(p: Polynomial, tol: float = ALGEBRAIC_TOL, max_iter: int = 300):
    """All deg(p) roots with multiplicity, by Aberth simultaneous iteration.

    Initialization is deterministic: the Cauchy-bound circle with angles
    stepped by the golden ratio, so identical inputs always produce the
    identical root list (and therefore reproducible rasters).  Each root
    satisfies |p(root)| <= tol * scale with scale the evaluation-magnitude
    bound at the root.

    Raises NoConvergence (carrying partial results) if the budget runs out.
    """
    cs = list(p.coeffs)
    n = len(cs) - 1
    if n < 1:
        raise ValueError("poly_roots needs degree >= 1")
    top = max(abs(c) for c in cs)
    if top == 0.0:
        raise ValueError("zero polynomial has no well-defined roots")
    cs = [c / top for c in cs]

    # exact zero roots peel off without iteration
    nz = 0
    while nz < n and cs[nz] == 0:
        nz += 1
    zero_roots = [0j] * nz
    cs = cs[nz:]
    m = len(cs) - 1
    if m == 0:
        return zero_roots
    if m == 1:
        return zero_roots + [-cs[0] / cs[1]]

    lead = cs[-1]
    radius = 1.0 + max(abs(c / lead) for c in cs[:-1])
    z = [
        radius * cmath.exp(2j * math.pi * ((k * _GOLDEN + 0.25 / m) % 1.0))
        for k in range(m)
    ]
    dcs = [k * c for k, c in enumerate(cs)][1:]
    locked = [False] * m

    for _ in range(max_iter):
        all_done = True
        for k in range(m):
            if locked[k]:
                continue
            pv = _horner(cs, z[k])
            if pv == 0:
                locked[k] = True
                continue
            dv = _horner(dcs, z[k])
            if dv == 0:
                z[k] += (1e-8 + 1e-8j) * (1.0 + abs(z[k]))
                all_done = False
                continue
            newton = pv / dv
            ssum = 0j
            for j in range(m):
                if j == k:
                    continue
                dz = z[k] - z[j]
                if dz == 0:
                    dz = (1e-12 + 1e-12j) * (k - j) * (1.0 + abs(z[k]))
                ssum += 1.0 / dz
            den = 1.0 - newton * ssum
            step = newton if den == 0 else newton / den
            z[k] -= step
            if abs(step) <= 1e-15 * (1.0 + abs(z[k])):
                locked[k] = True
            else:
                all_done = False
        if all_done:
            break

    z = _cluster_polish(z, cs)
    conv = [abs(_horner(cs, zz)) <= tol * _eval_scale(cs, zz) for zz in z]
    roots = zero_roots + z
    if not all(conv):
        raise NoConvergence(
            f"root finder did not converge for degree {n}",
            roots=roots,
            converged=[True] * nz + conv,
        )
    return roots


# ---------------------------------------------------------------------------
# Rational maps


class RationalMap:
    """Quotient of two polynomials acting on the sphere."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, check_common_roots=True):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        if den is None:
            den = Polynomial([1])
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero():
            raise ValueError("rational map denominator is zero")
        if check_common_roots and num.degree >= 1 and den.degree >= 1:
            try:
                rn = poly_roots(num)
                rd = poly_roots(den)
            except NoConvergence:
                rn = rd = []
            for a in rn:
                for b in rd:
                    if chordal(a, b) < CHORDAL_TOL:
                        raise ValueError("numerator and denominator share a root")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, val):
        raise AttributeError("RationalMap is immutable")

    @classmethod
    def from_polynomial(cls, p) -> "RationalMap":
        return cls(p, Polynomial([1]), check_common_roots=False)

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def apply(self, z) -> SpherePoint:
        p = as_point(z)
        if p.is_infinity:
            dn, dd = self.num.degree, self.den.degree
            if dn > dd:
                return INFINITY
            if dn < dd:
                return SpherePoint(0j)
            return SpherePoint(self.num.leading / self.den.leading)
        v = p.value
        if abs(v) > INF_THRESHOLD:
            inv = MobiusMap.inversion()
            return self.precompose(inv).apply(SpherePoint(1.0 / v))
        nv = self.num(v)
        dv = self.den(v)
        if dv == 0:
            return INFINITY
        out = nv / dv
        if math.isinf(out.real) or math.isinf(out.imag):
            return INFINITY
        return SpherePoint(out)

    __call__ = apply

    def derivative_numerator(self) -> Polynomial:
        """Numerator of the derivative: num' * den - num * den'."""
        return self.num.derivative() * self.den - self.num * self.den.derivative()

    def precompose(self, m: MobiusMap) -> "RationalMap":
        """The rational map q(m(z)), homogenized to a polynomial quotient."""
        n = self.degree
        lin1 = Polynomial([m.b, m.a])  # a z + b
        lin0 = Polynomial([m.d, m.c])  # c z + d
        pow1 = [Polynomial([1])]
        pow0 = [Polynomial([1])]
        for _ in range(n):
            pow1.append(pow1[-1] * lin1)
            pow0.append(pow0[-1] * lin0)

        def homogenize(poly):
            acc = Polynomial([0])
            for k, c in enumerate(poly.coeffs):
                acc = acc + pow1[k] * pow0[n - k] * c
            return acc

        return RationalMap(homogenize(self.num), homogenize(self.den),
                           check_common_roots=False)

    def __repr__(self):
        return f"RationalMap({self.num!r}, {self.den!r})"


# ---------------------------------------------------------------------------
# Deleted-covering equation


def _synthetic_divide(p: Polynomial, z: complex) -> Polynomial:
    """Quotient of p by (w - z); the remainder is discarded."""
    cs = p.coeffs
    m = len(cs) - 1
    if m < 1:
        return Polynomial([0])
    b = [0j] * m
    b[m - 1] = cs[m]
    for k in range(m - 2, -1, -1):
        b[k] = cs[k + 1] + z * b[k + 1]
    return Polynomial(b)


def cov0_equation(q: RationalMap, z) -> Polynomial:
    """Polynomial in w whose roots are the other points sharing q's value at z.

    Forms num(w) * den(z) - num(z) * den(w) and deflates the root w = z by
    one synthetic-division pass, so the factor is removed exactly even when
    a second root collides with z at a critical point.  A degree drop below
    deg(q) - 1 signals images at infinity.  Inputs at (or chordally near)
    infinity are routed through the chart swap z -> 1/z: the returned
    polynomial is then the reversal of the swapped-chart equation, whose
    roots are the reciprocals, i.e. the images in the original chart.
    """
    p = as_point(z)
    if p.is_infinity or abs(p.value) > INF_THRESHOLD:
        inv = MobiusMap.inversion()
        qi = q.precompose(inv)
        zi = 0j if p.is_infinity else 1.0 / p.value
        e = cov0_equation(qi, zi)
        expected = q.degree - 1
        padded = list(e.coeffs) + [0j] * (expected + 1 - len(e.coeffs))
        return Polynomial(list(reversed(padded)))
    zv = p.value
    pz = q.num(zv)
    dz = q.den(zv)
    full = q.num * dz - q.den * pz
    return _synthetic_divide(full, zv)
