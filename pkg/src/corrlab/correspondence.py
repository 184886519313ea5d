"""Correspondences built from an involution and a deleted-covering relation.

A correspondence here pairs z with J(w) for every w != z that shares its
value under a rational map q; the involution J conjugates the relation
with its inverse, which is the time-reversal structure the checks in this
module probe.  Correspondences are kept intensionally as the pair (J, q):
images are computed by root-finding on the deleted-covering equation, never
by expanding bivariate coefficient arrays.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

from .algebra import (
    INFINITY,
    MobiusMap,
    Polynomial,
    RationalMap,
    SpherePoint,
    as_point,
    chordal,
    cov0_equation,
    poly_roots,
)
from .constants import CHORDAL_TOL
from .errors import DegenerateParams

# chordal radius used when collapsing root clusters into multiplicities
_CLUSTER_TOL = 1e-6
# numerically verified "whole fiber collapses to one point" tolerance;
# an m-fold fiber computed in doubles spreads like eps^(1/m)
_FIBER_TOL = 5e-2


def _coerce_rational(q) -> RationalMap:
    if isinstance(q, RationalMap):
        return q
    if isinstance(q, Polynomial):
        return RationalMap.from_polynomial(q)
    return RationalMap.from_polynomial(Polynomial(q))


def cov0_image(q, z) -> list[SpherePoint]:
    """The deg(q) - 1 other points with the same image as z under q.

    Repeated roots are reported with multiplicity (never deduplicated), so
    image counts stay constant across critical points; a degree drop in the
    deflated equation contributes points at infinity.
    """
    q = _coerce_rational(q)
    expected = q.degree - 1
    eq = cov0_equation(q, z)
    finite = poly_roots(eq) if eq.degree >= 1 and not eq.is_zero() else []
    pts = [SpherePoint(r) for r in finite]
    pts += [INFINITY] * (expected - len(pts))
    return pts


def _cluster_points(values, tol=_CLUSTER_TOL):
    """Single-linkage clustering of complex values; returns (mean, count) pairs."""
    vals = list(values)
    used = [False] * len(vals)
    out = []
    for i in range(len(vals)):
        if used[i]:
            continue
        cluster = [i]
        used[i] = True
        frontier = [i]
        while frontier:
            a = frontier.pop()
            for j in range(len(vals)):
                if not used[j] and abs(vals[a] - vals[j]) <= tol * (1.0 + abs(vals[a])):
                    used[j] = True
                    cluster.append(j)
                    frontier.append(j)
        mean = sum(vals[j] for j in cluster) / len(cluster)
        out.append((mean, len(cluster)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def rational_critical_points(q) -> list[tuple[SpherePoint, int]]:
    """Finite critical points of q with multiplicities (derivative-numerator roots)."""
    q = _coerce_rational(q)
    w = q.derivative_numerator()
    if w.degree < 1 or w.is_zero():
        return []
    roots = poly_roots(w)
    return [(SpherePoint(c), m) for c, m in _cluster_points(roots)]


def _fiber_points(q: RationalMap, value: SpherePoint) -> list[SpherePoint]:
    """Full preimage q^{-1}(value), counted with multiplicity."""
    deg = q.degree
    if value.is_infinity:
        eq = q.den
    else:
        eq = q.num - q.den * value.value
    finite = poly_roots(eq) if eq.degree >= 1 and not eq.is_zero() else []
    pts = [SpherePoint(r) for r in finite]
    pts += [INFINITY] * (deg - len(pts))
    return pts


def _fiber_collapses_to(q: RationalMap, p: SpherePoint) -> bool:
    fiber = _fiber_points(q, q.apply(p))
    return len(fiber) == q.degree and all(chordal(x, p) < _FIBER_TOL for x in fiber)


def find_totally_invariant_point(q) -> SpherePoint | None:
    """A point whose whole fiber under q is itself (with full multiplicity).

    For a polynomial that point is infinity; otherwise candidates are a
    full-multiplicity pole or a critical point of maximal multiplicity,
    each verified by recomputing the fiber.
    """
    q = _coerce_rational(q)
    if q.is_polynomial():
        return INFINITY
    candidates = []
    if q.den.degree == q.degree:
        clusters = _cluster_points(poly_roots(q.den), tol=1e-2)
        for mean, count in clusters:
            if count == q.degree:
                candidates.append(SpherePoint(mean))
    for mean, count in _cluster_points(
        poly_roots(q.derivative_numerator()), tol=1e-2
    ):
        if count >= q.degree - 1:
            candidates.append(SpherePoint(mean))
    for cand in candidates:
        if _fiber_collapses_to(q, cand):
            return cand
    return None


class JCovCorrespondence:
    """d:d correspondence: deleted-covering relation of q followed by J.

    The rational map q must be conjugate to a polynomial, i.e. carry a
    totally invariant point; this is verified numerically at construction
    unless validation is switched off.
    """

    __slots__ = ("j", "q", "d", "invariant_point")

    def __init__(self, j: MobiusMap, q, invariant_point=None, validate=True):
        q = _coerce_rational(q)
        if q.degree < 2:
            raise DegenerateParams("deg q >= 2 required for a correspondence")
        if validate and j.compose(j).identity_residual() > CHORDAL_TOL:
            raise DegenerateParams("J is not an involution")
        pt = as_point(invariant_point) if invariant_point is not None else None
        if validate:
            if pt is None:
                pt = find_totally_invariant_point(q)
                if pt is None:
                    raise DegenerateParams("q has no totally invariant point")
            elif not _fiber_collapses_to(q, pt):
                raise DegenerateParams("claimed invariant point fails the fiber check")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "d", q.degree - 1)
        object.__setattr__(self, "invariant_point", pt)

    def __setattr__(self, name, val):
        raise AttributeError("JCovCorrespondence is immutable")

    def forward_image(self, z) -> list[SpherePoint]:
        return [self.j.apply(w) for w in cov0_image(self.q, z)]

    def backward_image(self, w) -> list[SpherePoint]:
        return cov0_image(self.q, self.j.apply(w))

    def __repr__(self):
        return f"JCovCorrespondence(d={self.d}, q={self.q!r})"


class GraphCorrespondence:
    """Graph of a single Moebius map with an arbitrary involution attached.

    Not time-reversible in general; serves as the negative control guarding
    the correspondence checks against vacuous passes.
    """

    def __init__(self, m: MobiusMap, j: MobiusMap):
        self.m = m
        self.j = j
        self.d = 1

    def forward_image(self, z):
        return [self.m.apply(z)]

    def backward_image(self, w):
        return [self.m.inverse().apply(w)]


def forward_image(F, z) -> list[SpherePoint]:
    return F.forward_image(z)


def backward_image(F, w) -> list[SpherePoint]:
    return F.backward_image(w)


def membership_residual(F, z, w) -> float:
    """Chordal distance from w to the forward image of z; 0 iff (z, w) related."""
    images = F.forward_image(z)
    if not images:
        return math.inf
    wp = as_point(w)
    return min(chordal(wp, x) for x in images)


def _sample_point(rng: random.Random) -> complex:
    return complex(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5))


def bidegree_check(F, n_samples: int = 40, seed: int = 0) -> tuple[int, int]:
    """Modal (preimage count, image count) over pseudo-random sample points."""
    rng = random.Random(seed)
    fwd = Counter()
    bwd = Counter()
    for _ in range(n_samples):
        z = _sample_point(rng)
        fwd[len(F.forward_image(z))] += 1
        bwd[len(F.backward_image(z))] += 1
    return (bwd.most_common(1)[0][0], fwd.most_common(1)[0][0])


def time_reversal_check(F, n_samples: int = 100, seed: int = 0) -> float:
    """Max residual of (J(w), J(z)) membership over sampled (z, w) in F.

    Correspondences conjugated to their inverse by J keep this at root-solve
    accuracy; relations outside the class produce order-one residuals.
    """
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n_samples):
        z = _sample_point(rng)
        for w in F.forward_image(z):
            r = membership_residual(F, F.j.apply(w), F.j.apply(as_point(z)))
            worst = max(worst, r)
    return worst


def equivalence_relation_check(
    q, n_samples: int = 60, seed: int = 0, include_diagonal: bool = True
) -> float:
    """Max symmetry/transitivity residual of the covering relation of q.

    With the diagonal included the relation "same value under q" is an
    equivalence relation, so two hops from z must land back in the image
    set of z.  Passing include_diagonal=False drops the reflexive copies
    and breaks transitivity, which the negative-control tests rely on.
    """
    q = _coerce_rational(q)
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n_samples):
        z = as_point(_sample_point(rng))
        layer1 = cov0_image(q, z)
        if include_diagonal:
            layer1 = layer1 + [z]
        for w in layer1:
            layer2 = cov0_image(q, w)
            if include_diagonal:
                layer2 = layer2 + [w]
            # symmetry: z must be related to w
            worst = max(worst, min(chordal(z, v) for v in layer2))
            # transitivity: the two-hop points must be related to z
            for v in layer2:
                worst = max(worst, min(chordal(v, x) for x in layer1))
    return worst


@dataclass
class OrbitTree:
    """Breadth-first forward images; level n+1 is the image of level n."""

    root: SpherePoint
    levels: list = field(default_factory=list)
    multiplicities: list = field(default_factory=list)
    truncated: bool = False

    def nodes(self):
        for level in self.levels:
            yield from level


def orbit_tree(F, z, depth: int, max_nodes: int = 512) -> OrbitTree:
    """Forward-image tree, deduplicated within chordal 1e-12 per level."""
    root = as_point(z)
    tree = OrbitTree(root=root, levels=[[root]], multiplicities=[[1]])
    frontier = [root]
    for _ in range(depth):
        raw = []
        for node in frontier:
            raw.extend(F.forward_image(node))
        level = []
        mults = []
        for pt in raw:
            for i, existing in enumerate(level):
                if chordal(pt, existing) < 1e-12:
                    mults[i] += 1
                    break
            else:
                level.append(pt)
                mults.append(1)
        if len(level) > max_nodes:
            level = level[:max_nodes]
            mults = mults[:max_nodes]
            tree.truncated = True
        tree.levels.append(level)
        tree.multiplicities.append(mults)
        frontier = level
        if not frontier:
            break
    return tree


def critical_points_of_q(F) -> list[tuple[SpherePoint, int]]:
    """Critical points of the defining rational map, with multiplicities.

    These are exactly the fixed points of the deleted-covering relation:
    the deflated equation keeps z as a root precisely where q'(z) = 0.
    """
    return rational_critical_points(F.q)


def correspondence_fixed_points(F) -> list[tuple[SpherePoint, complex]]:
    """Finite fixed points of the correspondence with branch multipliers.

    Solves q(J(z)) = q(z) and keeps the genuine solutions (z related to
    itself through a non-deleted branch); the multiplier is the derivative
    of the branch fixed there, q'(z) / (q'(J(z)) J'(z)).
    """
    j, q = F.j, F.q
    if j.is_identity():
        raise DegenerateParams("fixed points of the covering relation are its critical points")
    qj = q.precompose(j)
    eq = q.num * qj.den - qj.num * q.den
    if eq.degree < 1 or eq.is_zero():
        return []
    dnum = q.derivative_numerator()
    den2 = q.den * q.den

    def qprime(z: complex) -> complex:
        return dnum(z) / den2(z)

    out = []
    for r, _ in _cluster_points(poly_roots(eq)):
        pt = SpherePoint(r)
        if membership_residual(F, pt, pt) > 1e-6:
            continue  # deleted-diagonal artifact
        jr = j.apply(pt)
        if jr.is_infinity:
            continue
        jprime = 1.0 / (j.c * r + j.d) ** 2
        denom = qprime(jr.value) * jprime
        if denom == 0:
            continue
        out.append((pt, qprime(r) / denom))
    return out


# ---------------------------------------------------------------------------
# The explicit mating family


@dataclass(frozen=True)
class MatingFamilyParams:
    """Parameters (a, k) of the explicit quadratic mating family."""

    a: complex
    k: complex

    def __post_init__(self):
        a = complex(self.a)
        if min(abs(a - 1.0), abs(a + 1.0)) < 1e-12:
            raise DegenerateParams("a = +-1 degenerates the coordinate maps")


def mating_family(params: MatingFamilyParams) -> JCovCorrespondence:
    """The 2:2 family J o Cov0 with J(z) = -z and q = (t^3 - 3kt) o M.

    M(z) = (a z + 1)/(z + 1) carries the pair relation written in the
    coordinates u = M(z), v = M(-w) onto the deleted-covering form: the
    difference of cubic values factors as (u - v)(u^2 + uv + v^2 - 3k) and
    u - v is proportional to z + w, so the quadratic factor vanishing is
    literally membership in J o Cov0.  The pole of M is the totally
    invariant point of q.
    """
    a, k = complex(params.a), complex(params.k)
    m = MobiusMap(a, 1, 1, 1)
    cubic = Polynomial([0, -3.0 * k, 0, 1])
    q = RationalMap.from_polynomial(cubic).precompose(m)
    j = MobiusMap.negation()
    return JCovCorrespondence(j, q, invariant_point=SpherePoint(-1.0 + 0j))
