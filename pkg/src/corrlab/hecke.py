"""Moebius representations of the free product C2 * C_{d+1}.

Builds generator pairs (an order-2 rotation and an order-(d+1) rotation)
from a cross-ratio parameter, constructs the unique involution that
anti-commutes with both, enumerates reduced words, samples orbit points
toward the limit set, and runs a trace-based discreteness heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    INFINITY,
    MobiusMap,
    SpherePoint,
    as_point,
    chordal,
    cross_ratio,
    elliptic_about,
    mobius_to_zero_one_inf,
)
from .constants import CHORDAL_TOL, JORGENSEN_MARGIN, RELATION_TOL
from .errors import DegenerateAxes, DegenerateParams, ZeroInput


@dataclass(frozen=True)
class HeckeParams:
    """Degree parameter d (group index d+1) and cross-ratio kappa."""

    d: int
    kappa: complex

    def __post_init__(self):
        if self.d < 2:
            raise DegenerateParams("d must be >= 2")
        k = complex(self.kappa)
        if not (math.isfinite(k.real) and math.isfinite(k.imag)):
            raise DegenerateParams("kappa must be finite")
        if min(abs(k), abs(k - 1.0)) < 1e-12:
            raise DegenerateParams("kappa in {0, 1} is degenerate")


@dataclass(frozen=True)
class HeckeRep:
    """Generators, the anti-commuting involution, and their fixed points."""

    d: int
    rho: MobiusMap
    sigma: MobiusMap
    chi: MobiusMap
    rho_fixed: tuple          # P, P'
    sigma_fixed: tuple        # Q, Q'
    chi_rho_fixed: tuple      # R, R'
    chi_sigma_fixed: tuple    # S, S'


def chi_involution(rho: MobiusMap, sigma: MobiusMap) -> MobiusMap:
    """The unique involution swapping the fixed pairs of both rotations.

    Determined by the three conditions P -> P', P' -> P, Q -> Q'; the
    fourth swap, the involution property, and the anti-commutation
    relations are asserted rather than assumed.
    """
    p, p2 = rho.fixed_points()
    q, q2 = sigma.fixed_points()
    for x in (p, p2):
        for y in (q, q2):
            if chordal(x, y) < CHORDAL_TOL:
                raise DegenerateAxes("rotation axes share an endpoint")
    m1 = mobius_to_zero_one_inf(p, q, p2)
    m2 = mobius_to_zero_one_inf(p2, q2, p)
    chi = m2.inverse() @ m1
    checks = [
        chordal(chi.apply(q2), q),
        (chi @ chi).identity_residual(),
        (chi @ rho @ chi @ rho).identity_residual(),
        (chi @ sigma @ chi @ sigma).identity_residual(),
    ]
    if max(checks) > RELATION_TOL:
        raise DegenerateAxes(
            f"anti-commuting involution failed its defining relations: {checks}"
        )
    return chi


def hecke_rep_from_generators(d: int, rho: MobiusMap, sigma: MobiusMap) -> HeckeRep:
    """Assemble a representation from explicit generators, validating orders."""
    if rho.power(d + 1).identity_residual() > RELATION_TOL:
        raise DegenerateParams(f"rho is not of order {d + 1}")
    if sigma.power(2).identity_residual() > RELATION_TOL:
        raise DegenerateParams("sigma is not an involution")
    if rho.is_identity() or sigma.is_identity():
        raise DegenerateParams("generators must be non-trivial")
    chi = chi_involution(rho, sigma)
    return HeckeRep(
        d=d,
        rho=rho,
        sigma=sigma,
        chi=chi,
        rho_fixed=rho.fixed_points(),
        sigma_fixed=sigma.fixed_points(),
        chi_rho_fixed=(chi @ rho).fixed_points(),
        chi_sigma_fixed=(chi @ sigma).fixed_points(),
    )


def standard_hecke(d: int) -> HeckeRep:
    """The classical generator pair: sigma = -1/z and the order-(d+1) rotation
    rho(z) = -(2 cos(pi/(d+1)) z + 1)/z.  For d = 2 this is the modular pair."""
    if d < 2:
        raise DegenerateParams("d must be >= 2")
    c = 2.0 * math.cos(math.pi / (d + 1))
    rho = MobiusMap(-c, -1, 1, 0)
    sigma = MobiusMap(0, -1, 1, 0)
    return hecke_rep_from_generators(d, rho, sigma)


def rep_from_cross_ratio(params: HeckeParams) -> HeckeRep:
    """Representation with sigma rotating by pi about {0, inf} and rho by
    2 pi/(d+1) about {kappa, 1}, so kappa is the cross-ratio of the fixed
    points under the library convention."""
    sigma = elliptic_about(SpherePoint(0j), INFINITY, math.pi)
    rho = elliptic_about(SpherePoint(complex(params.kappa)), SpherePoint(1.0 + 0j),
                         2.0 * math.pi / (params.d + 1))
    return hecke_rep_from_generators(params.d, rho, sigma)


def cross_ratio_of_rep(rep: HeckeRep) -> complex:
    """Cross-ratio of the generator fixed points (P, P'; Q, Q').

    The fixed-point ordering convention makes this well defined only up to
    kappa <-> 1/kappa, which normalized_parameter folds out.
    """
    p, p2 = rep.rho_fixed
    q, q2 = rep.sigma_fixed
    return cross_ratio(p, p2, q, q2)


def normalized_parameter(kappa: complex) -> complex:
    """(kappa + 1/kappa)/2: identifies kappa with 1/kappa."""
    k = complex(kappa)
    if k == 0:
        raise ZeroInput("kappa = 0 has no normalized parameter")
    return (k + 1.0 / k) / 2.0


# ---------------------------------------------------------------------------
# Words


class GroupWord:
    """Reduced word in the free product: letters alternate between the
    involution (letter 0) and nonzero powers 1..d of the rotation."""

    __slots__ = ("letters", "d")

    def __init__(self, letters, d: int):
        letters = tuple(int(x) for x in letters)
        if d < 2:
            raise DegenerateParams("d must be >= 2")
        for x in letters:
            if not 0 <= x <= d:
                raise ValueError(f"letter {x} outside 0..{d}")
        for a, b in zip(letters, letters[1:]):
            if (a == 0) == (b == 0):
                raise ValueError("adjacent letters must alternate factors")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, val):
        raise AttributeError("GroupWord is immutable")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        if not isinstance(other, GroupWord):
            return NotImplemented
        return self.letters == other.letters and self.d == other.d

    def __hash__(self):
        return hash((self.letters, self.d))

    def __repr__(self):
        body = ".".join("s" if x == 0 else f"r{x}" for x in self.letters) or "e"
        return f"GroupWord({body})"


def enumerate_words(d: int, max_len: int) -> list[GroupWord]:
    """All reduced words of length <= max_len, in deterministic lexicographic
    order (involution letter first, then rotation powers ascending)."""
    out = [GroupWord((), d)]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            last = w[-1] if w else None
            if last != 0:
                nxt.append(w + (0,))
            if last is None or last == 0:
                for i in range(1, d + 1):
                    nxt.append(w + (i,))
        nxt.sort()
        out.extend(GroupWord(w, d) for w in nxt)
        frontier = nxt
    return out


def word_map(rep: HeckeRep, word: GroupWord) -> MobiusMap:
    """Left-to-right composition: the first letter acts last (outermost)."""
    powers = [MobiusMap.identity()]
    for _ in range(rep.d):
        powers.append(powers[-1] @ rep.rho)
    m = MobiusMap.identity()
    for letter in word:
        m = m @ (rep.sigma if letter == 0 else powers[letter])
    return m


def apply_word(rep: HeckeRep, word: GroupWord, z) -> SpherePoint:
    return word_map(rep, word).apply(as_point(z))


# ---------------------------------------------------------------------------
# Limit-set sampling


def _base_point(rep: HeckeRep) -> complex:
    """Attracting (or neutral) fixed point of sigma o rho, as a finite complex.

    That fixed point lies in the orbit closure for the representations of
    interest, so long random words accumulate on the limit set from it.
    """
    comp = rep.sigma @ rep.rho
    p1, p2 = comp.fixed_points()
    cands = [p for p in (p1, p2) if not p.is_infinity]
    if not cands:
        return 1.0 + 0j
    cands.sort(key=lambda p: abs(comp.multiplier_at(p)))
    return cands[0].value


def _generator_array(rep: HeckeRep) -> np.ndarray:
    mats = [rep.sigma]
    power = MobiusMap.identity()
    for _ in range(rep.d):
        power = power @ rep.rho
        mats.append(power)
    out = np.empty((rep.d + 1, 2, 2), dtype=np.complex128)
    for i, m in enumerate(mats):
        out[i] = [[m.a, m.b], [m.c, m.d]]
    return out


def limit_set_points(rep: HeckeRep, n_points: int, max_word_len: int,
                     seed: int = 0, include_chi: bool = False,
                     _rng=None) -> np.ndarray:
    """Orbit samples under pseudo-random reduced words, as a complex array.

    Uses a counter-based generator keyed by the seed so the stream is
    reproducible under any evaluation schedule (renderers pass chunk-keyed
    generators through _rng).  Points at infinity come back as NaN entries.
    """
    if n_points <= 0:
        return np.empty(0, dtype=np.complex128)
    L = max(int(max_word_len), 1)
    rng = _rng if _rng is not None else np.random.Generator(np.random.Philox(key=int(seed)))
    start_sigma = rng.integers(0, 2, size=n_points)
    rho_choices = rng.integers(1, rep.d + 1, size=(n_points, L))
    chi_flags = rng.integers(0, 2, size=n_points) if include_chi else None

    parity = np.arange(L) % 2
    sigma_slot = (parity[None, :] + (1 - start_sigma[:, None])) % 2 == 1
    letters = np.where(sigma_slot, 0, rho_choices)

    gens = _generator_array(rep)
    base = _base_point(rep)
    v = np.empty((2, n_points), dtype=np.complex128)
    v[0] = base
    v[1] = 1.0

    # apply letters innermost-first so the word acts left-to-right on the point
    for k in range(L - 1, -1, -1):
        mats = gens[letters[:, k]]
        v = np.einsum("nij,jn->in", mats, v)
        norm = np.maximum(np.abs(v[0]), np.abs(v[1]))
        norm[norm == 0] = 1.0
        v /= norm

    if include_chi:
        chi = np.array([[rep.chi.a, rep.chi.b], [rep.chi.c, rep.chi.d]],
                       dtype=np.complex128)
        flagged = chi_flags.astype(bool)
        v[:, flagged] = np.einsum("ij,jn->in", chi, v[:, flagged])

    with np.errstate(divide="ignore", invalid="ignore"):
        pts = v[0] / v[1]
    pts[~np.isfinite(pts)] = complex(np.nan, np.nan)
    return pts


def limit_set_sample(rep: HeckeRep, n_points: int, max_word_len: int,
                     seed: int = 0, include_chi: bool = False) -> list[SpherePoint]:
    """Like limit_set_points but as SpherePoints (NaN entries become infinity)."""
    pts = limit_set_points(rep, n_points, max_word_len, seed, include_chi)
    out = []
    for z in pts:
        if math.isnan(z.real) or math.isnan(z.imag):
            out.append(INFINITY)
        else:
            out.append(SpherePoint(complex(z)))
    return out


# ---------------------------------------------------------------------------
# Discreteness heuristic


def jorgensen_test(rep: HeckeRep, max_word_len: int = 4) -> tuple[bool, float]:
    """Necessary-condition scan: |tr^2 A - 4| + |tr[A,B] - 2| >= 1.

    Evaluates the inequality over ordered pairs of short-word images,
    skipping pairs with a shared fixed point (tr[A,B] = 2, where the
    inequality does not apply).  A violating pair certifies the group is
    not discrete; passing is only inconclusive-positive.
    """
    words = [w for w in enumerate_words(rep.d, max_word_len) if len(w) > 0]
    mats = [word_map(rep, w) for w in words]
    worst = math.inf
    for A in mats:
        if A.identity_residual() < RELATION_TOL:
            continue
        trA2 = A.trace() ** 2
        term_a = abs(trA2 - 4.0)
        Ainv = A.inverse()
        for B in mats:
            comm = A @ B @ Ainv @ B.inverse()
            term_b = abs(comm.trace() - 2.0)
            if term_b < RELATION_TOL:
                continue  # shared fixed point: elementary pair
            worst = min(worst, term_a + term_b)
    passes = math.isinf(worst) or worst >= 1.0 - JORGENSEN_MARGIN
    return passes, worst
