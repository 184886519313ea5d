"""Invariant suites runnable from the CLI and reused by the test suite.

Each suite returns a CheckResult with per-check pass/fail counts and the
failure messages; `corrlab check` prints one line per suite.  Sizes are
chosen so the full run stays well under a minute.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .algebra import (
    MobiusMap,
    Polynomial,
    SpherePoint,
    chordal,
    cross_ratio,
    elliptic_about,
    poly_roots,
)
from .correspondence import (
    GraphCorrespondence,
    JCovCorrespondence,
    MatingFamilyParams,
    bidegree_check,
    critical_points_of_q,
    equivalence_relation_check,
    mating_family,
    membership_residual,
    time_reversal_check,
)
from .dynamics import (
    bottcher_equipotential_point,
    escape_radius,
    fundamental_annulus,
    green_function,
)
from .hecke import HeckeParams, jorgensen_test, rep_from_cross_ratio, standard_hecke


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)

    def record(self, ok: bool, message: str):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(message)

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _random_mobius(rng: random.Random) -> MobiusMap:
    while True:
        entries = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)]
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if abs(det) > 0.1:
            return MobiusMap(*entries)


def _random_poly(rng: random.Random, degree: int) -> Polynomial:
    coeffs = [complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)) for _ in range(degree)]
    return Polynomial(coeffs + [1.0])


def suite_algebra(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("algebra")
    samples = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(5)]
    for _ in range(200):
        m = _random_mobius(rng)
        comp = m @ m.inverse()
        worst = max(chordal(comp.apply(z), z) for z in samples)
        res.record(worst < 1e-10, f"compose/inverse residual {worst}")
    for _ in range(100):
        n = rng.randint(2, 12)
        p = SpherePoint(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
        q = SpherePoint(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
        if chordal(p, q) < 0.1:
            continue
        m = elliptic_about(p, q, 2 * math.pi / n)
        res.record(m.power(n).identity_residual() < 1e-9,
                   f"elliptic order {n} residual")
    for _ in range(100):
        pts = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)]
        if min(abs(pts[i] - pts[j]) for i in range(4) for j in range(i + 1, 4)) < 0.1:
            continue
        m = _random_mobius(rng)
        base = cross_ratio(*pts)
        moved = cross_ratio(*[m.apply(z).value for z in pts])
        res.record(abs(base - moved) < 1e-10 * (1 + abs(base)),
                   f"cross-ratio invariance {abs(base - moved)}")
    for _ in range(100):
        p = _random_poly(rng, rng.randint(2, 6))
        roots = poly_roots(p)
        s = sum(roots)
        pr = 1.0 + 0j
        for r in roots:
            pr *= r
        n = p.degree
        ok = (
            abs(s + p.coeffs[n - 1] / p.coeffs[n]) < 1e-8 * (1 + abs(s))
            and abs(pr - (-1) ** n * p.coeffs[0] / p.coeffs[n]) < 1e-8 * (1 + abs(pr))
        )
        res.record(ok, "Vieta residual")
    return res


def suite_correspondence(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("correspondence")
    neg = MobiusMap.negation()
    for _ in range(10):
        q = _random_poly(rng, rng.randint(3, 6))
        F = JCovCorrespondence(neg, q)
        res.record(time_reversal_check(F, 25, seed=rng.randint(0, 10**6)) < 1e-8,
                   "time reversal")
        res.record(equivalence_relation_check(q, 15, seed=rng.randint(0, 10**6)) < 1e-8,
                   "equivalence relation")
        res.record(bidegree_check(F, 20, seed=rng.randint(0, 10**6)) == (F.d, F.d),
                   "bidegree")
        cov = JCovCorrespondence(MobiusMap.identity(), q)
        worst = max(
            (membership_residual(cov, c, c) for c, _ in critical_points_of_q(F)),
            default=0.0,
        )
        res.record(worst < 1e-8, f"critical fixed points {worst}")
    F = mating_family(MatingFamilyParams(4.53926 + 0.439437j, 0.9 + 0.1j))
    res.record(time_reversal_check(F, 40, seed=7) < 1e-8, "mating family time reversal")
    res.record(equivalence_relation_check(F.q, 25, seed=11) < 1e-8,
               "mating family equivalence")
    res.record(bidegree_check(F, 30, seed=13) == (2, 2), "mating family bidegree")
    return res


def suite_hecke(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("hecke")
    for d in range(2, 7):
        for _ in range(30):
            kap = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if min(abs(kap), abs(kap - 1)) < 0.05:
                continue
            rep = rep_from_cross_ratio(HeckeParams(d, kap))
            worst = max(
                rep.rho.power(d + 1).identity_residual(),
                rep.sigma.power(2).identity_residual(),
                (rep.chi @ rep.chi).identity_residual(),
                (rep.chi @ rep.rho @ rep.chi @ rep.rho).identity_residual(),
                (rep.chi @ rep.sigma @ rep.chi @ rep.sigma).identity_residual(),
            )
            res.record(worst < 1e-9, f"group relations d={d} residual {worst}")
    ok, worst = jorgensen_test(standard_hecke(2), 4)
    res.record(ok, f"standard pair passes trace test (worst {worst})")
    return res


def suite_dynamics(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("dynamics")
    for _ in range(10):
        f = _random_poly(rng, rng.randint(2, 3))
        d = f.degree
        checked = 0
        tries = 0
        while checked < 25 and tries < 500:
            tries += 1
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            g = green_function(f, z)
            if g <= 0:
                continue
            checked += 1
            res.record(abs(green_function(f, f(z)) - d * g) < 1e-8,
                       "escape-rate functional equation")
        r = escape_radius(f)
        z = r * 1.01 * complex(math.cos(1.0), math.sin(1.0))
        res.record(abs(f(z)) > abs(z), "growth beyond escape radius")
    basilica = Polynomial([-1, 0, 1])
    ann = fundamental_annulus(basilica, 1.2, 64)
    worst = max(
        abs(basilica(ann.inner_boundary[i]) - ann.outer_boundary[(2 * i) % 64])
        for i in range(64)
    )
    res.record(worst < 1e-6, f"annulus covering residual {worst}")
    worst = 0.0
    for i in range(16):
        theta = 2 * math.pi * i / 16
        p = bottcher_equipotential_point(basilica, 1.2, theta)
        worst = max(worst, abs(green_function(basilica, p) - math.log(1.2)))
    res.record(worst < 1e-6, f"equipotential level residual {worst}")
    return res


def suite_negative(seed: int = 0) -> CheckResult:
    res = CheckResult("negative-controls")
    shift = MobiusMap(1, 1, 0, 1)  # z + 1
    bad = GraphCorrespondence(shift, MobiusMap.identity())
    res.record(time_reversal_check(bad, 30, seed=seed) > 1e-3,
               "translation graph must fail time reversal")
    cubic = Polynomial([0, 0, 0, 1])
    res.record(
        equivalence_relation_check(cubic, 20, seed=seed, include_diagonal=False) > 1e-3,
        "deleted relation without diagonal must fail transitivity",
    )
    rep = rep_from_cross_ratio(HeckeParams(2, -0.3))
    ok, worst = jorgensen_test(rep, 6)
    res.record(not ok, f"non-discrete parameter must fail trace test (worst {worst})")
    return res


SUITES = {
    "algebra": suite_algebra,
    "correspondence": suite_correspondence,
    "hecke": suite_hecke,
    "dynamics": suite_dynamics,
    "negative-controls": suite_negative,
}


def run_suites(names=None, seed: int = 0) -> list[CheckResult]:
    selected = list(SUITES) if not names else list(names)
    results = []
    for name in selected:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
        results.append(SUITES[name](seed))
    return results
