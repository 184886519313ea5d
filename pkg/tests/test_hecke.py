"""Representation tests: relations, parametrization, words, discreteness."""

import math
import random

import numpy as np
import pytest

from corrlab.algebra import MobiusMap, SpherePoint, chordal
from corrlab.errors import DegenerateParams, ZeroInput
from corrlab.hecke import (
    GroupWord,
    HeckeParams,
    apply_word,
    cross_ratio_of_rep,
    enumerate_words,
    hecke_rep_from_generators,
    jorgensen_test,
    limit_set_points,
    limit_set_sample,
    normalized_parameter,
    rep_from_cross_ratio,
    standard_hecke,
    word_map,
)


def random_kappa(rng):
    while True:
        k = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if min(abs(k), abs(k - 1)) > 0.05:
            return k


def random_mobius(rng):
    while True:
        entries = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)]
        if abs(entries[0] * entries[3] - entries[1] * entries[2]) > 0.2:
            return MobiusMap(*entries)


# ---------------------------------------------------------------------------
# standard generators


def test_standard_hecke_modular_case():
    rep = standard_hecke(2)
    # 2 cos(pi/3) = 1, so rho(z) = -(z+1)/z
    expect = MobiusMap(-1, -1, 1, 0)
    assert (rep.rho @ expect.inverse()).identity_residual() < 1e-12
    assert (rep.sigma @ MobiusMap(0, -1, 1, 0).inverse()).identity_residual() < 1e-12


def test_standard_hecke_orders():
    for d in range(2, 7):
        rep = standard_hecke(d)
        assert rep.rho.power(d + 1).identity_residual() < 1e-9
        assert rep.sigma.power(2).identity_residual() < 1e-9


def test_standard_hecke_parabolic_composite():
    # sigma rho has |trace| = 2: these groups sit on the boundary
    for d in range(2, 7):
        rep = standard_hecke(d)
        assert abs(abs((rep.sigma @ rep.rho).trace()) - 2.0) < 1e-12


def test_standard_modular_normalized_parameter_is_seven():
    # cross-ratio of the fixed pairs is (2 - sqrt 3)^2 or its inverse, and
    # (kappa + 1/kappa)/2 = 7 exactly
    rep = standard_hecke(2)
    nu = normalized_parameter(cross_ratio_of_rep(rep))
    assert abs(nu - 7.0) < 1e-9


# ---------------------------------------------------------------------------
# cross-ratio parametrization


def test_rep_from_cross_ratio_fixed_points():
    kap = -1.0 + 0j
    rep = rep_from_cross_ratio(HeckeParams(3, kap))
    assert chordal(rep.sigma.apply(2 + 1j), -(2 + 1j)) < 1e-12
    assert chordal(rep.rho.apply(SpherePoint(kap)), kap) < 1e-10
    assert chordal(rep.rho.apply(1.0), 1.0) < 1e-10


def test_cross_ratio_round_trip():
    rng = random.Random(5)
    for d in (2, 3, 4):
        for _ in range(25):
            kap = random_kappa(rng)
            rep = rep_from_cross_ratio(HeckeParams(d, kap))
            got = cross_ratio_of_rep(rep)
            assert min(abs(got - kap), abs(got - 1 / kap)) < 1e-9 * (1 + abs(kap))


def test_normalized_parameter_basics():
    assert normalized_parameter(1.0) == 1.0
    assert normalized_parameter(-1.0) == -1.0
    with pytest.raises(ZeroInput):
        normalized_parameter(0.0)


def test_normalized_parameter_inversion_symmetric():
    rng = random.Random(9)
    for _ in range(100):
        k = random_kappa(rng)
        assert abs(normalized_parameter(k) - normalized_parameter(1 / k)) < 1e-12 * (
            1 + abs(k)
        )


def test_normalized_parameter_conjugation_invariance():
    rng = random.Random(13)
    for _ in range(40):
        kap = random_kappa(rng)
        d = rng.choice([2, 3, 4])
        rep = rep_from_cross_ratio(HeckeParams(d, kap))
        g = random_mobius(rng)
        conj = hecke_rep_from_generators(
            d, g @ rep.rho @ g.inverse(), g @ rep.sigma @ g.inverse()
        )
        nu1 = normalized_parameter(cross_ratio_of_rep(rep))
        nu2 = normalized_parameter(cross_ratio_of_rep(conj))
        assert abs(nu1 - nu2) < 1e-9 * (1 + abs(nu1))


def test_standard_rep_reproducible_from_its_cross_ratio():
    # building a rep from the standard pair's cross-ratio lands in the same
    # conjugacy class: equal normalized parameters
    rep = standard_hecke(2)
    kap = cross_ratio_of_rep(rep)
    rebuilt = rep_from_cross_ratio(HeckeParams(2, kap))
    nu1 = normalized_parameter(kap)
    nu2 = normalized_parameter(cross_ratio_of_rep(rebuilt))
    assert abs(nu1 - nu2) < 1e-9 * (1 + abs(nu1))


def test_hecke_params_validation():
    with pytest.raises(DegenerateParams):
        HeckeParams(1, 2.0)
    with pytest.raises(DegenerateParams):
        HeckeParams(2, 0.0)
    with pytest.raises(DegenerateParams):
        HeckeParams(2, 1.0)


# ---------------------------------------------------------------------------
# the anti-commuting involution


def test_chi_closed_form_negation_sigma():
    # sigma = -z, rho fixing {kappa, 1}: chi(z) = kappa / z
    kap = 2 + 1j
    rep = rep_from_cross_ratio(HeckeParams(2, kap))
    expect = MobiusMap(0, kap, 1, 0)
    assert (rep.chi @ expect.inverse()).identity_residual() < 1e-10


def test_chi_closed_form_modular():
    # sigma = -1/z, rho modular: chi(z) = 1/z
    rep = standard_hecke(2)
    expect = MobiusMap(0, 1, 1, 0)
    assert (rep.chi @ expect.inverse()).identity_residual() < 1e-10


def test_chi_defining_relations():
    rng = random.Random(21)
    for d in range(2, 7):
        for _ in range(200):
            kap = random_kappa(rng)
            rep = rep_from_cross_ratio(HeckeParams(d, kap))
            chi, rho, sigma = rep.chi, rep.rho, rep.sigma
            assert (chi @ chi).identity_residual() < 1e-9
            assert (chi @ rho @ chi @ rho).identity_residual() < 1e-9
            assert (chi @ sigma @ chi @ sigma).identity_residual() < 1e-9


def test_chi_swaps_fixed_pairs():
    rep = rep_from_cross_ratio(HeckeParams(3, 0.5 + 2j))
    p, p2 = rep.rho_fixed
    q, q2 = rep.sigma_fixed
    assert chordal(rep.chi.apply(p), p2) < 1e-9
    assert chordal(rep.chi.apply(q), q2) < 1e-9
    assert chordal(rep.chi.apply(q2), q) < 1e-9


# ---------------------------------------------------------------------------
# words


def count_words_brute(d, max_len):
    # alternating-letter words counted by direct recursion
    def extend(last_sigma, length):
        if length == 0:
            return 1
        total = 0
        if not last_sigma:
            total += extend(True, length - 1)
        if last_sigma or last_sigma is None:
            total += d * extend(False, length - 1)
        return total

    total = 1
    for n in range(1, max_len + 1):
        total += extend(None, n)
    return total


def test_enumerate_words_counts():
    assert len(enumerate_words(2, 0)) == 1
    assert len(enumerate_words(2, 1)) == 4
    assert len(enumerate_words(2, 2)) == 8
    for d in (2, 3):
        for L in (3, 4):
            assert len(enumerate_words(d, L)) == count_words_brute(d, L)


def test_word_rejects_repeated_factor():
    with pytest.raises(ValueError):
        GroupWord((0, 0), 2)  # sigma sigma not in normal form
    with pytest.raises(ValueError):
        GroupWord((1, 2), 2)  # consecutive rotation powers


def test_apply_word_examples():
    rep = standard_hecke(2)
    empty = GroupWord((), 2)
    assert chordal(apply_word(rep, empty, 0.5), 0.5) == 0
    # sigma(rho(0)) = sigma(inf) = 0
    w = GroupWord((0, 1), 2)
    assert chordal(apply_word(rep, w, 0j), 0j) < 1e-12


def test_word_map_composition_order():
    rep = standard_hecke(2)
    w = GroupWord((0, 1), 2)
    direct = word_map(rep, w)
    assert (direct @ (rep.sigma @ rep.rho).inverse()).identity_residual() < 1e-12


# ---------------------------------------------------------------------------
# limit-set sampling


def test_limit_set_standard_rep_is_real():
    pts = limit_set_sample(standard_hecke(2), 500, 30, seed=1)
    for p in pts:
        if not p.is_infinity:
            assert abs(p.value.imag) < 1e-9


def test_limit_set_empty():
    assert limit_set_sample(standard_hecke(2), 0, 30, seed=1) == []


def test_limit_set_deterministic():
    rep = standard_hecke(3)
    a = limit_set_points(rep, 1000, 25, seed=42)
    b = limit_set_points(rep, 1000, 25, seed=42)
    assert np.array_equal(a, b, equal_nan=True)


def hausdorff(a, b, chunk=512):
    def directed(x, y):
        worst = 0.0
        for i in range(0, len(x), chunk):
            block = x[i : i + chunk]
            d = np.min(np.abs(y[None, :] - block[:, None]), axis=1)
            worst = max(worst, float(d.max()))
        return worst

    return max(directed(a, b), directed(b, a))


def test_limit_set_chi_prefix_coherence():
    # adding chi-prefixed words leaves the sampled set unchanged as a set
    # (coarse Hausdorff comparison: both samples cover the same continuum)
    rep = standard_hecke(2)
    n = 4000
    base = limit_set_points(rep, n, 30, seed=3)
    withchi = limit_set_points(rep, n, 30, seed=3, include_chi=True)
    a = base[np.isfinite(base)]
    b = withchi[np.isfinite(withchi)]
    a = a[np.abs(a) < 3]
    b = b[np.abs(b) < 3]
    assert hausdorff(a, b) < 0.2


# ---------------------------------------------------------------------------
# discreteness heuristic


def test_jorgensen_standard_passes():
    ok, worst = jorgensen_test(standard_hecke(2), 4)
    assert ok
    assert worst >= 1.0 - 1e-6


def test_jorgensen_nondiscrete_fails():
    rep = rep_from_cross_ratio(HeckeParams(2, -0.3))
    ok, worst = jorgensen_test(rep, 6)
    assert not ok
    assert worst < 0.5


def test_jorgensen_vacuous_pass():
    ok, worst = jorgensen_test(standard_hecke(2), 0)
    assert ok
    assert math.isinf(worst)
