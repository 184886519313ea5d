"""Raster renderers: vectorized per-pixel kernels behind the job schema.

Every kernel is a pure function of (job, pixel block), rows are split
into bands that threads may compute in any order, and random streams are
keyed by (seed, chunk index), so output bytes depend only on the job and
seed, never on scheduling.  The escape kernels mirror the documented
scalar semantics step for step (same operations, same order) so an
independent per-pixel reimplementation reproduces them exactly.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import hecke as hk
from .constants import JORGENSEN_MARGIN, RELATION_TOL
from .correspondence import (
    MatingFamilyParams,
    correspondence_fixed_points,
    critical_points_of_q,
    forward_image,
    mating_family,
)
from .errors import ConfigError
from .grid import Raster
from .jobs import RenderJob
from .algebra import chordal as chordal_scalar

__all__ = ["render", "colorize", "scan_classify"]


def _bands(py: int, rows_per_band: int):
    return [(y0, min(y0 + rows_per_band, py)) for y0 in range(0, py, rows_per_band)]


def _run_bands(bands, kernel, threads: int):
    if threads <= 1 or len(bands) <= 1:
        return [kernel(b) for b in bands]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(kernel, bands))


# ---------------------------------------------------------------------------
# Escape-time kernels


def _unicritical_escape(C: np.ndarray, degree: int, max_iter: int):
    """Escape index of the critical orbit of z^d + c, -1 if bounded.

    Semantics (mirrored by the per-pixel oracle in the tests):
    z = 0; for n in 0..max_iter: escaped(n) if re(z)^2 + im(z)^2 > R^2,
    else z <- z^d + c; with R = 2 + sqrt(re(c)^2 + im(c)^2).
    """
    R = 2.0 + np.sqrt(C.real * C.real + C.imag * C.imag)
    R2 = R * R
    z = np.zeros_like(C)
    esc = np.full(C.shape, -1, dtype=np.int32)
    for n in range(max_iter + 1):
        mag = z.real * z.real + z.imag * z.imag
        newly = (mag > R2) & (esc < 0)
        esc[newly] = n
        if n == max_iter:
            break
        live = esc < 0
        w = z
        for _ in range(degree - 1):
            w = w * z
        z = np.where(live, w + C, z)
    return esc


def _parabolic_cubic_escape(A: np.ndarray, max_iter: int):
    """Min escape index over both critical orbits of z^3 + a z^2 + z."""
    R = 3.0 + np.sqrt(A.real * A.real + A.imag * A.imag)
    R2 = R * R
    s = np.sqrt(A * A - 3.0)
    crits = [(-A + s) / 3.0, (-A - s) / 3.0]
    sentinel = np.iinfo(np.int32).max
    first = np.full(A.shape, sentinel, dtype=np.int32)
    for z0 in crits:
        z = z0.copy()
        esc = np.full(A.shape, -1, dtype=np.int32)
        for n in range(max_iter + 1):
            mag = z.real * z.real + z.imag * z.imag
            newly = (mag > R2) & (esc < 0)
            esc[newly] = n
            if n == max_iter:
                break
            live = esc < 0
            z = np.where(live, ((z + A) * z + 1.0) * z, z)
        escaped = esc >= 0
        first = np.where(escaped, np.minimum(first, esc), first)
    return np.where(first < sentinel, first, -1).astype(np.int32)


def _render_connectedness_locus(job: RenderJob, threads: int):
    grid = job.grid
    C = grid.complex_grid()
    max_iter = job.params["max_iter"]
    esc = np.empty(C.shape, dtype=np.int32)

    def kernel(band):
        y0, y1 = band
        if job.params["family"] == "unicritical":
            esc[y0:y1] = _unicritical_escape(C[y0:y1], job.params["degree"], max_iter)
        else:
            esc[y0:y1] = _parabolic_cubic_escape(C[y0:y1], max_iter)

    _run_bands(_bands(grid.pixels_y, 64), kernel, threads)
    classes = (esc < 0).astype(np.uint8)
    raster = Raster(
        width=grid.pixels_x,
        height=grid.pixels_y,
        classes=classes,
        scalar=esc.astype(np.float64),
        class_names={0: "exterior", 1: "interior"},
    )
    return raster, {}


def _render_filled_julia(job: RenderJob, threads: int):
    grid = job.grid
    coeffs = job.params["coeffs"]
    max_iter = job.params["max_iter"]
    degree = len(coeffs) - 1
    lead = abs(coeffs[-1])
    R = max(2.0, (2.0 + sum(abs(c) for c in coeffs[:-1])) / lead)
    R2 = R * R
    Z0 = grid.complex_grid()
    esc = np.empty(Z0.shape, dtype=np.int32)
    green = np.empty(Z0.shape, dtype=np.float64)

    def horner(z):
        acc = np.full_like(z, coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc * z + c
        return acc

    def kernel(band):
        y0, y1 = band
        z = Z0[y0:y1].copy()
        e = np.full(z.shape, -1, dtype=np.int32)
        napp = np.zeros(z.shape, dtype=np.int32)
        for n in range(max_iter + 1):
            mag = z.real * z.real + z.imag * z.imag
            newly = (mag > R2) & (e < 0)
            e[newly] = n
            if n == max_iter:
                break
            live = e < 0
            z = np.where(live, horner(z), z)
            napp[live] += 1
        # continue escaped orbits out to the far zone for the escape rate
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(120):
                mag = z.real * z.real + z.imag * z.imag
                grow = (e >= 0) & (mag <= 1e24) & np.isfinite(mag)
                if not grow.any():
                    break
                z = np.where(grow, horner(z), z)
                napp[grow] += 1
            mag = z.real * z.real + z.imag * z.imag
            g = 0.5 * np.log(np.maximum(mag, 1e-300)) * (1.0 / degree) ** napp
        green[y0:y1] = np.where(e >= 0, g, 0.0)
        esc[y0:y1] = e

    _run_bands(_bands(grid.pixels_y, 64), kernel, threads)
    classes = (esc < 0).astype(np.uint8)
    raster = Raster(
        width=grid.pixels_x,
        height=grid.pixels_y,
        classes=classes,
        scalar=green,
        class_names={0: "escaped", 1: "bounded"},
    )
    return raster, {}


# ---------------------------------------------------------------------------
# Limit-set accumulation


def _render_hecke_limit_set(job: RenderJob, threads: int):
    grid = job.grid
    if job.params["kappa"] is None:
        rep = hk.standard_hecke(job.params["d"])
    else:
        rep = hk.rep_from_cross_ratio(hk.HeckeParams(job.params["d"], job.params["kappa"]))
    n_points = job.params["n_points"]
    L = job.params["max_word_len"]
    counts = np.zeros((grid.pixels_y, grid.pixels_x), dtype=np.int64)
    chunk = 1 << 16
    chunks = [(ci, min(chunk, n_points - ci * chunk)) for ci in range((n_points + chunk - 1) // chunk)]

    step = grid.step
    cx, cy = grid.center.real, grid.center.imag
    px, py = grid.pixels_x, grid.pixels_y

    def kernel(item):
        ci, n = item
        rng = np.random.Generator(np.random.Philox(key=(int(job.seed) << 32) + ci))
        pts = hk.limit_set_points(rep, n, L, _rng=rng)
        good = np.isfinite(pts)
        zs = pts[good]
        i = np.round((zs.real - cx) / step + (px - 1) / 2.0).astype(np.int64)
        j = np.round((cy - zs.imag) / step + (py - 1) / 2.0).astype(np.int64)
        keep = (i >= 0) & (i < px) & (j >= 0) & (j < py)
        local = np.zeros_like(counts)
        np.add.at(local, (j[keep], i[keep]), 1)
        return local

    for local in _run_bands(chunks, kernel, threads):
        counts += local

    raster = Raster(
        width=px,
        height=py,
        classes=(counts > 0).astype(np.uint8),
        scalar=counts.astype(np.float64),
        class_names={0: "empty", 1: "hit"},
    )
    return raster, {"n_points": n_points}


# ---------------------------------------------------------------------------
# Discreteness scan


def _mm(A, B):
    a1, b1, c1, d1 = A
    a2, b2, c2, d2 = B
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


def _identity_residual_arr(M):
    a, b, c, d = M
    r_plus = np.maximum.reduce([np.abs(a - 1), np.abs(b), np.abs(c), np.abs(d - 1)])
    r_minus = np.maximum.reduce([np.abs(a + 1), np.abs(b), np.abs(c), np.abs(d + 1)])
    return np.minimum(r_plus, r_minus)


def scan_classify(d: int, kappa: np.ndarray, max_word_len: int = 6,
                  parabolic_tol: float = 1e-2):
    """Three-valued discreteness heuristic over an array of cross-ratios.

    Returns (classes, worst) where classes are 0 = certified-nondiscrete
    (some non-elementary word pair violates Jorgensen's inequality),
    1 = inconclusive, 2 = parabolic-suspect (passes, but some word trace
    sits within parabolic_tol of +-2), 3 = degenerate parameter.  The
    commutator trace in the inequality comes from the trace identity
    tr[A,B] = tr^2 A + tr^2 B + tr^2 AB - trA trB trAB - 2, so each pair
    costs one matrix product.
    """
    kappa = np.asarray(kappa, dtype=np.complex128)
    valid = (
        np.isfinite(kappa)
        & (np.abs(kappa) > 1e-9)
        & (np.abs(kappa - 1.0) > 1e-9)
    )
    kap = np.where(valid, kappa, 2.0 + 0j)

    theta = 2.0 * math.pi / (d + 1)
    e = complex(math.cos(theta / 2.0), math.sin(theta / 2.0))
    eb = 1.0 / e
    s2 = 1.0 - kap
    rho = ((e - kap * eb) / s2, kap * (eb - e) / s2, (e - eb) / s2, (eb - kap * e) / s2)
    one = np.ones_like(kap)
    sigma = (1j * one, 0.0 * one, 0.0 * one, -1j * one)

    gens = {0: sigma, 1: rho}
    for i in range(2, d + 1):
        gens[i] = _mm(gens[i - 1], rho)

    words = [w for w in hk.enumerate_words(d, max_word_len) if len(w) > 0]
    if len(words) > 150:
        raise ConfigError(
            f"scan word budget too large ({len(words)} words for d={d}, "
            f"max_word_len={max_word_len}); reduce max_word_len"
        )
    mats = []
    for w in words:
        letters = list(w)
        M = gens[letters[0]]
        for letter in letters[1:]:
            M = _mm(M, gens[letter])
        mats.append(M)

    traces = [M[0] + M[3] for M in mats]
    idres = [_identity_residual_arr(M) for M in mats]
    term = [np.abs(t * t - 4.0) for t in traces]

    parab = np.full(kap.shape, np.inf)
    for t, ires in zip(term, idres):
        parab = np.minimum(parab, np.where(ires < RELATION_TOL, np.inf, t))

    worst = np.full(kap.shape, np.inf)
    n = len(mats)
    for i in range(n):
        ti = traces[i]
        for j in range(i + 1, n):
            tj = traces[j]
            AB = _mm(mats[i], mats[j])
            tab = AB[0] + AB[3]
            comm = ti * ti + tj * tj + tab * tab - ti * tj * tab - 2.0
            elem = np.abs(comm - 2.0)
            ok = elem >= RELATION_TOL
            vi = np.where(ok & (idres[i] >= RELATION_TOL), term[i] + elem, np.inf)
            vj = np.where(ok & (idres[j] >= RELATION_TOL), term[j] + elem, np.inf)
            worst = np.minimum(worst, np.minimum(vi, vj))

    certified = worst < 1.0 - JORGENSEN_MARGIN
    suspect = ~certified & (parab < parabolic_tol)
    classes = np.where(certified, 0, np.where(suspect, 2, 1)).astype(np.uint8)
    classes[~valid] = 3
    worst = np.where(np.isfinite(worst), worst, 1e9)
    worst[~valid] = np.nan
    return classes, worst


def _render_discreteness_scan(job: RenderJob, threads: int):
    grid = job.grid
    d = job.params["d"]
    L = job.params["max_word_len"]
    ptol = job.params["parabolic_tol"]
    NU = grid.complex_grid()
    classes = np.empty(NU.shape, dtype=np.uint8)
    worst = np.empty(NU.shape, dtype=np.float64)

    def kernel(band):
        y0, y1 = band
        nu = NU[y0:y1]
        # either root of kappa + 1/kappa = 2 nu gives the same rep class
        kap = nu + np.sqrt(nu * nu - 1.0)
        cls, w = scan_classify(d, kap, L, ptol)
        classes[y0:y1] = cls
        worst[y0:y1] = w

    _run_bands(_bands(grid.pixels_y, 32), kernel, threads)
    raster = Raster(
        width=grid.pixels_x,
        height=grid.pixels_y,
        classes=classes,
        scalar=worst,
        class_names={
            0: "certified_nondiscrete",
            1: "inconclusive",
            2: "parabolic_suspect",
            3: "degenerate",
        },
    )
    return raster, {"max_word_len": L}


# ---------------------------------------------------------------------------
# Mating limit set


def _tightest_orbit_radius(F, z0: complex, depth: int = 10, beam: int = 48) -> float:
    """Min over forward branch paths of the max chordal distance from z0."""
    frontier = [(z0, 0.0)]
    for _ in range(depth):
        nxt = []
        for z, dist in frontier:
            for w in forward_image(F, z):
                wd = max(dist, chordal_scalar(w, z0))
                nxt.append((w, wd))
        nxt.sort(key=lambda t: t[1])
        frontier = nxt[:beam]
    return min(d for _, d in frontier)


def _mating_trap(F):
    """Trap disk (chordal center/radius) around the polynomial-side core.

    Anchored at an attracting fixed point of the correspondence when one
    exists (the polynomial-like branch contracts into it, and the disk can
    be kept inside the invariant set by capping the radius at half the
    distance to the nearest other fixed point).  Falls back to the critical
    point with the tightest branch orbit otherwise.
    """
    fixed = correspondence_fixed_points(F)
    attracting = [(p.value, lam) for p, lam in fixed
                  if not p.is_infinity and abs(lam) < 0.97]
    p_star = F.invariant_point
    if attracting:
        attracting.sort(key=lambda t: (abs(t[1]), t[0].real, t[0].imag))
        center = attracting[0][0]
        score = abs(attracting[0][1])
        others = [
            chordal_scalar(p.value, center)
            for p, _ in fixed
            if not p.is_infinity and abs(p.value - center) > 1e-9
        ]
        cap = min(others) * 0.5 if others else 0.2
    else:
        simple = [c for c, m in critical_points_of_q(F) if m == 1 and not c.is_infinity]
        if not simple:
            raise ConfigError("no attracting fixed point or simple critical point "
                              "to anchor the trap")
        scored = [(_tightest_orbit_radius(F, c.value), c.value) for c in simple]
        scored.sort(key=lambda t: (t[0], t[1].real, t[1].imag))
        score, center = scored[0]
        cap = max(2.5 * score, 0.05)
    mirror = F.j.apply(center)
    sep = min(
        chordal_scalar(center, p_star),
        chordal_scalar(center, mirror),
        chordal_scalar(center, F.j.apply(p_star)),
    )
    radius = min(cap, 0.45 * sep)
    return center, radius, score


def _trap_chain_tails(Z0: np.ndarray, a: complex, k: complex, center: complex,
                      radius: float, depth: int, max_nodes: int):
    """Longest consecutive in-trap run along any forward branch chain.

    The trap test works on the squared chordal distance, so no square
    roots appear in the hot loop, and pruning uses argpartition with the
    composite key (in-trap tail first, then proximity).
    """
    n = Z0.size
    best = np.zeros(n, dtype=np.int16)
    if depth == 0:
        return best, False
    pts = Z0.reshape(n, 1).astype(np.complex128)
    tails = np.zeros((n, 1), dtype=np.int16)
    truncated = False
    cnorm2 = 1.0 + center.real * center.real + center.imag * center.imag
    r2scaled = radius * radius * cnorm2 / 4.0
    for _ in range(depth):
        with np.errstate(all="ignore"):
            u = (a * pts + 1.0) / (pts + 1.0)
            s = np.sqrt(12.0 * k - 3.0 * u * u)
            v1 = (-u + s) / 2.0
            v2 = (-u - s) / 2.0
            w1 = (v1 - 1.0) / (v1 - a)
            w2 = (v2 - 1.0) / (v2 - a)
        bad = ~np.isfinite(u)
        if bad.any():
            # the pole of the coordinate map is totally invariant; its
            # forward images sit at the mirror point exactly
            w1 = np.where(bad, 1.0 + 0j, w1)
            w2 = np.where(bad, 1.0 + 0j, w2)
        children = np.concatenate([w1, w2], axis=1)
        ctails = np.concatenate([tails, tails], axis=1)
        dre = children.real - center.real
        dim = children.imag - center.imag
        with np.errstate(all="ignore"):
            q = (dre * dre + dim * dim) / (
                1.0 + children.real * children.real + children.imag * children.imag
            )
        q = np.where(np.isfinite(q), q, 1e9)
        ctails = np.where(q <= r2scaled, ctails + 1, 0).astype(np.int16)
        best = np.maximum(best, ctails.max(axis=1))
        if children.shape[1] > max_nodes:
            truncated = True
            key = q - 8.0 * ctails
            idx = np.argpartition(key, max_nodes - 1, axis=1)[:, :max_nodes]
            pts = np.take_along_axis(children, idx, axis=1)
            tails = np.take_along_axis(ctails, idx, axis=1)
        else:
            pts = children
            tails = ctails
    return best, truncated


def _render_mating_limit_set(job: RenderJob, threads: int):
    grid = job.grid
    a, k = job.params["a"], job.params["k"]
    depth = job.params["depth"]
    max_nodes = job.params["max_nodes"]
    F = mating_family(MatingFamilyParams(a, k))
    center, radius, score = _mating_trap(F)
    # the in-trap run must be long enough to rule out grazing orbits, and
    # the rest of the depth is the entry budget toward the basin boundary
    need = max(1, min(8, (depth + 1) // 2))
    Z0 = grid.complex_grid()
    t_minus = np.empty(Z0.shape, dtype=np.int16)
    trunc_flags = []
    # for an origin-centered grid, -z is again a pixel center, so the
    # mirror-side field is an exact flip of the direct one
    symmetric = grid.center == 0

    def kernel(band):
        y0, y1 = band
        flat = Z0[y0:y1].ravel()
        tm, tr1 = _trap_chain_tails(flat, a, k, center, radius, depth, max_nodes)
        t_minus[y0:y1] = tm.reshape(Z0[y0:y1].shape)
        trunc_flags.append(tr1)

    _run_bands(_bands(grid.pixels_y, 64), kernel, threads)

    if symmetric:
        t_plus = t_minus[::-1, ::-1]
    else:
        t_plus = np.empty(Z0.shape, dtype=np.int16)

        def kernel_mirror(band):
            y0, y1 = band
            flat = -Z0[y0:y1].ravel()
            tp, tr2 = _trap_chain_tails(flat, a, k, center, radius, depth, max_nodes)
            t_plus[y0:y1] = tp.reshape(Z0[y0:y1].shape)
            trunc_flags.append(tr2)

        _run_bands(_bands(grid.pixels_y, 64), kernel_mirror, threads)

    lam_minus = t_minus >= need
    lam_plus = (t_plus >= need) & ~lam_minus
    classes = np.zeros(Z0.shape, dtype=np.uint8)
    classes[lam_minus] = 1
    classes[lam_plus] = 2
    tails_out = np.maximum(t_minus, t_plus).astype(np.float64)
    raster = Raster(
        width=grid.pixels_x,
        height=grid.pixels_y,
        classes=classes,
        scalar=tails_out,
        class_names={0: "omega", 1: "lambda_minus", 2: "lambda_plus"},
    )
    meta = {
        "trap_center": [center.real, center.imag],
        "trap_radius": radius,
        "trap_score": score,
        "truncated": any(trunc_flags),
    }
    return raster, meta


# ---------------------------------------------------------------------------
# Dispatch and color


_RENDERERS = {
    "connectedness_locus": _render_connectedness_locus,
    "filled_julia": _render_filled_julia,
    "hecke_limit_set": _render_hecke_limit_set,
    "discreteness_scan": _render_discreteness_scan,
    "mating_limit_set": _render_mating_limit_set,
}


def render(job: RenderJob, threads: int = 1):
    """Run a job; returns (raster, metadata).  Byte-deterministic per seed."""
    if job.kind not in _RENDERERS:
        raise ConfigError(f"no renderer for kind {job.kind!r}")
    t0 = time.perf_counter()
    raster, meta = _RENDERERS[job.kind](job, max(1, int(threads)))
    meta = dict(meta)
    meta["kind"] = job.kind
    meta["elapsed_seconds"] = time.perf_counter() - t0
    meta.setdefault("truncated", False)
    return raster, meta


_SCAN_PALETTE = {
    0: (200, 40, 40),
    1: (235, 235, 235),
    2: (40, 40, 200),
    3: (0, 0, 0),
}

_MATING_PALETTE = {
    0: (250, 250, 250),
    1: (30, 60, 160),
    2: (200, 60, 30),
}


def colorize(kind: str, raster: Raster) -> np.ndarray:
    """Fixed palettes per job kind; scalar channels use monotone grayscale."""
    h, w = raster.height, raster.width
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    if kind == "connectedness_locus":
        idx = raster.scalar.astype(np.int64)
        shade = (55 + np.minimum(idx, 200)).astype(np.uint8)
        outside = raster.classes == 0
        for ch in range(3):
            rgb[:, :, ch] = np.where(outside, shade, 0)
    elif kind == "filled_julia":
        g = np.maximum(raster.scalar, 0.0)
        shade = np.clip(55.0 + 200.0 * np.exp(-3.0 * g), 0, 255).astype(np.uint8)
        outside = raster.classes == 0
        for ch in range(3):
            rgb[:, :, ch] = np.where(outside, shade, 0)
    elif kind == "hecke_limit_set":
        counts = raster.scalar.astype(np.int64)
        shade = np.where(
            counts > 0, np.maximum(40, 240 - 40 * np.minimum(counts, 5)), 255
        ).astype(np.uint8)
        for ch in range(3):
            rgb[:, :, ch] = shade
    elif kind == "discreteness_scan":
        for code, color in _SCAN_PALETTE.items():
            mask = raster.classes == code
            for ch in range(3):
                rgb[:, :, ch][mask] = color[ch]
        # monotone grayscale over the inconclusive region: darker means
        # closer to violating the inequality
        inconclusive = raster.classes == 1
        if inconclusive.any():
            with np.errstate(all="ignore"):
                v = np.log10(np.maximum(raster.scalar, 1.0))
            shade = np.clip(100.0 + 18.0 * v, 100, 245).astype(np.uint8)
            for ch in range(3):
                rgb[:, :, ch][inconclusive] = shade[inconclusive]
    elif kind == "mating_limit_set":
        for code, color in _MATING_PALETTE.items():
            mask = raster.classes == code
            for ch in range(3):
                rgb[:, :, ch][mask] = color[ch]
    else:
        raise ConfigError(f"no palette for kind {kind!r}")
    return rgb
