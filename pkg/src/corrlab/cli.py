"""Command line interface: render, check, probe, report.

Exit codes: 0 on success, 2 on configuration errors (bad job files,
malformed flags), 3 on numeric failures or failing check suites.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .algebra import Polynomial
from .correspondence import MatingFamilyParams, forward_image, mating_family
from .dynamics import green_function
from .errors import BranchAmbiguity, ConfigError, CorrlabError, NoConvergence
from .hecke import GroupWord, HeckeParams, apply_word, rep_from_cross_ratio, standard_hecke
from .jobs import job_from_file
from .ppm import write_ppm
from .render import colorize, render


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("CORRLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"CORRLAB_THREADS={env!r} is not an integer") from exc
    return 1


def _write_outputs(job, raster, meta, out_path, elapsed):
    rgb = colorize(job.kind, raster)
    data = write_ppm(out_path, rgb)
    sidecar = {
        "schema_version": 1,
        "library_version": __version__,
        "job": job.echo(),
        "output": {
            "ppm": os.path.basename(out_path),
            "sha256": hashlib.sha256(data).hexdigest(),
            "width": raster.width,
            "height": raster.height,
            "class_names": {str(k): v for k, v in raster.class_names.items()},
            "class_counts": {str(k): v for k, v in raster.class_counts().items()},
        },
        "timings": {"render_seconds": meta.get("elapsed_seconds"), "total_seconds": elapsed},
        "truncated": bool(meta.get("truncated", False)),
        "metadata": {k: v for k, v in meta.items() if k not in ("elapsed_seconds",)},
    }
    sidecar_path = out_path + ".json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rgb, sidecar_path


def _cmd_render(args) -> int:
    t0 = time.perf_counter()
    job = job_from_file(args.job)
    if args.seed is not None:
        job = type(job)(kind=job.kind, grid=job.grid, seed=args.seed, params=job.params)
    threads = _resolve_threads(args.threads)
    raster, meta = render(job, threads=threads)
    out = args.output or (os.path.splitext(os.path.basename(args.job))[0] + ".ppm")
    _write_outputs(job, raster, meta, out, time.perf_counter() - t0)
    print(f"wrote {out} ({raster.width}x{raster.height}, kind={job.kind})")
    return 0


def _cmd_report(args) -> int:
    from .report import write_report

    t0 = time.perf_counter()
    job = job_from_file(args.job)
    if args.seed is not None:
        job = type(job)(kind=job.kind, grid=job.grid, seed=args.seed, params=job.params)
    threads = _resolve_threads(args.threads)
    raster, meta = render(job, threads=threads)
    stem = os.path.splitext(os.path.basename(args.job))[0]
    outdir = args.output or "."
    os.makedirs(outdir, exist_ok=True)
    out = os.path.join(outdir, stem + ".ppm")
    rgb, sidecar = _write_outputs(job, raster, meta, out, time.perf_counter() - t0)
    png, csv_path = write_report(outdir, stem, job, raster, rgb)
    print(f"wrote {out}, {sidecar}, {png}, {csv_path}")
    return 0


def _cmd_check(args) -> int:
    from .checks import run_suites

    try:
        results = run_suites(args.suite or None, seed=args.seed or 0)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    all_ok = True
    summary = []
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        print(f"[{status}] {res.name}: {res.passed} passed, {res.failed} failed")
        for msg in res.failures[:5]:
            print(f"    failure: {msg}")
        summary.append(
            {"suite": res.name, "passed": res.passed, "failed": res.failed}
        )
        all_ok = all_ok and res.ok
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"suites": summary, "ok": all_ok}, fh, indent=2)
            fh.write("\n")
    return 0 if all_ok else 3


def _cmd_probe(args) -> int:
    if args.what == "forward-image":
        F = mating_family(MatingFamilyParams(args.a, args.k))
        images = forward_image(F, args.z)
        out = {
            "kind": "forward-image",
            "z": [args.z.real, args.z.imag],
            "images": [None if p.is_infinity else [p.value.real, p.value.imag]
                       for p in images],
        }
    elif args.what == "word":
        if args.kappa is None:
            rep = standard_hecke(args.d)
        else:
            rep = rep_from_cross_ratio(HeckeParams(args.d, args.kappa))
        letters = []
        for token in args.word.split("."):
            token = token.strip()
            if token == "s":
                letters.append(0)
            elif token.startswith("r"):
                letters.append(int(token[1:] or "1"))
            elif token:
                raise ConfigError(f"bad word letter {token!r} (use s, r1..r{args.d})")
        word = GroupWord(letters, args.d)
        p = apply_word(rep, word, args.z)
        out = {
            "kind": "word",
            "word": repr(word),
            "result": None if p.is_infinity else [p.value.real, p.value.imag],
        }
    elif args.what == "green":
        coeffs = [_complex_arg(c) for c in args.coeffs.split(",")]
        f = Polynomial(coeffs)
        g = green_function(f, args.z, max_iter=args.max_iter)
        out = {"kind": "green", "z": [args.z.real, args.z.imag], "value": g}
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown probe {args.what!r}")
    text = json.dumps(out, indent=2)
    print(text)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrlab",
        description="numerical laboratory for correspondences, group "
        "representations, and escape-time rasters",
    )
    parser.add_argument("--version", action="version", version=f"corrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a job file to PPM + JSON sidecar")
    p_render.add_argument("job")
    p_render.add_argument("-o", "--output", default=None)
    p_render.add_argument("--threads", type=int, default=None)
    p_render.add_argument("--seed", type=int, default=None)
    p_render.set_defaults(func=_cmd_render)

    p_report = sub.add_parser(
        "report", help="render a job and also write a PNG figure and CSV summary"
    )
    p_report.add_argument("job")
    p_report.add_argument("-o", "--output", default=None, help="output directory")
    p_report.add_argument("--threads", type=int, default=None)
    p_report.add_argument("--seed", type=int, default=None)
    p_report.set_defaults(func=_cmd_report)

    p_check = sub.add_parser("check", help="run the invariant suites")
    p_check.add_argument("--suite", action="append", default=None)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("-o", "--output", default=None)
    p_check.set_defaults(func=_cmd_check)

    p_probe = sub.add_parser("probe", help="one-shot evaluations")
    probe_sub = p_probe.add_subparsers(dest="what", required=True)

    p_fi = probe_sub.add_parser("forward-image", help="images under the mating family")
    p_fi.add_argument("--a", type=_complex_arg, required=True)
    p_fi.add_argument("--k", type=_complex_arg, required=True)
    p_fi.add_argument("--z", type=_complex_arg, required=True)
    p_fi.add_argument("-o", "--output", default=None)
    p_fi.set_defaults(func=_cmd_probe)

    p_w = probe_sub.add_parser("word", help="apply a reduced word to a point")
    p_w.add_argument("--d", type=int, required=True)
    p_w.add_argument("--kappa", type=_complex_arg, default=None)
    p_w.add_argument("--word", required=True, help="dot-separated letters, e.g. s.r1.s.r2")
    p_w.add_argument("--z", type=_complex_arg, required=True)
    p_w.add_argument("-o", "--output", default=None)
    p_w.set_defaults(func=_cmd_probe)

    p_g = probe_sub.add_parser("green", help="escape rate of a polynomial at a point")
    p_g.add_argument("--coeffs", required=True,
                     help="comma-separated ascending coefficients, e.g. -1,0,1")
    p_g.add_argument("--z", type=_complex_arg, required=True)
    p_g.add_argument("--max-iter", type=int, default=1000)
    p_g.add_argument("-o", "--output", default=None)
    p_g.set_defaults(func=_cmd_probe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoConvergence, BranchAmbiguity) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except CorrlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
