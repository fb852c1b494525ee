"""Command-line interface.

Matrices travel as Matrix Market files; every structured output is JSON.
Each run can emit a manifest recording the command, inputs, options,
scalar outputs, eigensolver work, and the seed; identical invocations
with the same seed reproduce every manifest field except wall time.

Exit codes: 0 success, 2 input error (files, parsing, parameters),
3 numerical failure (not positive definite, no convergence).
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from .core import (
    DEFAULT_DENSE_CEILING,
    random_sparse_spd,
    random_spd,
    spectrum_dense,
)
from .eigen import EigenOptions, EigenStats, extreme_pair
from .errors import InputError, NotPositiveDefinite, NumericalError, SpdConeError
from .geodesics import diamond_geodesic, riemannian_geodesic, star_geodesic
from .mean import MeanOptions, MeanProblem, inductive_mean
from .metrics import (
    hilbert_distance,
    phi_distance,
    riemannian_distance,
    thompson_distance,
)
from .mmio import read_spd, write_matrix

_SIG = ".16e"  # 17 significant digits


def _fmt(x: float) -> str:
    return format(float(x), _SIG)


class _Run:
    """Shared per-invocation state: options, stats, manifest assembly."""

    def __init__(self, tol, residual_tol, max_cycles, backend, seed,
                 as_json, allow_extrapolation, dense_ceiling):
        self.stats = EigenStats()
        self.seed = seed
        self.as_json = as_json
        self.allow_extrapolation = allow_extrapolation
        self.residual_tol = residual_tol
        self.max_cycles = max_cycles
        self.eigen = EigenOptions(
            tol=tol,
            backend=backend,
            seed=seed,
            dense_ceiling=dense_ceiling,
            stats=self.stats,
        )
        self.mean_opts_base = dict(
            tol=tol, residual_tol=residual_tol, max_cycles=max_cycles
        )
        self.t0 = time.perf_counter()

    def options_dict(self):
        return {
            "tol": self.eigen.tol,
            "residual_tol": self.residual_tol,
            "max_cycles": self.max_cycles,
            "backend": self.eigen.backend,
            "seed": self.seed,
            "dense_ceiling": self.eigen.dense_ceiling,
            "allow_extrapolation": self.allow_extrapolation,
        }

    def manifest(self, command, inputs, outputs, extra_options=None):
        options = self.options_dict()
        if extra_options:
            options.update(extra_options)
        return {
            "command": command,
            "inputs": [str(p) for p in inputs],
            "options": options,
            "outputs": outputs,
            "eigen_iterations": self.stats.iterations,
            "eigen_solves": self.stats.solves,
            "seed": self.seed,
            "wall_time_ms": (time.perf_counter() - self.t0) * 1000.0,
        }


def _load(path):
    try:
        return read_spd(path)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(exc.pivot_index, detail=f"in file {path}") from exc


def _emit(run, manifest, human_lines):
    if run.as_json:
        click.echo(json.dumps(manifest, indent=2, sort_keys=True))
    else:
        for line in human_lines:
            click.echo(line)


def _guard(fn):
    """Map library errors to the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NumericalError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(3)
        except (InputError, SpdConeError, OSError, ValueError) as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(2)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group(context_settings={"auto_envvar_prefix": "SPDCONE"})
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Eigensolver relative residual target.")
@click.option("--residual-tol", type=float, default=1e-8, show_default=True,
              help="Mean residual certificate threshold.")
@click.option("--max-cycles", type=int, default=10 ** 6, show_default=True,
              help="Cap on inductive mean cycles.")
@click.option("--backend", type=click.Choice(["auto", "dense", "iterative"]),
              default="auto", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for eigensolver starting vectors and bench inputs.")
@click.option("--json", "as_json", is_flag=True, help="Emit the JSON manifest on stdout.")
@click.option("--allow-extrapolation", is_flag=True,
              help="Permit geodesic parameters outside [0, 1].")
@click.option("--dense-ceiling", type=int, default=DEFAULT_DENSE_CEILING,
              show_default=True, help="Largest n for dense-spectrum operations.")
@click.pass_context
def main(ctx, tol, residual_tol, max_cycles, backend, seed, as_json,
         allow_extrapolation, dense_ceiling):
    """Thompson/Hilbert geometry of SPD matrices from extreme eigenvalues.

    Options can also be set through SPDCONE_* environment variables
    (flags win over the environment).
    """
    ctx.obj = _Run(tol, residual_tol, max_cycles, backend, seed, as_json,
                   allow_extrapolation, dense_ceiling)


@main.command()
@click.argument("file_x", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_y", type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="thompson", show_default=True,
              help="thompson | hilbert | riemannian | phi-P (e.g. phi-1, phi-2, phi-inf)")
@click.pass_obj
@_guard
def distance(run, file_x, file_y, metric):
    """Distance between two SPD matrices."""
    X = _load(file_x)
    Y = _load(file_y)
    if metric == "thompson":
        value = thompson_distance(X, Y, run.eigen)
    elif metric == "hilbert":
        value = hilbert_distance(X, Y, run.eigen)
    elif metric == "riemannian":
        value = riemannian_distance(X, Y, dense_ceiling=run.eigen.dense_ceiling)
    elif metric.startswith("phi-"):
        suffix = metric[4:]
        p = float("inf") if suffix in ("inf", "oo") else float(suffix)
        value = phi_distance(X, Y, p, dense_ceiling=run.eigen.dense_ceiling)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    manifest = run.manifest(
        "distance", [file_x, file_y], {"distance": value}, {"metric": metric}
    )
    _emit(run, manifest, [_fmt(value)])


@main.command()
@click.argument("file_x", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_y", type=click.Path(exists=True, dir_okay=False))
@click.option("--family", type=click.Choice(["star", "riemannian", "diamond"]),
              default="star", show_default=True)
@click.option("--ts", default="0,0.25,0.5,0.75,1",
              show_default=True, help="Comma-separated interpolation parameters.")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@click.pass_obj
@_guard
def geodesic(run, file_x, file_y, family, ts, outdir):
    """Sample a geodesic between two SPD matrices into Matrix Market files."""
    X = _load(file_x)
    Y = _load(file_y)
    t_values = [float(tok) for tok in ts.split(",") if tok.strip()]
    if not t_values:
        raise ValueError("no interpolation parameters given")
    outside = [t for t in t_values if not 0.0 <= t <= 1.0]
    if outside and not run.allow_extrapolation:
        raise ValueError(
            f"t values {outside} lie outside [0, 1]; pass --allow-extrapolation"
        )
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    samples = []
    for idx, t in enumerate(t_values):
        if family == "star":
            G = star_geodesic(X, Y, t, run.eigen)
        elif family == "diamond":
            G = diamond_geodesic(X, Y, t, run.eigen)
        else:
            G = riemannian_geodesic(X, Y, t, dense_ceiling=run.eigen.dense_ceiling)
        path = out / f"{family}_{idx:03d}.mtx"
        write_matrix(path, G)
        samples.append(
            {"t": t, "file": str(path), "nnz": G.nnz, "certified": G.certified}
        )
    outputs = {
        "family": family,
        "samples": samples,
        "nnz_inputs": {"x": X.nnz, "y": Y.nnz},
    }
    manifest = run.manifest(
        "geodesic", [file_x, file_y], outputs, {"family": family, "ts": t_values}
    )
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    lines = [f"t={t['t']:g} -> {t['file']} (nnz={t['nnz']})" for t in samples]
    _emit(run, manifest, lines)


@main.command()
@click.argument("files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", type=click.Choice(["inductive", "fixed-point", "hybrid"]),
              default="hybrid", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
@_guard
def mean(run, files, strategy, out):
    """Inductive Thompson mean of one or more SPD matrices."""
    points = [_load(f) for f in files]
    opts = MeanOptions(eigen=run.eigen, strategy=strategy, **run.mean_opts_base)
    result = inductive_mean(MeanProblem(points, opts=opts))
    write_matrix(out, result.mean)
    outputs = {
        "mean_file": str(out),
        "cycles": result.cycles_used,
        "displacement": result.final_displacement,
        "residual": result.residual_norm,
        "certified": result.certified,
    }
    manifest = run.manifest("mean", list(files), outputs, {"strategy": strategy})
    outputs_with_time = dict(outputs, wall_time_ms=manifest["wall_time_ms"])
    with open(str(out) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    _emit(run, manifest, [json.dumps(outputs_with_time, sort_keys=True)])


@main.command()
@click.argument("file_x", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_y", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["extremes", "full"]), default="extremes",
              show_default=True)
@click.pass_obj
@_guard
def spectrum(run, file_x, file_y, mode):
    """Extreme or full generalized spectrum of the pencil (Y, X)."""
    X = _load(file_x)
    Y = _load(file_y)
    if mode == "extremes":
        ext = extreme_pair(X, Y, run.eigen)
        outputs = {
            "alpha": ext.alpha,
            "beta": ext.beta,
            "residuals": list(ext.residuals),
            "iterations": list(ext.iterations),
            "backend": ext.backend,
        }
        lines = [
            f"alpha = {_fmt(ext.alpha)} (residual {ext.residuals[0]:.3e})",
            f"beta  = {_fmt(ext.beta)} (residual {ext.residuals[1]:.3e})",
        ]
    else:
        spec = spectrum_dense(X, Y, dense_ceiling=run.eigen.dense_ceiling)
        outputs = {"eigenvalues": [float(v) for v in spec.eigenvalues]}
        lines = [_fmt(v) for v in spec.eigenvalues]
    manifest = run.manifest("spectrum", [file_x, file_y], outputs, {"mode": mode})
    _emit(run, manifest, lines)


def _bench_pair(n, density, rng):
    if density < 0.25:
        return random_sparse_spd(n, density, rng), random_sparse_spd(n, density, rng)
    return random_spd(n, rng), random_spd(n, rng)


def _timed(fn):
    t0 = time.perf_counter()
    value = fn()
    return value, (time.perf_counter() - t0) * 1000.0


@main.command()
@click.option("--suite", type=click.Choice(["mean", "distance", "geodesic"]),
              required=True)
@click.option("--sizes", default="64,128", show_default=True,
              help="Comma-separated matrix dimensions.")
@click.option("--density", type=float, default=0.05, show_default=True,
              help="Input density; below 0.25 inputs are generated sparse.")
@click.option("--points", "n_points", type=int, default=3, show_default=True,
              help="Family size for the mean suite.")
@click.pass_obj
@_guard
def bench(run, suite, sizes, density, n_points):
    """Benchmark Thompson-path operations against dense Riemannian ones."""
    size_list = [int(tok) for tok in sizes.split(",") if tok.strip()]
    rows = []
    for n in size_list:
        rng = np.random.default_rng(run.seed + n)
        row = {"n": n, "density": density}
        before = run.stats.iterations
        if suite == "distance":
            X, Y = _bench_pair(n, density, rng)
            row["nnz_x"] = X.nnz
            value, ms = _timed(lambda: thompson_distance(X, Y, run.eigen))
            row.update(thompson=value, thompson_ms=ms,
                       thompson_iters=run.stats.iterations - before)
            if n <= run.eigen.dense_ceiling:
                value, ms = _timed(
                    lambda: riemannian_distance(X, Y, dense_ceiling=run.eigen.dense_ceiling)
                )
                row.update(riemannian=value, riemannian_ms=ms)
        elif suite == "geodesic":
            X, Y = _bench_pair(n, density, rng)
            if X.is_sparse:
                row["nnz_union"] = int(((X.raw() != 0) + (Y.raw() != 0)).nnz)
            else:
                row["nnz_union"] = int(np.count_nonzero((X.dense() != 0) | (Y.dense() != 0)))
            G, ms = _timed(lambda: star_geodesic(X, Y, 0.5, run.eigen))
            row.update(star_ms=ms, star_nnz=G.nnz,
                       star_iters=run.stats.iterations - before)
            if n <= run.eigen.dense_ceiling:
                G, ms = _timed(
                    lambda: riemannian_geodesic(X, Y, 0.5, dense_ceiling=run.eigen.dense_ceiling)
                )
                row.update(riemannian_ms=ms, riemannian_nnz=G.nnz)
        else:  # mean
            pts = []
            for _ in range(n_points):
                pts.append(_bench_pair(n, density, rng)[0])
            row["nnz_inputs"] = max(p.nnz for p in pts)
            opts = MeanOptions(eigen=run.eigen, strategy="hybrid", **run.mean_opts_base)
            result, ms = _timed(lambda: inductive_mean(MeanProblem(pts, opts=opts)))
            row.update(mean_ms=ms, residual=result.residual_norm,
                       certified=result.certified, mean_nnz=result.mean.nnz,
                       mean_iters=run.stats.iterations - before)
        rows.append(row)
    manifest = run.manifest(
        "bench", [], {"rows": rows},
        {"suite": suite, "sizes": size_list, "density": density},
    )
    if run.as_json:
        click.echo(json.dumps(manifest, indent=2, sort_keys=True))
    else:
        keys = sorted({k for row in rows for k in row})
        click.echo(" | ".join(f"{k:>14}" for k in keys))
        for row in rows:
            cells = []
            for k in keys:
                v = row.get(k, "")
                cells.append(f"{v:14.6g}" if isinstance(v, float) else f"{v!s:>14}")
            click.echo(" | ".join(cells))


if __name__ == "__main__":
    main()
