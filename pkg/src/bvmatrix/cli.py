"""Command-line entry point: ``bvmatrix check | verify | integrate | probe``.

Exit codes: 0 all requested checks pass, 1 mathematical failure (a witness is
printed), 2 usage or input error.
"""
from __future__ import annotations

import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import click
import numpy as np

from . import derham, engine, master
from .algebra import AlgebraFormatError, GradedAlgebra, check_structure, load_algebra
from .library import BUNDLED, bundled
from .quadrature import BUDGET_ENV, QuadratureError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
WHICH = ("master", "delta", "exp", "equivariant", "psi", "dictionary", "operators")


@dataclass
class RunManifest:
    command: str
    inputs: List[str]
    parameters: dict
    seed: Optional[int] = None
    outputs: List[str] = field(default_factory=list)
    wall_time: float = 0.0

    def write(self, report_path: Optional[str]) -> None:
        text = json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n"
        if report_path and report_path != "-":
            Path(report_path + ".manifest.json").write_text(text)
        else:
            click.echo(text, err=True, nl=False)


def resolve_algebra(source: str) -> GradedAlgebra:
    """A path to a JSON file, or the name of a bundled algebra (``q1`` or ``q1.json``)."""
    path = Path(source)
    if path.exists():
        return load_algebra(path)
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if stem in BUNDLED:
        return bundled(stem)
    raise FileNotFoundError(f"no algebra file {source!r} and no bundled algebra of that name "
                            f"(bundled: {', '.join(BUNDLED)})")


def _emit(report: dict, json_path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if json_path == "-":
        click.echo(text, nl=False)
    elif json_path:
        Path(json_path).write_text(text)


def _load_or_exit(source: str) -> GradedAlgebra:
    try:
        return resolve_algebra(source)
    except (OSError, AlgebraFormatError, ValueError, KeyError) as exc:
        click.echo(f"error: cannot load {source}: {exc}", err=True)
        sys.exit(EXIT_USAGE)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Exact BV identities and matrix integrals for cyclic Z/2-graded algebras."""


# -- check ----------------------------------------------------------------------------------

@main.command()
@click.argument("algebra")
@click.option("--json", "json_path", default=None, help="Write the JSON report here ('-' for stdout).")
def check(algebra, json_path):
    """Structure checks of an algebra file or bundled name."""
    t0 = time.perf_counter()
    A = _load_or_exit(algebra)
    rep = check_structure(A)
    for f in rep.FIELDS:
        c = getattr(rep, f)
        line = f"{f:28s} {c.status}"
        if c.witness:
            line += f"  witness={c.witness}"
        click.echo(line)
    report = {"algebra": A.name or algebra, "report": rep.as_dict(), "all_pass": rep.all_pass}
    _emit(report, json_path)
    RunManifest("check", [algebra], {}, outputs=[json_path] if json_path else [],
                wall_time=time.perf_counter() - t0).write(json_path)
    sys.exit(EXIT_PASS if rep.all_pass else EXIT_FAIL)


# -- verify ---------------------------------------------------------------------------------

def _witness_summary(poly) -> dict:
    from .superpoly import render
    text = render(poly)
    return {"zero": poly.is_zero(), "terms": len(poly.terms),
            "sample": text if len(text) <= 400 else text[:400] + " …"}


def run_verify(A: GradedAlgebra, N: int, which: List[str], seed: int, samples: int) -> dict:
    ctx = master.build_action(A, N)
    results = {}
    for w in which:
        if w in master.WITNESSES:
            results[w] = _witness_summary(master.WITNESSES[w](ctx))
        elif w == "psi":
            dpsi = derham.verify_psi_closed(derham.build_psi(ctx))
            results[w] = {"zero": dpsi.is_zero(), "terms": len(dpsi.body.terms),
                          "by_degree": {str(k): len(dpsi.component(k).terms) for k in dpsi.degrees()}}
            eq = derham.equivariant_de_rham(derham.equivariant_psi(ctx), ctx)
            results["psi_equivariant"] = {"zero": eq.is_zero(), "terms": len(eq.body.terms)}
        elif w == "dictionary":
            if A.r * N * N > 6:
                results[w] = {"skipped": "size guard r·N² ≤ 6"}
                continue
            rep = derham.verify_dictionary(A.r, N, samples=samples, seed=seed)
            results[w] = {"zero": rep.passed, "samples": rep.samples,
                          "signs": {str(k): v for k, v in sorted(rep.signs.items())},
                          "failure": rep.failure}
        elif w == "operators":
            if A.r * N * N > 8:
                results[w] = {"skipped": "size guard r·N² ≤ 8"}
                continue
            rep = derham.verify_operator_identities(ctx, seed=seed)
            results[w] = {"zero": rep.passed, "checked": rep.checked, "failures": rep.failures}
    return results


@main.command()
@click.argument("algebra")
@click.option("--N", "N", type=int, default=1, show_default=True)
@click.option("--which", type=click.Choice(WHICH + ("all",)), multiple=True, default=("all",),
              show_default=True)
@click.option("--cap", type=int, default=master.DEFAULT_CAP, show_default=True,
              help="Largest N accepted for exact verification.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=50, show_default=True)
@click.option("--json", "json_path", default=None)
def verify(algebra, N, which, cap, seed, samples, json_path):
    """Exact witnesses: master equation, Δ-closedness, Ψ, dictionary, operator identities."""
    t0 = time.perf_counter()
    if N < 1 or N > cap:
        click.echo(f"error: N = {N} outside 1..{cap} (raise --cap deliberately)", err=True)
        sys.exit(EXIT_USAGE)
    A = _load_or_exit(algebra)
    names = list(WHICH) if "all" in which else list(dict.fromkeys(which))
    try:
        results = run_verify(A, N, names, seed, samples)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    ok = True
    for k, v in results.items():
        if "skipped" in v:
            click.echo(f"{k:18s} skipped ({v['skipped']})")
            continue
        status = "pass" if v["zero"] else "FAIL"
        ok &= v["zero"]
        extra = f"  witness terms={v['terms']}" if "terms" in v and not v["zero"] else ""
        click.echo(f"{k:18s} {status}{extra}")
        if not v["zero"] and "sample" in v:
            click.echo(f"    {v['sample']}")
    _emit({"algebra": A.name or algebra, "N": N, "seed": seed, "results": results, "all_pass": ok},
          json_path)
    RunManifest("verify", [algebra], {"N": N, "which": names, "cap": cap, "samples": samples}, seed,
                [json_path] if json_path else [], time.perf_counter() - t0).write(json_path)
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


# -- integrate ----------------------------------------------------------------------------------

def _parse_Y(N: int, y: Optional[float], Y: Optional[str]) -> engine.SpectralParameter:
    if Y is not None:
        vals = [float(v) for v in Y.replace(";", ",").split(",") if v.strip()]
        if len(vals) == N:
            return engine.SpectralParameter.diagonal(vals)
        if len(vals) == N * N:
            return engine.SpectralParameter.from_matrix(np.array(vals).reshape(N, N))
        raise click.BadParameter(f"--Y needs {N} eigenvalues or {N * N} matrix entries")
    if y is not None:
        return engine.SpectralParameter.diagonal([y] * N)
    raise click.BadParameter("give --y or --Y")


def _cval(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


@main.command()
@click.argument("algebra")
@click.option("--N", "N", type=int, default=1, show_default=True)
@click.option("--y", type=float, default=None, help="Scalar Y = y·Id.")
@click.option("--Y", "Y", type=str, default=None, help="Eigenvalues 'y1,y2' or row-major entries.")
@click.option("--raw", "mode", flag_value="raw")
@click.option("--normalized", "mode", flag_value="normalized", default=True)
@click.option("--localized", "mode", flag_value="localized")
@click.option("--cross-check", is_flag=True, help="With --localized: compare against direct quadrature.")
@click.option("--scan", type=str, default=None, help="start:stop:count grid of y values.")
@click.option("--fit-order", type=int, default=None)
@click.option("--angle", type=float, default=math.pi / 2, show_default=True,
              help="Ray half-angle for N = 1 (must lie in (π/6, π/2]).")
@click.option("--tol", type=float, default=None, help="Relative tolerance target.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_path", default=None)
@click.option("--csv", "csv_path", default=None, help="Scan output ('-' for stdout).")
def integrate(algebra, N, y, Y, mode, cross_check, scan, fit_order, angle, tol, seed, json_path, csv_path):
    """Numerical F(Y), F̂(Y) and the eigenvalue reduction (A₀ = k)."""
    t0 = time.perf_counter()
    A = _load_or_exit(algebra)
    params = {"N": N, "y": y, "Y": Y, "mode": mode, "cross_check": cross_check, "scan": scan,
              "fit_order": fit_order, "angle": angle, "tol": tol,
              "budget": os.environ.get(BUDGET_ENV)}
    outputs = [p for p in (json_path, csv_path) if p]
    try:
        ctx = master.build_action(A, N)
        if scan:
            report = _run_scan(ctx, scan, fit_order, angle, tol, csv_path)
        else:
            report = _run_single(ctx, _parse_Y(N, y, Y), mode, cross_check, angle, tol)
    except QuadratureError as exc:
        click.echo(f"quadrature failure: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    except (engine.EngineError, click.BadParameter, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    report["inputs"] = {"algebra": A.name or algebra, **params}
    _emit(report, json_path)
    RunManifest("integrate", [algebra], params, seed, outputs, time.perf_counter() - t0).write(json_path)
    sys.exit(EXIT_PASS if report.get("ok", True) else EXIT_FAIL)


def _run_single(ctx, Yp, mode, cross_check, angle, tol) -> dict:
    if mode == "localized":
        res = engine.eigenvalue_reduction(ctx, Yp, tol)
        report = {"mode": mode, "result": res.as_dict()}
        click.echo(f"localized F = {res.value:.15g}  (± {res.abs_error_estimate:.3g})")
        if cross_check:
            if ctx.N > 2:
                raise engine.EngineError("direct cross-check needs N ≤ 2")
            direct = engine.integrate_raw(ctx, Yp)
            ratio = res.scaled_value / direct.scaled_value * math.exp(res.log_scale - direct.log_scale)
            tol_x = 1e-4
            ok = abs(ratio - 1) <= tol_x
            click.echo(f"direct    F = {direct.value:.15g}  (± {direct.abs_error_estimate:.3g})")
            click.echo(f"agreement ratio = {ratio:.15g}  ({'pass' if ok else 'FAIL'} at {tol_x:g})")
            report.update(direct=direct.as_dict(), agreement_ratio=_cval(ratio), ok=ok)
        return report
    contour = None
    if ctx.N == 1 or abs(angle - math.pi / 2) > 1e-15:
        contour = engine.default_contour(ctx, Yp, angle, tol)
    elif tol is not None:
        contour = engine.default_contour(ctx, Yp, angle, tol)
    if mode == "raw":
        res = engine.integrate_raw(ctx, Yp, contour)
        click.echo(f"F = {res.value:.15g}  (± {res.abs_error_estimate:.3g}, {res.evaluations} evaluations)")
    else:
        res = engine.integrate_normalized(ctx, Yp, contour)
        click.echo(f"F̂ = {res.value:.15g}  (± {res.abs_error_estimate:.3g}, {res.evaluations} evaluations)")
    return {"mode": mode, "result": res.as_dict()}


def _run_scan(ctx, scan, fit_order, angle, tol, csv_path) -> dict:
    ys = engine.parse_scan(scan)
    rows, Ys = [], []
    for yv in ys:
        Yp = engine.SpectralParameter.diagonal([yv] * ctx.N)
        contour = engine.default_contour(ctx, Yp, angle, tol) if ctx.N == 1 else None
        res = engine.integrate_normalized(ctx, Yp, contour)
        rows.append({"y": yv, "value": res.value, "err": res.abs_error_estimate})
        Ys.append(Yp)
    text = engine.scan_csv(rows)
    if csv_path == "-" or csv_path is None:
        click.echo(text, nl=False)
    else:
        Path(csv_path).write_text(text)
    report = {"mode": "scan", "rows": [{"y": r["y"], "value": _cval(r["value"]), "err": r["err"]}
                                       for r in rows]}
    if fit_order is not None:
        fit = engine.asymptotic_expansion(ctx, Ys, fit_order, values=[r["value"] for r in rows])
        click.echo("fitted F̂ coefficients (powers of 1/ζ): "
                   + ", ".join(f"{c:.8g}" for c in fit.coefficients), err=True)
        report["fit"] = fit.as_dict()
    return report


# -- probe ------------------------------------------------------------------------------------

@main.command()
@click.option("--json", "json_path", default=None)
def probe(json_path):
    """Miwa calibration and KdV residual trend for Q(1) (reported, not gated)."""
    from .library import build
    from .miwa import kdv_probe
    t0 = time.perf_counter()
    q1 = build("q1")
    p = kdv_probe(master.build_action(q1, 2), master.build_action(q1, 3))
    click.echo(f"c0 = {p.calibration['c0']:.6f}, c1 = {p.calibration['c1']:.6f}")
    for n, r in zip(p.orders, p.relative_residuals):
        click.echo(f"order {n}: relative KdV residual {r:.3e}")
    click.echo(f"monotone decrease: {p.monotone}")
    _emit(p.as_dict(), json_path)
    RunManifest("probe", [], {}, None, [json_path] if json_path else [],
                time.perf_counter() - t0).write(json_path)
    sys.exit(EXIT_PASS)


if __name__ == "__main__":
    main()
