"""Command-line interface: ``tt-toda <command> [options]``.

Every number written comes from a library call; this module only parses,
validates, dispatches and formats.  Reports are JSON with a ``schema`` field
and floats printed as ``%.12e``; grids and tables can also be written as CSV.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import click

from . import __version__
import numpy as np

SCHEMA = "v1"
FLOAT_FMT = "%.12e"

log = logging.getLogger("tt_toda")


# ---------------------------------------------------------------------------
# formatting


def _plain(obj: Any) -> Any:
    """Convert numpy / fraction / complex values into JSON-ready structures."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        z = complex(obj)
        return {"re": z.real, "im": z.imag}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _emit(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_emit(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        items = [pad + "  " + _emit(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(str(obj))
        return FLOAT_FMT % obj
    return json.dumps(obj)


def dumps(report: dict) -> str:
    """Deterministic JSON text: fixed key order, ``%.12e`` floats."""
    return _emit(_plain(report)) + "\n"


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    return [(prefix, obj)]


def _csv_cell(v: Any) -> str:
    if isinstance(v, float):
        return FLOAT_FMT % v
    if v is None:
        return ""
    return str(v)


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in _plain(list(row))])
    return buf.getvalue()


def report_to_csv(report: dict) -> str:
    return rows_to_csv(["key", "value"], _flatten(_plain(report)))


# ---------------------------------------------------------------------------
# parsing and validation


class InputError(click.UsageError):
    """Invalid input; click exits with status 2."""


def parse_number(text: str) -> float:
    """Parse ``1/6``, ``0.25`` or ``-3`` exactly, then convert to float."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse number {text!r}") from exc


def parse_vector(text: str | None) -> list[float] | None:
    if text is None:
        return None
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise InputError("empty vector")
    return [parse_number(p) for p in parts]


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        return complex(parse_number(text))


def complete_m(nplus1: int, values: Sequence[float]) -> np.ndarray:
    """Full ``m`` from either all ``n+1`` entries or the leading ``d`` ones."""
    d = nplus1 // 2
    v = np.asarray(values, dtype=float)
    if v.size == nplus1:
        if np.max(np.abs(v + v[::-1])) > 1e-12:
            raise InputError("m must satisfy m_i + m_(n-i) = 0")
        return v
    if v.size == d:
        m = np.zeros(nplus1)
        m[:d] = v
        m[nplus1 - d :] = -v[::-1]
        return m
    raise InputError(f"malformed vector length {v.size}: expected {d} or {nplus1} entries for n+1 = {nplus1}")


def _m_from_options(nplus1: int, m: str | None, m0: str | None) -> np.ndarray:
    if m is not None and m0 is not None:
        raise InputError("give either --m or --m0, not both")
    if m0 is not None:
        if nplus1 > 3:
            raise InputError("--m0 only determines m for n+1 = 2 or 3; use --m")
        return complete_m(nplus1, [parse_number(m0)])
    if m is None:
        raise InputError("--m is required")
    return complete_m(nplus1, parse_vector(m))


def _validate_rank(nplus1: int) -> None:
    from .algebra import MAX_RANK

    if not 2 <= nplus1 <= MAX_RANK:
        raise InputError(f"--nplus1 must be in 2..{MAX_RANK}")


def _guard(fn: Callable[[], Any]) -> Any:
    """Run a library call, turning validation errors into exit status 2."""
    try:
        return fn()
    except click.ClickException:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------------------
# configuration


def _apply_config(ctx: click.Context, params: dict) -> dict:
    """Fill parameters left at their defaults from the ``--config`` file.

    Unknown keys are rejected.  Values are parsed by the option's own type, so a
    config file accepts exactly what the command line accepts.
    """
    cfg = ctx.obj.get("config") or {}
    if not cfg:
        return params
    known = {p.name: p for p in ctx.command.params}
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise InputError(f"unknown config keys for {ctx.command.name}: {', '.join(unknown)}")
    out = dict(params)
    for key, val in cfg.items():
        src = ctx.get_parameter_source(key)
        if src is not None and src != click.core.ParameterSource.DEFAULT:
            continue  # the command line wins
        opt = known[key]
        if opt.multiple:
            vals = val if isinstance(val, list) else [val]
            out[key] = tuple(opt.type.convert(str(v) if not isinstance(v, bool) else v, opt, ctx) for v in vals)
        elif isinstance(val, bool) or val is None:
            out[key] = val
        else:
            out[key] = opt.type.convert(str(val) if not isinstance(val, str) else val, opt, ctx)
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    return data


# ---------------------------------------------------------------------------
# output


def _write(ctx: click.Context, name: str, text: str) -> None:
    out = ctx.obj["out"]
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _finish(ctx: click.Context, name: str, report: dict, ok: bool = True) -> None:
    report = {"schema": SCHEMA, "command": ctx.command.name, **report}
    if ctx.obj["format"] == "csv":
        _write(ctx, f"{name}.csv", report_to_csv(report))
    else:
        _write(ctx, f"{name}.json", dumps(report))
    if ctx.obj["strict"] and not ok:
        raise click.exceptions.Exit(1)


def _setup_logging() -> None:
    level = os.environ.get("TT_TODA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


# ---------------------------------------------------------------------------
# commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--strict", is_flag=True, help="Exit 1 if any acceptance flag fails.")
@click.option("--threads", type=click.IntRange(1, 256), default=1, show_default=True, help="Workers for sweeps.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON file with option values.")
@click.version_option(version=__version__, prog_name="tt-toda")
@click.pass_context
def main(ctx: click.Context, out, fmt, strict, threads, config_path) -> None:
    """Monodromy data and radial solutions of the tt*-Toda equations."""
    _setup_logging()
    ctx.ensure_object(dict)
    ctx.obj.update(out=out, format=fmt, strict=strict, threads=threads, config=_load_config(config_path))


@main.command()
@click.option("--nplus1", type=int, required=False, help="Rank n+1.")
@click.option("--k", "k_vec", default=None, help="Exponents k_i, comma separated.")
@click.option("--c", "c_vec", default=None, help="Coefficients c_i, comma separated.")
@click.option("--m", "m_vec", default=None, help="Asymptotic data m (all n+1 entries or the first d).")
@click.option("--m0", default=None, help="m_0 alone (n+1 = 2, 3).")
@click.option("--chat", "chat_vec", default=None, help="Optional chat with --m (default chat^id).")
@click.pass_context
def monodromy(ctx, nplus1, k_vec, c_vec, m_vec, m0, chat_vec) -> None:
    """Closed-form Stokes and connection data."""
    p = _apply_config(ctx, dict(nplus1=nplus1, k_vec=k_vec, c_vec=c_vec, m_vec=m_vec, m0=m0, chat_vec=chat_vec))
    from . import spectral as sp
    from .algebra import Rank

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    r = Rank(N)
    if p["m_vec"] is not None or p["m0"] is not None:
        if p["k_vec"] is not None or p["c_vec"] is not None:
            raise InputError("give either --m/--m0 or --k/--c")
        m = _m_from_options(N, p["m_vec"], p["m0"])
        chat = parse_vector(p["chat_vec"])
        if chat is None:
            chat = _guard(lambda: sp.chat_id(m, r))
        elif len(chat) != N:
            raise InputError(f"malformed vector length {len(chat)} for --chat: expected {N}")
        data = _guard(lambda: sp.asymptotic_from_m(m, chat, r))
        source = {"m": m}
    else:
        k = parse_vector(p["k_vec"])
        c = parse_vector(p["c_vec"])
        if k is None or c is None:
            raise InputError("--k and --c are both required without --m/--m0")
        for name, v in (("k", k), ("c", c)):
            if len(v) != N:
                raise InputError(f"malformed vector length {len(v)} for --{name}: expected {N}")
        data = _guard(lambda: sp.derive_asymptotic(sp.ModelInput(rank=r, c=np.array(c), k=np.array(k))))
        source = {"k": k, "c": c}
    s = sp.stokes_params(data)
    conn = _guard(lambda: sp.build_D1(data))
    cp = sp.char_poly(sp.build_Mtilde(s))
    report = {
        "nplus1": N,
        "input": source,
        "m": data.m,
        "chat": data.chat,
        "N": data.N,
        "c_product": data.c_prod,
        "s": s.essential,
        "s_full": s.s,
        "e": conn.e,
        "chat_id": sp.chat_id(data),
        "char_poly": cp,
        "char_poly_expected": sp.expected_char_poly(s),
        "global_criterion": sp.global_criterion(conn, data),
        "positivity_test": sp.positivity_region_test(s),
    }
    _finish(ctx, "monodromy", report)


@main.command()
@click.option("--nplus1", type=int, default=None)
@click.option("--m", "m_vec", default=None)
@click.option("--m0", default=None, help="m_0 alone (n+1 = 2, 3).")
@click.option("--smin", type=float, default=math.log(1e-4), show_default=True, help="log of the inner radius (in 2|t|).")
@click.option("--smax", type=float, default=math.log(40.0), show_default=True, help="log of the outer radius (in 2|t|).")
@click.option("--nodes", type=click.IntRange(8, 10**6), default=4000, show_default=True)
@click.option("--left-bc", type=click.Choice(["auto", "robin", "neumann"]), default="auto", show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.pass_context
def solve(ctx, nplus1, m_vec, m0, smin, smax, nodes, left_bc, tol) -> None:
    """Solve the radial problem; write the grid and a fit summary."""
    p = _apply_config(ctx, dict(nplus1=nplus1, m_vec=m_vec, m0=m0, smin=smin, smax=smax, nodes=nodes, left_bc=left_bc, tol=tol))
    from .asymptotics import FitWindowError, fit_solution
    from .toda_solver import SolverOptions, assemble_tt_toda, full_system_residual, solve_bvp

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    m = _m_from_options(N, p["m_vec"], p["m0"])
    prob = _guard(lambda: assemble_tt_toda(N, m, s_min=p["smin"], s_max=p["smax"], nodes=p["nodes"]))
    sol = _guard(lambda: solve_bvp(prob, SolverOptions(tol=p["tol"], left_bc=p["left_bc"])))
    header = ["s"] + [f"u_{i + 1}" for i in range(prob.n_eqs)]
    rows = [[sol.grid[j], *sol.u[:, j]] for j in range(sol.grid.size)]
    summary = {
        "nplus1": N,
        "m": m,
        "nodes": prob.nodes,
        "s_range": [prob.s_min, prob.s_max],
        "converged": sol.converged,
        "residual": sol.residual_norm,
        "full_system_residual": full_system_residual(N, sol),
        "backend": sol.diagnostics.get("backend"),
    }
    try:
        fit = fit_solution(sol, N)
        summary["fit"] = {
            "gamma_fit": fit.gamma_fit,
            "const_fit": fit.const_fit,
            "s_fit": fit.s_fit,
            "windows": {"origin": fit.fit_windows["origin"], "far": {str(k): v for k, v in fit.fit_windows["far"].items()}},
        }
    except FitWindowError as exc:
        summary["fit"] = {"error": str(exc)}
    if ctx.obj["format"] == "csv" or ctx.obj["out"] is not None:
        _write(ctx, "solve.csv", rows_to_csv(header, rows))
        if ctx.obj["out"] is not None:
            _write(ctx, "solve_fit.json", dumps({"schema": SCHEMA, "command": "solve", **summary}))
    else:
        summary["grid"] = {"header": header, "rows": rows}
        _write(ctx, "solve.json", dumps({"schema": SCHEMA, "command": "solve", **summary}))
    if ctx.obj["strict"] and not sol.converged:
        raise click.exceptions.Exit(1)


def _sweep(ctx: click.Context, fn: Callable, items: list) -> list:
    threads = ctx.obj["threads"]
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))  # map keeps input order


@main.command("connection-check")
@click.option("--nplus1", type=int, default=None)
@click.option("--m", "m_vecs", multiple=True, help="m vector; repeat for a sweep.")
@click.option("--m0", "m0s", multiple=True, help="m_0 (n+1 = 2, 3); repeat for a sweep.")
@click.option("--s-tol", type=float, default=0.02, show_default=True)
@click.option("--const-tol", type=float, default=1e-2, show_default=True)
@click.pass_context
def connection_check(ctx, nplus1, m_vecs, m0s, s_tol, const_tol) -> None:
    """Solve, fit both ends and compare with the closed forms."""
    p = _apply_config(ctx, dict(nplus1=nplus1, m_vecs=m_vecs, m0s=m0s, s_tol=s_tol, const_tol=const_tol))
    from .asymptotics import connection_problem_report

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    ms = [_m_from_options(N, v, None) for v in p["m_vecs"]] + [_m_from_options(N, None, v) for v in p["m0s"]]
    if not ms:
        raise InputError("give at least one --m or --m0")
    reports = _sweep(ctx, lambda m: _guard(lambda: connection_problem_report(m, N, s_tol=p["s_tol"], const_tol=p["const_tol"])), ms)
    ok = all(r["pass"] for r in reports)
    _finish(ctx, "connection_check", {"nplus1": N, "cases": reports, "pass": ok}, ok)


@main.command("ode-verify")
@click.option("--nplus1", type=int, default=None)
@click.option("--m", "m_vec", default=None)
@click.option("--m0", default=None)
@click.option("--tol", type=float, default=1e-6, show_default=True, help="Pass threshold for both comparisons.")
@click.pass_context
def ode_verify(ctx, nplus1, m_vec, m0, tol) -> None:
    """Numeric Stokes factors and D_1 against the closed forms."""
    p = _apply_config(ctx, dict(nplus1=nplus1, m_vec=m_vec, m0=m0, tol=tol))
    from .linear_ode import verify_against_closed_form

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    m = _m_from_options(N, p["m_vec"], p["m0"])
    res = _guard(lambda: verify_against_closed_form(m))
    ok = res["stokes_max_error"] <= p["tol"] and res["D1_rel_error"] <= p["tol"]
    _finish(ctx, "ode_verify", {"nplus1": N, "m": m, **res, "tolerance": p["tol"], "pass": ok}, ok)


@main.command()
@click.option("--nplus1", type=int, default=None)
@click.option("--m", "m_vec", default=None)
@click.option("--m0", default=None)
@click.option("--zeta", "zetas", default="0.2,0.5,1,2,4", show_default=True, help="Sample points (complex allowed, e.g. 0.3+0.2j).")
@click.pass_context
def mellin(ctx, nplus1, m_vec, m0, zetas) -> None:
    """Samples of g by quadrature and by residues, with identity residuals."""
    p = _apply_config(ctx, dict(nplus1=nplus1, m_vec=m_vec, m0=m0, zetas=zetas))
    from .mellin import cross_validation_table, exact_B_inverse

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    m = _m_from_options(N, p["m_vec"], p["m0"])
    zs = [parse_complex(z) for z in str(p["zetas"]).split(",") if z.strip()]
    rows = _guard(lambda: cross_validation_table(m, zs))
    _finish(ctx, "mellin", {"nplus1": N, "m": m, "samples": rows, "B_inverse": exact_B_inverse(m)})


@main.command("jump-check")
@click.option("--nplus1", type=int, default=None)
@click.option("--m", "m_vec", default=None)
@click.option("--m0", default=None)
@click.option("--s", "s_vec", default=None, help="Essential Stokes parameters s_1..s_d instead of m.")
@click.option("--x", type=float, default=6.0, show_default=True)
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.pass_context
def jump_check(ctx, nplus1, m_vec, m0, s_vec, x, tol) -> None:
    """Jump matrices, Z-chain and reality identities, first-order w."""
    p = _apply_config(ctx, dict(nplus1=nplus1, m_vec=m_vec, m0=m0, s_vec=s_vec, x=x, tol=tol))
    from .algebra import Rank
    from .jump_data import identity_report
    from .spectral import StokesData, stokes_params

    if p["nplus1"] is None:
        raise InputError("--nplus1 is required")
    N = int(p["nplus1"])
    _validate_rank(N)
    if p["s_vec"] is not None:
        sv = parse_vector(p["s_vec"])
        if len(sv) != N // 2:
            raise InputError(f"malformed vector length {len(sv)} for --s: expected {N // 2}")
        s = StokesData.from_essential(Rank(N), sv)
    else:
        s = stokes_params(_m_from_options(N, p["m_vec"], p["m0"]), N)
    rep = _guard(lambda: identity_report(s, p["x"]))
    keys = ["conjugation_residual", "rh_condition_residual", "rh_reality_residual", "z_chain_residual", "monodromy_consistency_residual"]
    ok = all(rep[k] <= p["tol"] for k in keys)
    _finish(ctx, "jump_check", {"nplus1": N, "s": s.essential, "x": p["x"], **rep, "tolerance": p["tol"], "pass": ok}, ok)


if __name__ == "__main__":  # pragma: no cover
    main()
