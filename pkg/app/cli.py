"""
Command-line interface for diffeo-trees.
"""

import json
import sys
from functools import wraps
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import uvicorn

from app import amplitudes, bell, legendre, verification
from app.config import load_run_config, settings
from app.diffeoeq import InteractingTheory, build_pq, check_smatrix, smatrix_table
from app.exactalg import format_poly, parse_substitution, split_assignments, to_rational
from app.exceptions import DiffeoError
from app.logging_config import get_structured_logger, run_context, setup_structured_logging
from app.models import (
    BellResult,
    BnResult,
    LegendreResult,
    OutputFormat,
    RunConfig,
    SmatrixResult,
    VerificationRun,
)
from app.series import (
    Diffeomorphism,
    invert,
    series_from_diffeo,
    series_to_document,
    to_egf,
)

logger = get_structured_logger(__name__)

METHODS = ["direct", "recurrence", "closed", "inverse"]


def _parse_coeffs(ctx: click.Context, param: click.Parameter, text: Optional[str]) -> Dict[str, str]:
    """Option callback: name=value pairs with exact rational values."""
    try:
        pairs = split_assignments(text)
        return {name: str(to_rational(value)) for name, value in pairs.items()}
    except DiffeoError as e:
        raise click.BadParameter(e.message)


def _diffeo(cfg: RunConfig, order: int) -> Diffeomorphism:
    return Diffeomorphism.with_assignments(order, cfg.coeff_substitutions)


def _emit(model, output: OutputFormat, table: str) -> None:
    if output == OutputFormat.JSON:
        click.echo(model.model_dump_json(indent=2))
    else:
        click.echo(table)


def handle_errors(func):
    """Turn library errors into a diagnostic on stderr and exit code 1"""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DiffeoError as e:
            logger.error(e.message, error_type=type(e).__name__, details=e.details)
            click.echo(f"Error: {e.message}", err=True)
            if e.details:
                click.echo(json.dumps(e.details, default=str, sort_keys=True), err=True)
            sys.exit(1)
        except ValueError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)

    return wrapper


def _config(ctx: click.Context, **overrides) -> RunConfig:
    return load_run_config(ctx.obj.get("config_path"), overrides)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON file holding a RunConfig; command-line options take precedence")
@click.option("--log-level", default=None,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              help="Logging level on stderr (default: DIFFEO_LOG_LEVEL or WARNING)")
@click.version_option(version=settings.version, prog_name="diffeo")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]):
    """
    Tree amplitudes of field diffeomorphisms, Bell polynomial identities and
    the combinatorial Legendre transform, computed exactly.

    Examples:
        diffeo bn --n 3 --method closed
        diffeo bell --n 3 --k 2
        diffeo verify --suite all --order 8 --trials 20 --seed 42
    """
    setup_structured_logging(
        service_name="diffeo-trees",
        log_level=(log_level or settings.log_level).upper(),
        enable_json_logging=settings.json_logging,
    )
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.with_resource(run_context())


@main.command()
@click.option("--n", "n", required=True, type=click.IntRange(min=1), help="Number of on-shell legs")
@click.option("--method", default="closed", type=click.Choice(METHODS),
              help="Route used to compute b_n (default: closed)")
@click.option("--trials", type=click.IntRange(min=1), default=None,
              help="Kinematic points for the tree routes (default: 20)")
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=None,
              help="Seed of the PCG64 kinematic sampler (default: 42)")
@click.option(
    "--coeffs", default=None, callback=_parse_coeffs, help="Coefficient values, e.g. a1=2,a2=1/3"
)
@click.option("--json", "as_json", is_flag=True, help="Print a JSON BnResult")
@click.pass_context
@handle_errors
def bn(ctx, n: int, method: str, trials: Optional[int], seed: Optional[int],
       coeffs: Dict[str, str], as_json: bool):
    """Compute b_n, the sum over trees with n on-shell legs and one off-shell edge."""
    cfg = _config(ctx, trials=trials, seed=seed, coeff_substitutions=coeffs or None,
                  output=OutputFormat.JSON if as_json else None)
    diffeo = _diffeo(cfg, n)

    result = BnResult(n=n, method=method, poly="")
    if method in ("direct", "recurrence"):
        rules = amplitudes.FeynmanRules(diffeo)
        evaluate = amplitudes.b_direct if method == "direct" else amplitudes.b_recurrence
        points = amplitudes.KinematicSampler(cfg.seed).sample_many(n, cfg.trials)
        values = [evaluate(n, rules, pt) for pt in points]
        result.poly = format_poly(values[0])
        result.trials = cfg.trials
        result.point_independent = len(set(values)) == 1
    elif method == "closed":
        result.poly = format_poly(amplitudes.b_closed(n, diffeo))
    else:
        result.poly = format_poly(amplitudes.b_inverse(n, diffeo))

    _emit(result, cfg.output, result.poly)
    if result.point_independent is False:
        click.echo(f"Error: b_{n} differs between kinematic points", err=True)
        sys.exit(1)


@main.group("bell", invoke_without_command=True)
@click.option("--n", "n", type=click.IntRange(min=0), help="Size n of B_{n,k}")
@click.option("--k", "k", type=click.IntRange(min=0), help="Number of blocks k of B_{n,k}")
@click.option("--subst", default=None, help="Argument values, e.g. x1=1,x2=2*a1")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON BellResult")
@click.pass_context
@handle_errors
def bell_cmd(ctx, n: Optional[int], k: Optional[int], subst: Optional[str], as_json: bool):
    """Print the partial Bell polynomial B_{n,k}(x1, x2, ...)."""
    if ctx.invoked_subcommand is not None:
        return
    if n is None or k is None:
        raise click.UsageError("--n and --k are required unless a subcommand is given")
    poly = bell.bell_fast(n, k, bell.BellArgs.symbolic())
    try:
        mapping = parse_substitution(subst)
    except DiffeoError as e:
        raise click.BadParameter(e.message, param_hint="--subst")
    if mapping:
        poly = poly.substitute(mapping)
    result = BellResult(n=n, k=k, poly=format_poly(poly))
    _emit(result, OutputFormat.JSON if as_json else OutputFormat.TABLE, result.poly)


def _finish(run: VerificationRun, output: OutputFormat) -> None:
    _emit(run, output, run.render())
    if not run.passed:
        sys.exit(1)


@bell_cmd.command("verify")
@click.option("--suite", "suites", multiple=True, default=("all",),
              type=click.Choice(list(verification.BELL_SUITES) + ["all"]),
              help="Bell identity suite (repeatable, default: all)")
@click.option("--nmax", type=click.IntRange(min=1), default=None, help="Largest n checked")
@click.option("--json", "as_json", is_flag=True, help="Print JSON reports")
@click.pass_context
@handle_errors
def bell_verify(ctx, suites: Tuple[str, ...], nmax: Optional[int], as_json: bool):
    """Verify the Bell polynomial identities symbolically."""
    cfg = _config(ctx, order=nmax, output=OutputFormat.JSON if as_json else None)
    names = list(verification.BELL_SUITES) if "all" in suites else list(suites)
    reports = verification.run_suites(names, cfg)
    run = VerificationRun(
        passed=all(r.passed for r in reports), parameters={"nmax": cfg.order}, reports=reports
    )
    _finish(run, cfg.output)


@main.command()
@click.option("--suite", "suites", multiple=True, default=None,
              type=click.Choice(verification.available_suites()),
              help="Suite to run (repeatable, default: all)")
@click.option("--order", type=click.IntRange(min=1), default=None, help="Truncation order N")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Kinematic points per check")
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=None, help="Sampler seed")
@click.option("--json", "as_json", is_flag=True, help="Print JSON reports")
@click.pass_context
@handle_errors
def verify(ctx, suites: Tuple[str, ...], order: Optional[int], trials: Optional[int],
           seed: Optional[int], as_json: bool):
    """Run verification suites; exit code 0 iff every check passes."""
    cfg = _config(ctx, order=order, trials=trials, seed=seed, suites=list(suites) or None,
                  output=OutputFormat.JSON if as_json else None)
    reports = verification.run_suites(cfg.suites, cfg)
    run = VerificationRun(
        passed=all(r.passed for r in reports),
        parameters={"order": cfg.order, "trials": cfg.trials, "seed": cfg.seed},
        reports=reports,
    )
    _finish(run, cfg.output)


@main.command("legendre")
@click.option("--order", type=click.IntRange(min=2), default=None, help="Truncation order N")
@click.option(
    "--coeffs", default=None, callback=_parse_coeffs, help="Coefficient values, e.g. a1=2,a2=1/3"
)
@click.option("--json", "as_json", is_flag=True, help="Print a JSON LegendreResult")
@click.pass_context
@handle_errors
def legendre_cmd(ctx, order: Optional[int], coeffs: Dict[str, str], as_json: bool):
    """Legendre transform of the action of F and its tree-series coefficients L_n = b_{n-1}."""
    cfg = _config(ctx, order=order, coeff_substitutions=coeffs or None,
                  output=OutputFormat.JSON if as_json else None)
    N = max(cfg.order, 2)
    diffeo = _diffeo(cfg, N + 1)
    A = legendre.build_A(diffeo, N + 1)
    transform = legendre.legendre_transform(A, N)
    trees = legendre.tree_series(A, N)
    report = legendre.check_legendre_b_relation(N, diffeo)
    result = LegendreResult(
        order=N,
        transform=series_to_document(transform),
        tree_series=series_to_document(trees),
        report=report,
    )
    lines = [f"L_{n} = {format_poly(trees.coefficient(n))}" for n in range(2, N + 1)]
    _emit(result, cfg.output, "\n".join(lines + ["", report.render()]))
    if not report.passed:
        sys.exit(1)


@main.command()
@click.option("--order", type=click.IntRange(min=1), default=None, help="Largest n of W_n^(s)")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON SmatrixResult")
@click.pass_context
@handle_errors
def smatrix(ctx, order: Optional[int], as_json: bool):
    """S-matrix coefficients W_n^(s) of the interacting theory, s = 3, 4, 5."""
    cfg = _config(ctx, order=order, output=OutputFormat.JSON if as_json else None)
    theory = InteractingTheory(Diffeomorphism.generic(cfg.order))
    entries = smatrix_table(theory, cfg.order)
    report = check_smatrix(cfg.order)
    result = SmatrixResult(order=cfg.order, entries=entries, report=report)
    lines = [f"W_{e.n}^({e.s}) = {e.poly}" for e in entries]
    _emit(result, cfg.output, "\n".join(lines + ["", report.render()]))
    if not report.passed:
        sys.exit(1)


@main.command()
@click.option("--order", type=click.IntRange(min=1), default=None, help="Truncation order N")
@click.option(
    "--coeffs", default=None, callback=_parse_coeffs, help="Coefficient values, e.g. a1=2,a2=1/3"
)
@click.option("--json", "as_json", is_flag=True, help="Print a JSON series document")
@click.pass_context
@handle_errors
def inverse(ctx, order: Optional[int], coeffs: Dict[str, str], as_json: bool):
    """EGF coefficients b_n of the compositional inverse of F."""
    cfg = _config(ctx, order=order, coeff_substitutions=coeffs or None,
                  output=OutputFormat.JSON if as_json else None)
    diffeo = _diffeo(cfg, cfg.order)
    G = to_egf(invert(series_from_diffeo(diffeo, cfg.order)))
    document = series_to_document(G)
    lines = [f"b_{c.n} = {c.poly}" for c in document.coefficients if c.n >= 1]
    _emit(document, cfg.output, "\n".join(lines))


@main.command()
@click.option("--order", type=click.IntRange(min=3), default=None, help="Truncation order N")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Directory receiving the JSON files")
@click.option("--suite", "suites", multiple=True, default=None,
              type=click.Choice(verification.available_suites()),
              help="Suites whose reports are exported (default: all)")
@click.pass_context
@handle_errors
def export(ctx, order: Optional[int], out_dir: str, suites: Tuple[str, ...]):
    """Write series documents and suite reports as JSON files."""
    cfg = _config(ctx, order=order, suites=list(suites) or None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    diffeo = _diffeo(cfg, cfg.order + 1)
    pack = build_pq(diffeo, cfg.order)
    A = legendre.build_A(diffeo, cfg.order + 1)
    documents = {
        "F": pack.F,
        "F_inverse": to_egf(invert(pack.F)),
        "P": pack.P,
        "Q": pack.Q,
        "tree_series": legendre.tree_series(A, cfg.order),
    }
    written: List[str] = []
    for name, series in documents.items():
        path = out / f"{name}.json"
        path.write_text(series_to_document(series).model_dump_json(indent=2) + "\n", encoding="utf-8")
        written.append(path.name)

    reports = verification.run_suites(cfg.suites, cfg)
    for report in reports:
        path = out / f"report_{report.suite}.json"
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        written.append(path.name)

    for name in written:
        click.echo(name)
    if not all(r.passed for r in reports):
        sys.exit(1)


@main.command()
@click.option("--host", "-h", default=None, help="Host to bind the server to (default: 127.0.0.1)")
@click.option("--port", "-p", default=None, type=int, help="Port to bind the server to (default: 8000)")
@click.option("--reload", is_flag=True, default=False,
              help="Enable auto-reload for development (default: False)")
def serve(host: Optional[str], port: Optional[int], reload: bool):
    """Serve the computations over HTTP."""
    host = host or settings.host
    port = port or settings.port
    click.echo("Starting diffeo-trees server...", err=True)
    click.echo(f"Server will be available at: http://{host}:{port}", err=True)
    click.echo(f"API docs will be available at: http://{host}:{port}/docs", err=True)
    try:
        uvicorn.run(
            "app.main:app",
            host=host,
            port=port,
            reload=reload,
            log_level=settings.log_level.lower(),
        )
    except KeyboardInterrupt:
        click.echo("\nShutting down server...", err=True)
    except Exception as e:
        click.echo(f"Error starting server: {e}", err=True)
        sys.exit(1)


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on an argument list and return its exit code instead of exiting."""
    try:
        main.main(args=argv, prog_name="diffeo", standalone_mode=True)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(run())
