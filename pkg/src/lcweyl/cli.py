"""``lcweyl`` command line.

Negative numbers clash with option parsing, so pass them with ``=`` or a
leading space inside quotes: ``--a=-1,-1`` or ``--a " -1,-1"``; windows are
``lo:hi`` (``--window " -6:3"``).

Exit codes: 0 success, 1 verification failure or assembly failure,
2 usage or parse error.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import sys

import click

from .cech import LCQuery, assemble_window_module, component_dim, default_box, degree_statuses, parse_ideal
from .gradedmod import module_to_json
from .theorems import default_suite, load_suite, parse_window, run_suite
from .weyl import ParseError, format_element, fourier, parse_weyl

log = logging.getLogger("lcweyl")


def _ideal(text: str, m: int | None):
    try:
        return parse_ideal(text, m)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--ideal") from None


def _window(text: str) -> tuple[int, int]:
    try:
        return parse_window(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--window") from None


@click.group()
@click.option("-v", "--verbose", count=True, help="More logging on stderr.")
def main(verbose: int) -> None:
    """Local cohomology of monomial ideals with its Weyl-algebra action."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@main.command()
@click.option("--ideal", required=True, help='Monomial generators, e.g. "x1*x2, x3".')
@click.option("--i", "index", required=True, type=int, help="Cohomological index.")
@click.option("--a", "multidegree", required=True, help='Multidegree, e.g. " -1,-1".')
@click.option("--m", type=int, default=None, help="Number of variables (default: largest index used).")
def component(ideal: str, index: int, multidegree: str, m: int | None) -> None:
    """Print dim H^i_I(R)_a."""
    I = _ideal(ideal, m)
    try:
        a = tuple(int(v) for v in multidegree.strip().split(","))
    except ValueError:
        raise click.BadParameter(f"malformed multidegree {multidegree!r}", param_hint="--a") from None
    try:
        click.echo(component_dim(I, index, a))
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


@main.command()
@click.option("--ideal", required=True)
@click.option("--i", "index", required=True, type=int)
@click.option("--window", required=True, help='Degree range "lo:hi".')
@click.option("--box", type=click.IntRange(min=1), default=None, help="Per-axis multidegree bound.")
@click.option("--m", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table")
@click.option("--with-module", is_flag=True, help="Include the assembled module in JSON output.")
def table(ideal: str, index: int, window: str, box: int | None, m: int | None, fmt: str, with_module: bool) -> None:
    """Per-degree vanishing status of H^i_I(R)."""
    I = _ideal(ideal, m)
    lo, hi = _window(window)
    if not 0 <= index <= I.s:
        raise click.BadParameter(f"index must lie in 0..{I.s}", param_hint="--i")
    B = default_box(I, (lo, hi)) if box is None else box
    try:
        statuses = degree_statuses(I, index, (lo, hi), B)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--box") from None
    try:
        M = assemble_window_module(LCQuery(I, index, (lo, hi), B))
    except Exception as exc:
        click.echo(f"error: assembly failed: {exc}", err=True)
        sys.exit(1)
    rows = []
    for n in range(lo, hi + 1):
        st = statuses[n]
        dim = M.dims[n - lo] if M.is_box_complete(n) else None
        rows.append({"degree": n, "status": st.kind, "witness": list(st.witness) if st.witness else None, "dim": dim})
    if fmt == "json":
        out = {"ideal": str(I), "m": I.m, "i": index, "window": [lo, hi], "box": B, "rows": rows}
        if with_module:
            out["module"] = module_to_json(M)
        click.echo(json.dumps(out, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["degree", "status", "witness", "dim"])
        for r in rows:
            writer.writerow([r["degree"], r["status"], _fmt_witness(r["witness"]), "" if r["dim"] is None else r["dim"]])
        click.echo(buf.getvalue(), nl=False)
    else:
        click.echo(f"H^{index}_I(R), I = ({I}), m = {I.m}, box = {B}")
        click.echo(f"{'degree':>6}  {'status':<15} {'witness':<16} dim")
        for r in rows:
            dim = "-" if r["dim"] is None else str(r["dim"])
            click.echo(f"{r['degree']:>6}  {r['status']:<15} {_fmt_witness(r['witness']) or '-':<16} {dim}")


def _fmt_witness(w) -> str:
    return "" if w is None else "(" + ",".join(str(v) for v in w) + ")"


@main.command()
@click.argument("suite", required=False, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.option("--timing", is_flag=True, help="Record per-check runtimes (breaks byte-identical output).")
def verify(suite: str | None, fmt: str, timing: bool) -> None:
    """Run a verification suite (default: every squarefree ideal with m <= 3)."""
    if suite is None:
        config = default_suite()
    else:
        try:
            config = load_suite(suite)
        except (OSError, ValueError, KeyError) as exc:
            click.echo(f"error: cannot read suite {suite}: {exc}", err=True)
            sys.exit(2)
    config.timing = config.timing or timing
    log.info("running %d case(s)", len(config.cases))
    report = run_suite(config)
    if fmt == "json":
        click.echo(json.dumps(report.to_json(), indent=2))
    else:
        for c in report.checks:
            line = f"{c.verdict.value:<13} {c.name:<21} {c.subject}"
            if c.reason:
                line += f"  [{c.reason}]"
            click.echo(line)
        click.echo(report.summary_line())
    sys.exit(1 if report.failed else 0)


@main.command()
@click.argument("expression")
@click.option("--fourier", "apply_fourier", is_flag=True, help="Apply X_i -> d_i, d_i -> -X_i first.")
@click.option("--m", type=int, default=None)
def weyl(expression: str, apply_fourier: bool, m: int | None) -> None:
    """Print the normal form of a Weyl-algebra expression."""
    try:
        element = parse_weyl(expression, m)
    except (ParseError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint="EXPRESSION") from None
    if apply_fourier:
        element = fourier(element)
    click.echo(format_element(element))


if __name__ == "__main__":  # pragma: no cover
    main()
