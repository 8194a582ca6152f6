"""Command-line interface: ``discop classify | decompose | apply | oracle | generate``.

Exit codes depend only on the outcome category:
0 success, 2 unreadable or invalid input, 3 internal consistency violation,
4 decomposition requested for a non-normal instance, 5 map not bijective on
the support.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from . import serialize as ser
from .classify import VERDICT_FIELDS, full_report
from .core import Instance, as_rat
from .decompose import orbits, shift_decomposition
from .errors import (
    BadParameters,
    InfiniteFiber,
    MissingWindow,
    NotBijectiveOnSupport,
    NotDenselyDefined,
    NotInDomain,
    NotInSupport,
    NotNonsingular,
    NotNormal,
    ParseError,
    ValidationError,
)
from .operator import (
    FinSuppFn,
    apply_c,
    apply_c_cstar_basis,
    apply_c_cstar_c_basis,
    apply_c_star,
    apply_cstar_c_basis,
    apply_cstar_c_c_basis,
)
from .oracle import exhaustive_crosscheck

EXIT_OK, EXIT_INPUT, EXIT_INCONSISTENT, EXIT_NOT_NORMAL, EXIT_NOT_BIJECTIVE = 0, 2, 3, 4, 5

_INPUT_ERRORS = (
    ParseError,
    ValidationError,
    NotNonsingular,
    BadParameters,
    MissingWindow,
    NotInSupport,
    InfiniteFiber,
    NotInDomain,
    NotDenselyDefined,
)

window_option = click.option(
    "--window",
    type=click.IntRange(min=1),
    envvar="DISCOP_DEFAULT_WINDOW",
    default=None,
    help="Points per orbit probed on infinite instances (env DISCOP_DEFAULT_WINDOW).",
)
format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "machine"]), default="text", show_default=True
)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> Instance:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_INPUT, f"cannot read {path}: {exc.strerror}")
    return ser.parse_instance(ser.loads(text))


def _emit(doc, fmt: str, text: str) -> None:
    click.echo(ser.dumps(doc) if fmt == "machine" else text, nl=fmt != "machine")


def _run(body):
    """Run a command body, mapping library errors onto exit codes."""
    try:
        return body()
    except NotNormal as exc:
        _fail(EXIT_NOT_NORMAL, f"not normal: {ser.describe(exc.verdict)}")
    except NotBijectiveOnSupport as exc:
        _fail(EXIT_NOT_BIJECTIVE, f"not bijective on the support: {exc.witness!r}")
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))


@click.group()
@click.version_option(package_name="discop")
def main() -> None:
    """Composition operators on discrete measure spaces."""


@main.command()
@click.argument("path")
@window_option
@click.option("--nmax", type=click.IntRange(min=1), default=4, show_default=True)
@format_option
def classify(path: str, window: Optional[int], nmax: int, fmt: str) -> None:
    """Classify the operator of an instance file."""

    def body():
        report = full_report(_load(path), window, nmax)
        lines = [f"{name}: {ser.describe(getattr(report, name))}" for name in VERDICT_FIELDS]
        sup = report.sup_h
        lines.append(f"sup_h: {sup}")
        if report.infinite_orbit_witnesses:
            anchors = ", ".join(ser.label_key(a) for a in report.infinite_orbit_witnesses)
            lines.append(f"unbounded orbit anchors: {anchors}")
        if report.windowed:
            lines.append(f"window: {report.window}")
        for name, ok in report.consistency:
            if not ok:
                lines.append(f"CONSISTENCY VIOLATION: {name}")
        _emit(ser.render_report(report), fmt, "\n".join(lines))
        if report.violations:
            sys.exit(EXIT_INCONSISTENT)

    _run(body)


@main.command()
@click.argument("path")
@window_option
@click.option("--orbits-only", is_flag=True, help="List orbits without requiring normality.")
@format_option
def decompose(path: str, window: Optional[int], orbits_only: bool, fmt: str) -> None:
    """Split a normal instance into weighted backward shifts."""

    def body():
        inst = _load(path)
        if orbits_only:
            recs = orbits(inst, window)
            doc = {
                "schema_version": ser.SCHEMA_VERSION,
                "type": "orbits",
                "orbits": [
                    {
                        "anchor": ser.render_label(r.anchor),
                        "kind": r.kind,
                        "members": [ser.render_label(m) for m in r.members],
                    }
                    for r in recs
                ],
            }
            text = "\n".join(
                f"{r.kind} at {ser.label_key(r.anchor)}: {len(r.members)} members listed" for r in recs
            )
            _emit(doc, fmt, text)
            return
        dec = shift_decomposition(inst, window)
        lines = []
        for b in dec.blocks:
            if b.finite:
                gamma = ", ".join(str(w) for w in b.weights)
                lines.append(f"{b.kind} at {ser.label_key(b.anchor)}: length {len(b.weights)}, weights ({gamma})")
            else:
                lines.append(f"{b.kind} at {ser.label_key(b.anchor)}: geometric ({b.base}, {b.ratio})")
        if dec.tail is not None:
            lines.append(f"plus infinitely many lines from orbit {dec.tail_offset} on, schedule {dec.tail.schedule.kind}")
        _emit(ser.render_decomposition(dec), fmt, "\n".join(lines))

    _run(body)


_OPS = {
    "c": apply_c,
    "c_star": apply_c_star,
}
_BASIS_OPS = {
    "cstar_c": apply_cstar_c_basis,
    "c_cstar": apply_c_cstar_basis,
    "cstar_c_c": apply_cstar_c_c_basis,
    "c_cstar_c": apply_c_cstar_c_basis,
}


@main.command()
@click.argument("path")
@click.option("--op", type=click.Choice(sorted(_OPS) + sorted(_BASIS_OPS)), required=True)
@click.option("--vector", help='JSON object {label: "re,im"}; pair labels are written "id:k".')
@click.option("--point", help="Basis point chi_x to act on.")
@format_option
def apply(path: str, op: str, vector: Optional[str], point: Optional[str], fmt: str) -> None:
    """Apply C, C* or a product of them to a vector."""

    def body():
        inst = _load(path)
        if (vector is None) == (point is None):
            raise ValidationError("vector", "give exactly one of --vector and --point")
        if op in _BASIS_OPS:
            if point is None:
                raise ValidationError("point", f"--op {op} acts on a basis vector; use --point")
            result = _BASIS_OPS[op](inst, ser.parse_label_key(inst, point))
        else:
            f = FinSuppFn.basis(ser.parse_label_key(inst, point)) if point else ser.parse_vector(inst, ser.loads(vector))
            result = _OPS[op](inst, f)
        values = ser.render_fn(result)
        doc = {"schema_version": ser.SCHEMA_VERSION, "type": "vector", "op": op, "values": values}
        text = "\n".join(f"{k}: {v}" for k, v in values.items()) or "0"
        _emit(doc, fmt, text)

    _run(body)


@main.command()
@click.option("--max-points", type=click.IntRange(1, 5), default=3, show_default=True)
@click.option("--weight-grid", default="0,1,2", show_default=True, help="Comma-separated rationals.")
@click.option("--nmax", type=click.IntRange(min=1), default=4, show_default=True)
@format_option
def oracle(max_points: int, weight_grid: str, nmax: int, fmt: str) -> None:
    """Cross-check every classifier against exact matrices on all small instances."""

    def body():
        grid = [as_rat(w, field_name="weight_grid") for w in weight_grid.split(",")]
        if not any(w > 0 for w in grid) or any(w < 0 for w in grid):
            raise ValidationError("weight_grid", "weights must be nonnegative with at least one positive")
        report = exhaustive_crosscheck(max_points, grid, nmax)
        lines = [
            f"instances: {report.instances_enumerated} (skipped singular: {report.skipped_singular})",
            f"disagreements: {len(report.disagreements)}",
        ]
        lines += [f"  #{d.index} {d.property}: classifier {d.classifier}, oracle {d.oracle}" for d in report.disagreements]
        _emit(ser.render_crosscheck(report), fmt, "\n".join(lines))
        if report.disagreements:
            sys.exit(EXIT_INCONSISTENT)

    _run(body)


@main.command()
@click.option("--family", required=True, help="identity:n, cycle:w1,..., line:c,q, ray_loop:c, unbounded_normal:k, collapse:n")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def generate(family: str, out: Optional[str]) -> None:
    """Write the instance document of a named family."""

    def body():
        text = ser.dumps(ser.generate(family))
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)

    _run(body)


if __name__ == "__main__":
    main()
