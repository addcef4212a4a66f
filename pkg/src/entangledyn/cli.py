"""Command-line scenario runner.

``entangledyn run|sweep|poles <config> [--out PATH] [--plot-script] [--figure PNG] [--workers N]``

Exit codes: 0 success, 1 config parse error, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import (
    BranchCutError,
    DegenerateRootsError,
    NearResonanceError,
    OracleError,
    PoleSearchError,
    ValidationError,
)
from .scenario import (
    ConfigError,
    Scenario,
    evaluate_series,
    load_scenario,
    oracle_decay_check,
    pole_rows,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
NUMERICAL_ERRORS = (
    PoleSearchError,
    BranchCutError,
    DegenerateRootsError,
    NearResonanceError,
    OracleError,
    FloatingPointError,
    np.linalg.LinAlgError,
)


def format_float(x: float) -> str:
    """17 significant digits, positional for moderate magnitudes."""
    x = float(x)
    if x == 0.0:
        return "0.0000000000000000"
    if not np.isfinite(x):
        return repr(x)
    if 1e-5 <= abs(x) < 1e16:
        exponent = math.floor(math.log10(abs(x)))
        return f"{x:.{max(0, 16 - exponent)}f}"
    return f"{x:.16e}"


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    return format_float(value)


def write_csv(header: list[str], rows, stream) -> None:
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(_cell(v) for v in row) + "\n")


def resolve_workers(flag: int | None) -> int:
    """``--workers`` if given, else ``ENTANGLEDYN_WORKERS``, else 1."""
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("ENTANGLEDYN_WORKERS", "").strip()
        if not env:
            return 1
        try:
            n = int(env)
        except ValueError as exc:
            raise ValidationError(f"ENTANGLEDYN_WORKERS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ValidationError("worker count must be >= 1")
    return n


def _evaluate_point(args: tuple[Scenario, float | None]) -> np.ndarray:
    sc, value = args
    return evaluate_series(sc.with_value(value))


def series_table(sc: Scenario, workers: int = 1) -> tuple[list[str], list[list]]:
    """Header and rows for a run or sweep, ordered by ``t`` then sweep value."""
    t = sc.times
    header = ["t"] + list(sc.measures)
    if sc.sweep_parameter is None:
        data = evaluate_series(sc)
        return header, [[ti, *row] for ti, row in zip(t, data)]
    jobs = [(sc, v) for v in sc.sweep_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            blocks = list(pool.map(_evaluate_point, jobs))
    else:
        blocks = [_evaluate_point(j) for j in jobs]
    header.insert(1, "sweep_value")
    rows = []
    for i, ti in enumerate(t):
        for v, block in zip(sc.sweep_values, blocks):
            rows.append([ti, v, *block[i]])
    return header, rows


def gnuplot_script(csv_path: Path, header: list[str], sweeping: bool) -> str:
    """Gnuplot commands that draw every measure column against ``t``."""
    first = 3 if sweeping else 2
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{header[0]}'",
        "set terminal pngcairo size 900,600",
        f"set output '{csv_path.with_suffix('.png').name}'",
    ]
    if sweeping:
        lines.append(
            f"plot for [c={first}:{len(header)}] '{csv_path.name}' using 1:c:2 "
            "with points pointtype 7 pointsize 0.3 palette"
        )
    else:
        lines.append(f"plot for [c={first}:{len(header)}] '{csv_path.name}' using 1:c with lines")
    return "\n".join(lines) + "\n"


def _emit(header, rows, args, kind: str) -> None:
    buf = io.StringIO()
    write_csv(header, rows, buf)
    text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        if args.plot_script and kind == "series":
            out.with_suffix(".gp").write_text(
                gnuplot_script(out, header, "sweep_value" in header)
            )
    else:
        sys.stdout.write(text)
    if args.figure:
        from .plotting import render_poles, render_series

        if kind == "series":
            render_series(header, rows, args.figure)
        else:
            render_poles(header, rows, args.figure)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entangledyn",
        description="Atom-field entanglement dynamics from a vacuum field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "time series of the requested measures"),
        ("sweep", "time series over every value of the sweep block"),
        ("poles", "poles and residue weights of u(t)"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument(
            "--plot-script",
            action="store_true",
            help="also write a gnuplot command file next to the CSV (requires --out)",
        )
        p.add_argument("--figure", help="render a PNG with matplotlib")
        p.add_argument("--workers", type=int, default=None, help="sweep worker processes")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workers = resolve_workers(args.workers)
        if args.plot_script and not args.out:
            raise ValidationError("--plot-script needs --out to place the script next to the CSV")
        sc = load_scenario(args.config)
        if args.command == "sweep" and sc.sweep_parameter is None:
            raise ValidationError("sweep requires a sweep block in the scenario")
        if args.command == "poles":
            header, rows, notes = pole_rows(sc)
            for note in notes:
                print(f"note: {note}", file=sys.stderr)
            _emit(header, rows, args, "poles")
        else:
            if sc.model == "cavity-poles":
                raise ValidationError("cavity-poles scenarios are for the poles command")
            header, rows = series_table(sc, workers)
            _emit(header, rows, args, "series")
            if sc.model == "cavity-longtime" and sc.params["oracle"]:
                for value in sc.sweep_values or (None,):
                    rate, gamma = oracle_decay_check(sc.with_value(value))
                    print(
                        f"note: oracle decay rate {rate:.6g} vs pole gamma {gamma:.6g} "
                        f"(ratio {rate / gamma:.5f})",
                        file=sys.stderr,
                    )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
