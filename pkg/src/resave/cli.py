"""Command-line front end.

Subcommands:

    simulate   replicate a benchmark-model fit, report direction accuracy
    bench      wall-clock comparison: streaming updates vs batch refits
    fit        fit once on a CSV file, print/write the directions
    stream     absorb CSV rows one at a time, emitting the running direction
    eval-real  train/holdout split on a CSV file, per-observation accuracy
    selfcheck  internal consistency checks of the installed package

All report files are CSV: UTF-8, newline-terminated lines, one header
line, floats written with 17 significant digits so reruns are
byte-identical (bench timings excepted).  A ``--config`` file holds
``key=value`` lines with the same names as the long options; explicit
options win over the file.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import EstimationError, SchemaError
from .experiments import (
    canonical_estimator,
    model_by_name,
    run_replications,
    run_timing,
)
from .ingestion import _resolve_column, holdout_eval, load_csv
from .kernels import kernel_by_name
from .recursive import Observation
from .save import fit_batch, fit_recursive, update_fit
from .selfcheck import run_selfcheck
from .sequences import SequencePlan


def _fmt(v):
    return format(float(v), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _check_writable(path):
    if path is None:
        return
    with open(path, "a", encoding="utf-8"):
        pass


def _plan_from(args):
    return SequencePlan(
        gamma_scale=args.gamma_scale, c1=args.c1, c2=args.c2,
        epsilon_trunc=args.eps_trunc, strict=args.strict,
    )


def _add_plan_options(p):
    g = p.add_argument_group("schedule constants")
    g.add_argument("--gamma-scale", type=float, default=1.0,
                   help="step size is gamma-scale / n")
    g.add_argument("--c1", type=float, default=0.2,
                   help="bandwidth exponent: h_n = n^-c1")
    g.add_argument("--c2", type=float, default=0.03,
                   help="truncation exponent: floor_n = min(eps, n^-c2)")
    g.add_argument("--eps-trunc", type=float, default=0.05,
                   help="truncation floor cap")
    g.add_argument("--strict", action="store_true",
                   help="enforce the open-interval rate conditions on c1, c2")
    p.add_argument("--kernel", choices=["epanechnikov", "quartic4"],
                   default="epanechnikov", help="smoothing kernel")
    p.add_argument("--num-directions", type=int, default=1,
                   help="how many leading directions to keep")


def _add_data_options(p):
    p.add_argument("--data", default=None, help="CSV file (.gz accepted)")
    p.add_argument("--response", default=None,
                   help="response column (name or 0-based index)")
    p.add_argument("--predictors", default=None,
                   help="comma-separated predictor columns; default: all others")


def _parse_columns(args):
    response = _column_key(args.response)
    predictors = None
    if args.predictors:
        predictors = [_column_key(tok) for tok in args.predictors.split(",")]
    return response, predictors


def _column_key(tok):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return tok


def build_parser():
    parser = argparse.ArgumentParser(
        prog="resave",
        description="Streaming sliced average variance estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def add(name, **kw):
        p = sub.add_parser(
            name, formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kw
        )
        p.add_argument("--config", default=None,
                       help="key=value file of option defaults")
        subparsers[name] = p
        return p

    p = add("simulate", help="replicated benchmark-model accuracy run")
    p.add_argument("--model", default=None, help="benchmark model: 1 or 2")
    p.add_argument("--n0", type=int, default=100, help="initial fit size")
    p.add_argument("--p", type=int, default=400, help="streamed observations")
    p.add_argument("--reps", type=int, default=200, help="independent replicates")
    p.add_argument("--estimator", default="save-r",
                   choices=["save-r", "save-nr"], help="estimator variant")
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: RESAVE_THREADS or all cores)")
    p.add_argument("--out", default=None, help="summary CSV path")
    p.add_argument("--per-rep-out", default=None, help="per-replicate CSV path")
    _add_plan_options(p)

    p = add("bench", help="streaming vs batch wall-clock comparison")
    p.add_argument("--model", default="1", help="benchmark model: 1 or 2")
    p.add_argument("--n0", type=int, default=100, help="initial fit size")
    p.add_argument("--p-list", default="100,400",
                   help="comma-separated stream lengths")
    p.add_argument("--reps", type=int, default=3, help="timed iterations per p")
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--out", default=None, help="timing CSV path")
    _add_plan_options(p)

    p = add("fit", help="one-shot fit on a CSV file")
    _add_data_options(p)
    p.add_argument("--estimator", default="save-nr",
                   choices=["save-r", "save-nr"], help="estimator variant")
    p.add_argument("--out", default=None, help="directions CSV path")
    p.add_argument("--checkpoint-out", default=None,
                   help="save the fitted state (save-r only)")
    _add_plan_options(p)

    p = add("stream", help="absorb rows one at a time, emit running direction")
    p.add_argument("--input", default="-", help="CSV file, or - for stdin")
    p.add_argument("--response", default=None,
                   help="response column (name or 0-based index)")
    p.add_argument("--predictors", default=None,
                   help="comma-separated predictor columns; default: all others")
    p.add_argument("--n0", type=int, default=25,
                   help="rows buffered for the initial fit (fresh start only)")
    p.add_argument("--emit-every", type=int, default=1,
                   help="emit after every k-th absorbed row (0: only at end)")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.add_argument("--checkpoint-out", default=None,
                   help="write a checkpoint when the stream ends")
    _add_plan_options(p)

    p = add("eval-real", help="train/holdout evaluation on a CSV file")
    _add_data_options(p)
    p.add_argument("--n0", type=int, default=100, help="initial fit size")
    p.add_argument("--p", type=int, default=400, help="streamed observations")
    p.add_argument("--estimator", default="save-r",
                   choices=["save-r", "save-nr"], help="estimator variant")
    p.add_argument("--shuffle-seed", type=int, default=None,
                   help="shuffle rows with this seed (default: file order)")
    p.add_argument("--reference", default=None,
                   help="comma-separated reference direction (default: batch fit "
                        "on the full table)")
    p.add_argument("--out", default=None, help="report CSV path")
    _add_plan_options(p)

    p = add("selfcheck", help="internal consistency checks")

    return parser, subparsers


# options that must end up set, whether from a flag or a config file
_REQUIRED = {
    "simulate": ("model",),
    "fit": ("data", "response"),
    "stream": ("response",),
    "eval-real": ("data", "response"),
}


def _require(sub, command, args):
    for dest in _REQUIRED.get(command, ()):
        if getattr(args, dest) is None:
            sub.error(f"the following arguments are required: --{dest}")
    return args


def _apply_config(parser, subparsers, argv):
    """Fold --config file values in as subcommand defaults, then re-parse."""
    args = parser.parse_args(argv)
    sub = subparsers[args.command]
    config_path = getattr(args, "config", None)
    if not config_path:
        return _require(sub, args.command, args)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    with open(config_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                sub.error(f"{config_path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            dest = key.strip().replace("-", "_")
            value = value.strip()
            if dest not in actions or dest in ("help", "config"):
                sub.error(f"{config_path}:{lineno}: unknown option {key.strip()!r}")
            action = actions[dest]
            if isinstance(action, argparse._StoreTrueAction):
                low = value.lower()
                if low in ("1", "true", "yes", "on"):
                    defaults[dest] = True
                elif low in ("0", "false", "no", "off"):
                    defaults[dest] = False
                else:
                    sub.error(f"{config_path}:{lineno}: bad boolean {value!r}")
            else:
                try:
                    defaults[dest] = (action.type or str)(value)
                except ValueError:
                    sub.error(f"{config_path}:{lineno}: bad value {value!r} for {key!r}")
            if action.choices and defaults[dest] not in action.choices:
                sub.error(
                    f"{config_path}:{lineno}: {value!r} not one of {list(action.choices)}"
                )
    sub.set_defaults(**defaults)
    return _require(sub, args.command, parser.parse_args(argv))


def cmd_simulate(args):
    model = model_by_name(args.model)
    plan = _plan_from(args)
    kernel = kernel_by_name(args.kernel)
    _check_writable(args.out)
    _check_writable(args.per_rep_out)
    report = run_replications(
        model, args.n0, args.p, args.reps, args.estimator, args.seed,
        plan=plan, kernel=kernel, num_directions=args.num_directions,
        n_jobs=args.jobs,
    )
    print(
        f"model={report.model} estimator={report.estimator} n0={report.n0} "
        f"p={report.p} reps={report.reps} failures={report.failures} "
        f"r2_mean={report.r2_mean:.5f} r2_std={report.r2_std:.5f}"
    )
    if args.out:
        _write_csv(
            args.out,
            ["model", "estimator", "n0", "p", "reps", "seed", "failures",
             "r2_mean", "r2_std"],
            [[report.model, report.estimator, report.n0, report.p, report.reps,
              report.seed, report.failures, _fmt(report.r2_mean),
              _fmt(report.r2_std)]],
        )
    if args.per_rep_out:
        _write_csv(
            args.per_rep_out,
            ["model", "estimator", "n0", "p", "seed", "rep", "r2"],
            [
                [report.model, report.estimator, report.n0, report.p, report.seed,
                 i, _fmt(r2)]
                for i, r2 in enumerate(report.r2_values)
            ],
        )
    return report


def cmd_bench(args):
    model = model_by_name(args.model)
    plan = _plan_from(args)
    kernel = kernel_by_name(args.kernel)
    _check_writable(args.out)
    try:
        p_values = [int(tok) for tok in args.p_list.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"bad --p-list {args.p_list!r}") from None
    results = run_timing(
        model, args.n0, p_values, reps=args.reps, seed=args.seed,
        plan=plan, kernel=kernel, num_directions=args.num_directions,
    )
    rows = []
    for r in results:
        print(
            f"p={r.p}: streaming {r.recursive_mean_s:.4f}s, "
            f"batch {r.batch_mean_s:.4f}s, ratio {r.ratio:.3f}"
        )
        rows.append(["save_r", r.p, _fmt(r.recursive_mean_s),
                     _fmt(r.recursive_std_s), _fmt(r.ratio)])
        rows.append(["save_nr", r.p, _fmt(r.batch_mean_s),
                     _fmt(r.batch_std_s), _fmt(r.ratio)])
    if args.out:
        _write_csv(args.out, ["estimator", "p", "mean_s", "std_s", "ratio"], rows)
    return results


def _print_directions(dataset, edr):
    names = [dataset.column_names[i] for i in dataset.predictor_indices]
    print("eigenvalues:", " ".join(f"{v:.6g}" for v in edr.eigenvalues))
    for j in range(edr.num_directions):
        comps = ", ".join(
            f"{name}={edr.directions[i, j]:+.4f}" for i, name in enumerate(names)
        )
        print(f"direction {j + 1}: {comps}")


def _directions_rows(dataset, edr):
    names = [dataset.column_names[i] for i in dataset.predictor_indices]
    rows = []
    for j in range(edr.num_directions):
        for i, name in enumerate(names):
            rows.append(
                [j + 1, name, _fmt(edr.directions[i, j]),
                 _fmt(edr.eigenvalues[j])]
            )
    return rows


def cmd_fit(args):
    response, predictors = _parse_columns(args)
    dataset = load_csv(args.data, response, predictors)
    if dataset.skipped_lines:
        print(
            f"skipped {len(dataset.skipped_lines)} malformed line(s): "
            f"{list(dataset.skipped_lines)}",
            file=sys.stderr,
        )
    plan = _plan_from(args)
    kernel = kernel_by_name(args.kernel)
    _check_writable(args.out)
    estimator = canonical_estimator(args.estimator)
    obs = dataset.observations()
    if estimator == "save_r":
        fit = fit_recursive(obs, plan, kernel, args.num_directions)
        if args.checkpoint_out:
            save_checkpoint(fit, args.checkpoint_out)
    else:
        if args.checkpoint_out:
            raise ValueError("--checkpoint-out requires --estimator save-r")
        fit = fit_batch(obs, kernel=kernel, num_directions=args.num_directions,
                        plan=plan)
    _print_directions(dataset, fit.directions)
    if args.out:
        _write_csv(
            args.out,
            ["direction", "predictor", "coefficient", "eigenvalue"],
            _directions_rows(dataset, fit.directions),
        )
    return fit


def _stream_rows(fh, response, predictors):
    """Yield (line_number, y, x) from a CSV stream; malformed rows -> None."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        return  # zero-byte stream: nothing to absorb
    header = tuple(name.strip() for name in header)
    ri = _resolve_column(header, response)
    if predictors is None:
        pi = [i for i in range(len(header)) if i != ri]
    else:
        pi = [_resolve_column(header, k) for k in predictors]
    if ri in pi:
        raise SchemaError(f"response column {header[ri]!r} also listed as predictor")
    width = len(header)
    for lineno, record in enumerate(reader, start=2):
        if len(record) != width:
            yield lineno, None, None
            continue
        try:
            vals = [float(c) for c in record]
        except ValueError:
            yield lineno, None, None
            continue
        if not all(np.isfinite(v) for v in vals):
            yield lineno, None, None
            continue
        yield lineno, vals[ri], np.array([vals[i] for i in pi])


def cmd_stream(args):
    response, predictors = _parse_columns(args)
    plan = _plan_from(args)
    kernel = kernel_by_name(args.kernel)
    if args.emit_every < 0:
        raise ValueError(f"--emit-every must be >= 0, got {args.emit_every}")
    _check_writable(args.checkpoint_out)

    fit = load_checkpoint(args.resume) if args.resume else None
    buffered = []
    skipped = []
    header_printed = False

    def emit(fit):
        nonlocal header_printed
        edr = fit.directions
        d = fit.state.d
        if not header_printed:
            cols = ["n"]
            cols += [f"eigenvalue_{j + 1}" for j in range(edr.num_directions)]
            cols += [
                f"dir{j + 1}_{i + 1}"
                for j in range(edr.num_directions)
                for i in range(d)
            ]
            print(",".join(cols))
            header_printed = True
        vals = [str(fit.state.n)]
        vals += [_fmt(v) for v in edr.eigenvalues[: edr.num_directions]]
        vals += [
            _fmt(edr.directions[i, j])
            for j in range(edr.num_directions)
            for i in range(d)
        ]
        print(",".join(vals))

    def absorb(fit, y, x):
        update_fit(fit, Observation(y, x))
        if args.emit_every and fit.state.n % args.emit_every == 0:
            emit(fit)

    if args.input == "-":
        fh = sys.stdin
        close = False
    else:
        fh = open(args.input, "rt", encoding="utf-8", newline="")
        close = True
    try:
        for lineno, y, x in _stream_rows(fh, response, predictors):
            if y is None:
                skipped.append(lineno)
                continue
            if fit is None:
                buffered.append(Observation(y, x))
                if len(buffered) == args.n0:
                    fit = fit_recursive(buffered, plan, kernel, args.num_directions)
                    buffered = []
                    if args.emit_every:
                        emit(fit)
                continue
            absorb(fit, y, x)
    finally:
        if close:
            fh.close()
    if fit is None:
        if buffered:
            raise EstimationError(
                f"stream ended with {len(buffered)} rows, fewer than n0={args.n0}"
            )
        # resumed-or-nothing: an empty stream after a resume is fine
        if not args.resume:
            raise EstimationError("stream contained no usable rows")
    else:
        if args.emit_every == 0 or (
            args.emit_every and fit.state.n % args.emit_every != 0
        ):
            emit(fit)
        if args.checkpoint_out:
            save_checkpoint(fit, args.checkpoint_out)
    if skipped:
        print(f"skipped {len(skipped)} malformed line(s): {skipped}", file=sys.stderr)
    return fit


def cmd_eval_real(args):
    response, predictors = _parse_columns(args)
    dataset = load_csv(args.data, response, predictors)
    plan = _plan_from(args)
    kernel = kernel_by_name(args.kernel)
    _check_writable(args.out)
    reference = None
    if args.reference:
        reference = np.array([float(t) for t in args.reference.split(",")])
    report = holdout_eval(
        dataset, args.n0, args.p, args.estimator, seed=args.shuffle_seed,
        plan=plan, kernel=kernel, reference=reference,
    )
    names = [dataset.column_names[i] for i in dataset.predictor_indices]
    beta = ", ".join(f"{n}={b:+.4f}" for n, b in zip(names, report.beta_hat))
    print(
        f"estimator={report.estimator} n0={report.n0} p={report.p} "
        f"holdout={report.n_eval} undefined={report.n_undefined} "
        f"r2i_mean={report.r2i_mean:.5f} r2i_std={report.r2i_std:.5f}"
    )
    print(f"direction: {beta}")
    if args.out:
        header = ["estimator", "n0", "p", "n_eval", "n_undefined",
                  "r2i_mean", "r2i_std"] + [f"beta_{n}" for n in names]
        row = [report.estimator, report.n0, report.p, report.n_eval,
               report.n_undefined, _fmt(report.r2i_mean), _fmt(report.r2i_std)]
        row += [_fmt(b) for b in report.beta_hat]
        _write_csv(args.out, header, [row])
    return report


def cmd_selfcheck(args):
    results = run_selfcheck()
    ok = True
    for r in results:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'} ({r.detail})")
        ok = ok and r.passed
    return 0 if ok else 1


_COMMANDS = {
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "fit": cmd_fit,
    "stream": cmd_stream,
    "eval-real": cmd_eval_real,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None):
    parser, subparsers = build_parser()
    args = _apply_config(parser, subparsers, argv)
    try:
        result = _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EstimationError, SchemaError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
