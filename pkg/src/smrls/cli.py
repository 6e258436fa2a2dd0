"""Command line entry point: ``smrls run <config>`` and ``smrls compare <dir>...``."""
import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from smrls.config import ConfigError, parse_config
from smrls.pendulum import TrainerError, run_experiment

log = logging.getLogger("smrls")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

TIMESERIES_COLUMNS = ["t", "x1", "x2", "xbar1", "xbar2", "y", "yhat", "err"]


def _f(v):
    return format(float(v), ".17g")


def _write_csv(path, header, rows):
    # newline='' + explicit terminator keeps output byte-identical across platforms
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_run(rec, cfg, out_dir):
    """Persist a RunRecord and the resolved config into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = list(TIMESERIES_COLUMNS)
    if rec.partitions is not None:
        header.append("partition")
    err = rec.err
    rows = []
    for k in range(rec.times.shape[0]):
        row = [_f(rec.times[k]), _f(rec.states[k, 0]), _f(rec.states[k, 1]),
               _f(rec.norm_states[k, 0]), _f(rec.norm_states[k, 1]),
               _f(rec.y[k]), _f(rec.yhat[k]), _f(err[k])]
        if rec.partitions is not None:
            row.append(str(int(rec.partitions[k])))
        rows.append(row)
    _write_csv(out / "timeseries.csv", header, rows)

    n = rec.final_weights.shape[0]
    _write_csv(out / "weights.csv", ["t"] + [f"w{i + 1}" for i in range(n)],
               [[_f(t)] + [_f(v) for v in w] for t, w in sorted(rec.snapshots.items())])
    _write_csv(out / "summary.csv", ["metric", "value"],
               [[k, _f(v)] for k, v in rec.summary.items()])
    _write_csv(out / "config_resolved.csv", ["key", "value"], list(cfg.resolved_items()))
    if rec.control_points is not None:
        _write_csv(out / "control_points.csv", ["x1", "x2"],
                   [[_f(a), _f(b)] for a, b in rec.control_points])
    return out


def read_summary(run_dir):
    path = Path(run_dir) / "summary.csv"
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["metric", "value"]:
        raise ValueError(f"{path}: malformed header")
    out = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns")
        try:
            out[row[0]] = float(row[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric value {row[1]!r}") from None
    return out


def compare(run_dirs):
    """One row per run directory, one column per metric seen in any summary."""
    if not run_dirs:
        raise ValueError("compare needs at least one run directory")
    summaries = [(str(d), read_summary(d)) for d in run_dirs]
    metrics = []
    for _, s in summaries:
        metrics.extend(m for m in s if m not in metrics)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run"] + metrics)
    for name, s in summaries:
        w.writerow([name] + [_f(s[m]) if m in s else "" for m in metrics])
    return buf.getvalue()


def cmd_run(args):
    overrides = {}
    if args.out is not None:
        overrides["output"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("running %s with %s", cfg.experiment, cfg.trainer)
    try:
        rec = run_experiment(cfg)
    except TrainerError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        out = write_run(rec, cfg, cfg.output)
    except OSError as exc:
        print(f"i/o error writing {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    for k, v in rec.summary.items():
        log.info("%s = %.6g", k, v)
    print(out)
    return EXIT_OK


def cmd_compare(args):
    try:
        table = compare(args.run_dirs)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"malformed summary: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        try:
            Path(args.out).write_text(table)
        except OSError as exc:
            print(f"i/o error writing {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(table)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="smrls", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment from a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int, help="random seed (overrides the config)")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("compare", help="tabulate summary.csv files of several runs")
    c.add_argument("run_dirs", nargs="+")
    c.add_argument("--out", help="write the table here instead of stdout")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
