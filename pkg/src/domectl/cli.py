"""Command-line entry point.

Results go to stdout as ``key=value`` records; diagnostics go to stderr.
Exit codes: 0 ok, 1 usage, 2 data fault, 3 config fault.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import os
import sys
from typing import Optional, Sequence

from .config import Config, load_config_file
from .density import count_from_map, evaluate_counts, export_text_grid, render_density_map, write_density_map
from .dome import CrowdEstimate, WeatherReading, decide
from .errors import ConfigError, DataError
from .ingest import parse_annotations, parse_crowd_profile, parse_weather_csv
from .simulate import format_fired, run_replay, write_log

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONFIG = 0, 1, 2, 3
CONFIG_ENV = "DOMECTL_CONFIG"

log = logging.getLogger("domectl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "y"):
        return True
    if t in ("false", "0", "no", "n"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _config(args) -> Config:
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return Config()
    try:
        return load_config_file(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _crowd(args, config: Config) -> CrowdEstimate:
    if (args.crowd is None) == (args.count is None):
        raise UsageError("give exactly one of --crowd or --count")
    if args.capacity is not None and args.count is None:
        raise UsageError("--capacity only applies with --count")
    capacity = args.capacity if args.capacity is not None else config.controller.capacity
    if args.count is not None:
        return CrowdEstimate(args.count, capacity)
    return CrowdEstimate.from_ratio(args.crowd, capacity)


def _decision(args):
    config = _config(args)
    crowd = _crowd(args, config)
    reading = WeatherReading(args.temp, args.humidity, args.rain, dt.datetime.now().replace(microsecond=0))
    return config, crowd, decide(reading, crowd, config.engine)


def cmd_decide(args) -> int:
    _, crowd, d = _decision(args)
    fired = format_fired(d.trace.fired) if d.trace is not None else "-"
    print(f"open_seconds={d.open_seconds:.2f} minutes={d.minutes:.2f} label={d.label} "
          f"ratio={crowd.ratio:.4f} rain={'true' if d.rain else 'false'} fired={fired}")
    return EXIT_OK


def cmd_explain(args) -> int:
    config, crowd, d = _decision(args)
    engine = config.engine
    print(f"input crowd={crowd.ratio:.4f} weather={args.temp:.2f} rain={'true' if args.rain else 'false'}")
    if d.trace is None:
        print("override=rain engine=skipped")
    else:
        for var, degrees in d.trace.memberships.items():
            terms = " ".join(f"{lbl}={mu:.4f}" for lbl, mu in degrees.items())
            print(f"fuzzify variable={var} {terms}")
        for (i, strength), rule in zip(d.trace.fired, engine.rules):
            print(f"rule={i} strength={strength:.4f} text=\"{rule}\"")
        print(f"centroid={d.trace.crisp:.2f} flag={d.trace.flag.value}")
    print(f"open_seconds={d.open_seconds:.2f} minutes={d.minutes:.2f} label={d.label}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _config(args)
    try:
        with open(args.weather, encoding="utf-8", newline="") as fh:
            weather, wfaults = parse_weather_csv(fh)
        if args.crowd_profile:
            with open(args.crowd_profile, encoding="utf-8", newline="") as fh:
                crowd, cfaults = parse_crowd_profile(fh, config.controller.capacity)
        else:
            crowd, cfaults = [], []
    except OSError as exc:
        raise DataError(str(exc)) from None
    for f in wfaults:
        log.warning("weather %s", f)
    for f in cfaults:
        log.warning("crowd profile %s", f)
    entries = run_replay(weather, crowd, config)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            summary = write_log(fh, entries)
        print(f"kind=summary hours={summary.hours} open_seconds_total={summary.open_seconds_total:.2f} "
              f"rain_closures={summary.rain_closures} no_rule={summary.no_rule}")
    else:
        write_log(sys.stdout, entries)
    return EXIT_OK


def cmd_densitymap(args) -> int:
    config = _config(args)
    try:
        with open(args.annotations, encoding="utf-8") as fh:
            ann = parse_annotations(fh)
    except OSError as exc:
        raise DataError(str(exc)) from None
    dmap = render_density_map(ann, config.kernel)
    with open(args.out, "wb") as fh:
        write_density_map(fh, dmap)
    if args.text:
        with open(args.text, "w", encoding="utf-8") as fh:
            export_text_grid(fh, dmap)
    print(f"heads={len(ann)} count={count_from_map(dmap):.6f} width={dmap.width} height={dmap.height}")
    return EXIT_OK


def _read_pairs(path: str) -> tuple[list[float], list[float]]:
    predicted, truth = [], []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or not {"predicted", "truth"} <= set(reader.fieldnames):
                raise DataError(f"{path}: need 'predicted' and 'truth' columns")
            for row in reader:
                try:
                    predicted.append(float(row["predicted"]))
                    truth.append(float(row["truth"]))
                except (TypeError, ValueError):
                    raise DataError(f"{path}: line {reader.line_num}: bad number") from None
    except OSError as exc:
        raise DataError(str(exc)) from None
    return predicted, truth


def cmd_eval(args) -> int:
    if args.file:
        if args.predicted is not None or args.truth is not None:
            raise UsageError("use either --file or --predicted/--truth")
        predicted, truth = _read_pairs(args.file)
    else:
        if args.predicted is None or args.truth is None:
            raise UsageError("need --predicted and --truth (or --file)")
        predicted, truth = args.predicted, args.truth
    mae, rmse = evaluate_counts(predicted, truth)
    print(f"n={len(predicted)} mae={mae:.2f} rmse={rmse:.2f}")
    return EXIT_OK


def _decision_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--crowd", type=float, help="crowd ratio in percent")
    p.add_argument("--count", type=float, help="estimated number of people")
    p.add_argument("--capacity", type=int, help="venue capacity (with --count)")
    p.add_argument("--temp", type=float, required=True, help="temperature in degrees C")
    p.add_argument("--rain", type=_bool, default=False, help="rain sensor flag (true/false)")
    p.add_argument("--humidity", type=float, default=50.0, help="relative humidity, logged only")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="domectl", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help=f"config file (overrides ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decide", help="one dome decision")
    _decision_flags(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("explain", help="fuzzy rule trace for one decision")
    _decision_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("simulate", help="hourly replay of a weather file")
    p.add_argument("--weather", required=True)
    p.add_argument("--crowd-profile")
    p.add_argument("--out", help="log file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("densitymap", help="render a density map from head annotations")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True, help="binary DMAP output")
    p.add_argument("--text", help="optional plain-text grid export")
    p.set_defaults(func=cmd_densitymap)

    p = sub.add_parser("eval", help="MAE/RMSE of predicted counts")
    p.add_argument("--predicted", type=_floats)
    p.add_argument("--truth", type=_floats)
    p.add_argument("--file", help="CSV with 'predicted' and 'truth' columns")
    p.set_defaults(func=cmd_eval)

    for action in sub.choices.values():
        action.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"domectl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"domectl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"domectl: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
