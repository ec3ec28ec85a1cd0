"""Command-line interface: ``ldp-twosample {privatize,test,simulate,sweep}``.

Exit status is 0 on success, 2 on usage or validation errors and 1 on runtime
errors. CSV outputs start with a ``#`` line holding the effective
configuration as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .adaptive import adaptive_density_test
from .density import DEFAULT_KAPPA, BinningSpec, Transform, bin_dataset
from .exceptions import ConfigurationError, ParameterError, UnsupportedMechanismError
from .mechanisms import Mechanism, PrivacyConfig, privatize
from .procedures import Calibration, density_test, multinomial_test
from .sampling import StreamKey, derive_stream
from .simulation import (DESK_B, DESK_REPS, Mode, ResultWriter, ScenarioKind, ScenarioSpec,
                         SweepConfig, TestConfig, estimate_power, run_sweep)
from .statistics import StatisticKind

USAGE_ERRORS = (ParameterError, ConfigurationError, UnsupportedMechanismError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_common(p, *, alpha_required: bool):
    p.add_argument("--mechanism", required=True, choices=[m.value for m in Mechanism])
    p.add_argument("--alpha", type=float, required=alpha_required, default=None if alpha_required else 1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def _add_test_flags(p):
    p.add_argument("--stat", default="l2", choices=[s.value for s in StatisticKind])
    p.add_argument("--calibration", default="perm", choices=[c.value for c in Calibration])
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--B", type=int, default=DESK_B)
    p.add_argument("--mode", default="multinomial", choices=[m.value for m in Mode])
    p.add_argument("--kappa", type=int, default=DEFAULT_KAPPA)
    p.add_argument("--transform", default=Transform.GAUSS_CDF.value, choices=[t.value for t in Transform])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldp-twosample", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("privatize", help="privatize a CSV of categories or points")
    _add_common(p, alpha_required=True)
    p.add_argument("--mode", default="multinomial", choices=["multinomial", "density"])
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--kappa", type=int, default=DEFAULT_KAPPA)
    p.add_argument("--transform", default=Transform.GAUSS_CDF.value, choices=[t.value for t in Transform])
    p.add_argument("--y", required=True, help="input CSV, no header")
    p.add_argument("--out", default="-")

    p = sub.add_parser("test", help="run one private two-sample test")
    _add_common(p, alpha_required=True)
    _add_test_flags(p)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--y", required=True)
    p.add_argument("--z", required=True)

    p = sub.add_parser("simulate", help="estimate size or power for one scenario")
    _add_common(p, alpha_required=True)
    _add_test_flags(p)
    p.add_argument("--scenario", required=True, choices=[s.value for s in ScenarioKind])
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--n", type=int, default=200, help="group size (n1 = n2)")
    p.add_argument("--n2", type=int, help="second group size if different")
    p.add_argument("--reps", type=int, default=DESK_REPS)
    p.add_argument("--out", default="-")

    p = sub.add_parser("sweep", help="run a JSON-configured simulation sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--reps", type=int, help="override the config's replication count")
    p.add_argument("--out", default="-")
    return parser


def _read_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, comments="#", dtype=np.float64)


def _read_categories(path: str) -> np.ndarray:
    data = _read_csv(path)
    if data.shape[1] != 1 or np.any(data != np.floor(data)):
        raise ParameterError(f"{path}: expected one integer column of categories")
    return data[:, 0].astype(np.int64)


class _Output:
    def __init__(self, target: str):
        self.target = target

    def __enter__(self):
        if self.target == "-":
            return sys.stdout
        self._fh = open(self.target, "w", encoding="utf-8", newline="")
        return self._fh

    def __exit__(self, *exc):
        if self.target != "-":
            self._fh.close()


def _effective(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())}


def _cmd_privatize(args) -> int:
    if args.mode == "density":
        if args.d is None:
            raise ParameterError("density mode needs --d")
        spec = BinningSpec(args.d, args.kappa, args.transform)
        cats = bin_dataset(_read_csv(args.y), spec)
        k = spec.k
    else:
        if args.k is None:
            raise ParameterError("multinomial mode needs --k")
        cats, k = _read_categories(args.y), args.k
    cfg = PrivacyConfig(args.mechanism, args.alpha, k)
    views = privatize(cats, cfg, derive_stream(StreamKey(args.seed)))
    fmt = "%d" if cfg.mechanism in (Mechanism.RAPPOR, Mechanism.GENRR) else "%.17g"
    with _Output(args.out) as fh:
        fh.write("# " + json.dumps({"command": "privatize", **_effective(args), "k": k}) + "\n")
        np.savetxt(fh, views, delimiter=",", fmt=fmt)
    return 0


def _cmd_test(args) -> int:
    key = StreamKey(args.seed)
    if args.mode == "multinomial":
        if args.k is None:
            raise ParameterError("multinomial mode needs --k")
        cfg = PrivacyConfig(args.mechanism, args.alpha, args.k)
        result = multinomial_test(_read_categories(args.y), _read_categories(args.z), args.k, cfg,
                                  args.stat, args.calibration, args.gamma, args.B, key, args.threads)
    else:
        y, z = _read_csv(args.y), _read_csv(args.z)
        d = args.d if args.d is not None else y.shape[1]
        if y.shape[1] != d or z.shape[1] != d:
            raise ParameterError(f"point files must have {d} columns")
        if args.mode == "density":
            spec = BinningSpec(d, args.kappa, args.transform)
            cfg = PrivacyConfig(args.mechanism, args.alpha, max(spec.k, 2))
            result = density_test(y, z, spec, cfg, args.stat, args.gamma, args.B, key,
                                  calibration=args.calibration, workers=args.threads)
        else:
            if Calibration.parse(args.calibration) is not Calibration.PERMUTATION:
                raise ConfigurationError("the adaptive test is permutation-calibrated only")
            result = adaptive_density_test(y, z, args.alpha, args.gamma, args.B, args.mechanism, key,
                                           stat=args.stat, transform=args.transform,
                                           workers=args.threads)
    out = result.to_dict()
    payload = {k: out[k] for k in ("statistic", "p_value", "reject", "B", "seed", "method")}
    print(json.dumps(payload))
    return 0


def _cmd_simulate(args) -> int:
    kind = ScenarioKind(args.scenario)
    spec = ScenarioSpec(kind, k=args.k, d=args.d, eta=args.eta)
    mode = args.mode
    if not kind.multinomial and mode == "multinomial":
        mode = "density"
    cfg = TestConfig(args.mechanism, args.stat, args.calibration, args.alpha, args.gamma, args.B,
                     mode, args.kappa, args.transform)
    n2 = args.n2 if args.n2 is not None else args.n
    with _Output(args.out) as fh:
        writer = ResultWriter(fh, {"command": "simulate", **_effective(args)})
        est = estimate_power(spec, cfg, args.n, n2, args.reps, args.seed, args.threads)
        writer.write(est.row())
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    config = SweepConfig.from_dict(raw)
    if args.reps is not None:
        config.reps = args.reps
    list(config.combinations())  # validate before any output
    with _Output(args.out) as fh:
        run_sweep(config, seed=args.seed, out=fh, workers=args.threads)
    return 0


_COMMANDS = {
    "privatize": _cmd_privatize,
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report anything else as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch())
