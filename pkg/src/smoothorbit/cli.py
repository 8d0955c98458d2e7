"""Command-line interface: ``smoothorbit {orbit,period,sum,verify,smooth}``."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import random
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import expsums, smooth, verify
from .modarith import NotPrime
from .moebius import InvalidMap, MoebiusMap, OrbitSpec, classify, cycle_info, orbit_stream

EXIT_OK, EXIT_INTERNAL, EXIT_MAP, EXIT_PARAM, EXIT_UNSAT = 0, 1, 2, 3, 4

PARAM_ERRORS = (
    expsums.ZeroFrequency, expsums.BadIndices, expsums.AllZeroCoefficients,
    expsums.WeightOutOfRange, expsums.BadLimits, smooth.ConditionViolation,
    smooth.TooSmall, smooth.NotSmooth, smooth.OutOfRange, smooth.LimitExceeded,
    smooth.NegativeArgument, verify.HypothesisViolated, verify.MissingParam,
)


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    count: int = 20
    seed: int = 1
    p_min: int = 10**4
    p_max: int = 10**5
    eps: float = 0.5
    B: float = 2.0
    t_exponent: float | None = None
    N: str = "p"
    Q: float = 1
    K: int = 0
    M: int = 0
    H: int = 0

    def constraints(self) -> verify.Constraints:
        return verify.Constraints(kind=self.kind, p_min=self.p_min, p_max=self.p_max,
                                  eps=self.eps, B=self.B, t_exponent=self.t_exponent,
                                  N=self.N, Q=self.Q, K=self.K, M=self.M, H=self.H)


def _coerce(f, raw: str):
    if f.name == "t_exponent":
        return None if raw.strip() in ("", "none") else float(raw)
    if f.name == "Q":
        x = float(raw)
        return int(x) if x.is_integer() else x
    typ = {"int": int, "float": float, "str": str}.get(str(f.type).split(" ")[0], str)
    return typ(raw)


def read_configs(text: str) -> list[ExperimentConfig]:
    """One experiment per INI section; keys are ExperimentConfig fields."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)
    out = []
    known = {f.name: f for f in fields(ExperimentConfig)}
    for section in cp.sections():
        kw = {"name": section}
        for key, raw in cp[section].items():
            if key not in known or key == "name":
                raise UsageError("unknown config key %r in [%s]" % (key, section))
            kw[key] = _coerce(known[key], raw)
        if "kind" not in kw:
            raise UsageError("section [%s] lacks 'kind'" % section)
        out.append(ExperimentConfig(**kw))
    return out


def write_configs(configs: list[ExperimentConfig]) -> str:
    lines = []
    for c in configs:
        lines.append("[%s]" % c.name)
        for f in fields(c):
            if f.name == "name":
                continue
            v = getattr(c, f.name)
            lines.append("%s = %s" % (f.name, "none" if v is None else v))
        lines.append("")
    return "\n".join(lines)


def bundled_config(name: str) -> str:
    return resources.files("smoothorbit").joinpath("configs", name).read_text()


def _load_config_text(ref: str) -> str:
    path = Path(ref)
    if path.exists():
        return path.read_text()
    name = ref if ref.endswith(".ini") else ref + ".ini"
    try:
        return bundled_config(name)
    except FileNotFoundError:
        raise UsageError("no config file or bundled config named %r" % ref)


def _parse_map(p: int, text: str) -> MoebiusMap:
    try:
        coeffs = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError("map must be four comma-separated integers alpha,beta,gamma,delta")
    if len(coeffs) != 4:
        raise UsageError("map must be four comma-separated integers alpha,beta,gamma,delta")
    return MoebiusMap.from_coeffs(p, coeffs)


def _spec(args) -> OrbitSpec:
    return OrbitSpec(_parse_map(args.p, args.map), args.u0)


def _emit_rows(out, header, rows, fmt):
    if fmt == "json":
        for r in rows:
            out.write(json.dumps(dict(zip(header, r))) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_orbit(args, out):
    spec = _spec(args)
    rows = ((args.start + i, u) for i, u in enumerate(orbit_stream(spec, args.start, args.count)))
    _emit_rows(out, ("n", "u_n"), rows, args.format)


def cmd_period(args, out):
    spec = _spec(args)
    info = cycle_info(spec)
    row = {"t": info.t, "t_true": info.t_true, "class": str(classify(spec.map)),
           "pole_in_orbit": info.pole_in_orbit, "inf_index": info.inf_index}
    if args.format == "json":
        out.write(json.dumps(row) + "\n")
    else:
        _emit_rows(out, tuple(row), [tuple("" if v is None else v for v in row.values())], "csv")


def _weights(kind: str, n: int, rng: random.Random) -> np.ndarray:
    if kind == "ones":
        return np.ones(n, dtype=complex)
    if kind == "random":
        return np.exp(2j * np.pi * np.array([rng.random() for _ in range(n)]))
    raise UsageError("weights must be 'ones' or 'random'")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise verify.MissingParam("missing --" + ", --".join(missing))


def _sieve_for(N):
    return smooth.build_sieve(N) if 2 <= N <= 10**8 else None


def cmd_sum(args, out):
    spec = _spec(args)
    kind, rng = args.kind, random.Random(args.seed)
    extra = {}
    if kind == "single":
        _require(args, "N")
        rec = expsums.single_sum(spec, args.h, args.N, workers=args.threads)
    elif kind == "multi":
        _require(args, "N", "coeffs", "indices")
        rec = expsums.multi_term_sum(spec, _ints(args.coeffs), _ints(args.indices), args.N,
                                     workers=args.threads)
    elif kind == "prime":
        _require(args, "N")
        rec = expsums.prime_time_sum(spec, args.h, args.N, _sieve_for(args.N), workers=args.threads)
    elif kind == "smooth":
        _require(args, "N", "Q")
        rec = expsums.smooth_sum(spec, args.h, args.N, args.Q, _sieve_for(args.N), workers=args.threads)
    elif kind == "smooth-decomposed":
        _require(args, "N", "Q")
        L = args.L if args.L is not None else verify.vaughan_L(args.Q, args.p, args.eps)
        rec, by_q = expsums.smooth_sum_decomposed(spec, args.h, args.N, args.Q, L, _sieve_for(args.N))
        extra["per_q"] = {str(q): {"re": r.value.real, "im": r.value.imag, "term_count": r.term_count}
                          for q, r in by_q.items()}
    elif kind in ("bilinear", "varlimit", "hyperbolic"):
        _require(args, "K", "M")
        alpha = _weights(args.weights, args.K, rng)
        beta = _weights(args.weights, args.M, rng)
        if kind == "bilinear":
            rec = expsums.bilinear_sum(spec, args.h, alpha, beta, workers=args.threads)
        elif kind == "varlimit":
            upper = [rng.randrange(1, args.K) if args.K > 1 else 0 for _ in range(args.M)]
            lower = [rng.randrange(0, u) if u > 0 else 0 for u in upper]
            rec = expsums.varlimit_bilinear_sum(spec, args.h, alpha, beta, lower, upper)
        else:
            _require(args, "H")
            rec = expsums.hyperbolic_sum(spec, args.h, alpha, beta, args.K, [0] * args.M, args.H)
    else:
        raise UsageError("unknown sum kind %r" % kind)
    doc = rec.to_dict()
    doc.update(extra)
    out.write(json.dumps(doc, sort_keys=True) + "\n")


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_verify(args, out):
    configs = read_configs(_load_config_text(args.config))
    reports = []
    for cfg in configs:
        seed = cfg.seed if args.seed is None else args.seed
        family = verify.instance_family(seed, cfg.count, cfg.constraints())
        reports += verify.run_check(family, cfg.kind, workers=args.threads, timing=not args.no_timing)
    csv_path = Path(args.out)
    csv_path.write_text(verify.reports_csv(reports))
    csv_path.with_suffix(".jsonl").write_text(verify.reports_jsonl(reports))
    if reports:
        worst = max(reports, key=lambda r: (r.ratio, -r.seed))
        out.write("worst ratio %r (kind=%s seed=%d p=%d)\n" % (worst.ratio, worst.kind, worst.seed, worst.p))
    else:
        out.write("no instances\n")


def cmd_smooth(args, out):
    action = args.action
    if action == "rho":
        _require(args, "u")
        out.write("%r\n" % smooth.dickman_rho(args.u))
        return
    _require(args, "N", "Q")
    sieve = _sieve_for(args.N)
    if action == "count":
        out.write("%d\n" % smooth.psi_count(args.N, args.Q, sieve))
    elif action == "list":
        _emit_rows(out, ("n",), ((int(n),) for n in smooth.enumerate_smooth(args.N, args.Q, sieve)),
                   args.format)
    elif action == "pairs":
        _require(args, "L")
        rows = ((n, pr.r, pr.s, pr.q) for n, pr in smooth.vaughan_pairs(args.N, args.Q, args.L, sieve))
        _emit_rows(out, ("n", "r", "s", "q"), rows, args.format)
    elif action == "estimate":
        out.write("%r\n" % smooth.psi_estimate(args.N, args.Q))


def _number(text: str):
    x = float(text)
    return int(x) if x.is_integer() else x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    orbit_args = argparse.ArgumentParser(add_help=False)
    orbit_args.add_argument("--p", type=int, required=True)
    orbit_args.add_argument("--map", required=True, help="alpha,beta,gamma,delta")
    orbit_args.add_argument("--u0", type=int, default=0)

    parser = argparse.ArgumentParser(prog="smoothorbit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common, orbit_args], help="print u_start..u_{start+count-1}")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("period", parents=[common, orbit_args], help="period t, projective period, class")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("sum", parents=[common, orbit_args], help="evaluate one exponential sum as JSON")
    p.add_argument("kind", choices=("single", "multi", "prime", "smooth", "smooth-decomposed",
                                    "bilinear", "varlimit", "hyperbolic"))
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--N", type=int)
    p.add_argument("--Q", type=_number)
    p.add_argument("--L", type=_number)
    p.add_argument("--eps", type=float, default=0.5, help="sets L = Q p^{eps/4} when --L is absent")
    p.add_argument("--K", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--coeffs")
    p.add_argument("--indices")
    p.add_argument("--weights", default="ones")
    p.set_defaults(func=cmd_sum)

    p = sub.add_parser("verify", parents=[common], help="run a bound-check experiment config")
    p.add_argument("config", help="INI path or bundled name (corollary22_small, theorem11_small)")
    p.add_argument("--out", default="report.csv")
    p.add_argument("--no-timing", action="store_true", help="write ms=0 for byte-stable reports")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("smooth", parents=[common], help="smooth-number utilities")
    p.add_argument("action", choices=("count", "list", "rho", "pairs", "estimate"))
    p.add_argument("--N", type=int)
    p.add_argument("--Q", type=_number)
    p.add_argument("--L", type=_number)
    p.add_argument("--u", type=float)
    p.set_defaults(func=cmd_smooth)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command != "verify":
        args.seed = 0
    try:
        args.func(args, out)
    except (InvalidMap, NotPrime, UsageError) as exc:
        if isinstance(exc, UsageError) and args.command in ("sum", "smooth", "verify"):
            print("error: %s" % exc, file=sys.stderr)
            return EXIT_PARAM
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_MAP
    except PARAM_ERRORS as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_PARAM
    except verify.Unsatisfiable as exc:
        print("error: Unsatisfiable: %s" % exc, file=sys.stderr)
        return EXIT_UNSAT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
