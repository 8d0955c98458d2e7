"""Empirical checks of exponential-sum bounds on random orbit instances.

Each bound is evaluated with implied constant 1 (the "envelope") and the
computed sum is reported as a ratio against it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import expsums
from .modarith import is_prime
from .moebius import InvalidMap, MoebiusMap, OrbitSpec, SpectralKind, classify, cycle_info, map_order

KINDS = ("lemma21", "cor22", "lemma23", "lemma24", "lemma25", "thm11")
REPORT_COLUMNS = ("seed", "p", "t", "class", "h", "N", "Q", "eps", "B", "kind",
                  "empirical", "envelope", "ratio", "ms")
MAX_REJECTIONS = 10**4


class MissingParam(KeyError):
    pass


class HypothesisViolated(ValueError):
    pass


class Unsatisfiable(RuntimeError):
    pass


class EmptyInput(ValueError):
    pass


def _need(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise MissingParam("missing parameter(s): " + ", ".join(missing))
    return [params[n] for n in names]


def theorem_delta(eps: float, B: float) -> float:
    return eps / (8 * B)


def envelope(kind: str, **params) -> float:
    """Right-hand side of the named bound with implied constant 1 (natural logs)."""
    if kind == "lemma21":
        s, M, N, t, p = _need(params, "s", "M", "N", "t", "p")
        value = s * M * (1 + N / t) * math.sqrt(p) * math.log(p)
    elif kind == "cor22":
        N, p, eps = _need(params, "N", "p", "eps")
        value = N * p ** (-eps / 2)
    elif kind in ("lemma23", "lemma24"):
        K, M, p, t = _need(params, "K", "M", "p", "t")
        value = K * M * (M ** -0.5 + K ** -0.5 * M ** 0.5 * p ** 0.25
                         + M ** 0.5 * p ** 0.25 * t ** -0.5) * math.sqrt(math.log(p))
        if kind == "lemma24":
            value *= math.log(K)
    elif kind == "lemma25":
        K, M, H, p, t = _need(params, "K", "M", "H", "p", "t")
        value = K * (H ** -0.5 + M * K ** -0.5 * p ** 0.25
                     + M ** 0.5 * p ** 0.25 * t ** -0.5) * math.sqrt(math.log(p)) * math.log(K)
    elif kind == "thm11":
        N, Q, eps, B = _need(params, "N", "Q", "eps", "B")
        value = N ** (1 - theorem_delta(eps, B)) * Q
    else:
        raise ValueError("unknown envelope kind %r" % kind)
    if not value > 0:
        raise ValueError("envelope for %s is not positive (%r)" % (kind, value))
    return value


def vaughan_L(Q, p: int, eps: float) -> float:
    """Split point L = Q p^{eps/4} used for the smooth-sum decomposition."""
    return Q * p ** (eps / 4)


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    p: int
    coeffs: tuple
    u0: int
    h: int
    N: int
    Q: float = 1
    eps: float = 0.5
    B: float = 2.0
    t: int = 0
    cls: str = ""
    K: int = 0
    M: int = 0
    H: int = 0

    @property
    def map(self) -> MoebiusMap:
        return MoebiusMap.from_coeffs(self.p, self.coeffs)

    @property
    def orbit(self) -> OrbitSpec:
        return OrbitSpec(self.map, self.u0)


def violations(inst: InstanceSpec, kind: str) -> list[str]:
    """Hypotheses of ``kind`` that ``inst`` fails, each named by its inequality."""
    p, t, N, Q, eps, B = inst.p, inst.t, inst.N, inst.Q, inst.eps, inst.B
    bad = []
    if inst.cls == SpectralKind.PARABOLIC.value:
        bad.append("characteristic polynomial has two distinct roots (disc != 0)")
    if kind == "cor22":
        if t < p ** (0.5 + eps):
            bad.append("t >= p^{1/2+eps}")
        if N < p ** (0.5 + eps):
            bad.append("N >= p^{1/2+eps}")
    elif kind == "thm11":
        if t < Q * p ** (0.5 + eps):
            bad.append("t >= Q p^{1/2+eps}")
        if N < Q * Q * p ** (0.5 + eps):
            bad.append("N >= Q^2 p^{1/2+eps}")
        if N > p ** B:
            bad.append("N <= p^B")
    elif kind in ("lemma23", "lemma24"):
        if inst.K < 2 or inst.M < 1:
            bad.append("K >= 2 and M >= 1")
    elif kind == "lemma25":
        if not 1 <= inst.H < inst.M or inst.K < 2:
            bad.append("1 <= H < M and K >= 2")
    elif kind != "lemma21":
        raise ValueError("unknown kind %r" % kind)
    return bad


@dataclass
class Constraints:
    kind: str = "cor22"
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
    max_tries: int = MAX_REJECTIONS


def resolve_N(policy, p: int) -> int:
    """'p', 'p^x' or a plain integer."""
    policy = str(policy).strip().replace(" ", "")
    if policy == "p":
        return p
    if policy.startswith("p^"):
        return int(round(p ** float(policy[2:])))
    return int(policy)


def _random_prime(rng: random.Random, lo: int, hi: int) -> int:
    for _ in range(1000):
        n = rng.randrange(lo, hi + 1)
        while n <= hi and not is_prime(n):
            n += 1
        if n <= hi and n >= 5:
            return n
    raise Unsatisfiable("no prime in [%d, %d]" % (lo, hi))


def _t_floor(c: Constraints, p: int) -> float:
    need = 0.0
    if c.t_exponent is not None:
        need = p ** c.t_exponent
    if c.kind == "cor22":
        need = max(need, p ** (0.5 + c.eps))
    elif c.kind == "thm11":
        need = max(need, c.Q * p ** (0.5 + c.eps))
    return need


def random_instance(seed: int, constraints: Constraints) -> InstanceSpec:
    """Rejection-sample a non-parabolic instance meeting ``constraints``."""
    c = constraints
    rng = random.Random(seed)
    for _ in range(c.max_tries):
        p = _random_prime(rng, max(5, c.p_min), c.p_max)
        coeffs = tuple(rng.randrange(p) for _ in range(4))
        try:
            m = MoebiusMap.from_coeffs(p, coeffs)
        except InvalidMap:
            continue
        kind = classify(m).kind
        if kind is SpectralKind.PARABOLIC:
            continue
        # cheap bound first: t <= order(A)
        need = _t_floor(c, p)
        if map_order(m) < need:
            continue
        u0 = rng.randrange(p)
        info = cycle_info(OrbitSpec(m, u0))
        if info.t < need:
            continue
        inst = InstanceSpec(seed=seed, p=p, coeffs=coeffs, u0=u0, h=rng.randrange(1, p),
                            N=resolve_N(c.N, p), Q=c.Q, eps=c.eps, B=c.B, t=info.t,
                            cls=kind.value, K=c.K, M=c.M, H=c.H)
        if not violations(inst, c.kind):
            return inst
    raise Unsatisfiable("no instance after %d rejections for %s" % (c.max_tries, c))


@dataclass
class BoundReport:
    seed: int
    p: int
    t: int
    cls: str
    h: int
    N: int
    Q: float
    eps: float
    B: float
    kind: str
    empirical: float
    envelope: float
    ratio: float
    ms: float
    hypotheses: list = field(default_factory=list)

    def row(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("cls")
        return {k: d[k] for k in REPORT_COLUMNS}


def _unit_weights(rng: random.Random, n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.array([rng.random() for _ in range(n)]))


HYPOTHESES = {
    "lemma21": ["disc != 0"],
    "cor22": ["disc != 0", "t >= p^{1/2+eps}", "N >= p^{1/2+eps}"],
    "lemma23": ["disc != 0"],
    "lemma24": ["disc != 0", "0 <= L_m < K_m < K"],
    "lemma25": ["disc != 0", "1 <= H < M"],
    "thm11": ["disc != 0", "t >= Q p^{1/2+eps}", "Q^2 p^{1/2+eps} <= N <= p^B"],
}


def evaluate(inst: InstanceSpec, kind: str) -> tuple[float, float]:
    """(|sum|, envelope) for one instance."""
    spec, p, t = inst.orbit, inst.p, inst.t
    rng = random.Random(inst.seed * 7919 + 17)
    if kind == "lemma21":
        rec = expsums.multi_term_sum(spec, [inst.h], [1], inst.N)
        env = envelope("lemma21", s=1, M=1, N=inst.N, t=t, p=p)
    elif kind == "cor22":
        rec = expsums.single_sum(spec, inst.h, inst.N)
        env = envelope("cor22", N=inst.N, p=p, eps=inst.eps)
    elif kind == "lemma23":
        a, b = _unit_weights(rng, inst.K), _unit_weights(rng, inst.M)
        rec = expsums.bilinear_sum(spec, inst.h, a, b)
        env = envelope("lemma23", K=inst.K, M=inst.M, p=p, t=t)
    elif kind == "lemma24":
        a, b = _unit_weights(rng, inst.K), _unit_weights(rng, inst.M)
        upper = [rng.randrange(1, inst.K) for _ in range(inst.M)]
        lower = [rng.randrange(0, u) for u in upper]
        rec = expsums.varlimit_bilinear_sum(spec, inst.h, a, b, lower, upper)
        env = envelope("lemma24", K=inst.K, M=inst.M, p=p, t=t)
    elif kind == "lemma25":
        a, b = _unit_weights(rng, inst.K), _unit_weights(rng, inst.M)
        rec = expsums.hyperbolic_sum(spec, inst.h, a, b, inst.K, [0] * inst.M, inst.H)
        env = envelope("lemma25", K=inst.K, M=inst.M, H=inst.H, p=p, t=t)
    elif kind == "thm11":
        rec = expsums.smooth_sum(spec, inst.h, inst.N, inst.Q)
        env = envelope("thm11", N=inst.N, Q=inst.Q, eps=inst.eps, B=inst.B)
    else:
        raise ValueError("unknown kind %r" % kind)
    return rec.modulus, env


def _report(inst: InstanceSpec, kind: str, timing: bool) -> BoundReport:
    start = time.perf_counter()
    emp, env = evaluate(inst, kind)
    ms = round((time.perf_counter() - start) * 1000, 3) if timing else 0.0
    return BoundReport(inst.seed, inst.p, inst.t, inst.cls, inst.h, inst.N, inst.Q, inst.eps,
                       inst.B, kind, emp, env, emp / env, ms, HYPOTHESES[kind])


def run_check(instances: list[InstanceSpec], kind: str, workers: int = 1,
              timing: bool = True) -> list[BoundReport]:
    """Evaluate every instance against ``kind``; worst ratio first."""
    for inst in instances:
        bad = violations(inst, kind)
        if bad:
            raise HypothesisViolated("instance seed=%d violates %s" % (inst.seed, "; ".join(bad)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda i: _report(i, kind, timing), instances))
    else:
        reports = [_report(i, kind, timing) for i in instances]
    return sorted(reports, key=lambda r: (-r.ratio, r.seed))


def discrepancy(values, p: int, bins: int) -> float:
    """Largest gap between the binned empirical CDF of u/p and the uniform CDF."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("discrepancy of an empty sequence")
    b = np.minimum((v * bins / p).astype(np.int64), bins - 1)
    cdf = np.cumsum(np.bincount(b, minlength=bins)) / v.size
    return float(np.max(np.abs(cdf - np.arange(1, bins + 1) / bins)))


def reports_csv(reports: list[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.row().items()})
    return buf.getvalue()


def reports_jsonl(reports: list[BoundReport]) -> str:
    return "".join(json.dumps(r.row(), sort_keys=False) + "\n" for r in reports)


def instance_family(seed: int, count: int, constraints: Constraints) -> list[InstanceSpec]:
    return [random_instance(seed + i, constraints) for i in range(count)]
