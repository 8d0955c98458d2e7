"""Exponential sums along Moebius orbits.

Every sum is a sum of weighted unit-modulus terms w * e_p(z).  Terms are
cut into fixed-size chunks by position; each chunk is summed with
``math.fsum`` and chunk subtotals are combined in chunk order, so the
result does not depend on how many workers evaluated the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .moebius import TABLE_LIMIT, OrbitSpec, cycle_info, nth_element, orbit_stream, orbit_table
from .smooth import FactorSieve, build_sieve, enumerate_smooth, vaughan_pairs

CHUNK = 1 << 15
WEIGHT_SLACK = 1e-12


class ZeroFrequency(ValueError):
    pass


class BadIndices(ValueError):
    pass


class AllZeroCoefficients(ValueError):
    pass


class WeightOutOfRange(ValueError):
    pass


class BadLimits(ValueError):
    pass


@dataclass
class SumRecord:
    value: complex
    term_count: int
    params: dict = field(default_factory=dict)

    @property
    def modulus(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "modulus": self.modulus,
            "term_count": self.term_count,
            "params": self.params,
        }


class UnitSum:
    """Accumulator of chunk subtotals, combined with exact rounding."""

    def __init__(self):
        self.re: list[float] = []
        self.im: list[float] = []
        self.term_count = 0

    def add(self, re: float, im: float, count: int = 1):
        self.re.append(re)
        self.im.append(im)
        self.term_count += count

    @property
    def value(self) -> complex:
        return complex(math.fsum(self.re), math.fsum(self.im))


def _angles(z, p: int) -> np.ndarray:
    # z holds residues in [0, p); map to (-p/2, p/2) so angles sit in (-pi, pi)
    if z.dtype == object:
        return np.array([2 * math.pi * ((x if 2 * x < p else x - p) / p) for x in z], dtype=float)
    zc = np.where(2 * z < p, z, z - p).astype(np.float64)
    return zc * (2 * math.pi / p)


def _chunk_total(z, p, weights):
    theta = _angles(z, p)
    c, s = np.cos(theta), np.sin(theta)
    if weights is None:
        return math.fsum(c), math.fsum(s)
    wr, wi = weights.real, weights.imag
    return math.fsum(wr * c - wi * s), math.fsum(wr * s + wi * c)


def sum_phases(z, p: int, weights=None, workers: int = 1, chunk: int = CHUNK) -> UnitSum:
    """Sum w_i * e_p(z_i) for residues z_i in [0, p)."""
    z = np.asarray(z)
    n = len(z)
    if weights is not None:
        weights = np.asarray(weights, dtype=complex)
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

    def part(b):
        lo, hi = b
        return _chunk_total(z[lo:hi], p, None if weights is None else weights[lo:hi])

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(part, bounds))
    else:
        parts = [part(b) for b in bounds]
    acc = UnitSum()
    for (re, im), (lo, hi) in zip(parts, bounds):
        acc.add(re, im, hi - lo)
    return acc


def _check_h(spec: OrbitSpec, h: int) -> int:
    h %= spec.p
    if h == 0:
        raise ZeroFrequency("ZeroFrequency: h must be nonzero mod p")
    return h


def orbit_at(spec: OrbitSpec, indices) -> np.ndarray:
    """u_n for nonnegative integer indices (any shape), reduced mod t first."""
    info = cycle_info(spec)
    if info.t <= TABLE_LIMIT:
        idx = np.asarray(indices)
        if idx.dtype == object:
            idx = np.array([int(i) % info.t for i in idx.ravel()], dtype=np.int64).reshape(idx.shape)
        else:
            idx = idx.astype(np.int64) % info.t
        return orbit_table(spec)[idx]
    flat = [nth_element(spec, int(i) % info.t) for i in np.asarray(indices).ravel()]
    return np.array(flat, dtype=object).reshape(np.shape(indices))


def orbit_range(spec: OrbitSpec, start: int, count: int) -> np.ndarray:
    """u_start, ..., u_{start+count-1}."""
    info = cycle_info(spec)
    if info.t <= TABLE_LIMIT:
        return orbit_table(spec)[(np.arange(count, dtype=np.int64) + start % info.t) % info.t]
    return np.array(list(orbit_stream(spec, start, count)), dtype=object)


def _phases(h: int, u, p: int):
    if u.dtype != object and p < (1 << 31):
        return (u.astype(np.int64) * h) % p
    return np.array([h * int(x) % p for x in np.ravel(u)], dtype=object)


def _echo(spec: OrbitSpec, h, **extra) -> dict:
    info = cycle_info(spec)
    return {"p": spec.p, "map": spec.map.fingerprint(), "u0": spec.u0, "t": info.t, "h": h, **extra}


def single_sum(spec: OrbitSpec, h: int, N: int, naive: bool = False,
               workers: int = 1) -> SumRecord:
    """S_h(N) = sum_{n=1}^N e_p(h u_n).

    Unless ``naive`` is set, N > t is handled by periodicity: floor(N/t)
    copies of one full period plus a remainder.
    """
    h = _check_h(spec, h)
    if N < 0:
        raise BadIndices("N must be nonnegative")
    p = spec.p
    echo = _echo(spec, h, N=N, kind="single")
    if N == 0:
        return SumRecord(0j, 0, echo)
    t = cycle_info(spec).t
    if naive or N <= t:
        acc = sum_phases(_phases(h, orbit_range(spec, 1, N), p), p, workers=workers)
        return SumRecord(acc.value, N, echo)
    reps, rem = divmod(N, t)
    full = sum_phases(_phases(h, orbit_range(spec, 1, t), p), p, workers=workers).value
    tail = sum_phases(_phases(h, orbit_range(spec, 1, rem), p), p, workers=workers).value if rem else 0j
    return SumRecord(reps * full + tail, N, echo)


def multi_term_sum(spec: OrbitSpec, coeffs, indices, N: int, workers: int = 1) -> SumRecord:
    """sum_{n=1}^N e_p(a_1 u_{m_1 n} + ... + a_s u_{m_s n})."""
    p = spec.p
    coeffs = [int(a) % p for a in coeffs]
    indices = [int(m) for m in indices]
    if not coeffs or len(coeffs) != len(indices):
        raise BadIndices("need s >= 1 coefficients matching s indices")
    if indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
        raise BadIndices("indices must satisfy 1 <= m_1 < ... < m_s")
    if not any(coeffs):
        raise AllZeroCoefficients("coefficients a_1..a_s are all zero mod p")
    echo = _echo(spec, coeffs, N=N, m=indices, kind="multi")
    if N <= 0:
        return SumRecord(0j, 0, echo)
    n = np.arange(1, N + 1, dtype=np.int64)
    t = cycle_info(spec).t
    if p < (1 << 31):
        z = np.zeros(N, dtype=np.int64)
        for a, m in zip(coeffs, indices):
            if a:
                idx = (n % t) * (m % t) % t if t < (1 << 31) else np.array([m * int(k) for k in n], dtype=object)
                z = (z + a * orbit_at(spec, idx).astype(np.int64)) % p
    else:
        z = np.zeros(N, dtype=object)
        for a, m in zip(coeffs, indices):
            if a:
                u = orbit_at(spec, np.array([m * int(k) for k in n], dtype=object))
                z = np.array([(x + a * int(y)) % p for x, y in zip(z, u)], dtype=object)
    acc = sum_phases(z, p, workers=workers)
    return SumRecord(acc.value, N, echo)


def prime_time_sum(spec: OrbitSpec, h: int, N: int, sieve: FactorSieve | None = None,
                   workers: int = 1) -> SumRecord:
    """T_h(N): sum over primes l <= N of e_p(h u_l)."""
    h = _check_h(spec, h)
    echo = _echo(spec, h, N=N, kind="prime")
    if N < 2:
        return SumRecord(0j, 0, echo)
    if sieve is None:
        sieve = build_sieve(N)
    sieve.check(N)
    primes = sieve.primes[sieve.primes <= N]
    acc = sum_phases(_phases(h, orbit_at(spec, primes), spec.p), spec.p, workers=workers)
    return SumRecord(acc.value, int(primes.size), echo)


def smooth_sum(spec: OrbitSpec, h: int, N: int, Q, sieve: FactorSieve | None = None,
               workers: int = 1) -> SumRecord:
    """T_h(N, Q): sum over Q-smooth n <= N (n = 1 included) of e_p(h u_n)."""
    h = _check_h(spec, h)
    echo = _echo(spec, h, N=N, Q=Q, kind="smooth")
    ns = enumerate_smooth(N, Q, sieve)
    acc = sum_phases(_phases(h, orbit_at(spec, ns), spec.p), spec.p, workers=workers)
    return SumRecord(acc.value, int(ns.size), echo)


def smooth_sum_decomposed(spec: OrbitSpec, h: int, N: int, Q, L,
                          sieve: FactorSieve | None = None) -> tuple[SumRecord, dict[int, SumRecord]]:
    """T_h(N, Q) rebuilt as head + per-q bilinear pieces.

    The head is the smooth n < L; every smooth n in [L, N] is replaced by
    its pair (r, s) and the pairs are grouped by q = P(r).  Returns the
    total and the per-q subtotals.
    """
    h = _check_h(spec, h)
    p = spec.p
    echo = _echo(spec, h, N=N, Q=Q, L=L, kind="smooth-decomposed")
    ns = enumerate_smooth(N, Q, sieve)
    head_ns = ns[ns < L]
    head = sum_phases(_phases(h, orbit_at(spec, head_ns), p), p)
    groups: dict[int, list[int]] = {}
    for _, pair in vaughan_pairs(N, Q, L, sieve):
        groups.setdefault(pair.q, []).append(pair.r * pair.s)
    total = UnitSum()
    total.add(head.value.real, head.value.imag, head.term_count)
    by_q = {}
    for q in sorted(groups):
        idx = np.array(groups[q], dtype=np.int64)
        acc = sum_phases(_phases(h, orbit_at(spec, idx), p), p)
        by_q[q] = SumRecord(acc.value, acc.term_count, {"q": q})
        total.add(acc.value.real, acc.value.imag, acc.term_count)
    return SumRecord(total.value, total.term_count, echo), by_q


def as_weights(w, name: str = "weights") -> np.ndarray:
    w = np.asarray(w, dtype=complex).ravel()
    if w.size and np.max(np.abs(w)) > 1 + WEIGHT_SLACK:
        raise WeightOutOfRange("%s must satisfy max |w| <= 1" % name)
    return w


def bilinear_sum(spec: OrbitSpec, h: int, alpha, beta, workers: int = 1) -> SumRecord:
    """sum_{k<=K} sum_{m<=M} alpha_k beta_m e_p(h u_{km})."""
    h = _check_h(spec, h)
    alpha, beta = as_weights(alpha, "alpha"), as_weights(beta, "beta")
    K, M = alpha.size, beta.size
    echo = _echo(spec, h, K=K, M=M, kind="bilinear")
    t = cycle_info(spec).t
    k = np.arange(1, K + 1, dtype=np.int64) % t
    m = np.arange(1, M + 1, dtype=np.int64) % t
    idx = _products(k, m, t)
    z = _phases(h, orbit_at(spec, idx), spec.p)
    w = np.outer(alpha, beta).ravel()
    acc = sum_phases(np.ravel(z), spec.p, w, workers=workers)
    return SumRecord(acc.value, K * M, echo)


def _products(a, b, t):
    if t < (1 << 31):
        return (np.outer(a, b) % t).ravel()
    return np.array([int(x) * int(y) % t for x in a for y in b], dtype=object)


def _region_sum(spec, h, alpha, beta, ks, ms):
    t = cycle_info(spec).t
    ks = np.asarray(ks, dtype=np.int64)
    ms = np.asarray(ms, dtype=np.int64)
    if t < (1 << 31):
        idx = (ks % t) * (ms % t) % t
    else:
        idx = np.array([int(a) * int(b) % t for a, b in zip(ks, ms)], dtype=object)
    z = _phases(h, orbit_at(spec, idx), spec.p)
    w = alpha[ks - 1] * beta[ms - 1]
    return sum_phases(np.ravel(z), spec.p, w)


def varlimit_bilinear_sum(spec: OrbitSpec, h: int, alpha, beta, lower, upper) -> SumRecord:
    """sum_{m<=M} sum_{L_m < k <= K_m} alpha_k beta_m e_p(h u_{km}), L_m < K_m < K."""
    h = _check_h(spec, h)
    alpha, beta = as_weights(alpha, "alpha"), as_weights(beta, "beta")
    K, M = alpha.size, beta.size
    lower, upper = list(lower), list(upper)
    if len(lower) != M or len(upper) != M:
        raise BadLimits("need one (L_m, K_m) pair per m")
    for m, (lo, hi) in enumerate(zip(lower, upper), 1):
        if not 0 <= lo < hi < K:
            raise BadLimits("need 0 <= L_m < K_m < K, got m=%d: (%d, %d), K=%d" % (m, lo, hi, K))
    ks = np.concatenate([np.arange(lo + 1, hi + 1) for lo, hi in zip(lower, upper)]) if M else np.zeros(0, int)
    ms = np.repeat(np.arange(1, M + 1), [hi - lo for lo, hi in zip(lower, upper)])
    acc = _region_sum(spec, h, alpha, beta, ks, ms)
    return SumRecord(acc.value, acc.term_count, _echo(spec, h, K=K, M=M, kind="varlimit"))


def _hyper_rows(K, lower, ms):
    ks, mm = [], []
    for m in ms:
        lo, hi = lower[m - 1], K // m
        if hi > lo:
            ks.append(np.arange(lo + 1, hi + 1))
            mm.append(np.full(hi - lo, m))
    if not ks:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(ks), np.concatenate(mm)


def hyperbolic_blocks(H: int, M: int) -> list[list[int]]:
    """Split H..M into the e-adic ranges e^j < m <= e^{j+1}."""
    lo_j, hi_j = math.floor(math.log(H)) - 1, math.ceil(math.log(M))
    edges = [math.exp(j) for j in range(lo_j, hi_j + 2)]
    blocks = []
    for a, b in zip(edges, edges[1:]):
        ms = [m for m in range(max(H, math.floor(a) + 1), min(M, math.floor(b)) + 1) if a < m <= b]
        if ms:
            blocks.append(ms)
    return blocks


def hyperbolic_sum(spec: OrbitSpec, h: int, alpha, beta, K: int, lower, H: int,
                   blocked: bool = True) -> SumRecord:
    """sum_{m=H}^{M} sum_{L_m < k <= K/m} alpha_k beta_m e_p(h u_{km}).

    ``beta`` is indexed m = 1..M and ``lower`` holds L_1..L_M; ``alpha``
    needs at least K entries.  With ``blocked`` the m-range is walked in
    e-adic blocks and the block totals are added up.
    """
    h = _check_h(spec, h)
    alpha, beta = as_weights(alpha, "alpha"), as_weights(beta, "beta")
    M = beta.size
    lower = [int(x) for x in lower]
    if not 1 <= H < M:
        raise BadLimits("need 1 <= H < M, got H=%d, M=%d" % (H, M))
    if len(lower) != M or min(lower) < 0:
        raise BadLimits("need nonnegative L_m for m = 1..M")
    if alpha.size < K:
        raise BadLimits("alpha must have at least K=%d entries" % K)
    echo = _echo(spec, h, K=K, M=M, H=H, kind="hyperbolic")
    if blocked:
        total = UnitSum()
        for ms in hyperbolic_blocks(H, M):
            ks, mm = _hyper_rows(K, lower, ms)
            acc = _region_sum(spec, h, alpha, beta, ks, mm)
            total.add(acc.value.real, acc.value.imag, acc.term_count)
        return SumRecord(total.value, total.term_count, echo)
    ks, mm = _hyper_rows(K, lower, range(H, M + 1))
    acc = _region_sum(spec, h, alpha, beta, ks, mm)
    return SumRecord(acc.value, acc.term_count, echo)
