"""Smooth numbers: factor sieve, Psi(N, Q), Dickman rho and the r*s split."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterator

import numpy as np

from .modarith import factorize

SIEVE_GUARD = 10**9
SPF_MAGIC = b"SPF1"


class LimitExceeded(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class NotSmooth(ValueError):
    pass


class TooSmall(ValueError):
    pass


class ConditionViolation(AssertionError):
    pass


class NegativeArgument(ValueError):
    pass


class FactorSieve:
    """Smallest-prime-factor table for 0 <= n <= limit (entries 0 and 1 are 0)."""

    def __init__(self, limit: int, spf: np.ndarray):
        self.limit = limit
        self.spf = spf
        self.spf.flags.writeable = False

    @classmethod
    def build(cls, limit: int) -> "FactorSieve":
        if limit > SIEVE_GUARD:
            raise LimitExceeded("sieve limit %d above guard %d" % (limit, SIEVE_GUARD))
        if limit < 2:
            raise OutOfRange("sieve limit must be >= 2")
        spf = np.zeros(limit + 1, dtype=np.int32)
        for i in range(2, math.isqrt(limit) + 1):
            if spf[i] == 0:
                block = spf[i * i::i]
                block[block == 0] = i
        rest = np.flatnonzero(spf == 0)
        rest = rest[rest >= 2]
        spf[rest] = rest
        return cls(limit, spf)

    @cached_property
    def largest(self) -> np.ndarray:
        """P(n) for every n <= limit, with P(1) = 1 and P(0) = 0."""
        spf = self.spf.astype(np.int64)
        rem = np.arange(self.limit + 1, dtype=np.int64)
        big = np.ones(self.limit + 1, dtype=np.int64)
        big[0] = 0
        active = np.flatnonzero(rem > 1)
        while active.size:
            s = spf[rem[active]]
            big[active] = s
            rem[active] //= s
            active = active[rem[active] > 1]
        big.flags.writeable = False
        return big

    @cached_property
    def primes(self) -> np.ndarray:
        idx = np.flatnonzero(self.spf == np.arange(self.limit + 1))
        return idx[idx >= 2]

    def check(self, n: int):
        if not 0 <= n <= self.limit:
            raise OutOfRange("%d outside sieve range [0, %d]" % (n, self.limit))

    def factors(self, n: int) -> list[int]:
        """Prime factors of n with multiplicity, nondecreasing."""
        self.check(n)
        spf = self.spf
        out = []
        while n > 1:
            q = int(spf[n])
            out.append(q)
            n //= q
        return out

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(SPF_MAGIC + struct.pack("<Q", self.limit))
            fh.write(self.spf.astype("<i4").tobytes())

    @classmethod
    def load(cls, path) -> "FactorSieve":
        data = Path(path).read_bytes()
        if data[:4] != SPF_MAGIC:
            raise ValueError("not an SPF1 sieve file")
        (limit,) = struct.unpack("<Q", data[4:12])
        spf = np.frombuffer(data[12:], dtype="<i4").astype(np.int32)
        if spf.size != limit + 1:
            raise ValueError("truncated sieve file")
        return cls(limit, spf)


build_sieve = FactorSieve.build


def smallest_prime_factor(n: int, sieve: FactorSieve) -> int:
    if n < 2:
        raise OutOfRange("p(n) needs n >= 2")
    sieve.check(n)
    return int(sieve.spf[n])


def largest_prime_factor(n: int, sieve: FactorSieve) -> int:
    if n < 2:
        raise OutOfRange("P(n) needs n >= 2")
    return sieve.factors(n)[-1]


@lru_cache(maxsize=32)
def _primes_upto(q: int) -> tuple[int, ...]:
    if q < 2:
        return ()
    flags = np.ones(q + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(q) + 1):
        if flags[i]:
            flags[i * i::i] = False
    return tuple(int(x) for x in np.flatnonzero(flags))


def generate_smooth(N: int, Q) -> np.ndarray:
    """Q-smooth numbers in [1, N] by depth-first products of primes <= Q."""
    if N < 1:
        return np.zeros(0, dtype=np.int64)
    primes = _primes_upto(int(math.floor(Q)))
    out = []
    stack = [(1, 0)]
    while stack:
        n, i = stack.pop()
        out.append(n)
        for j in range(i, len(primes)):
            m = n * primes[j]
            if m > N:
                break
            stack.append((m, j))
    return np.sort(np.array(out, dtype=np.int64))


def enumerate_smooth(N: int, Q, sieve: FactorSieve | None = None) -> np.ndarray:
    """Ascending n in [1, N] with P(n) <= Q; n = 1 is included."""
    if N < 1:
        return np.zeros(0, dtype=np.int64)
    if Q < 1:
        raise OutOfRange("Q must be >= 1")
    if sieve is None:
        return generate_smooth(N, Q)
    sieve.check(N)
    big = sieve.largest[1 : N + 1]
    return np.flatnonzero(big <= Q).astype(np.int64) + 1


def psi_count(N: int, Q, sieve: FactorSieve | None = None) -> int:
    return int(enumerate_smooth(N, Q, sieve).size)


@dataclass(frozen=True)
class RhoTable:
    """Dickman rho sampled at u = k*step."""

    step: float
    values: np.ndarray

    @property
    def u_max(self) -> float:
        return (self.values.size - 1) * self.step

    def __call__(self, u: float) -> float:
        if u < 0:
            raise NegativeArgument("rho(u) needs u >= 0")
        if u <= 1:
            return 1.0
        if u > self.u_max:
            raise OutOfRange("u=%g beyond tabulated range %g" % (u, self.u_max))
        x = u / self.step
        k = min(int(x), self.values.size - 2)
        w = x - k
        return float((1 - w) * self.values[k] + w * self.values[k + 1])


def _cubic_step_weights(offsets) -> np.ndarray:
    # weights w with sum w_i f(offset_i) = int_0^1 of the cubic through those nodes
    V = np.vander(np.asarray(offsets, dtype=float), 4, increasing=True).T
    moments = np.array([1.0, 1 / 2, 1 / 3, 1 / 4])
    return np.linalg.solve(V, moments)


_W_LEFT = _cubic_step_weights([0, 1, 2, 3])
_W_MID = _cubic_step_weights([-1, 0, 1, 2])
_W_RIGHT = _cubic_step_weights([-2, -1, 0, 1])


def build_rho_table(u_max: float = 12.0, h: float = 1e-4) -> RhoTable:
    """Tabulate rho from u rho'(u) = -rho(u - 1) on a grid of step h.

    On [j, j+1] the integrand f(v) = rho(v - 1)/v only needs rho from the
    previous unit, so each unit is one vectorized pass: per-step integrals
    of the local cubic interpolant of f, then a cumulative sum.  Stencils
    stay inside [j, j+1] because rho has a kink at every integer.
    """
    per = round(1 / h)
    if abs(per * h - 1) > 1e-12 or per < 4:
        raise ValueError("1/h must be an integer >= 4")
    units = int(math.ceil(u_max))
    rho = np.ones(units * per + 1)
    for j in range(1, units):
        lo = j * per
        x = (lo + np.arange(per + 1)) * h
        f = rho[lo - per: lo + 1] / x
        steps = np.empty(per)
        # step i covers [x_i, x_{i+1}] inside the unit
        steps[1:-1] = h * (_W_MID[0] * f[:-3] + _W_MID[1] * f[1:-2]
                           + _W_MID[2] * f[2:-1] + _W_MID[3] * f[3:])
        steps[0] = h * _W_LEFT @ f[0:4]
        steps[-1] = h * _W_RIGHT @ f[-4:]
        rho[lo + 1: lo + per + 1] = rho[lo] - np.cumsum(steps)
    rho.flags.writeable = False
    return RhoTable(h, rho)


@lru_cache(maxsize=1)
def default_rho_table() -> RhoTable:
    return build_rho_table()


def dickman_rho(u: float, table: RhoTable | None = None) -> float:
    if u < 0:
        raise NegativeArgument("rho(u) needs u >= 0")
    if u <= 1:
        return 1.0
    return (table or default_rho_table())(u)


def psi_estimate(N: int, Q, table: RhoTable | None = None) -> float:
    if Q < 2:
        raise OutOfRange("estimate needs Q >= 2")
    return N * dickman_rho(math.log(N) / math.log(Q), table)


@dataclass(frozen=True)
class VaughanPair:
    r: int
    s: int
    q: int


def check_pair(pair: VaughanPair, L, Q, sieve: FactorSieve | None = None) -> None:
    r, s = pair.r, pair.s
    ps = _spf(s, sieve)
    Pr = _lpf(r, sieve)
    if not (L / Q <= r < L):
        raise ConditionViolation("L/Q <= r < L fails for r=%d, L=%s, Q=%s" % (r, L, Q))
    if not Pr <= ps:
        raise ConditionViolation("P(r) <= p(s) fails: P(%d)=%d, p(%d)=%d" % (r, Pr, s, ps))
    if not r * ps >= L:
        raise ConditionViolation("r*p(s) >= L fails: %d*%d < %s" % (r, ps, L))
    if pair.q != Pr:
        raise ConditionViolation("q=%d is not P(r)=%d" % (pair.q, Pr))


def _factor_list(n: int, sieve: FactorSieve | None) -> list[int]:
    if sieve is not None and n <= sieve.limit:
        return sieve.factors(n)
    return [q for q, e in factorize(n) for _ in range(e)]


def _spf(n, sieve):
    # p(1) is +infinity
    return _factor_list(n, sieve)[0] if n > 1 else math.inf


def _lpf(n, sieve):
    return _factor_list(n, sieve)[-1] if n > 1 else 1


def _split(n: int, L, factors: list[int]) -> VaughanPair:
    r, j = 1, 0
    while j < len(factors) and r * factors[j] < L:
        r *= factors[j]
        j += 1
    q = factors[j - 1] if j else 1
    return VaughanPair(r, n // r, q)


def vaughan_factor(n: int, L, Q, sieve: FactorSieve | None = None) -> VaughanPair:
    """Split a Q-smooth n >= L as n = r*s.

    Prime factors are absorbed into r in nondecreasing order for as long
    as r stays below L.  The result satisfies L/Q <= r < L,
    P(r) <= p(s) and r*p(s) >= L, which is checked before returning.
    """
    if Q > L:
        raise ConditionViolation("need Q <= L, got Q=%s, L=%s" % (Q, L))
    if n < L:
        raise TooSmall("n=%d is below L=%s" % (n, L))
    factors = _factor_list(n, sieve)
    if factors and factors[-1] > Q:
        raise NotSmooth("P(%d)=%d exceeds Q=%s" % (n, factors[-1], Q))
    pair = _split(n, L, factors)
    check_pair(pair, L, Q, sieve)
    return pair


def vaughan_pairs(N: int, Q, L, sieve: FactorSieve | None = None,
                  check: bool = True) -> Iterator[tuple[int, VaughanPair]]:
    """(n, pair) for every Q-smooth n with L <= n <= N, ascending in n."""
    if Q > L:
        raise ConditionViolation("need Q <= L, got Q=%s, L=%s" % (Q, L))
    lo = max(1, math.ceil(L))
    if lo > N:
        return
    for n in enumerate_smooth(N, Q, sieve):
        n = int(n)
        if n < lo:
            continue
        pair = _split(n, L, _factor_list(n, sieve))
        if check:
            check_pair(pair, L, Q, sieve)
        yield n, pair
