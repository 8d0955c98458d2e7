"""Orbits of a Moebius map x -> (ax + b)/(cx + d) over F_p.

The pole -d/c is sent to a/c, which turns the map into a permutation of
F_p.  Equivalently the orbit of u0 is its cycle on the projective line with
the point at infinity deleted; every fast iterate below is built on that
identification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np

from .modarith import PrimeModulus, factorize, legendre

WALK_LIMIT = 10**6
BSGS_LIMIT = 10**12
TABLE_LIMIT = 4 * 10**6


class InvalidMap(ValueError):
    pass


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class SpectralKind(enum.Enum):
    SPLIT = "split"
    INERT = "inert"
    PARABOLIC = "parabolic"


@dataclass(frozen=True)
class SpectralClass:
    kind: SpectralKind
    disc: int

    def __str__(self):
        return self.kind.value


def _mul(x, y, p):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % p, (a * f + b * h) % p,
            (c * e + d * g) % p, (c * f + d * h) % p)


def _act(m, x, p):
    a, b, c, d = m
    if x is INF:
        return a * pow(c, -1, p) % p if c else INF
    den = (c * x + d) % p
    if den == 0:
        return INF
    return (a * x + b) * pow(den, -1, p) % p


@dataclass(frozen=True)
class MoebiusMap:
    p: int
    alpha: int
    beta: int
    gamma: int
    delta: int

    def __post_init__(self):
        PrimeModulus(self.p)
        p = self.p
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, getattr(self, name) % p)
        if self.gamma == 0:
            raise InvalidMap("gamma must be nonzero mod p (gamma != 0 is required)")
        if self.det == 0:
            raise InvalidMap("matrix is singular mod p (det = alpha*delta - beta*gamma = 0)")

    @classmethod
    def from_coeffs(cls, p: int, coeffs) -> "MoebiusMap":
        a, b, c, d = coeffs
        return cls(p, a, b, c, d)

    @property
    def matrix(self) -> tuple[int, int, int, int]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @property
    def det(self) -> int:
        return (self.alpha * self.delta - self.beta * self.gamma) % self.p

    @property
    def trace(self) -> int:
        return (self.alpha + self.delta) % self.p

    @property
    def pole(self) -> int:
        return (-self.delta) * pow(self.gamma, -1, self.p) % self.p

    @property
    def pole_image(self) -> int:
        return self.alpha * pow(self.gamma, -1, self.p) % self.p

    @cached_property
    def _squares(self) -> list:
        return [self.matrix]

    def fingerprint(self) -> str:
        return "%d:%d,%d,%d,%d" % (self.p, *self.matrix)

    def power(self, n: int) -> tuple[int, int, int, int]:
        """A**n mod p, using cached repeated squares."""
        if n < 0:
            raise ValueError("negative power")
        p = self.p
        sq = self._squares
        result = (1, 0, 0, 1)
        i = 0
        while n:
            if i >= len(sq):
                sq.append(_mul(sq[-1], sq[-1], p))
            if n & 1:
                result = _mul(result, sq[i], p)
            n >>= 1
            i += 1
        return result


def apply(m: MoebiusMap, x: int) -> int:
    p = m.p
    x %= p
    den = (m.gamma * x + m.delta) % p
    if den == 0:
        return m.pole_image
    return (m.alpha * x + m.beta) * pow(den, -1, p) % p


def apply_projective(m: MoebiusMap, pt):
    return _act(m.matrix, pt if pt is INF else pt % m.p, m.p)


def apply_matrix(mat, pt, p):
    """Projective action of an arbitrary 2x2 matrix mod p."""
    return _act(mat, pt, p)


def classify(m: MoebiusMap) -> SpectralClass:
    disc = (m.trace * m.trace - 4 * m.det) % m.p
    ls = legendre(disc, m.p)
    kind = {1: SpectralKind.SPLIT, -1: SpectralKind.INERT, 0: SpectralKind.PARABOLIC}[ls]
    return SpectralClass(kind, disc)


def _is_scalar(mat) -> bool:
    a, b, c, d = mat
    return b == 0 and c == 0 and a == d


def _descend(n: int, pred) -> int:
    # smallest divisor k of n with pred(k), given pred(n) and pred closed under multiples
    for q, e in factorize(n):
        for _ in range(e):
            if n % q == 0 and pred(n // q):
                n //= q
            else:
                break
    return n


@lru_cache(maxsize=4096)
def map_order(m: MoebiusMap) -> int:
    """Order of A in PGL_2(F_p): least n >= 1 with A**n scalar."""
    p = m.p
    kind = classify(m).kind
    bound = {SpectralKind.SPLIT: p - 1, SpectralKind.INERT: p + 1,
             SpectralKind.PARABOLIC: p}[kind]
    if not _is_scalar(m.power(bound)):
        bound = p * (p - 1) * (p + 1)
    return _descend(bound, lambda k: _is_scalar(m.power(k)))


@dataclass(frozen=True)
class OrbitSpec:
    map: MoebiusMap
    u0: int

    def __post_init__(self):
        object.__setattr__(self, "u0", self.u0 % self.map.p)

    @property
    def p(self) -> int:
        return self.map.p


@dataclass(frozen=True)
class CycleInfo:
    t: int
    t_true: int
    pole_in_orbit: bool
    inf_index: int | None = field(default=None)


def _find_infinity(m: MoebiusMap, u0: int, t_true: int):
    """Index i in [0, t_true) with A**i u0 = INF, or None."""
    p = m.p
    if t_true <= WALK_LIMIT:
        x = u0
        for i in range(t_true):
            if x is INF:
                return i
            x = _act(m.matrix, x, p)
        return None
    if t_true > BSGS_LIMIT:
        raise OverflowError("cycle of length %d is too long to locate the pole" % t_true)
    # baby-step giant-step: A**(g*s) u0 == A**(-j) INF
    s = math.isqrt(t_true) + 1
    a, b, c, d = m.matrix
    inv = (d, -b % p, -c % p, a)
    baby = {}
    x = INF
    for j in range(s):
        baby.setdefault(x, j)
        x = _act(inv, x, p)
    giant = m.power(s)
    x = u0
    for g in range(s + 1):
        j = baby.get(x)
        if j is not None:
            return (g * s + j) % t_true
        x = _act(giant, x, p)
    return None


@lru_cache(maxsize=4096)
def cycle_info(spec: OrbitSpec) -> CycleInfo:
    m, u0 = spec.map, spec.u0
    order = map_order(m)
    t_true = _descend(order, lambda k: _act(m.power(k), u0, m.p) == u0)
    idx = _find_infinity(m, u0, t_true)
    if idx is None:
        return CycleInfo(t_true, t_true, False)
    return CycleInfo(t_true - 1, t_true, True, idx)


def true_index(info: CycleInfo, n: int) -> int:
    """Position in the projective cycle of the n-th convention iterate."""
    k = n % info.t
    if info.pole_in_orbit and k >= info.inf_index:
        k += 1
    return k


def nth_element(spec: OrbitSpec, n: int) -> int:
    if n < 0:
        raise ValueError("negative index")
    info = cycle_info(spec)
    k = true_index(info, n)
    return _act(spec.map.power(k), spec.u0, spec.p)


def orbit_stream(spec: OrbitSpec, start: int = 0, count: int = 0) -> Iterator[int]:
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return
    m = spec.map
    x = nth_element(spec, start)
    yield x
    for _ in range(count - 1):
        x = apply(m, x)
        yield x


@lru_cache(maxsize=64)
def orbit_table(spec: OrbitSpec) -> np.ndarray:
    """u_0, ..., u_{t-1} as an int64 array (requires t <= TABLE_LIMIT)."""
    info = cycle_info(spec)
    if info.t > TABLE_LIMIT:
        raise OverflowError("period %d exceeds the table limit" % info.t)
    dtype = np.int64 if spec.p < (1 << 63) else object
    table = np.fromiter(orbit_stream(spec, 0, info.t), dtype=dtype, count=info.t)
    table.flags.writeable = False
    return table


def orbit_values(spec: OrbitSpec, indices) -> np.ndarray:
    """u_n for an array of nonnegative indices."""
    idx = np.asarray(indices, dtype=np.int64)
    info = cycle_info(spec)
    if info.t <= TABLE_LIMIT:
        return orbit_table(spec)[idx % info.t]
    return np.array([nth_element(spec, int(n)) for n in idx], dtype=object)
