"""Modular arithmetic over odd primes, primality and factorization."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

TRIAL_LIMIT = 10**6
RHO_SEED = 20240917

MAX_MODULUS = 1 << 62


class ZeroInverse(ZeroDivisionError):
    pass


class NotPrime(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """An odd prime 5 <= p < 2**62."""

    p: int

    def __post_init__(self):
        p = self.p
        if not isinstance(p, int) or p < 5 or p >= MAX_MODULUS:
            raise NotPrime(f"modulus must satisfy 5 <= p < 2^62, got {p!r}")
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")

    def __int__(self):
        return self.p

    def residue(self, a: int) -> int:
        return a % self.p


def _modulus(p) -> int:
    return p.p if isinstance(p, PrimeModulus) else int(p)


def mod_inv(a: int, p) -> int:
    p = _modulus(p)
    a %= p
    if a == 0:
        raise ZeroInverse("0 has no inverse modulo %d" % p)
    return pow(a, -1, p)


def mod_pow(a: int, e: int, p) -> int:
    """Square-and-multiply; 0**0 is 1."""
    p = _modulus(p)
    if e < 0:
        raise ValueError("negative exponent")
    result = 1
    base = a % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result % p


def legendre(a: int, p) -> int:
    p = _modulus(p)
    a %= p
    if a == 0:
        return 0
    return 1 if mod_pow(a, (p - 1) // 2, p) == 1 else -1


def _rho(n: int, rng: random.Random) -> int:
    # Brent's variant of Pollard rho; n is odd and composite.
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int, seed: int = RHO_SEED) -> list[tuple[int, int]]:
    """Prime factorization as ``[(prime, exponent), ...]`` in increasing order.

    Trial division up to ``TRIAL_LIMIT`` and Pollard-Brent rho with a fixed
    seed for whatever cofactor remains, so results are reproducible.
    """
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    counts: dict[int, int] = {}
    for q in (2, 3, 5):
        while n % q == 0:
            counts[q] = counts.get(q, 0) + 1
            n //= q
    # wheel mod 30
    q, steps, i = 7, (4, 2, 4, 2, 4, 6, 2, 6), 0
    while q <= TRIAL_LIMIT and q * q <= n:
        while n % q == 0:
            counts[q] = counts.get(q, 0) + 1
            n //= q
        q += steps[i]
        i = (i + 1) % 8
    if n > 1:
        rng = random.Random(seed)
        stack = [n]
        while stack:
            m = stack.pop()
            if is_prime(m):
                counts[m] = counts.get(m, 0) + 1
                continue
            r = math.isqrt(m)
            if r * r == m:
                stack += [r, r]
                continue
            d = _rho(m, rng)
            stack += [d, m // d]
    return sorted(counts.items())


def divisors(factors: list[tuple[int, int]]) -> list[int]:
    divs = [1]
    for q, e in factors:
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)
