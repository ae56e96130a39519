"""Beta chaotic map and the recursive chaotic-position generator.

The orbit is evaluated in plain IEEE-754 double arithmetic; platforms that
evaluate with extended precision would produce different positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BetaParams:
    # Defaults keep the orbit inside [phi1, phi2] with a positive Lyapunov
    # exponent (about 0.55); r * max(beta) = r must not exceed phi2.
    x0: float = 0.37
    a: float = 1.0
    b1: float = 0.8
    c1: float = 0.5
    b2: float = 0.9
    c2: float = 0.5
    phi1: float = 0.0
    phi2: float = 1.0
    r: float = 0.95

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.phi1 < self.phi2:
            raise ValueError("phi1 must be smaller than phi2")
        if self.p + self.q == 0:
            raise ValueError("p + q must be nonzero")
        if not self.phi1 < self.phi_c < self.phi2:
            raise ValueError("phi_c must lie strictly inside (phi1, phi2)")
        if not self.phi1 <= self.x0 <= self.phi2:
            raise ValueError("x0 must lie in [phi1, phi2]")

    @property
    def p(self) -> float:
        return self.b1 + self.c1 * self.a

    @property
    def q(self) -> float:
        return self.b2 + self.c2 * self.a

    @property
    def phi_c(self) -> float:
        return (self.p * self.phi2 + self.q * self.phi1) / (self.p + self.q)

    def as_tuple(self) -> tuple:
        return (self.x0, self.a, self.b1, self.c1, self.b2, self.c2, self.phi1, self.phi2, self.r)

    @classmethod
    def from_sequence(cls, values) -> "BetaParams":
        values = [float(v) for v in values]
        if len(values) != 9:
            raise ValueError("Beta parameters need 9 values: x0,a,b1,c1,b2,c2,phi1,phi2,r")
        return cls(*values)


def beta_fn(x: float, p: float, q: float, phi1: float, phi2: float) -> float:
    if not phi1 < phi2:
        raise ValueError("phi1 must be smaller than phi2")
    if x < phi1 or x > phi2:
        return 0.0
    phi_c = (p * phi2 + q * phi1) / (p + q)
    try:
        value = ((x - phi1) / (phi_c - phi1)) ** p * ((phi2 - x) / (phi2 - phi_c)) ** q
    except (ZeroDivisionError, OverflowError):
        value = math.nan
    if isinstance(value, complex) or not math.isfinite(value):
        raise ValueError(f"Beta function is not finite at x={x}")
    return value


def beta_orbit(params: BetaParams, n: int) -> list[int]:
    """Iterate the map ``n`` times and emit ``floor(mod(1e14 * x, n))`` after each step."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p, q = params.p, params.q
    x = params.x0
    out = []
    for _ in range(n):
        x = params.r * beta_fn(x, p, q, params.phi1, params.phi2)
        v = math.floor((1e14 * x) % n)
        # float mod of a tiny negative number can round up to n itself
        out.append(min(v, n - 1))
    return out


def chaotic_positions(L, params: BetaParams) -> list:
    """Chaotic visiting order: always a permutation of ``L``."""
    current = list(L)
    if not current:
        raise ValueError("L must be non-empty")
    if len(set(current)) != len(current):
        raise ValueError("L must not contain duplicates")
    result = []
    while True:
        n = len(current)
        tau = list(dict.fromkeys(current[v] for v in beta_orbit(params, n)))
        if len(tau) == 1:
            result.extend(current)
            return result
        result.extend(tau)
        if len(tau) == n:
            return result
        chosen = set(tau)
        current = [e for e in current if e not in chosen]
