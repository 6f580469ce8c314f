"""Congruence arithmetic on arbitrary-precision integers.

A :class:`CongruenceClass` is the pair ``(residue, modulus)`` standing for
``x = residue (mod modulus)``.  Two classes merge into one class modulo the
lcm of their moduli whenever ``gcd(m1, m2)`` divides ``a1 - a2``; otherwise the
merge yields an :class:`Incompatible` value.  Moduli need not be coprime.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Iterable

from .errors import UndefinedGcdError

__all__ = [
    "CongruenceClass",
    "Incompatible",
    "ext_gcd",
    "merge",
    "solve_system",
]


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b)`` and ``a*x + b*y == g``."""
    if a < 0 or b < 0:
        raise ValueError("ext_gcd expects non-negative integers")
    if a == 0 and b == 0:
        raise UndefinedGcdError("gcd(0, 0) is undefined")
    if a == b:
        return a, 1, 0
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    return old_r, old_x, old_y


@dataclass(frozen=True, slots=True)
class CongruenceClass:
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(
                f"residue {self.residue} outside [0, {self.modulus})"
            )

    @classmethod
    def of(cls, value: int, modulus: int) -> CongruenceClass:
        """The class of ``value`` modulo ``modulus`` (value may be any integer)."""
        return cls(value % modulus, modulus)

    def contains(self, value: int) -> bool:
        return value % self.modulus == self.residue

    def reduce(self, modulus: int) -> CongruenceClass:
        """Project onto a divisor of the modulus."""
        if self.modulus % modulus:
            raise ValueError(f"{modulus} does not divide {self.modulus}")
        return CongruenceClass(self.residue % modulus, modulus)

    def __str__(self):
        return f"{self.residue} mod {self.modulus}"


@dataclass(frozen=True, slots=True)
class Incompatible:
    """Result of merging two congruences that share no solution."""

    left: CongruenceClass
    right: CongruenceClass

    def __bool__(self):
        return False

    def __str__(self):
        return f"incompatible: {self.left} vs {self.right}"


def merge(c1: CongruenceClass, c2: CongruenceClass) -> CongruenceClass | Incompatible:
    a1, m1 = c1.residue, c1.modulus
    a2, m2 = c2.residue, c2.modulus
    if m1 == m2:
        return c1 if a1 == a2 else Incompatible(c1, c2)
    g = gcd(m1, m2)
    diff = a2 - a1
    if diff % g:
        return Incompatible(c1, c2)
    # t solves a1 + m1*t = a2 (mod m2); m1/g is invertible modulo m2/g
    step = m2 // g
    t = (diff // g) * pow(m1 // g, -1, step) % step if step > 1 else 0
    lcm = m1 * step
    return CongruenceClass((a1 + m1 * t) % lcm, lcm)


def solve_system(classes: Iterable[CongruenceClass]) -> CongruenceClass | Incompatible:
    """Left-fold :func:`merge` over ``classes``; stops at the first conflict."""
    classes = list(classes)
    if not classes:
        raise ValueError("solve_system needs at least one congruence")

    def step(acc, cls):
        if isinstance(acc, Incompatible):
            return acc
        return merge(acc, cls)

    return reduce(step, classes[1:], classes[0])
