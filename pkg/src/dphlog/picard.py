"""Picard lattice of the blow-up X_r of the plane at r points.

A class is stored by its coordinates (d; m_1, ..., m_r) in the basis
(h, -e_1, ..., -e_r), i.e. it represents d*h - sum_i m_i*e_i.  The
intersection form in these coordinates is diag(1, -1, ..., -1).
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

R_MIN, R_MAX = 3, 8


class DimensionError(ValueError):
    """Raised when classes on different surfaces X_r are combined."""


def check_r(r: int) -> int:
    if not (R_MIN <= r <= R_MAX):
        raise ValueError(f"r must lie in {R_MIN}..{R_MAX}, got {r}")
    return r


@dataclass(frozen=True, order=True)
class PicClass:
    r: int
    d: int
    m: tuple[int, ...]

    def __post_init__(self):
        if len(self.m) != self.r:
            raise DimensionError(f"expected {self.r} multiplicities, got {len(self.m)}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))

    @classmethod
    def from_vector(cls, v: Sequence[int]) -> PicClass:
        return cls(len(v) - 1, int(v[0]), tuple(int(x) for x in v[1:]))

    @property
    def vector(self) -> tuple[int, ...]:
        return (self.d,) + self.m

    def _check(self, other: PicClass):
        if not isinstance(other, PicClass):
            return NotImplemented
        if other.r != self.r:
            raise DimensionError(f"r mismatch: {self.r} vs {other.r}")
        return None

    def __add__(self, other: PicClass) -> PicClass:
        self._check(other)
        return PicClass(self.r, self.d + other.d, tuple(a + b for a, b in zip(self.m, other.m)))

    def __sub__(self, other: PicClass) -> PicClass:
        self._check(other)
        return PicClass(self.r, self.d - other.d, tuple(a - b for a, b in zip(self.m, other.m)))

    def __neg__(self) -> PicClass:
        return PicClass(self.r, -self.d, tuple(-a for a in self.m))

    def __mul__(self, n: int) -> PicClass:
        return PicClass(self.r, n * self.d, tuple(n * a for a in self.m))

    __rmul__ = __mul__

    def __str__(self) -> str:
        return "(" + str(self.d) + "; " + ", ".join(map(str, self.m)) + ")"

    def to_json(self) -> list[int]:
        return list(self.vector)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> PicClass:
        return cls.from_vector(data)


def h(r: int) -> PicClass:
    return PicClass(r, 1, (0,) * r)


def e(i: int, r: int) -> PicClass:
    """Exceptional class e_i, 1-based."""
    if not 1 <= i <= r:
        raise IndexError(f"e_{i} undefined for r={r}")
    m = [0] * r
    m[i - 1] = -1
    return PicClass(r, 0, tuple(m))


def intersect(a: PicClass, b: PicClass) -> int:
    if a.r != b.r:
        raise DimensionError(f"r mismatch: {a.r} vs {b.r}")
    return a.d * b.d - sum(x * y for x, y in zip(a.m, b.m))


def canonical_class(r: int) -> PicClass:
    check_r(r)
    return PicClass(r, -3, (-1,) * r)


def degree(c: PicClass) -> int:
    return -intersect(canonical_class(c.r), c)


@dataclass(frozen=True)
class TypeSymbol:
    """The symbol (d; k_1^n_1, ..., k_s^n_s) grouping nonzero m_i by value.

    Pairs are kept sorted by decreasing k, which is also the order used in
    the r=8 census tables.
    """

    d: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        ks = [k for k, _ in self.pairs]
        if len(set(ks)) != len(ks) or any(k == 0 for k in ks):
            raise ValueError(f"invalid type symbol pairs {self.pairs}")
        if any(n <= 0 for _, n in self.pairs):
            raise ValueError(f"invalid type symbol pairs {self.pairs}")
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs, key=lambda p: -p[0])))

    @property
    def sort_key(self):
        return (self.d, tuple(k for k, _ in self.pairs), tuple(n for _, n in self.pairs))

    def __str__(self) -> str:
        parts = [str(k) if n == 1 else f"{k}^{n}" for k, n in self.pairs]
        return f"{self.d};" + ",".join(parts)

    def pretty(self) -> str:
        return "(" + str(self).replace(";", "; ").replace(",", ", ") + ")"

    @classmethod
    def parse(cls, text: str) -> TypeSymbol:
        text = text.strip().strip("()").replace(" ", "")
        d, _, rest = text.partition(";")
        pairs = []
        for item in filter(None, rest.split(",")):
            match = re.fullmatch(r"(-?\d+)(?:\^(\d+))?", item)
            if match is None:
                raise ValueError(f"cannot parse type entry {item!r}")
            pairs.append((int(match.group(1)), int(match.group(2) or 1)))
        return cls(int(d), tuple(pairs))


def class_type(c: PicClass) -> TypeSymbol:
    counts = Counter(x for x in c.m if x != 0)
    return TypeSymbol(c.d, tuple(counts.items()))


def pic_basis(r: int) -> list[PicClass]:
    """h, e_1, ..., e_r."""
    return [h(r)] + [e(i, r) for i in range(1, r + 1)]


def combination(r: int, coeffs: Iterable[int]) -> PicClass:
    """Class sum c_0*h + sum c_i*e_i from plain coefficients."""
    coeffs = list(coeffs)
    out = PicClass(r, 0, (0,) * r)
    for c, b in zip(coeffs, pic_basis(r)):
        out = out + c * b
    return out
