"""Sparse integer exterior powers of the free module on the line set."""
from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .curves import LineSet
from .weyl import WeylElement

INT64_MAX = 2**63 - 1


class WeightError(ValueError):
    pass


def sort_with_sign(key: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Sorted tuple and the sign of the sorting permutation (0 on repeats)."""
    key = list(key)
    sign = 1
    for i in range(1, len(key)):
        j = i
        while j > 0 and key[j - 1] > key[j]:
            key[j - 1], key[j] = key[j], key[j - 1]
            sign = -sign
            j -= 1
    if any(a == b for a, b in zip(key, key[1:])):
        return tuple(key), 0
    return tuple(key), sign


class WedgeVector:
    """Element of the k-th exterior power with basis keys i_1 < ... < i_k."""

    __slots__ = ("k", "terms")

    def __init__(self, k: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.k = k
        self.terms: dict[tuple[int, ...], int] = {}
        for key, c in (terms or {}).items():
            self._accumulate(tuple(key), int(c))

    def _accumulate(self, key, c):
        if len(key) != self.k:
            raise WeightError(f"key {key} has weight {len(key)}, expected {self.k}")
        skey, s = sort_with_sign(key)
        if s == 0 or c == 0:
            return
        v = self.terms.get(skey, 0) + s * c
        if abs(v) > INT64_MAX:
            raise OverflowError(f"coefficient of {skey} exceeds 64 bits")
        if v:
            self.terms[skey] = v
        else:
            self.terms.pop(skey, None)

    @classmethod
    def zero(cls, k: int) -> WedgeVector:
        return cls(k)

    def _check(self, other):
        if self.k != other.k:
            raise WeightError(f"weight mismatch: {self.k} vs {other.k}")

    def __add__(self, other: WedgeVector) -> WedgeVector:
        return add(self, other)

    def __sub__(self, other: WedgeVector) -> WedgeVector:
        return add(self, scale(other, -1))

    def __neg__(self) -> WedgeVector:
        return scale(self, -1)

    def __mul__(self, n: int) -> WedgeVector:
        return scale(self, n)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, WedgeVector) and self.k == other.k and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"WedgeVector(k={self.k}, nterms={len(self.terms)})"

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.terms)

    def dump(self) -> str:
        return "\n".join(f"({','.join(map(str, key))}): {c}" for key, c in sorted(self.terms.items()))


def add(u: WedgeVector, v: WedgeVector) -> WedgeVector:
    u._check(v)
    out = WedgeVector(u.k)
    out.terms = dict(u.terms)
    for key, c in v.terms.items():
        out._accumulate(key, c)
    return out


def scale(u: WedgeVector, n: int) -> WedgeVector:
    out = WedgeVector(u.k)
    if n:
        out.terms = {key: c * n for key, c in u.terms.items()}
    return out


def is_zero(u: WedgeVector) -> bool:
    return not u.terms


def coefficient(u: WedgeVector, key) -> int:
    key = tuple(key)
    if any(a >= b for a, b in zip(key, key[1:])):
        raise ValueError(f"key {key} is not strictly increasing")
    return u.terms.get(key, 0)


def wedge_of_sums(factors: list[Mapping[int, int]]) -> WedgeVector:
    """Expand f_1 ^ ... ^ f_k where each f is a map line index -> integer."""
    acc: dict[tuple[int, ...], int] = {(): 1}
    for factor in factors:
        nxt: dict[tuple[int, ...], int] = {}
        for key, c in acc.items():
            for line, a in factor.items():
                if a == 0 or line in key:
                    continue
                # inserting `line` into sorted position from the right end
                n_greater = sum(1 for x in key if x > line)
                new_key = tuple(sorted(key + (line,)))
                v = nxt.get(new_key, 0) + (-1) ** n_greater * c * a
                if v:
                    nxt[new_key] = v
                else:
                    nxt.pop(new_key, None)
        acc = nxt
    out = WedgeVector(len(factors))
    for key, c in acc.items():
        if abs(c) > INT64_MAX:
            raise OverflowError(f"coefficient of {key} exceeds 64 bits")
    out.terms = acc
    return out


def weyl_act(w: WeylElement, u: WedgeVector, L: LineSet) -> WedgeVector:
    perm = L.permutation(w)
    out = WedgeVector(u.k)
    for key, c in u.terms.items():
        out._accumulate(tuple(int(perm[i]) for i in key), c)
    return out


def to_arrays(u: WedgeVector) -> tuple[np.ndarray, np.ndarray]:
    keys = sorted(u.terms)
    return (np.array(keys, dtype=np.int64).reshape(len(keys), u.k),
            np.array([u.terms[k] for k in keys], dtype=np.int64))


def from_arrays(k: int, keys: np.ndarray, coeffs: np.ndarray) -> WedgeVector:
    out = WedgeVector(k)
    for key, c in zip(map(tuple, keys.tolist()), coeffs.tolist()):
        out._accumulate(key, c)
    return out


def sort_rows_with_sign(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise sort of an (n, k) key array plus the permutation signs (0 on repeats)."""
    keys = np.asarray(keys)
    n, k = keys.shape
    inv = np.zeros(n, dtype=np.int64)
    rep = np.zeros(n, dtype=bool)
    for i in range(k):
        for j in range(i + 1, k):
            inv += keys[:, i] > keys[:, j]
            rep |= keys[:, i] == keys[:, j]
    sign = np.where(inv % 2 == 0, 1, -1)
    sign[rep] = 0
    return np.sort(keys, axis=1), sign
