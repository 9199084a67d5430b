"""Lines, conic classes, reducible fibers and exceptional tuples on X_r."""
from __future__ import annotations

import csv
import io
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .picard import PicClass, TypeSymbol, canonical_class, check_r, class_type, e, h, intersect
from .weyl import (
    OrbitTable,
    WeylElement,
    apply,
    compose,
    gram,
    identity,
    inverse,
    orbit_with_witness,
    reflection_matrix,
    simple_root,
    word_element,
)

LINE_COUNTS = {3: 6, 4: 10, 5: 16, 6: 27, 7: 56, 8: 240}
CONIC_COUNTS = {3: 3, 4: 5, 5: 10, 6: 27, 7: 126, 8: 2160}

# census of X_8, rows in the published order
TABLE2_LINES = [
    ("0;-1", 8), ("1;1^2", 28), ("2;1^5", 56), ("3;2,1^6", 56),
    ("4;2^3,1^5", 56), ("5;2^6,1^2", 28), ("6;3,2^7", 8),
]
TABLE2_CONICS = [
    ("1;1", 8), ("2;1^4", 70), ("3;2,1^5", 168), ("4;2^3,1^4", 280),
    ("4;3,1^7", 8), ("5;2^6,1", 56), ("5;3,2^3,1^4", 280), ("6;3^2,2^4,1^2", 420),
    ("7;3^4,2^3,1", 280), ("7;4,3,2^6", 56), ("8;3^7,1", 8), ("8;4,3^4,2^3", 280),
    ("9;4^2,3^5,2", 168), ("10;4^4,3^4", 70), ("11;4^7,3", 8),
]

_OFFSET, _BASE = 32, 64


def encode(coords: np.ndarray) -> np.ndarray:
    """Injective integer code of coordinate rows with entries in [-32, 32)."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size and (coords.min() < -_OFFSET or coords.max() >= _BASE - _OFFSET):
        raise OverflowError("coordinates out of encodable range")
    powers = _BASE ** np.arange(coords.shape[-1], dtype=np.int64)
    return ((coords + _OFFSET) * powers).sum(axis=-1)


class EnumerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReducibleFiber:
    """Unordered pair of line indices, stored with i < j."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("fiber components must differ")
        if self.i > self.j:
            a, b = self.j, self.i
            object.__setattr__(self, "i", a)
            object.__setattr__(self, "j", b)

    @property
    def lines(self) -> tuple[int, int]:
        return (self.i, self.j)


@dataclass(eq=False)
class LineSet:
    r: int
    lines: list[PicClass]
    orbit: OrbitTable = field(repr=False)

    @cached_property
    def index(self) -> dict[PicClass, int]:
        return {c: i for i, c in enumerate(self.lines)}

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array([c.vector for c in self.lines], dtype=np.int64)

    @cached_property
    def codes(self) -> np.ndarray:
        return encode(self.coords)

    @cached_property
    def _code_order(self) -> np.ndarray:
        return np.argsort(self.codes)

    @cached_property
    def intersections(self) -> np.ndarray:
        return self.coords @ gram(self.r) @ self.coords.T

    def __len__(self):
        return len(self.lines)

    def lookup(self, coords: np.ndarray) -> np.ndarray:
        """Line indices of coordinate rows; -1 where the row is not a line."""
        coords = np.asarray(coords, dtype=np.int64)
        try:
            codes = encode(coords)
        except OverflowError:
            return np.full(coords.shape[:-1], -1, dtype=np.int64)
        sorted_codes = self.codes[self._code_order]
        pos = np.searchsorted(sorted_codes, codes)
        pos = np.clip(pos, 0, len(sorted_codes) - 1)
        found = sorted_codes[pos] == codes
        return np.where(found, self._code_order[pos], -1)

    def permutation(self, w: WeylElement) -> np.ndarray:
        """Line index permutation induced by w; raises if w does not preserve the set."""
        img = self.lookup(self.coords @ w.matrix.T)
        if (img < 0).any():
            bad = self.lines[int(np.argmax(img < 0))]
            raise EnumerationError(f"image of line {bad} is not a line")
        return img


@dataclass(eq=False)
class ConicSet:
    r: int
    conics: list[PicClass]
    witnesses: list[WeylElement] = field(repr=False)
    orbit: OrbitTable = field(repr=False)

    @cached_property
    def index(self) -> dict[PicClass, int]:
        return {c: i for i, c in enumerate(self.conics)}

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array([c.vector for c in self.conics], dtype=np.int64)

    def __len__(self):
        return len(self.conics)


def _validate_line(c: PicClass):
    k = canonical_class(c.r)
    if intersect(c, c) != -1 or intersect(k, c) != -1:
        raise EnumerationError(f"{c} is not a line class")


def _validate_conic(c: PicClass):
    k = canonical_class(c.r)
    if intersect(c, c) != 0 or intersect(k, c) != -2:
        raise EnumerationError(f"{c} is not a conic class")


@lru_cache(maxsize=None)
def lines(r: int) -> LineSet:
    check_r(r)
    table = orbit_with_witness(e(1, r))
    for c in table.elements:
        _validate_line(c)
    if len(table) != LINE_COUNTS[r]:
        raise EnumerationError(f"found {len(table)} lines on X_{r}, expected {LINE_COUNTS[r]}")
    return LineSet(r, table.elements, table)


@lru_cache(maxsize=None)
def conic_classes(r: int) -> ConicSet:
    check_r(r)
    c1 = h(r) - e(1, r)
    table = orbit_with_witness(c1)
    for c in table.elements:
        _validate_conic(c)
    if len(table) != CONIC_COUNTS[r]:
        raise EnumerationError(f"found {len(table)} conic classes on X_{r}, expected {CONIC_COUNTS[r]}")
    witnesses = [word_element(word, r) for word in table.witness]
    return ConicSet(r, table.elements, witnesses, table)


def reducible_fibers(c: PicClass, L: LineSet) -> list[ReducibleFiber]:
    _validate_conic(c)
    partners = L.lookup(np.array(c.vector, dtype=np.int64)[None, :] - L.coords)
    fibers = []
    for i, j in enumerate(partners.tolist()):
        if j > i and L.intersections[i, j] == 1:
            fibers.append(ReducibleFiber(i, j))
    if len(fibers) != c.r - 1:
        raise EnumerationError(f"conic {c} has {len(fibers)} reducible fibers, expected {c.r - 1}")
    return fibers


def is_exceptional_tuple(t, L: LineSet) -> bool:
    t = list(t)
    if len(set(t)) != len(t):
        raise ValueError(f"repeated line index in {t}")
    sub = L.intersections[np.ix_(t, t)]
    return bool(np.all(sub[np.triu_indices(len(t), 1)] == 0))


@lru_cache(maxsize=None)
def fiber_component_matrix(r: int) -> np.ndarray:
    """comp[c, l] is True iff conic c minus line l is again a line."""
    L, C = lines(r), conic_classes(r)
    diff = C.coords[:, None, :] - L.coords[None, :, :]
    return L.lookup(diff) >= 0


def conics_through_exceptional(t, L: LineSet, C: ConicSet) -> list[PicClass]:
    t = list(t)
    if len(t) != L.r - 2 or not is_exceptional_tuple(t, L):
        raise ValueError(f"{t} is not an exceptional {L.r - 2}-tuple")
    comp = fiber_component_matrix(L.r)
    hits = np.nonzero(comp[:, t].all(axis=1))[0]
    if len(hits) != 2:
        raise EnumerationError(f"tuple {t} lies in fibers of {len(hits)} conic classes, expected 2")
    return [C.conics[i] for i in hits]


def standard_tuple(r: int, k: int | None = None) -> list[PicClass]:
    """(e_{r-k+1}, ..., e_r); for k = r - 2 this is (e_3, ..., e_r)."""
    k = r - 2 if k is None else k
    return [e(i, r) for i in range(r - k + 1, r + 1)]


def sample_exceptional_tuple(L: LineSet, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Random exceptional k-tuple by greedy extension, restarting on dead ends."""
    disjoint = L.intersections == 0
    n = len(L)
    while True:
        chosen: list[int] = []
        ok = np.ones(n, dtype=bool)
        while len(chosen) < k:
            cand = np.nonzero(ok)[0]
            if cand.size == 0:
                break
            pick = int(rng.choice(cand))
            chosen.append(pick)
            ok &= disjoint[pick]
            ok[pick] = False
        if len(chosen) == k:
            return tuple(chosen)


@lru_cache(maxsize=None)
def roots(r: int) -> list[PicClass]:
    """All classes alpha with alpha.alpha = -2 and alpha.K = 0."""
    found: set[PicClass] = set()
    for i in range(1, r + 1):
        seed = PicClass.from_vector(simple_root(i, r).tolist())
        if seed not in found:
            found.update(orbit_with_witness(seed).elements)
    return sorted(found)


def _reflection(alpha: PicClass) -> WeylElement:
    mat = reflection_matrix(np.array(alpha.vector, dtype=np.int64), alpha.r)
    return WeylElement(alpha.r, mat, -1)


def tuple_witness(target: list[PicClass]) -> WeylElement:
    """Some w in W_r with w(standard_tuple) = target, position by position.

    Walks a stabilizer chain: the pointwise stabilizer of the lines already
    placed is generated by the root reflections it contains, so each next
    line is reached by a breadth-first search under those reflections.
    """
    r, k = target[0].r, len(target)
    base = standard_tuple(r, k)
    all_roots = roots(r)
    w = identity(r)
    for j in range(k):
        goal = apply(inverse(w), target[j])
        gens = [
            _reflection(a) for a in all_roots
            if a.d > 0 or (a.d == 0 and next(x for x in a.m if x) < 0)
            if all(intersect(a, f) == 0 for f in base[:j])
        ]
        start = base[j]
        parent: dict[PicClass, tuple | None] = {start: None}
        queue = deque([start])
        while queue and goal not in parent:
            v = queue.popleft()
            for s in gens:
                u = apply(s, v)
                if u not in parent:
                    parent[u] = (v, s)
                    queue.append(u)
        if goal not in parent:
            raise EnumerationError(f"no Weyl element carries {base[j]} to {goal} fixing earlier lines")
        u = identity(r)
        x = goal
        while parent[x] is not None:
            x, s = parent[x]
            u = compose(u, s)
        w = compose(w, u)
    return w


def type_census(kind: str, r: int) -> dict[TypeSymbol, int]:
    if kind == "lines":
        classes = lines(r).lines
    elif kind == "conics":
        classes = conic_classes(r).conics
    else:
        raise ValueError(f"kind must be 'lines' or 'conics', got {kind!r}")
    counts = Counter(class_type(c) for c in classes)
    return dict(sorted(counts.items(), key=lambda kv: kv[0].sort_key))


def restricted_census(kind: str, r: int) -> dict[TypeSymbol, int]:
    """Census on X_r read off the X_8 classes whose last 8 - r multiplicities vanish."""
    big = lines(8).lines if kind == "lines" else conic_classes(8).conics
    counts = Counter(class_type(c) for c in big if not any(c.m[r:]))
    return dict(sorted(counts.items(), key=lambda kv: kv[0].sort_key))


def table2(kind: str) -> dict[TypeSymbol, int]:
    rows = TABLE2_LINES if kind == "lines" else TABLE2_CONICS
    return {TypeSymbol.parse(t): n for t, n in rows}


def census_csv(census: dict[TypeSymbol, int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["type", "count"])
    for t, n in census.items():
        writer.writerow([str(t), n])
    return buf.getvalue()
