"""The Weyl group W_r acting on Pic(X_r) by integer matrices."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import det_int
from .picard import DimensionError, PicClass, check_r

ORBIT_BOUND = 10**6


def gram(r: int) -> np.ndarray:
    """Intersection form in (h, -e_1, ..., -e_r) coordinates."""
    return np.diag([1] + [-1] * r).astype(np.int64)


def simple_root(i: int, r: int) -> np.ndarray:
    """Coordinates of alpha_i = e_i - e_{i+1} (i < r) or h - e_1 - e_2 - e_3 (i = r)."""
    check_r(r)
    if not 1 <= i <= r:
        raise IndexError(f"simple root index {i} out of range 1..{r}")
    v = np.zeros(r + 1, dtype=np.int64)
    if i < r:
        v[i], v[i + 1] = -1, 1
    else:
        v[0] = 1
        v[1:4] = 1
    return v


@dataclass(frozen=True, eq=False)
class WeylElement:
    r: int
    matrix: np.ndarray = field(repr=False)
    det: int

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.r == other.r and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.r, self.matrix.tobytes()))

    def __matmul__(self, other: WeylElement) -> WeylElement:
        return compose(self, other)

    def __call__(self, c: PicClass) -> PicClass:
        return apply(self, c)


def identity(r: int) -> WeylElement:
    return WeylElement(r, np.eye(r + 1, dtype=np.int64), 1)


def reflection_matrix(alpha: np.ndarray, r: int) -> np.ndarray:
    """beta -> beta + (beta . alpha) alpha, written on coordinate vectors."""
    return np.eye(r + 1, dtype=np.int64) + np.outer(alpha, alpha @ gram(r))


@lru_cache(maxsize=None)
def simple_reflection(i: int, r: int) -> WeylElement:
    mat = reflection_matrix(simple_root(i, r), r)
    s = WeylElement(r, mat, det_int(mat.tolist()))
    if i == r:
        _check_cremona(s)
    return s


def _check_cremona(s: WeylElement) -> None:
    r = s.r
    hh = PicClass(r, 1, (0,) * r)
    want_h = PicClass(r, 2, (1, 1, 1) + (0,) * (r - 3))
    assert apply(s, hh) == want_h, "s_r(h) != 2h - e1 - e2 - e3"
    for i, (j, k) in zip((1, 2, 3), ((2, 3), (1, 3), (1, 2))):
        ei = PicClass(r, 0, tuple(-1 if t == i else 0 for t in range(1, r + 1)))
        img = PicClass(r, 1, tuple(1 if t in (j, k) else 0 for t in range(1, r + 1)))
        assert apply(s, ei) == img, f"s_r(e_{i}) != h - e_{j} - e_{k}"
    for t in range(4, r + 1):
        et = PicClass(r, 0, tuple(-1 if u == t else 0 for u in range(1, r + 1)))
        assert apply(s, et) == et, f"s_r moves e_{t}"


def generators(r: int) -> list[WeylElement]:
    return [simple_reflection(i, r) for i in range(1, r + 1)]


def apply(w: WeylElement, c: PicClass) -> PicClass:
    if w.r != c.r:
        raise DimensionError(f"r mismatch: element on X_{w.r}, class on X_{c.r}")
    return PicClass.from_vector((w.matrix @ np.array(c.vector, dtype=np.int64)).tolist())


def compose(w1: WeylElement, w2: WeylElement) -> WeylElement:
    """w1 after w2."""
    if w1.r != w2.r:
        raise DimensionError(f"r mismatch: {w1.r} vs {w2.r}")
    return WeylElement(w1.r, w1.matrix @ w2.matrix, w1.det * w2.det)


def inverse(w: WeylElement) -> WeylElement:
    # w preserves the form G: w^T G w = G, hence w^{-1} = G w^T G
    g = gram(w.r)
    inv = g @ w.matrix.T @ g
    assert np.array_equal(inv @ w.matrix, np.eye(w.r + 1, dtype=np.int64)), "not an isometry"
    return WeylElement(w.r, inv, w.det)


def signature(w: WeylElement) -> int:
    return w.det


def word_element(word, r: int) -> WeylElement:
    """Element obtained by applying the generators of `word` left to right."""
    w = identity(r)
    for i in word:
        w = compose(simple_reflection(i, r), w)
    return w


@dataclass
class OrbitTable:
    seed: PicClass
    elements: list[PicClass]
    witness: list[tuple[int, ...]]

    def __len__(self):
        return len(self.elements)

    def index(self) -> dict[PicClass, int]:
        return {x: i for i, x in enumerate(self.elements)}

    def to_json(self) -> dict:
        return {
            "seed": self.seed.to_json(),
            "elements": [x.to_json() for x in self.elements],
            "witness": [list(w) for w in self.witness],
        }


def orbit_with_witness(seed: PicClass, gens: list[int] | None = None, bound: int = ORBIT_BOUND) -> OrbitTable:
    """Breadth-first orbit of `seed` under simple reflections (index-ascending)."""
    r = seed.r
    gens = list(range(1, r + 1)) if gens is None else list(gens)
    mats = {i: simple_reflection(i, r).matrix for i in gens}
    start = seed.vector
    parent: dict[tuple, tuple | None] = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        arr = np.array(v, dtype=np.int64)
        for i in gens:
            u = tuple((mats[i] @ arr).tolist())
            if u not in parent:
                parent[u] = (v, i)
                if len(parent) > bound:
                    raise RuntimeError(f"orbit of {seed} exceeds {bound} elements")
                queue.append(u)
    words = {}
    for v in parent:
        word = []
        x = v
        while parent[x] is not None:
            x, i = parent[x]
            word.append(i)
        words[v] = tuple(reversed(word))
    order = sorted(parent)
    return OrbitTable(seed, [PicClass.from_vector(v) for v in order], [words[v] for v in order])
