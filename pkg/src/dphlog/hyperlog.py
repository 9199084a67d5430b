"""Numerical hyperlogarithms by transport of the unipotent connection.

For letters 1..m attached to finite singular values sigma_1..sigma_m, the
iterated integrals F_w of words w = (k_1, ..., k_n) satisfy

    dF_w/dz = F_{(k_2, ..., k_n)} / (z - sigma_{k_1}),   F_w(y) = 0,   F_() = 1,

so one integration of this linear system yields every word at once.  All
values are germs based at the path's start point.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-12
ATOL = 1e-15
CLEARANCE_FACTOR = 1e-3
STEP_FRACTION = 0.5

Word = tuple[int, ...]


class ClearanceError(ValueError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SingularSet:
    finite: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(s) for s in self.finite)
        object.__setattr__(self, "finite", vals)
        if any(not np.isfinite(s) for s in vals):
            raise ValueError("finite singular values must be finite")
        for a, b in itertools.combinations(vals, 2):
            if a == b:
                raise ValueError(f"repeated singular value {a}")

    @property
    def m(self) -> int:
        return len(self.finite)

    def array(self) -> np.ndarray:
        return np.array(self.finite, dtype=complex)


@dataclass(frozen=True)
class PathSpec:
    """Polyline from points[0] (base) to points[-1] (target)."""

    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        object.__setattr__(self, "points", pts)

    @property
    def base(self) -> complex:
        return self.points[0]

    @property
    def target(self) -> complex:
        return self.points[-1]

    @classmethod
    def segment(cls, y, z) -> PathSpec:
        return cls((y, z))

    def subdivided(self, n: int) -> PathSpec:
        pts = [self.points[0]]
        for a, b in zip(self.points, self.points[1:]):
            pts.extend(a + (b - a) * (i / n) for i in range(1, n + 1))
        return PathSpec(tuple(pts))


@dataclass(frozen=True, eq=False)
class ImagePath:
    """Smooth path t -> z(t), t in [0, 1], given with its derivative."""

    z: Callable[[float], complex]
    dz: Callable[[float], complex]
    samples: int = 64

    @property
    def base(self) -> complex:
        return complex(self.z(0.0))

    @property
    def target(self) -> complex:
        return complex(self.z(1.0))

    @property
    def points(self) -> tuple[complex, ...]:
        return tuple(complex(self.z(t)) for t in np.linspace(0.0, 1.0, self.samples + 1))


@dataclass
class WordFamily:
    weight: int
    values: dict[Word, complex] = field(repr=False)

    def __getitem__(self, word: Iterable[int]) -> complex:
        return self.values[tuple(word)]

    def __contains__(self, word) -> bool:
        return tuple(word) in self.values


def all_words(m: int, w: int) -> list[Word]:
    return [wd for n in range(w + 1) for wd in itertools.product(range(1, m + 1), repeat=n)]


def injective_words(m: int) -> list[Word]:
    """Words with distinct letters: the tail closure of the permutations of 1..m."""
    return [wd for n in range(m + 1) for wd in itertools.permutations(range(1, m + 1), n)]


def _tail_closure(words: Iterable[Word]) -> list[Word]:
    out = set()
    for wd in words:
        wd = tuple(wd)
        for i in range(len(wd) + 1):
            out.add(wd[i:])
    return sorted(out, key=lambda x: (len(x), x))


def _segment_distance(a: complex, b: complex, s: np.ndarray) -> np.ndarray:
    ab = b - a
    if ab == 0:
        return np.abs(s - a)
    t = np.clip(((s - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
    return np.abs(s - (a + t * ab))


def default_clearance(sigma: SingularSet, path) -> float:
    pts = np.concatenate([sigma.array(), np.array([path.base, path.target])])
    diam = float(np.max(np.abs(pts[:, None] - pts[None, :])))
    return CLEARANCE_FACTOR * max(diam, 1e-300)


def transport(sigma: SingularSet, path, w: int, words: Iterable[Word] | None = None,
              rtol: float = RTOL, atol: float = ATOL, clearance: float | None = None) -> WordFamily:
    """Values at the path end of the iterated integrals of all words of length <= w
    (or of the tail closure of `words`), based at the path start."""
    s = sigma.array()
    wordlist = all_words(sigma.m, w) if words is None else _tail_closure(words)
    if any(len(wd) > w or any(not 1 <= k <= sigma.m for k in wd) for wd in wordlist):
        raise ValueError("word outside the alphabet or longer than the weight")
    delta = default_clearance(sigma, path) if clearance is None else clearance
    nonempty = [wd for wd in wordlist if wd]
    pos = {wd: i for i, wd in enumerate(nonempty)}
    n = len(nonempty)
    head = np.array([wd[0] - 1 for wd in nonempty], dtype=np.int64)
    # index n in the extended state holds the constant 1 of the empty word
    tail = np.array([pos[wd[1:]] if len(wd) > 1 else n for wd in nonempty], dtype=np.int64)
    state = np.zeros(n, dtype=complex)

    def integrate(zf, dzf, max_step, y0):
        def rhs(t, y):
            ext = np.append(y, 1.0)
            return ext[tail] / (zf(t) - s[head]) * dzf(t)

        sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=rtol, atol=atol,
                        max_step=max_step, t_eval=[1.0])
        if sol.status != 0:
            raise IntegrationError(f"transport failed: {sol.message}")
        return sol.y[:, -1]

    if n:
        if isinstance(path, ImagePath):
            ts = np.linspace(0.0, 1.0, path.samples + 1)
            zs = np.array([complex(path.z(t)) for t in ts])
            dist = float(np.min(np.abs(zs[:, None] - s[None, :]))) if s.size else np.inf
            if dist < delta:
                raise ClearanceError(f"path comes within {dist:.3g} of a singular value (clearance {delta:.3g})")
            speed = max(abs(complex(path.dz(t))) for t in ts)
            max_step = min(1.0, STEP_FRACTION * dist / speed) if speed > 0 else 1.0
            state = integrate(path.z, path.dz, max_step, state)
        else:
            for a, b in zip(path.points, path.points[1:]):
                if a == b:
                    continue
                dist = float(np.min(_segment_distance(a, b, s))) if s.size else np.inf
                if dist < delta:
                    raise ClearanceError(
                        f"segment {a} -> {b} comes within {dist:.3g} of a singular value (clearance {delta:.3g})")
                max_step = min(1.0, STEP_FRACTION * dist / abs(b - a))
                state = integrate(lambda t, a=a, b=b: a + t * (b - a), lambda t, a=a, b=b: b - a, max_step, state)
    values = {(): 1.0 + 0j}
    values.update({wd: complex(state[pos[wd]]) for wd in nonempty})
    return WordFamily(w, values)


def permutation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def antisymmetrize(fam: WordFamily, m: int, letters: Sequence[int] | None = None) -> complex:
    """(1/m!) sum over permutations nu of sign(nu) F_(nu(1), ..., nu(m))."""
    letters = list(range(1, m + 1)) if letters is None else list(letters)
    if len(letters) != m:
        raise ValueError("need exactly m letters")
    total = 0j
    for perm in itertools.permutations(range(m)):
        word = tuple(letters[i] for i in perm)
        if word not in fam:
            raise KeyError(f"word {word} missing from the family")
        total += permutation_sign(perm) * fam[word]
    return total / math.factorial(m)


def li2(x: float) -> float:
    """Real dilogarithm on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("li2 is implemented on [0, 1]")
    if x == 1.0:
        return math.pi**2 / 6
    if x > 0.5:
        return math.pi**2 / 6 - math.log(x) * math.log1p(-x) - li2(1.0 - x)
    total, term, k = 0.0, x, 1
    while True:
        add = term / (k * k)
        total += add
        if add < 1e-17:
            return total
        k += 1
        term *= x


def rogers_R(x: float) -> float:
    """Rogers' dilogarithm normalized to vanish at 1."""
    if not 0.0 < x < 1.0:
        raise ValueError("rogers_R requires 0 < x < 1")
    return li2(x) + 0.5 * math.log(x) * math.log1p(-x) - math.pi**2 / 6


def abel_residual(x: float, y: float) -> float:
    return (rogers_R(x) - rogers_R(y) - rogers_R(x / y) - rogers_R((1 - y) / (1 - x))
            + rogers_R(x * (1 - y) / (y * (1 - x))))


def _horner(coef, t):
    acc = 0j
    for c in reversed(coef):
        acc = acc * t + c
    return acc


def model_image_path(model, base, target, samples: int = 64) -> ImagePath:
    """Image under a fibration model of the plane segment base -> target."""
    p0 = (complex(base[0]), complex(base[1]), 1.0)
    v = (complex(target[0]) - p0[0], complex(target[1]) - p0[1], 0.0)
    n = tuple(model.num.restrict_complex(p0, v))
    d = tuple(model.den.restrict_complex(p0, v))
    dn = tuple(k * c for k, c in enumerate(n))[1:] or (0j,)
    dd = tuple(k * c for k, c in enumerate(d))[1:] or (0j,)

    def z(t):
        return _horner(n, t) / _horner(d, t)

    def dz(t):
        nv, dv = _horner(n, t), _horner(d, t)
        return (_horner(dn, t) * dv - nv * _horner(dd, t)) / (dv * dv)

    return ImagePath(z, dz, samples)


@dataclass
class ResidualReport:
    total: complex
    terms: list[dict]

    @property
    def abs(self) -> float:
        return abs(self.total)

    @property
    def scale(self) -> float:
        """Largest |AI| among the terms, to tell a real cancellation from tiny terms."""
        return max((abs(complex(*t["value"])) for t in self.terms), default=0.0)

    def to_json(self) -> dict:
        return {
            "residual": [self.total.real, self.total.imag],
            "abs_residual": abs(self.total),
            "term_scale": self.scale,
            "terms": self.terms,
        }


def model_ai(model, base, target, samples: int = 64) -> complex:
    sigma = SingularSet(tuple(model.finite_singular_values()))
    m = sigma.m
    path = model_image_path(model, base, target, samples)
    fam = transport(sigma, path, m, words=[p for p in itertools.permutations(range(1, m + 1))])
    return antisymmetrize(fam, m)


def identity_residual(models, signs: Sequence[float], base, target, samples: int = 64) -> ResidualReport:
    """sum_i signs_i * AI_i evaluated at target as germs based at base."""
    if len(models) != len(signs):
        raise ValueError("one sign per model")
    total = 0j
    terms = []
    for model, sign in zip(models, signs):
        try:
            value = model_ai(model, base, target, samples)
        except ClearanceError as exc:
            raise ClearanceError(f"model {model.label or model.c}: {exc}") from exc
        total += sign * value
        terms.append({"label": model.label, "sign": sign, "value": [value.real, value.imag]})
    return ResidualReport(total, terms)


def weight3_reduction_check(sigma: SingularSet, base: complex, target: complex) -> tuple[float, tuple[int, ...]]:
    """Smallest |AI^3 - (1/3) sum_k (-1)^(k-1) Log_k AI^2_(without k)| over sign choices."""
    if sigma.m != 3:
        raise ValueError("needs exactly three finite singular values")
    fam = transport(sigma, PathSpec.segment(base, target), 3)
    ai3 = antisymmetrize(fam, 3)
    logs = [fam[(k,)] for k in (1, 2, 3)]
    ai2 = [antisymmetrize(fam, 2, [j for j in (1, 2, 3) if j != k]) for k in (1, 2, 3)]
    best = (math.inf, ())
    for signs in itertools.product((1, -1), repeat=4):
        rhs = sum((-1) ** k * signs[k + 1] * logs[k] * ai2[k] for k in range(3)) / 3
        res = abs(signs[0] * ai3 - rhs)
        if res < best[0]:
            best = (res, signs)
    return best


def paths_clear(models, base, target, samples: int = 64) -> bool:
    """True when every model's image path keeps the default clearance."""
    for model in models:
        sigma = SingularSet(tuple(model.finite_singular_values()))
        path = model_image_path(model, base, target, samples)
        zs = np.array(path.points)
        if not np.all(np.isfinite(zs)):
            return False
        delta = default_clearance(sigma, path)
        if np.min(np.abs(zs[:, None] - sigma.array()[None, :])) < delta:
            return False
    return True


def sample_targets(models, base, rng: np.random.Generator, n: int, radius: float,
                   halvings: int = 20, redraws: int = 8, samples: int = 64) -> list[tuple[complex, complex]]:
    """Complex perturbations of base whose image paths keep clearance.

    Each radius gets `redraws` fresh directions before it is halved; shrinking
    early would leave targets where every term is negligibly small."""
    b = (complex(base[0]), complex(base[1]))
    out = []
    while len(out) < n:
        rho = radius
        for _ in range(halvings):
            tgt = None
            for _ in range(redraws):
                g = rng.normal(size=4)
                d = np.array([g[0] + 1j * g[1], g[2] + 1j * g[3]])
                d /= np.linalg.norm(d)
                cand = (b[0] + rho * d[0], b[1] + rho * d[1])
                if paths_clear(models, b, cand, samples):
                    tgt = cand
                    break
            if tgt is not None:
                out.append(tgt)
                break
            rho /= 2
        else:
            raise ClearanceError("no target keeps clearance near the base point")
    return out
