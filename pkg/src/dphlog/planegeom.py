"""Plane models of conic fibrations as pencils of plane curves.

Points are projective triples of Fractions; an affine point (x, y) is [x : y : 1].
Pencil members are homogeneous forms in X, Y, Z with exact rational coefficients.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .curves import ConicSet, LineSet, ReducibleFiber, conic_classes, lines, reducible_fibers
from .linalg import nullspace_exact, rank_exact
from .picard import PicClass, intersect

GENERIC_T = 7919
Point = tuple[Fraction, Fraction, Fraction]


class DegenerateConfiguration(ValueError):
    pass


class BasePointError(ValueError):
    pass


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "oo"

    def __reduce__(self):
        return (_Infinity, ())


oo = _Infinity()


def p1_str(v) -> str:
    if v is oo:
        return "inf"
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def p1_parse(s: str):
    return oo if s == "inf" else Fraction(s)


def monomials(d: int) -> list[tuple[int, int, int]]:
    return [(i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1)]


class Form:
    """Homogeneous polynomial in X, Y, Z with Fraction coefficients."""

    __slots__ = ("terms", "__dict__")

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int, int], Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[tuple(mono)] = c
        if len({sum(m) for m in self.terms}) > 1:
            raise ValueError("form is not homogeneous")

    @property
    def degree(self) -> int:
        return sum(next(iter(self.terms))) if self.terms else 0

    def __bool__(self):
        return bool(self.terms)

    def _combine(self, other, sign):
        if not isinstance(other, Form):
            other = Form({(0, 0, 0): other})
            if self.terms and self.degree:
                raise ValueError("adding a constant to a form of positive degree")
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + sign * c
        return Form(out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    __radd__ = __add__

    def __neg__(self):
        return Form({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Form):
            return Form({m: c * Fraction(other) for m, c in self.terms.items()})
        out: dict = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
            out[m] = out.get(m, 0) + c1 * c2
        return Form(out)

    __rmul__ = __mul__

    def __truediv__(self, n):
        return self * (1 / Fraction(n))

    def __eq__(self, other):
        return isinstance(other, Form) and self.terms == other.terms

    def __repr__(self):
        return f"Form(deg={self.degree}, {len(self.terms)} terms)"

    def __call__(self, p):
        total = 0
        for (i, j, k), c in self.terms.items():
            total += c * p[0] ** i * p[1] ** j * p[2] ** k
        return total

    def vector(self, d: int | None = None) -> list[Fraction]:
        d = self.degree if d is None else d
        return [self.terms.get(m, Fraction(0)) for m in monomials(d)]

    @classmethod
    def from_vector(cls, vec: Sequence, d: int) -> Form:
        return cls(dict(zip(monomials(d), vec)))

    @cached_property
    def _arrays(self):
        monos = np.array(list(self.terms) or [(0, 0, 0)], dtype=np.int64)
        coef = np.array([complex(c) for c in self.terms.values()] or [0j])
        return monos, coef

    def eval_complex(self, p) -> complex:
        monos, coef = self._arrays
        p = np.asarray(p, dtype=complex)
        return complex(np.sum(coef * np.prod(p[None, :] ** monos, axis=1)))

    def grad_complex(self, p) -> np.ndarray:
        monos, coef = self._arrays
        p = np.asarray(p, dtype=complex)
        out = np.zeros(3, dtype=complex)
        for axis in range(3):
            e = monos.copy()
            fac = e[:, axis].astype(complex)
            e[:, axis] = np.maximum(e[:, axis] - 1, 0)
            out[axis] = np.sum(coef * fac * np.prod(p[None, :] ** e, axis=1))
        return out

    def restrict_complex(self, p, v) -> np.ndarray:
        """Complex coefficients (in s, lowest first) of F(p + s v)."""
        out = np.zeros(self.degree + 1, dtype=complex)
        lin = [np.array([complex(p[t]), complex(v[t])]) for t in range(3)]
        for mono, c in self.terms.items():
            poly = np.array([complex(c)])
            for t, n in enumerate(mono):
                if n:
                    poly = P.polymul(poly, P.polypow(lin[t], n))
            out[: len(poly)] += poly
        return out

    def restrict(self, p: Point, v: Point) -> list[Fraction]:
        """Coefficients (in s) of F(p + s v), lowest degree first."""
        lin = [(Fraction(p[t]), Fraction(v[t])) for t in range(3)]
        poly = [Fraction(0)] * (self.degree + 1)
        for (i, j, k), c in self.terms.items():
            cur = [c]
            for t, n in zip(range(3), (i, j, k)):
                for _ in range(n):
                    a, b = lin[t]
                    nxt = [Fraction(0)] * (len(cur) + 1)
                    for q, x in enumerate(cur):
                        nxt[q] += a * x
                        nxt[q + 1] += b * x
                    cur = nxt
            for q, x in enumerate(cur):
                poly[q] += x
        return poly


def variables() -> tuple[Form, Form, Form]:
    return Form({(1, 0, 0): 1}), Form({(0, 1, 0): 1}), Form({(0, 0, 1): 1})


def as_point(p) -> Point:
    if len(p) == 2:
        p = (p[0], p[1], 1)
    return tuple(Fraction(x) for x in p)


@dataclass
class PointConfig:
    r: int
    points: list[Point]

    def __post_init__(self):
        self.points = [as_point(p) for p in self.points]
        if len(self.points) != self.r:
            raise ValueError(f"expected {self.r} points, got {len(self.points)}")

    def to_json(self):
        return [[p1_str(x) for x in p] for p in self.points]


def _falling(n: int, k: int) -> int:
    out = 1
    for t in range(k):
        out *= n - t
    return out


def multiplicity_rows(p: Point, m: int, d: int) -> list[list[Fraction]]:
    """Linear conditions on degree-d forms for vanishing to order m at p."""
    if m < 0:
        raise ValueError("negative multiplicity: change the plane model first")
    if m == 0:
        return []
    rows = []
    monos = monomials(d)
    for a, b in ((a, b) for a in range(m) for b in range(m - a)):
        c = m - 1 - a - b
        row = []
        for i, j, k in monos:
            if i < a or j < b or k < c:
                row.append(Fraction(0))
                continue
            coeff = _falling(i, a) * _falling(j, b) * _falling(k, c)
            row.append(coeff * p[0] ** (i - a) * p[1] ** (j - b) * p[2] ** (k - c))
        rows.append(row)
    return rows


def interpolation_matrix(c: PicClass, cfg: PointConfig) -> list[list[Fraction]]:
    rows = []
    for p, m in zip(cfg.points, c.m):
        rows.extend(multiplicity_rows(p, m, c.d))
    return rows


def linear_system(c: PicClass, cfg: PointConfig) -> list[Form]:
    """Basis of degree-d forms vanishing to order m_i at p_i."""
    if c.r != cfg.r:
        raise ValueError("class and configuration live on different surfaces")
    if c.d < 0 or min(c.m) < 0:
        raise ValueError(f"class {c} has negative coordinates: no direct plane model")
    rows = interpolation_matrix(c, cfg)
    basis = nullspace_exact(rows, ncols=len(monomials(c.d)))
    forms = [Form.from_vector(v, c.d) for v in basis]
    self_int = intersect(c, c)
    expected = {0: 2, -1: 1}.get(self_int)
    if expected is not None and len(forms) != expected:
        raise DegenerateConfiguration(f"linear system of {c} has dimension {len(forms)}, expected {expected}")
    return forms


def _kernel_points(f: Form) -> tuple[Point, Point]:
    a, b = nullspace_exact([f.vector(1)], ncols=3)
    return tuple(a), tuple(b)


def generic_point(ell: PicClass, cfg: PointConfig, t: int = GENERIC_T) -> Point:
    """A point of the plane curve of a line class, from a rational parametrization."""
    if ell.d <= 0:
        raise ValueError(f"{ell} is contracted to a point in the plane")
    (f,) = linear_system(ell, cfg)
    if ell.d == 1:
        u, v = _kernel_points(f)
        return tuple(x + t * y for x, y in zip(u, v))
    centers = [i for i, m in enumerate(ell.m) if m == ell.d - 1]
    if not centers:
        raise NotImplementedError(f"no point of multiplicity d - 1 on {ell}")
    p = cfg.points[centers[0]]
    for tt in range(t, t + 50):
        v = (Fraction(1), Fraction(tt), Fraction(tt * tt + 1))
        poly = f.restrict(p, v)
        lead, sub = poly[ell.d], poly[ell.d - 1]
        if lead != 0 and sub != 0:
            s = -sub / lead
            return tuple(p[q] + s * v[q] for q in range(3))
    raise DegenerateConfiguration(f"could not parametrize the curve of {ell}")


@dataclass
class GeneralPositionReport:
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def validate_general_position(cfg: PointConfig) -> GeneralPositionReport:
    rep = GeneralPositionReport()
    pts = cfg.points
    for i, j in itertools.combinations(range(cfg.r), 2):
        a, b = pts[i], pts[j]
        cross = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
        if not any(cross):
            rep.failures.append(f"distinctness: p{i + 1} = p{j + 1}")
    if rep.failures:
        return rep
    for trip in itertools.combinations(range(cfg.r), 3):
        if _det3(*(pts[t] for t in trip)) == 0:
            rep.failures.append("collinear: " + ", ".join(f"p{t + 1}" for t in trip))
    if cfg.r >= 6:
        for six in itertools.combinations(range(cfg.r), 6):
            rows = [[pts[t][0] ** i * pts[t][1] ** j * pts[t][2] ** k for i, j, k in monomials(2)] for t in six]
            if rank_exact(rows) < 6:
                rep.failures.append("on a conic: " + ", ".join(f"p{t + 1}" for t in six))
    if cfg.r == 8:
        for s in range(8):
            m = tuple(2 if t == s else 1 for t in range(8))
            rows = interpolation_matrix(PicClass(8, 3, m), cfg)
            if rank_exact(rows) < 10:
                rep.failures.append(f"on a cubic singular at p{s + 1}")
    return rep


def _p1_ratio(num, den):
    if num == 0 and den == 0:
        raise BasePointError("both pencil members vanish")
    return oo if den == 0 else Fraction(num) / Fraction(den)


@dataclass(eq=False)
class FibrationModel:
    c: PicClass
    num: Form
    den: Form
    fibers: list[ReducibleFiber]
    singular_values: list
    label: str = ""

    @property
    def degree(self) -> int:
        return self.c.d

    def finite_singular_values(self) -> list[complex]:
        if self.singular_values[-1] is not oo:
            raise ValueError(f"model {self.label or self.c}: last singular value is not infinity")
        return [complex(v) for v in self.singular_values[:-1]]

    def value(self, point):
        p = as_point(point)
        return _p1_ratio(self.num(p), self.den(p))

    def value_complex(self, p) -> complex:
        p = np.asarray(p, dtype=complex)
        return self.num.eval_complex(p) / self.den.eval_complex(p)

    def line_derivative(self, p, v) -> complex:
        """d/dt of the model value at p + t v (affine chart Z = 1 kept by v[2] = 0)."""
        p = np.asarray(p, dtype=complex)
        n, dd = self.num.eval_complex(p), self.den.eval_complex(p)
        dn = self.num.grad_complex(p) @ v
        ddd = self.den.grad_complex(p) @ v
        return (dn * dd - n * ddd) / dd**2

    def to_json(self) -> dict:
        d = self.c.d
        return {
            "label": self.label,
            "conic_class": self.c.to_json(),
            "degree": d,
            "numerator": [p1_str(x) for x in self.num.vector(d)],
            "denominator": [p1_str(x) for x in self.den.vector(d)],
            "fibers": [list(f.lines) for f in self.fibers],
            "singular_values": [p1_str(v) for v in self.singular_values],
        }


def fibration_value(model: FibrationModel, point):
    return model.value(point)


def plane_components(f: ReducibleFiber, L: LineSet) -> list[PicClass]:
    """Components of a fiber that are curves in the plane (not contracted)."""
    return [L.lines[i] for i in f.lines if L.lines[i].d >= 1]


def fiber_value(num: Form, den: Form, f: ReducibleFiber, L: LineSet, cfg: PointConfig, t: int = GENERIC_T):
    """Value of num/den on the plane components of a fiber; raises if not constant."""
    values = []
    for ell in plane_components(f, L):
        for tt in range(t, t + 20):
            q = generic_point(ell, cfg, tt)
            try:
                values.append(_p1_ratio(num(q), den(q)))
                break
            except BasePointError:
                continue
        else:
            raise DegenerateConfiguration(f"fiber {f.lines} only meets base points")
    if len({p1_str(v) for v in values}) != 1:
        raise DegenerateConfiguration(f"pencil is not constant on fiber {f.lines}")
    return values[0]


def singular_values(model: FibrationModel, cfg: PointConfig, fibers: list[ReducibleFiber], L: LineSet) -> list:
    vals = [fiber_value(model.num, model.den, f, L, cfg) for f in fibers]
    if len(set(map(p1_str, vals))) != len(vals):
        raise DegenerateConfiguration(f"coincident singular values {vals}")
    return vals


def _member_at(num: Form, den: Form, value) -> Form:
    """Pencil member vanishing on the fiber over `value`."""
    return den if value is oo else num - den * value


def pencil_model(c: PicClass, cfg: PointConfig, L: LineSet | None = None, label: str = "") -> FibrationModel:
    """Model of the fibration of c, normalized so the fibers in reducible_fibers
    order sit over 0, 1, ... with the last one at infinity."""
    L = lines(c.r) if L is None else L
    f0, f1 = linear_system(c, cfg)
    fibers = reducible_fibers(c, L)
    vals = [fiber_value(f0, f1, f, L, cfg) for f in fibers]
    den = _member_at(f0, f1, vals[-1])
    num = _member_at(f0, f1, vals[0])
    if len(fibers) > 2:
        scale = fiber_value(num, den, fibers[1], L, cfg)
        num = num / scale
    model = FibrationModel(c, num, den, fibers, [], label)
    model.singular_values = singular_values(model, cfg, fibers, L)
    return model


def match_model(num: Form, den: Form, cfg: PointConfig, order: list, label: str = "",
                L: LineSet | None = None, C: ConicSet | None = None) -> FibrationModel:
    """Find the conic class whose pencil is spanned by (num, den) by checking that
    num/den is constant on every reducible fiber, then order fibers by `order`."""
    r = cfg.r
    L = lines(r) if L is None else L
    C = conic_classes(r) if C is None else C
    d = num.degree
    found = []
    for c in C.conics:
        if c.d != d or min(c.m) < 0:
            continue
        fibers = reducible_fibers(c, L)
        try:
            vals = []
            for f in fibers:
                v1 = fiber_value(num, den, f, L, cfg, GENERIC_T)
                v2 = fiber_value(num, den, f, L, cfg, GENERIC_T + 101)
                if p1_str(v1) != p1_str(v2):
                    raise DegenerateConfiguration("not constant")
                vals.append(v1)
        except DegenerateConfiguration:
            continue
        if len(set(map(p1_str, vals))) == len(vals):
            found.append((c, fibers, vals))
    if len(found) != 1:
        raise DegenerateConfiguration(f"{label}: matched {len(found)} conic classes")
    c, fibers, vals = found[0]
    keyed = {p1_str(v): (f, v) for f, v in zip(fibers, vals)}
    wanted = [p1_str(v) for v in order]
    if sorted(wanted) != sorted(keyed):
        raise DegenerateConfiguration(f"{label}: singular values {sorted(keyed)} differ from {sorted(wanted)}")
    fibers = [keyed[w][0] for w in wanted]
    values = [keyed[w][1] for w in wanted]
    for g in (num, den):
        rows = interpolation_matrix(c, cfg)
        vec = g.vector(d)
        assert all(sum(a * b for a, b in zip(row, vec)) == 0 for row in rows), "member outside linear system"
    return FibrationModel(c, num, den, fibers, values, label)


X4_POINTS = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]


def x4_forms():
    X, Y, Z = variables()
    return [
        ("U1", X, Z),
        ("U2", Y, Z),
        ("U3", X, Y),
        ("U4", Z - Y, Z - X),
        ("U5", X * (Z - Y), Y * (Z - X)),
    ]


def builtin_x4() -> tuple[PointConfig, list[FibrationModel]]:
    cfg = PointConfig(4, X4_POINTS)
    order = [Fraction(0), Fraction(1), oo]
    models = [match_model(n, d, cfg, order, label) for label, n, d in x4_forms()]
    return cfg, models


def x5_parameter_check(a, b) -> None:
    a, b = Fraction(a), Fraction(b)
    if a * b * (a - 1) * (b - 1) * (a - b) == 0:
        raise DegenerateConfiguration(f"parameters (a, b) = ({a}, {b}) violate ab(a-1)(b-1)(a-b) != 0")


def x5_forms(a, b):
    a, b = Fraction(a), Fraction(b)
    X, Y, Z = variables()
    P = X * (1 - b) - Y * (1 - a) - Z * (a - b)
    return [
        ("U1", X, Z, a),
        ("U2", Z, Y, 1 / b),
        ("U3", Y, X, b / a),
        ("U4", X - Y, X - Z, (a - b) / (a - 1)),
        ("U5", (Z * a - X) * b, Y * a - X * b, b * (a - 1) / (a - b)),
        ("U6", P * Z, (X - Z) * (Y - Z * b), (b - a) / b),
        ("U7", (X - Y) * (Y - Z * b), Y * P, 1 / (1 - a)),
        ("U8", X * P, (X - Y) * (X - Z * a), 1 - b),
        ("U9", Y * (X - Z * a), X * (Y - Z * b), (1 - a) / (1 - b)),
        ("U10", X * (Y - Z), Y * (X - Z), a * (b - 1) / (b * (a - 1))),
    ]


def x5_config(a, b) -> PointConfig:
    x5_parameter_check(a, b)
    return PointConfig(5, X4_POINTS + [(Fraction(a), Fraction(b), 1)])


def builtin_x5(a=3, b=5) -> tuple[PointConfig, list[FibrationModel]]:
    cfg = x5_config(a, b)
    rep = validate_general_position(cfg)
    if not rep.ok:
        raise DegenerateConfiguration("; ".join(rep.failures))
    models = []
    for label, n, d, ri in x5_forms(a, b):
        models.append(match_model(n, d, cfg, [Fraction(0), Fraction(1), ri, oo], label))
    return cfg, models


def pencil_models(cfg: PointConfig) -> list[FibrationModel]:
    """One normalized model per conic class (needs all multiplicities >= 0)."""
    C = conic_classes(cfg.r)
    return [pencil_model(c, cfg, label=f"c{i}") for i, c in enumerate(C.conics)]


def random_config(r: int, rng: np.random.Generator, box: int = 12, tries: int = 200) -> PointConfig:
    """Random integer points [x : y : 1] in general position."""
    for _ in range(tries):
        pts = [(int(x), int(y), 1) for x, y in rng.integers(-box, box + 1, size=(r, 2))]
        cfg = PointConfig(r, pts)
        if validate_general_position(cfg).ok:
            return cfg
    raise DegenerateConfiguration(f"no configuration in general position after {tries} tries")


def line_forms(cfg: PointConfig, L: LineSet | None = None) -> list[Form]:
    """Equations of the plane curves of all lines with d >= 1."""
    L = lines(cfg.r) if L is None else L
    return [linear_system(ell, cfg)[0] for ell in L.lines if ell.d >= 1]


def off_lines(point, cfg: PointConfig, forms: list[Form] | None = None) -> bool:
    p = as_point(point)
    forms = line_forms(cfg) if forms is None else forms
    for q in cfg.points:
        if not any(p[s] * q[t] - p[t] * q[s] for s, t in ((0, 1), (1, 2), (0, 2))):
            return False
    return all(f(p) != 0 for f in forms)


def config_scale(cfg: PointConfig) -> float:
    """Typical spread of the affine points of a configuration (at least 1)."""
    aff = [(float(p[0] / p[2]), float(p[1] / p[2])) for p in cfg.points if p[2] != 0]
    if len(aff) < 2:
        return 1.0
    return max(1.0, float(np.std(np.array(aff), axis=0).max()))


def choose_base(cfg: PointConfig, rng: np.random.Generator, forms: list[Form] | None = None,
                tries: int = 200) -> tuple[Fraction, Fraction]:
    """Rational affine point near the configuration, off every line curve."""
    forms = line_forms(cfg) if forms is None else forms
    aff = [(Fraction(p[0]) / p[2], Fraction(p[1]) / p[2]) for p in cfg.points if p[2] != 0]
    cx = sum(x for x, _ in aff) / len(aff)
    cy = sum(y for _, y in aff) / len(aff)
    scale = config_scale(cfg)
    for _ in range(tries):
        dx, dy = rng.integers(-64, 65, size=2)
        pt = (cx + Fraction(int(dx), 97) * Fraction(scale).limit_denominator(8),
              cy + Fraction(int(dy), 97) * Fraction(scale).limit_denominator(8))
        if off_lines(pt, cfg, forms):
            return pt
    raise DegenerateConfiguration("no base point off the line curves")


def random_x5_parameters(rng: np.random.Generator, tries: int = 200) -> tuple[Fraction, Fraction]:
    """Random small rationals (a, b) with ab(a-1)(b-1)(a-b) != 0 and p_5 in general position."""
    for _ in range(tries):
        num = rng.integers(-9, 10, size=2)
        den = rng.integers(1, 5, size=2)
        a, b = Fraction(int(num[0]), int(den[0])), Fraction(int(num[1]), int(den[1]))
        try:
            cfg = x5_config(a, b)
        except DegenerateConfiguration:
            continue
        if validate_general_position(cfg).ok:
            return a, b
    raise DegenerateConfiguration(f"no admissible (a, b) after {tries} tries")
