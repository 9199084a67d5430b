"""The integer tensors tau_c and the identity hlog = sum_c tau_c = 0.

tau_{c_1} for c_1 = h - e_1 is fixed by the fiber order C^i = (h - e_1 - e_i) + e_i,
i = 2..r, with C^r as reference fiber; every other tau_c is transported by
tau_c = sign(w) * w.tau_{c_1} for any w with w(c_1) = c.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .curves import (
    ConicSet,
    LineSet,
    ReducibleFiber,
    conic_classes,
    lines,
    reducible_fibers,
)
from .linalg import rank_exact, rank_mod_p
from .picard import PicClass, e, h, intersect
from .wedge import WedgeVector, from_arrays, sort_rows_with_sign, to_arrays, wedge_of_sums, weyl_act
from .weyl import WeylElement, apply, signature


class IdentityError(AssertionError):
    """A verified identity or structural lemma failed."""


def fiber_sum(f: ReducibleFiber) -> dict[int, int]:
    return {f.i: 1, f.j: 1}


def residue_wedge(c: PicClass, fiber_order: list[ReducibleFiber], L: LineSet) -> WedgeVector:
    """(C^1 - C^{r-1}) ^ ... ^ (C^{r-2} - C^{r-1}) for the given fiber order."""
    expected = set(reducible_fibers(c, L))
    if set(fiber_order) != expected or len(fiber_order) != len(expected):
        raise ValueError(f"fiber order is not a permutation of the reducible fibers of {c}")
    ref = fiber_order[-1]
    factors = []
    for f in fiber_order[:-1]:
        factor = fiber_sum(f)
        for line in ref.lines:
            factor[line] = factor.get(line, 0) - 1
        factors.append(factor)
    return wedge_of_sums(factors)


def c1_fiber_order(L: LineSet) -> list[ReducibleFiber]:
    r = L.r
    c1 = h(r) - e(1, r)
    order = []
    for i in range(2, r + 1):
        a = L.index[c1 - e(i, r)]
        b = L.index[e(i, r)]
        order.append(ReducibleFiber(a, b))
    if set(order) != set(reducible_fibers(c1, L)):
        raise IdentityError("the fibers (h - e_1 - e_i) + e_i are not the reducible fibers of h - e_1")
    return order


def tau_c1(r: int, L: LineSet | None = None) -> WedgeVector:
    L = lines(r) if L is None else L
    return residue_wedge(h(r) - e(1, r), c1_fiber_order(L), L)


def tau(c: PicClass, w: WeylElement, t_c1: WedgeVector, L: LineSet) -> WedgeVector:
    r = c.r
    if apply(w, h(r) - e(1, r)) != c:
        raise ValueError(f"witness does not map h - e_1 to {c}")
    return weyl_act(w, t_c1, L) * signature(w)


@dataclass(eq=False)
class TauFamily:
    """All tau_c in a dense layout: keys[c, t, :] with coefficient coeffs[c, t]."""

    r: int
    L: LineSet = field(repr=False)
    C: ConicSet = field(repr=False)
    keys: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    c1_order: list[ReducibleFiber] = field(repr=False)

    def __len__(self):
        return len(self.C)

    def tau(self, i: int) -> WedgeVector:
        return from_arrays(self.r - 2, self.keys[i], self.coeffs[i])

    def tau_of(self, c: PicClass) -> WedgeVector:
        return self.tau(self.C.index[c])

    @cached_property
    def key_codes(self) -> np.ndarray:
        """Each sorted key packed into one int64 (base = number of lines)."""
        n = len(self.L)
        powers = n ** np.arange(self.r - 2, dtype=np.int64)[::-1]
        return self.keys @ powers

    def unpack(self, code: int) -> tuple[int, ...]:
        n = len(self.L)
        out = []
        for _ in range(self.r - 2):
            code, d = divmod(int(code), n)
            out.append(d)
        return tuple(reversed(out))

    def with_flipped_sign(self, i: int) -> TauFamily:
        """Copy with tau_i negated (fault injection)."""
        coeffs = self.coeffs.copy()
        coeffs[i] *= -1
        return TauFamily(self.r, self.L, self.C, self.keys, coeffs, self.c1_order)

    def with_perturbed_coefficient(self, i: int, t: int, delta: int = 1) -> TauFamily:
        """Copy with the t-th coefficient of tau_i shifted by delta (fault injection)."""
        coeffs = self.coeffs.copy()
        coeffs[i, t] += delta
        return TauFamily(self.r, self.L, self.C, self.keys, coeffs, self.c1_order)


@lru_cache(maxsize=None)
def tau_family(r: int) -> TauFamily:
    L, C = lines(r), conic_classes(r)
    base_keys, base_coeffs = to_arrays(tau_c1(r, L))
    k = r - 2
    keys = np.empty((len(C), len(base_keys), k), dtype=np.int64)
    coeffs = np.empty((len(C), len(base_keys)), dtype=np.int64)
    for idx, w in enumerate(C.witnesses):
        perm = L.permutation(w)
        sorted_keys, sign = sort_rows_with_sign(perm[base_keys])
        if (sign == 0).any():
            raise IdentityError("Weyl action collapsed two lines")
        keys[idx] = sorted_keys
        coeffs[idx] = sign * base_coeffs * signature(w)
    return TauFamily(r, L, C, keys, coeffs, c1_fiber_order(L))


def _aggregate(T: TauFamily) -> tuple[np.ndarray, np.ndarray]:
    codes = T.key_codes.ravel()
    uniq, inv = np.unique(codes, return_inverse=True)
    total = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(total, inv, T.coeffs.ravel())
    return uniq, total


def hlog_sum(r: int, T: TauFamily | None = None) -> WedgeVector:
    """sum_c tau_c; raises IdentityError listing offending keys when nonzero."""
    T = tau_family(r) if T is None else T
    uniq, total = _aggregate(T)
    nz = np.nonzero(total)[0]
    if nz.size:
        bad = [(T.unpack(uniq[i]), int(total[i])) for i in nz[:10]]
        raise IdentityError(f"hlog^{r - 2} != 0 on X_{r}: {nz.size} nonzero coefficients, e.g. {bad}")
    return WedgeVector(r - 2)


def hlog_partial(r: int, exclude: list[int], T: TauFamily | None = None) -> WedgeVector:
    """sum of tau_c over conics whose index is not in `exclude` (no zero check)."""
    T = tau_family(r) if T is None else T
    keep = np.setdiff1d(np.arange(len(T)), exclude)
    out = WedgeVector(r - 2)
    for i in keep:
        out = out + T.tau(int(i))
    return out


def epsilon_sign(c: PicClass, fiber_order: list[ReducibleFiber], T: TauFamily) -> int:
    """The s = +-1 with tau_c = s * residue_wedge(c, fiber_order)."""
    eta = residue_wedge(c, fiber_order, T.L)
    t = T.tau_of(c)
    if t == eta:
        return 1
    if t == -eta:
        return -1
    raise IdentityError(f"tau_c is not +- the residue wedge for {c}")


@dataclass
class GraphReport:
    r: int
    n_vertices: int
    n_keys: int
    n_edges: int
    n_components: int
    pair_violations: list[tuple[tuple[int, ...], list[int]]]

    @property
    def connected(self) -> bool:
        return self.n_components == 1

    @property
    def pairs_ok(self) -> bool:
        return not self.pair_violations


def key_occurrences(T: TauFamily):
    """For every distinct key: the conic indices carrying it and their coefficients."""
    codes = T.key_codes.ravel()
    owner = np.repeat(np.arange(len(T)), T.key_codes.shape[1])
    coeff = T.coeffs.ravel()
    order = np.argsort(codes, kind="stable")
    codes, owner, coeff = codes[order], owner[order], coeff[order]
    uniq, start, counts = np.unique(codes, return_index=True, return_counts=True)
    return uniq, start, counts, owner, coeff


def coefficient_graph(r: int, T: TauFamily | None = None, check: bool = True) -> GraphReport:
    """Graph on conics joined when their tau share a key; checks the pair structure."""
    T = tau_family(r) if T is None else T
    uniq, start, counts, owner, coeff = key_occurrences(T)
    violations = []
    bad_count = np.nonzero(counts != 2)[0]
    for i in bad_count[:10]:
        s = start[i]
        violations.append((T.unpack(uniq[i]), owner[s:s + counts[i]].tolist()))
    good = np.nonzero(counts == 2)[0]
    a, b = owner[start[good]], owner[start[good] + 1]
    ca, cb = coeff[start[good]], coeff[start[good] + 1]
    not_opposite = np.nonzero(ca + cb != 0)[0]
    for i in not_opposite[:10]:
        violations.append((T.unpack(uniq[good[i]]), [int(a[i]), int(b[i])]))
    n = len(T)
    adj = coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    edges = {(min(x, y), max(x, y)) for x, y in zip(a.tolist(), b.tolist())}
    report = GraphReport(r, n, len(uniq), len(edges), int(ncomp), violations)
    if check and (not report.pairs_ok or not report.connected):
        raise IdentityError(
            f"coefficient graph on X_{r}: {len(bad_count)} keys without exactly two owners, "
            f"{len(not_opposite)} non-opposite pairs, {ncomp} components; e.g. {violations[:3]}"
        )
    return report


def tau_matrix(T: TauFamily):
    """Sparse kappa x N integer matrix of the tau_c in the sorted-key basis."""
    uniq, inv = np.unique(T.key_codes.ravel(), return_inverse=True)
    rows = np.repeat(np.arange(len(T)), T.key_codes.shape[1])
    return coo_matrix((T.coeffs.ravel(), (rows, inv)), shape=(len(T), len(uniq))).tocsr()


def relation_space_dim(r: int, T: TauFamily | None = None, method: str | None = None) -> tuple[int, str]:
    """Dimension of {a : sum_c a_c tau_c = 0}, with the method used.

    method "exact": rank of the Gram matrix M M^T over Q (equals rank M);
    "graph": pair structure plus connectivity of the coefficient graph;
    "modular": rank of M M^T mod p, which is exact here because the all-ones
    relation caps the rational rank at kappa - 1.
    """
    T = tau_family(r) if T is None else T
    method = method or ("exact" if r <= 7 else "graph")
    n = len(T)
    if method == "exact":
        m = tau_matrix(T)
        gram_m = (m @ m.T).toarray()
        dim = n - rank_exact(gram_m.tolist())
    elif method == "graph":
        report = coefficient_graph(r, T)
        dim = 1 if report.connected and report.pairs_ok else n
    elif method == "modular":
        hlog_sum(r, T)
        m = tau_matrix(T)
        rank_p = rank_mod_p((m @ m.T).toarray())
        if rank_p != n - 1:
            raise IdentityError(f"modular rank {rank_p} does not certify kappa - 1 = {n - 1}")
        dim = 1
    else:
        raise ValueError(f"unknown method {method!r}")
    if dim != 1:
        raise IdentityError(f"relation space on X_{r} has dimension {dim}, expected 1")
    return dim, method


def lambda_key(r: int, L: LineSet | None = None) -> tuple[int, ...]:
    """Sorted key of e_3 ^ ... ^ e_r."""
    L = lines(r) if L is None else L
    return tuple(sorted(L.index[e(i, r)] for i in range(3, r + 1)))


def exceptional_support(T: TauFamily) -> bool:
    """Whether every key of every tau_c consists of pairwise disjoint lines."""
    inter = T.L.intersections
    k = T.r - 2
    for i in range(k):
        for j in range(i + 1, k):
            if (inter[T.keys[..., i], T.keys[..., j]] != 0).any():
                return False
    return True


def verification_record(r: int, T: TauFamily | None = None) -> dict:
    T = tau_family(r) if T is None else T
    record: dict = {"r": r, "lines": len(T.L), "conics": len(T.C), "tau_terms": int(T.keys.shape[1])}
    try:
        hlog_sum(r, T)
        record["hlog_zero"] = True
    except IdentityError as exc:
        record["hlog_zero"] = False
        record["failure"] = f"Lemma hlog = 0: {exc}"
        return record
    try:
        report = coefficient_graph(r, T)
    except IdentityError as exc:
        record["failure"] = f"pair structure / connectivity: {exc}"
        return record
    record["graph"] = {
        "keys": report.n_keys, "edges": report.n_edges,
        "components": report.n_components, "pairs_ok": report.pairs_ok,
    }
    dim, method = relation_space_dim(r, T)
    record["relation_space_dim"] = dim
    record["relation_method"] = method
    return record
