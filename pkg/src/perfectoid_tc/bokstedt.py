"""Bookkeeping for the Bökstedt spectral sequence of THH(F_p).

Monomials are exponent tuples over an ordered generator list (coefficient
generators of C first, then the exterior d-symbols, then the divided-power
ones). Elements are dicts ``{monomial: coefficient mod p}``; tensors are
dicts ``{(left, right): coefficient}``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property

from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from .base_rings import is_prime
from .errors import ProfileError

POLYNOMIAL = "polynomial"
EXTERIOR = "exterior"
DIVIDED = "divided-power"
TRUNCATED = "truncated-polynomial"


@dataclass(frozen=True)
class Generator:
    name: str
    kind: str
    bidegree: tuple[int, int]
    family: str
    index: int
    height: int | None = None

    @property
    def total(self) -> int:
        return self.bidegree[0] + self.bidegree[1]


@dataclass
class BigradedAlgebraSpec:
    p: int
    generators: list[Generator]

    def __post_init__(self):
        for g in self.generators:
            if g.bidegree[0] < 0:
                raise ProfileError(f"{g.name} has negative filtration")

    @cached_property
    def position(self) -> dict[str, int]:
        return {g.name: i for i, g in enumerate(self.generators)}

    def gen(self, name: str) -> tuple[int, ...]:
        mono = [0] * len(self.generators)
        mono[self.position[name]] = 1
        return tuple(mono)

    def has(self, name: str) -> bool:
        return name in self.position

    @property
    def unit(self) -> tuple[int, ...]:
        return (0,) * len(self.generators)

    def bidegree(self, mono) -> tuple[int, int]:
        s = sum(e * g.bidegree[0] for e, g in zip(mono, self.generators))
        u = sum(e * g.bidegree[1] for e, g in zip(mono, self.generators))
        return s, u

    def degree(self, mono) -> int:
        return sum(self.bidegree(mono))

    def _odd(self, i: int) -> bool:
        return self.p != 2 and self.generators[i].total % 2 == 1

    def mul_mono(self, a, b) -> tuple[int, tuple | None]:
        """a * b = coeff * mono, with Koszul signs for odd generators."""
        p = self.p
        coeff, out = 1, []
        for g, x, y in zip(self.generators, a, b):
            if g.kind == POLYNOMIAL:
                out.append(x + y)
            elif g.kind == EXTERIOR:
                if x and y:
                    return 0, None
                out.append(x + y)
            elif g.kind == DIVIDED:
                coeff = coeff * math.comb(x + y, x) % p
                out.append(x + y)
            else:
                if x + y >= g.height:
                    return 0, None
                out.append(x + y)
        if not coeff:
            return 0, None
        odd = [i for i in range(len(a)) if self._odd(i)]
        swaps = sum(b[i] * a[j] for i in odd for j in odd if j > i)
        if swaps % 2:
            coeff = -coeff % p
        return coeff, tuple(out)

    def mul(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                c, m = self.mul_mono(a, b)
                if c:
                    out[m] = (out.get(m, 0) + c * ca * cb) % self.p
        return {m: c for m, c in out.items() if c}

    def add(self, x: dict, y: dict, scale: int = 1) -> dict:
        out = dict(x)
        for m, c in y.items():
            out[m] = (out.get(m, 0) + scale * c) % self.p
        return {m: c for m, c in out.items() if c}

    def element_degree(self, x: dict) -> int:
        degs = {self.degree(m) for m in x}
        if len(degs) > 1:
            raise ValueError("element is not homogeneous")
        return degs.pop() if degs else 0

    def format(self, mono) -> str:
        parts = []
        for g, e in zip(self.generators, mono):
            if e:
                parts.append(g.name if e == 1 else (f"{g.name}^[{e}]" if g.kind == DIVIDED else f"{g.name}^{e}"))
        return "*".join(parts) or "1"

    def restrict(self, families) -> "BigradedAlgebraSpec":
        return BigradedAlgebraSpec(self.p, [g for g in self.generators if g.family in families])


def _xi_degree(p: int, i: int) -> int:
    return 2**i - 1 if p == 2 else 2 * (p**i - 1)


def dual_steenrod(p: int, max_degree: int | None = None) -> BigradedAlgebraSpec:
    """C: polynomial on xi_i (i >= 1), tensor exterior on tau_i (i >= 0) for p odd.

    Without ``max_degree`` the generators with index at most 3 are listed.
    """
    if not is_prime(p):
        raise ProfileError(f"{p} is not prime")
    keep = (lambda i, d: i <= 3) if max_degree is None else (lambda i, d: d <= max_degree)
    gens = []
    i = 0
    while True:
        added = False
        if p != 2 and keep(i, 2 * p**i - 1):
            gens.append(Generator(f"tau_{i}", EXTERIOR, (0, 2 * p**i - 1), "tau", i))
            added = True
        if i >= 1 and keep(i, _xi_degree(p, i)):
            gens.append(Generator(f"xi_{i}", POLYNOMIAL, (0, _xi_degree(p, i)), "xi", i))
            added = True
        if not added and i >= 1:
            break
        i += 1
    gens.sort(key=lambda g: (g.family != "xi", g.index))
    return BigradedAlgebraSpec(p, gens)


def e2_generators(p: int, D: int) -> BigradedAlgebraSpec:
    """C together with the d-symbols of total degree at most D."""
    gens = list(dual_steenrod(p, D).generators)
    i = 1
    while True:
        bideg = (1, 2**i - 1) if p == 2 else (1, 2 * p**i - 2)
        if sum(bideg) > D:
            break
        gens.append(Generator(f"dxi_{i}", EXTERIOR, bideg, "dxi", i))
        i += 1
    if p != 2:
        i = 0
        while 2 * p**i <= D:
            gens.append(Generator(f"dtau_{i}", DIVIDED, (1, 2 * p**i - 1), "dtau", i))
            i += 1
    return BigradedAlgebraSpec(p, gens)


def enumerate_monomials(algebra: BigradedAlgebraSpec, D: int) -> list[tuple]:
    """All monomials of total degree at most D."""
    gens = algebra.generators
    out = []

    def rec(i, prefix, deg):
        if i == len(gens):
            out.append(tuple(prefix))
            return
        g = gens[i]
        top = 1 if g.kind == EXTERIOR else (g.height - 1 if g.kind == TRUNCATED else D)
        e = 0
        while e <= top and deg + e * g.total <= D:
            prefix.append(e)
            rec(i + 1, prefix, deg + e * g.total)
            prefix.pop()
            e += 1
            if g.total == 0:
                break

    rec(0, [], 0)
    return sorted(out, key=lambda m: (algebra.degree(m), algebra.bidegree(m), m))


# ---------------------------------------------------------------------------
# pages


@dataclass
class PoincareSeries:
    """Dimensions by bidegree (filtration s, internal u), truncated at total degree D."""

    coefficients: dict[tuple[int, int], int]
    D: int

    def __post_init__(self):
        if any(c < 0 for c in self.coefficients.values()):
            raise ValueError("negative dimension")

    def by_total(self) -> list[int]:
        out = [0] * (self.D + 1)
        for (s, u), c in self.coefficients.items():
            if s + u <= self.D:
                out[s + u] += c
        return out

    def to_json(self) -> dict:
        return {"D": self.D, "coefficients": [[s, u, c] for (s, u), c in sorted(self.coefficients.items()) if c]}


@dataclass
class SSPage:
    p: int
    r: int
    D: int
    certified: int
    algebra: BigradedAlgebraSpec
    basis: list[dict]
    differential: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def series(self) -> PoincareSeries:
        coeffs: dict = {}
        for v in self.basis:
            b = self.algebra.bidegree(next(iter(v)))
            coeffs[b] = coeffs.get(b, 0) + 1
        return PoincareSeries(coeffs, self.D)

    def to_json(self) -> dict:
        A = self.algebra
        fmt = lambda v: " + ".join(f"{c}*{A.format(m)}" if c != 1 else A.format(m) for m, c in sorted(v.items()))
        return {
            "page": self.r,
            "D": self.D,
            "certified_degree": self.certified,
            "basis": [fmt(v) for v in self.basis],
            "differentials": [[A.format(m), fmt(t)] for m, t in sorted(self.differential.items()) if t],
            "notes": self.notes,
        }


def e2_page(p: int, D: int) -> SSPage:
    if D < 2:
        raise ProfileError("D must be at least 2")
    A = e2_generators(p, D)
    basis = [{m: 1} for m in enumerate_monomials(A, D)]
    return SSPage(p, 2, D, D, A, basis)


def differential_on_monomial(A: BigradedAlgebraSpec, mono, units: dict[int, int] | None = None) -> dict:
    """d^(p-1) as a C-linear derivation: dtau_i^[n] -> a_i dxi_(i+1) dtau_i^[n-p]."""
    p = A.p
    out: dict = {}
    for idx, g in enumerate(A.generators):
        n = mono[idx]
        if g.family != "dtau" or n < p:
            continue
        a = 1 if units is None else units.get(g.index, 1) % p
        target = f"dxi_{g.index + 1}"
        if not a or not A.has(target):
            continue
        rest = list(mono)
        rest[idx] = n - p
        # sign of passing d across everything to the left of the divided-power block
        sign = -1 if sum(e * h.total for e, h in zip(mono[:idx], A.generators[:idx])) % 2 else 1
        left = tuple(e if h.family != "dtau" else 0 for e, h in zip(rest, A.generators))
        right = tuple(e if h.family == "dtau" else 0 for e, h in zip(rest, A.generators))
        c1, m1 = A.mul_mono(left, A.gen(target))
        if not c1:
            continue
        c2, m2 = A.mul_mono(m1, right)
        if c2:
            out[m2] = (out.get(m2, 0) + sign * a * c1 * c2) % p
    return {m: c for m, c in out.items() if c}


def _matrix(rows: int, cols: int, entries: dict, p: int) -> DomainMatrix:
    K = GF(p)
    dense = [[K(0)] * cols for _ in range(rows)]
    for (i, j), c in entries.items():
        dense[i][j] = K(c)
    return DomainMatrix(dense, (rows, cols), K)


def _rank(rows, cols, entries, p) -> int:
    if not rows or not cols or not entries:
        return 0
    return _matrix(rows, cols, entries, p).rank()


def _group_by_bidegree(A, monos):
    out: dict = {}
    for m in monos:
        out.setdefault(A.bidegree(m), []).append(m)
    return out


def apply_differential(page: SSPage, units: dict[int, int] | None = None) -> SSPage:
    """Pass from E^(p-1) = E^2 to E^p by taking homology of the installed d^(p-1)."""
    p, A = page.p, page.algebra
    if p == 2:
        return SSPage(p, page.r, page.D, page.certified, A, page.basis, {}, page.notes + ["all differentials vanish for p = 2"])
    r = p - 1
    monos = [next(iter(v)) for v in page.basis]
    diff = {m: differential_on_monomial(A, m, units) for m in monos}
    groups = _group_by_bidegree(A, monos)
    K = GF(p)
    new_basis = []
    for (s, u), src in sorted(groups.items()):
        idx = {m: i for i, m in enumerate(src)}
        tgt = groups.get((s - r, u + r - 1), [])
        tidx = {m: i for i, m in enumerate(tgt)}
        out_entries = {}
        for j, m in enumerate(src):
            for t, c in diff[m].items():
                out_entries[(tidx[t], j)] = c
        incoming = groups.get((s + r, u - r + 1), [])
        in_cols = []
        for m in incoming:
            col = [K(0)] * len(src)
            for t, c in diff[m].items():
                col[idx[t]] = K(c)
            if any(col):
                in_cols.append(col)
        if tgt and out_entries:
            kernel = _matrix(len(tgt), len(src), out_entries, p).nullspace().to_Matrix().tolist()
        else:
            kernel = [[1 if i == j else 0 for i in range(len(src))] for j in range(len(src))]
        span = [list(c) for c in in_cols]
        rank = _span_rank(span, len(src), K)
        for vec in kernel:
            trial = span + [[K(int(x)) for x in vec]]
            if _span_rank(trial, len(src), K) > rank:
                span, rank = trial, rank + 1
                new_basis.append({src[i]: int(x) % p for i, x in enumerate(vec) if int(x) % p})
    notes = list(page.notes)
    certified = page.certified
    if page.D > 0:
        certified = min(certified, page.D - 1)
        notes.append(f"sources above total degree {page.D} are untabulated; certified through {certified}")
    return SSPage(p, p, page.D, certified, A, new_basis, diff, notes)


def _span_rank(vectors, n, K) -> int:
    if not vectors:
        return 0
    return DomainMatrix([list(v) for v in vectors], (len(vectors), n), K).rank()


def d_squared_zero(page: SSPage, units=None) -> bool:
    A = page.algebra
    for v in page.basis:
        for m, c in differential_on_monomial(A, next(iter(v)), units).items():
            if differential_on_monomial(A, m, units):
                return False
    return True


def bidegree_shift_ok(page: SSPage, units=None) -> bool:
    """Every tabulated pair moves by (-(p-1), p-2)."""
    A, r = page.algebra, page.p - 1
    for v in page.basis:
        m = next(iter(v))
        s, u = A.bidegree(m)
        for t in differential_on_monomial(A, m, units):
            if A.bidegree(t) != (s - r, u + r - 1):
                return False
    return True


def conservation_check(before: SSPage, after: SSPage) -> bool:
    """dim E^r - dim E^(r+1) = 2 rank d^r on the tabulated range."""
    p, A = before.p, before.algebra
    monos = [next(iter(v)) for v in before.basis]
    pos = {m: i for i, m in enumerate(monos)}
    entries = {}
    for j, m in enumerate(monos):
        for t, c in differential_on_monomial(A, m).items():
            entries[(pos[t], j)] = c
    rank = _rank(len(monos), len(monos), entries, p) if p != 2 else 0
    return len(before.basis) - len(after.basis) == 2 * rank


def _series_product(degrees_and_kinds, D) -> list[int]:
    """Total-degree Poincaré series of a free graded-commutative algebra on the given generators."""
    series = [1] + [0] * D
    for deg, kind in degrees_and_kinds:
        if kind == EXTERIOR:
            factor = {0: 1, deg: 1}
        else:
            factor = {k * deg: 1 for k in range(D // deg + 1)}
        new = [0] * (D + 1)
        for a, ca in enumerate(series):
            if ca:
                for b in factor:
                    if a + b <= D:
                        new[a + b] += ca
        series = new
    return series


def expected_series(p: int, D: int) -> list[int]:
    """series(C) / (1 - s^2): the answer C[x] with x in degree 2."""
    C = dual_steenrod(p, D)
    gens = [(g.total, g.kind) for g in C.generators] + [(2, POLYNOMIAL)]
    return _series_product(gens, D)


def einfty_series(p: int, D: int, units=None) -> list[int]:
    page = e2_page(p, D + 1)
    final = apply_differential(page, units)
    return final.series().by_total()[: D + 1]


def einfty_check(p: int, D: int, units: dict[int, int] | None = None) -> bool:
    """E^infinity has the total-degree Poincaré series of C[x] through degree D."""
    return einfty_series(p, D, units) == expected_series(p, D)


# ---------------------------------------------------------------------------
# indecomposables and primitives of E^2 over C


def _relative_algebra(p: int, D: int) -> tuple[BigradedAlgebraSpec, list]:
    A = e2_generators(p, D).restrict({"dxi", "dtau"})
    return A, enumerate_monomials(A, D)


def indecomposable_dims(p: int, D: int) -> dict[tuple[int, int], int]:
    """dim (I/I^2)_(s,u) for the augmentation ideal I of F_p tensored over C with E^2."""
    A, monos = _relative_algebra(p, D)
    positive = [m for m in monos if A.bidegree(m)[0] > 0]
    groups = _group_by_bidegree(A, positive)
    out = {}
    for b, ms in groups.items():
        idx = {m: i for i, m in enumerate(ms)}
        rows = []
        for x in positive:
            for y in positive:
                bx, by = A.bidegree(x), A.bidegree(y)
                if (bx[0] + by[0], bx[1] + by[1]) != b:
                    continue
                c, m = A.mul_mono(x, y)
                if c:
                    row = [0] * len(ms)
                    row[idx[m]] = c
                    rows.append(row)
        K = GF(p)
        rank = _span_rank([[K(x) for x in r] for r in rows], len(ms), K) if rows else 0
        out[b] = len(ms) - rank
    return out


def _shuffle_sign(A, mono, left) -> int:
    """Sign of splitting mono into left * right in the coproduct."""
    odd = [i for i in range(len(mono)) if A._odd(i)]
    right = [a - b for a, b in zip(mono, left)]
    swaps = sum(right[i] * left[j] for i in odd for j in odd if j > i)
    return -1 if swaps % 2 else 1


def reduced_coproduct(A: BigradedAlgebraSpec, mono) -> dict:
    """Sum over splittings with both factors nontrivial; all generators primitive."""
    ranges = [range(e + 1) for e in mono]
    out = {}
    for left in itertools.product(*ranges):
        if not any(left) or tuple(left) == tuple(mono):
            continue
        right = tuple(a - b for a, b in zip(mono, left))
        c = 1
        for g, a, b in zip(A.generators, left, right):
            if g.kind == POLYNOMIAL:
                c *= math.comb(a + b, a)
        c = c * _shuffle_sign(A, mono, left) % A.p
        if c:
            out[(tuple(left), right)] = c
    return out


def primitive_dims(p: int, D: int) -> dict[tuple[int, int], int]:
    A, monos = _relative_algebra(p, D)
    groups = _group_by_bidegree(A, [m for m in monos if A.bidegree(m)[0] > 0])
    out = {}
    for b, ms in groups.items():
        images = [reduced_coproduct(A, m) for m in ms]
        keys = sorted({k for im in images for k in im})
        kidx = {k: i for i, k in enumerate(keys)}
        entries = {(kidx[k], j): c for j, im in enumerate(images) for k, c in im.items()}
        out[b] = len(ms) - _rank(len(keys), len(ms), entries, p)
    return out


def _is_power(n: int, p: int) -> bool:
    while n % p == 0 and n > 1:
        n //= p
    return n == 1


def qe2_pattern_holds(p: int, D: int) -> bool:
    return all(dim == 0 or _is_power(s, p) for (s, u), dim in indecomposable_dims(p, D).items())


def pe2_pattern_holds(p: int, D: int) -> bool:
    return all(dim == 0 or s == 1 for (s, u), dim in primitive_dims(p, D).items())


# ---------------------------------------------------------------------------
# coaction


@dataclass
class CoactionTable:
    p: int
    algebra: BigradedAlgebraSpec
    table: dict[str, dict]

    def to_json(self) -> dict:
        A = self.algebra
        return {
            name: [[A.format(l), A.format(r), c] for (l, r), c in sorted(t.items())] for name, t in self.table.items()
        }


def _tensor_mul(A, x: dict, y: dict) -> dict:
    p = A.p
    out: dict = {}
    for (a, b), c1 in x.items():
        for (c, d), c2 in y.items():
            k1, ac = A.mul_mono(a, c)
            if not k1:
                continue
            k2, bd = A.mul_mono(b, d)
            if not k2:
                continue
            sign = -1 if A.degree(b) * A.degree(c) % 2 else 1
            key = (ac, bd)
            out[key] = (out.get(key, 0) + sign * k1 * k2 * c1 * c2) % p
    return {k: v for k, v in out.items() if v}


def _tensor_add(A, x, y):
    out = dict(x)
    for k, v in y.items():
        out[k] = (out.get(k, 0) + v) % A.p
    return {k: v for k, v in out.items() if v}


def _d_of_monomial(A, mono) -> dict:
    """The derivation xi_t -> dxi_t, tau_t -> dtau_t on coefficient monomials."""
    out = {}
    for idx, g in enumerate(A.generators):
        e = mono[idx]
        if not e or g.family not in ("xi", "tau"):
            continue
        dname = "d" + g.name
        if not A.has(dname):
            raise ValueError(f"{dname} outside the tabulated range")
        prefix = tuple(mono[:idx]) + (0,) * (len(mono) - idx)
        mid = [0] * len(mono)
        mid[idx] = e - 1
        suffix = (0,) * (idx + 1) + tuple(mono[idx + 1 :])
        sign = -1 if A.degree(prefix) % 2 else 1
        term = {prefix: sign * e % A.p}
        for piece in (tuple(mid), A.gen(dname), suffix):
            term = A.mul(term, {piece: 1})
        out = A.add(out, term)
    return out


def _id_tensor_d(A, t: dict) -> dict:
    out = {}
    for (a, b), c in t.items():
        sign = -1 if A.degree(a) % 2 else 1
        for m, k in _d_of_monomial(A, b).items():
            key = (a, m)
            out[key] = (out.get(key, 0) + sign * c * k) % A.p
    return {k: v for k, v in out.items() if v}


def coaction_table(p: int, D: int) -> CoactionTable:
    A = e2_generators(p, D)
    one = A.unit

    def xi_pow(t, e):
        if t == 0:
            return one
        mono = list(one)
        mono[A.position[f"xi_{t}"]] = e
        return tuple(mono)

    table = {}
    for g in A.generators:
        i = g.index
        if g.family == "xi":
            table[g.name] = {(xi_pow(s, 1), xi_pow(i - s, p**s)): 1 for s in range(i + 1)}
        elif g.family == "tau":
            t = {(one, A.gen(g.name)): 1}
            for s in range(i + 1):
                key = (A.gen(f"tau_{s}"), xi_pow(i - s, p**s))
                t[key] = (t.get(key, 0) + 1) % p
            table[g.name] = {k: v for k, v in t.items() if v}
    for g in A.generators:
        if g.family in ("dxi", "dtau"):
            base = g.name[1:]
            if base in table:
                table[g.name] = _id_tensor_d(A, table[base])
            else:
                table[g.name] = {(one, A.gen(g.name)): 1}
    return CoactionTable(p, A, table)


def _coaction_monomial(ct: CoactionTable, mono) -> dict:
    A = ct.algebra
    one = A.unit
    out = {(one, one): 1}
    for idx, g in enumerate(A.generators):
        e = mono[idx]
        if not e:
            continue
        img = ct.table[g.name]
        if g.kind == DIVIDED:
            plain = {(one, A.gen(g.name)): 1}
            extra = _tensor_add(A, img, {k: -v % A.p for k, v in plain.items()})
            if _tensor_mul(A, extra, extra):
                raise AssertionError(f"cross term of {g.name} is not square-zero")
            low = list(one)
            low[idx] = e - 1
            high = list(one)
            high[idx] = e
            factor = _tensor_add(A, {(one, tuple(high)): 1}, _tensor_mul(A, {(one, tuple(low)): 1}, extra))
        else:
            factor = {(one, one): 1}
            for _ in range(e):
                factor = _tensor_mul(A, factor, img)
        out = _tensor_mul(A, out, factor)
    return out


def coaction(elem: dict, p: int, D: int | None = None) -> dict:
    """epsilon(1 (x) elem), for elem a dict over the E^2 generators with total degree <= D."""
    ct = _table_for(p, elem, D)
    out = {}
    for m, c in elem.items():
        for k, v in _coaction_monomial(ct, m).items():
            out[k] = (out.get(k, 0) + c * v) % p
    return {k: v for k, v in out.items() if v}


def default_range(p: int) -> int:
    return 2 * p * p


def _table_for(p, elem, D):
    ct = _cached_table(p, D if D is not None else default_range(p))
    for m in elem:
        if len(m) != len(ct.algebra.generators) or ct.algebra.degree(m) > ct_range(ct):
            raise ValueError("element outside the tabulated degree range")
    return ct


def ct_range(ct: CoactionTable) -> int:
    return max(g.total for g in ct.algebra.generators)


_TABLES: dict = {}


def _cached_table(p, D):
    if (p, D) not in _TABLES:
        _TABLES[(p, D)] = coaction_table(p, D)
    return _TABLES[(p, D)]


def element(p: int, name_powers: dict[str, int], D: int | None = None) -> dict:
    """Monomial of E^2 from {generator name: exponent} in the coaction's tabulated algebra."""
    A = _cached_table(p, D if D is not None else default_range(p)).algebra
    mono = [0] * len(A.generators)
    for name, e in name_powers.items():
        if not A.has(name):
            raise ValueError(f"{name} outside the tabulated degree range")
        mono[A.position[name]] = e
    return {tuple(mono): 1}


def horizontal_check(elem: dict, p: int, D: int | None = None) -> bool:
    A = _table_for(p, elem, D).algebra
    return coaction(elem, p, D) == {(A.unit, m): c % p for m, c in elem.items() if c % p}


def horizontal_class(p: int) -> str:
    """Generator whose image is the degree-2 class x."""
    return "dxi_1" if p == 2 else "dtau_0"


# ---------------------------------------------------------------------------
# divided powers


def divided_power_mul(i: int, j: int, p: int) -> tuple[int, int]:
    """x^[i] x^[j] = coeff x^[i+j]; returns (coeff mod p, i + j)."""
    if i < 0 or j < 0:
        raise ValueError("divided-power indices are nonnegative")
    return math.comb(i + j, i) % p, i + j


# ---------------------------------------------------------------------------
# representatives of x^(p^i)


@dataclass(frozen=True)
class Step:
    lhs: str
    rhs: str
    rule: str
    degree: int

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "rule": self.rule, "degree": self.degree}


def _q_shift(p: int, s: int) -> int:
    return s if p == 2 else 2 * s * (p - 1)


def _gen_degree(p: int, name: str) -> int:
    fam, i = name.rsplit("_", 1)
    i = int(i)
    base = {"xi": _xi_degree(p, i), "tau": 2 * p**i - 1}
    if fam.startswith("d"):
        return base[fam[1:]] + 1
    return base[fam]


def representative_chain(p: int, i: int) -> list[Step]:
    """Rewrite trace showing x^(p^i) is represented by dxi_(i+1) (p = 2) or dtau_i (p odd).

    Axioms: the power relation Q^s(y) = y^p for |y| = 2s (y^2 for |y| = s
    when p = 2), commutation of Q^s with d, and the Steinberger relations
    Q^(2^j)(xi_j) = xi_(j+1), Q^(p^j)(tau_j) = tau_(j+1).
    """
    if i < 0:
        raise ValueError("i must be nonnegative")
    fam = "xi" if p == 2 else "tau"
    first = 1 if p == 2 else 0
    steps = [Step("x", f"d{fam}_{first}", "definition", 2)]
    for j in range(1, i + 1):
        prev = f"d{fam}_{first + j - 1}"
        s = 2**j if p == 2 else p ** (j - 1)
        src = f"{fam}_{first + j - 1}"
        dst = f"{fam}_{first + j}"
        power = f"x^{p**j}"
        prev_power = f"x^{p ** (j - 1)}" if j > 1 else "x"
        deg = 2 * p**j
        steps.append(Step(power, f"Q^{s}({prev_power})", "power", deg))
        steps.append(Step(f"Q^{s}({prev_power})", f"Q^{s}({prev})", "induction", deg))
        steps.append(Step(f"Q^{s}({prev})", f"d(Q^{s}({src}))", "d-commute", deg))
        steps.append(Step(f"d(Q^{s}({src}))", f"d{dst}", "steinberger", deg))
    return steps


def _term_degree(p: int, term: str) -> int:
    if term == "x":
        return 2
    if term.startswith("x^"):
        return 2 * int(term[2:])
    if term.startswith("Q^"):
        s, inner = term[2:].split("(", 1)
        return int(s) * (1 if p == 2 else 2 * (p - 1)) + _term_degree(p, inner[:-1])
    if term.startswith("d(") and term.endswith(")"):
        return 1 + _term_degree(p, term[2:-1])
    return _gen_degree(p, term)


def verify_chain(steps: list[Step], p: int) -> bool:
    """Each step preserves degree and instantiates its axiom; the chain ends at a d-generator."""
    for st in steps:
        dl, dr = _term_degree(p, st.lhs), _term_degree(p, st.rhs)
        if st.rule == "definition":
            if dr != 2 or st.lhs != "x":
                return False
            continue
        if dl != dr or dl != st.degree:
            return False
        if st.rule == "power":
            s, inner = st.rhs[2:].split("(", 1)
            need = int(s) if p == 2 else 2 * int(s)
            if _term_degree(p, inner[:-1]) != need:
                return False
        elif st.rule == "steinberger":
            s, inner = st.lhs[4:-1].split("(", 1)
            fam, j = inner[:-1].rsplit("_", 1)
            if int(s) != (2 ** int(j) if p == 2 else p ** int(j)) or st.rhs != f"d{fam}_{int(j) + 1}":
                return False
        elif st.rule not in ("induction", "d-commute"):
            return False
    last = steps[-1].rhs
    return last.startswith("dxi_") or last.startswith("dtau_")


def coaction_ring_map_check(p: int, pairs: int = 100, seed: int = 0, D: int | None = None) -> bool:
    """epsilon(ab) = epsilon(a) epsilon(b) on random monomial pairs with deg(ab) <= D."""
    ct = _cached_table(p, D if D is not None else default_range(p))
    A = ct.algebra
    top = ct_range(ct)
    monos = enumerate_monomials(A, top)
    rng = random.Random(seed)
    done = 0
    while done < pairs:
        a, b = rng.choice(monos), rng.choice(monos)
        if A.degree(a) + A.degree(b) > top:
            continue
        done += 1
        lhs = coaction(A.mul({a: 1}, {b: 1}), p, D)
        rhs = _tensor_mul(A, coaction({a: 1}, p, D), coaction({b: 1}, p, D))
        if lhs != rhs:
            return False
    return True
