"""Finite-group side of THH and TC of group rings R[G].

Covers conjugacy data for the free-loop decomposition, the p-adic Rees
quotients A_p / I_p^(m+1), and the cofiber tables of the assembly map.
The boundary map of the cofiber sequence is not modeled; tables carry a
flag saying so.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import sympy

from .ainf import PerfectoidModel
from .base_rings import FiniteField, is_prime
from .errors import PrecisionError, ProfileError

BOUNDARY_FLAG = "boundary map of the cofiber sequence not modeled; extensions unresolved"


class FiniteGroup:
    """Group given by a multiplication table on indices 0..n-1."""

    def __init__(self, table, name: str = "G", labels=None):
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0] if t.ndim == 2 else 0
        if t.ndim != 2 or t.shape != (n, n) or n == 0:
            raise ProfileError("table must be a nonempty square array")
        if t.min() < 0 or t.max() >= n:
            raise ProfileError("table entries out of range")
        ids = [e for e in range(n) if (t[e] == np.arange(n)).all() and (t[:, e] == np.arange(n)).all()]
        if not ids:
            raise ProfileError("no identity element")
        self.identity = ids[0]
        for row in t:
            if sorted(row) != list(range(n)):
                raise ProfileError("table is not a Latin square, so inverses fail")
        # lhs[a, b, c] = (ab)c, rhs[a, b, c] = a(bc)
        if not (t[t] == t[:, t]).all():
            raise ProfileError("table is not associative")
        self.table = t
        self.name = name
        self.labels = labels or [str(i) for i in range(n)]
        self._inverse = [int(np.flatnonzero(t[a] == self.identity)[0]) for a in range(n)]

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def power(self, a: int, n: int) -> int:
        if n < 0:
            a, n = self.inv(a), -n
        out = self.identity
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.table.tolist()}

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"


def from_elements(elements, op, name: str, label=str) -> FiniteGroup:
    elements = list(elements)
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[op(a, b)] for b in elements] for a in elements]
    return FiniteGroup(table, name, [label(e) for e in elements])


def cyclic(n: int) -> FiniteGroup:
    return from_elements(range(n), lambda a, b: (a + b) % n, f"C{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    elems = list(itertools.product(range(G.order), range(H.order)))
    return from_elements(elems, lambda a, b: (G.mul(a[0], b[0]), H.mul(a[1], b[1])), f"{G.name}x{H.name}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of an n-gon, order 2n: (k, s) = r^k s^s."""
    elems = list(itertools.product(range(n), range(2)))

    def op(a, b):
        k1, s1 = a
        k2, s2 = b
        return ((k1 + (-k2 if s1 else k2)) % n, s1 ^ s2)

    return from_elements(elems, op, f"D{n}")


def dicyclic(n: int) -> FiniteGroup:
    """Order 4n: a^(2n) = 1, x^2 = a^n, x a x^-1 = a^-1; elements a^k x^e."""
    elems = list(itertools.product(range(2 * n), range(2)))

    def op(a, b):
        k1, e1 = a
        k2, e2 = b
        k = k1 + (-k2 if e1 else k2)
        if e1 and e2:
            k += n
        return (k % (2 * n), e1 ^ e2)

    return from_elements(elems, op, "Q8" if n == 2 else f"Dic{n}")


def _compose(p, q):
    return tuple(p[i] for i in q)


def permutation_group(generators, name: str) -> FiniteGroup:
    n = len(generators[0])
    ident = tuple(range(n))
    elems, frontier = {ident}, [ident]
    while frontier:
        g = frontier.pop()
        for s in generators:
            h = _compose(g, s)
            if h not in elems:
                elems.add(h)
                frontier.append(h)
    return from_elements(sorted(elems), _compose, name)


def symmetric(n: int) -> FiniteGroup:
    return from_elements(itertools.permutations(range(n)), _compose, f"S{n}")


def alternating4() -> FiniteGroup:
    return permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)], "A4")


def aut_cp_semidirect(p: int) -> FiniteGroup:
    """Aut(C_p) x| C_p as pairs (a, b), a in (Z/p)^*, with (a, b)(a', b') = (aa', b + ab')."""
    if not is_prime(p):
        raise ProfileError(f"{p} is not prime")
    elems = list(itertools.product(range(1, p), range(p)))
    return from_elements(elems, lambda x, y: (x[0] * y[0] % p, (x[1] + x[0] * y[1]) % p), f"Aut(C{p})xC{p}",
                         lambda e: f"({e[0]},{e[1]})")


def groups_up_to_order_12() -> list[FiniteGroup]:
    """One representative of each isomorphism class of order at most 12 (24 groups)."""
    C = cyclic
    return [
        C(1), C(2), C(3), C(4), direct_product(C(2), C(2)), C(5), C(6), symmetric(3), C(7),
        C(8), direct_product(C(4), C(2)), direct_product(direct_product(C(2), C(2)), C(2)), dihedral(4), dicyclic(2),
        C(9), direct_product(C(3), C(3)), C(10), dihedral(5), C(11),
        C(12), direct_product(C(6), C(2)), dihedral(6), alternating4(), dicyclic(3),
    ]


def load_table(path) -> FiniteGroup:
    """Read the JSON format {"order": n, "table": [[...], ...]}."""
    data = json.loads(Path(path).read_text())
    table = data["table"]
    if int(data["order"]) != len(table):
        raise ProfileError("order does not match the table size")
    return FiniteGroup(table, data.get("name", Path(path).stem))


# ---------------------------------------------------------------------------
# conjugacy


@dataclass
class ConjugacyClass:
    representative: int
    elements: list[int]
    centralizer: list[int]

    def to_json(self, G: FiniteGroup) -> dict:
        return {
            "representative": G.labels[self.representative],
            "size": len(self.elements),
            "centralizer_order": len(self.centralizer),
        }


@dataclass
class ConjugacyDecomposition:
    group: FiniteGroup
    classes: list[ConjugacyClass]

    def class_equation_holds(self) -> bool:
        n = self.group.order
        return sum(len(c.elements) for c in self.classes) == n and all(
            len(c.elements) * len(c.centralizer) == n for c in self.classes
        )

    def to_json(self) -> dict:
        return {"group": self.group.name, "order": self.group.order, "classes": [c.to_json(self.group) for c in self.classes]}


def conjugacy_classes(G: FiniteGroup) -> ConjugacyDecomposition:
    seen, classes = set(), []
    for x in range(G.order):
        if x in seen:
            continue
        orbit = sorted({G.mul(G.mul(g, x), G.inv(g)) for g in range(G.order)})
        seen.update(orbit)
        cent = [g for g in range(G.order) if G.mul(g, x) == G.mul(x, g)]
        classes.append(ConjugacyClass(x, orbit, cent))
    return ConjugacyDecomposition(G, classes)


@dataclass
class LoopSummand:
    representative: int
    centralizer: list[int]
    twist_order: int

    @property
    def trivial_twist(self) -> bool:
        return self.twist_order == 1

    def twist(self, G: FiniteGroup, n: int) -> int:
        """Image of n in the circle action: x^n."""
        return G.power(self.representative, n)


def loop_decomposition(G: FiniteGroup) -> list[LoopSummand]:
    """One summand BC_G(x) per conjugacy class, twisted by n -> x^n."""
    return [
        LoopSummand(c.representative, c.centralizer, G.element_order(c.representative))
        for c in conjugacy_classes(G).classes
    ]


# ---------------------------------------------------------------------------
# Rees construction


@dataclass
class ReesQuotient:
    """A_p / I_p^(m+1), recorded as its associated graded pieces I_p^j / I_p^(j+1)."""

    m: int
    base: str
    pieces: list[str]

    @property
    def rank(self) -> int:
        return len(self.pieces)

    def to_json(self) -> dict:
        return {"m": self.m, "base": self.base, "rank": self.rank, "pieces": self.pieces}


@dataclass
class ReesModel:
    kind: str
    p: int
    f: int
    precision: int
    notes: list[str] = field(default_factory=list)

    @property
    def base(self) -> str:
        return f"F_{self.p ** self.f}" if self.kind == "perfect" else "R"

    def quotient(self, m: int) -> ReesQuotient:
        if m > self.precision:
            raise PrecisionError(f"quotient level {m} exceeds the precision budget {self.precision}")
        if self.kind == "perfect":
            return ReesQuotient(m, self.base, [f"y^{j}" for j in range(m + 1)])
        return ReesQuotient(m, self.base, [f"xi_p^{j}" for j in range(m + 1)])

    def truncated_ring(self, m: int):
        """F_q[y]/y^(m+1) in the perfect case: (field, multiplication on coefficient lists)."""
        if self.kind != "perfect":
            raise ProfileError("only the perfect-field shortcut is a truncated power series ring")
        F = FiniteField(self.p, self.f)

        def mul(a, b):
            out = [0] * (m + 1)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    if i + j <= m:
                        out[i + j] = F.add(out[i + j], F.mul(x, y))
            return out

        return F, mul

    def surjection_kernel_rank(self, m: int) -> int:
        """Rank of ker(A_p/I_p^(m+2) -> A_p/I_p^(m+1))."""
        big, small = self.quotient(m + 1), self.quotient(m)
        if big.pieces[: small.rank] != small.pieces:
            raise AssertionError("quotient tower is not compatible")
        return big.rank - small.rank


def relation_consistency() -> bool:
    """In A_p[u, v_p]/(u v_p - xi_p), the substitutions v = p v_p, xi = p xi_p recover uv = xi."""
    u, v_p, xi_p, p = sympy.symbols("u v_p xi_p p")
    uv = sympy.expand(u * (p * v_p))
    reduced = uv.subs(u * v_p, xi_p)
    return sympy.simplify(reduced - p * xi_p) == 0


def rees_construction(model, precision: int) -> ReesModel:
    """A_p from (A, xi): the power-series shortcut for perfect fields, the rank-1 tower otherwise."""
    if isinstance(model, PerfectoidModel):
        kind, p, f = model.kind, model.profile.p, model.profile.f
    else:
        kind, p, f = model
    if kind not in ("perfect", "oc"):
        raise ProfileError(f"unknown model kind {kind}")
    notes = []
    if kind == "perfect":
        notes.append("p = 0 in the target ring; A_p/I_p^(m+1) presented as F_q[[y]]/y^(m+1), y represented by t_p x")
    else:
        notes.append("p-torsion-free case: xi = p xi_p, graded pieces R xi_p^j")
        if not relation_consistency():
            raise AssertionError("u v_p = xi_p is inconsistent with uv = xi")
    return ReesModel(kind, p, f, precision, notes)


@dataclass
class HomotopyGroupTable:
    rows: list[dict]
    notes: list[str] = field(default_factory=list)

    def row(self, degree: int) -> dict:
        for r in self.rows:
            if r["degree"] == degree:
                return r
        raise KeyError(degree)

    def to_json(self) -> dict:
        return {"rows": self.rows, "notes": self.notes}


def homotopy_orbit_groups(rees: ReesModel, M: int) -> HomotopyGroupTable:
    """pi_(2m) = A_p/I_p^(m+1) v_p^-(m+1) for m <= M; odd groups vanish."""
    rows = []
    for n in range(2 * M + 2):
        if n % 2:
            rows.append({"degree": n, "rank": 0, "base": rees.base, "description": "0"})
        else:
            q = rees.quotient(n // 2)
            rows.append({"degree": n, "rank": q.rank, "base": rees.base,
                         "description": f"{rees.base}-tower {'+'.join(q.pieces)} * v_p^-{q.m + 1}"})
    return HomotopyGroupTable(rows, list(rees.notes))


def cofiber_multiplicity(p: int) -> int:
    """Number of non-identity conjugacy classes of C_p, i.e. the copies in THH_hT[1] (x) C_p."""
    G = cyclic(p)
    return sum(1 for c in conjugacy_classes(G).classes if c.representative != G.identity)


def cofiber_table(rees: ReesModel, M: int) -> HomotopyGroupTable:
    """Degree n row: (p-1) copies of pi_(n-1) of the homotopy orbits."""
    orbit = homotopy_orbit_groups(rees, M)
    mult = cofiber_multiplicity(rees.p)
    rows = []
    for n in range(2 * M + 3):
        src = orbit.row(n - 1) if n >= 1 else {"rank": 0, "description": "0"}
        rows.append({"degree": n, "multiplicity": mult, "orbit_rank": src["rank"], "rank": mult * src["rank"],
                     "base": rees.base})
    return HomotopyGroupTable(rows, [BOUNDARY_FLAG])


def semidirect_split(rees: ReesModel, p: int, M: int) -> HomotopyGroupTable:
    """Columns for G = Aut(C_p) x| C_p: assembly source, THH_hT[1], and the split Aut(C_p) summand."""
    G = aut_cp_semidirect(p)
    decomp = conjugacy_classes(G)
    others = [c for c in decomp.classes if c.representative != G.identity]
    split = sum(1 for c in others if len(c.centralizer) == p - 1)
    thh_classes = sum(1 for c in others if len(c.centralizer) == p)
    orbit = homotopy_orbit_groups(rees, M)
    rows = []
    for n in range(2 * M + 3):
        src = orbit.row(n - 1) if n >= 1 else {"rank": 0}
        rows.append({
            "degree": n,
            "assembly": "TC(R, Z_p) (x) BG_+",
            "thh_multiplicity": thh_classes,
            "thh_rank": thh_classes * src["rank"],
            "split_multiplicity": split,
            "split": f"TC(R, Z_p) (x) reduced Aut(C_{p}), multiplicity {split}",
        })
    return HomotopyGroupTable(rows, [BOUNDARY_FLAG])
