"""p-typical Witt vectors over the coefficient rings of :mod:`base_rings`.

Two evaluation strategies exist and check each other:

* the polynomial path evaluates the universal integer polynomials for sum,
  difference, product and Frobenius (any base ring, practical for length <= 5);
* the ghost path lifts coordinates to a p-torsion-free ring, works on ghost
  components and recovers coordinates by exact division by p^n.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.rings import ring as poly_ring

from .base_rings import FiniteField, IntegersMod, PerfElem, PerfRing, convolve_mod
from .errors import ProfileError

MAX_LENGTH = 6

_VARS = [f"a{i}" for i in range(MAX_LENGTH)] + [f"b{i}" for i in range(MAX_LENGTH)]
_POLY_RING, *_GENS = poly_ring(",".join(_VARS), ZZ)
_A = _GENS[:MAX_LENGTH]
_B = _GENS[MAX_LENGTH:]


def _ghost_poly(xs, n, p):
    return sum((p**j * xs[j] ** (p ** (n - j)) for j in range(n + 1)), _POLY_RING.zero)


def _exact_quo(poly, d):
    for c in poly.itercoeffs():
        if c % d:
            raise AssertionError(f"universal Witt polynomial has a coefficient not divisible by {d}")
    return poly.quo_ground(d)


def _compile(poly):
    """Flatten a sympy polynomial into (coeff, ((var, exp), ...)) tuples."""
    out = []
    for monom, coeff in poly.terms():
        out.append((int(coeff), tuple((v, e) for v, e in enumerate(monom) if e)))
    return out


class WittPolyCache:
    """Lazily built universal polynomials, one family per prime.

    Families: ``add`` (S_n), ``sub``, ``mul`` (P_n) and ``frob`` (F_n, which
    uses a_0..a_{n+1}). Construction asserts that every division by p^n is
    exact. A lock makes the first build race-free; later reads only touch
    completed lists.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._polys: dict[tuple[int, str], list] = {}
        self._compiled: dict[tuple[int, str], list] = {}

    def _build_next(self, p, kind, n):
        prev = self._polys[(p, kind)]
        if kind == "frob":
            target = _ghost_poly(_A, n + 1, p)
        elif kind == "add":
            target = _ghost_poly(_A, n, p) + _ghost_poly(_B, n, p)
        elif kind == "sub":
            target = _ghost_poly(_A, n, p) - _ghost_poly(_B, n, p)
        elif kind == "mul":
            target = _ghost_poly(_A, n, p) * _ghost_poly(_B, n, p)
        else:
            raise ValueError(kind)
        rest = target - sum((p**i * prev[i] ** (p ** (n - i)) for i in range(n)), _POLY_RING.zero)
        return _exact_quo(rest, p**n)

    def get(self, p: int, kind: str, length: int) -> list:
        """Compiled polynomials for coordinates 0..length-1."""
        limit = MAX_LENGTH - 1 if kind == "frob" else MAX_LENGTH
        if length > limit:
            raise ProfileError(f"polynomial path supports length <= {limit} for {kind}")
        key = (p, kind)
        done = self._compiled.get(key)
        if done is not None and len(done) >= length:
            return done[:length]
        with self._lock:
            polys = self._polys.setdefault(key, [])
            while len(polys) < length:
                polys.append(self._build_next(p, kind, len(polys)))
            compiled = self._compiled.get(key, [])
            compiled = compiled + [_compile(q) for q in polys[len(compiled) :]]
            self._compiled[key] = compiled
        return compiled[:length]

    def sympy_polys(self, p: int, kind: str, length: int):
        self.get(p, kind, length)
        return self._polys[(p, kind)][:length]


POLY_CACHE = WittPolyCache()


def _evaluate(compiled, ring, values):
    """Evaluate compiled polynomials at ``values`` (a_0.., then b_0..)."""
    zero_vars = {i for i, v in enumerate(values) if ring.is_zero(v)}
    powers: dict[tuple[int, int], object] = {}

    def power(v, e):
        key = (v, e)
        if key not in powers:
            powers[key] = ring.pow(values[v], e)
        return powers[key]

    out = []
    for poly in compiled:
        acc = ring.zero()
        for coeff, factors in poly:
            if any(v in zero_vars for v, _ in factors):
                continue
            term = None
            for v, e in factors:
                x = power(v, e)
                term = x if term is None else ring.mul(term, x)
            c = ring.from_int(coeff)
            term = c if term is None else ring.mul(c, term)
            acc = ring.add(acc, term)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# torsion-free lifts for the ghost path


class _IntegerLift:
    """Lift Z/n to Z; everything is exact."""

    def __init__(self, ring: IntegersMod):
        self.ring = ring

    def lift(self, a):
        return int(a)

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def scale(self, x, c):
        return x * c

    def pow(self, x, e):
        return x**e

    def exact_div(self, x, d):
        if x % d:
            raise AssertionError("ghost recovery produced a non-integral coordinate")
        return x // d

    def canonical(self, x):
        return x

    def reduce(self, x):
        return self.ring.from_int(x)


class _PerfLift:
    """Lift F_p[t^(1/p^N)]/t^c to (Z/p^L)[t^(1/p^N)]/t^c; coordinates only matter mod p."""

    def __init__(self, ring: PerfRing, length: int):
        self.ring = ring
        self.mod = ring.p**length
        self.size = ring.slots

    def lift(self, a: PerfElem):
        return a.coeffs[:, 0].astype(np.int64)

    def add(self, x, y):
        return (x + y) % self.mod

    def sub(self, x, y):
        return (x - y) % self.mod

    def mul(self, x, y):
        return convolve_mod(x, y, self.mod, self.size)

    def scale(self, x, c):
        return x * (c % self.mod) % self.mod

    def pow(self, x, e):
        result = None
        base = x
        while e:
            if e & 1:
                result = base if result is None else self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        if result is None:
            result = np.zeros_like(x)
            result[0] = 1
        return result

    def exact_div(self, x, d):
        if (x % d).any():
            raise AssertionError("ghost recovery produced a non-integral coordinate")
        return x // d

    def canonical(self, x):
        return x % self.ring.p

    def reduce(self, x):
        return PerfElem(self.ring, (x % self.ring.p)[:, None])


def _lift_context(ring, length):
    if isinstance(ring, IntegersMod):
        return _IntegerLift(ring)
    if isinstance(ring, PerfRing) and ring.f == 1:
        return _PerfLift(ring, length)
    return None


def has_ghost_path(ring) -> bool:
    return _lift_context(ring, 1) is not None


# ---------------------------------------------------------------------------
# Witt vectors


@dataclass(frozen=True)
class GhostVec:
    components: tuple


class WittVec:
    """Length-L p-typical Witt vector with coordinates in ``ring``."""

    __slots__ = ("ring", "p", "coords")

    def __init__(self, ring, p: int, coords):
        self.ring = ring
        self.p = p
        self.coords = tuple(coords)

    @property
    def length(self) -> int:
        return len(self.coords)

    def _check(self, other):
        if not isinstance(other, WittVec) or other.ring != self.ring or other.p != self.p:
            raise ProfileError("Witt vectors over different bases")
        if other.length != self.length:
            raise ProfileError("Witt vectors of different lengths")
        return other

    def __add__(self, other):
        return witt_add(self, other)

    def __sub__(self, other):
        return witt_sub(self, other)

    def __mul__(self, other):
        return witt_mul(self, other)

    def __neg__(self):
        return witt_sub(witt_zero(self.ring, self.p, self.length), self)

    def __eq__(self, other):
        return (
            isinstance(other, WittVec)
            and other.ring == self.ring
            and other.length == self.length
            and all(self.ring.eq(x, y) for x, y in zip(self.coords, other.coords))
        )

    __hash__ = None

    def __repr__(self):
        return f"WittVec({list(self.coords)!r})"

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(x) for x in self.coords)

    def truncate(self, length: int) -> "WittVec":
        """Restriction W_L -> W_length."""
        return WittVec(self.ring, self.p, self.coords[:length])

    def to_json(self):
        return [self.ring.to_json(x) for x in self.coords]


def witt_zero(ring, p, length) -> WittVec:
    return WittVec(ring, p, [ring.zero()] * length)


def teichmuller(ring, p: int, x, length: int) -> WittVec:
    return WittVec(ring, p, [x] + [ring.zero()] * (length - 1))


def _integer_coords(n: int, p: int, length: int) -> list[int]:
    coords = []
    for k in range(length):
        acc = n - sum(p**i * coords[i] ** (p ** (k - i)) for i in range(k))
        assert acc % p**k == 0
        coords.append(acc // p**k)
    return coords


def witt_from_int(ring, p: int, n: int, length: int) -> WittVec:
    """Image of the integer n, through the exact Witt coordinates of n in W(Z)."""
    return WittVec(ring, p, [ring.from_int(c) for c in _integer_coords(n, p, length)])


def ghost(a: WittVec) -> GhostVec:
    """w_i = sum_{j<=i} p^j a_j^(p^(i-j)), computed in the base ring."""
    r, p = a.ring, a.p
    comps = []
    for i in range(a.length):
        acc = r.zero()
        for j in range(i + 1):
            acc = r.add(acc, r.mul(r.from_int(p**j), r.pow(a.coords[j], p ** (i - j))))
        comps.append(acc)
    return GhostVec(tuple(comps))


def _lifted_ghost(ctx, coords, p, count):
    lifted = [ctx.lift(x) for x in coords]
    # powers[j][m] = lifted[j]^(p^m)
    powers = []
    for j, x in enumerate(lifted):
        row = [x]
        for _ in range(count - 1 - j):
            row.append(ctx.pow(row[-1], p))
        powers.append(row)
    out = []
    for n in range(count):
        acc = powers[0][n]
        for j in range(1, n + 1):
            acc = ctx.add(acc, ctx.scale(powers[j][n - j], p**j))
        out.append(acc)
    return out


def _recover(ctx, ghosts, p):
    coords = []
    powers = []
    for n, w in enumerate(ghosts):
        acc = w
        for i in range(n):
            while len(powers[i]) <= n - i:
                powers[i].append(ctx.pow(powers[i][-1], p))
            acc = ctx.sub(acc, ctx.scale(powers[i][n - i], p**i))
        c = ctx.canonical(ctx.exact_div(acc, p**n))
        coords.append(c)
        powers.append([c])
    return [ctx.reduce(c) for c in coords]


def _ghost_binary(op, a: WittVec, b: WittVec) -> WittVec:
    ctx = _lift_context(a.ring, a.length)
    if ctx is None:
        raise ProfileError(f"no torsion-free lift available for {a.ring!r}")
    wa = _lifted_ghost(ctx, a.coords, a.p, a.length)
    wb = _lifted_ghost(ctx, b.coords, a.p, a.length)
    w = [getattr(ctx, op)(x, y) for x, y in zip(wa, wb)]
    return WittVec(a.ring, a.p, _recover(ctx, w, a.p))


def _poly_binary(kind, a: WittVec, b: WittVec) -> WittVec:
    compiled = POLY_CACHE.get(a.p, kind, a.length)
    pad = [a.ring.zero()] * (MAX_LENGTH - a.length)
    values = list(a.coords) + pad + list(b.coords) + pad
    return WittVec(a.ring, a.p, _evaluate(compiled, a.ring, values))


def _binary(kind, ghost_op, a, b, method):
    a._check(b)
    if method == "auto":
        method = "ghost" if has_ghost_path(a.ring) else "poly"
    if method == "ghost":
        return _ghost_binary(ghost_op, a, b)
    if method == "poly":
        return _poly_binary(kind, a, b)
    raise ValueError(f"unknown method {method!r}")


def witt_add(a: WittVec, b: WittVec, method: str = "auto") -> WittVec:
    return _binary("add", "add", a, b, method)


def witt_sub(a: WittVec, b: WittVec, method: str = "auto") -> WittVec:
    return _binary("sub", "sub", a, b, method)


def witt_mul(a: WittVec, b: WittVec, method: str = "auto") -> WittVec:
    return _binary("mul", "mul", a, b, method)


def _char_p_frobenius(ring, p):
    if isinstance(ring, PerfRing) and ring.p == p:
        return lambda x: x.frobenius()
    if isinstance(ring, FiniteField) and ring.p == p:
        return ring.frobenius
    if isinstance(ring, IntegersMod) and ring.n == p:
        return lambda x: x
    return None


def frobenius_F(a: WittVec, method: str = "auto") -> WittVec:
    """Witt vector Frobenius W_n -> W_{n-1}; ghost components shift left."""
    if a.length < 1:
        raise ProfileError("Frobenius needs length >= 1")
    n = a.length - 1
    if method == "auto":
        fast = _char_p_frobenius(a.ring, a.p)
        if fast is not None:
            return WittVec(a.ring, a.p, [fast(x) for x in a.coords[:n]])
        method = "ghost" if has_ghost_path(a.ring) else "poly"
    if method == "ghost":
        ctx = _lift_context(a.ring, a.length)
        w = _lifted_ghost(ctx, a.coords, a.p, a.length)
        return WittVec(a.ring, a.p, _recover(ctx, w[1:], a.p))
    compiled = POLY_CACHE.get(a.p, "frob", n)
    values = list(a.coords) + [a.ring.zero()] * (2 * MAX_LENGTH - a.length)
    return WittVec(a.ring, a.p, _evaluate(compiled, a.ring, values))


def verschiebung_V(a: WittVec) -> WittVec:
    """Verschiebung W_{n-1} -> W_n: coordinate shift to the right."""
    return WittVec(a.ring, a.p, [a.ring.zero()] + list(a.coords))


def witt_map(phi, a: WittVec, ring=None) -> WittVec:
    """W(phi) for a ring map phi, applied coordinatewise."""
    return WittVec(a.ring if ring is None else ring, a.p, [phi(x) for x in a.coords])


def witt_scalar(n: int, a: WittVec) -> WittVec:
    """n * a by repeated doubling."""
    if n < 0:
        return -witt_scalar(-n, a)
    result, base = witt_zero(a.ring, a.p, a.length), a
    while n:
        if n & 1:
            result = result + base
        n >>= 1
        if n:
            base = base + base
    return result


def random_witt(ring, p: int, length: int, rng) -> WittVec:
    return WittVec(ring, p, [ring.random(rng) for _ in range(length)])
