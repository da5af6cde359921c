"""Coefficient rings: Z/n, F_q, truncated F_q[t^(1/p^N)] and Z[zeta]/p^k.

Every ring here is a small descriptor object exposing ``zero``, ``one``,
``from_int``, ``add``, ``sub``, ``neg``, ``mul``, ``pow``, ``eq`` and
``is_zero``. Generic code (Witt vectors, presentations) only talks to the
descriptor, so elements may be plain ints or array-backed objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .errors import DenominatorOverflow, ProfileError

INF = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def p_adic_valuation(n: int, p: int) -> float:
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class PrecisionProfile:
    """Finite-precision parameters shared by every model.

    ``h`` is a t-adic cutoff with denominator dividing ``p**N``; ``L`` is the
    Witt length and ``k`` the p-adic exponent of the cyclotomic side.
    """

    p: int
    f: int = 1
    N: int = 3
    h: Fraction = Fraction(3)
    L: int = 3
    k: int = 3

    def __post_init__(self):
        object.__setattr__(self, "h", _as_fraction(self.h))
        if not is_prime(self.p):
            raise ProfileError(f"p = {self.p} is not prime")
        for name in ("f", "N", "L", "k"):
            if getattr(self, name) < 1:
                raise ProfileError(f"{name} must be >= 1")
        if self.h <= 0:
            raise ProfileError("h must be positive")
        if (self.p**self.N) % self.h.denominator:
            raise ProfileError(f"h = {self.h} needs a denominator dividing p^N")
        if self.N < self.k:
            raise ProfileError(f"tilt depth N = {self.N} is below k = {self.k}")

    @property
    def q(self) -> int:
        return self.p**self.f

    def to_json(self) -> dict:
        return {"p": self.p, "f": self.f, "N": self.N, "h": str(self.h), "L": self.L, "k": self.k}


# ---------------------------------------------------------------------------
# integer convolution helpers


def convolve_mod(a: np.ndarray, b: np.ndarray, modulus: int, size: int | None = None) -> np.ndarray:
    """Exact convolution of nonnegative integer arrays reduced mod ``modulus``.

    Works along axis 0 for 1-D inputs and on both axes for 2-D inputs. The
    output is truncated to ``size`` rows when given.
    """
    if size is not None:
        a, b = a[:size], b[:size]
    bound = (modulus - 1) ** 2 * max(1, min(a.shape[0], b.shape[0]))
    if a.ndim == 2:
        bound *= min(a.shape[1], b.shape[1])
    if bound < 2**50:
        out = np.rint(fftconvolve(a.astype(np.float64), b.astype(np.float64))).astype(np.int64)
    elif bound < 2**62 and a.ndim == 1:
        out = np.convolve(a.astype(np.int64), b.astype(np.int64))
    else:
        out = _object_convolve(a, b)
    if size is not None:
        out = out[:size]
    return out % modulus


def _object_convolve(a, b):
    ao, bo = a.astype(object), b.astype(object)
    if ao.ndim == 1:
        return np.convolve(ao, bo)
    out = np.zeros((ao.shape[0] + bo.shape[0] - 1, ao.shape[1] + bo.shape[1] - 1), dtype=object)
    for j in range(ao.shape[1]):
        for l in range(bo.shape[1]):
            out[:, j + l] += np.convolve(ao[:, j], bo[:, l])
    return out


# ---------------------------------------------------------------------------
# Z/n


class IntegersMod:
    """The ring Z/n with elements stored as ints in [0, n)."""

    def __init__(self, n: int):
        if n < 1:
            raise ProfileError("modulus must be positive")
        self.n = n

    def __repr__(self):
        return f"IntegersMod({self.n})"

    def __eq__(self, other):
        return isinstance(other, IntegersMod) and other.n == self.n

    def __hash__(self):
        return hash(("Z/n", self.n))

    def zero(self):
        return 0

    def one(self):
        return 1 % self.n

    def from_int(self, x: int):
        return x % self.n

    def add(self, a, b):
        return (a + b) % self.n

    def sub(self, a, b):
        return (a - b) % self.n

    def neg(self, a):
        return -a % self.n

    def mul(self, a, b):
        return a * b % self.n

    def pow(self, a, e: int):
        return pow(a, e, self.n)

    def eq(self, a, b):
        return (a - b) % self.n == 0

    def is_zero(self, a):
        return a % self.n == 0

    def random(self, rng: np.random.Generator):
        return int(rng.integers(0, self.n))

    def elements(self):
        return range(self.n)

    def to_json(self, a):
        return int(a)


# ---------------------------------------------------------------------------
# F_q = F_p[y]/(m)


def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod_monic(a, m, p):
    """Remainder of a by the monic polynomial m over F_p (coefficient lists, low first)."""
    a = [x % p for x in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _poly_trim(a[:dm])


def _monic_polys(p, d):
    for n in range(p**d):
        yield [(n // p**j) % p for j in range(d)] + [1]


@lru_cache(maxsize=None)
def conway_like_modulus(p: int, f: int) -> tuple[int, ...]:
    """First monic irreducible of degree f in the enumeration order of ``_monic_polys``.

    Irreducibility is checked by trial division by every monic polynomial of
    degree at most f // 2.
    """
    for cand in _monic_polys(p, f):
        if all(_poly_divmod_monic(cand, g, p) for d in range(1, f // 2 + 1) for g in _monic_polys(p, d)):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")


class FiniteField:
    """F_{p^f} with elements encoded as ints whose base-p digits are y-coefficients."""

    def __init__(self, p: int, f: int = 1):
        if not is_prime(p):
            raise ProfileError(f"p = {p} is not prime")
        if f < 1:
            raise ProfileError("f must be >= 1")
        self.p, self.f, self.q = p, f, p**f
        self.modulus = conway_like_modulus(p, f)

    def __repr__(self):
        return f"FiniteField({self.p}, {self.f})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (other.p, other.f) == (self.p, self.f)

    def __hash__(self):
        return hash(("F_q", self.p, self.f))

    # encoding
    def vec(self, code: int) -> np.ndarray:
        return np.array([(code // self.p**j) % self.p for j in range(self.f)], dtype=np.int64)

    def code(self, vec) -> int:
        return int(sum(int(c) % self.p * self.p**j for j, c in enumerate(vec)))

    @cached_property
    def _powers_of_p(self):
        return self.p ** np.arange(self.f, dtype=np.int64)

    def codes(self, arr: np.ndarray) -> np.ndarray:
        return (arr % self.p) @ self._powers_of_p

    def reduce_vectors(self, arr: np.ndarray) -> np.ndarray:
        """Reduce the last axis (y-degree up to anything) modulo m(y) and p."""
        arr = np.array(arr, dtype=np.int64) % self.p
        f = self.f
        m = np.array(self.modulus[:-1], dtype=np.int64)
        for d in range(arr.shape[-1] - 1, f - 1, -1):
            c = arr[..., d].copy()
            if not c.any():
                continue
            arr[..., d - f : d] = (arr[..., d - f : d] - c[..., None] * m) % self.p
            arr[..., d] = 0
        out = arr[..., :f]
        if out.shape[-1] < f:
            pad = np.zeros(out.shape[:-1] + (f - out.shape[-1],), dtype=np.int64)
            out = np.concatenate([out, pad], axis=-1)
        return out % self.p

    @cached_property
    def _tables(self):
        q, p = self.q, self.p
        digits = np.array([self.vec(c) for c in range(q)], dtype=np.int64)
        gen = None
        for g in range(2 if q > 2 else 1, q):
            seen, x = set(), 1
            for _ in range(q - 1):
                x = self._slow_mul(x, g, digits)
                seen.add(x)
            if len(seen) == q - 1:
                gen = g
                break
        exp = [1] * (q - 1)
        for i in range(1, q - 1):
            exp[i] = self._slow_mul(exp[i - 1], gen, digits)
        log = {x: i for i, x in enumerate(exp)}
        return digits, exp, log

    def _slow_mul(self, a, b, digits):
        prod = np.convolve(digits[a], digits[b])
        return self.code(self.reduce_vectors(prod[None, :])[0])

    # descriptor interface
    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, x: int):
        return x % self.p

    def add(self, a, b):
        d = self._tables[0]
        return self.code(d[a] + d[b])

    def sub(self, a, b):
        d = self._tables[0]
        return self.code(d[a] - d[b])

    def neg(self, a):
        return self.code(-self._tables[0][a])

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        _, exp, log = self._tables
        return exp[(log[a] + log[b]) % (self.q - 1)]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        _, exp, log = self._tables
        return exp[-log[a] % (self.q - 1)]

    def pow(self, a, e: int):
        if e == 0:
            return 1
        if a == 0:
            return 0
        _, exp, log = self._tables
        return exp[log[a] * e % (self.q - 1)]

    def eq(self, a, b):
        return a == b

    def is_zero(self, a):
        return a == 0

    def random(self, rng):
        return int(rng.integers(0, self.q))

    def elements(self):
        return range(self.q)

    def to_json(self, a):
        return int(a)

    # structure maps
    @cached_property
    def frobenius_matrix(self) -> np.ndarray:
        """Matrix over F_p of x -> x^p acting on coefficient column vectors."""
        cols = [self.vec(self.pow(self.code(np.eye(self.f, dtype=np.int64)[j]), self.p)) for j in range(self.f)]
        return np.array(cols, dtype=np.int64).T

    @cached_property
    def inverse_frobenius_matrix(self) -> np.ndarray:
        m = np.eye(self.f, dtype=np.int64)
        for _ in range(self.f - 1):
            m = self.frobenius_matrix @ m % self.p
        return m

    def frobenius(self, a):
        return self.pow(a, self.p)

    def embedding_matrix(self, other: "FiniteField") -> np.ndarray:
        """Matrix (other.f x self.f) of an F_p-algebra embedding self -> other.

        The image of y is the first root of m(y) in ``other`` by code order.
        """
        if other.p != self.p or other.f % self.f:
            raise ProfileError(f"F_{self.q} does not embed in F_{other.q}")
        for r in other.elements():
            acc = 0
            for c in reversed(self.modulus):
                acc = other.add(other.mul(acc, r), other.from_int(c))
            if acc == 0:
                cols, x = [], 1
                for _ in range(self.f):
                    cols.append(other.vec(x))
                    x = other.mul(x, r)
                return np.array(cols, dtype=np.int64).T
        raise AssertionError("minimal polynomial has no root in the extension")


# ---------------------------------------------------------------------------
# truncated perfect algebra F_q[t^(1/p^N)] / t^cutoff


class PerfRing:
    """F_q[t^(1/p^N)] truncated below t^cutoff.

    Exponents are stored as integer numerators over ``p**N`` in a dense array
    of shape (slots, f); row n holds the F_p-coefficient vector of t^(n/p^N).
    """

    def __init__(self, p: int, f: int = 1, N: int = 1, cutoff=1):
        self.field = FiniteField(p, f)
        self.p, self.f, self.N = p, f, N
        self.den = p**N
        self.cutoff = _as_fraction(cutoff)
        slots = self.cutoff * self.den
        if slots.denominator != 1 or slots <= 0:
            raise ProfileError(f"cutoff {cutoff} is not a positive multiple of 1/p^N")
        self.slots = int(slots)

    @classmethod
    def from_profile(cls, profile: PrecisionProfile, cutoff=None) -> "PerfRing":
        return cls(profile.p, profile.f, profile.N, profile.h if cutoff is None else cutoff)

    def __repr__(self):
        return f"PerfRing(p={self.p}, f={self.f}, N={self.N}, cutoff={self.cutoff})"

    def __eq__(self, other):
        return isinstance(other, PerfRing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @property
    def _key(self):
        return (self.p, self.f, self.N, self.slots)

    def numerator(self, exponent) -> int:
        e = _as_fraction(exponent) * self.den
        if e.denominator != 1:
            raise DenominatorOverflow(f"exponent {exponent} needs a denominator above p^{self.N}")
        return int(e)

    def _wrap(self, arr) -> "PerfElem":
        return PerfElem(self, arr)

    def zero(self):
        return self._wrap(np.zeros((self.slots, self.f), dtype=np.int64))

    def one(self):
        return self.constant(1)

    def constant(self, code: int):
        arr = np.zeros((self.slots, self.f), dtype=np.int64)
        arr[0] = self.field.vec(code)
        return self._wrap(arr)

    def from_int(self, x: int):
        return self.constant(x % self.p)

    def monomial(self, exponent, code: int = 1) -> "PerfElem":
        n = self.numerator(exponent)
        arr = np.zeros((self.slots, self.f), dtype=np.int64)
        if 0 <= n < self.slots:
            arr[n] = self.field.vec(code)
        elif n < 0:
            raise ProfileError("negative exponent")
        return self._wrap(arr)

    def from_terms(self, terms) -> "PerfElem":
        """Build from ``{exponent: code}`` or an iterable of (exponent, code)."""
        items = terms.items() if isinstance(terms, dict) else terms
        arr = np.zeros((self.slots, self.f), dtype=np.int64)
        for e, c in items:
            n = self.numerator(e)
            if n < 0:
                raise ProfileError("negative exponent")
            if n < self.slots:
                arr[n] = (arr[n] + self.field.vec(c)) % self.p
        return self._wrap(arr)

    def random(self, rng, min_valuation=0, density: float = 1.0) -> "PerfElem":
        arr = rng.integers(0, self.p, size=(self.slots, self.f)).astype(np.int64)
        if density < 1.0:
            arr[rng.random(self.slots) >= density] = 0
        arr[: self.numerator(min_valuation)] = 0
        return self._wrap(arr)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def pow(self, a, e):
        return a**e

    def eq(self, a, b):
        return a == b

    def is_zero(self, a):
        return a.is_zero()

    def to_json(self, a):
        return a.to_json()

    def with_field_degree(self, f: int) -> "PerfRing":
        return PerfRing(self.p, f, self.N, self.cutoff)

    def with_cutoff(self, cutoff) -> "PerfRing":
        return PerfRing(self.p, self.f, self.N, cutoff)


class PerfElem:
    """Immutable element of a :class:`PerfRing`."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: PerfRing, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if coeffs.shape != (ring.slots, ring.f):
            raise ProfileError(f"coefficient array has shape {coeffs.shape}")
        coeffs.setflags(write=False)
        self.ring = ring
        self.coeffs = coeffs

    @property
    def profile(self):
        return self.ring

    def _check(self, other):
        if not isinstance(other, PerfElem):
            other = self.ring.from_int(other) if isinstance(other, int) else other
        if not isinstance(other, PerfElem) or other.ring != self.ring:
            raise ProfileError("profile mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        return PerfElem(self.ring, (self.coeffs + other.coeffs) % self.ring.p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return PerfElem(self.ring, (self.coeffs - other.coeffs) % self.ring.p)

    def __rsub__(self, other):
        return self._check(other) - self

    def __neg__(self):
        return PerfElem(self.ring, -self.coeffs % self.ring.p)

    def __mul__(self, other):
        if isinstance(other, int):
            return PerfElem(self.ring, self.coeffs * other % self.ring.p)
        other = self._check(other)
        r = self.ring
        if r.f == 1:
            prod = convolve_mod(self.coeffs[:, 0], other.coeffs[:, 0], r.p, r.slots)[:, None]
        else:
            prod = r.field.reduce_vectors(convolve_mod(self.coeffs, other.coeffs, r.p, r.slots))
        return PerfElem(r, prod)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        result, base = self.ring.one(), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return isinstance(other, PerfElem) and other.ring == self.ring and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        terms = self.terms()
        if not terms:
            return "0"
        return " + ".join(f"{c}*t^({Fraction(n, self.ring.den)})" for n, c in terms[:6]) + (" + ..." if len(terms) > 6 else "")

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def terms(self) -> list[tuple[int, int]]:
        rows = np.flatnonzero(self.coeffs.any(axis=1))
        codes = self.ring.field.codes(self.coeffs[rows])
        return [(int(n), int(c)) for n, c in zip(rows, codes)]

    def coefficient(self, exponent) -> int:
        n = self.ring.numerator(exponent)
        return self.ring.field.code(self.coeffs[n]) if n < self.ring.slots else 0

    def constant_term(self) -> int:
        return self.ring.field.code(self.coeffs[0])

    def t_valuation(self):
        rows = np.flatnonzero(self.coeffs.any(axis=1))
        return Fraction(int(rows[0]), self.ring.den) if rows.size else INF

    def frobenius(self) -> "PerfElem":
        r = self.ring
        out = np.zeros_like(self.coeffs)
        src = self.coeffs[: -(-r.slots // r.p)]
        if r.f > 1:
            src = src @ r.field.frobenius_matrix.T % r.p
        out[:: r.p] = src
        return PerfElem(r, out)

    def p_th_root(self) -> "PerfElem":
        """Inverse Frobenius; exact below t^(cutoff/p), zero above."""
        r = self.ring
        mask = self.coeffs.any(axis=1)
        idx = np.flatnonzero(mask)
        if idx.size and (idx % r.p).any():
            raise DenominatorOverflow(f"p-th root needs exponent denominators above p^{r.N}")
        src = self.coeffs[:: r.p]
        if r.f > 1:
            src = src @ r.field.inverse_frobenius_matrix.T % r.p
        out = np.zeros_like(self.coeffs)
        out[: src.shape[0]] = src
        return PerfElem(r, out)

    def truncate(self, cutoff) -> "PerfElem":
        n = self.ring.numerator(cutoff)
        if n >= self.ring.slots:
            return self
        out = self.coeffs.copy()
        out[max(n, 0) :] = 0
        return PerfElem(self.ring, out)

    def shift(self, exponent) -> "PerfElem":
        """Multiply by t^exponent; a negative exponent divides and drops nothing below it only if absent."""
        n = self.ring.numerator(exponent)
        out = np.zeros_like(self.coeffs)
        if n >= 0:
            if n < self.ring.slots:
                out[n:] = self.coeffs[: self.ring.slots - n]
        else:
            if self.coeffs[:-n].any():
                from .errors import NotDivisible

                raise NotDivisible(f"element is not divisible by t^{-Fraction(n, self.ring.den)}")
            out[: self.ring.slots + n] = self.coeffs[-n:]
        return PerfElem(self.ring, out)

    def scale(self, code: int) -> "PerfElem":
        """Multiply by a constant of F_q."""
        return self * self.ring.constant(code)

    def embed(self, ring: PerfRing) -> "PerfElem":
        """Image in a ring with larger residue field (and equal N, cutoff)."""
        if ring == self.ring:
            return self
        if ring.N != self.ring.N or ring.slots != self.ring.slots:
            raise ProfileError("embedding needs equal N and cutoff")
        E = self.ring.field.embedding_matrix(ring.field)
        return PerfElem(ring, self.coeffs @ E.T % ring.p)

    def inverse(self) -> "PerfElem":
        """Inverse of a unit (nonzero constant term) by Newton iteration."""
        r = self.ring
        c0 = self.constant_term()
        if c0 == 0:
            raise ZeroDivisionError("element is not a unit")
        x = r.constant(r.field.inv(c0))
        two = r.from_int(2)
        prec = 1
        while prec < r.slots:
            x = x * (two - self * x)
            prec *= 2
        return x

    def to_json(self) -> dict:
        r = self.ring
        return {
            "profile": {"p": r.p, "f": r.f, "N": r.N, "cutoff": str(r.cutoff)},
            "terms": [[n, c] for n, c in self.terms()],
        }


# ---------------------------------------------------------------------------
# Z[zeta_{p^M}] / p^k


class CycRing:
    """Z[x]/(Phi_{p^M}(x), p^k) in the power basis 1, x, ..., x^(phi-1)."""

    def __init__(self, p: int, level: int, k: int):
        if not is_prime(p):
            raise ProfileError(f"p = {p} is not prime")
        if level < 1 or k < 1:
            raise ProfileError("level and k must be >= 1")
        self.p, self.level, self.k = p, level, k
        self.order = p**level
        self.block = p ** (level - 1)
        self.degree = self.block * (p - 1)
        self.modulus = p**k

    def __repr__(self):
        return f"CycRing(p={self.p}, level={self.level}, k={self.k})"

    def __eq__(self, other):
        return isinstance(other, CycRing) and (self.p, self.level, self.k) == (other.p, other.level, other.k)

    def __hash__(self):
        return hash(("cyc", self.p, self.level, self.k))

    def cyclotomic_polynomial(self) -> list[int]:
        """Phi_{p^M}(x) = Phi_p(x^(p^(M-1))), low coefficients first."""
        out = [0] * (self.degree + 1)
        for j in range(self.p):
            out[j * self.block] = 1
        return out

    def reduce(self, poly) -> np.ndarray:
        """Reduce an integer coefficient array of any length."""
        poly = np.asarray(poly)
        dtype = object if poly.dtype == object else np.int64
        folded = np.zeros(self.order, dtype=dtype)
        for start in range(0, poly.shape[0], self.order):
            chunk = poly[start : start + self.order]
            folded[: chunk.shape[0]] += chunk
        top = folded[self.degree :]
        out = folded[: self.degree].copy()
        for j in range(self.p - 1):
            out[j * self.block : (j + 1) * self.block] -= top
        return (out % self.modulus).astype(np.int64)

    def _wrap(self, arr):
        return CycElem(self, arr)

    def zero(self):
        return self._wrap(np.zeros(self.degree, dtype=np.int64))

    def one(self):
        return self.from_int(1)

    def from_int(self, x: int):
        arr = np.zeros(self.degree, dtype=np.int64)
        arr[0] = x % self.modulus
        return self._wrap(arr)

    def zeta(self, j: int = 1):
        poly = np.zeros(self.order, dtype=np.int64)
        poly[j % self.order] = 1
        return self._wrap(self.reduce(poly))

    def from_coeffs(self, coeffs) -> "CycElem":
        return self._wrap(self.reduce(np.asarray(list(coeffs), dtype=object)))

    def random(self, rng):
        return self._wrap(rng.integers(0, self.modulus, size=self.degree).astype(np.int64))

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def pow(self, a, e):
        return a**e

    def eq(self, a, b):
        return a == b

    def is_zero(self, a):
        return a.is_zero()

    def to_json(self, a):
        return a.to_json()


class CycElem:
    """Immutable element of a :class:`CycRing`."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: CycRing, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.int64) % ring.modulus
        coeffs.setflags(write=False)
        self.ring = ring
        self.coeffs = coeffs

    def _check(self, other):
        if isinstance(other, int):
            return self.ring.from_int(other)
        if not isinstance(other, CycElem) or other.ring != self.ring:
            raise ProfileError("level/precision mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CycElem(self.ring, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return CycElem(self.ring, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return self._check(other) - self

    def __neg__(self):
        return CycElem(self.ring, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, int):
            return CycElem(self.ring, self.coeffs * (other % self.ring.modulus) % self.ring.modulus)
        other = self._check(other)
        prod = convolve_mod(self.coeffs, other.coeffs, self.ring.modulus)
        return CycElem(self.ring, self.ring.reduce(prod))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result, base = self.ring.one(), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return isinstance(other, CycElem) and other.ring == self.ring and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        nz = [(i, int(c)) for i, c in enumerate(self.coeffs) if c]
        return "0" if not nz else " + ".join(f"{c}*z^{i}" for i, c in nz[:6]) + (" + ..." if len(nz) > 6 else "")

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def eq_mod(self, other, e: int) -> bool:
        """Equality modulo p^e."""
        other = self._check(other)
        return not ((self.coeffs - other.coeffs) % self.ring.p**e).any()

    def valuation(self):
        """Minimum p-adic valuation of the power-basis coefficients."""
        return min((p_adic_valuation(int(c), self.ring.p) for c in self.coeffs), default=INF)

    def div_p_power(self, e: int) -> "CycElem":
        """Exact division by p^e; the result is meaningful modulo p^(k-e)."""
        if self.valuation() < e:
            from .errors import PrecisionError

            raise PrecisionError(f"element is not divisible by p^{e}")
        return CycElem(self.ring, self.coeffs // self.ring.p**e)

    def embed(self, ring: CycRing) -> "CycElem":
        """Image under zeta_{p^M} -> zeta_{p^M'}^(p^(M'-M)) with k' <= k."""
        d = ring.level - self.ring.level
        if d < 0 or ring.p != self.ring.p or ring.k > self.ring.k:
            raise ProfileError("can only embed into a deeper level with no more p-adic precision")
        poly = np.zeros(ring.order, dtype=np.int64)
        poly[:: ring.p**d][: self.ring.degree] = self.coeffs
        return CycElem(ring, ring.reduce(poly))

    def to_json(self) -> dict:
        r = self.ring
        return {
            "profile": {"p": r.p, "level": r.level, "k": r.k},
            "terms": [[i, int(c)] for i, c in enumerate(self.coeffs) if c],
        }


def cyc_arith(a: CycElem, b: CycElem, op: str) -> CycElem:
    """Apply ``op`` in {'add', 'sub', 'mul'} after checking level and precision."""
    if a.ring != b.ring:
        raise ProfileError("level/precision mismatch")
    return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__}[op](b)


def perf_mul(a: PerfElem, b: PerfElem) -> PerfElem:
    return a * b


def frobenius(a: PerfElem) -> PerfElem:
    return a.frobenius()


def p_th_root(a: PerfElem) -> PerfElem:
    return a.p_th_root()


def t_valuation(a: PerfElem):
    return a.t_valuation()
