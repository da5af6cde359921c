"""Finite-precision A_inf = W(R^flat) for two model families, with theta maps.

``PerfectoidModel("oc", profile)`` models the tilt of O_C as
F_p[t^(1/p^N)] with t = eps - 1; the mixed-characteristic side is the
cyclotomic tower Z[zeta_{p^M}]/p^k, reached through the sharp map.
``PerfectoidModel("perfect", profile)`` is a perfect field F_q, where
A_inf = W(F_q) and xi = p.

Precision: an OC-model element lives in W_L(R/t^u) for a uniform cutoff u.
Its effective t-precision is h = u / p^(L-1), meaning that it is known modulo
the ideal [t^h] W(R), whose elements have coordinate i divisible by t^(h p^i).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .base_rings import INF, CycElem, CycRing, FiniteField, PerfElem, PerfRing, PrecisionProfile
from .errors import NotDivisible, PrecisionError, ProfileError
from .witt import (
    WittVec,
    frobenius_F,
    random_witt,
    teichmuller,
    witt_from_int,
    witt_mul,
    witt_sub,
)

DEFAULT_GUARD = 2


class PerfectoidModel:
    """A perfectoid ring described from its tilt.

    For the OC model the tilt ring is stored with ``guard`` extra units of
    t-precision above ``profile.h``, so elements produced by a few divisions
    still meet the nominal precision.
    """

    def __init__(self, kind: str, profile: PrecisionProfile, guard: int = DEFAULT_GUARD):
        if kind not in ("oc", "perfect"):
            raise ProfileError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.profile = profile
        self.p, self.L = profile.p, profile.L
        if kind == "oc":
            self.storage_h = profile.h + guard
            self.tilt = PerfRing(profile.p, profile.f, profile.N, self.storage_h * profile.p ** (profile.L - 1))
        else:
            self.storage_h = INF
            self.tilt = FiniteField(profile.p, profile.f)

    def __repr__(self):
        return f"PerfectoidModel({self.kind!r}, {self.profile})"

    # precision units -------------------------------------------------------
    @property
    def unit(self) -> int:
        """Number of storage numerators per unit of effective t-precision."""
        return self.p ** (self.L - 1) * self.tilt.den

    def _u(self, h) -> int:
        return int(h * self.unit) if h != INF else self.tilt.slots

    # constructors ----------------------------------------------------------
    def element(self, witt: WittVec, precision=None) -> "AinfElem":
        if precision is None:
            precision = self.storage_h
        return AinfElem(self, witt, precision)

    def from_int(self, n: int) -> "AinfElem":
        return self.element(witt_from_int(self.tilt, self.p, n, self.L))

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def teichmuller(self, x) -> "AinfElem":
        return self.element(teichmuller(self.tilt, self.p, x, self.L))

    def random(self, rng) -> "AinfElem":
        return self.element(random_witt(self.tilt, self.p, self.L, rng))

    @cached_property
    def cyc(self) -> CycRing:
        """Target of theta: Z[zeta_{p^(N+k-1)}]/p^k."""
        self._require_theta()
        return CycRing(self.p, self.profile.N + self.profile.k - 1, self.profile.k)

    def _require_theta(self):
        if self.kind != "oc":
            raise ProfileError("theta and sharp are defined for the OC model")
        if self.profile.f != 1:
            raise ProfileError("the cyclotomic side has residue field F_p; use f = 1")
        if self.profile.N < self.profile.k:
            raise ProfileError(f"insufficient tilt depth N = {self.profile.N} for k = {self.profile.k}")

    @cached_property
    def _zeta_minus_one_powers(self) -> np.ndarray:
        return _zeta_minus_one_powers(self.cyc)


def _zeta_minus_one_powers(ring: CycRing) -> np.ndarray:
    """Row n holds (zeta - 1)^n for n < degree."""
    rows = np.zeros((ring.degree, ring.degree), dtype=np.int64)
    x = ring.one()
    z1 = ring.zeta() - 1
    for n in range(ring.degree):
        rows[n] = x.coeffs
        x = x * z1
    return rows


class AinfElem:
    """Element of A_inf(R) known to an effective t-precision (Fraction or inf)."""

    __slots__ = ("model", "witt", "precision")

    def __init__(self, model: PerfectoidModel, witt: WittVec, precision):
        self.model = model
        if model.kind == "oc" and precision != INF:
            precision = Fraction(precision)
            u = model._u(precision)
            witt = WittVec(witt.ring, witt.p, [c.truncate(Fraction(u, model.tilt.den)) for c in witt.coords])
        self.witt = witt
        self.precision = precision

    @property
    def profile(self):
        return self.model.profile

    @property
    def coords(self):
        return self.witt.coords

    @property
    def length(self):
        return self.witt.length

    def _pair(self, other):
        if isinstance(other, int):
            other = self.model.from_int(other)
        if not isinstance(other, AinfElem) or other.model is not self.model:
            raise ProfileError("elements of different models")
        n = min(self.length, other.length)
        return self.witt.truncate(n), other.witt.truncate(n), min(self.precision, other.precision)

    def __add__(self, other):
        a, b, prec = self._pair(other)
        return AinfElem(self.model, a + b, prec)

    __radd__ = __add__

    def __sub__(self, other):
        a, b, prec = self._pair(other)
        return AinfElem(self.model, witt_sub(a, b), prec)

    def __rsub__(self, other):
        b, a, prec = self._pair(other)
        return AinfElem(self.model, witt_sub(a, b), prec)

    def __neg__(self):
        return self.model.zero() - self

    def __mul__(self, other):
        a, b, prec = self._pair(other)
        return AinfElem(self.model, witt_mul(a, b), prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result, base = self.model.one(), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def phi(self) -> "AinfElem":
        """Frobenius automorphism W(frobenius), applied coordinatewise."""
        F = self.model.tilt.frobenius if self.model.kind == "perfect" else PerfElem.frobenius
        prec = min(self.precision * self.model.p, self.model.storage_h)
        return AinfElem(self.model, WittVec(self.witt.ring, self.witt.p, [F(c) for c in self.coords]), prec)

    def phi_inverse(self) -> "AinfElem":
        if self.model.kind == "perfect":
            ff = self.model.tilt
            root = lambda c: ff.pow(c, ff.q // ff.p)  # noqa: E731
            return AinfElem(self.model, WittVec(ff, self.witt.p, [root(c) for c in self.coords]), INF)
        coords = [c.p_th_root() for c in self.coords]
        return AinfElem(self.model, WittVec(self.witt.ring, self.witt.p, coords), self.precision / self.model.p)

    def reduction(self):
        """Image in the tilt (reduction mod p): the zeroth Witt coordinate."""
        return self.coords[0]

    def is_zero(self) -> bool:
        """Zero to precision: coordinate i vanishes below t^(h p^i)."""
        if self.model.kind == "perfect" or self.precision == INF:
            return self.witt.is_zero()
        den = self.model.tilt.den
        for i, c in enumerate(self.coords):
            v = c.t_valuation()
            if v < self.precision * self.model.p**i and v * den < self.model.tilt.slots:
                return False
        return True

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def to_json(self):
        return {
            "precision": {"p_adic": self.length, "t": str(self.precision)},
            "coords": self.witt.to_json(),
        }

    def __repr__(self):
        return f"AinfElem(prec={self.precision}, {self.witt!r})"


# ---------------------------------------------------------------------------
# distinguished elements


@dataclass
class DistinguishedElements:
    xi: AinfElem
    eps: AinfElem | None = None
    mu: AinfElem | None = None
    xi_r: dict[int, AinfElem] = field(default_factory=dict)
    phi_inv_mu: dict[int, AinfElem] = field(default_factory=dict)
    absent: tuple[str, ...] = ()


def _phi_inverse_power_mu(model: PerfectoidModel, r: int) -> AinfElem:
    """phi^(-r)(mu) = [1 + t^(1/p^r)] - 1, built without taking roots."""
    if r > model.profile.N:
        raise PrecisionError(f"phi^-{r}(mu) needs tilt depth N >= {r}")
    x = model.tilt.from_terms({0: 1, Fraction(1, model.p**r): 1})
    return model.teichmuller(x) - model.one()


def make_distinguished(model: PerfectoidModel) -> DistinguishedElements:
    if model.kind == "perfect":
        return DistinguishedElements(xi=model.from_int(model.p), absent=("eps", "mu"))
    eps = model.teichmuller(model.tilt.from_terms({0: 1, 1: 1}))
    mu = eps - model.one()
    phi_inv = {r: _phi_inverse_power_mu(model, r) for r in range(1, model.profile.N + 1)}
    xi_r = {r: ainf_div(mu, phi_inv[r]) for r in phi_inv}
    return DistinguishedElements(xi=xi_r[1], eps=eps, mu=mu, xi_r=xi_r, phi_inv_mu=phi_inv)


# ---------------------------------------------------------------------------
# division


def _strip_p(a: AinfElem, b: AinfElem):
    """Factor the largest power of p out of b (and a); shortens the Witt length."""
    e = 0
    while e < b.length and _coordinate_zero(b, e):
        e += 1
    if e == b.length:
        raise NotDivisible("divisor is zero to precision")
    for i in range(e):
        if not _coordinate_zero(a, i):
            raise NotDivisible(f"dividend is not divisible by p^{e}")

    def shift(x: AinfElem):
        coords = list(x.coords[e:])
        for _ in range(e):
            if x.model.kind == "perfect":
                ff = x.model.tilt
                coords = [ff.pow(c, ff.q // ff.p) for c in coords]
            else:
                coords = [c.p_th_root() for c in coords]
        prec = x.precision if x.precision == INF else x.precision / x.model.p**e
        return AinfElem(x.model, WittVec(x.witt.ring, x.witt.p, coords), prec)

    return (shift(a), shift(b)) if e else (a, b)


def _coordinate_zero(x: AinfElem, i: int) -> bool:
    c = x.coords[i]
    if x.model.kind == "perfect" or x.precision == INF:
        return x.witt.ring.is_zero(c)
    return c.t_valuation() >= x.precision * x.model.p**i


def ainf_div(a: AinfElem, b: AinfElem) -> AinfElem:
    """The quotient c with b c = a, by successive approximation.

    Coordinate j of the quotient is obtained by dividing the current residual
    by F^j(b); dividing by an element whose reduction has t-valuation v costs
    v of effective t-precision.
    """
    if a.model is not b.model:
        raise ProfileError("elements of different models")
    model = a.model
    a, b = _strip_p(a, b)
    n = min(a.length, b.length)
    A, B = a.witt.truncate(n), b.witt.truncate(n)
    if model.kind == "perfect":
        return _div_field(model, A, B, n)
    p, tilt = model.p, model.tilt
    u = model._u(min(a.precision, b.precision))
    b0 = B.coords[0].truncate(Fraction(u, tilt.den))
    v = b0.t_valuation()
    if v == INF:
        raise PrecisionError("divisor vanishes to precision")
    nv = int(v * tilt.den)
    unit_inv = b0.shift(-v).inverse()
    coords = []
    R, Bj, inv_j = A, B, unit_inv
    for j in range(n):
        vj = nv * p**j
        if vj >= u:
            raise PrecisionError("precision exhausted while dividing")
        r0 = R.coords[0].truncate(Fraction(u, tilt.den))
        if r0.t_valuation() * tilt.den < vj:
            raise NotDivisible(f"residual at stage {j} has t-valuation below {Fraction(vj, tilt.den)}")
        c = (r0.shift(Fraction(-vj, tilt.den)) * inv_j).truncate(Fraction(u - vj, tilt.den))
        coords.append(c)
        if j < n - 1:
            diff = witt_sub(R, witt_mul(Bj, teichmuller(tilt, p, c, Bj.length)))
            R = WittVec(tilt, p, diff.coords[1:])
            Bj = frobenius_F(Bj)
            inv_j = inv_j.frobenius()
    u_out = u - nv * p ** (n - 1)
    return AinfElem(model, WittVec(tilt, p, coords), Fraction(u_out, model.unit))


def _div_field(model, A: WittVec, B: WittVec, n: int) -> AinfElem:
    ff, p = model.tilt, model.p
    inv_j = ff.inv(B.coords[0])
    coords, R, Bj = [], A, B
    for j in range(n):
        c = ff.mul(R.coords[0], inv_j)
        coords.append(c)
        if j < n - 1:
            diff = witt_sub(R, witt_mul(Bj, teichmuller(ff, p, c, Bj.length)))
            R = WittVec(ff, p, diff.coords[1:])
            Bj = frobenius_F(Bj)
            inv_j = ff.frobenius(inv_j)
    return AinfElem(model, WittVec(ff, p, coords), INF)


# ---------------------------------------------------------------------------
# sharp and theta


def _coord0_lift(model_cyc: CycRing, zpow: np.ndarray, coeffs: np.ndarray) -> CycElem:
    """Lift of the image of sum c_n t^(n/p^M) under t^(1/p^M) -> zeta_{p^M} - 1."""
    deg = model_cyc.degree
    c = np.zeros(deg, dtype=np.int64)
    m = min(deg, coeffs.shape[0])
    c[:m] = coeffs[:m]
    return CycElem(model_cyc, c @ zpow % model_cyc.modulus)


def sharp(x: PerfElem, model: PerfectoidModel, depth: int | None = None) -> CycElem:
    """x^# = lim y_n^(p^n), evaluated at n = depth (default N).

    Returns an element of Z[zeta_{p^(N+depth)}]/p^k: the p^depth-th power of
    a lift of the zeroth tilt coordinate of x^(1/p^depth).
    """
    model._require_theta()
    prof = model.profile
    depth = prof.N if depth is None else depth
    if depth < prof.k - 1:
        raise PrecisionError(f"depth {depth} cannot resolve p^{prof.k}")
    if not isinstance(x, PerfElem) or x.ring.den != model.tilt.den:
        raise ProfileError("sharp expects an element of the model's tilt")
    if x.ring.cutoff < Fraction(prof.k * (model.p - 1), model.p):
        raise PrecisionError("t-precision too small for the requested p-adic precision")
    ring = CycRing(model.p, prof.N + depth, prof.k)
    y = _coord0_lift(ring, _zeta_minus_one_powers(ring), x.coeffs[:, 0])
    return y ** (model.p**depth)


def _theta_checks(a: AinfElem):
    model = a.model
    model._require_theta()
    prof = model.profile
    if a.length < prof.k:
        raise PrecisionError(f"Witt length {a.length} is below k = {prof.k}")
    if a.precision < Fraction(prof.k * (model.p - 1), model.p):
        raise PrecisionError(f"t-precision {a.precision} cannot determine theta mod p^{prof.k}")


def theta(a: AinfElem) -> CycElem:
    """theta(sum [a_i] p^i) = sum a_i^# p^i, computed modulo p^k.

    With Witt coordinates c_i the i-th summand is p^i (c_i^(1/p^i))^#, and
    mod p^(k-i) that is a lift of the zeroth coordinate of c_i^(1/p^(k-1))
    raised to p^(k-1-i).
    """
    _theta_checks(a)
    model = a.model
    ring, zpow = model.cyc, model._zeta_minus_one_powers
    p, k = model.p, model.profile.k
    total = ring.zero()
    for i in range(k):
        y = _coord0_lift(ring, zpow, a.coords[i].coeffs[:, 0])
        total = total + (y ** (p ** (k - 1 - i))) * (p**i)
    return total


def theta_r(a: AinfElem, r: int) -> WittVec:
    """theta_r(a) in W_r(Z[zeta]/p^k) with ghost components theta(phi^j a).

    Coordinate j is meaningful modulo p^(k-j).
    """
    model = a.model
    prof = model.profile
    if not 1 <= r <= min(a.length, prof.N, prof.k):
        raise ProfileError(f"theta_r needs 1 <= r <= min(L, N, k), got r = {r}")
    ghosts, x = [], a
    for _ in range(r):
        ghosts.append(theta(x))
        x = x.phi()
    p = model.p
    coords = []
    for n, w in enumerate(ghosts):
        acc = w
        for i, c in enumerate(coords):
            acc = acc - (c ** (p ** (n - i))) * (p**i)
        coords.append(acc.div_p_power(n))
    return WittVec(model.cyc, p, coords)


def theta_r_equal(x: WittVec, y: WittVec, k: int) -> bool:
    """Compare theta_r outputs coordinatewise modulo p^(k-j)."""
    return x.length == y.length and all(a.eq_mod(b, k - j) for j, (a, b) in enumerate(zip(x.coords, y.coords)))


# ---------------------------------------------------------------------------
# prism witness


@dataclass
class PrismWitness:
    a: AinfElem
    b: AinfElem
    precision: object
    verified: bool
    reduction_consistent: bool


def prism_check(model: PerfectoidModel, dist: DistinguishedElements | None = None) -> PrismWitness:
    """Return (a, b) with p = a xi + b phi(xi) to precision."""
    dist = dist or make_distinguished(model)
    xi, p = dist.xi, model.from_int(model.p)
    if model.kind == "perfect":
        a, b = model.one(), model.zero()
    else:
        b = model.one()
        try:
            a = ainf_div(p - xi.phi(), xi)
        except NotDivisible as exc:
            raise AssertionError(f"model bug: xi does not divide p - phi(xi): {exc}") from exc
    residual = p - (a * xi + b * xi.phi())
    red = residual.reduction() if model.kind == "oc" else None
    reduction_ok = True
    if red is not None:
        xb = xi.reduction()
        lhs = a.reduction() * xb + b.reduction() * xb.frobenius()
        cut = Fraction(model._u(residual.precision), model.tilt.den)
        reduction_ok = lhs.truncate(cut).is_zero()
    return PrismWitness(a, b, residual.precision, residual.is_zero(), reduction_ok)


def theta_r_diagrams(a: AinfElem, r: int) -> tuple[bool, bool]:
    """(R theta_r = theta_(r-1), F theta_r = theta_(r-1) phi) for r >= 2.

    Coordinate j of F(x) is x_j^p + p x_(j+1) + ..., so F keeps coordinate j
    meaningful modulo p^(k-j) and both squares compare at the same moduli.
    """
    if r < 2:
        raise ProfileError("the diagrams relate theta_r and theta_(r-1), so r >= 2")
    k = a.model.profile.k
    top = theta_r(a, r)
    lower = theta_r(a, r - 1)
    restriction = theta_r_equal(top.truncate(r - 1), lower, k)
    frob = theta_r_equal(frobenius_F(top), theta_r(a.phi(), r - 1), k)
    return restriction, frob
