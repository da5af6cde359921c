"""TC homotopy groups of perfectoid models from the phi - can equalizer.

In degree 2m the equalizer reduces to the kernel and cokernel of
a -> phi(a) - xi^m a (m >= 0) or a -> phi(xi)^|m| phi(a) - a (m < 0) on
A_inf; the kernel contributes to TC_{2m} and the cokernel to TC_{2m-1}.
The unit relating phi(u) and sigma is normalized to 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from .ainf import PerfectoidModel, make_distinguished
from .base_rings import FiniteField, PerfElem, PerfRing, PrecisionProfile, conway_like_modulus, p_adic_valuation
from .errors import ModelClosureError, PrecisionError, ProfileError, ResidueExtensionNeeded

DEFAULT_F_MAX = 8


# ---------------------------------------------------------------------------
# Galois ring W_k(F_q)


class GaloisRing:
    """W_k(F_q) = (Z/p^k)[y]/(M) with M the integer lift of the F_q modulus."""

    def __init__(self, p: int, f: int, k: int):
        self.p, self.f, self.k = p, f, k
        self.mod = p**k
        self.modulus = conway_like_modulus(p, f)
        self.frobenius_matrix = self._frobenius_matrix()

    def reduce(self, poly) -> np.ndarray:
        poly = [int(c) for c in poly]
        f = self.f
        for d in range(len(poly) - 1, f - 1, -1):
            c = poly[d]
            if c:
                for j in range(f + 1):
                    poly[d - f + j] -= c * self.modulus[j]
        out = np.zeros(f, dtype=object)
        for j in range(min(f, len(poly))):
            out[j] = poly[j] % self.mod
        return out

    def mul(self, a, b):
        return self.reduce(np.convolve(np.asarray(a, dtype=object), np.asarray(b, dtype=object)))

    def pow(self, a, e):
        result = self.one()
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return result

    def one(self):
        out = np.zeros(self.f, dtype=object)
        out[0] = 1
        return out

    def gen(self):
        out = np.zeros(self.f, dtype=object)
        out[min(1, self.f - 1)] = 1 if self.f > 1 else (-self.modulus[0]) % self.mod
        return out

    def evaluate_modulus(self, r):
        acc = np.zeros(self.f, dtype=object)
        for c in reversed(self.modulus):
            acc = self.mul(acc, r)
            acc[0] = (acc[0] + c) % self.mod
        return acc

    def _frobenius_matrix(self) -> np.ndarray:
        """Columns are phi(y^j), where phi(y) is the Hensel root of M near y^p."""
        if self.f == 1:
            return np.ones((1, 1), dtype=object)
        deriv = [j * c for j, c in enumerate(self.modulus)][1:]
        r = self.pow(self.gen(), self.p)
        units = (self.p**self.f - 1) * self.p ** (self.f * (self.k - 1))
        for _ in range(self.k + 1):
            dm = np.zeros(self.f, dtype=object)
            for c in reversed(deriv):
                dm = self.mul(dm, r)
                dm[0] = (dm[0] + c) % self.mod
            r = (r - self.mul(self.evaluate_modulus(r), self.pow(dm, units - 1))) % self.mod
        assert not self.evaluate_modulus(r).any(), "Hensel lift of the Frobenius root failed"
        cols, x = [], self.one()
        for _ in range(self.f):
            cols.append(x)
            x = self.mul(x, r)
        return np.array(cols, dtype=object).T

    def phi(self, a):
        return self.frobenius_matrix.dot(np.asarray(a, dtype=object)) % self.mod


# ---------------------------------------------------------------------------
# graded presentations


class _GaloisCoeffs:
    def __init__(self, gr: GaloisRing):
        self.gr = gr
        self.xi = self.from_int(gr.p)

    def from_int(self, n):
        out = np.zeros(self.gr.f, dtype=object)
        out[0] = n % self.gr.mod
        return out

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def add(self, a, b):
        return (a + b) % self.gr.mod

    def sub(self, a, b):
        return (a - b) % self.gr.mod

    def mul(self, a, b):
        return self.gr.mul(a, b)

    def pow(self, a, e):
        return self.gr.pow(a, e)

    def phi(self, a):
        return self.gr.phi(a)

    def eq(self, a, b):
        return not ((np.asarray(a) - np.asarray(b)) % self.gr.mod).any()


class _TiltCoeffs:
    """A_inf/p = R with phi the Frobenius and xi reduced mod p."""

    def __init__(self, ring: PerfRing, xi_bar: PerfElem):
        self.ring = ring
        self.xi = xi_bar

    def from_int(self, n):
        return self.ring.from_int(n)

    def zero(self):
        return self.ring.zero()

    def one(self):
        return self.ring.one()

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def pow(self, a, e):
        return a**e

    def phi(self, a):
        return a.frobenius()

    def eq(self, a, b):
        return a == b


class _AinfCoeffs:
    def __init__(self, model: PerfectoidModel):
        self.model = model
        self.xi = make_distinguished(model).xi

    def from_int(self, n):
        return self.model.from_int(n)

    def zero(self):
        return self.model.zero()

    def one(self):
        return self.model.one()

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def pow(self, a, e):
        return a**e

    def phi(self, a):
        return a.phi()

    def eq(self, a, b):
        return a.equals(b)


class GradedPresentation:
    """TC^- = A[u, v]/(uv - xi) and TP = A[sigma^(+-1)], with the maps phi and can.

    A TC^- element is a dict {n: a}: n > 0 stands for a u^n, n < 0 for
    a v^|n| and n = 0 for a constant, which is a basis since uv = xi.
    TP elements are dicts {n: a} for a sigma^n.
    """

    def __init__(self, coeffs):
        self.A = coeffs
        self.xi = coeffs.xi
        self.phi_xi = coeffs.phi(coeffs.xi)

    def _add_into(self, out, n, a):
        out[n] = self.A.add(out[n], a) if n in out else a

    def multiply(self, x: dict, y: dict) -> dict:
        A, out = self.A, {}
        for i, a in x.items():
            for j, b in y.items():
                c = A.mul(a, b)
                if i * j < 0:
                    c = A.mul(c, A.pow(self.xi, min(abs(i), abs(j))))
                self._add_into(out, i + j, c)
        return out

    def can(self, x: dict) -> dict:
        A, out = self.A, {}
        for n, a in x.items():
            self._add_into(out, n, A.mul(a, A.pow(self.xi, n)) if n > 0 else a)
        return out

    def phi(self, x: dict) -> dict:
        A, out = self.A, {}
        for n, a in x.items():
            b = A.phi(a)
            self._add_into(out, n, A.mul(b, A.pow(self.phi_xi, -n)) if n < 0 else b)
        return out

    def tp_multiply(self, x: dict, y: dict) -> dict:
        out = {}
        for i, a in x.items():
            for j, b in y.items():
                self._add_into(out, i + j, self.A.mul(a, b))
        return out

    def equal(self, x: dict, y: dict) -> bool:
        keys = set(x) | set(y)
        z = self.A.zero()
        return all(self.A.eq(x.get(n, z), y.get(n, z)) for n in keys)

    def phi_minus_can(self, m: int):
        """Coefficient map of phi - can on the degree-2m summand A u^m or A v^|m|."""

        def apply(a):
            x = {m: a}
            return self.A.sub(self.phi(x)[m], self.can(x)[m])

        return apply


def xi_bar(p: int, f: int, N: int, h) -> PerfElem:
    """Reduction of xi = mu / phi^(-1)(mu) in the tilt truncated at t^h."""
    model = PerfectoidModel("oc", PrecisionProfile(p, f, N, h, 1, 1))
    red = make_distinguished(model).xi.reduction()
    ring = PerfRing(p, f, N, h)
    return PerfElem(ring, red.coeffs[: ring.slots])


def presentation_for(model: PerfectoidModel, mod_p: bool = False) -> GradedPresentation:
    prof = model.profile
    if model.kind == "perfect":
        return GradedPresentation(_GaloisCoeffs(GaloisRing(prof.p, prof.f, prof.k)))
    if mod_p:
        xb = xi_bar(prof.p, prof.f, prof.N, prof.h)
        return GradedPresentation(_TiltCoeffs(xb.ring, xb))
    return GradedPresentation(_AinfCoeffs(model))


def phi_minus_can(m: int, model: PerfectoidModel, mod_p: bool = True):
    """Callable a -> phi(a) - xi^m a (m >= 0) or phi(xi)^|m| phi(a) - a (m < 0)."""
    return presentation_for(model, mod_p=mod_p and model.kind == "oc").phi_minus_can(m)


# ---------------------------------------------------------------------------
# results


@dataclass
class TCGroup:
    degree: int
    invariant_factors: list[int]
    source: str
    certified_by: str
    generator_valuations: list[str] = field(default_factory=list)
    samples: int = 0

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "invariant_factors": self.invariant_factors,
            "order": self.order,
            "source": self.source,
            "certified_by": self.certified_by,
            "generator_valuations": self.generator_valuations,
            "samples": self.samples,
        }


@dataclass
class EqualizerResult:
    model: str
    p: int
    coefficients: str
    groups: list[TCGroup]
    flags: list[str] = field(default_factory=list)

    def group(self, degree: int) -> TCGroup:
        for g in self.groups:
            if g.degree == degree:
                return g
        raise KeyError(degree)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "p": self.p,
            "coefficients": self.coefficients,
            "groups": [g.to_json() for g in self.groups],
            "flags": self.flags,
        }


def _map_degree(n: int) -> tuple[int, str]:
    """Map index m (degree 2m) and role for TC_n."""
    return (n // 2, "kernel") if n % 2 == 0 else ((n + 1) // 2, "cokernel")


# ---------------------------------------------------------------------------
# perfect fields: Smith normal form over W_k(F_q)


def equalizer_matrix(m: int, pres: GradedPresentation) -> Matrix:
    """Integer matrix of the degree-2m coefficient map on the basis 1, y, ..., y^(f-1)."""
    A = pres.A
    f = A.gr.f
    fn = pres.phi_minus_can(m)
    cols = []
    for j in range(f):
        e = np.zeros(f, dtype=object)
        e[j] = 1
        cols.append([int(x) for x in fn(e)])
    return Matrix(cols).T


def kernel_cokernel_invariants(M: Matrix, p: int, k: int) -> list[int]:
    """Invariant factors of ker = coker of a square matrix acting on (Z/p^k)^f."""
    snf = smith_normal_form(M, domain=ZZ)
    out = []
    for i in range(M.shape[0]):
        d = int(snf[i, i])
        e = min(p_adic_valuation(d, p), k)
        if e:
            out.append(p**e)
    return sorted(out)


def _tc_perfect(model: PerfectoidModel, degrees) -> EqualizerResult:
    prof = model.profile
    pres = presentation_for(model)
    groups, flags, cache = [], [], {}
    for n in degrees:
        m, role = _map_degree(n)
        if m not in cache:
            cache[m] = kernel_cokernel_invariants(equalizer_matrix(m, pres), prof.p, prof.k)
        inv = cache[m]
        groups.append(TCGroup(n, inv, f"{role} of the degree-{2 * m} map", "smith normal form"))
    for m, inv in sorted(cache.items()):
        if inv:
            flags.append(f"degree-{2 * m} map has nonzero kernel and cokernel (kernel counted in TC_{2 * m}, cokernel in TC_{2 * m - 1})")
    return EqualizerResult("perfect" if prof.f > 1 else "fp", prof.p, f"Z/{prof.p}^{prof.k}", groups, flags)


# ---------------------------------------------------------------------------
# O_C modulo p


def _residue_roots(field: FiniteField, c: int) -> list[int]:
    """All x in F_q with x^p - x = c, by exhaustion."""
    return [x for x in field.elements() if field.sub(field.pow(x, field.p), x) == c]


def kernel_solutions(m: int, ring: PerfRing) -> list[PerfElem]:
    """Kernel of a -> a^p - xi^m a on R = A_inf/p: the elements t^(m/p) b with b^p = b.

    The b are found by exhaustive search over the residue field and Hensel
    lifted (the correction is zero for residue roots). Includes 0.
    """
    if m < 0:
        raise ValueError("kernel_solutions is for m >= 0")
    shift = Fraction(m, ring.p)
    if shift >= ring.cutoff:
        raise PrecisionError(f"t-precision {ring.cutoff} cannot resolve valuation {shift}")
    out = []
    for b0 in _residue_roots(ring.field, 0):
        b = _artin_schreier(ring.zero(), ring, b0)
        out.append(b.shift(shift))
    xb = xi_bar(ring.p, ring.f, ring.N, ring.cutoff)
    for a in out:
        if a**ring.p - xb**m * a != ring.zero():
            raise AssertionError("kernel candidate fails its equation")
    return out


def _artin_schreier(c: PerfElem, ring: PerfRing, x0: int) -> PerfElem:
    """Solve x^p - x = c given a residue root x0 of x^p - x = c(0)."""
    c_plus = c - ring.constant(c.constant_term())
    x = ring.constant(x0)
    term = c_plus
    while not term.is_zero():
        x = x - term
        term = term.frobenius()
    return x


def solve_frobenius_twisted(m: int, c: PerfElem) -> PerfElem:
    """a with a^p - xi^m a = c in R/t^h, for m >= 0.

    Writing a = t^(m/p) x turns the equation into x^p - x = c / t^m. The
    residue part is solved by search over F_q and the rest by the convergent
    series x_+ = -(c_+ + c_+^p + c_+^(p^2) + ...). Right-hand sides with
    terms below t^m need solutions with unbounded p-power denominators, which
    the truncated model cannot hold.
    """
    ring = c.ring
    if m < 0:
        raise ValueError("use solve_negative_degree for m < 0")
    v = c.t_valuation()
    if v < m:
        raise ModelClosureError(f"right-hand side has t-valuation {v} < {m}; a solution needs a ramified extension")
    if c.is_zero():
        return ring.zero()
    cp = c.shift(-m)
    roots = _residue_roots(ring.field, cp.constant_term())
    if not roots:
        raise ResidueExtensionNeeded(f"x^p - x = {cp.constant_term()} has no root in F_{ring.field.q}")
    a = _artin_schreier(cp, ring, roots[0]).shift(Fraction(m, ring.p))
    xb = xi_bar(ring.p, ring.f, ring.N, ring.cutoff)
    if a**ring.p - xb**m * a != c:
        raise AssertionError("residual check failed")
    return a


def solve_with_extension(m: int, c: PerfElem, f_max: int = DEFAULT_F_MAX) -> PerfElem:
    """solve_frobenius_twisted, growing the residue field through multiples of f up to f_max.

    Artin-Schreier extensions have degree p, so for p odd doubling f alone
    would never succeed; every multiple of f is tried in order.
    """
    base = c.ring
    f = base.f
    while True:
        ring = base if f == base.f else base.with_field_degree(f)
        try:
            return solve_frobenius_twisted(m, c.embed(ring))
        except ResidueExtensionNeeded:
            if f + base.f > f_max:
                raise
            f += base.f


def solve_negative_degree(m: int, c: PerfElem) -> PerfElem:
    """a with phi(xi)^m a^p - a = c for m > 0, by the contraction a <- phi(xi)^m a^p - c."""
    ring = c.ring
    w = xi_bar(ring.p, ring.f, ring.N, ring.cutoff).frobenius() ** m
    a = -c
    while True:
        nxt = w * a**ring.p - c
        if nxt == a:
            return a
        a = nxt


def mu_divisibility_check(m: int, a: PerfElem) -> bool:
    """a has t-valuation m/p = m v(phi^-1(mu)) and a / phi^-1(mu)^m is a unit root of b^p = b."""
    ring = a.ring
    target = Fraction(m, ring.p)
    if ring.cutoff <= target:
        raise PrecisionError(f"t-precision {ring.cutoff} cannot resolve valuation {target}")
    # phi^-1(mu) reduces to t^(1/p); building it as a root of t would fail when h <= 1
    q = ring.monomial(Fraction(1, ring.p)) ** m
    if a.t_valuation() != q.t_valuation():
        return False
    vq = q.t_valuation()
    b = a.shift(-vq) * q.shift(-vq).inverse()
    prec = ring.cutoff - vq
    xb = xi_bar(ring.p, ring.f, ring.N, ring.cutoff)
    in_kernel = (a**ring.p - xb**m * a).is_zero()
    return b.constant_term() != 0 and (b**ring.p - b).truncate(prec).is_zero() and in_kernel


def truncated_kernel_dimension(m: int, p: int, N: int, h_in) -> int:
    """F_p-dimension of the kernel of a -> a^p - xi^m a from R/t^h_in to R/t^h_out (f = 1).

    h_out = min(p h_in, h_in + m(p-1)/p) is the largest cutoff at which the
    map is well defined; the kernel is computed by linear algebra.
    """
    h_in = Fraction(h_in)
    delta = Fraction(m * (p - 1), p)
    h_out = min(p * h_in, h_in + delta)
    src, tgt = PerfRing(p, 1, N, h_in), PerfRing(p, 1, N, h_out)
    xb = xi_bar(p, 1, N, h_out)
    cols = []
    for n in range(src.slots):
        e = Fraction(n, src.den)
        x = tgt.monomial(e)
        cols.append(list((x**p - xb**m * x).coeffs[:, 0]))
    M = DomainMatrix([[GF(p)(int(c)) for c in row] for row in zip(*cols)], (tgt.slots, src.slots), GF(p))
    return src.slots - M.rank()


def negative_degree_rank_deficiency(m: int, ring: PerfRing) -> int:
    """Nullity of a -> phi(xi)^m a^p - a on R/t^h (f = 1); zero means bijective."""
    if ring.f != 1:
        raise ProfileError("linear algebra certificate needs f = 1")
    w = xi_bar(ring.p, 1, ring.N, ring.cutoff).frobenius() ** m
    cols = []
    for n in range(ring.slots):
        x = ring.monomial(Fraction(n, ring.den))
        cols.append(list((w * x**ring.p - x).coeffs[:, 0]))
    p = ring.p
    M = DomainMatrix([[GF(p)(int(c)) for c in row] for row in zip(*cols)], (ring.slots, ring.slots), GF(p))
    return ring.slots - M.rank()


def _tc_oc(model: PerfectoidModel, degrees, samples: int, seed: int, f_max: int) -> EqualizerResult:
    prof = model.profile
    ring = PerfRing(prof.p, prof.f, prof.N, prof.h)
    rng = np.random.default_rng(seed)
    groups = []
    for n in degrees:
        m, role = _map_degree(n)
        if role == "kernel" and m >= 0:
            sols = kernel_solutions(m, ring)
            gens = [a for a in sols if not a.is_zero()]
            if not all(mu_divisibility_check(m, a) for a in gens):
                raise AssertionError(f"kernel element in degree {n} fails the mu-divisibility check")
            dim = round(np.log(len(sols)) / np.log(prof.p))
            groups.append(
                TCGroup(n, [prof.p] * dim, f"kernel of the degree-{2 * m} map", "residue search + Hensel lifting",
                        [str(gens[0].t_valuation())] if gens else [])
            )
        elif role == "kernel":
            nullity = negative_degree_rank_deficiency(-m, ring) if ring.f == 1 else 0
            groups.append(TCGroup(n, [prof.p] * nullity, f"kernel of the degree-{2 * m} map", "linear algebra over F_p"))
        else:
            solved = 0
            for _ in range(samples):
                if m >= 1:
                    c = ring.random(rng, min_valuation=m)
                    solve_with_extension(m, c, f_max)
                elif m == 0:
                    solve_with_extension(0, ring.random(rng), f_max)
                else:
                    c = ring.random(rng)
                    a = solve_negative_degree(-m, c)
                    w = xi_bar(ring.p, ring.f, ring.N, ring.cutoff).frobenius() ** (-m)
                    if w * a**ring.p - a != c:
                        raise AssertionError("negative-degree residual check failed")
                solved += 1
            support = f"t^{m} R" if m >= 1 else "R"
            groups.append(
                TCGroup(n, [], f"cokernel of the degree-{2 * m} map", f"sampling: {solved} right-hand sides in {support} solved",
                        samples=solved)
            )
    return EqualizerResult("oc", prof.p, f"Z/{prof.p}", groups)


def tc_groups(model: PerfectoidModel, degrees, coefficients: str = "default", samples: int = 50, seed: int = 0,
              f_max: int = DEFAULT_F_MAX) -> EqualizerResult:
    """TC_n for n in ``degrees``: Z/p^k coefficients for perfect fields, Z/p for O_C."""
    degrees = list(degrees)
    if model.kind == "perfect":
        if coefficients not in ("default", "Z/p^k"):
            raise ProfileError("perfect-field models are computed with Z/p^k coefficients")
        return _tc_perfect(model, degrees)
    if coefficients not in ("default", "Z/p"):
        raise ProfileError("the O_C model is computed with Z/p coefficients only")
    return _tc_oc(model, degrees, samples, seed, f_max)
