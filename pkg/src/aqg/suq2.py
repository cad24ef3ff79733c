"""Pol(SU_q(2)) as a rewriting system on the PBW basis a^k c^l c*^m.

A basis term is a triple ``(k, l, m)``; ``k < 0`` stands for ``(a*)^{-k}``.
Products are brought to normal form with the commutation rules

    c a = q^-1 a c,   c* a = q^-1 a c*,   c a* = q a* c,   c* a* = q a* c*,
    a a* = 1 - q^2 c c*,   a* a = 1 - c c*,   c c* = c* c,

so moving ``c^l c*^m`` across ``a^k`` costs ``q^{-(l+m)k}`` for signed ``k``.

Coefficients are ``Fraction`` whenever no complex power is involved, and
``complex`` otherwise; every analytic map is diagonal on basis terms.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .report import Report
from .scalars import DEFAULT_TOL, ToleranceCfg, conj, magnitude, q_power

ZERO = Fraction(0)
ONE = Fraction(1)


class PbwTerm(NamedTuple):
    k: int
    l: int
    m: int

    @property
    def degree(self) -> int:
        return abs(self.k) + self.l + self.m

    def label(self) -> str:
        parts = []
        if self.k > 0:
            parts.append("a" if self.k == 1 else f"a^{self.k}")
        elif self.k < 0:
            parts.append("a*" if self.k == -1 else f"a*^{-self.k}")
        if self.l:
            parts.append("c" if self.l == 1 else f"c^{self.l}")
        if self.m:
            parts.append("c*" if self.m == 1 else f"c*^{self.m}")
        return " ".join(parts) or "1"


UNIT_TERM = PbwTerm(0, 0, 0)
GENERATORS = {
    "a": PbwTerm(1, 0, 0),
    "a*": PbwTerm(-1, 0, 0),
    "c": PbwTerm(0, 1, 0),
    "c*": PbwTerm(0, 0, 1),
}


class DegreeCapError(ValueError):
    pass


class NcPoly:
    """Sparse linear combination of PBW terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[PbwTerm, object]] = None):
        self.terms = {PbwTerm(*t): c for t, c in (terms or {}).items() if c != 0}

    @classmethod
    def term(cls, t: Sequence[int], coeff=ONE) -> "NcPoly":
        return cls({PbwTerm(*t): coeff})

    @classmethod
    def one(cls) -> "NcPoly":
        return cls({UNIT_TERM: ONE})

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def __add__(self, other: "NcPoly") -> "NcPoly":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, ZERO) + c
        return NcPoly(out)

    def __sub__(self, other: "NcPoly") -> "NcPoly":
        return self + other.scale(-1)

    def scale(self, s) -> "NcPoly":
        return NcPoly({t: s * c for t, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, NcPoly) and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{t.label()}" for t, c in sorted(self.terms.items()))

    def norm(self):
        """Max coefficient modulus (exact for rational coefficients)."""
        return max((magnitude(c) for c in self.terms.values()), default=ZERO)


class TensorPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Tuple[PbwTerm, PbwTerm], object]] = None):
        self.terms = {(PbwTerm(*a), PbwTerm(*b)): c for (a, b), c in (terms or {}).items() if c != 0}

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, ZERO) - c
        return TensorPoly(out)

    def flip(self) -> "TensorPoly":
        return TensorPoly({(b, a): c for (a, b), c in self.terms.items()})

    def norm(self):
        return max((magnitude(c) for c in self.terms.values()), default=ZERO)


def poly_diff(x: NcPoly, y: NcPoly):
    return (x - y).norm()


def monomials(degree: int) -> List[PbwTerm]:
    """All PBW terms of total degree at most ``degree``, in a fixed order."""
    out = []
    for d in range(degree + 1):
        for k in range(d, -d - 1, -1):
            rest = d - abs(k)
            for l in range(rest + 1):
                out.append(PbwTerm(k, l, rest - l))
    return out


class Character:
    """Unital multiplicative functional vanishing on c and c*.

    Determined by its value ``s`` on ``a``; the value on ``a*`` is ``1/s``.
    """

    def __init__(self, value_on_a, name: str = ""):
        if value_on_a == 0:
            raise ValueError("character value on a must be non-zero")
        self.value_on_a = value_on_a
        self.value_on_c = 0
        self.name = name

    def on_term(self, t: PbwTerm):
        if t.l or t.m:
            return ZERO
        return self.value_on_a ** t.k

    def __call__(self, x: NcPoly):
        return sum((c * self.on_term(t) for t, c in x.terms.items()), ZERO)


def _exact_q_power(q: Fraction, w: complex):
    """``q^w``, kept rational when ``w`` is an integer."""
    w = complex(w)
    if abs(w.imag) < 1e-13 and abs(w.real - round(w.real)) < 1e-13:
        return q ** int(round(w.real))
    return q_power(q, w)


class SUq2:
    """Rewriting engine plus the Hopf and analytic structure of SU_q(2).

    ``kappa`` is the exponent sign in ``f_z(a) = q^{kappa z}``; ``None`` pins it
    from the two defining constraints.  ``haar_shift`` perturbs the Haar value
    of one basis term (fault injection).
    """

    def __init__(self, q, degree_cap: int = 6, kappa: Optional[int] = None,
                 haar_shift: Optional[Tuple[PbwTerm, Fraction]] = None):
        q = Fraction(q)
        if not 0 < q < 1:
            raise ValueError("q must lie strictly between 0 and 1")
        self.q = q
        self.degree_cap = degree_cap
        self.haar_shift = haar_shift
        self._apair: Dict[Tuple[int, int], Dict[Tuple[int, int], Fraction]] = {}
        self._mono: Dict[Tuple[PbwTerm, PbwTerm], Dict[PbwTerm, Fraction]] = {}
        self._delta: Dict[PbwTerm, TensorPoly] = {}
        self._forced_kappa = kappa
        self._kappa: Optional[int] = kappa

    # -- multiplication ------------------------------------------------------

    def _a_product(self, k1: int, k2: int) -> Dict[Tuple[int, int], Fraction]:
        """``a^{k1} a^{k2} = sum coeff * a^r (c c*)^p``, keyed by ``(r, p)``."""
        key = (k1, k2)
        hit = self._apair.get(key)
        if hit is not None:
            return hit
        q = self.q
        if k1 * k2 >= 0:
            out = {(k1 + k2, 0): ONE}
        elif k1 > 0:
            j = -k2
            base = self._a_product(k1 - 1, k2 + 1)
            out = {}
            for (r, p), c in base.items():
                out[(r, p)] = out.get((r, p), ZERO) + c
                out[(r, p + 1)] = out.get((r, p + 1), ZERO) - q ** (2 * j) * c
        else:
            k = k2
            base = self._a_product(k1 + 1, k2 - 1)
            out = {}
            for (r, p), c in base.items():
                out[(r, p)] = out.get((r, p), ZERO) + c
                out[(r, p + 1)] = out.get((r, p + 1), ZERO) - q ** (-2 * (k - 1)) * c
        out = {rp: c for rp, c in out.items() if c != 0}
        self._apair[key] = out
        return out

    def term_product(self, t1: PbwTerm, t2: PbwTerm) -> Dict[PbwTerm, Fraction]:
        key = (t1, t2)
        hit = self._mono.get(key)
        if hit is not None:
            return hit
        k1, l1, m1 = t1
        k2, l2, m2 = t2
        swap = self.q ** (-(l1 + m1) * k2)
        out = {PbwTerm(r, l1 + l2 + p, m1 + m2 + p): swap * c
               for (r, p), c in self._a_product(k1, k2).items()}
        self._mono[key] = out
        return out

    def multiply(self, x: NcPoly, y: NcPoly) -> NcPoly:
        out: Dict[PbwTerm, object] = {}
        for t1, c1 in x.terms.items():
            for t2, c2 in y.terms.items():
                c = c1 * c2
                for t, s in self.term_product(t1, t2).items():
                    out[t] = out.get(t, ZERO) + c * s
        return NcPoly(out)

    def normal_form(self, word: Iterable[str]) -> NcPoly:
        out = NcPoly.one()
        for g in word:
            out = self.multiply(out, NcPoly.term(GENERATORS[g]))
        return out

    def star(self, x: NcPoly) -> NcPoly:
        out: Dict[PbwTerm, object] = {}
        for (k, l, m), c in x.terms.items():
            t = PbwTerm(-k, m, l)
            out[t] = out.get(t, ZERO) + conj(c) * self.q ** ((l + m) * k)
        return NcPoly(out)

    # -- coalgebra -----------------------------------------------------------

    def _generator_delta(self, g: str) -> TensorPoly:
        q = self.q
        a, ast, c, cst = (GENERATORS[s] for s in ("a", "a*", "c", "c*"))
        table = {
            "a": {(a, a): ONE, (cst, c): -q},
            "a*": {(ast, ast): ONE, (c, cst): -q},
            "c": {(c, a): ONE, (ast, c): ONE},
            "c*": {(cst, ast): ONE, (a, cst): ONE},
        }
        return TensorPoly(table[g])

    def tensor_multiply(self, x: TensorPoly, y: TensorPoly) -> TensorPoly:
        out: Dict[Tuple[PbwTerm, PbwTerm], object] = {}
        for (x1, x2), s in x.terms.items():
            for (y1, y2), r in y.terms.items():
                left = self.term_product(x1, y1)
                right = self.term_product(x2, y2)
                sr = s * r
                for u, lu in left.items():
                    for v, rv in right.items():
                        out[(u, v)] = out.get((u, v), ZERO) + sr * lu * rv
        return TensorPoly(out)

    def _term_delta(self, t: PbwTerm) -> TensorPoly:
        hit = self._delta.get(t)
        if hit is not None:
            return hit
        if t == UNIT_TERM:
            out = TensorPoly({(UNIT_TERM, UNIT_TERM): ONE})
        else:
            k, l, m = t
            # peel off one generator from the left of a^k c^l c*^m
            if k > 0:
                g, rest = "a", PbwTerm(k - 1, l, m)
            elif k < 0:
                g, rest = "a*", PbwTerm(k + 1, l, m)
            elif l > 0:
                g, rest = "c", PbwTerm(0, l - 1, m)
            else:
                g, rest = "c*", PbwTerm(0, 0, m - 1)
            out = self.tensor_multiply(self._generator_delta(g), self._term_delta(rest))
        self._delta[t] = out
        return out

    def comultiply(self, x: NcPoly) -> TensorPoly:
        if x.degree > self.degree_cap:
            raise DegreeCapError(f"degree {x.degree} exceeds the comultiplication cap {self.degree_cap}")
        out: Dict[Tuple[PbwTerm, PbwTerm], object] = {}
        for t, c in x.terms.items():
            for key, s in self._term_delta(t).terms.items():
                out[key] = out.get(key, ZERO) + c * s
        return TensorPoly(out)

    def counit(self, x: NcPoly):
        return sum((c for t, c in x.terms.items() if t.l == 0 and t.m == 0), ZERO)

    def antipode(self, x: NcPoly) -> NcPoly:
        q = self.q
        out: Dict[PbwTerm, object] = {}
        for (k, l, m), c in x.terms.items():
            s = (-q) ** l * (-1 / q) ** m * q ** ((l + m) * k)
            t = PbwTerm(-k, l, m)
            out[t] = out.get(t, ZERO) + c * s
        return NcPoly(out)

    def s_squared(self, x: NcPoly) -> NcPoly:
        return self.antipode(self.antipode(x))

    def haar_term(self, t: PbwTerm):
        q = self.q
        v = ZERO
        if t.k == 0 and t.l == t.m:
            v = (1 - q ** 2) / (1 - q ** (2 * t.l + 2))
        if self.haar_shift is not None and self.haar_shift[0] == t:
            v += self.haar_shift[1]
        return v

    def haar(self, x: NcPoly):
        return sum((c * self.haar_term(t) for t, c in x.terms.items()), ZERO)

    # -- slicing helpers -----------------------------------------------------

    def slice_right(self, t: TensorPoly, omega: Callable[[PbwTerm], object]) -> NcPoly:
        """``(i (x) omega) t`` for ``omega`` given on basis terms."""
        out: Dict[PbwTerm, object] = {}
        for (u, v), s in t.terms.items():
            w = omega(v)
            if w != 0:
                out[u] = out.get(u, ZERO) + s * w
        return NcPoly(out)

    def slice_left(self, t: TensorPoly, omega: Callable[[PbwTerm], object]) -> NcPoly:
        out: Dict[PbwTerm, object] = {}
        for (u, v), s in t.terms.items():
            w = omega(u)
            if w != 0:
                out[v] = out.get(v, ZERO) + s * w
        return NcPoly(out)

    def map_tensor(self, t: TensorPoly, left: Callable[[NcPoly], NcPoly],
                   right: Callable[[NcPoly], NcPoly]) -> TensorPoly:
        out: Dict[Tuple[PbwTerm, PbwTerm], object] = {}
        for (u, v), s in t.terms.items():
            lu = left(NcPoly.term(u))
            rv = right(NcPoly.term(v))
            for a, ca in lu.terms.items():
                for b, cb in rv.terms.items():
                    out[(a, b)] = out.get((a, b), ZERO) + s * ca * cb
        return TensorPoly(out)

    def mult_tensor(self, t: TensorPoly) -> NcPoly:
        out = NcPoly()
        for (u, v), s in t.terms.items():
            out = out + NcPoly(self.term_product(u, v)).scale(s)
        return out

    def sandwich(self, left: Callable[[PbwTerm], object], right: Callable[[PbwTerm], object],
                 x: NcPoly) -> NcPoly:
        """``(left (x) i (x) right) Delta^(2)(x)`` with ``Delta^(2) = (Delta (x) i)Delta``."""
        out: Dict[PbwTerm, object] = {}
        for (u, v), s in self.comultiply(x).terms.items():
            rv = right(v)
            if rv == 0:
                continue
            for (u1, u2), r in self._term_delta(u).terms.items():
                lv = left(u1)
                if lv != 0:
                    out[u2] = out.get(u2, ZERO) + s * r * lv * rv
        return NcPoly(out)

    # -- analytic structure --------------------------------------------------

    def weak_kms_generator(self, g: str, probe_degree: int = 3) -> NcPoly:
        """Solve ``h(g y) = h(y rho(g))`` for ``rho(g)`` in the degree-1 span."""
        cand = monomials(1)
        x = NcPoly.term(GENERATORS[g])
        rows, rhs = [], []
        for y in monomials(probe_degree):
            yp = NcPoly.term(y)
            rows.append([self.haar(self.multiply(yp, NcPoly.term(t))) for t in cand])
            rhs.append(self.haar(self.multiply(x, yp)))
        sol = linalg.solve(rows, rhs)
        return NcPoly({t: c for t, c in zip(cand, sol)})

    def rho(self, x: NcPoly) -> NcPoly:
        """Weak KMS automorphism; acts on a^k c^l c*^m by ``q^{-2k}``."""
        return NcPoly({t: c * self.q ** (-2 * t.k) for t, c in x.terms.items()})

    def f_character(self, z, kappa: Optional[int] = None) -> Character:
        kappa = self.kappa if kappa is None else kappa
        return Character(_exact_q_power(self.q, kappa * complex(z)), f"f_{z}")

    def counit_sigma(self, z) -> Character:
        """``eps o sigma_z``, the character ``a -> q^{-2iz}``."""
        return Character(_exact_q_power(self.q, -2j * complex(z)), f"eps.sigma_{z}")

    def pin_kappa(self) -> Tuple[int, Dict[int, Tuple[object, object]]]:
        """Choose the f-sign that satisfies both defining constraints.

        Returns the chosen sign and, per candidate, the residuals of
        ``(f_1 (x) i (x) f_-1)Delta^(2) = S^2`` and ``f_1 * x * f_1 = rho``
        on the generators.
        """
        residuals = {}
        for kappa in (-1, 1):
            f1 = self.f_character(1, kappa)
            fm1 = self.f_character(-1, kappa)
            r_s2 = ZERO
            r_rho = ZERO
            for g in GENERATORS:
                x = NcPoly.term(GENERATORS[g])
                lhs = self.sandwich(f1.on_term, fm1.on_term, x)
                r_s2 = max(r_s2, poly_diff(lhs, self.s_squared(x)))
                lhs = self.sandwich(f1.on_term, f1.on_term, x)
                r_rho = max(r_rho, poly_diff(lhs, self.weak_kms_generator(g)))
            residuals[kappa] = (r_s2, r_rho)
        good = [k for k, (a, b) in residuals.items() if a == 0 and b == 0]
        if len(good) != 1:
            raise ValueError(f"f-sign not pinned uniquely: {residuals}")
        return good[0], residuals

    @property
    def kappa(self) -> int:
        if self._kappa is None:
            self._kappa = self.pin_kappa()[0]
        return self._kappa

    def tau_scalar(self, z, t: PbwTerm):
        return _exact_q_power(self.q, 2j * complex(z) * (t.l - t.m))

    def sigma_scalar(self, z, t: PbwTerm):
        return _exact_q_power(self.q, -2j * complex(z) * t.k)

    def _diag(self, scalar: Callable, z, x: NcPoly) -> NcPoly:
        return NcPoly({t: c * scalar(z, t) for t, c in x.terms.items()})

    def analytic_map(self, kind: str, z, x: NcPoly, route: str = "diagonal"):
        if kind == "tau":
            if route == "sandwich":
                fl, fr = self.f_character(1j * z), self.f_character(-1j * z)
                return self.sandwich(fl.on_term, fr.on_term, x)
            return self._diag(self.tau_scalar, z, x)
        if kind == "sigma":
            if route == "sandwich":
                f = self.f_character(1j * z)
                return self.sandwich(f.on_term, f.on_term, x)
            return self._diag(self.sigma_scalar, z, x)
        if kind == "sigma_prime":
            d = self.delta_power(1j * z)
            dinv = self.delta_power(-1j * z)
            return self.multiply(self.multiply(d, self.analytic_map("sigma", z, x, route)), dinv)
        if kind == "R":
            return self.antipode(self.analytic_map("tau", 0.5j, x, route))
        if kind == "f":
            return self.f_character(z)(x)
        raise ValueError(f"unknown analytic map kind {kind!r}")

    def delta_power(self, z) -> NcPoly:
        """``delta^z``; the modular element is the unit in the compact case."""
        return NcPoly.one()

    # -- vector views ----------------------------------------------------------

    def gram(self, basis: Sequence[PbwTerm]) -> List[list]:
        """``G[i][j] = h(e_j^* e_i)``."""
        polys = [NcPoly.term(t) for t in basis]
        stars = [self.star(p) for p in polys]
        return [[self.haar(self.multiply(stars[j], polys[i])) for j in range(len(basis))]
                for i in range(len(basis))]


def haar_oracle(q, degree: int = 2) -> Dict[PbwTerm, Fraction]:
    """Left-invariant state on the degree-truncated space, from invariance alone.

    Solves ``(i (x) w)Delta(x) = w(x) 1`` with ``w(1) = 1`` for all terms of
    degree at most ``degree``; does not consult the closed Haar formula.
    """
    eng = SUq2(q, degree_cap=max(degree, 1), kappa=-1)
    basis = monomials(degree)
    index = {t: i for i, t in enumerate(basis)}
    n = len(basis)
    rows, rhs = [], []
    for t in basis:
        d = eng.comultiply(NcPoly.term(t))
        block: Dict[PbwTerm, list] = {}
        for (u, v), s in d.terms.items():
            block.setdefault(u, [ZERO] * n)[index[v]] += s
        block.setdefault(UNIT_TERM, [ZERO] * n)[index[t]] -= 1
        for row in block.values():
            rows.append(row)
            rhs.append(ZERO)
    norm = [ZERO] * n
    norm[index[UNIT_TERM]] = ONE
    rows.append(norm)
    rhs.append(ONE)
    sol = linalg.solve(rows, rhs)
    if linalg.rank(rows) != n:
        raise ValueError("invariance system does not determine the state")
    return {t: c for t, c in zip(basis, sol)}


# -- suites ------------------------------------------------------------------

def _worst(items):
    best, wit = ZERO, None
    for r, w in items:
        if r > best:
            best, wit = r, w
    return best, wit


def hopf_suite(eng: SUq2, degree: int, seed: int = 20240601, words: int = 500) -> Report:
    """Hopf axioms at degree <= ``degree``, all in exact arithmetic."""
    rep = Report("hopf", f"suq2(q={eng.q})")
    basis = monomials(degree)
    polys = {t: NcPoly.term(t) for t in basis}
    one = NcPoly.one()
    ident = lambda p: p

    def coassoc(t):
        d = eng.comultiply(polys[t])
        left: Dict[tuple, object] = {}
        right: Dict[tuple, object] = {}
        for (u, v), s in d.terms.items():
            for (u1, u2), r in eng._term_delta(u).terms.items():
                left[(u1, u2, v)] = left.get((u1, u2, v), ZERO) + s * r
            for (v1, v2), r in eng._term_delta(v).terms.items():
                right[(u, v1, v2)] = right.get((u, v1, v2), ZERO) + s * r
        keys = set(left) | set(right)
        return max((magnitude(left.get(k, ZERO) - right.get(k, ZERO)) for k in keys), default=ZERO)

    r, w = _worst((coassoc(t), t.label()) for t in basis)
    rep.exact("coassociativity", "(D (x) i)D = (i (x) D)D", r, w)

    def counit_law(t):
        d = eng.comultiply(polys[t])
        lhs1 = eng.slice_left(d, lambda u: eng.counit(NcPoly.term(u)))
        lhs2 = eng.slice_right(d, lambda v: eng.counit(NcPoly.term(v)))
        return max(poly_diff(lhs1, polys[t]), poly_diff(lhs2, polys[t]))

    r, w = _worst((counit_law(t), t.label()) for t in basis)
    rep.exact("counit_law", "(eps (x) i)D = (i (x) eps)D = i", r, w)

    def antipode_eq(t, side):
        d = eng.comultiply(polys[t])
        if side == "left":
            m = eng.mult_tensor(eng.map_tensor(d, eng.antipode, ident))
        else:
            m = eng.mult_tensor(eng.map_tensor(d, ident, eng.antipode))
        return poly_diff(m, one.scale(eng.counit(polys[t])))

    r, w = _worst((antipode_eq(t, "left"), t.label()) for t in basis)
    rep.exact("antipode_left", "m(S (x) i)(D(a)(1 (x) b)) = eps(a) b", r, w)
    r, w = _worst((antipode_eq(t, "right"), t.label()) for t in basis)
    rep.exact("antipode_right", "m(i (x) S)((b (x) 1)D(a)) = eps(a) b", r, w)
    r, w = _worst((poly_diff(eng.star(eng.antipode(eng.star(eng.antipode(polys[t])))), polys[t]), t.label())
                  for t in basis)
    rep.exact("antipode_star", "S(S(a*)*) = a", r, w)
    r, w = _worst((((eng.map_tensor(eng.comultiply(polys[t]), eng.antipode, eng.antipode).flip()
                     - eng.comultiply(eng.antipode(polys[t]))).norm()), t.label()) for t in basis)
    rep.exact("antipode_comult", "chi(S (x) S)D = D S", r, w)
    r, w = _worst((poly_diff(eng.star(eng.star(polys[t])), polys[t]), t.label()) for t in basis)
    rep.exact("star_involutive", "(a*)* = a", r, w)

    half = [t for t in basis if t.degree <= degree // 2]
    pairs = list(product(half, repeat=2))

    def pair_checks(t1, t2):
        x, y = polys[t1], polys[t2]
        xy = eng.multiply(x, y)
        r_star = poly_diff(eng.star(xy), eng.multiply(eng.star(y), eng.star(x)))
        r_anti = poly_diff(eng.antipode(xy), eng.multiply(eng.antipode(y), eng.antipode(x)))
        r_delta = (eng.comultiply(xy) - eng.tensor_multiply(eng.comultiply(x), eng.comultiply(y))).norm()
        return r_star, r_anti, r_delta

    results = [(pair_checks(a, b), f"({a.label()},{b.label()})") for a, b in pairs]
    for idx, (name, anchor) in enumerate((("star_antimultiplicative", "(ab)* = b*a*"),
                                          ("antipode_antimultiplicative", "S(ab) = S(b)S(a)"),
                                          ("comult_multiplicative", "D(ab) = D(a)D(b)"))):
        r, w = _worst((res[idx], wit) for res, wit in results)
        rep.exact(name, anchor, r, w)
    r, w = _worst(((eng.comultiply(eng.star(polys[t]))
                    - eng.map_tensor(eng.comultiply(polys[t]), eng.star, eng.star)).norm(), t.label())
                  for t in basis)
    rep.exact("comult_star", "D(a*) = D(a)*", r, w)

    rng = random.Random(seed)
    gens = list(GENERATORS)

    def confluence():
        word = [rng.choice(gens) for _ in range(rng.randint(1, 8))]
        left = eng.normal_form(word)
        right = NcPoly.one()
        for g in reversed(word):
            right = eng.multiply(NcPoly.term(GENERATORS[g]), right)
        cut = rng.randint(0, len(word))
        mid = eng.multiply(eng.normal_form(word[:cut]), eng.normal_form(word[cut:]))
        return max(poly_diff(left, right), poly_diff(left, mid)), " ".join(word)

    r, w = _worst(confluence() for _ in range(words))
    rep.exact("rewriting_confluence", "all bracketings give one normal form", r, w)
    rep.config.update({"seed": seed, "words": words})

    r, w = strong_invariance(eng, [t for t in basis if t.degree <= 2])
    rep.exact("strong_left_invariance", "(i (x) phi)((1 (x) a)D(b)) = S((i (x) phi)(D(a)(1 (x) b)))", r, w)
    return rep


def strong_invariance(eng: SUq2, sample: Sequence[PbwTerm]):
    one = NcPoly.one()

    def gen():
        for ta, tb in product(sample, repeat=2):
            a, b = NcPoly.term(ta), NcPoly.term(tb)
            lhs_t = eng.tensor_multiply(TensorPoly({(UNIT_TERM, ta): ONE}), eng.comultiply(b))
            rhs_t = eng.tensor_multiply(eng.comultiply(a), TensorPoly({(UNIT_TERM, tb): ONE}))
            lhs = eng.slice_right(lhs_t, eng.haar_term)
            rhs = eng.antipode(eng.slice_right(rhs_t, eng.haar_term))
            yield poly_diff(lhs, rhs), f"({ta.label()},{tb.label()})"
    return _worst(gen())


def haar_invariance_residual(eng: SUq2, degree: int, cfg: ToleranceCfg = DEFAULT_TOL,
                             gram_degree: int = 4) -> Report:
    rep = Report("haar", f"suq2(q={eng.q})")
    basis = monomials(degree)
    one = NcPoly.one()
    r, w = _worst((poly_diff(eng.slice_right(eng.comultiply(NcPoly.term(t)), eng.haar_term),
                             one.scale(eng.haar_term(t))), t.label()) for t in basis)
    rep.exact("left_invariance", "(i (x) phi)D(a) = phi(a) 1", r, w)
    r, w = _worst((poly_diff(eng.slice_left(eng.comultiply(NcPoly.term(t)), eng.haar_term),
                             one.scale(eng.haar_term(t))), t.label()) for t in basis)
    rep.exact("right_invariance", "(psi (x) i)D(a) = psi(a) 1 with psi = h", r, w)
    rep.exact("haar_normalized", "h(1) = 1", eng.haar(one) - 1)
    r, w = strong_invariance(eng, [t for t in basis if t.degree <= 2])
    rep.exact("strong_left_invariance", "(i (x) phi)((1 (x) a)D(b)) = S((i (x) phi)(D(a)(1 (x) b)))", r, w)
    r, w = _worst((magnitude(eng.haar(eng.s_squared(NcPoly.term(t))) - eng.haar_term(t)), t.label())
                  for t in basis)
    rep.exact("mu_one", "phi S^2 = mu phi with mu = 1", r, w)

    oracle = haar_oracle(eng.q, 2)
    r, w = _worst((magnitude(oracle[t] - eng.haar_term(t)), t.label()) for t in oracle)
    rep.exact("haar_oracle_degree2", "h agrees with the solved invariance system", r, w)
    rep.notes["h(cc*)"] = str(eng.haar_term(PbwTerm(0, 1, 1)))
    rep.notes["oracle h(cc*)"] = str(oracle[PbwTerm(0, 1, 1)])

    gbasis = monomials(min(gram_degree, degree))
    g = eng.gram(gbasis)
    inner = [[g[j][i] for j in range(len(gbasis))] for i in range(len(gbasis))]
    psd, pd = linalg.exact_psd(inner)
    rep.flag("gram_positive_definite_exact", "h(x*x) > 0 for x != 0", pd, 0.0 if pd else 1.0)
    mn = linalg.min_eigenvalue(inner)
    rep.flag("gram_min_eigenvalue", "min eig h(y*x) > psd_floor", mn > cfg.psd_floor, mn)
    rep.notes["gram_min_eigenvalue"] = mn
    return rep


def modular_suite(eng: SUq2, degree: int, cfg: ToleranceCfg = DEFAULT_TOL) -> Report:
    rep = Report("modular", f"suq2(q={eng.q})")
    basis = monomials(degree)
    small = [t for t in basis if t.degree <= degree // 2]
    r, w = _worst((magnitude(eng.haar(eng.multiply(NcPoly.term(a), NcPoly.term(b)))
                             - eng.haar(eng.multiply(NcPoly.term(b), eng.rho(NcPoly.term(a))))),
                   f"({a.label()},{b.label()})") for a, b in product(small, repeat=2))
    rep.exact("weak_kms", "phi(ab) = phi(b rho(a))", r, w)
    r, w = _worst((poly_diff(eng.weak_kms_generator(g), eng.rho(NcPoly.term(GENERATORS[g]))), g)
                  for g in GENERATORS)
    rep.exact("rho_generators_solved", "rho on generators from the weak KMS system", r, w)
    r, w = _worst((poly_diff(eng.rho(eng.star(eng.rho(eng.star(NcPoly.term(t))))), NcPoly.term(t)), t.label())
                  for t in basis)
    rep.exact("rho_star", "rho(rho(a*)*) = a", r, w)
    r, w = _worst((poly_diff(eng.analytic_map("sigma", -1j, NcPoly.term(t)), eng.rho(NcPoly.term(t))), t.label())
                  for t in basis)
    rep.exact("sigma_minus_i", "sigma_{-i} = rho", r, w)
    r, w = _worst((poly_diff(eng.analytic_map("tau", -1j, NcPoly.term(t)), eng.s_squared(NcPoly.term(t))),
                   t.label()) for t in basis)
    rep.exact("tau_minus_i", "tau_{-i} = S^2", r, w)
    r, w = _worst((poly_diff(eng.slice_left(eng.comultiply(NcPoly.term(t)), eng.haar_term),
                             NcPoly.one().scale(eng.haar_term(t))), t.label()) for t in basis)
    rep.exact("delta_unit", "(phi (x) i)D(a) = phi(a) delta with delta = 1", r, w)
    r, w = _worst((magnitude(eng.haar(eng.s_squared(NcPoly.term(t))) - eng.haar_term(t)), t.label())
                  for t in basis)
    rep.exact("mu_one", "phi S^2 = mu phi with mu = 1", r, w)
    return rep


def _grid_pairs(z_grid):
    return [(y, z) for y in z_grid for z in z_grid]


def identity_suite(eng: SUq2, z_grid: Sequence[complex], degree: int,
                   cfg: ToleranceCfg = DEFAULT_TOL) -> Report:
    """Every identity of the analytic structure, both sides through the engine."""
    rep = Report("identities", f"suq2(q={eng.q})")
    basis = monomials(degree)
    polys = [NcPoly.term(t) for t in basis]
    tol = cfg.abs_tol
    amap = eng.analytic_map
    D = eng.comultiply
    tau = lambda z: (lambda p: amap("tau", z, p))
    sigma = lambda z: (lambda p: amap("sigma", z, p))
    sigmap = lambda z: (lambda p: amap("sigma_prime", z, p))
    R = lambda p: amap("R", 0, p)

    def over(fn, grid=z_grid):
        best, wit = 0.0, None
        for z in grid:
            for t, p in zip(basis, polys):
                r = float(fn(z, p))
                if r > best:
                    best, wit = r, f"z={z}, x={t.label()}"
        return best, wit

    def comm_row(left, right, mid):
        return lambda z, p: (eng.map_tensor(D(p), left(z), right(z)) - D(mid(z)(p))).norm()

    r, w = over(comm_row(tau, tau, tau))
    rep.approx("tau_tau_comult", "(tau_z (x) tau_z)D = D tau_z", r, tol, w)
    r, w = over(comm_row(tau, sigma, sigma))
    rep.approx("tau_sigma_comult", "(tau_z (x) sigma_z)D = D sigma_z", r, tol, w)
    r, w = over(comm_row(sigmap, lambda z: tau(-z), sigmap))
    rep.approx("sigmap_tau_comult", "(sigma'_z (x) tau_-z)D = D sigma'_z", r, tol, w)
    r, w = over(comm_row(sigma, lambda z: sigmap(-z), tau))
    rep.approx("sigma_sigmap_comult", "(sigma_z (x) sigma'_-z)D = D tau_z", r, tol, w)
    r, w = over(lambda z, p: (D(R(p)) - eng.map_tensor(D(p), R, R).flip()).norm(), [0])
    rep.approx("comult_R", "D R = chi(R (x) R)D", r, tol, w)
    r, w = over(lambda z, p: poly_diff(eng.antipode(p), R(amap("tau", -0.5j, p))), [0])
    rep.approx("polar_decomposition", "S = R tau_{-i/2}", r, tol, w)
    r, w = over(lambda z, p: magnitude(eng.counit(amap("tau", z, p)) - eng.counit(p)))
    rep.approx("counit_tau", "eps tau_z = eps", r, tol, w)
    r, w = over(lambda z, p: magnitude(eng.counit(R(p)) - eng.counit(p)), [0])
    rep.approx("counit_R", "eps R = eps", r, tol, w)

    best, wit = 0.0, None
    for y, z in _grid_pairs(z_grid):
        for t, p in zip(basis, polys):
            r = float(poly_diff(amap("tau", y, amap("sigma", z, p)), amap("sigma", z, amap("tau", y, p))))
            if r > best:
                best, wit = r, f"y={y}, z={z}, x={t.label()}"
    rep.approx("tau_sigma_commute", "tau_y sigma_z = sigma_z tau_y", best, tol, wit)

    r, w = over(lambda z, p: magnitude(eng.haar(amap("sigma", z, p)) - eng.haar(p)))
    rep.approx("haar_sigma", "phi sigma_z = phi", r, tol, w)
    nu = ONE
    r, w = over(lambda z, p: magnitude(eng.haar(amap("tau", z, p)) - complex(nu) ** complex(z) * eng.haar(p)))
    rep.approx("haar_tau", "phi tau_z = nu^z phi (nu = 1)", r, tol, w)

    # phi R is a positive (right) Haar functional
    hR = lambda t: eng.haar(R(NcPoly.term(t)))
    r, w = over(lambda z, p: max(poly_diff(eng.slice_left(D(p), hR), NcPoly.one().scale(eng.haar(R(p)))),
                                 poly_diff(eng.slice_right(D(p), hR), NcPoly.one().scale(eng.haar(R(p))))), [0])
    gb = monomials(min(degree, 4))
    gram = [[eng.haar(R(eng.multiply(eng.star(NcPoly.term(gb[j])), NcPoly.term(gb[i]))))
             for j in range(len(gb))] for i in range(len(gb))]
    mn = linalg.min_eigenvalue([[gram[j][i] for j in range(len(gb))] for i in range(len(gb))])
    rep.approx("haar_R_positive_invariant", "phi R is a positive Haar functional",
               max(r, 0.0 if mn > cfg.psd_floor else abs(mn) + tol), tol, w)
    rep.notes["haar_R_gram_min_eigenvalue"] = mn

    r, w = over(lambda z, p: magnitude(eng.haar(eng.antipode(p)) - complex(nu) ** (-0.5j) * eng.haar(R(p))), [0])
    rep.approx("haar_S_R", "phi S = nu^{-i/2} phi R", r, tol, w)
    r, w = over(lambda z, p: magnitude(eng.haar(R(p)) - eng.haar(eng.multiply(
        eng.multiply(eng.delta_power(0.5), p), eng.delta_power(0.5)))), [0])
    rep.approx("haar_R_delta", "phi(R(a)) = phi(delta^{1/2} a delta^{1/2})", r, tol, w)

    def delta_calculus(z, p):
        d = eng.delta_power(z)
        dd = eng.comultiply(d) - eng.tensor_multiply(TensorPoly({(t, UNIT_TERM): c for t, c in d.terms.items()}),
                                                     TensorPoly({(UNIT_TERM, t): c for t, c in d.terms.items()}))
        return max(float(dd.norm()), abs(complex(eng.counit(d)) - 1),
                   float(poly_diff(eng.antipode(d), eng.delta_power(-z))),
                   float(poly_diff(R(d), eng.delta_power(-z))))
    r, w = over(delta_calculus, z_grid)
    rep.approx("delta_calculus", "D(delta^z) = delta^z (x) delta^z, eps(delta^z) = 1, S(delta^z) = R(delta^z) = delta^-z",
               r, tol, w)
    best, wit = 0.0, None
    for y, z in _grid_pairs(z_grid):
        r = float(poly_diff(amap("sigma", z, eng.delta_power(y)),
                            eng.delta_power(y).scale(complex(nu) ** (-complex(y) * complex(z)))))
        if r > best:
            best, wit = r, f"y={y}, z={z}"
    rep.approx("sigma_delta", "sigma_z(delta^y) = nu^{-yz} delta^y", best, tol, wit)
    r, w = over(lambda z, p: poly_diff(amap("sigma_prime", z, p), R(amap("sigma", -z, R(p)))))
    rep.approx("sigmap_R_sigma_R", "sigma'_z = R sigma_-z R", r, tol, w)
    r, w = over(lambda z, p: poly_diff(R(R(p)), p), [0])
    rep.approx("R_involution", "R^2 = i", r, tol, w)
    r, w = over(lambda z, p: poly_diff(amap("sigma", z, p), amap("sigma", z, p, route="sandwich")))
    rep.approx("sigma_sandwich", "sigma_z(x) = f_{iz} * x * f_{iz}", r, tol, w)
    r, w = over(lambda z, p: poly_diff(amap("tau", z, p), amap("tau", z, p, route="sandwich")))
    rep.approx("tau_sandwich", "tau_z(x) = f_{iz} * x * f_{-iz}", r, tol, w)
    rep.notes["f_sign"] = f"f_z(a) = q^({eng.kappa}z)"
    return rep


def f_sign_report(eng: SUq2) -> Report:
    rep = Report("f_sign", f"suq2(q={eng.q})")
    free = SUq2(eng.q, eng.degree_cap)
    pinned, residuals = free.pin_kappa()
    r_s2, r_rho = residuals[eng.kappa]
    rep.exact("f_sign_s2_constraint", "(f_1 (x) i (x) f_-1)D^(2) = S^2", r_s2, f"kappa={eng.kappa}")
    rep.exact("f_sign_rho_constraint", "f_1 * a * f_1 = rho(a)", r_rho, f"kappa={eng.kappa}")
    rep.notes["resolved_f_sign"] = pinned
    rep.notes["f_sign_in_use"] = eng.kappa
    return rep
