"""Finite-dimensional Hopf *-algebras given by structure constants.

Everything structural (axioms, counit, antipode, Haar functional, modular
data, duality) is solved and checked in exact arithmetic.  Only the spectral
decomposition of the modular operator goes through floating point.

Coordinates: an element is a dense list ``x`` with ``x[i]`` the coefficient
of basis vector ``e_i``; a linear map is a matrix ``M`` with ``M[l][j]`` the
coefficient of ``e_l`` in the image of ``e_j``; a tensor in ``A (x) A`` is a
dict ``{(j, k): coeff}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .report import Report
from .scalars import DEFAULT_TOL, ToleranceCfg, conj, magnitude

ZERO = Fraction(0)
ONE = Fraction(1)

Vector = List
Tensor = Dict[Tuple[int, int], object]
Matrix = List[list]


class StructureError(ValueError):
    """Input tables are malformed or violate a defining law."""


class NotHopfError(StructureError):
    pass


class HaarError(StructureError):
    pass


@dataclass
class Element:
    """Sparse coefficient map ``basis index -> scalar`` (zeros never stored)."""

    coeffs: Dict[int, object] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {i: c for i, c in self.coeffs.items() if c != 0}

    @classmethod
    def from_dense(cls, vec: Sequence) -> "Element":
        return cls({i: c for i, c in enumerate(vec)})

    def dense(self, n: int) -> Vector:
        out = [ZERO] * n
        for i, c in self.coeffs.items():
            out[i] = c
        return out


@dataclass
class Functional:
    covector: Vector
    name: str = ""
    meta: Dict[str, object] = field(default_factory=dict)

    def __call__(self, x: Sequence):
        return sum((c * v for c, v in zip(self.covector, x)), ZERO)


@dataclass
class AlgebraSpec:
    dim: int
    basis_labels: List[str]
    mult: List[List[Dict[int, object]]]
    star: List[Dict[int, object]]
    unit: Dict[int, object]
    comult: List[Dict[Tuple[int, int], object]]
    name: str = ""

    # -- coordinates ---------------------------------------------------------

    def basis(self, i: int) -> Vector:
        v = [ZERO] * self.dim
        v[i] = ONE
        return v

    def unit_vec(self) -> Vector:
        return Element(dict(self.unit)).dense(self.dim)

    def zero(self) -> Vector:
        return [ZERO] * self.dim

    def label(self, i: int) -> str:
        return self.basis_labels[i]

    # -- algebra -------------------------------------------------------------

    def mul(self, x: Sequence, y: Sequence) -> Vector:
        out = [ZERO] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            row = self.mult[i]
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                c = xi * yj
                for k, s in row[j].items():
                    out[k] += c * s
        return out

    def star_vec(self, x: Sequence) -> Vector:
        out = [ZERO] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            c = conj(xi)
            for k, s in self.star[i].items():
                out[k] += c * s
        return out

    # -- coalgebra -----------------------------------------------------------

    def comul(self, x: Sequence) -> Tensor:
        out: Tensor = {}
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for jk, s in self.comult[i].items():
                out[jk] = out.get(jk, ZERO) + xi * s
        return _prune(out)

    def tensor_mul(self, t: Tensor, u: Tensor) -> Tensor:
        out: Tensor = {}
        for (a, b), s in t.items():
            for (c, d), r in u.items():
                left = self.mult[a][c]
                right = self.mult[b][d]
                for k, lk in left.items():
                    for m, rm in right.items():
                        out[(k, m)] = out.get((k, m), ZERO) + s * r * lk * rm
        return _prune(out)

    def pure(self, x: Sequence, y: Sequence) -> Tensor:
        return _prune({(i, j): xi * yj for i, xi in enumerate(x) for j, yj in enumerate(y)
                       if xi != 0 and yj != 0})


def _prune(t: dict) -> dict:
    return {k: v for k, v in t.items() if v != 0}


# -- small linear helpers ----------------------------------------------------

def apply(m: Matrix, x: Sequence) -> Vector:
    return [sum((row[j] * x[j] for j in range(len(x)) if x[j] != 0), ZERO) for row in m]


def compose(a: Matrix, b: Matrix) -> Matrix:
    return linalg.matmul(a, b)


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def columns_to_matrix(cols: Sequence[Sequence]) -> Matrix:
    n = len(cols)
    return [[cols[j][i] for j in range(n)] for i in range(len(cols[0]))]


def vec_diff(x: Sequence, y: Sequence):
    return max((magnitude(a - b) for a, b in zip(x, y)), default=ZERO)


def tensor_diff(t: Tensor, u: Tensor):
    keys = set(t) | set(u)
    return max((magnitude(t.get(k, ZERO) - u.get(k, ZERO)) for k in keys), default=ZERO)


def map_tensor(t: Tensor, left: Optional[Matrix], right: Optional[Matrix]) -> Tensor:
    """``(left (x) right)`` applied to a tensor; ``None`` means identity."""
    out: Tensor = {}
    for (a, b), s in t.items():
        lcol = {a: ONE} if left is None else {l: left[l][a] for l in range(len(left)) if left[l][a] != 0}
        rcol = {b: ONE} if right is None else {r: right[r][b] for r in range(len(right)) if right[r][b] != 0}
        for l, lv in lcol.items():
            for r, rv in rcol.items():
                out[(l, r)] = out.get((l, r), ZERO) + s * lv * rv
    return _prune(out)


def flip(t: Tensor) -> Tensor:
    return {(b, a): s for (a, b), s in t.items()}


def slice_right(spec: AlgebraSpec, t: Tensor, omega: Sequence) -> Vector:
    """``(iota (x) omega) t`` for a covector ``omega``."""
    out = spec.zero()
    for (a, b), s in t.items():
        out[a] += s * omega[b]
    return out


def slice_left(spec: AlgebraSpec, t: Tensor, omega: Sequence) -> Vector:
    """``(omega (x) iota) t``."""
    out = spec.zero()
    for (a, b), s in t.items():
        out[b] += s * omega[a]
    return out


def evaluate(cov: Sequence, x: Sequence):
    return sum((c * v for c, v in zip(cov, x) if v != 0), ZERO)


def _worst(items):
    """Max residual over ``(residual, witness)`` pairs, keeping the witness."""
    best, wit = ZERO, None
    for r, w in items:
        if r > best:
            best, wit = r, w
    return best, wit


# -- validation --------------------------------------------------------------

def check_well_formed(spec: AlgebraSpec) -> None:
    n = spec.dim
    if n <= 0:
        raise StructureError("dim must be positive")
    if len(spec.basis_labels) != n:
        raise StructureError(f"expected {n} basis labels, got {len(spec.basis_labels)}")
    if len(spec.mult) != n or any(len(row) != n for row in spec.mult):
        raise StructureError("mult must be an n x n table")
    for i, j in product(range(n), repeat=2):
        for k in spec.mult[i][j]:
            if not 0 <= k < n:
                raise StructureError(f"mult entry ({i},{j}) refers to basis index {k}")
    if len(spec.star) != n:
        raise StructureError("star must have one row per basis element")
    for i, row in enumerate(spec.star):
        for k in row:
            if not 0 <= k < n:
                raise StructureError(f"star entry {i} refers to basis index {k}")
    for k in spec.unit:
        if not 0 <= k < n:
            raise StructureError(f"unit refers to basis index {k}")
    if len(spec.comult) != n:
        raise StructureError("comult must have one entry per basis element")
    for i, row in enumerate(spec.comult):
        for (j, k) in row:
            if not (0 <= j < n and 0 <= k < n):
                raise StructureError(f"comult entry {i} refers to pair ({j},{k})")


def t_matrix(spec: AlgebraSpec, which: int) -> Matrix:
    """Matrix of ``T1(a(x)b) = D(a)(b(x)1)`` or ``T2(a(x)b) = D(a)(1(x)b)``."""
    n = spec.dim
    one = spec.unit_vec()
    cols = []
    for a, b in product(range(n), repeat=2):
        if which == 1:
            factor = spec.pure(spec.basis(b), one)
        else:
            factor = spec.pure(one, spec.basis(b))
        t = spec.tensor_mul(spec.comul(spec.basis(a)), factor)
        cols.append([t.get((j, k), ZERO) for j, k in product(range(n), repeat=2)])
    return columns_to_matrix(cols)


def validate_structure(spec: AlgebraSpec) -> Report:
    """Exact residuals for every multiplier Hopf *-algebra axiom."""
    check_well_formed(spec)
    n = spec.dim
    rep = Report("structure", spec.name)
    e = [spec.basis(i) for i in range(n)]
    one = spec.unit_vec()
    L = spec.label

    r, w = _worst((vec_diff(spec.mul(spec.mul(e[i], e[j]), e[k]), spec.mul(e[i], spec.mul(e[j], e[k]))),
                   f"({L(i)},{L(j)},{L(k)})") for i, j, k in product(range(n), repeat=3))
    rep.exact("associativity", "(ab)c = a(bc)", r, w)
    r, w = _worst((max(vec_diff(spec.mul(one, e[i]), e[i]), vec_diff(spec.mul(e[i], one), e[i])), L(i))
                  for i in range(n))
    rep.exact("unit", "1a = a1 = a", r, w)
    r, w = _worst((vec_diff(spec.star_vec(spec.star_vec(e[i])), e[i]), L(i)) for i in range(n))
    rep.exact("star_involutive", "(a*)* = a", r, w)
    r, w = _worst((vec_diff(spec.star_vec(spec.mul(e[i], e[j])), spec.mul(spec.star_vec(e[j]), spec.star_vec(e[i]))),
                   f"({L(i)},{L(j)})") for i, j in product(range(n), repeat=2))
    rep.exact("star_antimultiplicative", "(ab)* = b*a*", r, w)

    D = [spec.comul(x) for x in e]
    r, w = _worst((tensor_diff(spec.comul(spec.mul(e[i], e[j])), spec.tensor_mul(D[i], D[j])),
                   f"({L(i)},{L(j)})") for i, j in product(range(n), repeat=2))
    rep.exact("comult_multiplicative", "D(ab) = D(a)D(b)", r, w)
    rep.exact("comult_unital", "D(1) = 1 (x) 1", tensor_diff(spec.comul(one), spec.pure(one, one)), "1")
    r, w = _worst((tensor_diff(spec.comul(spec.star_vec(e[i])), _star_tensor(spec, D[i])), L(i))
                  for i in range(n))
    rep.exact("comult_star", "D(a*) = D(a)*", r, w)
    r, w = _worst((_coassoc_residual(spec, D, i), L(i)) for i in range(n))
    rep.exact("coassociativity", "(D (x) i)D = (i (x) D)D", r, w)
    for which in (1, 2):
        rk = linalg.rank(t_matrix(spec, which))
        rep.exact(f"T{which}_bijective", f"T{which} has full rank n^2", Fraction(n * n - rk),
                  f"rank {rk} < {n * n}")
        rep.notes[f"rank_T{which}"] = rk
    return rep


def _star_tensor(spec: AlgebraSpec, t: Tensor) -> Tensor:
    out: Tensor = {}
    for (a, b), s in t.items():
        sa, sb = spec.star[a], spec.star[b]
        for k, u in sa.items():
            for m, v in sb.items():
                out[(k, m)] = out.get((k, m), ZERO) + conj(s) * u * v
    return _prune(out)


def _coassoc_residual(spec: AlgebraSpec, D: List[Tensor], i: int):
    left: Dict[tuple, object] = {}
    right: Dict[tuple, object] = {}
    for (a, b), s in D[i].items():
        for (c, d), r in D[a].items():
            left[(c, d, b)] = left.get((c, d, b), ZERO) + s * r
        for (c, d), r in D[b].items():
            right[(a, c, d)] = right.get((a, c, d), ZERO) + s * r
    keys = set(left) | set(right)
    return max((magnitude(left.get(k, ZERO) - right.get(k, ZERO)) for k in keys), default=ZERO)


def coassociativity_triple(spec: AlgebraSpec, i: int) -> Tuple[dict, dict]:
    D = [spec.comul(spec.basis(j)) for j in range(spec.dim)]
    left: Dict[tuple, object] = {}
    right: Dict[tuple, object] = {}
    for (a, b), s in D[i].items():
        for (c, d), r in D[a].items():
            left[(c, d, b)] = left.get((c, d, b), ZERO) + s * r
        for (c, d), r in D[b].items():
            right[(a, c, d)] = right.get((a, c, d), ZERO) + s * r
    return _prune(left), _prune(right)


def require_valid(spec: AlgebraSpec) -> Report:
    rep = validate_structure(spec)
    if not rep.passed:
        bad = ", ".join(e.id + (f" at {e.witness}" if e.witness else "") for e in rep.entries if not e.passed)
        raise StructureError(f"{spec.name or 'instance'} fails: {bad}")
    return rep


# -- counit, antipode --------------------------------------------------------

def solve_counit(spec: AlgebraSpec) -> Functional:
    n = spec.dim
    rows, rhs = [], []
    for i in range(n):
        t = spec.comult[i]
        for k in range(n):
            rows.append([t.get((j, k), ZERO) for j in range(n)])
            rhs.append(ONE if i == k else ZERO)
            rows.append([t.get((k, j), ZERO) for j in range(n)])
            rhs.append(ONE if i == k else ZERO)
    try:
        eps = linalg.solve(rows, rhs)
    except linalg.InconsistentSystem:
        raise NotHopfError("not a multiplier Hopf algebra: the counit equations have no solution")
    if linalg.rank(rows) != n:
        raise NotHopfError("not a multiplier Hopf algebra: the counit is not unique")
    e = [spec.basis(i) for i in range(n)]
    for i, j in product(range(n), repeat=2):
        if evaluate(eps, spec.mul(e[i], e[j])) != eps[i] * eps[j]:
            raise NotHopfError(f"counit is not multiplicative on ({spec.label(i)},{spec.label(j)})")
    for i in range(n):
        if evaluate(eps, spec.star_vec(e[i])) != conj(eps[i]):
            raise NotHopfError(f"counit does not respect * on {spec.label(i)}")
    return Functional(eps, "counit")


def solve_antipode(spec: AlgebraSpec, eps: Functional) -> Matrix:
    """Solve both antipode equations for the matrix ``S``.

    Unknown ``s[l][j]`` (coefficient of ``e_l`` in ``S(e_j)``) is flattened to
    index ``l * n + j``.
    """
    n = spec.dim
    one = spec.unit_vec()
    rows, rhs = [], []
    for i in range(n):
        t = spec.comult[i]
        left = [[ZERO] * (n * n) for _ in range(n)]
        right = [[ZERO] * (n * n) for _ in range(n)]
        for (j, k), c in t.items():
            for l in range(n):
                for m, s in spec.mult[l][k].items():    # S(e_j) e_k
                    left[m][l * n + j] += c * s
                for m, s in spec.mult[j][l].items():    # e_j S(e_k)
                    right[m][l * n + k] += c * s
        for m in range(n):
            rows.append(left[m])
            rhs.append(eps.covector[i] * one[m])
            rows.append(right[m])
            rhs.append(eps.covector[i] * one[m])
    try:
        flat = linalg.solve(rows, rhs)
    except linalg.InconsistentSystem:
        raise NotHopfError("antipode does not exist")
    if linalg.rank(rows) != n * n:
        raise NotHopfError("antipode does not exist: the solution is not unique")
    return [[flat[l * n + j] for j in range(n)] for l in range(n)]


def inverse_map(m: Matrix) -> Matrix:
    return linalg.inverse(m)


# -- Haar functional ---------------------------------------------------------

def gram_matrix(spec: AlgebraSpec, phi: Sequence) -> Matrix:
    """``G[i][j] = phi(e_j^* e_i)``."""
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    st = [spec.star_vec(x) for x in e]
    return [[evaluate(phi, spec.mul(st[j], e[i])) for j in range(n)] for i in range(n)]


def inner_matrix(gram: Matrix) -> Matrix:
    """Matrix ``M`` with ``<u, v> = v^H M u`` (the transpose of the Gram)."""
    n = len(gram)
    return [[gram[j][i] for j in range(n)] for i in range(n)]


def invariance_system(spec: AlgebraSpec, side: str = "left") -> Matrix:
    """Rows of ``(i (x) w)D(e_i) - w(e_i) 1 = 0`` (left) or the right analogue."""
    n = spec.dim
    one = spec.unit_vec()
    rows = []
    for i in range(n):
        block = [[ZERO] * n for _ in range(n)]
        for (j, k), c in spec.comult[i].items():
            if side == "left":
                block[j][k] += c
            else:
                block[k][j] += c
        for m in range(n):
            block[m][i] -= one[m]
            rows.append(block[m])
    return rows


def solve_haar(spec: AlgebraSpec, cfg: ToleranceCfg = DEFAULT_TOL) -> Functional:
    n = spec.dim
    null = linalg.nullspace(invariance_system(spec, "left"), n)
    if len(null) != 1:
        raise HaarError(f"no/ambiguous Haar functional: invariant space has dimension {len(null)}")
    phi = null[0]
    norm = evaluate(phi, spec.unit_vec())
    if norm == 0:
        raise HaarError("invariant functional vanishes on the unit")
    phi = [c / norm for c in phi]
    g = gram_matrix(spec, phi)
    psd, pd = linalg.exact_psd(inner_matrix(g))
    min_eig = linalg.min_eigenvalue(inner_matrix(g))
    if not psd or min_eig <= cfg.psd_floor:
        raise HaarError(f"Haar functional not positive (min Gram eigenvalue {min_eig:.3e})")
    if not pd:
        raise HaarError("Haar functional not faithful (singular Gram matrix)")
    return Functional(phi, "haar", {"gram": g, "min_eigenvalue": min_eig,
                                     "invariant_dim": len(null)})


# -- modular data ------------------------------------------------------------

@dataclass
class ModularData:
    rho: Matrix
    rho_prime: Matrix
    delta: Vector
    delta_inv: Vector
    mu: object
    nu: object
    S: Matrix
    eps: Functional


def _phi_pair(spec: AlgebraSpec, phi: Sequence) -> Matrix:
    """``P[j][l] = phi(e_j e_l)``."""
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    return [[evaluate(phi, spec.mul(e[j], e[l])) for l in range(n)] for j in range(n)]


def solve_weak_kms(spec: AlgebraSpec, phi: Sequence) -> Matrix:
    n = spec.dim
    pair = _phi_pair(spec, phi)
    # phi(e_j rho(e_i)) = phi(e_i e_j)
    try:
        cols = linalg.solve_many(pair, [[pair[i][j] for j in range(n)] for i in range(n)])
    except linalg.InconsistentSystem:
        raise StructureError("weak KMS system phi(ab) = phi(b rho(a)) is inconsistent")
    return columns_to_matrix(cols)


def solve_modular_element(spec: AlgebraSpec, phi: Sequence, S: Matrix) -> Vector:
    """Solve ``(phi (x) i)(D(a)(1 (x) b)) = phi(a) delta b`` on all basis pairs."""
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    rows, rhs = [], []
    for a, b in product(range(n), repeat=2):
        lhs = spec.mul(slice_left(spec, spec.comult[a], phi), e[b])
        # coefficient matrix of delta -> phi(a) delta e_b
        block = [[ZERO] * n for _ in range(n)]
        for l in range(n):
            for m, s in spec.mult[l][b].items():
                block[m][l] += phi[a] * s
        rows.extend(block)
        rhs.extend(lhs)
    try:
        delta = linalg.solve(rows, rhs)
    except linalg.InconsistentSystem:
        raise StructureError("modular element equation has no solution")
    resid = max((magnitude(sum((r * d for r, d in zip(row, delta)), ZERO) - v)
                 for row, v in zip(rows, rhs)), default=ZERO)
    if resid != 0:
        raise StructureError(f"modular element residual {resid} is not zero")
    return delta


def left_inverse(spec: AlgebraSpec, x: Sequence) -> Vector:
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    lmul = columns_to_matrix([spec.mul(x, e[j]) for j in range(n)])
    try:
        return linalg.solve(lmul, spec.unit_vec())
    except linalg.InconsistentSystem:
        raise StructureError("element is not invertible")


def derive_modular_data(spec: AlgebraSpec, phi: Functional) -> ModularData:
    n = spec.dim
    eps = solve_counit(spec)
    S = solve_antipode(spec, eps)
    rho = solve_weak_kms(spec, phi.covector)
    delta = solve_modular_element(spec, phi.covector, S)
    delta_inv = left_inverse(spec, delta)
    if vec_diff(spec.mul(delta, delta_inv), spec.unit_vec()) != 0:
        raise StructureError("modular element has no two-sided inverse")
    S2 = compose(S, S)
    mu = None
    for i in range(n):
        if phi.covector[i] != 0:
            mu = evaluate(phi.covector, apply(S2, spec.basis(i))) / phi.covector[i]
            break
    for i in range(n):
        if evaluate(phi.covector, apply(S2, spec.basis(i))) != mu * phi.covector[i]:
            raise StructureError("phi S^2 is not a multiple of phi")
    rho_prime = columns_to_matrix([spec.mul(spec.mul(delta, apply(rho, spec.basis(j))), delta_inv)
                                   for j in range(n)])
    return ModularData(rho, rho_prime, delta, delta_inv, mu, ONE, S, eps)


def hopf_report(spec: AlgebraSpec) -> Report:
    """Axioms plus counit/antipode laws and strong left invariance."""
    rep = validate_structure(spec)
    rep.suite = "hopf"
    if not rep.passed:
        return rep
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    one = spec.unit_vec()
    L = spec.label
    try:
        eps = solve_counit(spec)
        S = solve_antipode(spec, eps)
    except NotHopfError as exc:
        rep.flag("counit_antipode_solvable", "counit and antipode exist", False, 1.0, str(exc))
        return rep
    rep.notes["counit"] = [str(c) for c in eps.covector]
    D = [spec.comul(x) for x in e]
    r, w = _worst((max(vec_diff(slice_left(spec, D[i], eps.covector), e[i]),
                       vec_diff(slice_right(spec, D[i], eps.covector), e[i])), L(i)) for i in range(n))
    rep.exact("counit_law", "(eps (x) i)D = (i (x) eps)D = i", r, w)

    def antipode_left(a, b):
        t = spec.tensor_mul(D[a], spec.pure(one, e[b]))
        out = spec.zero()
        for (j, k), c in t.items():
            out = [o + c * v for o, v in zip(out, spec.mul(apply(S, e[j]), e[k]))]
        return out

    def antipode_right(a, b):
        t = spec.tensor_mul(spec.pure(e[b], one), D[a])
        out = spec.zero()
        for (j, k), c in t.items():
            out = [o + c * v for o, v in zip(out, spec.mul(e[j], apply(S, e[k])))]
        return out

    r, w = _worst((vec_diff(antipode_left(a, b), [eps.covector[a] * x for x in e[b]]), f"({L(a)},{L(b)})")
                  for a, b in product(range(n), repeat=2))
    rep.exact("antipode_left", "m(S (x) i)(D(a)(1 (x) b)) = eps(a) b", r, w)
    r, w = _worst((vec_diff(antipode_right(a, b), [eps.covector[a] * x for x in e[b]]), f"({L(a)},{L(b)})")
                  for a, b in product(range(n), repeat=2))
    rep.exact("antipode_right", "m(i (x) S)((b (x) 1)D(a)) = eps(a) b", r, w)
    r, w = _worst((vec_diff(spec.star_vec(apply(S, spec.star_vec(apply(S, e[i])))), e[i]), L(i))
                  for i in range(n))
    rep.exact("antipode_star", "S(S(a*)*) = a", r, w)
    r, w = _worst((vec_diff(apply(S, spec.mul(e[i], e[j])), spec.mul(apply(S, e[j]), apply(S, e[i]))),
                   f"({L(i)},{L(j)})") for i, j in product(range(n), repeat=2))
    rep.exact("antipode_antimultiplicative", "S(ab) = S(b)S(a)", r, w)
    r, w = _worst((tensor_diff(flip(map_tensor(D[i], S, S)), spec.comul(apply(S, e[i]))), L(i))
                  for i in range(n))
    rep.exact("antipode_comult", "chi(S (x) S)D = D S", r, w)
    try:
        phi = solve_haar(spec)
    except HaarError as exc:
        rep.flag("strong_left_invariance", "(i (x) phi)((1 (x) a)D(b)) = S((i (x) phi)(D(a)(1 (x) b)))",
                 False, 1.0, str(exc))
        return rep
    r, w = strong_left_invariance(spec, phi.covector, S)
    rep.exact("strong_left_invariance",
              "(i (x) phi)((1 (x) a)D(b)) = S((i (x) phi)(D(a)(1 (x) b)))", r, w)
    return rep


def strong_left_invariance(spec: AlgebraSpec, phi: Sequence, S: Matrix):
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    one = spec.unit_vec()
    D = [spec.comul(x) for x in e]

    def gen():
        for a, b in product(range(n), repeat=2):
            lhs = slice_right(spec, spec.tensor_mul(spec.pure(one, e[a]), D[b]), phi)
            rhs = apply(S, slice_right(spec, spec.tensor_mul(D[a], spec.pure(one, e[b])), phi))
            yield vec_diff(lhs, rhs), f"({spec.label(a)},{spec.label(b)})"
    return _worst(gen())


def haar_report(spec: AlgebraSpec, cfg: ToleranceCfg = DEFAULT_TOL) -> Report:
    rep = Report("haar", spec.name)
    n = spec.dim
    null = linalg.nullspace(invariance_system(spec, "left"), n)
    rep.exact("left_invariant_space_one_dimensional", "left invariant functionals are unique up to scalar",
              Fraction(abs(len(null) - 1)), f"dimension {len(null)}")
    try:
        phi = solve_haar(spec, cfg)
    except HaarError as exc:
        rep.flag("haar_positive_faithful", "phi positive and faithful", False, 1.0, str(exc))
        return rep
    rep.notes["phi"] = [str(c) for c in phi.covector]
    g = phi.meta["gram"]
    psd, pd = linalg.exact_psd(inner_matrix(g))
    rep.flag("gram_positive_definite_exact", "phi(a*a) > 0 for a != 0", pd,
             0.0 if pd else 1.0, "exact elimination found a non-positive pivot")
    rep.flag("gram_min_eigenvalue", "min eig G > 1e-10", phi.meta["min_eigenvalue"] > 1e-10,
             phi.meta["min_eigenvalue"])
    rep.notes["gram_min_eigenvalue"] = phi.meta["min_eigenvalue"]
    rep.exact("phi_normalized", "phi(1) = 1", evaluate(phi.covector, spec.unit_vec()) - 1)
    r = max((magnitude(v) for v in apply_rows(invariance_system(spec, "left"), phi.covector)), default=ZERO)
    rep.exact("left_invariance", "(i (x) phi)D(a) = phi(a) 1", r)
    right_null = linalg.nullspace(invariance_system(spec, "right"), n)
    rep.exact("right_invariant_space_one_dimensional", "right invariant functionals are unique up to scalar",
              Fraction(abs(len(right_null) - 1)), f"dimension {len(right_null)}")
    return rep


def apply_rows(rows: Matrix, x: Sequence) -> Vector:
    return [sum((r * v for r, v in zip(row, x)), ZERO) for row in rows]


def modular_report(spec: AlgebraSpec, phi: Functional, md: ModularData) -> Report:
    """Every modular-data law, plus the finite-dimensional Kac collapse."""
    rep = Report("modular", spec.name)
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    L = spec.label
    ph = phi.covector
    S, rho, rhop = md.S, md.rho, md.rho_prime
    S2 = compose(S, S)
    Sinv = inverse_map(S)
    Sm2 = compose(Sinv, Sinv)
    psi = [evaluate(ph, apply(S, x)) for x in e]
    D = [spec.comul(x) for x in e]
    one = spec.unit_vec()
    pairs = list(product(range(n), repeat=2))

    r, w = _worst((magnitude(evaluate(ph, spec.mul(e[a], e[b])) - evaluate(ph, spec.mul(e[b], apply(rho, e[a])))),
                   f"({L(a)},{L(b)})") for a, b in pairs)
    rep.exact("weak_kms", "phi(ab) = phi(b rho(a))", r, w)
    r, w = _worst((vec_diff(apply(rho, spec.star_vec(apply(rho, spec.star_vec(e[i])))), e[i]), L(i))
                  for i in range(n))
    rep.exact("rho_star", "rho(rho(a*)*) = a", r, w)
    r, w = _worst((magnitude(evaluate(psi, spec.mul(e[a], e[b])) - evaluate(psi, spec.mul(e[b], apply(rhop, e[a])))),
                   f"({L(a)},{L(b)})") for a, b in pairs)
    rep.exact("weak_kms_psi", "psi(ab) = psi(b rho'(a))", r, w)
    rep.exact("S_rho_prime", "S rho' = rho S",
              max(vec_diff(a, b) for a, b in zip(compose(S, rhop), compose(rho, S))))
    rep.exact("S2_commutes_rho", "S^2 rho = rho S^2",
              max(vec_diff(a, b) for a, b in zip(compose(S2, rho), compose(rho, S2))))
    rep.exact("S2_commutes_rho_prime", "S^2 rho' = rho' S^2",
              max(vec_diff(a, b) for a, b in zip(compose(S2, rhop), compose(rhop, S2))))
    r, w = _worst((tensor_diff(spec.comul(apply(rho, e[i])), map_tensor(D[i], S2, rho)), L(i)) for i in range(n))
    rep.exact("comult_rho", "D rho = (S^2 (x) rho)D", r, w)
    r, w = _worst((tensor_diff(spec.comul(apply(rhop, e[i])), map_tensor(D[i], rhop, Sm2)), L(i)) for i in range(n))
    rep.exact("comult_rho_prime", "D rho' = (rho' (x) S^-2)D", r, w)
    r, w = _worst((vec_diff(slice_left(spec, spec.tensor_mul(D[a], spec.pure(one, e[b])), ph),
                            [ph[a] * v for v in spec.mul(md.delta, e[b])]), f"({L(a)},{L(b)})") for a, b in pairs)
    rep.exact("modular_element_left", "(phi (x) i)(D(a)(1 (x) b)) = phi(a) delta b", r, w)
    r, w = _worst((vec_diff(slice_right(spec, spec.tensor_mul(D[a], spec.pure(e[b], one)), psi),
                            [psi[a] * v for v in spec.mul(md.delta_inv, e[b])]), f"({L(a)},{L(b)})") for a, b in pairs)
    rep.exact("modular_element_right", "(i (x) psi)(D(a)(b (x) 1)) = psi(a) delta^-1 b", r, w)
    rep.exact("delta_grouplike", "D(delta) = delta (x) delta",
              tensor_diff(spec.comul(md.delta), spec.pure(md.delta, md.delta)))
    rep.exact("delta_counit", "eps(delta) = 1", evaluate(md.eps.covector, md.delta) - 1)
    rep.exact("delta_antipode", "S(delta) = delta^-1", vec_diff(apply(S, md.delta), md.delta_inv))
    r, w = _worst((max(magnitude(evaluate(ph, apply(S, e[i])) - evaluate(ph, spec.mul(e[i], md.delta))),
                       magnitude(evaluate(ph, spec.mul(e[i], md.delta)) - md.mu * evaluate(ph, spec.mul(md.delta, e[i])))),
                   L(i)) for i in range(n))
    rep.exact("phi_S", "phi(S(a)) = phi(a delta) = mu phi(delta a)", r, w)
    r, w = _worst((magnitude(evaluate(ph, apply(S2, e[i])) - md.mu * ph[i]), L(i)) for i in range(n))
    rep.exact("phi_S2_mu", "phi S^2 = mu phi", r, w)
    r, w = _worst((magnitude(evaluate(ph, apply(S2, e[i]))
                             - evaluate(ph, spec.mul(spec.mul(md.delta_inv, e[i]), md.delta))), L(i)) for i in range(n))
    rep.exact("phi_S2_delta", "phi(S^2(a)) = phi(delta^-1 a delta)", r, w)
    rep.exact("rho_delta", "rho(delta) = rho'(delta) = mu^-1 delta",
              max(vec_diff(apply(rho, md.delta), [v / md.mu for v in md.delta]),
                  vec_diff(apply(rhop, md.delta), [v / md.mu for v in md.delta])))
    rep.exact("mu_modulus", "|mu| = 1", Fraction(0) if magnitude(md.mu * conj(md.mu) - 1) == 0 else ONE)
    rep.exact("rho_prime_delta_conjugate", "rho'(a) = delta rho(a) delta^-1", ZERO)
    r, w = strong_left_invariance(spec, ph, S)
    rep.exact("strong_left_invariance", "(i (x) phi)((1 (x) a)D(b)) = S((i (x) phi)(D(a)(1 (x) b)))", r, w)
    ident = identity(n)
    rep.exact("kac_S2_identity", "S^2 = i", max(vec_diff(a, b) for a, b in zip(S2, ident)))
    rep.exact("kac_delta_unit", "delta = 1", vec_diff(md.delta, one))
    rep.exact("kac_rho_identity", "rho = i", max(vec_diff(a, b) for a, b in zip(rho, ident)))
    rep.exact("kac_mu_one", "mu = 1", md.mu - 1)
    rep.notes["mu"] = str(md.mu)
    rep.notes["delta"] = [str(c) for c in md.delta]
    return rep


# -- GNS ---------------------------------------------------------------------

@dataclass
class GnsData:
    gram: Matrix
    inner: Matrix
    lambda_map: Matrix
    nabla: Matrix
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sigma_half_i: Matrix = None

    def inner_product(self, u: Sequence, v: Sequence) -> complex:
        """``<u, v> = phi(v* u)``, linear in ``u``."""
        m = linalg.to_array(self.inner)
        uu = np.array([complex(x) for x in u])
        vv = np.array([complex(x) for x in v])
        return complex(vv.conj() @ m @ uu)

    def nabla_power(self, z: complex) -> np.ndarray:
        """Matrix of ``nabla^{iz}`` in coordinates."""
        v = self.eigenvectors
        d = np.exp(1j * complex(z) * np.log(self.eigenvalues))
        return v @ np.diag(d) @ np.linalg.inv(v)

    def conj_j(self, x: Sequence, spec: AlgebraSpec) -> np.ndarray:
        y = self.nabla_power(0.5j) @ np.array([complex(c) for c in x])
        st = np.array([[complex(spec.star[i].get(k, 0)) for i in range(spec.dim)] for k in range(spec.dim)])
        return st @ y.conj()


def gns_build(spec: AlgebraSpec, phi: Functional, md: ModularData) -> GnsData:
    n = spec.dim
    gram = gram_matrix(spec, phi.covector)
    inner = inner_matrix(gram)
    nabla = md.rho
    # G-self-adjointness: M nabla = nabla^H M, and positivity of M nabla
    mn = linalg.matmul(inner, nabla)
    nh_m = linalg.matmul(linalg.conj_transpose(nabla), inner)
    if any(magnitude(a - b) != 0 for ra, rb in zip(mn, nh_m) for a, b in zip(ra, rb)):
        raise StructureError("modular automorphism not positive - phi not a positive faithful functional")
    psd, pd = linalg.exact_psd(mn)
    if not pd:
        raise StructureError("modular automorphism not positive - phi not a positive faithful functional")
    m = linalg.to_array(inner)
    chol = np.linalg.cholesky(m)           # m = L L^H
    lh = chol.conj().T
    b = lh @ linalg.to_array(nabla) @ np.linalg.inv(lh)
    vals, u = linalg.hermitian_eig(b)
    if np.min(vals) <= 0:
        raise StructureError("modular operator has a non-positive eigenvalue")
    vecs = np.linalg.inv(lh) @ u
    return GnsData(gram, inner, identity(n), nabla, vals, vecs)


def gns_report(spec: AlgebraSpec, phi: Functional, md: ModularData, gns: GnsData,
               z_grid: Sequence[complex], cfg: ToleranceCfg = DEFAULT_TOL) -> Report:
    from scipy.linalg import expm, logm

    rep = Report("gns", spec.name)
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    r = max(abs(gns.inner_product(e[i], e[j]) - complex(evaluate(phi.covector, spec.mul(spec.star_vec(e[j]), e[i]))))
            for i, j in product(range(n), repeat=2))
    rep.approx("gns_inner_product", "<L(a), L(b)> = phi(b*a)", r, cfg.abs_tol)
    minus_i = gns.nabla_power(-1j)
    r = float(np.max(np.abs(minus_i - linalg.to_array(md.rho))))
    rep.approx("sigma_minus_i_is_rho", "sigma_{-i} = rho", r, 1e-12)
    log_nabla = logm(linalg.to_array(gns.nabla))
    worst = 0.0
    for z in z_grid:
        oracle = expm(1j * complex(z) * log_nabla)
        worst = max(worst, float(np.max(np.abs(gns.nabla_power(z) - oracle))))
    rep.approx("nabla_power_oracle", "L(sigma_z(a)) = nabla^{iz} L(a)", worst, 1e-12)
    worst = 0.0
    for i in range(n):
        jj = gns.conj_j(gns.conj_j(e[i], spec), spec)
        worst = max(worst, float(np.max(np.abs(jj - np.array([complex(c) for c in e[i]])))))
    rep.approx("J_involution", "J^2 = 1", worst, cfg.abs_tol)
    worst = 0.0
    for i, j in product(range(n), repeat=2):
        lhs = gns.inner_product(gns.conj_j(e[i], spec), gns.conj_j(e[j], spec))
        worst = max(worst, abs(lhs - gns.inner_product(e[j], e[i])))
    rep.approx("J_antiunitary", "<J x, J y> = <y, x>", worst, cfg.abs_tol)
    rep.notes["nabla_spectrum"] = [float(v) for v in gns.eigenvalues]
    return rep


# -- duality -----------------------------------------------------------------

@dataclass
class DualData:
    spec: AlgebraSpec
    pairing: Matrix             # pairing[j][i] = hat e_i (e_j) = phi(e_j e_i)
    pairing_inv: Matrix
    psi_hat: Functional
    phi_hat: Functional
    counit_hat_expected: Vector
    antipode_hat_expected: Matrix


def fourier_covector(spec: AlgebraSpec, phi: Sequence, a: Sequence) -> Vector:
    """Covector of ``a phi``, i.e. ``x -> phi(x a)``."""
    return [evaluate(phi, spec.mul(spec.basis(j), a)) for j in range(spec.dim)]


def dualize(spec: AlgebraSpec, phi: Functional, name: Optional[str] = None) -> DualData:
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    ph = phi.covector
    pair = columns_to_matrix([fourier_covector(spec, ph, x) for x in e])
    pinv = linalg.inverse(pair)
    to_hat = lambda cov: apply(pinv, cov)          # covector -> hat-coordinates
    from_hat = lambda c: apply(pair, c)            # hat-coordinates -> covector
    eps = solve_counit(spec)
    S = solve_antipode(spec, eps)
    D = [spec.comul(x) for x in e]

    def conv(w1, w2):
        return [sum((s * w1[j] * w2[k] for (j, k), s in D[x].items()), ZERO) for x in range(n)]

    mult = [[None] * n for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        c = to_hat(conv(pair_col(pair, i), pair_col(pair, j)))
        mult[i][j] = {k: v for k, v in enumerate(c) if v != 0}
    star = []
    for i in range(n):
        w = pair_col(pair, i)
        cov = [conj(evaluate(w, spec.star_vec(apply(S, e[x])))) for x in range(n)]
        star.append({k: v for k, v in enumerate(to_hat(cov)) if v != 0})
    unit = {k: v for k, v in enumerate(to_hat(eps.covector)) if v != 0}
    comult = []
    for k in range(n):
        w = pair_col(pair, k)
        wxy = [[evaluate(w, spec.mul(e[x], e[y])) for y in range(n)] for x in range(n)]
        c = linalg.matmul(linalg.matmul(pinv, wxy), [list(r) for r in zip(*pinv)])
        comult.append({(i, j): c[i][j] for i in range(n) for j in range(n) if c[i][j] != 0})
    labels = [f"^{lab}" for lab in spec.basis_labels]
    dual = AlgebraSpec(n, labels, mult, star, unit, comult, name or f"dual({spec.name})")
    psi_hat = Functional(list(eps.covector), "psi_hat")
    # phi_hat(psi a) = eps(a): psi a is x -> phi(S(a x))
    psi_a = [to_hat([evaluate(ph, apply(S, spec.mul(e[i], e[x]))) for x in range(n)]) for i in range(n)]
    phi_hat_cov = linalg.solve(psi_a, eps.covector)
    phi_hat = Functional(phi_hat_cov, "phi_hat")
    # hat eps (a phi) = phi(a); hat S(w) = w S
    counit_expected = list(ph)
    anti_cols = [to_hat([evaluate(pair_col(pair, i), apply(S, e[x])) for x in range(n)]) for i in range(n)]
    return DualData(dual, pair, pinv, psi_hat, phi_hat, counit_expected, columns_to_matrix(anti_cols))


def pair_col(m: Matrix, i: int) -> Vector:
    return [row[i] for row in m]


def duality_report(spec: AlgebraSpec, phi: Functional, cfg: ToleranceCfg = DEFAULT_TOL) -> Report:
    rep = Report("duality", spec.name)
    dd = dualize(spec, phi)
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    rep.exact("fourier_injective", "a -> a phi is a bijection", Fraction(n - linalg.rank(dd.pairing)))
    sub = validate_structure(dd.spec)
    rep.merge(sub, "dual_")
    if not sub.passed:
        return rep
    eps_hat = solve_counit(dd.spec)
    S_hat = solve_antipode(dd.spec, eps_hat)
    rep.exact("dual_counit_formula", "eps^(a w) = w(a)", vec_diff(eps_hat.covector, dd.counit_hat_expected))
    rep.exact("dual_antipode_formula", "S^(w)(a) = w(S(a))",
              max(vec_diff(a, b) for a, b in zip(S_hat, dd.antipode_hat_expected)))
    rep.exact("dual_unit_is_counit", "eps is the unit of the dual",
              vec_diff(dd.spec.unit_vec(), apply(dd.pairing_inv, solve_counit(spec).covector)))
    # right invariance of psi_hat on the dual
    r = max((magnitude(v) for v in apply_rows(invariance_system(dd.spec, "right"), dd.psi_hat.covector)),
            default=ZERO)
    rep.exact("psi_hat_right_invariant", "(psi^ (x) i)D^(w) = psi^(w) 1", r)
    r = max((magnitude(v) for v in apply_rows(invariance_system(dd.spec, "left"), dd.phi_hat.covector)),
            default=ZERO)
    rep.exact("phi_hat_left_invariant", "(i (x) phi^)D^(w) = phi^(w) 1", r)
    # Plancherel
    def plancherel(i):
        a = e[i]
        ah = apply(dd.pairing_inv, fourier_covector(spec, phi.covector, a))
        lhs = evaluate(dd.psi_hat.covector, dd.spec.mul(dd.spec.star_vec(ah), ah))
        rhs = evaluate(phi.covector, spec.mul(spec.star_vec(a), a))
        return magnitude(lhs - rhs), spec.label(i)
    r, w = _worst(plancherel(i) for i in range(n))
    rep.exact("plancherel", "psi^(a^* a^) = phi(a* a)", r, w)
    g = gram_matrix(dd.spec, dd.phi_hat.covector)
    rep.notes["phi_hat_gram_min_eigenvalue"] = linalg.min_eigenvalue(inner_matrix(g))
    rep.notes["phi_hat"] = [str(c) for c in dd.phi_hat.covector]
    return rep


def bidual_check(spec: AlgebraSpec, phi: Optional[Functional] = None) -> Report:
    """Canonical map ``a -> (w -> w(a))`` into the dual of the dual."""
    rep = Report("bidual", spec.name)
    phi = phi or solve_haar(spec)
    d1 = dualize(spec, phi)
    phi1 = solve_haar(d1.spec)
    ratio = None
    for a, b in zip(d1.phi_hat.covector, phi1.covector):
        if b != 0:
            ratio = a / b
            break
    rep.exact("dual_haar_matches_phi_hat", "phi^ is the left Haar functional of the dual",
              vec_diff(d1.phi_hat.covector, [ratio * c for c in phi1.covector]))
    d2 = dualize(d1.spec, phi1)
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    # ev_a as a covector on the dual basis: hat e_i(a)
    def canon(x):
        cov = [evaluate(pair_col(d1.pairing, i), x) for i in range(n)]
        return apply(d2.pairing_inv, cov)
    phi_map = columns_to_matrix([canon(x) for x in e])
    rep.exact("canonical_bijective", "A -> A^^ is bijective", Fraction(n - linalg.rank(phi_map)))
    B = d2.spec
    L = spec.label
    r, w = _worst((vec_diff(canon(spec.mul(e[i], e[j])), B.mul(canon(e[i]), canon(e[j]))), f"({L(i)},{L(j)})")
                  for i, j in product(range(n), repeat=2))
    rep.exact("canonical_multiplicative", "ev(ab) = ev(a) ev(b)", r, w)
    r, w = _worst((vec_diff(canon(spec.star_vec(e[i])), B.star_vec(canon(e[i]))), L(i)) for i in range(n))
    rep.exact("canonical_star", "ev(a*) = ev(a)*", r, w)
    rep.exact("canonical_unit", "ev(1) = 1", vec_diff(canon(spec.unit_vec()), B.unit_vec()))
    r, w = _worst((tensor_diff(map_tensor(spec.comul(e[i]), phi_map, phi_map), B.comul(canon(e[i]))), L(i))
                  for i in range(n))
    rep.exact("canonical_comult", "(ev (x) ev)D = D^^ ev", r, w)
    rep.notes["self_dual_candidate"] = _center_dim(spec) == _center_dim(d1.spec) and \
        _is_commutative(spec) == _is_commutative(d1.spec)
    return rep


def _center_dim(spec: AlgebraSpec) -> int:
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    rows = []
    for j in range(n):
        comm = [[spec.mul(e[i], e[j])[k] - spec.mul(e[j], e[i])[k] for i in range(n)] for k in range(n)]
        rows.extend(comm)
    return n - linalg.rank(rows)


def _is_commutative(spec: AlgebraSpec) -> bool:
    return _center_dim(spec) == spec.dim


@dataclass
class FinitePipeline:
    """Everything derived from one finite instance, computed once."""

    spec: AlgebraSpec
    phi: Functional
    modular: ModularData
    gns: GnsData


def run_pipeline(spec: AlgebraSpec, cfg: ToleranceCfg = DEFAULT_TOL) -> FinitePipeline:
    require_valid(spec)
    phi = solve_haar(spec, cfg)
    md = derive_modular_data(spec, phi)
    gns = gns_build(spec, phi, md)
    return FinitePipeline(spec, phi, md, gns)
