"""Builders for the bundled finite instances and their JSON encoding."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product
from typing import Dict, List, Tuple

from .finqg import AlgebraSpec, ONE, ZERO
from .scalars import GaussRational

HALF = Fraction(1, 2)


def _compose(s: Tuple[int, ...], t: Tuple[int, ...]) -> Tuple[int, ...]:
    """Permutation product ``st`` acting as ``(st)(i) = s(t(i))``."""
    return tuple(s[t[i]] for i in range(len(t)))


def _inverse(s: Tuple[int, ...]) -> Tuple[int, ...]:
    out = [0] * len(s)
    for i, v in enumerate(s):
        out[v] = i
    return tuple(out)


def _cyclic(n: int):
    elems = list(range(n))
    return elems, (lambda g, h: (g + h) % n), (lambda g: (-g) % n), 0


def _symmetric(n: int):
    elems = sorted(permutations(range(n)))
    return elems, _compose, _inverse, tuple(range(n))


def group_algebra(elems, op, inv, ident, labels, name) -> AlgebraSpec:
    """The group algebra: group elements are unitary and group-like."""
    idx = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    mult = [[{idx[op(g, h)]: ONE} for h in elems] for g in elems]
    star = [{idx[inv(g)]: ONE} for g in elems]
    comult = [{(i, i): ONE} for i in range(n)]
    return AlgebraSpec(n, labels, mult, star, {idx[ident]: ONE}, comult, name)


def function_algebra(elems, op, inv, ident, labels, name) -> AlgebraSpec:
    """Functions on a group: pointwise product, coproduct dual to the group law."""
    idx = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    mult = [[{i: ONE} if i == j else {} for j in range(n)] for i in range(n)]
    star = [{i: ONE} for i in range(n)]
    comult: List[Dict] = [{} for _ in range(n)]
    for u, v in product(elems, repeat=2):
        comult[idx[op(u, v)]][(idx[u], idx[v])] = ONE
    return AlgebraSpec(n, labels, mult, star, {i: ONE for i in range(n)}, comult, name)


def _perm_label(p) -> str:
    return "".join(str(i + 1) for i in p)


def c_z2() -> AlgebraSpec:
    return group_algebra(*_cyclic(2), ["e", "g"], "c_z2")


def f_z2() -> AlgebraSpec:
    return function_algebra(*_cyclic(2), ["d_e", "d_g"], "f_z2")


def c_s3() -> AlgebraSpec:
    elems = _symmetric(3)[0]
    return group_algebra(*_symmetric(3), [_perm_label(p) for p in elems], "c_s3")


def f_s3() -> AlgebraSpec:
    elems = _symmetric(3)[0]
    return function_algebra(*_symmetric(3), [f"d_{_perm_label(p)}" for p in elems], "f_s3")


# -- Kac-Paljutkin -----------------------------------------------------------
# Basis x^a y^b z^c (a, b, c in {0, 1}); x, y commuting group-like symmetries,
# z swaps them under conjugation and squares to a self-adjoint unitary, so z
# itself is unitary: z* = z^3 = z^2 z.

def _kp_index(a: int, b: int, c: int) -> int:
    return a + 2 * b + 4 * c


def _kp_label(a: int, b: int, c: int) -> str:
    parts = [s for s, e in (("x", a), ("y", b), ("z", c)) if e]
    return "".join(parts) or "1"


def _kp_mul_monomials(m1, m2) -> Dict[int, Fraction]:
    a1, b1, c1 = m1
    a2, b2, c2 = m2
    if c1:
        a2, b2 = b2, a2          # z x^a y^b = x^b y^a z
    a, b = (a1 + a2) % 2, (b1 + b2) % 2
    if not (c1 and c2):
        return {_kp_index(a, b, c1 or c2): ONE}
    # z^2 = (1 + x + y - xy) / 2
    out: Dict[int, Fraction] = {}
    for (da, db), coef in (((0, 0), HALF), ((1, 0), HALF), ((0, 1), HALF), ((1, 1), -HALF)):
        k = _kp_index((a + da) % 2, (b + db) % 2, 0)
        out[k] = out.get(k, ZERO) + coef
    return out


def kac_paljutkin() -> AlgebraSpec:
    monos = [(a, b, c) for c in (0, 1) for b in (0, 1) for a in (0, 1)]
    n = 8
    mult = [[_kp_mul_monomials(m1, m2) for m2 in monos] for m1 in monos]
    spec = AlgebraSpec(n, [_kp_label(*m) for m in monos], mult, [{} for _ in range(n)], {0: ONE},
                       [{} for _ in range(n)], "kac_paljutkin")
    z_star = spec.mul(spec.basis(_kp_index(0, 0, 1)), spec.mul(spec.basis(4), spec.basis(4)))
    for a, b, c in monos:
        g = spec.basis(_kp_index(a, b, 0))
        img = spec.mul(z_star, g) if c else g      # (x^a y^b z)* = z* x^a y^b
        spec.star[_kp_index(a, b, c)] = {k: v for k, v in enumerate(img) if v != 0}
    x, y, z = _kp_index(1, 0, 0), _kp_index(0, 1, 0), _kp_index(0, 0, 1)
    gen = {
        x: {(x, x): ONE},
        y: {(y, y): ONE},
        z: spec.tensor_mul({(0, 0): HALF, (0, x): HALF, (y, 0): HALF, (y, x): -HALF}, {(z, z): ONE}),
    }
    comult = []
    for a, b, c in monos:
        t = {(0, 0): ONE}
        for g, e in ((x, a), (y, b), (z, c)):
            if e:
                t = spec.tensor_mul(t, gen[g])
        comult.append(t)
    spec.comult = comult
    return spec


BUILDERS = {
    "c_z2": c_z2,
    "f_z2": f_z2,
    "c_s3": c_s3,
    "f_s3": f_s3,
    "kac_paljutkin": kac_paljutkin,
}


# -- file encoding -----------------------------------------------------------

def _scalar_row(c) -> List[int]:
    g = GaussRational.of(c)
    return [g.re.numerator, g.re.denominator, g.im.numerator, g.im.denominator]


def spec_to_document(spec: AlgebraSpec) -> dict:
    n = spec.dim
    return {
        "kind": "finite",
        "name": spec.name,
        "dim": n,
        "basis": list(spec.basis_labels),
        "mult": [[i, j, k] + _scalar_row(c)
                 for i, j in product(range(n), repeat=2) for k, c in sorted(spec.mult[i][j].items())],
        "star": [[i, k] + _scalar_row(c) for i in range(n) for k, c in sorted(spec.star[i].items())],
        "unit": [str(spec.unit.get(i, ZERO)) for i in range(n)],
        "comult": [[i, j, k] + _scalar_row(c)
                   for i in range(n) for (j, k), c in sorted(spec.comult[i].items())],
    }
