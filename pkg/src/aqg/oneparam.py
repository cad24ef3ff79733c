"""Analytic one-parameter groups and unitary representations, stored spectrally.

A group acts on each eigenspace by ``scaling^z * eigenvalue^{iz}``.  The
eigenvalue carries the modular part (``alpha_{-i}`` multiplies by it); the
optional real ``scaling`` lets a group rescale a functional, which is how a
non-trivial ``lambda`` can be modelled on a bare vector space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .report import Report
from .scalars import DEFAULT_TOL, ToleranceCfg

DEFAULT_Z_GRID: Tuple[complex, ...] = (0, 1, -1, 1j, -1j, -0.5j, 0.5 + 1j / 3, 2j)


def parse_z_grid(text: str) -> Tuple[complex, ...]:
    """``"default"`` or a comma list such as ``"0,1,-0.5j,0.5+0.3333j"``."""
    if text.strip() == "default":
        return DEFAULT_Z_GRID
    out = []
    for part in text.split(","):
        part = part.strip().replace(" ", "")
        if not part:
            continue
        out.append(complex(part.replace("i", "j")))
    if not out:
        raise ValueError("empty z-grid")
    return tuple(out)


class VectorModel(Protocol):
    """Finite-dimensional view of an instance in coordinates."""

    dim: int
    labels: List[str]

    def mul(self, u: np.ndarray, v: np.ndarray) -> Optional[np.ndarray]: ...

    def star(self, u: np.ndarray) -> np.ndarray: ...

    def phi(self) -> np.ndarray: ...

    def inner(self) -> np.ndarray: ...

    def pairs(self) -> Sequence[Tuple[int, int]]: ...


@dataclass
class SpectralGroup:
    eigenspaces: List[Tuple[np.ndarray, float, float]]   # (columns spanning, eigenvalue, scaling)
    ambient_dim: int
    scale_lambda: float = 1.0
    name: str = ""
    _basis: np.ndarray = field(init=False, repr=False)
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cols, self._ev, self._sc = [], [], []
        for vecs, ev, sc in self.eigenspaces:
            if ev <= 0 or sc <= 0:
                raise ValueError("eigenvalues and scalings must be strictly positive")
            vecs = np.asarray(vecs, dtype=complex).reshape(self.ambient_dim, -1)
            for j in range(vecs.shape[1]):
                cols.append(vecs[:, j])
                self._ev.append(ev)
                self._sc.append(sc)
        self._basis = np.array(cols, dtype=complex).T
        if self._basis.shape != (self.ambient_dim, self.ambient_dim):
            raise ValueError("eigenspaces must span the ambient space")
        self._inv = np.linalg.inv(self._basis)
        self._ev = np.array(self._ev, dtype=float)
        self._sc = np.array(self._sc, dtype=float)

    @classmethod
    def from_eigen(cls, vectors: np.ndarray, eigenvalues: Sequence[float], name: str = "",
                   scalings: Optional[Sequence[float]] = None, merge_tol: float = 1e-12) -> "SpectralGroup":
        """Group columns with (numerically) equal eigenvalue and scaling into eigenspaces."""
        scalings = [1.0] * len(eigenvalues) if scalings is None else list(scalings)
        spaces: List[Tuple[list, float, float]] = []
        for j, (ev, sc) in enumerate(zip(eigenvalues, scalings)):
            for cols, e0, s0 in spaces:
                if abs(e0 - ev) < merge_tol and abs(s0 - sc) < merge_tol:
                    cols.append(vectors[:, j])
                    break
            else:
                spaces.append(([vectors[:, j]], float(ev), float(sc)))
        n = vectors.shape[0]
        return cls([(np.array(c).T, e, s) for c, e, s in spaces], n, name=name)

    @classmethod
    def diagonal(cls, eigenvalues: Sequence[float], name: str = "",
                 scalings: Optional[Sequence[float]] = None) -> "SpectralGroup":
        n = len(eigenvalues)
        return cls.from_eigen(np.eye(n, dtype=complex), eigenvalues, name, scalings)

    def multipliers(self, z: complex) -> np.ndarray:
        z = complex(z)
        return np.exp(z * np.log(self._sc) + 1j * z * np.log(self._ev))

    def matrix(self, z: complex) -> np.ndarray:
        return self._basis @ np.diag(self.multipliers(z)) @ self._inv

    def spectrum(self) -> List[Tuple[float, float]]:
        return [(float(e), float(s)) for e, s in zip(self._ev, self._sc)]


def evaluate_group(group: SpectralGroup, z: complex, a: Sequence) -> np.ndarray:
    return group.matrix(z) @ np.asarray(a, dtype=complex)


def _max_abs(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


def scaled_residual(diff: np.ndarray, ref: np.ndarray) -> float:
    """``max |diff_k| / max(1, |ref_k|)``: absolute for O(1) values, relative
    for the huge ones that ``alpha_z`` produces at imaginary ``z``."""
    diff = np.asarray(diff)
    if not diff.size:
        return 0.0
    return float(np.max(np.abs(diff) / np.maximum(1.0, np.abs(np.asarray(ref)))))


def check_group_laws(group: SpectralGroup, model: VectorModel, z_grid: Sequence[complex],
                     cfg: ToleranceCfg = DEFAULT_TOL, tol: Optional[float] = None) -> Report:
    tol = cfg.abs_tol if tol is None else tol
    rep = Report("group_laws", group.name)
    n = model.dim
    eye = np.eye(n, dtype=complex)
    mats = {z: group.matrix(z) for z in z_grid}

    rep.approx("identity_at_zero", "alpha_0 = i", _max_abs(group.matrix(0) - eye), tol)
    best, wit, raw = 0.0, None, 0.0
    for y in z_grid:
        for z in z_grid:
            m = group.matrix(complex(y) + complex(z))
            diff = m - mats[y] @ mats[z]
            raw = max(raw, _max_abs(diff))
            r = scaled_residual(diff, m)
            if r > best:
                best, wit = r, f"y={y}, z={z}"
    rep.approx("group_law", "alpha_{y+z} = alpha_y alpha_z (scaled by max(1, |alpha_{y+z}|))", best, tol, wit)
    rep.notes["group_law_abs_residual"] = raw
    best, wit = 0.0, None
    for z in z_grid:
        r = _max_abs(mats[z] @ group.matrix(-complex(z)) - eye)
        if r > best:
            best, wit = r, f"z={z}"
    rep.approx("inverse", "(alpha_z)^-1 = alpha_-z", best, tol, wit)
    best, wit = 0.0, None
    for z in z_grid:
        zc = complex(z).conjugate()
        mzc = group.matrix(zc)
        for i in range(n):
            lhs = model.star(mats[z] @ eye[:, i])
            rhs = mzc @ model.star(eye[:, i])
            r = scaled_residual(lhs - rhs, lhs)
            if r > best:
                best, wit = r, f"z={z}, x={model.labels[i]}"
    rep.approx("star_law", "alpha_z(a)* = alpha_{conj z}(a*)", best, tol, wit)
    best, wit = 0.0, None
    for z in z_grid:
        for i, j in model.pairs():
            prod = model.mul(eye[:, i], eye[:, j])
            if prod is None:
                continue
            lhs = mats[z] @ prod
            rhs = model.mul(mats[z][:, i], mats[z][:, j])
            r = scaled_residual(lhs - rhs, lhs)
            if r > best:
                best, wit = r, f"z={z}, x=({model.labels[i]},{model.labels[j]})"
    rep.approx("multiplicative", "alpha_z(ab) = alpha_z(a) alpha_z(b) (scaled)", best, tol, wit)
    return rep


class NotRelativelyInvariant(ValueError):
    pass


def compute_lambda(group: SpectralGroup, phi: np.ndarray, z_grid: Sequence[complex] = DEFAULT_Z_GRID,
                   cfg: ToleranceCfg = DEFAULT_TOL) -> Tuple[float, Report]:
    """The positive ``lambda`` with ``phi alpha_z = lambda^z phi``; sets ``group.scale_lambda``."""
    phi = np.asarray(phi, dtype=complex)
    n = group.ambient_dim
    eye = np.eye(n, dtype=complex)
    m1 = group.matrix(1)
    ratios = []
    for i in range(n):
        base = phi @ eye[:, i]
        if abs(base) > cfg.abs_tol:
            ratios.append((phi @ (m1 @ eye[:, i])) / base)
    if not ratios:
        raise NotRelativelyInvariant("phi vanishes on the whole sample")
    lam = ratios[0]
    if abs(lam.imag) > cfg.abs_tol or lam.real <= 0:
        raise NotRelativelyInvariant(f"phi alpha_1 / phi = {lam} is not a positive number")
    if any(abs(r - lam) > cfg.abs_tol for r in ratios):
        raise NotRelativelyInvariant("ratio phi(alpha_1(a)) / phi(a) is not constant")
    lam = float(lam.real)
    rep = Report("relative_invariance", group.name)
    best, wit = 0.0, None
    for z in z_grid:
        diff = phi @ group.matrix(z) - lam ** complex(z) * phi
        r = _max_abs(diff)
        if r > best:
            best, wit = r, f"z={z}"
    rep.approx("relative_invariance", "phi alpha_z = lambda^z phi", best, cfg.abs_tol, wit)
    rep.notes["lambda"] = lam
    group.scale_lambda = lam
    return lam, rep


@dataclass
class POperator:
    """Positive operator with ``P^{iz} = lambda^{-z/2} alpha_z`` in coordinates."""

    group: SpectralGroup
    lam: float

    def power(self, z: complex) -> np.ndarray:
        g = self.group
        z = complex(z)
        return g._basis @ np.diag(np.exp(1j * z * np.log(g._ev))) @ g._inv

    def matrix(self) -> np.ndarray:
        return self.power(-1j)


def build_p_operator(group: SpectralGroup, lam: float, inner: np.ndarray, tol: float = 1e-9) -> POperator:
    """Scalings must equal ``lambda^{1/2}`` and ``P`` must be self-adjoint for ``inner``."""
    if np.any(np.abs(group._sc - np.sqrt(lam)) > tol):
        raise ValueError("P not G-positive: scalings differ from lambda^{1/2}")
    p = POperator(group, lam)
    pm = p.matrix()
    if _max_abs(inner @ pm - pm.conj().T @ inner) > tol:
        raise ValueError("P not G-positive: not self-adjoint for the GNS inner product")
    if np.min(np.linalg.eigvals(np.linalg.solve(inner, inner @ pm)).real) <= 0:
        raise ValueError("P not G-positive")
    return p


def _g_norm(inner: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(max((v.conj() @ inner @ v).real, 0.0)))


def p_operator_check(group: SpectralGroup, lam: float, inner: np.ndarray, z_grid: Sequence[complex],
                     cfg: ToleranceCfg = DEFAULT_TOL, nabla: Optional[np.ndarray] = None,
                     tol: Optional[float] = None) -> Report:
    tol = cfg.abs_tol if tol is None else tol
    rep = Report("p_operator", group.name)
    try:
        p = build_p_operator(group, lam, inner)
    except ValueError as exc:
        rep.flag("p_positive", "P is G-positive", False, 1.0, str(exc))
        return rep
    n = group.ambient_dim
    eye = np.eye(n, dtype=complex)
    best, wit = 0.0, None
    for z in z_grid:
        pz = p.power(z)
        az = group.matrix(z)
        for i in range(n):
            r = _g_norm(inner, pz @ eye[:, i] - lam ** (-complex(z) / 2) * (az @ eye[:, i]))
            if r > best:
                best, wit = r, f"z={z}, x={i}"
    rep.approx("p_operator_law", "P^{iz} L(a) = lambda^{-z/2} L(alpha_z(a))", best, tol, wit)
    best, wit = 0.0, None
    for z in z_grid:
        t = complex(z).real
        pt = p.power(t)
        r = _max_abs(pt.conj().T @ inner @ pt - inner)
        if r > best:
            best, wit = r, f"t={t}"
    rep.approx("p_unitary_real", "P^{it} is unitary", best, tol, wit)
    if nabla is not None:
        rep.approx("p_equals_nabla", "P = nabla", _max_abs(p.matrix() - nabla), tol)
    return rep


def rebuild_from_i(group: SpectralGroup, name: str = "") -> SpectralGroup:
    """Recover a group from the single operator ``alpha_i`` by re-diagonalizing it.

    On an eigenspace ``alpha_i`` multiplies by ``scaling^i / eigenvalue``; a
    pure modular group (scaling 1) is recovered as ``eigenvalue = 1 / mu``.
    """
    a_i = group.matrix(1j)
    mus, vecs = np.linalg.eig(a_i)
    if np.any(np.abs(mus.imag) > 1e-9) or np.any(mus.real <= 0):
        raise ValueError("alpha_i does not have a positive spectrum")
    return SpectralGroup.from_eigen(vecs, 1.0 / mus.real, name or f"rebuilt({group.name})", merge_tol=1e-9)


def uniqueness_check(g1: SpectralGroup, g2: SpectralGroup, z_grid: Sequence[complex],
                     cfg: ToleranceCfg = DEFAULT_TOL, labels: Optional[Sequence[str]] = None,
                     tol: Optional[float] = None) -> Report:
    tol = cfg.abs_tol if tol is None else tol
    rep = Report("uniqueness", f"{g1.name} vs {g2.name}")
    n = g1.ambient_dim
    labels = labels or [str(i) for i in range(n)]
    diff_i = np.abs(g1.matrix(1j) - g2.matrix(1j))
    cols = np.max(diff_i / np.maximum(1.0, np.abs(g1.matrix(1j))), axis=0)
    differing = np.flatnonzero(cols >= tol)
    rep.notes["agree_at_i"] = not differing.size
    if differing.size:
        first = int(differing[0])          # first basis vector, in basis order
        rep.notes["witness_at_i"] = labels[first]
        rep.notes["difference_at_i"] = float(cols[first])
        return rep
    best, wit = 0.0, None
    for z in z_grid:
        m1 = g1.matrix(z)
        r = scaled_residual(m1 - g2.matrix(z), m1)
        if r > best:
            best, wit = r, f"z={z}"
    rep.approx("agree_on_grid", "alpha_i = beta_i implies alpha = beta (scaled)", best, tol, wit)
    return rep


@dataclass
class UnitaryRep:
    """``z -> u_z`` inside some *-algebra, with that algebra's operations."""

    power: Callable[[complex], object]
    mul: Callable[[object, object], object]
    star: Callable[[object], object]
    unit: object
    diff: Callable[[object, object], float]
    name: str = ""


def unitary_rep_check(u: UnitaryRep, z_grid: Sequence[complex], cfg: ToleranceCfg = DEFAULT_TOL,
                      tol: Optional[float] = None) -> Report:
    tol = cfg.abs_tol if tol is None else tol
    rep = Report("unitary_rep", u.name)
    vals = {z: u.power(z) for z in z_grid}
    rep.approx("unit_at_zero", "u_0 = 1", u.diff(u.power(0), u.unit), tol)

    def worst(items):
        best, wit = 0.0, None
        for r, w in items:
            if r > best:
                best, wit = r, w
        return best, wit

    r, w = worst((u.diff(u.star(vals[z]), u.power(-complex(z).conjugate())), f"z={z}") for z in z_grid)
    rep.approx("star_law", "u_z* = u_{-conj z}", r, tol, w)
    r, w = worst((u.diff(u.power(complex(y) + complex(z)), u.mul(vals[y], vals[z])), f"y={y}, z={z}")
                 for y in z_grid for z in z_grid)
    rep.approx("group_law", "u_{y+z} = u_y u_z", r, tol, w)
    r, w = worst((u.diff(u.mul(vals[z], u.power(-complex(z))), u.unit), f"z={z}") for z in z_grid)
    rep.approx("inverse", "u_z u_-z = 1", r, tol, w)
    reals = sorted({complex(z).real for z in z_grid})
    r, w = worst((u.diff(u.mul(u.star(u.power(t)), u.power(t)), u.unit), f"t={t}") for t in reals)
    rep.approx("unitary_real", "u_t* u_t = 1", r, tol, w)
    return rep


# -- adapters ----------------------------------------------------------------

class FiniteModel:
    """Coordinates of a finite :class:`~aqg.finqg.AlgebraSpec`."""

    def __init__(self, spec, phi_cov, inner_rows):
        from .scalars import to_complex
        n = spec.dim
        self.dim = n
        self.labels = list(spec.basis_labels)
        self._c = np.zeros((n, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                for k, v in spec.mult[i][j].items():
                    self._c[i, j, k] = to_complex(v)
        self._s = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for k, v in spec.star[i].items():
                self._s[k, i] = to_complex(v)
        self._phi = np.array([to_complex(c) for c in phi_cov])
        self._inner = np.array([[to_complex(c) for c in row] for row in inner_rows])
        self.unit = np.array([to_complex(spec.unit.get(i, 0)) for i in range(n)])

    def mul(self, u, v):
        return np.einsum("i,j,ijk->k", u, v, self._c)

    def star(self, u):
        return self._s @ np.conj(u)

    def phi(self):
        return self._phi

    def inner(self):
        return self._inner

    def pairs(self):
        return [(i, j) for i in range(self.dim) for j in range(self.dim)]


class Suq2Model:
    """Degree-truncated PBW coordinates of SU_q(2); products leaving the
    truncation are skipped."""

    def __init__(self, engine, degree: int):
        from .suq2 import NcPoly, monomials
        self.engine = engine
        self.basis = monomials(degree)
        self.index = {t: i for i, t in enumerate(self.basis)}
        self.dim = len(self.basis)
        self.labels = [t.label() for t in self.basis]
        self.degree = degree
        self._poly = NcPoly
        g = engine.gram(self.basis)
        self._inner = np.array([[complex(g[j][i]) for j in range(self.dim)] for i in range(self.dim)])
        self._phi = np.array([complex(engine.haar_term(t)) for t in self.basis])

    def to_poly(self, u):
        return self._poly({t: complex(c) for t, c in zip(self.basis, u) if abs(c) > 0})

    def from_poly(self, p):
        out = np.zeros(self.dim, dtype=complex)
        for t, c in p.terms.items():
            out[self.index[t]] = complex(c)
        return out

    def mul(self, u, v):
        p = self.engine.multiply(self.to_poly(u), self.to_poly(v))
        if p.degree > self.degree:
            return None
        return self.from_poly(p)

    def star(self, u):
        return self.from_poly(self.engine.star(self.to_poly(u)))

    def phi(self):
        return self._phi

    def inner(self):
        return self._inner

    def pairs(self):
        return [(i, j) for i, a in enumerate(self.basis) for j, b in enumerate(self.basis)
                if a.degree + b.degree <= self.degree]

    def group(self, kind: str) -> SpectralGroup:
        """``tau`` or ``sigma`` as a diagonal spectral group on the PBW basis."""
        q = float(self.engine.q)
        if kind == "tau":
            evs = [q ** (2 * (t.l - t.m)) for t in self.basis]
        elif kind == "sigma":
            evs = [q ** (-2 * t.k) for t in self.basis]
        else:
            raise ValueError(f"unknown group {kind!r}")
        return SpectralGroup.diagonal(evs, f"{kind}(q={self.engine.q})")
