"""``verify`` command: load an instance file, run suites, report."""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import click
import numpy as np

from . import duality, finqg, oneparam, suq2
from .finqg import AlgebraSpec, StructureError
from .linalg import InconsistentSystem
from .report import Report
from .scalars import ToleranceCfg, make_scalar, parse_rational

# raised by the engines when the data cannot support a derivation; reported as failures
ENGINE_ERRORS = (StructureError, InconsistentSystem, oneparam.NotRelativelyInvariant, duality.NotRepresentable,
                 suq2.DegreeCapError)
SUITES = ("hopf", "haar", "modular", "oneparam", "identities", "duality")
ANALYTIC_DEGREE_CAP = 4


class ConfigError(ValueError):
    """Bad flags or an unreadable instance file (exit code 2)."""


@dataclass
class FiniteInstance:
    spec: AlgebraSpec
    path: str
    structure: Report


@dataclass
class Suq2Instance:
    q: Fraction
    degree_cap: int
    path: str
    faults: Dict[str, object] = field(default_factory=dict)

    def engine(self, q: Optional[Fraction] = None, degree: Optional[int] = None) -> suq2.SUq2:
        kappa = None
        shift = None
        if "f_sign" in self.faults:
            kappa = int(self.faults["f_sign"])
        if "haar_shift" in self.faults:
            hs = self.faults["haar_shift"]
            shift = (suq2.PbwTerm(*hs["term"]), parse_rational(hs["delta"]))
        return suq2.SUq2(q if q is not None else self.q, degree if degree is not None else self.degree_cap,
                         kappa=kappa, haar_shift=shift)


Instance = Union[FiniteInstance, Suq2Instance]


# -- loading -----------------------------------------------------------------

def resolve_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    stem = name[:-5] if name.endswith(".json") else name
    bundled = resources.files("aqg") / "instances" / f"{stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"instance {name!r} not found (neither a file nor a bundled instance)")


def _parse_scalar(values: Sequence, where: str):
    """Either four ints ``re_num re_den im_num im_den`` or one/two ``"num/den"`` strings."""
    try:
        if len(values) == 4 and all(isinstance(v, int) for v in values):
            rn, rd, i_n, i_d = values
            return make_scalar(Fraction(rn, rd), Fraction(i_n, i_d))
        if len(values) in (1, 2):
            re = parse_rational(values[0])
            im = parse_rational(values[1]) if len(values) == 2 else Fraction(0)
            return make_scalar(re, im)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"{where}: bad scalar {list(values)!r} ({exc})")
    raise ConfigError(f"{where}: expected 4 integers or 1-2 \"num/den\" strings, got {list(values)!r}")


def _rows(doc: dict, key: str, nidx: int, n: int):
    rows = doc.get(key)
    if not isinstance(rows, list):
        raise ConfigError(f"field {key!r} must be a list of rows")
    for r, row in enumerate(rows):
        where = f"{key}[{r}]"
        if not isinstance(row, list) or len(row) <= nidx:
            raise ConfigError(f"{where}: malformed row {row!r}")
        idx = row[:nidx]
        if not all(isinstance(i, int) and 0 <= i < n for i in idx):
            raise ConfigError(f"{where}: index out of range in {row!r}")
        yield idx, _parse_scalar(row[nidx:], where)


def spec_from_document(doc: dict, name: str = "") -> AlgebraSpec:
    try:
        n = int(doc["dim"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("field 'dim' missing or not an integer")
    labels = doc.get("basis") or [f"e{i}" for i in range(n)]
    if len(labels) != n:
        raise ConfigError(f"field 'basis' has {len(labels)} labels for dim {n}")
    mult = [[{} for _ in range(n)] for _ in range(n)]
    for (i, j, k), c in _rows(doc, "mult", 3, n):
        mult[i][j][k] = mult[i][j].get(k, 0) + c
    star = [{} for _ in range(n)]
    for (i, k), c in _rows(doc, "star", 2, n):
        star[i][k] = star[i].get(k, 0) + c
    unit_raw = doc.get("unit")
    if not isinstance(unit_raw, list) or len(unit_raw) != n:
        raise ConfigError("field 'unit' must list one coefficient per basis element")
    unit = {}
    for i, v in enumerate(unit_raw):
        c = _parse_scalar([str(v)] if isinstance(v, int) else ([v] if isinstance(v, str) else v), f"unit[{i}]")
        if c != 0:
            unit[i] = c
    comult = [{} for _ in range(n)]
    for (i, j, k), c in _rows(doc, "comult", 3, n):
        comult[i][(j, k)] = comult[i].get((j, k), 0) + c
    clean = lambda d: {k: v for k, v in d.items() if v != 0}
    return AlgebraSpec(n, list(labels), [[clean(c) for c in row] for row in mult], [clean(s) for s in star],
                       unit, [clean(c) for c in comult], doc.get("name", name))


def load_instance(path: str, strict: bool = True) -> Instance:
    """Parse and validate an instance file.

    With ``strict`` a finite instance failing an axiom raises
    :class:`StructureError` naming the axiom and its witness; otherwise the
    failing structure report is kept on the instance.
    """
    p = resolve_path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    kind = doc.get("kind")
    if kind == "finite":
        spec = spec_from_document(doc, p.stem)
        try:
            structure = finqg.validate_structure(spec)
        except StructureError as exc:
            raise ConfigError(f"{p}: {exc}")
        if strict and not structure.passed:
            bad = [e for e in structure.entries if not e.passed]
            raise StructureError("; ".join(f"{e.id} fails at {e.witness}" for e in bad))
        return FiniteInstance(spec, str(p), structure)
    if kind == "suq2":
        try:
            q = parse_rational(doc.get("q", "1/2"))
        except ValueError as exc:
            raise ConfigError(f"{p}: field 'q': {exc}")
        if not 0 < q < 1:
            raise ConfigError(f"{p}: field 'q' must lie in (0, 1)")
        return Suq2Instance(q, int(doc.get("degree_cap", 6)), str(p), dict(doc.get("faults", {})))
    raise ConfigError(f"{p}: field 'kind' must be 'finite' or 'suq2', got {kind!r}")


# -- suites ------------------------------------------------------------------

@dataclass
class RunConfig:
    degree: int = 6
    q: Optional[Fraction] = None
    z_grid: Tuple[complex, ...] = oneparam.DEFAULT_Z_GRID
    tolerance: ToleranceCfg = field(default_factory=ToleranceCfg)

    def echo(self, inst: Instance) -> dict:
        out = {"degree": self.degree, "z_grid": [_fmt_z(z) for z in self.z_grid],
               "tolerance": self.tolerance.abs_tol}
        if isinstance(inst, Suq2Instance):
            out["q"] = str(self.q if self.q is not None else inst.q)
            out["analytic_degree"] = min(self.degree, ANALYTIC_DEGREE_CAP)
            if inst.faults:
                out["faults"] = sorted(inst.faults)
        return out


def _fmt_z(z) -> str:
    z = complex(z)
    re, im = z.real + 0.0, z.imag + 0.0          # drop signed zeros
    return f"{re!r}{'+' if im >= 0 else '-'}{abs(im)!r}i"


def _finite_oneparam(pipe: finqg.FinitePipeline, cfg: RunConfig) -> Report:
    rep = Report("oneparam", pipe.spec.name)
    tol = cfg.tolerance
    model = oneparam.FiniteModel(pipe.spec, pipe.phi.covector, pipe.gns.inner)
    sigma = oneparam.SpectralGroup.from_eigen(pipe.gns.eigenvectors, pipe.gns.eigenvalues, "sigma")
    rep.merge(oneparam.check_group_laws(sigma, model, cfg.z_grid, tol), "sigma_")
    lam, lrep = oneparam.compute_lambda(sigma, model.phi(), cfg.z_grid, tol)
    rep.merge(lrep, "sigma_")
    nabla = np.array([[complex(c) for c in row] for row in pipe.gns.nabla])
    rep.merge(oneparam.p_operator_check(sigma, lam, model.inner(), cfg.z_grid, tol, nabla=nabla), "sigma_")
    rebuilt = oneparam.rebuild_from_i(sigma)
    rep.merge(oneparam.uniqueness_check(sigma, rebuilt, cfg.z_grid, tol, model.labels), "sigma_")
    rep.merge(oneparam.unitary_rep_check(duality.delta_rep(pipe), cfg.z_grid, tol), "delta_")
    return rep


def _finite_identities(pipe: finqg.FinitePipeline, cfg: RunConfig) -> Report:
    """The analytic identities in their finite (Kac) form, in exact arithmetic."""
    spec, md = pipe.spec, pipe.modular
    rep = Report("identities", spec.name)
    n = spec.dim
    e = [spec.basis(i) for i in range(n)]
    S = md.S
    S2 = finqg.compose(S, S)
    ident = finqg.identity(n)
    if S2 != ident:
        rep.flag("tau_trivial", "tau = i since S^2 = i", False, 1.0)
        return rep
    R = S                                   # R = S tau_{i/2} with tau = i
    D = [spec.comul(x) for x in e]
    L = spec.label
    r, w = finqg._worst((finqg.tensor_diff(spec.comul(finqg.apply(R, e[i])),
                                           finqg.flip(finqg.map_tensor(D[i], R, R))), L(i)) for i in range(n))
    rep.exact("comult_R", "D R = chi(R (x) R)D", r, w)
    rep.exact("R_involution", "R^2 = i", max(finqg.vec_diff(a, b) for a, b in zip(finqg.compose(R, R), ident)))
    r, w = finqg._worst((finqg.vec_diff(finqg.apply(R, spec.star_vec(e[i])), spec.star_vec(finqg.apply(R, e[i]))),
                         L(i)) for i in range(n))
    rep.exact("R_star", "R(a*) = R(a)*", r, w)
    eps = md.eps.covector
    r = max(finqg.magnitude(finqg.evaluate(eps, finqg.apply(R, x)) - finqg.evaluate(eps, x)) for x in e)
    rep.exact("counit_R", "eps R = eps", r)
    ph = pipe.phi.covector
    r = max(finqg.magnitude(finqg.evaluate(ph, finqg.apply(R, x)) - finqg.evaluate(ph, x)) for x in e)
    rep.exact("haar_R", "phi R = phi S = phi (nu = 1, delta = 1)", r)
    sig = lambda z: pipe.gns.nabla_power(z)
    phc = np.array([complex(c) for c in ph])
    best = max(float(np.max(np.abs(phc @ sig(z) - phc))) for z in cfg.z_grid)
    rep.approx("haar_sigma", "phi sigma_z = phi", best, cfg.tolerance.abs_tol)
    rm = np.array([[complex(c) for c in row] for row in R])
    best = max(float(np.max(np.abs(rm @ sig(-z) @ rm - sig(z)))) for z in cfg.z_grid)
    rep.approx("sigmap_R_sigma_R", "sigma'_z = R sigma_-z R (sigma' = sigma)", best, cfg.tolerance.abs_tol)
    return rep


def _suq2_oneparam(eng: suq2.SUq2, degree: int, cfg: RunConfig) -> Report:
    rep = Report("oneparam", f"suq2(q={eng.q})")
    tol = cfg.tolerance
    model = oneparam.Suq2Model(eng, degree)
    groups = {kind: model.group(kind) for kind in ("tau", "sigma")}
    for kind, g in groups.items():
        rep.merge(oneparam.check_group_laws(g, model, cfg.z_grid, tol), f"{kind}_")
        best, wit = 0.0, None
        for z in cfg.z_grid:
            for i, t in enumerate(model.basis):
                spectral = oneparam.evaluate_group(g, z, np.eye(model.dim)[:, i])
                direct = model.from_poly(eng.analytic_map(kind, z, suq2.NcPoly.term(t)))
                r = oneparam.scaled_residual(spectral - direct, direct)
                if r > best:
                    best, wit = r, f"z={z}, x={t.label()}"
        rep.approx(f"{kind}_spectral_vs_engine", "spectral evaluation equals the engine's map (scaled)", best,
                   tol.abs_tol, wit)
        lam, lrep = oneparam.compute_lambda(g, model.phi(), cfg.z_grid, tol)
        rep.merge(lrep, f"{kind}_")
        rep.merge(oneparam.p_operator_check(g, lam, model.inner(), cfg.z_grid, tol), f"{kind}_")
        rep.merge(oneparam.uniqueness_check(g, oneparam.rebuild_from_i(g), cfg.z_grid, tol, model.labels),
                  f"{kind}_")
    cross = oneparam.uniqueness_check(groups["tau"], groups["sigma"], cfg.z_grid, tol, model.labels)
    differ = not cross.notes["agree_at_i"]
    rep.flag("tau_sigma_differ_at_i", "tau_i != sigma_i", differ, 0.0 if differ else 1.0,
             cross.notes.get("witness_at_i"))
    rep.notes["tau_vs_sigma_witness"] = cross.notes.get("witness_at_i")
    unit = suq2.NcPoly.one()
    urep = oneparam.UnitaryRep(lambda z: eng.delta_power(1j * complex(z)), eng.multiply, eng.star, unit,
                               lambda x, y: float(suq2.poly_diff(x, y)), "delta^{iz}")
    rep.merge(oneparam.unitary_rep_check(urep, cfg.z_grid, tol), "delta_")
    return rep


def _finite_suite(inst: FiniteInstance, suite: str, cfg: RunConfig) -> Report:
    spec = inst.spec
    if suite == "hopf":
        return finqg.hopf_report(spec)
    pipe = finqg.run_pipeline(spec, cfg.tolerance)
    if suite == "haar":
        return finqg.haar_report(spec, cfg.tolerance)
    if suite == "modular":
        rep = finqg.modular_report(spec, pipe.phi, pipe.modular)
        return rep.merge(finqg.gns_report(spec, pipe.phi, pipe.modular, pipe.gns, cfg.z_grid, cfg.tolerance),
                         "gns_")
    if suite == "oneparam":
        return _finite_oneparam(pipe, cfg)
    if suite == "identities":
        return _finite_identities(pipe, cfg)
    if suite == "duality":
        return duality.finite_duality_suite(pipe, cfg.z_grid, cfg.tolerance)
    raise ConfigError(f"unknown suite {suite!r}")


def _suq2_suite(inst: Suq2Instance, suite: str, cfg: RunConfig) -> Report:
    eng = inst.engine(cfg.q, max(cfg.degree, 1))
    adeg = min(cfg.degree, ANALYTIC_DEGREE_CAP)
    if suite == "hopf":
        return suq2.hopf_suite(eng, cfg.degree)
    if suite == "haar":
        return suq2.haar_invariance_residual(eng, cfg.degree, cfg.tolerance)
    if suite == "modular":
        return suq2.modular_suite(eng, cfg.degree, cfg.tolerance)
    if suite == "oneparam":
        return _suq2_oneparam(eng, adeg, cfg)
    if suite == "identities":
        return suq2.identity_suite(eng, cfg.z_grid, adeg, cfg.tolerance)
    if suite == "duality":
        rep = suq2.f_sign_report(eng)
        rep.suite = "duality"
        return rep.merge(duality.suq2_duality_suite(eng, cfg.z_grid, adeg, cfg.tolerance))
    raise ConfigError(f"unknown suite {suite!r}")


def run_one(inst: Instance, suite: str, cfg: RunConfig) -> Report:
    if isinstance(inst, FiniteInstance) and not inst.structure.passed:
        return Report(suite, inst.spec.name).merge(inst.structure, "structure_")
    try:
        if isinstance(inst, FiniteInstance):
            return _finite_suite(inst, suite, cfg)
        return _suq2_suite(inst, suite, cfg)
    except ENGINE_ERRORS as exc:
        rep = Report(suite, getattr(getattr(inst, "spec", None), "name", "suq2"))
        rep.flag("derivation", "every derived quantity of the suite exists", False, 1.0,
                 f"{type(exc).__name__}: {exc}")
        return rep


def _worker(path: str, suite: str, cfg: RunConfig) -> Report:
    return run_one(load_instance(path, strict=False), suite, cfg)


def run_suite(inst: Instance, suite: str, cfg: RunConfig, jobs: int = 1) -> Report:
    """Run one suite or ``all``; the result is canonically sorted."""
    names = SUITES if suite == "all" else (suite,)
    for s in names:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}")
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_worker, [inst.path] * len(names), names, [cfg] * len(names)))
    else:
        parts = [run_one(inst, s, cfg) for s in names]
    name = inst.spec.name if isinstance(inst, FiniteInstance) else f"suq2(q={cfg.q or inst.q})"
    if len(parts) == 1:
        rep = parts[0]
    else:
        rep = Report("all", name)
        for s, part in zip(names, parts):
            rep.merge(part, f"{s}.")
    rep.suite = suite
    rep.instance = name
    rep.config = {**rep.config, **cfg.echo(inst)}
    return rep.sorted()


# -- command -----------------------------------------------------------------

@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("instance")
@click.option("--suite", default="all", show_default=True,
              type=click.Choice(SUITES + ("all",)), help="Which identities to check.")
@click.option("--degree", default=6, show_default=True, type=click.IntRange(0, 8),
              help="Degree cap for SU_q(2) monomials.")
@click.option("--q", "q_text", default=None, help="Override q for SU_q(2), as num/den.")
@click.option("--z-grid", "z_grid", default="default", show_default=True,
              help="'default' or a comma list of complex numbers such as 0,1,-0.5j,0.5+0.3333j.")
@click.option("--tolerance", default=1e-9, show_default=True, type=float, help="Absolute tolerance.")
@click.option("--format", "fmt", default="text", show_default=True, type=click.Choice(["text", "json"]))
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(1, 64), help="Worker processes.")
def main(instance, suite, degree, q_text, z_grid, tolerance, fmt, jobs):
    """Check the algebraic quantum group identities of INSTANCE.

    INSTANCE is a path or the name of a bundled instance (c_z2, f_z2, c_s3,
    f_s3, kac_paljutkin, suq2).  Exit code 0 means every check passed, 1 that
    some check failed, 2 a configuration error.
    """
    try:
        cfg = RunConfig(degree=degree, z_grid=oneparam.parse_z_grid(z_grid),
                        tolerance=ToleranceCfg(abs_tol=tolerance))
        if q_text is not None:
            cfg.q = parse_rational(q_text)
            if not 0 < cfg.q < 1:
                raise ConfigError("--q must lie in (0, 1)")
        inst = load_instance(instance, strict=False)
        if isinstance(inst, FiniteInstance) and not inst.structure.passed:
            bad = [e for e in inst.structure.entries if not e.passed]
            click.echo("structure check failed: " + "; ".join(f"{e.id} at {e.witness}" for e in bad), err=True)
        rep = run_suite(inst, suite, cfg, jobs)
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(rep.to_json() if fmt == "json" else rep.to_text())
    sys.exit(0 if rep.passed else 1)


if __name__ == "__main__":
    main()
