import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from aqg import cli, instances
from aqg.finqg import StructureError


def run(*args):
    return CliRunner().invoke(cli.main, [str(a) for a in args])


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def string_rows(doc):
    """Same instance with every scalar written as "num/den" strings."""
    out = dict(doc)
    for key, nidx in (("mult", 3), ("star", 2), ("comult", 3)):
        rows = []
        for r in doc[key]:
            rn, rd, i_n, i_d = r[nidx:]
            rows.append(r[:nidx] + [f"{rn}/{rd}", f"{i_n}/{i_d}"])
        out[key] = rows
    return out


def test_bundled_instances_load():
    inst = cli.load_instance("c_z2.json")
    assert isinstance(inst, cli.FiniteInstance) and inst.spec.dim == 2
    s = cli.load_instance("suq2")
    assert isinstance(s, cli.Suq2Instance) and s.q == Fraction(1, 2)


@pytest.mark.parametrize("name", sorted(instances.BUILDERS))
def test_bundled_files_match_builders(name):
    spec = cli.load_instance(name).spec
    built = instances.BUILDERS[name]()
    assert (spec.mult, spec.star, spec.unit, spec.comult) == (built.mult, built.star, built.unit, built.comult)


def test_string_rows_parse_like_integer_rows(tmp_path):
    doc = instances.spec_to_document(instances.kac_paljutkin())
    spec = cli.load_instance(str(write(tmp_path, string_rows(doc)))).spec
    assert spec.mult == instances.kac_paljutkin().mult


def test_non_associative_file(tmp_path):
    doc = instances.spec_to_document(instances.c_s3())
    doc["mult"] = [r for r in doc["mult"] if r[:2] != [1, 1]] + [[1, 1, 2, 1, 1, 0, 1]]
    path = write(tmp_path, doc)
    with pytest.raises(StructureError, match=r"associativity fails at \("):
        cli.load_instance(str(path))
    res = run(path, "--suite", "hopf")
    assert res.exit_code == 1
    assert "associativity" in res.output


@pytest.mark.parametrize("text, message", [
    ('{"kind": "finite", "dim": 2,', "parse error at line 1"),
    ('{"kind": "torus"}', "kind"),
    ('{"kind": "finite", "dim": 2, "mult": [[0, 0, 5, 1, 1, 0, 1]], "star": [], "unit": ["1", "0"], '
     '"comult": []}', "mult[0]"),
    ('{"kind": "suq2", "q": "3/2"}', "(0, 1)"),
])
def test_config_errors_exit_2(tmp_path, text, message):
    res = run(write(tmp_path, text), "--suite", "hopf")
    assert res.exit_code == 2
    assert message in res.output


def test_flag_errors_exit_2():
    assert run("no_such_instance").exit_code == 2
    assert run("suq2", "--q", "2").exit_code == 2
    assert run("suq2", "--z-grid", "1,bogus").exit_code == 2
    assert run("suq2", "--tolerance", "-1").exit_code == 2
    assert run("suq2", "--suite", "everything").exit_code == 2


def test_c_z2_all_passes():
    res = run("c_z2.json", "--suite", "all")
    assert res.exit_code == 0, res.output
    assert "overall: PASS" in res.output


def test_suq2_identities_degree_four():
    res = run("suq2.json", "--suite", "identities", "--degree", 4, "--z-grid", "default", "--format", "json")
    assert res.exit_code == 0
    rep = json.loads(res.stdout)
    assert rep["pass"] and max(e["residual"] for e in rep["entries"]) < 1e-9


def test_suq2_haar_json_is_exact():
    res = run("suq2.json", "--suite", "haar", "--degree", 6, "--format", "json")
    assert res.exit_code == 0
    rep = json.loads(res.stdout)
    assert {"suite", "instance", "config", "entries", "pass"} <= set(rep)
    entries = {e["id"]: e for e in rep["entries"]}
    for name in ("left_invariance", "right_invariance", "strong_left_invariance", "haar_normalized",
                 "haar_oracle_degree2"):
        assert entries[name]["residual"] == 0
    assert rep["config"]["q"] == "1/2" and rep["config"]["degree"] == 6


def test_json_is_deterministic_across_runs_and_jobs():
    first = run("c_s3", "--format", "json").stdout
    assert first == run("c_s3", "--format", "json").stdout
    assert first == run("c_s3", "--format", "json", "--jobs", 3).stdout


def test_q_override_is_echoed():
    res = run("suq2", "--suite", "hopf", "--degree", 2, "--q", "1/3", "--format", "json")
    assert res.exit_code == 0
    assert json.loads(res.stdout)["config"]["q"] == "1/3"


@pytest.mark.parametrize("name", ["fault_broken_coproduct", "fault_perturbed_haar", "fault_wrong_f_sign"])
def test_fault_fixtures_exit_1(name):
    res = run(name, "--degree", 4, "--format", "json")
    assert res.exit_code == 1
    rep = json.loads(res.stdout)
    assert not rep["pass"]
    assert max(e["residual"] for e in rep["entries"] if not e["pass"]) >= 1e-3


def test_module_entry_point_runs():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "aqg", "c_z2", "--suite", "hopf", "--format", "json"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["pass"]
