import io
import json

import pytest

from soergel_bases import cli
from soergel_bases.bsmod import BSMorphism
from soergel_bases.catbases import Workspace
from soergel_bases.cli import Cache, Config, main, run_verify
from soergel_bases.coxeter import dihedral
from soergel_bases.errors import ConfigError


def run(argv):
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_group_validate_default():
    code, out = run(["group", "validate"])
    data = json.loads(out)
    assert code == 0 and data["ok"] and data["generators"] == ["s", "r"]
    assert data["bond"] == [[1, 4], [4, 1]]


def test_rex_json_and_dot(tmp_path):
    cfg = write_config(tmp_path, {"dihedral": 5})
    code, out = run(["--config", cfg, "rex", "srsr"])
    data = json.loads(out)
    assert code == 0 and data["rex"] == ["srsr"] and data["length"] == 4
    code, out = run(["--config", cfg, "--format", "dot", "rex", "srsrs"])
    assert out.startswith('graph "srsrs" {')
    assert '"srsrs" -- "rsrsr" [label="0"];' in out


def test_cores_output():
    code, out = run(["cores", "srsr"])
    data = json.loads(out)
    assert code == 0
    assert data["cores"] == [[2, 3]]
    assert data["f_tuple"] == ["Braid(0,4)", "Braid(0,4)"]


def test_morphism_fsr():
    code, out = run(["morphism", "fsr", "s", "r"])
    data = json.loads(out)
    assert code == 0 and data["bimodule"]
    assert data["morphism"]["source"] == "srsr" and data["morphism"]["target"] == "rsrs"
    assert data["morphism"]["degree"] == 0


def test_basis_csv():
    code, out = run(["--format", "csv", "basis", "--kind", "e", "--up-to", "2"])
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "w,e,r,s,rs,sr"
    # unshifted e_sr = (1+T_s)(1+T_r)
    assert "sr,1,1,1,0,1" in lines and "rs,1,1,1,1,0" in lines


def test_basis_kl_table_matches_d():
    _, kl = run(["basis", "--kind", "kl", "--up-to", "2"])
    _, d = run(["basis", "--kind", "d", "--up-to", "2"])
    assert json.loads(kl)["rows"] == json.loads(d)["rows"]


def test_compare():
    code, out = run(["compare", "srs"])
    data = json.loads(out)
    assert code == 0
    assert not data["d_equals_kl"]
    assert data["e_minus_d_positive"] and data["d_minus_kl_positive"]


def test_cache_hit_is_byte_identical(tmp_path):
    args = ["--cache-dir", str(tmp_path), "basis", "--kind", "e", "--up-to", "3"]
    _, first = run(args)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    _, second = run(args)
    assert first == second


def test_corrupted_cache_recomputes(tmp_path):
    args = ["--cache-dir", str(tmp_path), "morphism", "fsr", "r", "s"]
    _, first = run(args)
    (entry,) = tmp_path.glob("*.json")
    entry.write_text("{not json")
    _, second = run(args)
    assert first == second
    assert json.loads(entry.read_text())["payload"] == json.loads(first)


def test_cache_version_mismatch_is_a_miss(tmp_path):
    cache = Cache(str(tmp_path))
    cfg = Config.from_dict({"dihedral": 4})
    k = cache.key(cfg, "op", [1])
    (tmp_path / f"{k}.json").write_text(json.dumps({"version": "old", "payload": {"x": 1}}))
    assert cache.get(k) is None
    assert cache.cached(cfg, "op", [1], lambda: {"x": 2}) == {"x": 2}


def test_cache_key_depends_on_config():
    cache = Cache(None)
    a = cache.key(Config.from_dict({"dihedral": 4}), "basis", ["e", 3])
    b = cache.key(Config.from_dict({"dihedral": 5}), "basis", ["e", 3])
    c = cache.key(Config.from_dict({"dihedral": 4, "truncation": 12}), "basis", ["e", 3])
    assert len({a, b, c}) == 3


def test_verify_passes():
    code, out = run(["verify", "--up-to", "3"])
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert [r["suite"] for r in data["results"]] == ["fsr", "f2", "idem", "bases", "oracle"]


def mutated_workspace():
    ws = Workspace(dihedral(4))
    f = ws.ctx.f_sr(0, 1)
    cols = {j: dict(c) for j, c in f.cols.items()}
    cols[0][0] = cols[0][0] + cols[0][0]
    ws.ctx._fsr[(0, 1)] = BSMorphism(ws.ring, f.src, f.tgt, 0, cols)
    return ws


def test_mutated_fsr_fails_suite():
    (res,) = run_verify(mutated_workspace(), "fsr")
    assert not res.passed
    assert {f["check"] for f in res.failures} & {"bimodule", "fgf"}
    assert all("dump" in f for f in res.failures)


def test_mutated_fsr_exit_code(monkeypatch):
    ws = mutated_workspace()
    monkeypatch.setattr(cli, "Workspace", lambda *a, **k: ws)
    code, out = run(["verify", "--suite", "fsr"])
    data = json.loads(out)
    assert code == 1 and not data["passed"]
    assert data["results"][0]["failures"][0]["dump"]["source"] == "srsr"


def test_m3_config_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, {"dihedral": 3})
    code, _ = run(["--config", cfg, "group", "validate"])
    assert code == 2
    assert "NotExtraLarge" in capsys.readouterr().err


def test_m3_allowed_without_extra_large(tmp_path):
    cfg = write_config(tmp_path, {"dihedral": 3, "extra_large": False})
    code, out = run(["--config", cfg, "rex", "srs"])
    assert code == 0 and json.loads(out)["rex"] == ["srs", "rsr"]


def test_missing_cosine(tmp_path, capsys):
    cfg = write_config(tmp_path, {"dihedral": 5, "field": {"minpoly": [-2, 0, 1], "cos": {"4": "θ/2"}}})
    code, _ = run(["--config", cfg, "group", "validate"])
    assert code == 2
    assert "FieldMissingConstant" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    code, _ = run(["--config", str(tmp_path / "missing.json"), "group", "validate"])
    assert code == 2 and "ConfigError" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [{}, {"dihedral": 4, "format": "xml"}, {"dihedral": 4, "truncation": -1}, []])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        Config.from_dict(bad)


def test_non_reduced_word_exit_code(capsys):
    code, _ = run(["cores", "ss"])
    assert code == 2 and "NotReduced" in capsys.readouterr().err
