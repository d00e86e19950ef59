import csv
import json

import pytest

from historiclab.errors import ConfigError
from historiclab.harness import PRESETS, list_presets, run_scenario, validate_config
from historiclab.harness.cli import main
from historiclab.harness.config import REQUIRED


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def geometric_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("geo")
    return run_scenario(validate_config('{"scenario": "shift-blocks-geometric"}'), out), out


# --- presets and validation ---------------------------------------------------------


def test_list_presets_stable_and_complete():
    names = [n for n, _ in list_presets()]
    assert names == sorted(names) and len(set(names)) == len(names)
    for required in ("shift-blocks-geometric", "folner-z2-fixedpoint", "rigidity-goldenmean"):
        assert required in names
    assert all(desc for _, desc in list_presets())


def test_every_preset_validates():
    for name in PRESETS:
        cfg = validate_config(json.dumps({"scenario": name}))
        assert cfg.horizon >= 1 and cfg.seeds
        assert cfg.to_dict()["scenario"] == name


def test_empty_config_lists_required_fields():
    with pytest.raises(ConfigError) as e:
        validate_config("{}")
    assert e.value.code == "CONFIG_INVALID"
    assert {p for p, _ in e.value.errors} >= set(REQUIRED)


def test_preset_defaults_echoed():
    cfg = validate_config('{"scenario": "shift-blocks-geometric"}')
    d = cfg.to_dict()
    assert d["horizon"] == 1 << 20 and d["seeds"] == [1]
    assert d["tolerances"]["tail_fraction"] == 0.5
    assert d["output_dir"] == "runs/shift-blocks-geometric"


def test_invalid_fields_reported_with_paths():
    with pytest.raises(ConfigError) as e:
        validate_config('{"scenario": "psi-bound", "horizon": 0}')
    assert [p for p, _ in e.value.errors] == ["horizon"]
    with pytest.raises(ConfigError) as e:
        validate_config('{"scenario": "psi-bound", "horizon": 0, "tolerances": {"cluster_tol": -1}}')
    assert {p for p, _ in e.value.errors} == {"horizon", "tolerances.cluster_tol"}
    with pytest.raises(ConfigError) as e:
        validate_config('{"scenario": "no-such-thing"}')
    assert e.value.code == "UNKNOWN_SCENARIO"


def test_parse_error_offset():
    text = '{"scenario": "psi-bound",, "horizon": 3}'
    with pytest.raises(ConfigError) as e:
        validate_config(text)
    assert e.value.code == "PARSE_ERROR"
    assert e.value.details["offset"] == text.index(",,") + 1
    multibyte = '{"scenario": "é", x}'
    with pytest.raises(ConfigError) as e:
        validate_config(multibyte)
    assert e.value.details["offset"] == len(multibyte[: multibyte.index("x")].encode())


def test_inline_config():
    raw = {
        "scenario": "INLINE",
        "system": {"kind": "shift", "alphabet": 2, "point": {"type": "periodic", "word": "011"}},
        "observable": {"kind": "coordinate"},
        "scheme": "birkhoff",
        "horizon": 300,
    }
    cfg = validate_config(json.dumps(raw))
    assert cfg.task == "birkhoff_shift"


# --- runs -------------------------------------------------------------------------


def test_geometric_preset_gap(geometric_run):
    _, out = geometric_run
    report = json.loads((out / "report.json").read_text())
    osc = report["results"]["runs"][0]["oscillation"]
    assert abs(osc["gap"] - 1 / 3) < 0.01
    assert _read_csv(out / "averages.csv")[0] == ["seed", "n", "average"]


def test_manifest_digests(geometric_run):
    manifest, out = geometric_run
    assert manifest.verify()
    saved = json.loads((out / "manifest.json").read_text())
    assert [a["path"] for a in saved["artifacts"]] == ["averages.csv", "report.json"]
    (out / "averages.csv").write_text("tampered\n")
    assert not manifest.verify()


def test_report_deterministic(geometric_run, tmp_path):
    _, out = geometric_run
    cfg = validate_config('{"scenario": "shift-blocks-geometric"}')
    run_scenario(cfg, tmp_path)
    assert (tmp_path / "report.json").read_bytes() == (out / "report.json").read_bytes()


def test_psi_bound_preset(tmp_path):
    run_scenario(validate_config('{"scenario": "psi-bound"}'), tmp_path)
    rows = _read_csv(tmp_path / "averages.csv")
    assert rows[0] == ["n", "lhs", "bound", "holds"]
    assert len(rows) - 1 == 999 and all(r[3] == "true" for r in rows[1:])
    assert json.loads((tmp_path / "report.json").read_text())["results"]["all_hold"] is True


def test_kan_intermingled_preset(tmp_path):
    run_scenario(validate_config('{"scenario": "kan-intermingled"}'), tmp_path)
    rows = _read_csv(tmp_path / "averages.csv")
    assert rows[0] == ["seed", "box_i", "box_j", "n_B0", "n_B1", "n_undecided"]
    assert len(rows) - 1 == 64
    assert all(int(r[3]) > 0 and int(r[4]) > 0 for r in rows[1:])


@pytest.mark.parametrize("name", ["folner-z2-fixedpoint", "tempered-boxes", "rigidity-goldenmean", "cesaro-spherical-preorbit"])
def test_small_presets_run(name, tmp_path):
    manifest = run_scenario(validate_config(json.dumps({"scenario": name})), tmp_path)
    assert manifest.verify()
    assert _read_csv(tmp_path / "averages.csv")[0]


def test_files_are_utf8_lf(geometric_run):
    _, out = geometric_run
    for name in ("averages.csv", "report.json", "manifest.json"):
        data = (out / name).read_bytes()
        data.decode("utf-8")
        assert b"\r" not in data and data.endswith(b"\n")


# --- CLI ---------------------------------------------------------------------------


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["list"]) == 0
    assert "psi-bound" in capsys.readouterr().out
    assert main(["validate", "--preset", "psi-bound", "--quiet"]) == 0
    assert main(["validate", "--preset", "nope"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"horizon": ')
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["run", "--preset", "tempered-boxes", "--horizon", "0", "--quiet"]) == 2
    assert main(["run", "--preset", "tempered-boxes", "--horizon", "5", "--out", str(tmp_path / "t"), "--quiet"]) == 0
    assert (tmp_path / "t" / "manifest.json").exists()


def test_cli_seed_override(tmp_path):
    out = tmp_path / "s"
    assert main(["run", "--preset", "coin-toss-transitive-bounds", "--seed", "5", "--seed", "6", "--horizon", "4096", "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["seeds"] == [5, 6]


def test_cli_runtime_error(tmp_path, capsys):
    # a valid config whose horizon is too short for the witness fails at run time
    code = main(["run", "--preset", "psi-bound", "--horizon", "1", "--out", str(tmp_path / "p"), "--quiet"])
    assert code == 3
    assert "HORIZON_TOO_SMALL" in capsys.readouterr().err
