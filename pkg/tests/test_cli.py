import json

import pytest

from scenepaths.cli import EXIT_INPUT, EXIT_OK, EXIT_ORACLE, EXIT_PIPELINE, main
from scenepaths.config import DATA_DIR, load_settings
from scenepaths.errors import ConfigError, InputError
from scenepaths.layout import PlacedScene, validate
from scenepaths.pipeline import SceneRequest, generate
from scenepaths.oracle import RuleOracle


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_fixture_scene_is_valid_and_reproducible(tmp_path, capsys):
    a, b, svg = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "a.svg"
    code, _, err = run(capsys, "generate", "--scene", "bedroom", "--seed", "7", "--out", str(a), "--svg", str(svg))
    assert code == EXIT_OK
    for stage in ("split", "retrieve", "access_filter", "organize", "place"):
        assert stage in err
    assert run(capsys, "generate", "--scene", "bedroom", "--seed", "7", "--out", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    scene = PlacedScene.from_dict(json.loads(a.read_text()))
    assert validate(scene) == [] and scene.placements
    assert svg.read_text().startswith("<svg")


def test_generate_flag_overrides(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "generate", "--scene", "kitchen", "--tau", "0.3", "--k-main", "1", "--k-paired", "2",
                     "--k-other", "1", "--room", "6x4", "--baseline", "--out", str(out))
    assert code in (EXIT_OK, EXIT_PIPELINE)
    req = json.loads(out.read_text())["request"]
    assert req["room"] == [6.0, 4.0] and req["retrieval"]["tau"] == 0.3
    assert req["retrieval"]["k"] == {"main": 1, "paired": 2, "other": 1} and req["retrieval"]["baseline"]


def test_empty_scene_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["generate", "--scene", ""])
    assert e.value.code == 2


def test_no_root_writes_audit_and_fails(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, _, err = run(capsys, "generate", "--scene", "garage", "--out", str(out))
    assert code == EXIT_PIPELINE and "no-root" in err
    data = json.loads(out.read_text())
    assert data["audit"]["failure"] == "no-root" and data["placements"] == []


def test_error_exit_codes(tmp_path, capsys):
    assert run(capsys, "--catalog", str(tmp_path / "nope.txt"), "generate", "--scene", "bedroom")[0] == EXIT_INPUT
    assert run(capsys, "generate", "--scene", "bedroom", "--oracle", "remote")[0] == EXIT_ORACLE
    code, _, err = run(capsys, "generate", "--scene", "bedroom", "--room", "1x1")
    assert code == EXIT_PIPELINE and "room-too-small" in err
    assert run(capsys, "bench", "--specs", str(tmp_path / "none.yaml"), "--n", "1")[0] == EXIT_INPUT
    with pytest.raises(SystemExit):
        main(["bench", "--specs", "x", "--n", "0"])


def test_bench_writes_report(tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "--catalog", str(DATA_DIR / "adversarial_catalog.txt"), "bench", "--specs",
                       str(DATA_DIR / "adversarial_specs.yaml"), "--n", "3", "--out", str(rep),
                       "--scenes-dir", str(tmp_path / "scenes"), "--workers", "2")
    assert code == EXIT_OK and "baseline" in out
    data = json.loads(rep.read_text())
    assert data["baseline"]["main_missing_rate"] == 1.0 and data["multi-path"]["main_missing_rate"] == 0.0
    assert len(list((tmp_path / "scenes").iterdir())) == 6


def test_bench_identical_sides_zero_delta(tmp_path, capsys):
    cfg = tmp_path / "single.yaml"
    cfg.write_text(f"catalog: {DATA_DIR / 'catalog.txt'}\nrulebook: {DATA_DIR / 'rulebook.yaml'}\n"
                   "categories: {main: any object}\nretrieval: {k: {main: 12}}\n")
    rep = tmp_path / "r.json"
    code, _, _ = run(capsys, "--config", str(cfg), "bench", "--specs", str(DATA_DIR / "specs.yaml"), "--n", "1",
                     "--out", str(rep))
    assert code == EXIT_OK
    assert json.loads(rep.read_text())["delta"] == {"main": 0.0, "paired": 0.0}


def test_ingest_split_render_evaluate(tmp_path, capsys):
    norm = tmp_path / "c.txt"
    code, _, err = run(capsys, "ingest", str(DATA_DIR / "catalog.txt"), "--out", str(norm))
    assert code == EXIT_OK and "52 assets" in err
    assert run(capsys, "--catalog", str(norm), "split", "--scene", "kitchen", "--out", str(tmp_path / "p.json"))[0] == 0
    assert set(json.loads((tmp_path / "p.json").read_text())["partition"]) == {"main", "paired", "other"}
    scene = tmp_path / "s.json"
    run(capsys, "generate", "--scene", "kitchen", "--out", str(scene))
    code, out, _ = run(capsys, "render", str(scene), "--rotation", "90")
    assert code == EXIT_OK and "rotate(270" in out
    code, out, err = run(capsys, "evaluate", str(scene), "--specs", str(DATA_DIR / "specs.yaml"))
    assert code == EXIT_OK and json.loads(out)["n_scenes"] == 1 and "main missing" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("x | X | t | 1,1\n")
    code, _, err = run(capsys, "ingest", str(bad))
    assert code == EXIT_INPUT and "line 1" in err


def test_settings_and_request_validation(tmp_path):
    s = load_settings()
    assert s.catalog == DATA_DIR / "catalog.txt" and s.retrieval.tau == 0.2
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "missing.yaml")
    (tmp_path / "c.yaml").write_text("catalog: x.txt\nrulebook: r.yaml\ncategories: nope\n")
    with pytest.raises(ConfigError, match="unknown category set"):
        load_settings(tmp_path / "c.yaml")
    with pytest.raises(InputError):
        SceneRequest(" ")
    with pytest.raises(InputError):
        SceneRequest("bedroom", oracle="gpt")


def test_generate_audit_has_no_timings(catalog, rulebook, settings):
    gen = generate(settings.request("bathroom", 2), catalog, RuleOracle(rulebook, 2))
    assert set(gen.timings) == {"split", "retrieve", "access_filter", "organize", "place"}
    assert {"split", "retrieval", "organize", "layout", "oracle"} <= set(gen.scene.audit)
    assert "time" not in json.dumps(gen.scene.audit)


def test_generate_reuses_saved_partition(tmp_path, capsys):
    part = tmp_path / "p.json"
    assert run(capsys, "split", "--scene", "bedroom", "--out", str(part))[0] == EXIT_OK
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "generate", "--scene", "bedroom", "--seed", "3", "--out", str(a))
    code, _, err = run(capsys, "generate", "--scene", "bedroom", "--seed", "3", "--partition", str(part), "--out", str(b))
    assert code == EXIT_OK and "split" not in err.split("retrieve")[0]
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da["placements"] == db["placements"]
    code, _, err = run(capsys, "generate", "--scene", "kitchen", "--partition", str(part))
    assert code == EXIT_INPUT and "partition was built for" in err
