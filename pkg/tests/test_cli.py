import json
import os

import pytest

from stitlab import cli
from stitlab.config import ConfigError, ExperimentConfig


def _write_cfg(tmp_path, name, **kw):
    path = tmp_path / name
    path.write_text(json.dumps(kw))
    return str(path)


def test_splitmix64_golden():
    assert cli.splitmix64(0, 0) == 16294208416658607535
    assert cli.splitmix64(0, 1) == 7960286522194355700
    assert cli.splitmix64(42, 0) == 13679457532755275413
    # wraps mod 2^64
    assert cli.splitmix64(2**64 - 1, 0) == 16490336266968443936
    assert cli.splitmix64(1, 0) != cli.splitmix64(0, 1)


def test_replicate_rng_reproducible():
    a = cli.replicate_rng(5, 3).random(4)
    b = cli.replicate_rng(5, 3).random(4)
    assert (a == b).all()
    assert not (a == cli.replicate_rng(5, 4).random(4)).all()


def test_fmt_roundtrip():
    x = 0.1 + 0.2
    assert float(cli._fmt(x)) == x
    assert cli._fmt(None) == ""
    assert cli._fmt(7) == "7"


def test_config_roundtrip_and_unknown_field():
    cfg = ExperimentConfig(
        kind="verify", dimension=2, t=2.0, replicates=3, seed=1,
        window={"box": [1.0, 1.0]},
    )
    cfg.validate()
    cfg2 = ExperimentConfig.from_json(cfg.to_json())
    assert cfg2 == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json('{"kind": "verify", "bogus": 1}')


@pytest.mark.parametrize(
    "patch",
    [
        {"kind": "nope"},
        {"dimension": 4},
        {"t": 0.0},
        {"replicates": 0},
        {"erosion": -1.0},
        {"checkpoints": [2.0, 1.0]},
        {"r_grid": [-0.5]},
        {"window": {}},
        {"window": {"box": [1.0]}},  # wrong length for d=2
        {"measure": {"kind": "mystery"}},
    ],
)
def test_config_validation_errors(patch):
    base = dict(
        kind="verify", dimension=2, t=1.0, replicates=2,
        window={"box": [1.0, 1.0]},
    )
    base.update(patch)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(json.dumps(base))


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("STITLAB_THREADS", "3")
    assert cli._default_threads() == 3
    monkeypatch.delenv("STITLAB_THREADS")
    assert cli._default_threads() >= 1


def test_verify_d1_passes(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="verify", dimension=1, t=2.0, replicates=150, seed=11,
        window={"box": [5.0]},
    )
    out = str(tmp_path / "out")
    rc = cli.main(["verify", "--config", cfg, "--threads", "1", "--out", out])
    assert rc == 0
    csv = open(os.path.join(out, "verify.csv")).read()
    lines = csv.strip().splitlines()
    assert lines[0] == "statistic,estimate,se,target,z,provenance"
    stats_seen = {l.split(",")[0] for l in lines[1:]}
    assert {"mean_total_surface", "poisson_mean_count", "poisson_var_count"} <= stats_seen
    report = json.loads(open(os.path.join(out, "verify.json")).read())
    assert report["passed"] is True


def test_invalid_config_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, "bad.json", kind="nope")
    rc = cli.main(["verify", "--config", cfg])
    assert rc == 2


def test_thread_count_invariance(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="verify", dimension=2, t=3.0, replicates=6, seed=7,
        window={"box": [1.0, 1.0]}, erosion=0.1,
    )
    outs = []
    for th in ("1", "2"):
        out = str(tmp_path / f"out{th}")
        cli.main(["verify", "--config", cfg, "--threads", th, "--out", out])
        outs.append(out)
    for stem in ("verify.csv", "verify.json"):
        b1 = open(os.path.join(outs[0], stem), "rb").read()
        b2 = open(os.path.join(outs[1], stem), "rb").read()
        assert b1 == b2


def test_seed_override_changes_output(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="simulate", dimension=2, t=2.0, replicates=1, seed=1,
        window={"box": [1.0, 1.0]},
    )
    o1, o2, o3 = (str(tmp_path / k) for k in ("a", "b", "c"))
    cli.main(["simulate", "--config", cfg, "--threads", "1", "--out", o1])
    cli.main(["simulate", "--config", cfg, "--threads", "1", "--out", o2])
    cli.main(["simulate", "--config", cfg, "--seed", "2", "--threads", "1",
              "--out", o3])
    f = "tessellation_0000.json"
    a = open(os.path.join(o1, f)).read()
    assert a == open(os.path.join(o2, f)).read()
    assert a != open(os.path.join(o3, f)).read()


def test_simulate_render_svg_deterministic(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="simulate", dimension=2, t=4.0, replicates=1, seed=5,
        window={"box": [1.0, 1.0]},
    )
    sim = str(tmp_path / "sim")
    cli.main(["simulate", "--config", cfg, "--threads", "1", "--out", sim])
    tess = os.path.join(sim, "tessellation_0000.json")
    r1, r2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert cli.main(["render", "--input", tess, "--format", "svg",
                     "--out", r1]) == 0
    assert cli.main(["render", "--input", tess, "--format", "svg",
                     "--out", r2, "--stroke-by-birth"]) == 0
    svg = open(os.path.join(r1, "tessellation_0000.svg")).read()
    assert svg.startswith("<?xml")
    assert "<line" in svg
    svg_b = open(os.path.join(r2, "tessellation_0000.svg")).read()
    assert svg != svg_b  # birth-time strokes alter widths


def test_render_ply(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="simulate", dimension=3, t=2.0, replicates=1, seed=3,
        window={"box": [1.0, 1.0, 1.0]},
    )
    sim = str(tmp_path / "sim")
    cli.main(["simulate", "--config", cfg, "--threads", "1", "--out", sim])
    tess = os.path.join(sim, "tessellation_0000.json")
    out = str(tmp_path / "r")
    assert cli.main(["render", "--input", tess, "--format", "ply",
                     "--out", out]) == 0
    ply = open(os.path.join(out, "tessellation_0000.ply")).read()
    assert ply.startswith("ply\nformat ascii 1.0")


def test_formulas_dump(tmp_path):
    out = str(tmp_path / "f")
    assert cli.main(["formulas", "dump", "--out", out, "--t", "2.0"]) == 0
    text = open(os.path.join(out, "formulas.csv")).read()
    lines = text.strip().splitlines()
    assert lines[0] == "formula,parameters,value,provenance"
    assert len(lines) > 20


def test_iterate_kind_dispatch(tmp_path):
    cfg = _write_cfg(
        tmp_path, "c.json",
        kind="iterate-test", dimension=1, t=2.0, replicates=200, seed=5,
        window={"box": [3.0]}, iterate_split=[0.8, 1.2],
    )
    out = str(tmp_path / "out")
    rc = cli.main(["verify", "--config", cfg, "--threads", "1", "--out", out])
    assert rc == 0
    report = json.loads(open(os.path.join(out, "iterate-test.json")).read())
    stats_seen = {r["statistic"] for r in report["rows"]}
    assert stats_seen == {"iterate_mean_diff", "iterate_var_diff"}


def test_shipped_configs_parse_and_build():
    root = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
    paths = sorted(p for p in os.listdir(root) if p.endswith(".json"))
    assert len(paths) >= 7
    for name in paths:
        with open(os.path.join(root, name)) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
        cfg.build_window()
        cfg.build_measure()
