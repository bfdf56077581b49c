import math

import numpy as np
import pytest

from dephase_lab.config import (
    ConfigError, RunConfig, build_config, config_from_dict, parse_grid, parse_int_range,
    parse_number, read_config_file,
)
from dephase_lab.families import make_family
from dephase_lab.states import EncodingMask, GraphSpec


def test_parse_number():
    assert parse_number("pi") == math.pi
    assert parse_number("pi/4") == math.pi / 4
    assert parse_number("-2*pi + 1") == -2 * math.pi + 1
    for bad in ("__import__('os')", "e", "1/0", "2**3"):
        with pytest.raises(ConfigError):
            parse_number(bad)


def test_grid_includes_stop():
    g = parse_grid("0:1:0.05")
    assert len(g) == 21 and g[0] == 0.0 and g[-1] == 1.0
    assert g[3] == 0.15
    g = parse_grid("0:pi:0.01")
    assert len(g) == 315 and g[-1] <= math.pi
    assert len(parse_grid("0:0.3:0.1")) == 4
    assert np.array_equal(parse_grid("0,0.25,1"), [0, 0.25, 1])
    assert np.array_equal(parse_grid("0.5"), [0.5])
    for bad in ("", "0:1", "1:0:0.1", "0:1:0", "0:1:-0.1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_parse_int_range():
    assert parse_int_range("2:8") == (2, 3, 4, 5, 6, 7, 8)
    assert parse_int_range("2:8:3") == (2, 5, 8)
    assert parse_int_range("4") == (4,)
    assert parse_int_range("2,4") == (2, 4)
    with pytest.raises(ConfigError):
        parse_int_range("a")


def test_validation_errors():
    bad = [
        dict(family="nope"), dict(p="0:2:0.5"), dict(n="1"), dict(n="11"), dict(mask="10x1"),
        dict(mask="101"), dict(out="everything"), dict(shots=0), dict(resamples=10),
        dict(k="0"), dict(partitions="1v23"), dict(family="graph"),
    ]
    for kw in bad:
        with pytest.raises(ConfigError):
            RunConfig(**kw).validate()
    RunConfig(partitions="1v234,12v34").validate()


def test_hash_ignores_scheduling_fields():
    a = RunConfig(threads=1, out_dir="x")
    b = RunConfig(threads=8, out_dir="y")
    assert a.config_hash() == b.config_hash()
    assert RunConfig(seed=1).config_hash() != RunConfig(seed=2).config_hash()


def test_layering(tmp_path, monkeypatch):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep setup\nfamily = ghz_encoded\np = 0:1:0.5  # coarse\nseed=4\nout-dir = outs\n")
    values = read_config_file(path)
    assert values == {"family": "ghz_encoded", "p": "0:1:0.5", "seed": 4, "out_dir": "outs"}
    cfg = build_config("sweep", values, {"seed": 9, "family": None})
    assert cfg.family == "ghz_encoded" and cfg.seed == 9
    monkeypatch.setenv("DEPHASE_LAB_SEED", "77")
    assert build_config("sweep", {}, {}).seed == 77
    assert build_config("sweep", {"seed": 5}, {}).seed == 5
    assert build_config("fringes", {}, {}).outputs() == ("fringes",)


def test_config_file_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("family ghz\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    path.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    path.write_text("shots = many\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")


def test_round_trip_through_dict():
    cfg = RunConfig(family="cluster_encoded", p="0,0.5", k="1:3", seed=12)
    from dataclasses import asdict
    assert config_from_dict(asdict(cfg)) == cfg


def test_families():
    fam = make_family("cluster_encoded", 4)
    assert fam.mask == EncodingMask.from_bits("1001") and fam.encoded
    assert fam.bare().name == "cluster"
    assert make_family("ghz_encoded", 3).mask == EncodingMask.all_hadamard(3)
    assert make_family("ghz", 4, mask=EncodingMask.from_bits("0110")).name == "ghz_encoded"
    g = make_family("graph", graph=GraphSpec.from_edges(3, [(1, 2)]))
    assert g.n == 3
    with pytest.raises(ValueError):
        make_family("graph")
    with pytest.raises(ValueError):
        make_family("ghz", 4, mask=EncodingMask.from_bits("11"))
    with pytest.raises(ValueError):
        make_family("star")
