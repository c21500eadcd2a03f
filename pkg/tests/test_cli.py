import json
import os
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from saddlepred.cli import (ConfigError, CsvFormatError, ExperimentConfig, emit_plot, parse,
                            read_numeric_csv, run_experiment, serialize, write_csv)
from saddlepred.cli.config import replace
from saddlepred.cli.main import main

GOLDEN = Path(__file__).parent / "golden" / "csv_headers.txt"


def _golden():
    out = {}
    for line in GOLDEN.read_text().splitlines():
        key, cols = line.split(":", 1)
        out[key.strip()] = cols.strip()
    return out


def _cfg(tmp_path, experiment, **kw):
    base = dict(experiment=experiment, output_dir=str(tmp_path / experiment), u0=(1.0,), v0=(0.0,))
    if experiment == "theorem_rate":
        base.update(method="predict", n_steps=300, seeds=(0, 1), noise_std=0.1, alpha=0.5,
                    beta=0.5, v0=(1.0,))
    if experiment == "toygan":
        base.update(n_steps=20, seeds=(0,), eval_every=10, probe_size=200, hidden=8,
                    batch_size=32, sample_dump=50, u0=None, v0=None)
    if experiment == "bilinear_orbit":
        base.update(n_steps=50)
    if experiment == "ode_tracking":
        base.update(alpha=0.01, beta=0.01, horizon=1.0)
    base.update(kw)
    return ExperimentConfig(**base).validate()


floats = st.floats(-1e6, 1e6, allow_nan=False)
configs = st.builds(
    ExperimentConfig,
    experiment=st.sampled_from(["bilinear_orbit", "spectral", "ode_tracking", "theorem_rate",
                                "toygan"]),
    method=st.sampled_from(["plain", "predict", "both"]),
    seeds=st.lists(st.integers(0, 2 ** 32), min_size=1, max_size=4).map(tuple),
    n_steps=st.integers(1, 10 ** 6),
    K=st.integers(1, 3).flatmap(lambda c: st.lists(
        st.lists(floats, min_size=c, max_size=c).map(tuple), min_size=1, max_size=3).map(tuple)),
    mu=floats,
    noise_std=st.floats(0, 10),
    alpha=st.floats(1e-6, 10),
    beta=st.floats(1e-6, 10),
    u0=st.one_of(st.none(), st.lists(floats, min_size=1, max_size=3).map(tuple)),
    learning_rate=st.floats(1e-8, 1.0),
    objective=st.sampled_from(["saturating", "non_saturating"]),
    output_dir=st.text("abc_/-.0123", min_size=1, max_size=20).map(lambda s: "d" + s),
)


@settings(max_examples=200)
@given(configs)
def test_config_round_trip(cfg):
    assert parse(serialize(cfg)) == cfg
    assert parse(serialize(cfg)).config_hash() == cfg.config_hash()


def test_config_parse_syntax():
    cfg = parse("# comment\nexperiment = spectral   # inline\nK = 1, 2; 3, 4\nseeds = 3, 5\n")
    assert cfg.K == ((1.0, 2.0), (3.0, 4.0)) and cfg.seeds == (3, 5)


@pytest.mark.parametrize("text, line, key", [
    ("experiment = spectral\nfoo = 1\n", 2, "foo"),
    ("experiment = spectral\nalpha = 0.1\nalpha = 0.2\n", 3, "alpha"),
    ("n_steps = ten\n", 1, "n_steps"),
    ("just words\n", 1, None),
])
def test_config_errors_carry_location(text, line, key):
    with pytest.raises(ConfigError) as err:
        parse(text)
    assert err.value.line == line and err.value.key == key
    assert f"line {line}" in str(err.value)


@pytest.mark.parametrize("text", [
    "experiment = spectral\nseeds = \n",
    "experiment = nope\n",
    "experiment = spectral\nK = 1, 2; 3\n",
    "experiment = spectral\nalpha = -1\n",
    "experiment = spectral\nmethod = sideways\n",
])
def test_config_rejects_invalid(text):
    with pytest.raises(ConfigError):
        parse(text)


def test_csv_format(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, ["a", "b", "c"], [(1, 0.1, True), (2, 1e-300, False)])
    raw = p.read_bytes()
    assert raw == b"a,b,c\n1,0.1,1\n2,1e-300,0\n"
    header, cols = read_numeric_csv(p)
    assert header == ["a", "b", "c"] and cols[1] == [0.1, 1e-300]
    with pytest.raises(ValueError):
        write_csv(p, ["a"], [(1, 2)])


@pytest.mark.parametrize("body, row", [
    ("a,b\n1,2\n3\n", 3), ("a,b\n1,x\n", 2), ("a,\n1,2\n", 1), ("", 1)])
def test_malformed_csv_names_row(tmp_path, body, row):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(CsvFormatError, match=f"row {row}" if body else "empty"):
        read_numeric_csv(p)


@pytest.mark.parametrize("experiment", ["bilinear_orbit", "spectral", "ode_tracking",
                                        "theorem_rate", "toygan"])
def test_run_experiment_schema_and_determinism(tmp_path, experiment):
    golden = _golden()
    a = run_experiment(_cfg(tmp_path / "a", experiment))
    b = run_experiment(_cfg(tmp_path / "b", experiment))
    for path in a.files():
        assert os.path.exists(path)
        name = os.path.basename(path)
        if "aggregate" in name:
            kind = f"{experiment}_aggregate"
        elif name.endswith("_samples.csv"):
            kind = "toygan_samples"
        else:
            kind = f"{experiment}_seed"
        raw = Path(path).read_bytes()
        assert raw.split(b"\n", 1)[0].decode() == golden[kind]
        assert b"\r" not in raw and raw.endswith(b"\n")
        raw.decode("utf-8")
        other = Path(path.replace(str(tmp_path / "a"), str(tmp_path / "b")))
        assert other.read_bytes() == raw
    manifest = json.loads((Path(a.runs[0]["files"][0]).parent / "manifest.json").read_text())
    assert manifest["config_hash"] == a.config_hash and manifest["library_version"]
    assert all("wall_clock_s" in r and "collapsed" in r for r in manifest["runs"])


def test_orbit_preset_behaviour(tmp_path):
    from saddlepred.cli.csvio import read_numeric_csv as rd
    m = run_experiment(_cfg(tmp_path, "bilinear_orbit", n_steps=2000, alpha=0.1, beta=0.1))
    aggs = sorted(m.aggregates)
    assert len(aggs) == 2
    h, plain = rd(aggs[0])
    _, pred = rd(aggs[1])
    norm = h.index("mean_norm")
    assert 0.5 <= min(plain[norm]) and max(plain[norm]) <= 1.5
    assert pred[norm][-1] <= 1e-3


def test_emit_plot(tmp_path):
    csv = tmp_path / "g.csv"
    write_csv(csv, ["l", "gap"], [(1, 1.0), (10, 0.3), (100, 0.1)])
    out = emit_plot(csv, "line", tmp_path / "g.svg", logx=True, logy=True)
    root = ET.parse(out).getroot()
    assert root.get("viewBox") == "0 0 800 600"
    assert any(el.tag.endswith("polyline") for el in root.iter())
    single = tmp_path / "one.csv"
    write_csv(single, ["x", "y"], [(0.5, 2.0)])
    root = ET.parse(emit_plot(single, "line", tmp_path / "one.svg")).getroot()
    assert sum(el.tag.endswith("circle") for el in root.iter()) == 1
    first = (tmp_path / "g.svg").read_bytes()
    emit_plot(csv, "line", tmp_path / "g.svg", logx=True, logy=True)
    assert (tmp_path / "g.svg").read_bytes() == first


def test_emit_scatter_uses_last_step(tmp_path):
    csv = tmp_path / "s.csv"
    write_csv(csv, ["step", "x", "y"], [(0, 0.0, 0.0), (5, 1.0, 0.0), (5, 0.0, 1.0)])
    root = ET.parse(emit_plot(csv, "scatter", tmp_path / "s.svg")).getroot()
    assert sum(el.tag.endswith("circle") for el in root.iter()) == 2
    with pytest.raises(ValueError):
        emit_plot(csv, "bar", tmp_path / "s.svg")


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text(serialize(_cfg(tmp_path, "spectral")))
    assert main(["run", str(good), "--out-dir", str(tmp_path / "o"), "--seed-override", "4,5"]) == 0
    assert (tmp_path / "o" / "spectral_predict_seed5.csv").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment = spectral\nwhat = 1\n")
    assert main(["run", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    div = tmp_path / "div.cfg"
    div.write_text(serialize(_cfg(tmp_path, "bilinear_orbit", K=((10.0,),), alpha=5.0, beta=5.0,
                                  n_steps=2000, method="plain")))
    assert main(["run", str(div), "--out-dir", str(tmp_path / "d")]) == 4
    csv = tmp_path / "p.csv"
    write_csv(csv, ["a", "b"], [(1, 2)])
    assert main(["plot", str(csv), "--kind", "line", "--out", str(tmp_path / "p.svg")]) == 0
    (tmp_path / "broken.csv").write_text("a,b\n1,z\n")
    assert main(["plot", str(tmp_path / "broken.csv"), "--out", str(tmp_path / "x.svg")]) == 2
    assert main(["accept", "--only", "spectral", "orbit"]) == 0
    out = capsys.readouterr().out
    assert "[spectral]" in out and "[orbit]" in out and "[ode]" not in out
    assert main(["accept", "--only", "nonsense"]) == 2
    with pytest.raises(SystemExit) as ex:
        main(["run"])
    assert ex.value.code == 2


def test_replace_validates():
    with pytest.raises(ConfigError):
        replace(ExperimentConfig(), seeds=())
