import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capjackson.cli import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    ExperimentConfig,
    execute,
    main,
)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_multipliers_example(tmp_path):
    rc = main(["multipliers", "--n", "3", "--k-list", "32", "--s", "3", "--m", "1", "--jmax", "64",
               "--out", str(tmp_path)])
    assert rc == EXIT_OK
    files = list(tmp_path.glob("multipliers_*.csv"))
    assert len(files) == 1
    rows = read_csv(files[0])
    assert list(rows[0]) == ["j", "xi"]
    assert len(rows) == 65
    assert abs(float(rows[0]["xi"]) - 1) <= 1e-9


def test_moments_example(tmp_path):
    rc = main(["moments", "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "moments.json").read_text())
    rows = read_csv(tmp_path / "moments.csv")
    assert list(rows[0]) == ["beta", "k", "value"] and len(rows) == 15
    for entry in summary:
        beta = entry["parameters"]["beta"]
        assert abs(entry["slope"] + beta) <= 0.15, entry["name"]
    assert rc == EXIT_OK


def test_probe_saturation_default(tmp_path):
    rc = main(["probe-saturation", "--out", str(tmp_path)])
    summaries = json.loads((tmp_path / "probe_saturation_summary.json").read_text())
    for s in summaries:
        assert set(s) >= {"name", "slope", "r_squared", "pass", "tolerance", "parameters"}
        assert abs(s["slope"] + 2) <= 0.15, s["name"]
    assert rc == EXIT_OK


def test_approx_schema(tmp_path):
    rc = main(["approx", "--k-list", "16,32,64", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    rows = read_csv(tmp_path / "errors_band_limited.csv")
    assert list(rows[0]) == ["k", "error", "modulus", "ratio"]
    r = rows[0]
    assert float(r["ratio"]) == pytest.approx(float(r["error"]) / float(r["modulus"]), rel=1e-15)


def test_probe_csv_schema_and_manifest(tmp_path):
    rc = main(["probe-equivalence", "--k-list", "16,32,64", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    rows = read_csv(tmp_path / "probe_equivalence_band_limited.csv")
    assert list(rows[0])[:3] == ["k", "value", "ratio"]
    manifest = json.loads((tmp_path / "manifest_probe-equivalence.json").read_text())
    listed = {a["file"] for a in manifest["artifacts"]}
    on_disk = {p.name for p in tmp_path.iterdir()} - {"manifest_probe-equivalence.json"}
    assert listed == on_disk
    assert all("parameters" in a for a in manifest["artifacts"])
    assert not list(tmp_path.glob(".*"))


def test_determinism(tmp_path):
    args = ["probe-direct", "--k-list", "16,32,64", "--jmax", "768"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        if name.startswith("manifest"):
            continue  # records the output directory
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_worker_pool_matches_sequential(tmp_path):
    args = ["probe-equivalence", "--k-list", "16,32,64"]
    main(args + ["--out", str(tmp_path / "seq")])
    main(args + ["--workers", "2", "--out", str(tmp_path / "par")])
    for p in (tmp_path / "seq").glob("*.csv"):
        assert p.read_bytes() == (tmp_path / "par" / p.name).read_bytes()


def test_json_format(tmp_path):
    assert main(["multipliers", "--k-list", "8", "--jmax", "8", "--format", "json", "--out", str(tmp_path)]) == 0
    assert not list(tmp_path.glob("*.csv"))
    data = json.loads(next(tmp_path.glob("multipliers_*.json")).read_text())
    assert len(data["xi"]) == 9


@pytest.mark.parametrize("args", [
    ["multipliers", "--gamma", "3.0"],
    ["multipliers", "--n", "2"],
    ["probe-direct", "--k-list", "16,32"],
    ["probe-converse", "--m", "2"],
    ["moments", "--tol", "-1"],
    [],
])
def test_config_errors(tmp_path, args):
    assert main(args + ["--out", str(tmp_path)]) == EXIT_CONFIG
    assert not list(tmp_path.iterdir())


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"bogus": 1}')
    assert main(["moments", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["moments", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_truncation_is_numeric_failure(tmp_path):
    assert main(["probe-direct", "--jmax", "64", "--out", str(tmp_path)]) == EXIT_NUMERIC
    assert not list(tmp_path.iterdir())


def test_nonconvergence_exit(tmp_path):
    rc = main(["multipliers", "--k-list", "2", "--jmax", "4", "--tol", "1e-300", "--out", str(tmp_path)])
    assert rc == EXIT_NUMERIC


def test_probe_failure_exit(tmp_path):
    cfg = ExperimentConfig(k_list=[16, 32, 64], betas=[5], out=str(tmp_path))
    with pytest.warns(RuntimeWarning):
        assert execute(cfg, "moments") == EXIT_FAIL
    assert (tmp_path / "moments.json").exists()


def test_config_file_and_overrides(tmp_path):
    cfg = ExperimentConfig(k_list=[8, 16, 32], j_max=16, out=str(tmp_path / "o"))
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert main(["multipliers", "--config", str(path), "--k-list", "4"]) == EXIT_OK
    assert [p.name for p in (tmp_path / "o").glob("*.csv")] == [
        f"multipliers_n3_k4_s3_m1_g{math.pi / 2:.6f}.csv"]


@given(
    n=st.integers(3, 7),
    gamma=st.floats(0.01, math.pi / 2),
    s=st.integers(1, 6),
    m=st.none() | st.integers(1, 20),
    k_list=st.lists(st.integers(1, 4096), min_size=1, max_size=6),
    j_max=st.integers(1, 2000),
    p=st.sampled_from(["1", "2", "inf"]),
    tol=st.floats(1e-15, 1e-3),
    fmt=st.sampled_from(["csv", "json"]),
)
def test_config_round_trip(n, gamma, s, m, k_list, j_max, p, tol, fmt):
    cfg = ExperimentConfig(n=n, gamma=gamma, s=s, m=m, k_list=k_list, j_max=j_max, p=p, tol=tol,
                           format=fmt, bump_rhos=[gamma / 2])
    again = ExperimentConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"k": 3})
