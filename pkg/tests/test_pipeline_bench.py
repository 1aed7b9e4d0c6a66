import csv
import io
import json

import numpy as np
import pytest

from pwclique.bench import (
    COLUMNS,
    TIMEOUT_MARK,
    BenchConfigError,
    parse_bench_config,
    run_benchmark,
)
from pwclique.correspondence import CorrespondenceSet
from pwclique.graph import write_dimacs
from pwclique.pipeline import INSUFFICIENT, register, register_ransac
from pwclique.ransac import RansacConfig
from pwclique.synth import SynthConfig, generate_instance

from conftest import random_graph


@pytest.fixture(scope="module")
def inst():
    return generate_instance(SynthConfig(20, 300, rng_seed=5, sigma_over_epsilon=0.125, scan_points=8000))


@pytest.mark.parametrize("alg", ["basic", "mcq", "pmc"])
def test_register_recovers_transform(inst, alg):
    C, T = inst
    rep = register(C, alg, T_gt=T)
    assert rep.size >= 20 and rep.complete
    assert rep.ang_err < 1.0 and rep.tr_err < 0.5
    assert rep.edges + rep.inconsistency_edges == len(C) * (len(C) - 1) // 2
    assert rep.outlier_ratio == pytest.approx(300 / 320, abs=0.005)


def test_register_insufficient():
    C = CorrespondenceSet([[0, 0, 0], [50, 0, 0], [0, 50, 0]], [[0, 0, 0], [0, 0, 0], [9, 9, 9]], epsilon=1.0)
    rep = register(C)
    assert rep.size < 3 and INSUFFICIENT in rep.flags and rep.transform is None


def test_register_ransac(inst):
    C, T = inst
    rep = register_ransac(C, RansacConfig(rng_seed=0), T)
    assert rep.size >= 19 and rep.ang_err < 2.0 and rep.iterations > 0


CFG = """
[bench]
algorithms = mcq, pmc, ransac
timeout_secs = 30
ransac_runs = 3

[instance a]
n_inliers = 10
n_outliers = 90
sigma_over_epsilon = 0.125
scan_points = 4000
seed = 1

[instance b]
n_inliers = 12
n_outliers = 138
sigma_over_epsilon = 0.125
scan_points = 4000
seed = 2

[instance c]
n_inliers = 15
n_outliers = 185
sigma_over_epsilon = 0.125
scan_points = 4000
seed = 3
"""


def test_bench_rows_and_agreement():
    report = run_benchmark(parse_bench_config(CFG))
    assert len(report.rows) == 9
    for name in "abc":
        rows = [r for r in report.rows if r["instance"] == name]
        sizes = {r["clique_size"] for r in rows if r["algorithm"] != "ransac"}
        assert len(sizes) == 1
        (rr,) = [r for r in rows if r["algorithm"] == "ransac"]
        assert rr["runs"] == 3 and len(rr["run_times"]) == 3
        assert rr["wall_time"] == sorted(rr["run_times"])[1]
    table = list(csv.reader(io.StringIO(report.to_csv())))
    assert tuple(table[0]) == COLUMNS and len(table) == 10
    assert json.loads(report.to_json())["schema_version"] == 1


def test_bench_timeout_marker(tmp_path):
    g = random_graph(400, 0.9, 0)
    (tmp_path / "hard.clq").write_text(write_dimacs(g))
    cfg = parse_bench_config("[bench]\nalgorithms = mcq\ntimeout_secs = 0.05\n[instance hard]\ngraph = hard.clq\n", tmp_path)
    report = run_benchmark(cfg)
    assert report.rows[0]["status"] == "timeout"
    assert report.to_csv().splitlines()[1].split(",")[COLUMNS.index("wall_time")] == TIMEOUT_MARK


def test_bench_deterministic_without_times():
    cfg = parse_bench_config(CFG.replace("ransac_runs = 3", "ransac_runs = 1"))
    a = run_benchmark(cfg).to_json(include_times=False)
    b = run_benchmark(cfg).to_json(include_times=False)
    assert a == b


def test_bench_cell_failures_are_recorded(tmp_path):
    cfg = parse_bench_config("[bench]\nalgorithms = pmc\n[instance gone]\ncorrespondences = nope.corr\nepsilon = 1\n", tmp_path)
    (row,) = run_benchmark(cfg).rows
    assert row["status"] == "error" and "nope.corr" in row["error"]


@pytest.mark.parametrize(
    "text",
    [
        "[instance x]\nn_inliers = 1\n",
        "[bench]\nalgorithms = magic\n[instance x]\nn_inliers=1\n",
        "[bench]\n",
        "[bench]\n[other]\nk = v\n",
        "[bench]\nransac_runs = 0\n[instance x]\nn_inliers=1\n",
        "not ini at all",
    ],
)
def test_bad_configs(text):
    with pytest.raises(BenchConfigError):
        parse_bench_config(text)


def test_file_instance_with_auto_epsilon(tmp_path):
    from pwclique.synth import write_instance

    inst2 = generate_instance(SynthConfig(15, 100, rng_seed=8, sigma_over_epsilon=0.125, scan_points=4000))
    write_instance(inst2, tmp_path, "s")
    cfg = parse_bench_config(
        "[bench]\nalgorithms = pmc\n[instance s]\ncorrespondences = s.corr\nepsilon = auto\n"
        "cloud_x = s_x.xyz\ncloud_y = s_y.xyz\nground_truth = s.gt\n",
        tmp_path,
    )
    (row,) = run_benchmark(cfg).rows
    assert row["status"] == "ok" and row["clique_size"] >= 15 and row["ang_err_deg"] < 1.0
    assert np.isclose(row["outlier_ratio"], 100 / 115, atol=0.01)
