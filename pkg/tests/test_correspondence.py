import math

import numpy as np
import pytest

from pwclique.correspondence import (
    Correspondence,
    CorrespondenceError,
    CorrespondenceSet,
    EpsilonNotSetError,
    build_consistency_graph,
    build_inconsistency_graph,
    consistency_matrix,
    default_epsilon,
    fit_cube,
    format_correspondences,
    nn_distances,
    normalise,
    outlier_ratio,
    pair_distance,
    pair_distance_matrix,
    parse_correspondences,
    read_point_cloud,
    write_point_cloud,
)
from pwclique.graph import complement
from pwclique.registration import RigidTransform, axis_angle, random_rotation
from pwclique.synth import SynthConfig, generate_instance


def corr(x, y):
    return Correspondence(tuple(map(float, x)), tuple(map(float, y)))


def test_displacement_examples():
    d = lambda a, b: pair_distance(a, b, "displacement")  # noqa: E731
    assert d(corr((0, 0, 0), (1, 0, 0)), corr((1, 0, 0), (2, 0, 0))) == 0.0
    c = corr((1, 2, 3), (4, 5, 6))
    assert d(c, c) == 0.0
    assert d(corr((0, 0, 0), (0, 0, 0)), corr((1, 0, 0), (0, 2, 0))) == pytest.approx(math.sqrt(5), abs=1e-15)


def test_length_examples():
    assert pair_distance(corr((0, 0, 0), (1, 0, 0)), corr((1, 0, 0), (2, 0, 0))) == 0.0
    # lengths 1 and 2
    assert pair_distance(corr((0, 0, 0), (0, 0, 0)), corr((1, 0, 0), (0, 2, 0))) == pytest.approx(1.0)


def test_length_metric_is_rigid_invariant(rng):
    x = rng.uniform(-50, 50, (30, 3))
    T = RigidTransform(random_rotation(rng), rng.uniform(-20, 20, 3))
    C = CorrespondenceSet(x, T.apply(x))
    assert np.abs(pair_distance_matrix(C, "length")).max() < 1e-12
    # the displacement form only cancels translations
    assert pair_distance_matrix(C, "displacement").max() > 1.0
    Ct = CorrespondenceSet(x, x + 7.0)
    assert np.abs(pair_distance_matrix(Ct, "displacement")).max() < 1e-12


@pytest.mark.parametrize("metric", ["length", "displacement"])
def test_matrix_matches_scalar(rng, metric):
    C = CorrespondenceSet(rng.uniform(-5, 5, (140, 3)), rng.uniform(-5, 5, (140, 3)))
    D = pair_distance_matrix(C, metric)
    assert np.array_equal(D, D.T) and (D >= 0).all() and not D.diagonal().any()
    for i, j in [(0, 1), (5, 139), (130, 2), (77, 77)]:
        assert D[i, j] == pair_distance(C[i], C[j], metric)


def test_unknown_metric():
    C = CorrespondenceSet(np.zeros((2, 3)), np.zeros((2, 3)), epsilon=1.0)
    with pytest.raises(CorrespondenceError):
        build_consistency_graph(C, "manhattan")


def test_consistency_graph_small():
    C = CorrespondenceSet([[0, 0, 0], [1, 0, 0]], [[1, 0, 0], [2, 0, 0]], epsilon=0.1)
    g = build_consistency_graph(C)
    assert g.num_edges == 1
    assert build_inconsistency_graph(C).num_edges == 0


def test_boundary_is_inclusive():
    # pair distance exactly 1.0 under both metrics
    C = CorrespondenceSet([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [2, 0, 0]], epsilon=1.0)
    for metric in ("length", "displacement"):
        assert build_consistency_graph(C, metric).num_edges == 1
        assert build_inconsistency_graph(C, metric).num_edges == 0


def test_epsilon_required():
    C = CorrespondenceSet(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(EpsilonNotSetError):
        build_consistency_graph(C)
    with pytest.raises(CorrespondenceError):
        CorrespondenceSet(np.zeros((2, 3)), np.zeros((2, 3)), epsilon=0.0)


def test_complements_and_counts(rng):
    n = 300
    C = CorrespondenceSet(rng.uniform(-50, 50, (n, 3)), rng.uniform(-50, 50, (n, 3)), epsilon=8.0)
    g = build_consistency_graph(C)
    h = build_inconsistency_graph(C)
    assert h == complement(g)
    assert g.num_edges + h.num_edges == n * (n - 1) // 2


def test_monotone_in_epsilon(rng):
    C = CorrespondenceSet(rng.uniform(-50, 50, (120, 3)), rng.uniform(-50, 50, (120, 3)))
    prev = None
    for eps in (2.0, 5.0, 9.0):
        m = consistency_matrix(C.with_epsilon(eps))
        if prev is not None:
            assert (m | prev == m).all()
        prev = m


def test_synthetic_inliers_form_clique():
    inst = generate_instance(SynthConfig(25, 200, rng_seed=3, sigma_over_epsilon=0.125, scan_points=5000))
    C = inst.correspondences
    g = build_consistency_graph(C)
    assert g.is_clique(np.flatnonzero(C.gt_inlier).tolist())


def test_default_epsilon_line():
    line = np.c_[np.arange(5.0), np.zeros(5), np.zeros(5)]
    assert default_epsilon(line, line) == pytest.approx(2.0)


def test_default_epsilon_two_clouds():
    a = np.c_[np.arange(6.0), np.zeros(6), np.zeros(6)]
    b = 3.0 * a
    assert default_epsilon(a, b) == pytest.approx(2 * (1.0 + 3.0) / 2)


def test_nn_matches_brute_force(rng):
    p = rng.uniform(-50, 50, (400, 3))
    d = np.linalg.norm(p[:, None] - p[None], axis=2)
    np.fill_diagonal(d, np.inf)
    assert np.allclose(nn_distances(p), d.min(axis=1), rtol=0, atol=1e-12)
    with pytest.raises(CorrespondenceError):
        nn_distances(p[:1])


def test_outlier_ratio_cases(rng):
    x = rng.uniform(-50, 50, (50, 3))
    T = RigidTransform(axis_angle([0, 0, 1], 0.3), [1, 2, 3])
    assert outlier_ratio(CorrespondenceSet(x, T.apply(x), epsilon=1.0), T) == 0.0
    y = rng.uniform(-50, 50, (50, 3))
    assert outlier_ratio(CorrespondenceSet(x, y, epsilon=1e-3), T) == 1.0


def test_best_by_score_stable():
    C = CorrespondenceSet(np.arange(12.0).reshape(4, 3), np.zeros((4, 3)), score=[0.5, 0.1, 0.5, 0.2])
    B = C.best_by_score(3)
    assert B.score.tolist() == [0.1, 0.2, 0.5]
    assert B.x[2].tolist() == [0.0, 1.0, 2.0]


def test_text_round_trip(tmp_path):
    text = "# header\n0 0 0 1 1 1 0.5\n1e-3 2 3 4 5 6 0.25  # trailing\n\n"
    C = parse_correspondences(text)
    assert len(C) == 2 and C.score.tolist() == [0.5, 0.25]
    again = parse_correspondences(format_correspondences(C, header="a\nb"))
    assert np.array_equal(again.x, C.x) and np.array_equal(again.y, C.y) and np.array_equal(again.score, C.score)
    assert len(parse_correspondences("1 2 3 4 5 6\n")) == 1
    with pytest.raises(CorrespondenceError):
        parse_correspondences("1 2 3\n")
    with pytest.raises(CorrespondenceError):
        parse_correspondences("1 2 3 4 5 6\n1 2 3 4 5 6 7\n")
    with pytest.raises(CorrespondenceError, match=":1:"):
        parse_correspondences("1 2 3 4 5 x\n")
    p = tmp_path / "c.xyz"
    pts = np.random.default_rng(0).normal(size=(7, 3))
    write_point_cloud(p, pts)
    assert np.array_equal(read_point_cloud(p), pts)


def test_non_finite_rejected():
    with pytest.raises(CorrespondenceError):
        CorrespondenceSet([[0, 0, np.nan]], [[0, 0, 0]])


def test_fit_cube_and_transform(rng):
    X = rng.uniform(100, 300, (200, 3))
    T = RigidTransform(random_rotation(rng), rng.uniform(-40, 40, 3))
    Y = T.apply(X)
    norm = fit_cube(X, Y)
    both = np.vstack([norm.apply(X), norm.apply(Y)])
    assert np.abs(both).max() == pytest.approx(50.0)
    Tn = norm.transform(T)
    assert np.allclose(Tn.apply(norm.apply(X)), norm.apply(Y), atol=1e-9)
    C = normalise(CorrespondenceSet(X, Y, epsilon=2.0), norm)
    assert C.epsilon == pytest.approx(2.0 * norm.scale)
