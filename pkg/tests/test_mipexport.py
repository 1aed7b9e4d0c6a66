import itertools
import math
import re

import pytest

from pwclique.graph import build_graph, complement
from pwclique.mipexport import export_mc, export_mvc
from pwclique.solvers import brute_force_mc

from conftest import random_graph

ROW = re.compile(r"^\s*(\w+):\s*(.+?)\s*(<=|>=|=)\s*(-?\d+)\s*$")


def read_lp(text):
    """Minimal LP reader for what the exporter writes: sense, objective, rows, binaries."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("\\")]
    assert lines[-1] == "End"
    sense = lines[0]
    st = lines.index("Subject To")
    bi = lines.index("Binary")
    obj_text = " ".join(lines[1:st]).split(":", 1)[1]
    objective = re.findall(r"x\d+", obj_text)
    rows = []
    for ln in lines[st + 1 : bi]:
        m = ROW.match(ln)
        assert m, ln
        rows.append((re.findall(r"x\d+", m.group(2)), m.group(3), int(m.group(4))))
    binaries = [ln.strip() for ln in lines[bi + 1 : -1]]
    return sense, objective, rows, binaries


def solve_lp_brute(text):
    """Exhaustive 0-1 solve of a parsed LP; fine for n <= 15."""
    sense, objective, rows, binaries = read_lp(text)
    idx = {v: i for i, v in enumerate(binaries)}
    best = None
    for bits in itertools.product((0, 1), repeat=len(binaries)):
        ok = True
        for vars_, op, rhs in rows:
            s = sum(bits[idx[v]] for v in vars_)
            if (op == "<=" and s > rhs) or (op == ">=" and s < rhs):
                ok = False
                break
        if ok:
            val = sum(bits[idx[v]] for v in objective)
            if best is None or (val > best if sense == "Maximize" else val < best):
                best = val
    return best


def brute_force_mvc(g):
    """Smallest vertex set touching every edge, by increasing subset size."""
    edges = list(g.edges())
    for k in range(g.n + 1):
        for cover in itertools.combinations(range(g.n), k):
            s = set(cover)
            if all(u in s or v in s for u, v in edges):
                return k
    return g.n


def test_sample_counts(sample):
    _, obj, rows, bins = read_lp(export_mc(sample))
    assert len(bins) == 6 and len(obj) == 6 and len(rows) == 5
    assert all(op == "<=" and rhs == 1 for _, op, rhs in rows)
    assert len(read_lp(export_mvc(sample))[2]) == 10


def test_sample_rows_are_the_non_edges(sample):
    _, _, rows, _ = read_lp(export_mc(sample))
    pairs = [tuple(int(v[1:]) for v in r[0]) for r in rows]
    assert pairs == [(1, 3), (1, 4), (2, 6), (3, 6), (4, 6)]


def test_trivial_optima():
    k4 = build_graph(4, list(itertools.combinations(range(4), 2)))
    assert len(read_lp(export_mc(k4))[2]) == 0
    assert solve_lp_brute(export_mc(k4)) == 4
    e3 = build_graph(3, [])
    assert len(read_lp(export_mc(e3))[2]) == 3
    assert solve_lp_brute(export_mc(e3)) == 1
    assert solve_lp_brute(export_mvc(build_graph(2, [(0, 1)]))) == 1
    assert solve_lp_brute(export_mvc(build_graph(4, []))) == 0


def test_empty_graph_export_parses():
    sense, obj, rows, bins = read_lp(export_mc(build_graph(0, [])))
    assert sense == "Maximize" and obj == [] and rows == [] and bins == []


def test_byte_stable(sample):
    assert export_mc(sample) == export_mc(build_graph(6, [(v, u) for u, v in reversed(list(sample.edges()))]))
    assert export_mvc(sample).encode() == export_mvc(sample).encode()


def test_long_objective_wraps():
    text = export_mvc(build_graph(35, []))
    assert max(len(ln) for ln in text.splitlines()) < 120
    assert len(read_lp(text)[1]) == 35


@pytest.mark.parametrize("seed", range(12))
def test_lp_optimum_matches_combinatorial(seed):
    g = random_graph(9, 0.2 + 0.05 * seed, seed)
    assert solve_lp_brute(export_mc(g)) == len(brute_force_mc(g))
    assert solve_lp_brute(export_mvc(g)) == brute_force_mvc(g)


def test_duality_and_counts():
    for seed in range(30):
        g = random_graph(3 + seed % 10, 0.5, seed)
        assert len(brute_force_mc(g)) == g.n - brute_force_mvc(complement(g))
        assert len(read_lp(export_mc(g))[2]) == math.comb(g.n, 2) - g.num_edges
        assert len(read_lp(export_mvc(g))[2]) == g.num_edges
