import json
import math
import random

import pytest

import metrifract as mf


def grid_points(n):
    return [[i / (n - 1)] for i in range(n)]


def test_circle_dist():
    assert mf.circle_dist(0.1, 0.9) == pytest.approx(0.2, abs=1e-15)
    assert mf.circle_dist(0.25, 0.25) == 0.0


def test_gauge_eval():
    assert mf.gauge_eval("pow:2", 0.5) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(Exception):
        mf.gauge_eval("pow:0", 0.5)


def test_moran_dimension():
    assert mf.moran_dimension([1 / 3, 1 / 3]) == pytest.approx(
        math.log(2) / math.log(3), abs=1e-12
    )
    assert mf.moran_dimension([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)


def test_covering_profile_interval():
    prof = mf.covering_profile(grid_points(128), 0, 4)
    assert len(prof["rows"]) == 5
    assert prof["claim_all_ok"]
    assert all(row["claim_ok"] for row in prof["rows"])


def test_embedding_distortion_certificates():
    # generic scatter: grids produce exact collinear ties that the
    # strict coordinatewise certificate flags at the ulp level
    gen = random.Random(1)
    pts = [[gen.uniform(0, 0.7), gen.uniform(0, 0.7)] for _ in range(40)]
    rep = mf.embedding_distortion(pts, 0, 3, threads=2)
    assert rep["lipschitz_ok"] and rep["band_ok"]
    assert rep["pairs"] == 40 * 39 // 2
    assert rep["max_ratio"] <= 1 / 3 + 1e-12


def test_interval_system_report():
    rep = mf.interval_system_report(
        epsilon="1/10", G="list:1", n_max=3, depth=10, verify_pairs=50, seed=3
    )
    assert rep["epsilon"] == "1/10"
    assert rep["coords"] == 4  # list entries repeat across levels 0..n_max
    assert rep["bounds_ok"]
    assert rep["product_lower"] > 0.9
    assert rep["violations"] == 0


def test_hat_transform_quadratic_gauge():
    res = mf.hat_transform("pow:2", beta=1.0, decades=20)
    assert res["bounded"]
    assert all(res["checks"].values())
    # the envelope of r^2 under exponent 1 is 2r on the grid
    for r, h in zip(res["r"], res["h"]):
        assert h == pytest.approx(2 * r, rel=1e-9)


def test_ord_estimate():
    est = mf.ord_estimate("pow:0.5", decades=20)
    assert est["tail_min"] == pytest.approx(0.5, abs=1e-9)


def test_mcshane_extend_sqrt_grid():
    pts = grid_points(11)
    anchors = [(0, [0.0]), (10, [1.0])]
    vals = mf.mcshane_extend(pts, anchors, gauge="pow:0.5")
    assert vals[0] == [0.0]
    assert vals[10] == [1.0]
    for i in range(11):
        assert 0.0 <= vals[i][0] <= math.sqrt(i / 10) + 1e-12


def test_modulus_fit_identity():
    pairs = [(2.0 ** -j, 2.0 ** -j) for j in range(1, 30)]
    fit = mf.modulus_fit(pairs)
    assert fit["beta_hat"] == 1.0
    assert fit["log_constant"] == 0.0
    assert fit["max_residual"] == 0.0


def test_hilbert_curve_endpoints_and_cells():
    assert mf.hilbert_curve(2, 4, 0.0) == [0.0, 0.0]
    cells = {tuple(mf.hilbert_cell(2, 3, i)) for i in range(64)}
    assert len(cells) == 64


def test_interleave_map_hand_example():
    # 0.1011 dealt to two outputs: 0.11 and 0.01
    assert mf.interleave_map([0.6875], 2, 4) == [0.75, 0.25]


def test_box_dimension_interval():
    series = mf.box_dimension(grid_points(512), [2.0 ** -k for k in range(2, 7)])
    assert series["slope"] == pytest.approx(1.0, abs=0.1)


def test_map_onto_cube_interval(tmp_path):
    pts = grid_points(64)
    res = mf.map_onto_cube(pts, m=1, depth=10, grid_depth=10, seed=2)
    assert res["captured_fraction"] >= 0.5
    assert res["substitute_construction"]
    assert not res["degenerate"]
    assert len(res["values"]) == 64
    assert all(math.isfinite(v[0]) and v[0] >= 0.0 for v in res["values"])


def test_ifs_attractor_roundtrip(tmp_path):
    spec = {
        "dim": 1,
        "maps": [
            {"ratio": 1 / 3, "perm": [1], "translate": [0.0]},
            {"ratio": 1 / 3, "perm": [1], "translate": [2 / 3]},
        ],
        "open_set": {"lo": [0.0], "hi": [1.0]},
    }
    path = tmp_path / "thirds.json"
    path.write_text(json.dumps(spec))
    labels, pts = mf.ifs_attractor(str(path), depth=3)
    assert len(labels) == 8 and len(pts) == 8
    assert labels[0] == "000"
    assert pts[0] == [pytest.approx(0.0, abs=1e-12)]


def test_validation_errors_surface():
    with pytest.raises(Exception):
        mf.mcshane_extend(grid_points(4), [(0, [0.0]), (0, [1.0])], gauge="pow:0.5")
    with pytest.raises(Exception):
        mf.map_onto_cube([[0.0], [2.0]], m=1)
