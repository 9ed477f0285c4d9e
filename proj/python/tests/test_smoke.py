import json

import numpy as np
import pytest

import gnpart


def test_two_node_basis():
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    lam, u = gnpart.gft_basis(w)
    np.testing.assert_allclose(lam, [0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), 1 / np.sqrt(2)))


def test_graph_and_signals():
    w, coords = gnpart.random_sensor_graph(40, seed=1)
    assert w.shape == (40, 40) and coords.shape == (40, 2)
    np.testing.assert_allclose(w, w.T)
    a, x = gnpart.gen_hd(w, 10.0, seed=2)
    assert a.shape == (40, 40) and x.shape == (40,)
    clusters = gnpart.spectral_clustering(w, 3, seed=0)
    a2, x2 = gnpart.gen_pws(w, clusters, seed=3, n_smooth=8)
    assert a2.shape == (40, 11)
    coef, *_ = np.linalg.lstsq(a2, x2, rcond=None)
    assert np.linalg.norm(a2 @ coef - x2) <= 1e-9 * max(1.0, np.linalg.norm(x2))


def test_perfect_recovery():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((12, 4))
    x = a @ rng.standard_normal(4)
    xr = gnpart.minimax_reconstruct(a, x, [0, 3, 5, 9])
    assert np.linalg.norm(xr - x) <= 1e-8 * np.linalg.norm(x)
    assert gnpart.mse_db(x, x) == -320.0


def test_pdca_and_partitions():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((10, 4))
    r = gnpart.pdca_bipartition(a, seed=3)
    assert len(r["first"]) == 5 and len(r["second"]) == 5
    assert sorted(r["first"] + r["second"]) == list(range(10))
    totals = [row[3] for row in r["trace"]]
    assert all(b <= a_ + 1e-9 for a_, b in zip(totals, totals[1:]))
    parts = gnpart.hierarchical_partition(rng.standard_normal((32, 6)), 2)
    assert [len(p) for p in parts] == [8, 8, 8, 8]
    w, _ = gnpart.random_sensor_graph(24, seed=4)
    assert sum(len(p) for p in gnpart.srel_partition(w, 4)) == 24
    assert gnpart.sfrob_partition(np.eye(6), 3) == [[0, 3], [1, 4], [2, 5]]


def test_prox_operators():
    np.testing.assert_allclose(gnpart.prox_g(np.array([10.0, -10.0]), 1.0), [1.0, 0.0])
    np.testing.assert_allclose(gnpart.prox_l1_budget(np.array([[3.0, 1.0]]), 2.0), [[2.0, 0.0]])


def test_learn_keeps_dictionary_without_confidence():
    a0 = np.random.default_rng(2).standard_normal((6, 2))
    a, d, trace = gnpart.learn(np.ones((6, 3)), np.zeros((6, 3)), a0)
    np.testing.assert_array_equal(a, a0)
    assert not d.any() and trace == []


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        gnpart.prox_g(np.zeros(3), 0.0)
    with pytest.raises(gnpart.DegenerateSubspace):
        gnpart.minimax_reconstruct(np.array([[0.0], [1.0]]), np.ones(2), [0])
    with pytest.raises(gnpart.ConfigError):
        gnpart.run_static_experiment('{"schema_version": 9, "kind": "static"}')


def test_small_experiments():
    cfg = json.loads(gnpart.default_config("static"))
    cfg.update(runs=1, bandwidths=[8, 48], sfrob_bandwidth=8)
    cfg["graph"]["n_nodes"] = 48
    cfg["signal"]["pws_smooth"] = 8
    table = gnpart.run_static_experiment(json.dumps(cfg))
    assert table[("pws", "clean")]["prop_ss"] <= -100.0
    online = json.loads(gnpart.default_config("online-synthetic"))
    online.update(runs=1, n_subsets=4)
    online["graph"]["n_nodes"] = 32
    online["signal"]["length"] = 6
    online["signal"]["pws_smooth"] = 8
    summary = gnpart.run_online_experiment(json.dumps(online))
    assert set(summary) == {"proposed", "method1", "method2"}
