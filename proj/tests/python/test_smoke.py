"""Smoke tests for the python bindings: import, core ops, a tiny train/eval."""

import numpy as np

import softsense as ss


def test_graph_ops():
    z = ss.init_embeddings(6, 4, seed=3)
    assert z.shape == (6, 4)
    assert np.array_equal(z, ss.init_embeddings(6, 4, seed=3))

    sim = ss.cosine_similarity(z)
    assert sim.shape == (6, 6)
    assert np.allclose(sim, sim.T)
    assert np.all(np.abs(sim) <= 1 + 1e-12)

    adj = ss.topk_adjacency(sim, 2)
    assert adj.sum(axis=1).tolist() == [2] * 6
    assert np.all(np.diag(adj) == 0)


def test_metrics():
    y = np.array([1.0, 2.0, 3.0])
    y_hat = np.array([1.0, 2.0, 5.0])
    assert abs(ss.nrmse(y, y_hat) - 0.5773502691896258) < 1e-12
    assert abs(ss.r2(y, y_hat) - (-1.0)) < 1e-12
    assert abs(ss.nmae(y, y_hat) - 1.0 / 3.0) < 1e-12
    value, excluded = ss.mape(y, y_hat)
    assert abs(value - 100.0 * (2.0 / 3.0) / 3.0) < 1e-12
    assert excluded == 0


def test_train_evaluate_roundtrip(tmp_path=None):
    values, tags, truth = ss.gen_synth(sensors=5, length=220, drivers=[1, 2], lag=2,
                                       noise=0.005, seed=11)
    assert values.shape == (220, 6)
    assert tags[-1] == "Y"
    assert '"drivers"' in truth

    ckpt, history = ss.train(values, tags, "Y", embedding_dim=8, window=8, hidden_width=16,
                             batch_size=32, k=3, dropout=0.0, learning_rate=0.003,
                             max_epochs=40, patience=40, seed=4)
    assert ckpt.target_tag == "Y"
    assert len(history) >= 1
    assert history[0]["train_mse"] > history[-1]["train_mse"]

    report, preds = ss.evaluate(ckpt, values, tags, "test")
    assert set(report) >= {"nrmse", "r2", "nmae", "mape", "n_samples"}
    assert preds.shape[1] == 3

    A = ss.attention_matrix(ckpt, values, tags, "test")
    assert A.shape == (5, 5)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-6)

    corr = ss.embedding_correlation(ckpt.embeddings)
    assert np.allclose(np.diag(corr), 1.0)


def test_checkpoint_io():
    import tempfile, os
    values, tags, _ = ss.gen_synth(sensors=4, length=150, drivers=[1], lag=2, seed=5)
    ckpt, _ = ss.train(values, tags, "Y", embedding_dim=4, window=6, hidden_width=8,
                       batch_size=16, k=2, max_epochs=2, patience=2, seed=6)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "ck.json")
        ckpt.save(path)
        back = ss.Checkpoint.load(path)
        assert back.target_tag == ckpt.target_tag
        assert np.array_equal(back.embeddings, ckpt.embeddings)
        r1, p1 = ss.evaluate(ckpt, values, tags, "test")
        r2_, p2 = ss.evaluate(back, values, tags, "test")
        assert r1 == r2_
        assert np.array_equal(p1, p2)


if __name__ == "__main__":
    test_graph_ops()
    test_metrics()
    test_train_evaluate_roundtrip()
    test_checkpoint_io()
    print("python smoke tests passed")
