import numpy as np
import pytest
import torch

from etlnet.data import read_trees
from etlnet.model import EtlModel, build_batch

from conftest import binary_tree_record, chain_tree_record, write_dataset


def load_records(tmp_path, records, rows):
    trees, _ = write_dataset(tmp_path, records, rows)
    return read_trees(trees)


def set_linear(linear, weight, bias):
    with torch.no_grad():
        linear.weight.copy_(torch.as_tensor(weight, dtype=linear.weight.dtype))
        linear.bias.copy_(torch.as_tensor(bias, dtype=linear.bias.dtype))


def make_exact_bn(model):
    """Evaluation-mode batch norm with eps 0 is the identity at init."""
    for module in model.modules():
        if isinstance(module, torch.nn.BatchNorm1d):
            module.eps = 0.0
    model.eval()


class TestForward:
    def test_hand_computed_logits(self, tmp_path):
        records = load_records(tmp_path, [chain_tree_record(0, 0, 3, 1)],
                               [["0:1", "1:1", "2:1"]])
        leaf_features = [np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 2.0]], dtype=np.float32)]
        batch = build_batch(records, leaf_features, np.array([0]), [0])
        model = EtlModel(height=1, feature_dim=2, hidden_dim=2, n_classes=2)
        make_exact_bn(model)

        w1, b1 = [[1.0, 2.0], [0.0, 1.0]], [0.1, -0.2]
        w2, b2 = [[0.5, -1.0], [1.0, 0.5]], [0.0, 0.3]
        wc, bc = [[1.0, 0.0, -1.0, 2.0], [0.0, 1.0, 0.5, -0.5]], [0.05, -0.05]
        set_linear(model.mlps[0].net[0], w1, b1)
        set_linear(model.mlps[0].net[3], w2, b2)
        set_linear(model.classifier, wc, bc)

        # Independent mirror of the arithmetic in numpy.
        s = leaf_features[0].sum(axis=0)
        h1 = np.maximum(np.array(w1) @ s + b1, 0.0)
        r_root = np.maximum(np.array(w2) @ h1 + b2, 0.0)
        readout = np.concatenate([s, r_root])
        want = np.array(wc) @ readout + bc

        with torch.no_grad():
            got = model(batch).numpy()[0]
        assert np.allclose(got, want, atol=1e-5)
        assert np.allclose(want, [19.15, -1.2], atol=1e-6)  # frozen hand value

    def test_single_leaf_identity_chain(self, tmp_path):
        # One leaf chained to the root with identity MLPs: the readout is the
        # leaf feature repeated once per height slot.
        records = load_records(tmp_path, [chain_tree_record(0, 0, 1, 3)], [["0:1"]])
        x = np.array([[0.7, 1.3]], dtype=np.float32)
        batch = build_batch(records, [x], np.array([0]), [0])
        model = EtlModel(height=3, feature_dim=2, hidden_dim=2, n_classes=2)
        make_exact_bn(model)
        for mlp in model.mlps:
            set_linear(mlp.net[0], np.eye(2), np.zeros(2))
            set_linear(mlp.net[3], np.eye(2), np.zeros(2))
        with torch.no_grad():
            readout = model.readout(batch).numpy()[0]
        assert np.allclose(readout, np.tile(x[0], 4), atol=1e-6)

    def test_identity_sum_pool_height0_slot(self, tmp_path):
        records = load_records(tmp_path, [chain_tree_record(0, 0, 3, 2)],
                               [["0:1", "1:1", "2:1"]])
        x = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 2.0]], dtype=np.float32)
        batch = build_batch(records, [x], np.array([0]), [0])
        model = EtlModel(height=2, feature_dim=2, hidden_dim=2, n_classes=2)
        make_exact_bn(model)
        for mlp in model.mlps:
            set_linear(mlp.net[0], np.eye(2), np.zeros(2))
            set_linear(mlp.net[3], np.eye(2), np.zeros(2))
        with torch.no_grad():
            readout = model.readout(batch).numpy()[0]
        assert np.allclose(readout[:2], x.sum(axis=0), atol=1e-6)

    def test_node_id_permutation_invariance(self, tmp_path):
        base = binary_tree_record(0, 0)
        relabel = {0: 3, 1: 0, 2: 1, 3: 2, 4: 6, 5: 4, 6: 5}
        permuted = {
            "graph": 0, "class": 0, "height": 2,
            "nodes": [
                {**node, "id": relabel[node["id"]],
                 "parent_id": None if node["parent_id"] is None else relabel[node["parent_id"]]}
                for node in base["nodes"]
            ],
        }
        rows = [["0:1", "1:2", "2:1", "3:2"]]
        rec_a = load_records(tmp_path / "a", [base], rows)
        rec_b = load_records(tmp_path / "b", [permuted], rows)
        x = [np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=np.float32)]
        torch.manual_seed(0)
        model = EtlModel(height=2, feature_dim=2, hidden_dim=4, n_classes=2)
        model.eval()
        with torch.no_grad():
            la = model(build_batch(rec_a, x, np.array([0]), [0])).numpy()
            lb = model(build_batch(rec_b, x, np.array([0]), [0])).numpy()
        assert np.allclose(la, lb, atol=1e-6)

    def test_batch_matches_singles(self, tmp_path):
        records = load_records(
            tmp_path,
            [chain_tree_record(0, 0, 3, 2), binary_tree_record(1, 1)],
            [["0:1", "1:1", "2:1"], ["0:1", "1:1", "2:1", "3:1"]],
        )
        feats = [
            np.array([[1, 0], [0, 1], [1, 1]], dtype=np.float32),
            np.array([[2, 0], [0, 2], [1, 0], [0, 1]], dtype=np.float32),
        ]
        classes = np.array([0, 1])
        torch.manual_seed(1)
        model = EtlModel(height=2, feature_dim=2, hidden_dim=3, n_classes=2,
                         layer_pool="mean")
        model.eval()
        with torch.no_grad():
            both = model(build_batch(records, feats, classes, [0, 1])).numpy()
            one = model(build_batch(records, feats, classes, [0])).numpy()
            two = model(build_batch(records, feats, classes, [1])).numpy()
        assert np.allclose(both, np.vstack([one, two]), atol=1e-6)

    def test_height_mismatch_rejected(self, tmp_path):
        records = load_records(tmp_path, [chain_tree_record(0, 0, 2, 2)],
                               [["0:1", "1:1"]])
        x = [np.zeros((2, 2), dtype=np.float32)]
        batch = build_batch(records, x, np.array([0]), [0])
        model = EtlModel(height=3, feature_dim=2, hidden_dim=2, n_classes=2)
        with pytest.raises(ValueError, match="height"):
            model(batch)

    def test_missing_leaf_features_rejected(self, tmp_path):
        records = load_records(tmp_path, [chain_tree_record(0, 0, 3, 2)],
                               [["0:1", "1:1", "2:1"]])
        short = [np.zeros((2, 2), dtype=np.float32)]  # only two rows for three leaves
        with pytest.raises(ValueError, match="missing features"):
            build_batch(records, short, np.array([0]), [0])
