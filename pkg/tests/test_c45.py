import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import enumerate_splits, oracle_best_split, oracle_gain_ratio, random_dataset
from persona.c45 import (
    CategoricalSplit,
    Dataset,
    Leaf,
    NumericSplit,
    TrainParams,
    TreeModel,
    best_split,
    candidate_splits,
    count_nodes,
    depth,
    entropy,
    gain_ratio,
    grow_tree,
    model_from_json,
    model_to_json,
    pessimistic_errors,
    predict,
    prune,
    top_features,
    train,
)
from persona.errors import SchemaMismatchError

NUM = "numeric"
CAT = "categorical"

# Quadrant XOR with points in general position: labels run a, b, b, a along x.
XOR_ROWS = [(0.0, 0.0), (0.1, 1.0), (0.9, 0.1), (1.0, 0.9)]
XOR_LABELS = ["low", "high", "high", "low"]

# 12 samples, 3 features (two numeric, one categorical).
TWELVE_ROWS = [
    (1.0, 5.0, "a"), (2.0, 3.0, "b"), (2.0, 4.0, "a"), (3.0, 1.0, "c"), (4.0, 2.0, "b"), (4.0, 5.0, "a"),
    (5.0, 3.0, "c"), (6.0, 1.0, "b"), (7.0, 4.0, "a"), (7.0, 2.0, "c"), (8.0, 5.0, "b"), (9.0, 3.0, "c"),
]
TWELVE_LABELS = ["low", "low", "low", "mid", "low", "mid", "high", "mid", "high", "high", "mid", "high"]
TWELVE_FEATURES = ("f_num1", "f_num2", "f_cat")
TWELVE_KINDS = (NUM, NUM, CAT)


def twelve():
    return Dataset(TWELVE_ROWS, TWELVE_LABELS, TWELVE_FEATURES, TWELVE_KINDS)


def accuracy(model, data):
    return np.mean([predict(model, data.row(i))[0] == lab for i, lab in enumerate(data.labels)])


# -- entropy / gain ratio ---------------------------------------------------

@pytest.mark.parametrize("counts, bits", [((5, 5), 1.0), ((10, 0), 0.0), ((9, 5), 0.9403), ((1, 1, 1, 1), 2.0)])
def test_entropy(counts, bits):
    assert entropy(counts) == pytest.approx(bits, abs=1e-4)


def test_entropy_rejects_empty():
    with pytest.raises(ValueError):
        entropy((0, 0))


def test_gain_ratio_trivial_cases():
    rows = [(0.0, 1.0), (0.0, 1.0), (1.0, 1.0), (1.0, 1.0)]
    data = Dataset(rows, ["low", "low", "high", "high"], ["same", "const"], [NUM, NUM])
    assert gain_ratio(data, "same", 0.5) == pytest.approx(1.0)
    assert gain_ratio(data, "const", 1.0) == 0.0
    cat = Dataset([("x",), ("x",), ("y",), ("y",)], ["low", "low", "high", "high"], ["c"], [CAT])
    assert gain_ratio(cat, "c") == pytest.approx(1.0)


def test_gain_ratio_twelve_matches_oracle():
    data = twelve()
    for j, kind in enumerate(TWELVE_KINDS):
        if kind == CAT:
            expected = oracle_gain_ratio(TWELVE_ROWS, TWELVE_LABELS, TWELVE_KINDS, data.classes, j)
            assert gain_ratio(data, TWELVE_FEATURES[j]) == pytest.approx(expected, abs=1e-12)
            continue
        values = sorted({r[j] for r in TWELVE_ROWS})
        for lo, hi in zip(values, values[1:]):
            t = (lo + hi) / 2
            expected = oracle_gain_ratio(TWELVE_ROWS, TWELVE_LABELS, TWELVE_KINDS, data.classes, j, t)
            assert gain_ratio(data, TWELVE_FEATURES[j], t) == pytest.approx(expected, abs=1e-12)


def test_candidates_twelve_match_enumeration():
    data = twelve()
    for min_leaf in (1, 2, 3):
        ours = [(c.feature, c.threshold, c.gain, c.split_info) for c in candidate_splits(data, TrainParams(min_leaf=min_leaf))]
        ref = enumerate_splits(TWELVE_ROWS, TWELVE_LABELS, TWELVE_KINDS, data.classes, min_leaf)
        assert [(j, t) for j, t, *_ in ours] == [(j, t) for j, t, *_ in ref]
        assert np.allclose([c[2:] for c in ours], [c[2:] for c in ref], atol=1e-12)


def test_best_split_twelve():
    data = twelve()
    for params in (TrainParams(), TrainParams(min_leaf=1), TrainParams(gain_floor=False)):
        expected = oracle_best_split(TWELVE_ROWS, TWELVE_LABELS, TWELVE_KINDS, data.classes,
                                     params.min_leaf, params.gain_floor)
        j, t = expected
        assert best_split(data, params) == (TWELVE_FEATURES[j], t)


def test_best_split_dominant_feature():
    rows = [(float(i % 3), float(i)) for i in range(10)]
    labels = ["low"] * 5 + ["high"] * 5
    data = Dataset(rows, labels, ["noise", "signal"], [NUM, NUM])
    assert best_split(data) == ("signal", 4.5)


def test_best_split_pure_is_none():
    data = Dataset([(1.0,), (2.0,), (3.0,), (4.0,)], ["mid"] * 4, ["x"], [NUM])
    assert best_split(data) is None


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]), st.booleans())
def test_best_split_oracle_equivalence(seed, min_leaf, floor):
    rows, labels, kinds, classes = random_dataset(random.Random(seed))
    data = Dataset(rows, labels, [f"f{j}" for j in range(len(kinds))], kinds, classes)
    expected = oracle_best_split(rows, labels, kinds, classes, min_leaf, floor)
    got = best_split(data, TrainParams(min_leaf=min_leaf, gain_floor=floor))
    assert got == (None if expected is None else (f"f{expected[0]}", expected[1]))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gain_ratio_bounds_binary(seed):
    rng = random.Random(seed)
    rows, labels, kinds, _ = random_dataset(rng)
    labels = [rng.choice(["low", "high"]) for _ in labels]
    data = Dataset(rows, labels, [f"f{j}" for j in range(len(kinds))], kinds, ("low", "high"))
    for c in candidate_splits(data, TrainParams(min_leaf=1)):
        assert c.gain >= -1e-12
        assert -1e-12 <= c.gain_ratio <= 1 + 1e-12


# -- growth -----------------------------------------------------------------

def test_pure_dataset_single_leaf():
    data = Dataset([(1.0,), (2.0,), (3.0,)], ["high"] * 3, ["x"], [NUM])
    assert grow_tree(data) == Leaf("high", (3,))


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        grow_tree(Dataset([], [], ["x"], [NUM], ("low", "high")))


def test_xor_general_position():
    data = Dataset(XOR_ROWS, XOR_LABELS, ["x", "y"], [NUM, NUM])
    model = train(data, TrainParams(min_leaf=1, prune=False))
    assert depth(model) == 2
    assert accuracy(model, data) == 1.0


def test_xor_binary_grid_has_no_positive_gain():
    # on the exact unit square every split leaves both sides 50/50
    data = Dataset([(0, 0), (0, 1), (1, 0), (1, 1)], ["low", "high", "high", "low"], ["x", "y"], [NUM, NUM])
    assert best_split(data, TrainParams(min_leaf=1)) is None


def test_majority_tie_uses_class_order():
    data = Dataset([(1.0,), (1.0,)], ["high", "low"], ["x"], [NUM])
    assert grow_tree(data).label == "low"


def test_max_depth():
    data = twelve()
    assert depth(grow_tree(data, TrainParams(min_leaf=1, max_depth=1))) <= 1
    assert isinstance(grow_tree(data, TrainParams(max_depth=0)), Leaf)


def test_categorical_not_repeated_on_path():
    rng = random.Random(4)
    rows = [(rng.choice("abc"), rng.choice("xy"), rng.random()) for _ in range(60)]
    labels = [("high" if r[0] == "a" else "low") if r[2] > 0.3 else "mid" for r in rows]
    data = Dataset(rows, labels, ["c1", "c2", "n"], [CAT, CAT, NUM])
    root = grow_tree(data, TrainParams(min_leaf=1))

    def walk(node, used):
        if isinstance(node, CategoricalSplit):
            assert node.feature not in used
            assert len(node.children) >= 2
            used = used | {node.feature}
        if isinstance(node, NumericSplit):
            walk(node.le, used)
            walk(node.gt, used)
        elif isinstance(node, CategoricalSplit):
            for _, c in node.children:
                walk(c, used)

    walk(root, frozenset())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_training_consistency(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    X = rng.random((n, 3))  # continuous, so no two rows coincide
    labels = list(rng.choice(["low", "mid", "high"], n))
    data = Dataset([tuple(r) for r in X], labels, ["a", "b", "c"], [NUM] * 3)
    model = train(data, TrainParams(min_leaf=1, prune=False))
    assert accuracy(model, data) == 1.0
    for leaf_dist in _leaf_dists(model.root):
        assert sum(leaf_dist) >= 1 and min(leaf_dist) >= 0


def _leaf_dists(node):
    if isinstance(node, Leaf):
        return [node.distribution]
    if isinstance(node, NumericSplit):
        return _leaf_dists(node.le) + _leaf_dists(node.gt)
    return [d for _, c in node.children for d in _leaf_dists(c)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.45))
def test_pruning_never_grows(seed, cf):
    rows, labels, kinds, classes = random_dataset(random.Random(seed), max_rows=30, max_features=4)
    data = Dataset(rows, labels, [f"f{j}" for j in range(len(kinds))], kinds, classes)
    grown = grow_tree(data, TrainParams(min_leaf=1))
    pruned = prune(grown, data, cf)
    assert count_nodes(pruned) <= count_nodes(grown)
    assert prune(grown, data, cf) == pruned


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations([0, 1, 2]))
def test_label_permutation(seed, perm):
    rows, labels, kinds, _ = random_dataset(random.Random(seed), max_rows=20)
    classes = ("low", "mid", "high")
    renamed = ("c0", "c1", "c2")
    rename = dict(zip(classes, renamed))
    names = [f"f{j}" for j in range(len(kinds))]
    data = Dataset(rows, labels, names, kinds, classes)
    data2 = Dataset(rows, [rename[lab] for lab in labels], names, kinds, renamed)
    m1, m2 = train(data), train(data2)
    for r in rows:
        assert rename[predict(m1, r)[0]] == predict(m2, r)[0]
    # gain ratios do not depend on class names or their order
    shuffled = tuple(renamed[p] for p in perm)
    data3 = Dataset(rows, [rename[lab] for lab in labels], names, kinds, shuffled)
    for a, b in zip(candidate_splits(data, TrainParams()), candidate_splits(data3, TrainParams())):
        assert a.gain_ratio == pytest.approx(b.gain_ratio, abs=1e-12)


# -- pruning ----------------------------------------------------------------

def noisy_branch_fixture():
    rows = [(float(x), 0.0) for x in range(1, 10)] + [(10.0, 0.0), (11.0, 0.0), (12.0, 1.0)]
    labels = ["low"] * 9 + ["low", "high", "high"]
    data = Dataset(rows, labels, ["x", "y"], [NUM, NUM])
    branch = NumericSplit("y", 0.5, Leaf("low", (1, 1)), Leaf("high", (0, 1)), "high", (1, 2))
    tree = NumericSplit("x", 9.5, Leaf("low", (9, 0)), branch, "low", (10, 2))
    return tree, data


def test_pessimistic_error_values():
    # hand evaluation of the upper bound at CF 0.25 (z = 0.67449)
    assert pessimistic_errors(2, 1, 0.25) + pessimistic_errors(1, 0, 0.25) == pytest.approx(1.743167, abs=1e-5)
    assert pessimistic_errors(3, 1, 0.25) == pytest.approx(1.583225, abs=1e-5)
    assert pessimistic_errors(9, 0, 0.25) + pessimistic_errors(3, 1, 0.25) == pytest.approx(2.016272, abs=1e-5)
    assert pessimistic_errors(12, 2, 0.25) == pytest.approx(3.013216, abs=1e-5)
    assert pessimistic_errors(0, 0, 0.25) == 0


def test_noisy_branch_collapsed():
    tree, data = noisy_branch_fixture()
    pruned = prune(tree, data, 0.25)
    assert pruned == NumericSplit("x", 9.5, Leaf("low", (9, 0)), Leaf("high", (1, 2)), "low", (10, 2))


def test_prune_single_leaf_unchanged():
    data = Dataset([(1.0,), (2.0,)], ["low", "high"], ["x"], [NUM])
    leaf = Leaf("low", (1, 1))
    assert prune(leaf, data) == leaf


def test_same_prediction_children_collapse():
    rows = [(float(i),) for i in range(12)]
    labels = ["low"] * 5 + ["high"] + ["low"] * 5 + ["high"]
    data = Dataset(rows, labels, ["x"], [NUM])
    tree = NumericSplit("x", 5.5, Leaf("low", (5, 1)), Leaf("low", (5, 1)), "low", (10, 2))
    assert prune(tree, data) == Leaf("low", (10, 2))


# -- prediction & reporting -------------------------------------------------

def fixture_model():
    inner = NumericSplit("friend_count", 100.0, Leaf("mid", (1, 3, 0)), Leaf("high", (0, 1, 4)), "high", (1, 4, 4))
    gender = CategoricalSplit("gender", (("f", inner), ("m", Leaf("low", (5, 1, 0)))), "f", "mid", (6, 5, 4))
    root = NumericSplit("zidou", 50.0, Leaf("low", (7, 2, 1)), gender, "low", (13, 7, 5))
    return TreeModel(root, ("zidou", "gender", "friend_count"), (NUM, CAT, NUM), ("low", "mid", "high"),
                     TrainParams(), "1.0", "A")


def test_predict_fixture_path():
    label, path = predict(fixture_model(), {"zidou": 80, "gender": "f", "friend_count": 150})
    assert label == "high"
    assert path == [("zidou", "> 50.0"), ("gender", "== f"), ("friend_count", "> 100.0")]


def test_predict_boundary_goes_left():
    assert predict(fixture_model(), {"zidou": 50.0, "gender": "m", "friend_count": 0}) == ("low", [("zidou", "<= 50.0")])


def test_predict_unseen_category_uses_fallback():
    label, path = predict(fixture_model(), (80, "x", 10))
    assert label == "mid"
    assert path[1] == ("gender", "unseen x -> f")


def test_predict_single_leaf():
    model = TreeModel(Leaf("mid", (0, 3, 0)), ("a",), (NUM,), ("low", "mid", "high"), TrainParams())
    assert predict(model, (1.0,)) == ("mid", [])


def test_predict_schema_mismatch():
    with pytest.raises(SchemaMismatchError):
        predict(fixture_model(), (1.0, "f"))
    with pytest.raises(SchemaMismatchError):
        predict(fixture_model(), {"zidou": 1.0})


def test_top_features():
    assert top_features(fixture_model()) == [(0, "zidou"), (1, "gender")]
    assert top_features(fixture_model(), depth_limit=3) == [(0, "zidou"), (1, "gender"), (2, "friend_count")]
    leaf = TreeModel(Leaf("mid", (0, 1, 0)), ("a",), (NUM,), ("low", "mid", "high"), TrainParams())
    assert top_features(leaf) == []


def test_top_features_depth2_tree():
    root = NumericSplit("a", 1.0, NumericSplit("b", 2.0, Leaf("low", (1, 0)), Leaf("high", (0, 1)), "low", (1, 1)),
                        NumericSplit("c", 3.0, Leaf("low", (1, 0)), Leaf("high", (0, 1)), "low", (1, 1)), "low", (2, 2))
    assert top_features(root) == [(0, "a"), (1, "b"), (1, "c")]


def test_model_json_roundtrip():
    model = train(twelve(), TrainParams(min_leaf=1))
    text = json.dumps(model_to_json(model), indent=2)
    back = model_from_json(json.loads(text))
    assert back == model
    assert json.dumps(model_to_json(back), indent=2) == text
    assert list(json.loads(text)) == ["format", "schema_version", "dimension", "classes", "features", "kinds",
                                      "params", "tree"]
    fm = fixture_model()
    assert model_from_json(json.loads(json.dumps(model_to_json(fm)))) == fm


def test_train_params_validation():
    with pytest.raises(ValueError):
        TrainParams(min_leaf=0)
    with pytest.raises(ValueError):
        TrainParams(cf=0.5)
