"""C4.5 decision trees: gain-ratio splits, pessimistic pruning, prediction.

Numeric features split at midpoints between consecutive distinct values
(``x <= t`` goes left); categorical features split multiway, one child per
category observed at the node, and unseen categories follow the child that
received the most training samples. Every tie is broken by a fixed order
(schema order for features, ascending thresholds, class order for labels),
so trees are reproducible bit for bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import SchemaMismatchError, ValidationError

NUMERIC, CATEGORICAL = "numeric", "categorical"
CANONICAL_CLASS_ORDER = ("low", "mid", "high")
MODEL_FORMAT = "persona-c45/1"

# Gains and gain ratios closer than this are treated as equal.
EPS = 1e-12


@dataclass(frozen=True)
class TrainParams:
    min_leaf: int = 2
    cf: float = 0.25
    max_depth: int | None = None
    seed: int = 0  # reserved; no randomness is used while growing
    gain_floor: bool = True
    prune: bool = True

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0 < self.cf < 0.5:
            raise ValueError("cf must be in (0, 0.5)")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


# -- data -------------------------------------------------------------------

def default_class_order(labels: Iterable[str]) -> tuple[str, ...]:
    present = set(labels)
    if present <= set(CANONICAL_CLASS_ORDER):
        return tuple(c for c in CANONICAL_CLASS_ORDER if c in present)
    return tuple(sorted(present))


class Dataset:
    """Rectangular sample matrix with a label column.

    Categorical cells are stored as strings and encoded internally as indices
    into ``categories[j]`` (sorted). ``classes`` fixes the class order used
    for every tie-break.
    """

    def __init__(
        self,
        rows: Sequence[Sequence[Any]],
        labels: Sequence[str],
        features: Sequence[str],
        kinds: Sequence[str],
        classes: Sequence[str] | None = None,
    ):
        self.features = tuple(features)
        self.kinds = tuple(kinds)
        if len(self.features) != len(self.kinds):
            raise ValueError("features and kinds differ in length")
        if any(k not in (NUMERIC, CATEGORICAL) for k in self.kinds):
            raise ValueError(f"unknown feature kind in {self.kinds}")
        if len(rows) != len(labels):
            raise ValueError(f"{len(rows)} rows but {len(labels)} labels")
        self.classes = tuple(classes) if classes is not None else default_class_order(labels)
        class_index = {c: i for i, c in enumerate(self.classes)}
        try:
            self.y = np.array([class_index[lab] for lab in labels], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"label {exc.args[0]!r} not in classes {self.classes}") from None

        m = len(self.features)
        self.categories: list[tuple[str, ...]] = [()] * m
        X = np.empty((len(rows), m), dtype=np.float64)
        for r, row in enumerate(rows):
            if len(row) != m:
                raise ValidationError(f"row has {len(row)} cells, expected {m}", f"row {r}")
        for j, kind in enumerate(self.kinds):
            column = [row[j] for row in rows]
            if kind == CATEGORICAL:
                cats = tuple(sorted({str(v) for v in column}))
                lookup = {c: i for i, c in enumerate(cats)}
                self.categories[j] = cats
                X[:, j] = [lookup[str(v)] for v in column]
            else:
                try:
                    X[:, j] = [float(v) for v in column]
                except (TypeError, ValueError):
                    raise ValidationError(f"non-numeric value in numeric column {self.features[j]!r}") from None
                if not np.all(np.isfinite(X[:, j])):
                    raise ValidationError(f"missing or infinite value in column {self.features[j]!r}")
        self.X = X

    @classmethod
    def from_vectors(cls, vectors, labels, classes=None) -> "Dataset":
        """Build from :class:`~persona.features.FeatureVector` objects in schema order."""
        from .features import feature_kinds, feature_names

        return cls([v.values for v in vectors], labels, feature_names(), feature_kinds(), classes)

    def subset(self, idx, labels: Sequence[str] | None = None, classes: Sequence[str] | None = None) -> "Dataset":
        """Rows ``idx`` of this dataset, optionally relabelled.

        Category encodings are shared with the parent, which is harmless
        because splits only ever use categories present at a node.
        """
        idx = np.asarray(idx, dtype=np.int64)
        out = object.__new__(Dataset)
        out.features, out.kinds, out.categories = self.features, self.kinds, self.categories
        out.X = self.X[idx]
        if labels is None:
            out.classes = self.classes if classes is None else tuple(classes)
            lookup = {c: i for i, c in enumerate(out.classes)}
            try:
                out.y = np.array([lookup[self.classes[i]] for i in self.y[idx]], dtype=np.int64)
            except KeyError as exc:
                raise ValidationError(f"label {exc.args[0]!r} not in classes {out.classes}") from None
        else:
            if len(labels) != len(idx):
                raise ValueError(f"{len(idx)} rows but {len(labels)} labels")
            out.classes = tuple(classes) if classes is not None else default_class_order(labels)
            lookup = {c: i for i, c in enumerate(out.classes)}
            out.y = np.array([lookup[lab] for lab in labels], dtype=np.int64)
        return out

    def __len__(self):
        return len(self.y)

    @property
    def labels(self) -> list[str]:
        return [self.classes[i] for i in self.y]

    def feature_index(self, feature: str | int) -> int:
        if isinstance(feature, (int, np.integer)):
            return int(feature)
        try:
            return self.features.index(feature)
        except ValueError:
            raise KeyError(feature) from None

    def value(self, i: int, j: int):
        x = self.X[i, j]
        return self.categories[j][int(x)] if self.kinds[j] == CATEGORICAL else float(x)

    def row(self, i: int) -> tuple:
        return tuple(self.value(i, j) for j in range(len(self.features)))


# -- tree nodes -------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    label: str
    distribution: tuple[int, ...]


@dataclass(frozen=True)
class NumericSplit:
    feature: str
    threshold: float
    le: "Node"
    gt: "Node"
    label: str
    distribution: tuple[int, ...]


@dataclass(frozen=True)
class CategoricalSplit:
    feature: str
    children: tuple[tuple[str, "Node"], ...]
    fallback: str
    label: str
    distribution: tuple[int, ...]

    def child(self, category: str) -> "Node":
        for cat, node in self.children:
            if cat == category:
                return node
        raise KeyError(category)


Node = Union[Leaf, NumericSplit, CategoricalSplit]


@dataclass(frozen=True)
class TreeModel:
    root: Node
    features: tuple[str, ...]
    kinds: tuple[str, ...]
    classes: tuple[str, ...]
    params: TrainParams
    schema_version: str = ""
    dimension: str = ""


def children(node: Node) -> list[Node]:
    if isinstance(node, NumericSplit):
        return [node.le, node.gt]
    if isinstance(node, CategoricalSplit):
        return [c for _, c in node.children]
    return []


def count_nodes(node: Node | TreeModel) -> int:
    node = node.root if isinstance(node, TreeModel) else node
    return 1 + sum(count_nodes(c) for c in children(node))


def depth(node: Node | TreeModel) -> int:
    node = node.root if isinstance(node, TreeModel) else node
    kids = children(node)
    return 0 if not kids else 1 + max(depth(c) for c in kids)


def iter_leaves(node: Node):
    kids = children(node)
    if not kids:
        yield node
    for c in kids:
        yield from iter_leaves(c)


# -- split criteria ---------------------------------------------------------

def entropy(class_counts: Sequence[float]) -> float:
    """Shannon entropy in bits of a count vector."""
    counts = [c for c in class_counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy of an all-zero count vector is undefined")
    return 0.0 - math.fsum((c / total) * math.log2(c / total) for c in counts if c > 0)


def _row_entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy of each row of a (m, K) count matrix; empty rows give 0."""
    n = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, counts / n, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)


@dataclass(frozen=True)
class Candidate:
    feature: int
    threshold: float | None
    gain: float
    split_info: float

    @property
    def gain_ratio(self) -> float:
        return self.gain / self.split_info if self.split_info > 0 else 0.0


def _numeric_table(X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int, parent_h: float):
    """Every admissible midpoint split over the columns of ``X`` at once.

    Returns parallel arrays (column, threshold, gain, split info) ordered by
    column, then by ascending threshold.
    """
    n, m = X.shape
    empty = (np.empty(0, dtype=np.int64), np.empty(0), np.empty(0), np.empty(0))
    if n < 2 or m == 0:
        return empty
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    onehot = (y[order][..., None] == np.arange(n_classes)).astype(np.float64)
    left = np.cumsum(onehot, axis=0)[:-1]
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    ok = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (n - nl >= min_leaf)
    cols, rows = np.nonzero(ok.T)
    if len(rows) == 0:
        return empty
    left = left[rows, cols]
    right = onehot.sum(axis=0)[cols] - left
    nl = nl[rows, 0]
    nr = n - nl
    lo, hi = xs[rows, cols], xs[rows + 1, cols]
    thresholds = (lo + hi) / 2.0
    # guard against midpoints rounding onto the upper neighbour
    thresholds = np.where(thresholds < hi, thresholds, lo)
    gains = parent_h - (nl / n) * _row_entropy(left) - (nr / n) * _row_entropy(right)
    split_info = _row_entropy(np.stack([nl, nr], axis=1))
    return cols, thresholds, gains, split_info


def _categorical_candidate(x: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int, parent_h: float):
    codes, inverse = np.unique(x, return_inverse=True)
    if len(codes) < 2:
        return None
    table = np.zeros((len(codes), n_classes))
    np.add.at(table, (inverse, y), 1.0)
    sizes = table.sum(axis=1)
    if np.count_nonzero(sizes >= min_leaf) < 2:
        return None
    n = sizes.sum()
    gain = parent_h - float(np.dot(sizes / n, _row_entropy(table)))
    split_info = float(_row_entropy(sizes[None, :])[0])
    return gain, split_info


def gain_ratio(data: Dataset, feature: str | int, split: float | None = None, idx: np.ndarray | None = None) -> float:
    """Gain ratio of one split of ``data`` (optionally restricted to rows ``idx``).

    ``split`` is the threshold for a numeric feature and ignored for a
    categorical one. A split with zero split information scores 0.
    """
    j = data.feature_index(feature)
    idx = np.arange(len(data)) if idx is None else np.asarray(idx)
    x, y = data.X[idx, j], data.y[idx]
    k = len(data.classes)
    parent = np.bincount(y, minlength=k).astype(float)
    if parent.sum() == 0:
        return 0.0
    if data.kinds[j] == NUMERIC:
        if split is None:
            raise ValueError("numeric split needs a threshold")
        branch_of = (x > split).astype(np.int64)
        n_branches = 2
    else:
        _, branch_of = np.unique(x, return_inverse=True)
        n_branches = int(branch_of.max()) + 1 if len(branch_of) else 0
    table = np.zeros((n_branches, k))
    np.add.at(table, (branch_of, y), 1.0)
    sizes = table.sum(axis=1)
    n = sizes.sum()
    gain = float(_row_entropy(parent[None, :])[0] - np.dot(sizes / n, _row_entropy(table)))
    split_info = float(_row_entropy(sizes[None, :])[0])
    return gain / split_info if split_info > 0 else 0.0


def _split_table(data: Dataset, params: TrainParams, idx: np.ndarray, exclude=()):
    """Admissible splits at a node as parallel arrays; categorical thresholds are NaN."""
    y = data.y[idx]
    k = len(data.classes)
    parent_h = float(_row_entropy(np.bincount(y, minlength=k)[None, :].astype(float))[0])
    numeric = [j for j, kind in enumerate(data.kinds) if kind == NUMERIC and j not in exclude]
    cols, ts, gains, sis = _numeric_table(data.X[np.ix_(idx, numeric)], y, k, params.min_leaf, parent_h)
    feats = [np.asarray(numeric, dtype=np.int64)[cols]]
    ts, gains, sis = [ts], [gains], [sis]
    for j, kind in enumerate(data.kinds):
        if kind == CATEGORICAL and j not in exclude:
            cand = _categorical_candidate(data.X[idx, j], y, k, params.min_leaf, parent_h)
            if cand is not None:
                feats.append(np.array([j]))
                ts.append(np.array([np.nan]))
                gains.append(np.array([cand[0]]))
                sis.append(np.array([cand[1]]))
    feat = np.concatenate(feats)
    order = np.argsort(feat, kind="stable")
    return feat[order], np.concatenate(ts)[order], np.concatenate(gains)[order], np.concatenate(sis)[order]


def _select(table, gain_floor: bool) -> int | None:
    feat, thr, gain, si = table
    pos = np.flatnonzero(gain > EPS)
    if len(pos) == 0:
        return None
    if gain_floor:
        floor = math.fsum(gain[pos].tolist()) / len(pos)
        pos = pos[gain[pos] >= floor - EPS]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(si[pos] > 0, gain[pos] / si[pos], 0.0)
    tied = pos[ratio >= ratio.max() - EPS]
    first = np.lexsort((np.nan_to_num(thr[tied], nan=-np.inf), feat[tied]))[0]
    return int(tied[first])


def candidate_splits(data: Dataset, params: TrainParams, idx=None, exclude=()) -> list[Candidate]:
    """Every admissible split at the node holding rows ``idx``.

    Numeric candidates need ``min_leaf`` samples on both sides; a categorical
    split needs at least two branches with ``min_leaf`` samples.
    """
    idx = np.arange(len(data)) if idx is None else np.asarray(idx)
    feat, thr, gain, si = _split_table(data, params, idx, exclude)
    return [
        Candidate(int(j), None if math.isnan(t) else float(t), float(g), float(s))
        for j, t, g, s in zip(feat, thr, gain, si)
    ]


def select_split(cands: Sequence[Candidate], gain_floor: bool = True) -> Candidate | None:
    """Pick the winning candidate.

    Only candidates with positive gain are considered; with ``gain_floor``
    they must also reach the mean gain of all positive-gain candidates.
    The maximal gain ratio wins; ties go to the earlier feature, then the
    lower threshold.
    """
    if not cands:
        return None
    table = (
        np.array([c.feature for c in cands], dtype=np.int64),
        np.array([np.nan if c.threshold is None else c.threshold for c in cands]),
        np.array([c.gain for c in cands]),
        np.array([c.split_info for c in cands]),
    )
    i = _select(table, gain_floor)
    return None if i is None else cands[i]


def _best(data: Dataset, params: TrainParams, idx: np.ndarray, exclude=()) -> tuple[int, float | None] | None:
    table = _split_table(data, params, idx, exclude)
    i = _select(table, params.gain_floor)
    if i is None:
        return None
    t = table[1][i]
    return int(table[0][i]), None if math.isnan(t) else float(t)


def best_split(data: Dataset, params: TrainParams = TrainParams(), idx=None, exclude=()) -> tuple[str, float | None] | None:
    """``(feature name, threshold or None)`` of the best split, or ``None``."""
    idx = np.arange(len(data)) if idx is None else np.asarray(idx)
    best = _best(data, params, idx, exclude)
    if best is None:
        return None
    return data.features[best[0]], best[1]


# -- growth -----------------------------------------------------------------

def _majority(counts: np.ndarray, classes: Sequence[str]) -> str:
    # argmax returns the first maximum, i.e. the earliest class in order
    return classes[int(np.argmax(counts))]


def grow_tree(data: Dataset, params: TrainParams = TrainParams()) -> Node:
    """Grow an unpruned tree on all rows of ``data``."""
    if len(data) == 0:
        raise ValueError("cannot grow a tree on an empty dataset")
    k = len(data.classes)

    def grow(idx: np.ndarray, level: int, used: frozenset) -> Node:
        counts = np.bincount(data.y[idx], minlength=k)
        dist = tuple(int(c) for c in counts)
        label = _majority(counts, data.classes)
        if (
            np.count_nonzero(counts) <= 1
            or len(idx) < 2 * params.min_leaf
            or (params.max_depth is not None and level >= params.max_depth)
        ):
            return Leaf(label, dist)
        best = _best(data, params, idx, used)
        if best is None:
            return Leaf(label, dist)
        j, threshold = best
        x = data.X[idx, j]
        name = data.features[j]
        if threshold is not None:
            mask = x <= threshold
            return NumericSplit(
                name,
                threshold,
                grow(idx[mask], level + 1, used),
                grow(idx[~mask], level + 1, used),
                label,
                dist,
            )
        kids = []
        sizes = []
        for code in np.unique(x):
            sub = idx[x == code]
            kids.append((data.categories[j][int(code)], grow(sub, level + 1, used | {j})))
            sizes.append(len(sub))
        # categories are sorted, so the first largest child is the tie winner
        fallback = kids[int(np.argmax(sizes))][0]
        return CategoricalSplit(name, tuple(kids), fallback, label, dist)

    return grow(np.arange(len(data)), 0, frozenset())


# -- pruning ----------------------------------------------------------------

def pessimistic_errors(n: float, errors: float, cf: float) -> float:
    """Upper confidence bound on the error count of a leaf.

    Normal-approximation (Wilson) upper limit of the error rate at one-sided
    confidence ``cf``, times ``n``.
    """
    if n <= 0:
        return 0.0
    z = NormalDist().inv_cdf(1.0 - cf)
    f = errors / n
    z2 = z * z
    upper = (f + z2 / (2 * n) + z * math.sqrt(max(f * (1 - f) / n + z2 / (4 * n * n), 0.0))) / (1 + z2 / n)
    return n * upper


def _route_counts(node: Node, data: Dataset, idx: np.ndarray, out: dict) -> None:
    k = len(data.classes)
    out[id(node)] = np.bincount(data.y[idx], minlength=k)
    if isinstance(node, Leaf):
        return
    j = data.feature_index(node.feature)
    x = data.X[idx, j]
    if isinstance(node, NumericSplit):
        mask = x <= node.threshold
        _route_counts(node.le, data, idx[mask], out)
        _route_counts(node.gt, data, idx[~mask], out)
        return
    values = [data.categories[j][int(c)] for c in x]
    known = {cat for cat, _ in node.children}
    for cat, child in node.children:
        sel = [v == cat or (v not in known and cat == node.fallback) for v in values]
        _route_counts(child, data, idx[np.array(sel, dtype=bool)], out)


def prune(tree: Node | TreeModel, data: Dataset, cf: float = 0.25):
    """Bottom-up subtree replacement by pessimistic error.

    Node distributions are recomputed by routing ``data`` through the tree.
    A split becomes a leaf when the leaf's estimated errors do not exceed the
    sum of its leaves' estimates. Returns the same type it was given.
    """
    model = tree if isinstance(tree, TreeModel) else None
    root = model.root if model else tree
    counts: dict[int, np.ndarray] = {}
    _route_counts(root, data, np.arange(len(data)), counts)
    classes = data.classes

    def visit(node: Node) -> tuple[Node, float]:
        c = counts[id(node)]
        n = float(c.sum())
        dist = tuple(int(v) for v in c)
        label = _majority(c, classes) if n > 0 else node.label
        leaf_est = pessimistic_errors(n, n - float(c.max()) if n else 0.0, cf)
        if isinstance(node, Leaf):
            return Leaf(label, dist), leaf_est
        if isinstance(node, NumericSplit):
            (le, e1), (gt, e2) = visit(node.le), visit(node.gt)
            new = NumericSplit(node.feature, node.threshold, le, gt, label, dist)
            sub_est = e1 + e2
        else:
            kids, sub_est = [], 0.0
            for cat, child in node.children:
                pruned, est = visit(child)
                kids.append((cat, pruned))
                sub_est += est
            new = CategoricalSplit(node.feature, tuple(kids), node.fallback, label, dist)
        if leaf_est <= sub_est + 1e-9:
            return Leaf(label, dist), leaf_est
        return new, sub_est

    new_root = visit(root)[0]
    if model is None:
        return new_root
    return TreeModel(new_root, model.features, model.kinds, model.classes, model.params,
                     model.schema_version, model.dimension)


def train(data: Dataset, params: TrainParams = TrainParams(), schema_version: str = "", dimension: str = "") -> TreeModel:
    """Grow and (unless ``params.prune`` is off) prune a tree."""
    root = grow_tree(data, params)
    if params.prune:
        root = prune(root, data, params.cf)
    return TreeModel(root, data.features, data.kinds, data.classes, params, schema_version, dimension)


# -- prediction & reporting -------------------------------------------------

def _as_row(model: TreeModel, vector) -> dict[str, Any]:
    if isinstance(vector, Mapping):
        missing = [f for f in model.features if f not in vector]
        if missing:
            raise SchemaMismatchError(f"vector lacks features {missing[:5]}")
        return dict(vector)
    values = getattr(vector, "values", vector)
    vsv = getattr(vector, "schema_version", None)
    if vsv and model.schema_version and vsv != model.schema_version:
        raise SchemaMismatchError(f"vector schema {vsv!r} != model schema {model.schema_version!r}")
    if len(values) != len(model.features):
        raise SchemaMismatchError(f"vector has {len(values)} slots, model expects {len(model.features)}")
    return dict(zip(model.features, values))


def predict(model: TreeModel, vector) -> tuple[str, list[tuple[str, str]]]:
    """Classify one vector; also return the decision path as ``(feature, decision)``."""
    row = _as_row(model, vector)
    node = model.root
    path = []
    while not isinstance(node, Leaf):
        value = row[node.feature]
        if isinstance(node, NumericSplit):
            x = float(value)
            if x <= node.threshold:
                path.append((node.feature, f"<= {node.threshold!r}"))
                node = node.le
            else:
                path.append((node.feature, f"> {node.threshold!r}"))
                node = node.gt
        else:
            cat = str(value)
            try:
                nxt = node.child(cat)
                path.append((node.feature, f"== {cat}"))
            except KeyError:
                nxt = node.child(node.fallback)
                path.append((node.feature, f"unseen {cat} -> {node.fallback}"))
            node = nxt
    return node.label, path


def predict_many(model: TreeModel, vectors: Iterable) -> list[str]:
    return [predict(model, v)[0] for v in vectors]


def top_features(tree: Node | TreeModel, depth_limit: int = 2) -> list[tuple[int, str]]:
    """Split features at depth < ``depth_limit``, breadth first, first occurrence kept."""
    root = tree.root if isinstance(tree, TreeModel) else tree
    seen, out = set(), []
    queue = deque([(root, 0)])
    while queue:
        node, level = queue.popleft()
        if isinstance(node, Leaf) or level >= depth_limit:
            continue
        if node.feature not in seen:
            seen.add(node.feature)
            out.append((level, node.feature))
        queue.extend((c, level + 1) for c in children(node))
    return out


# -- model files ------------------------------------------------------------

def _node_to_json(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "label": node.label, "distribution": list(node.distribution)}
    if isinstance(node, NumericSplit):
        return {
            "kind": NUMERIC,
            "feature": node.feature,
            "threshold": node.threshold,
            "label": node.label,
            "distribution": list(node.distribution),
            "le": _node_to_json(node.le),
            "gt": _node_to_json(node.gt),
        }
    return {
        "kind": CATEGORICAL,
        "feature": node.feature,
        "fallback": node.fallback,
        "label": node.label,
        "distribution": list(node.distribution),
        "children": {cat: _node_to_json(child) for cat, child in node.children},
    }


def _node_from_json(obj: dict) -> Node:
    kind = obj["kind"]
    dist = tuple(int(c) for c in obj["distribution"])
    if kind == "leaf":
        return Leaf(obj["label"], dist)
    if kind == NUMERIC:
        return NumericSplit(obj["feature"], float(obj["threshold"]), _node_from_json(obj["le"]),
                            _node_from_json(obj["gt"]), obj["label"], dist)
    if kind == CATEGORICAL:
        kids = tuple((cat, _node_from_json(child)) for cat, child in sorted(obj["children"].items()))
        return CategoricalSplit(obj["feature"], kids, obj["fallback"], obj["label"], dist)
    raise ValidationError(f"unknown node kind {kind!r}")


def model_to_json(model: TreeModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "schema_version": model.schema_version,
        "dimension": model.dimension,
        "classes": list(model.classes),
        "features": list(model.features),
        "kinds": list(model.kinds),
        "params": asdict(model.params),
        "tree": _node_to_json(model.root),
    }


def model_from_json(obj: dict) -> TreeModel:
    if obj.get("format") != MODEL_FORMAT:
        raise ValidationError(f"not a {MODEL_FORMAT} model file")
    return TreeModel(
        root=_node_from_json(obj["tree"]),
        features=tuple(obj["features"]),
        kinds=tuple(obj["kinds"]),
        classes=tuple(obj["classes"]),
        params=TrainParams(**obj["params"]),
        schema_version=obj.get("schema_version", ""),
        dimension=obj.get("dimension", ""),
    )
