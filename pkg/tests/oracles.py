"""Slow reference implementations used as test oracles.

Nothing here imports the package under test.
"""

import math

TIE = 1e-12  # same tolerance the contract uses for equal gains/ratios


def info(counts):
    n = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / n
            h -= p * math.log2(p)
    return h


def tally(labels, classes):
    return [sum(1 for lab in labels if lab == c) for c in classes]


def partition_stats(branches, classes):
    """(gain, split info) for a list of label lists."""
    parent = [lab for b in branches for lab in b]
    n = len(parent)
    remainder = 0.0
    for b in branches:
        remainder += len(b) / n * info(tally(b, classes))
    return info(tally(parent, classes)) - remainder, info([len(b) for b in branches])


def enumerate_splits(rows, labels, kinds, classes, min_leaf):
    """Every admissible (feature, threshold, gain, split_info), by exhaustive enumeration."""
    out = []
    for j, kind in enumerate(kinds):
        column = [r[j] for r in rows]
        if kind == "numeric":
            values = sorted(set(column))
            for lo, hi in zip(values, values[1:]):
                t = (lo + hi) / 2
                left = [lab for x, lab in zip(column, labels) if x <= t]
                right = [lab for x, lab in zip(column, labels) if x > t]
                if len(left) < min_leaf or len(right) < min_leaf:
                    continue
                g, s = partition_stats([left, right], classes)
                out.append((j, t, g, s))
        else:
            groups = {}
            for x, lab in zip(column, labels):
                groups.setdefault(str(x), []).append(lab)
            if len(groups) < 2 or sum(1 for g in groups.values() if len(g) >= min_leaf) < 2:
                continue
            g, s = partition_stats([groups[k] for k in sorted(groups)], classes)
            out.append((j, None, g, s))
    return out


def oracle_best_split(rows, labels, kinds, classes, min_leaf=2, gain_floor=True):
    cands = enumerate_splits(rows, labels, kinds, classes, min_leaf)
    pos = [c for c in cands if c[2] > TIE]
    if not pos:
        return None
    if gain_floor:
        avg = sum(c[2] for c in pos) / len(pos)
        pos = [c for c in pos if c[2] >= avg - TIE]
    ratio = lambda c: c[2] / c[3] if c[3] > 0 else 0.0  # noqa: E731
    best = max(ratio(c) for c in pos)
    tied = [c for c in pos if ratio(c) >= best - TIE]
    tied.sort(key=lambda c: (c[0], -math.inf if c[1] is None else c[1]))
    return tied[0][0], tied[0][1]


def oracle_gain_ratio(rows, labels, kinds, classes, j, threshold=None):
    column = [r[j] for r in rows]
    if kinds[j] == "numeric":
        branches = [[lab for x, lab in zip(column, labels) if x <= threshold],
                    [lab for x, lab in zip(column, labels) if x > threshold]]
        branches = [b for b in branches if b]
    else:
        groups = {}
        for x, lab in zip(column, labels):
            groups.setdefault(str(x), []).append(lab)
        branches = list(groups.values())
    g, s = partition_stats(branches, classes)
    return g / s if s > 0 else 0.0


def random_dataset(rng, max_rows=12, max_features=4):
    """Small random dataset with plenty of value ties; rng is a random.Random."""
    n = rng.randint(2, max_rows)
    m = rng.randint(1, max_features)
    k = rng.choice([2, 3])
    classes = ("low", "mid", "high")[:k] if k == 3 else ("low", "high")
    kinds = [rng.choice(["numeric", "numeric", "categorical"]) for _ in range(m)]
    levels = [rng.randint(2, 6) for _ in range(m)]
    rows = []
    for _ in range(n):
        row = []
        for kind, lv in zip(kinds, levels):
            v = rng.randrange(lv)
            row.append(float(v) * 0.5 if kind == "numeric" else "abcdef"[v])
        rows.append(tuple(row))
    labels = [rng.choice(classes) for _ in range(n)]
    return rows, labels, kinds, classes
