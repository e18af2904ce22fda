"""Exhaustive-search CART reference.

Independent of the fast learner in ml.py: every candidate split is
re-evaluated from scratch by routing the samples through it, with no sorted
sweeps or cumulative counts. Same contract -- midpoint candidates between
consecutive distinct values (discarding candidates whose midpoint rounds
onto a neighbor), `value < threshold` routes left, ties broken toward the
lower feature index then the lower threshold, recursion stopped by
max_depth / min_leaf / purity / non-positive decrease -- so a correct fast
learner produces node-identical trees.
"""

from droneradio.features import Dataset
from droneradio.ml import TreeConfig, TreeLeaf, TreeModel, TreeSplit, gini_impurity


def _best_split_exhaustive(x_rows, y_rows, min_leaf):
    n = len(y_rows)
    total_ones = sum(y_rows)
    g_parent = gini_impurity(float(total_ones), float(n))
    best_decrease = 0.0
    best = None
    for f in (0, 1):
        distinct = sorted(set(row[f] for row in x_rows))
        for a, b in zip(distinct, distinct[1:]):
            t = (a + b) / 2.0
            if not (a < t <= b):
                continue
            left_ix = [i for i in range(n) if x_rows[i][f] < t]
            nl = len(left_ix)
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            ones_l = sum(y_rows[i] for i in left_ix)
            gl = gini_impurity(float(ones_l), float(nl))
            gr = gini_impurity(float(total_ones - ones_l), float(nr))
            decrease = g_parent - (float(nl) * gl + float(nr) * gr) / float(n)
            if decrease > best_decrease:
                best_decrease = decrease
                best = (f, t)
    return best


def train_tree_exhaustive(train: Dataset, config: TreeConfig = TreeConfig()) -> TreeModel:
    """Brute-force counterpart of ml.train_tree; see module docstring."""
    if len(train) == 0:
        raise ValueError("training set is empty")
    if config.max_depth < 0 or config.min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
    x = [(float(s.features.rssi_dbm), float(s.features.rsrp_std_db))
         for s in train.samples]
    y = [1 if s.label.value == "drone" else 0 for s in train.samples]
    nodes = []

    def build(indices, depth):
        ones = sum(y[i] for i in indices)
        n = len(indices)
        if depth >= config.max_depth or ones == 0 or ones == n or n < 2 * config.min_leaf:
            nodes.append(TreeLeaf(drone_probability=ones / n, sample_count=n))
            return len(nodes) - 1
        best = _best_split_exhaustive([x[i] for i in indices],
                                      [y[i] for i in indices], config.min_leaf)
        if best is None:
            nodes.append(TreeLeaf(drone_probability=ones / n, sample_count=n))
            return len(nodes) - 1
        f, t = best
        here = len(nodes)
        nodes.append(None)
        left = build([i for i in indices if x[i][f] < t], depth + 1)
        right = build([i for i in indices if not x[i][f] < t], depth + 1)
        nodes[here] = TreeSplit(feature_index=f, threshold=t, left=left, right=right)
        return here

    build(list(range(len(y))), 0)
    return TreeModel(nodes=tuple(nodes), config=config,
                     standardization=train.standardization)
