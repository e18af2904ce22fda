"""Binary classifiers for drone identification: logistic regression trained
by full-batch gradient descent and a CART decision tree with Gini impurity.

Both models predict the drone probability from raw (unstandardized) feature
coordinates; the logistic model standardizes internally with the parameters
it was trained with, the tree keeps raw-domain thresholds. Thresholding uses
>= everywhere: a probability exactly at the decision threshold classifies as
drone, and a feature value exactly at a tree split routes right.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from droneradio._io import atomic_write_text, canonical_json
from droneradio.features import (FEATURE_NAMES, Dataset, FeatureVector, Label,
                                 Standardization)

MODEL_FORMAT_VERSION = 1


class SingleClassError(ValueError):
    """Training set contains only one class."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or parameters."""


@dataclass(frozen=True)
class LogisticConfig:
    learning_rate: float = 0.1
    max_iters: int = 5000
    tolerance: float = 1e-6
    l2: float = 0.0


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 6
    min_leaf: int = 5


def _as_feature_array(features) -> np.ndarray:
    if isinstance(features, FeatureVector):
        x = features.as_array()
    else:
        x = np.asarray(features, dtype=float)
    if x.shape != (2,):
        raise ValueError(f"expected 2 features, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"features must be finite, got {x}")
    return x


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    standardization: Standardization
    config: LogisticConfig
    loss_history: list = field(default_factory=list, repr=False, compare=False)

    def predict_proba(self, features) -> float:
        x = _as_feature_array(features)
        z = self.standardization.apply_array(x)
        t = float(z @ self.weights + self.bias)
        return float(_sigmoid(np.array([t]))[0])


def logistic_loss_and_grad(w, b, x, y, l2):
    """Mean negative log-likelihood plus l2*|w|^2/2, and its gradient.

    The loss uses logaddexp for stability; the bias is not regularized.
    """
    z = x @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    p = _sigmoid(z)
    gw = x.T @ (p - y) / len(y) + l2 * w
    gb = float(np.mean(p - y))
    return loss, gw, gb


def train_logistic(train: Dataset, config: LogisticConfig = LogisticConfig()) -> LogisticModel:
    """Full-batch gradient descent from zero-initialized parameters.

    Stops at max_iters or when the gradient max-norm drops below tolerance.
    Requires a standardized dataset with both classes present.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if train.standardization is None:
        raise ValueError("train_logistic requires a standardized dataset")
    x = train.feature_matrix()
    y = train.label_array().astype(float)
    if y.min() == y.max():
        raise SingleClassError("training set contains a single class")

    w = np.zeros(2)
    b = 0.0
    history = []
    for _ in range(config.max_iters):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, gw, gb = logistic_loss_and_grad(w, b, x, y, config.l2)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"training diverged (non-finite loss) at learning_rate="
                f"{config.learning_rate}")
        history.append(loss)
        if max(float(np.max(np.abs(gw))), abs(gb)) < config.tolerance:
            break
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise DivergenceError(
            f"training diverged (non-finite parameters) at learning_rate="
            f"{config.learning_rate}")
    return LogisticModel(weights=w, bias=float(b),
                         standardization=train.standardization,
                         config=config, loss_history=history)


def predict_proba_logistic(model: LogisticModel, features) -> float:
    return model.predict_proba(features)


@dataclass(frozen=True)
class TreeSplit:
    feature_index: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class TreeLeaf:
    drone_probability: float
    sample_count: int


@dataclass
class TreeModel:
    nodes: tuple                  # preorder; children carry higher indices
    config: TreeConfig
    standardization: Standardization | None = None

    def predict_proba(self, features) -> float:
        x = _as_feature_array(features)
        if self.standardization is not None:
            x = self.standardization.apply_array(x)
        node = self.nodes[0]
        while isinstance(node, TreeSplit):
            node = self.nodes[node.left if x[node.feature_index] < node.threshold
                              else node.right]
        return node.drone_probability

    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, TreeLeaf))


def gini_impurity(count_ones: float, total: float) -> float:
    """Gini impurity of a binary node from its positive count and size."""
    p1 = count_ones / total
    p0 = (total - count_ones) / total
    return 1.0 - p1 * p1 - p0 * p0


def _best_split(x, y, min_leaf):
    """Best (decrease, feature, threshold) or None.

    Candidates are midpoints between consecutive distinct sorted values;
    a candidate whose midpoint rounds onto either neighbor is discarded so
    routing by `value < threshold` always matches the candidate position.
    Ties break toward the lower feature index, then the lower threshold.
    """
    n = len(y)
    total_ones = int(y.sum())
    g_parent = gini_impurity(float(total_ones), float(n))
    best = None
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        cum1 = np.cumsum(y[order], dtype=np.int64)
        boundary = np.nonzero(xs[:-1] != xs[1:])[0]
        if boundary.size == 0:
            continue
        t = (xs[boundary] + xs[boundary + 1]) / 2.0
        nl = (boundary + 1).astype(float)
        nr = float(n) - nl
        c1l = cum1[boundary].astype(float)
        c1r = float(total_ones) - c1l
        p1l = c1l / nl
        p0l = (nl - c1l) / nl
        gl = 1.0 - p1l * p1l - p0l * p0l
        p1r = c1r / nr
        p0r = (nr - c1r) / nr
        gr = 1.0 - p1r * p1r - p0r * p0r
        decrease = g_parent - (nl * gl + nr * gr) / float(n)
        ok = (nl >= min_leaf) & (nr >= min_leaf) & (xs[boundary] < t) & (t <= xs[boundary + 1])
        decrease = np.where(ok, decrease, -np.inf)
        j = int(np.argmax(decrease))  # first maximum, i.e. lowest threshold
        if decrease[j] > 0.0 and (best is None or decrease[j] > best[0]):
            best = (float(decrease[j]), f, float(t[j]))
    return best


def train_tree(train: Dataset, config: TreeConfig = TreeConfig()) -> TreeModel:
    """Greedy CART induction; leaves store the empirical drone fraction.

    Recursion stops at max_depth, at min_leaf, on pure nodes, or when no
    split yields a positive weighted impurity decrease.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if config.max_depth < 0 or config.min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
    x = train.feature_matrix()
    y = train.label_array()
    nodes = []

    def build(idx, depth):
        ones = int(y[idx].sum())
        n = len(idx)
        if depth >= config.max_depth or ones == 0 or ones == n or n < 2 * config.min_leaf:
            nodes.append(TreeLeaf(drone_probability=ones / n, sample_count=n))
            return len(nodes) - 1
        best = _best_split(x[idx], y[idx], config.min_leaf)
        if best is None:
            nodes.append(TreeLeaf(drone_probability=ones / n, sample_count=n))
            return len(nodes) - 1
        _, f, t = best
        here = len(nodes)
        nodes.append(None)
        left_mask = x[idx, f] < t
        left = build(idx[left_mask], depth + 1)
        right = build(idx[~left_mask], depth + 1)
        nodes[here] = TreeSplit(feature_index=f, threshold=t, left=left, right=right)
        return here

    build(np.arange(len(y)), 0)
    return TreeModel(nodes=tuple(nodes), config=config,
                     standardization=train.standardization)


def predict_proba_tree(model: TreeModel, features) -> float:
    return model.predict_proba(features)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    tp: int
    fp: int
    tn: int
    fn: int

    def to_json(self):
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "tp": self.tp, "fp": self.fp,
                "tn": self.tn, "fn": self.fn}


def evaluate(model, test: Dataset, threshold: float = 0.5) -> Metrics:
    """Confusion counts with drone as the positive class; a probability
    exactly at the threshold predicts drone. Zero-denominator precision and
    recall report 0.0."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    tp = fp = tn = fn = 0
    for s in test.samples:
        predicted_drone = model.predict_proba(s.features) >= threshold
        actual_drone = s.label is Label.DRONE
        if predicted_drone and actual_drone:
            tp += 1
        elif predicted_drone:
            fp += 1
        elif actual_drone:
            fn += 1
        else:
            tn += 1
    total = tp + fp + tn + fn
    return Metrics(accuracy=(tp + tn) / total,
                   precision=tp / (tp + fp) if (tp + fp) else 0.0,
                   recall=tp / (tp + fn) if (tp + fn) else 0.0,
                   tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass(frozen=True)
class GridBounds:
    rsrp_std_min: float
    rsrp_std_max: float
    rssi_min: float
    rssi_max: float


@dataclass(frozen=True)
class ProbabilityGrid:
    """Row-major drone probabilities over raw feature coordinates: the outer
    index walks rsrp_std steps, the inner index rssi steps."""
    bounds: GridBounds
    steps_rsrp_std: int
    steps_rssi: int
    values: tuple

    def axis_rsrp_std(self):
        b = self.bounds
        return [b.rsrp_std_min + i * (b.rsrp_std_max - b.rsrp_std_min)
                / (self.steps_rsrp_std - 1) for i in range(self.steps_rsrp_std)]

    def axis_rssi(self):
        b = self.bounds
        return [b.rssi_min + j * (b.rssi_max - b.rssi_min) / (self.steps_rssi - 1)
                for j in range(self.steps_rssi)]

    def value_at(self, i, j) -> float:
        return self.values[i * self.steps_rssi + j]


def probability_grid(model, bounds: GridBounds, steps_rsrp_std: int,
                     steps_rssi: int) -> ProbabilityGrid:
    """Evaluate predict_proba over an inclusive rectangular grid in raw
    feature coordinates."""
    if steps_rsrp_std < 2 or steps_rssi < 2:
        raise ValueError("need >= 2 steps per axis")
    if bounds.rsrp_std_min >= bounds.rsrp_std_max or bounds.rssi_min >= bounds.rssi_max:
        raise ValueError(f"degenerate grid bounds: {bounds}")
    grid = ProbabilityGrid(bounds=bounds, steps_rsrp_std=steps_rsrp_std,
                           steps_rssi=steps_rssi, values=())
    values = []
    for std_val in grid.axis_rsrp_std():
        for rssi_val in grid.axis_rssi():
            values.append(model.predict_proba((rssi_val, std_val)))
    return ProbabilityGrid(bounds=bounds, steps_rsrp_std=steps_rsrp_std,
                           steps_rssi=steps_rssi, values=tuple(values))


GRID_CSV_HEADER = ["rsrp_std_db", "rssi_dbm", "probability"]


def grid_csv_rows(grid: ProbabilityGrid):
    rows = []
    axis_std = grid.axis_rsrp_std()
    axis_rssi = grid.axis_rssi()
    for i, std_val in enumerate(axis_std):
        for j, rssi_val in enumerate(axis_rssi):
            rows.append([std_val, rssi_val, grid.value_at(i, j)])
    return rows


def model_to_json(model) -> dict:
    if isinstance(model, LogisticModel):
        return {"format_version": MODEL_FORMAT_VERSION,
                "type": "logistic",
                "standardization": model.standardization.to_json(),
                "parameters": {"weights": [float(v) for v in model.weights],
                               "bias": model.bias},
                "config": {"learning_rate": model.config.learning_rate,
                           "max_iters": model.config.max_iters,
                           "tolerance": model.config.tolerance,
                           "l2": model.config.l2}}
    if isinstance(model, TreeModel):
        nodes = []
        for node in model.nodes:
            if isinstance(node, TreeSplit):
                nodes.append({"feature_index": node.feature_index,
                              "threshold": node.threshold,
                              "left": node.left, "right": node.right})
            else:
                nodes.append({"drone_probability": node.drone_probability,
                              "sample_count": node.sample_count})
        st = model.standardization
        return {"format_version": MODEL_FORMAT_VERSION,
                "type": "tree",
                "standardization": st.to_json() if st is not None else None,
                "parameters": {"nodes": nodes},
                "config": {"max_depth": model.config.max_depth,
                           "min_leaf": model.config.min_leaf}}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _validate_tree_nodes(nodes):
    n = len(nodes)
    seen = set()

    def walk(i):
        if not 0 <= i < n:
            raise ValueError(f"node index {i} out of range 0..{n - 1}")
        if i in seen:
            raise ValueError(f"node index {i} referenced twice (cycle or overlap)")
        seen.add(i)
        node = nodes[i]
        if isinstance(node, TreeSplit):
            walk(node.left)
            walk(node.right)
        else:
            if not 0.0 <= node.drone_probability <= 1.0:
                raise ValueError(
                    f"leaf probability {node.drone_probability} outside [0, 1]")

    walk(0)
    if len(seen) != n:
        raise ValueError(f"{n - len(seen)} unreachable nodes in tree")


def model_from_json(obj) -> "LogisticModel | TreeModel":
    version = obj.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}; "
                         f"this build reads version {MODEL_FORMAT_VERSION}")
    kind = obj.get("type")
    if kind == "logistic":
        cfg = obj["config"]
        return LogisticModel(
            weights=np.array(obj["parameters"]["weights"], dtype=float),
            bias=float(obj["parameters"]["bias"]),
            standardization=Standardization.from_json(obj["standardization"]),
            config=LogisticConfig(learning_rate=cfg["learning_rate"],
                                  max_iters=cfg["max_iters"],
                                  tolerance=cfg["tolerance"], l2=cfg["l2"]))
    if kind == "tree":
        nodes = []
        for raw in obj["parameters"]["nodes"]:
            if "feature_index" in raw:
                if raw["feature_index"] not in (0, 1):
                    raise ValueError(f"bad feature_index {raw['feature_index']}")
                nodes.append(TreeSplit(feature_index=raw["feature_index"],
                                       threshold=float(raw["threshold"]),
                                       left=int(raw["left"]), right=int(raw["right"])))
            else:
                nodes.append(TreeLeaf(drone_probability=float(raw["drone_probability"]),
                                      sample_count=int(raw["sample_count"])))
        _validate_tree_nodes(nodes)
        st = obj.get("standardization")
        cfg = obj["config"]
        return TreeModel(nodes=tuple(nodes),
                         config=TreeConfig(max_depth=cfg["max_depth"],
                                           min_leaf=cfg["min_leaf"]),
                         standardization=Standardization.from_json(st)
                         if st is not None else None)
    raise ValueError(f"unknown model type {kind!r}")


def save_model(model, path) -> None:
    atomic_write_text(path, canonical_json(model_to_json(model)))


def load_model(path):
    with open(path) as fh:
        return model_from_json(json.load(fh))
