"""Two-feature representation for drone detection and dataset assembly.

Each radio sample reduces to (RSSI, RSRP STD): the wideband received power
and the population standard deviation of the eight strongest per-cell RSRPs.
Labels are binary -- aerial drops are drones, indoor and outdoor drops are
terrestrial.
"""

import csv
import enum
from dataclasses import dataclass, replace
from math import sqrt

import numpy as np

from droneradio import _rng
from droneradio.deployment import UeClass, place_ues
from droneradio.radio import RadioSample, compute_samples

FEATURE_NAMES = ("rssi_dbm", "rsrp_std_db")


class Label(enum.Enum):
    DRONE = "drone"
    TERRESTRIAL = "terrestrial"


class DegenerateFeatureError(ValueError):
    """A feature column is constant, so it cannot be standardized."""


@dataclass(frozen=True)
class FeatureVector:
    rssi_dbm: float
    rsrp_std_db: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rssi_dbm, self.rsrp_std_db])


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: Label
    height_m: float
    ue_class: UeClass
    drop_index: int


@dataclass(frozen=True)
class Standardization:
    """Per-feature (mean, std) fitted on a training split."""
    mean: tuple
    std: tuple

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        return (x - np.asarray(self.mean)) / np.asarray(self.std)

    def invert_array(self, z: np.ndarray) -> np.ndarray:
        return z * np.asarray(self.std) + np.asarray(self.mean)

    def to_json(self):
        return {"feature_names": list(FEATURE_NAMES),
                "mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_json(cls, obj):
        return cls(mean=tuple(obj["mean"]), std=tuple(obj["std"]))


@dataclass(frozen=True)
class Dataset:
    samples: tuple
    standardization: Standardization | None = None

    def __len__(self):
        return len(self.samples)

    def feature_matrix(self) -> np.ndarray:
        return np.array([[s.features.rssi_dbm, s.features.rsrp_std_db]
                         for s in self.samples]).reshape(len(self.samples), 2)

    def label_array(self) -> np.ndarray:
        return np.array([1 if s.label is Label.DRONE else 0 for s in self.samples],
                        dtype=np.int64)

    def heights(self) -> np.ndarray:
        return np.array([s.height_m for s in self.samples])


def extract_features(sample: RadioSample) -> FeatureVector:
    """RSSI plus the population std of the min(8, available) strongest RSRPs.

    Needs at least two per-cell measurements; the truncation to the top 8
    makes the feature insensitive to weak far cells.
    """
    if len(sample.cells) < 2:
        raise ValueError(
            f"need >= 2 per-cell measurements, got {len(sample.cells)}")
    top = [c.rsrp_dbm for c in sample.cells[:8]]
    n = len(top)
    mean = sum(top) / n
    var = sum((v - mean) * (v - mean) for v in top) / n
    return FeatureVector(rssi_dbm=sample.rssi_dbm, rsrp_std_db=sqrt(var))


def label_for(ue_class: UeClass) -> Label:
    return Label.DRONE if ue_class is UeClass.AERIAL else Label.TERRESTRIAL


def dataset_from_samples(samples) -> Dataset:
    """Label and featurize already-computed radio samples."""
    labeled = tuple(
        LabeledSample(features=extract_features(s), label=label_for(s.drop.ue_class),
                      height_m=s.drop.height_m, ue_class=s.drop.ue_class,
                      drop_index=s.drop.drop_index)
        for s in samples)
    return Dataset(samples=labeled)


def generate_dataset(layout, spec, params, seed: int, threads: int = 1) -> Dataset:
    """Simulate one labeled sample per drop; deterministic for a fixed seed."""
    drops = place_ues(layout, spec, seed)
    return dataset_from_samples(compute_samples(layout, drops, params, seed,
                                                threads=threads))


def standardize(train: Dataset):
    """Z-score the feature columns; returns (standardized dataset, params).

    Population std. A constant column raises DegenerateFeatureError since
    its z-scores would be undefined.
    """
    if len(train) == 0:
        raise ValueError("cannot standardize an empty dataset")
    x = train.feature_matrix()
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    for k, name in enumerate(FEATURE_NAMES):
        if std[k] == 0.0:
            raise DegenerateFeatureError(
                f"feature {name} is constant over the training set")
    st = Standardization(mean=tuple(float(v) for v in mean),
                         std=tuple(float(v) for v in std))
    return apply_standardization(train, st), st


def apply_standardization(dataset: Dataset, st: Standardization) -> Dataset:
    samples = []
    for s in dataset.samples:
        z = st.apply_array(s.features.as_array())
        samples.append(replace(s, features=FeatureVector(float(z[0]), float(z[1]))))
    return Dataset(samples=tuple(samples), standardization=st)


def split_train_test(dataset: Dataset, test_fraction: float = 0.3, seed: int = 0):
    """Stratified split by (ue_class, height); deterministic for a seed.

    Returns (train, test), both unstandardized and ordered by drop_index.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    strata = {}
    for i, s in enumerate(dataset.samples):
        strata.setdefault((s.ue_class.value, s.height_m), []).append(i)
    test_idx = set()
    for stratum_ix, key in enumerate(sorted(strata)):
        stream = _rng.Stream(_rng.stream_key(seed, "features.split", stratum_ix))
        members = _rng.shuffled(strata[key], stream)
        n_test = round(len(members) * test_fraction)
        test_idx.update(members[:n_test])
    train = tuple(s for i, s in enumerate(dataset.samples) if i not in test_idx)
    test = tuple(s for i, s in enumerate(dataset.samples) if i in test_idx)
    return Dataset(samples=train), Dataset(samples=test)


DATASET_CSV_HEADER = ["drop_index", "ue_class", "height_m",
                      "rssi_dbm", "rsrp_std_db", "label"]


def dataset_csv_rows(dataset: Dataset):
    return [[s.drop_index, s.ue_class.value, s.height_m,
             s.features.rssi_dbm, s.features.rsrp_std_db, s.label.value]
            for s in dataset.samples]


def dataset_from_csv(path) -> Dataset:
    """Read the interchange CSV; accepts externally produced files that
    follow the schema."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header "
                             f"{','.join(DATASET_CSV_HEADER)}") from None
        if header != DATASET_CSV_HEADER:
            raise ValueError(f"{path}: bad header {header!r}, expected "
                             f"{DATASET_CSV_HEADER!r}")
        samples = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(DATASET_CSV_HEADER):
                raise ValueError(f"{path}: line {line_no}: expected "
                                 f"{len(DATASET_CSV_HEADER)} fields, got {len(row)}")
            try:
                ue_class = UeClass(row[1])
                label = Label(row[5])
                height = float(row[2])
                features = FeatureVector(rssi_dbm=float(row[3]),
                                         rsrp_std_db=float(row[4]))
                drop_index = int(row[0])
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: {exc}") from None
            if (label is Label.DRONE) != (ue_class is UeClass.AERIAL):
                raise ValueError(f"{path}: line {line_no}: label {label.value!r} "
                                 f"inconsistent with ue_class {ue_class.value!r}")
            samples.append(LabeledSample(features=features, label=label,
                                         height_m=height, ue_class=ue_class,
                                         drop_index=drop_index))
    return Dataset(samples=tuple(samples))
