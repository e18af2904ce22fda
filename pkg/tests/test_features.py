import numpy as np
import pytest

from droneradio.deployment import PlacementSpec, UeClass, UeDrop, build_hex_layout
from droneradio.features import (DATASET_CSV_HEADER, Dataset, DegenerateFeatureError,
                                 FeatureVector, Label, LabeledSample,
                                 apply_standardization, dataset_csv_rows,
                                 dataset_from_csv, extract_features,
                                 generate_dataset, split_train_test, standardize)
from droneradio.radio import ChannelParams, PerCellMeasurement, RadioSample


def make_sample(rsrps, rssi=-50.0):
    ordered = sorted(range(len(rsrps)), key=lambda i: (-rsrps[i], i))
    cells = tuple(PerCellMeasurement(cell_id=i, rsrp_dbm=rsrps[i],
                                     rx_power_dbm=rsrps[i] + 30.0, los=True)
                  for i in ordered)
    drop = UeDrop(position=(0.0, 0.0, 1.5), ue_class=UeClass.OUTDOOR, drop_index=0)
    return RadioSample(drop=drop, cells=cells, rssi_dbm=rssi,
                       serving_cell_id=cells[0].cell_id, sinr_db=0.0)


def make_labeled(features, label=Label.TERRESTRIAL, height=1.5,
                 ue_class=UeClass.OUTDOOR, drop_index=0):
    return LabeledSample(features=FeatureVector(*features), label=label,
                         height_m=height, ue_class=ue_class, drop_index=drop_index)


def test_identical_rsrps_give_zero_std():
    fv = extract_features(make_sample([-80.0] * 8))
    assert fv.rsrp_std_db == 0.0
    assert fv.rssi_dbm == -50.0


def test_symmetric_two_point_distribution():
    fv = extract_features(make_sample([-70.0] * 4 + [-90.0] * 4))
    assert fv.rsrp_std_db == 10.0


def test_population_not_sample_std():
    fv = extract_features(make_sample([0.0] * 4 + [10.0] * 4))
    assert fv.rsrp_std_db == 5.0  # sample std would be 5.345


def test_truncation_to_eight_strongest():
    base = [-60.0, -62.0, -64.0, -66.0, -68.0, -70.0, -72.0, -74.0]
    a = extract_features(make_sample(base + [-90.0, -95.0]))
    b = extract_features(make_sample(base + [-120.0, -140.0]))
    assert a.rsrp_std_db == b.rsrp_std_db


def test_fewer_than_eight_uses_available():
    fv = extract_features(make_sample([-70.0, -90.0]))
    assert fv.rsrp_std_db == 10.0


def test_rejects_single_cell():
    with pytest.raises(ValueError):
        extract_features(make_sample([-80.0]))


def test_permutation_invariance_through_sorting():
    rng = np.random.default_rng(0)
    values = list(rng.uniform(-110.0, -60.0, 12))
    reference = extract_features(make_sample(values))
    for _ in range(5):
        perm = list(rng.permutation(values))
        assert extract_features(make_sample(perm)) == reference


def test_standardize_two_point_example():
    ds = Dataset(samples=(make_labeled((0.0, 5.0)), make_labeled((2.0, 7.0))))
    z, st = standardize(ds)
    x = z.feature_matrix()
    assert x == pytest.approx(np.array([[-1.0, -1.0], [1.0, 1.0]]))
    assert st.mean == (1.0, 6.0)
    assert st.std == (1.0, 1.0)


def test_standardized_columns_are_zero_mean_unit_std():
    rng = np.random.default_rng(1)
    samples = tuple(make_labeled((float(a), float(b)), drop_index=i)
                    for i, (a, b) in enumerate(rng.normal(0, 5, (40, 2))))
    z, _ = standardize(Dataset(samples=samples))
    x = z.feature_matrix()
    assert np.abs(x.mean(axis=0)).max() < 1e-9
    assert np.abs(x.std(axis=0) - 1.0).max() < 1e-9


def test_standardization_round_trips():
    rng = np.random.default_rng(2)
    samples = tuple(make_labeled((float(a), float(b)), drop_index=i)
                    for i, (a, b) in enumerate(rng.normal(-60, 8, (25, 2))))
    ds = Dataset(samples=samples)
    z, st = standardize(ds)
    assert apply_standardization(ds, st) == z
    x = ds.feature_matrix()
    assert st.invert_array(st.apply_array(x)) == pytest.approx(x, abs=1e-9)


def test_degenerate_feature_errors():
    with pytest.raises(DegenerateFeatureError):
        standardize(Dataset(samples=(make_labeled((1.0, 2.0)),)))
    constant = Dataset(samples=(make_labeled((1.0, 2.0)),
                                make_labeled((1.0, 3.0), drop_index=1)))
    with pytest.raises(DegenerateFeatureError):
        standardize(constant)


def test_generate_dataset_empty_and_deterministic():
    layout = build_hex_layout(1, 500.0)
    params = ChannelParams()
    assert len(generate_dataset(layout, PlacementSpec(), params, 0)) == 0
    spec = PlacementSpec(outdoor=30, aerial_per_height=30,
                         aerial_heights_m=(300.0,))
    a = generate_dataset(layout, spec, params, 5)
    b = generate_dataset(layout, spec, params, 5)
    assert a == b
    assert generate_dataset(layout, spec, params, 6) != a


def test_labels_match_classes():
    layout = build_hex_layout(1, 500.0)
    spec = PlacementSpec(indoor=5, outdoor=5, aerial_per_height=5,
                         aerial_heights_m=(60.0,))
    ds = generate_dataset(layout, spec, ChannelParams(), 3)
    for s in ds.samples:
        assert (s.label is Label.DRONE) == (s.ue_class is UeClass.AERIAL)


def test_aerial_and_outdoor_centroids_separate():
    layout = build_hex_layout(1, 500.0)
    spec = PlacementSpec(outdoor=60, aerial_per_height=60,
                         aerial_heights_m=(300.0,))
    ds = generate_dataset(layout, spec, ChannelParams(), 8)
    z, _ = standardize(ds)
    x = z.feature_matrix()
    y = z.label_array()
    # oracle: plain centroid arithmetic on the standardized columns
    drone = x[y == 1].mean(axis=0)
    terrestrial = x[y == 0].mean(axis=0)
    assert float(np.linalg.norm(drone - terrestrial)) > 0.5


def test_split_is_stratified_and_deterministic():
    layout = build_hex_layout(1, 500.0)
    spec = PlacementSpec(indoor=20, outdoor=20, aerial_per_height=20,
                         aerial_heights_m=(15.0, 300.0))
    ds = generate_dataset(layout, spec, ChannelParams(), 4)
    train, test = split_train_test(ds, test_fraction=0.3, seed=1)
    train2, test2 = split_train_test(ds, test_fraction=0.3, seed=1)
    assert (train, test) == (train2, test2)
    assert len(train) + len(test) == len(ds)
    train_ids = {s.drop_index for s in train.samples}
    test_ids = {s.drop_index for s in test.samples}
    assert not train_ids & test_ids
    for ue_class, height in [(UeClass.INDOOR, 1.5), (UeClass.OUTDOOR, 1.5),
                             (UeClass.AERIAL, 15.0), (UeClass.AERIAL, 300.0)]:
        members = [s for s in ds.samples
                   if s.ue_class is ue_class and s.height_m == height]
        picked = [s for s in test.samples
                  if s.ue_class is ue_class and s.height_m == height]
        assert len(picked) == round(len(members) * 0.3)
    with pytest.raises(ValueError):
        split_train_test(ds, test_fraction=1.0)


def test_dataset_csv_round_trip(tmp_path):
    layout = build_hex_layout(1, 500.0)
    spec = PlacementSpec(indoor=4, outdoor=4, aerial_per_height=4,
                         aerial_heights_m=(100.0,))
    ds = generate_dataset(layout, spec, ChannelParams(), 11)
    path = tmp_path / "dataset.csv"
    from droneradio._io import write_csv
    write_csv(path, DATASET_CSV_HEADER, dataset_csv_rows(ds))
    loaded = dataset_from_csv(path)
    assert loaded.samples == ds.samples


def test_dataset_csv_rejects_bad_content(tmp_path):
    header = ",".join(DATASET_CSV_HEADER)
    bad_header = tmp_path / "bad_header.csv"
    bad_header.write_text("a,b\n")
    with pytest.raises(ValueError):
        dataset_from_csv(bad_header)
    inconsistent = tmp_path / "label.csv"
    inconsistent.write_text(header + "\n0,outdoor,1.5,-50.0,3.0,drone\n")
    with pytest.raises(ValueError, match="inconsistent"):
        dataset_from_csv(inconsistent)
    unparsable = tmp_path / "parse.csv"
    unparsable.write_text(header + "\n0,outdoor,xx,-50.0,3.0,terrestrial\n")
    with pytest.raises(ValueError, match="line 2"):
        dataset_from_csv(unparsable)
