import numpy as np
import pytest

from data.labeled_dataset import LabeledDataset
from data.signals import SignalRecording, sliding_window, window_count, windows_to_dataset
from data.splits import INDEX_LISTS, OpenSetSplit, hold_out_validation, make_split
from data.synthetic import SyntheticConfig, generate_synthetic, novel_direction
from utils.errors import ConfigError, ContractError, DataError, DimensionError


def labeled(n_classes, per_class, dim=3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_classes), per_class)
    return LabeledDataset(samples=rng.standard_normal((len(labels), dim)), labels=labels)


class TestLabeledDataset:
    def test_shape_checks(self):
        with pytest.raises(DimensionError):
            LabeledDataset(samples=np.ones(4), labels=np.zeros(4))
        with pytest.raises(DimensionError):
            LabeledDataset(samples=np.ones((4, 2)), labels=np.zeros(3))
        with pytest.raises(DimensionError):
            LabeledDataset(samples=np.ones((4, 2)), labels=np.zeros(4), groups=[0, 1])

    def test_class_names_must_cover_labels(self):
        with pytest.raises(DataError):
            LabeledDataset(samples=np.ones((2, 2)), labels=[0, 1], class_names={0: 'rest'})

    def test_accessors(self):
        ds = labeled(3, 4, dim=5)
        assert (len(ds), ds.input_dim, ds.class_ids) == (12, 5, [0, 1, 2])
        np.testing.assert_array_equal(ds.indices_of(1), [4, 5, 6, 7])


class TestSynthetic:
    def test_deterministic_per_seed(self):
        config = SyntheticConfig(samples_per_class=10, seed=4)
        first, second = generate_synthetic(config), generate_synthetic(config)
        np.testing.assert_array_equal(first.samples, second.samples)
        other = generate_synthetic(SyntheticConfig(samples_per_class=10, seed=5))
        assert not np.array_equal(first.samples, other.samples)

    def test_layout(self):
        config = SyntheticConfig(n_total_classes=7, n_known_style=4, raw_dim=5, samples_per_class=9)
        ds = generate_synthetic(config)
        assert ds.samples.shape == (63, 5)
        assert ds.class_ids == list(range(7))
        assert ds.provenance['known_style_ids'] == [0, 1, 2, 3]
        assert ds.class_names[0] == 'known_style_0' and ds.class_names[6] == 'unknown_style_6'
        assert SyntheticConfig.from_dict(ds.provenance['config']) == config

    def test_class_means_converge(self):
        config = SyntheticConfig(samples_per_class=400, cluster_spread=0.5, seed=1)
        ds = generate_synthetic(config)
        means = np.asarray(ds.provenance['class_means'])
        bound = 3 * config.cluster_spread / np.sqrt(config.samples_per_class)
        for class_id in ds.class_ids:
            deviation = ds.samples[ds.indices_of(class_id)].mean(axis=0) - means[class_id]
            assert np.sqrt(np.mean(deviation ** 2)) < bound

    def test_no_mixing_gives_unrelated_unknowns(self):
        cosines = []
        for seed in range(20):
            ds = generate_synthetic(SyntheticConfig(samples_per_class=1, pseudo_similarity_mix=0.0, seed=seed))
            means = np.asarray(ds.provenance['class_means'])
            unit = means / np.linalg.norm(means, axis=1, keepdims=True)
            known, unknown = unit[:8], unit[8:]
            cosines.extend((unknown @ known.T).ravel())
        assert abs(np.mean(cosines)) < 0.05

    def test_full_mixing_places_unknowns_between_parents(self):
        config = SyntheticConfig(samples_per_class=3, pseudo_similarity_mix=1.0, cluster_spread=0.0, seed=2)
        ds = generate_synthetic(config)
        means = np.asarray(ds.provenance['class_means'])
        for entry in ds.provenance['unknown_parents']:
            a, b = entry['parents']
            expected = entry['weight'] * means[a] + (1.0 - entry['weight']) * means[b]
            for row in ds.samples[ds.indices_of(entry['class_id'])]:
                assert np.linalg.norm(row - expected) < 1e-9

    def test_fully_shared_novelty_gives_one_direction(self):
        config = SyntheticConfig(samples_per_class=2, pseudo_similarity_mix=0.0, novel_shared=1.0,
                                 cluster_spread=0.0, seed=6)
        ds = generate_synthetic(config)
        means = np.asarray(ds.provenance['class_means'])
        shared = np.asarray(ds.provenance['shared_novel_direction'])
        for class_id in range(8, 13):
            np.testing.assert_allclose(means[class_id], shared, atol=1e-12)

    def test_novel_direction_share(self, rng):
        shared = np.zeros(400)
        shared[0] = 1.0
        own = rng.standard_normal(400)
        own /= np.linalg.norm(own)
        direction = novel_direction(shared, own, 0.8)
        assert np.linalg.norm(direction) == pytest.approx(1.0)
        # own is nearly orthogonal to shared in 400 dimensions
        assert direction[0] ** 2 == pytest.approx(0.8, abs=0.05)
        np.testing.assert_array_equal(novel_direction(shared, own, 0.0), own / np.linalg.norm(own))

    @pytest.mark.parametrize('values', [
        {'n_total_classes': 3},
        {'n_known_style': 12},
        {'cluster_spread': -0.1},
        {'pseudo_similarity_mix': 1.5},
        {'novel_shared': -0.2},
        {'mean_norm': 0.0},
    ])
    def test_invalid_config(self, values):
        with pytest.raises(ConfigError):
            SyntheticConfig(**values)

    def test_unknown_config_key(self):
        with pytest.raises(ConfigError):
            SyntheticConfig.from_dict({'n_classes': 5})


class TestWindows:
    def test_count_and_content(self):
        rec = SignalRecording(values=np.arange(20.0).reshape(2, 10), label=0, trial=1, subject=1)
        windows = sliding_window(rec, win=4, stride=3)
        assert len(windows) == window_count(10, 4, 3) == 3
        np.testing.assert_array_equal(windows[0], [0, 1, 2, 3, 10, 11, 12, 13])
        np.testing.assert_array_equal(windows[2], [6, 7, 8, 9, 16, 17, 18, 19])

    def test_count_formula(self, rng):
        for _ in range(50):
            length = int(rng.integers(1, 60))
            win = int(rng.integers(1, length + 1))
            stride = int(rng.integers(1, 10))
            rec = SignalRecording(values=rng.standard_normal((3, length)), label=0, trial=0, subject=0)
            windows = sliding_window(rec, win, stride)
            assert len(windows) == (length - win) // stride + 1
            assert all(w.shape == (3 * win,) for w in windows)

    def test_window_equal_to_length(self):
        rec = SignalRecording(values=np.ones((2, 5)), label=0, trial=0, subject=0)
        assert len(sliding_window(rec, win=5, stride=2)) == 1

    @pytest.mark.parametrize('win, stride', [(11, 1), (0, 1), (4, 0)])
    def test_invalid_window(self, win, stride):
        rec = SignalRecording(values=np.ones((2, 10)), label=0, trial=0, subject=0)
        with pytest.raises(DataError):
            sliding_window(rec, win, stride)

    def test_recording_must_be_matrix(self):
        with pytest.raises(DimensionError):
            SignalRecording(values=np.ones(5), label=0, trial=0, subject=0)

    def test_dataset_groups_by_trial(self):
        recordings = [SignalRecording(values=np.ones((2, 10)), label=label, trial=trial, subject=1)
                      for label in range(2) for trial in range(2)]
        ds = windows_to_dataset(recordings, win=4, stride=3)
        assert len(ds) == 12
        assert ds.input_dim == 8
        assert sorted(set(ds.groups.tolist())) == [0, 1]

    def test_channel_counts_must_agree(self):
        recordings = [SignalRecording(values=np.ones((2, 10)), label=0, trial=0, subject=0),
                      SignalRecording(values=np.ones((3, 10)), label=1, trial=0, subject=0)]
        with pytest.raises(DataError):
            windows_to_dataset(recordings, win=4, stride=3)


def recorded_dataset(n_classes=5, trials=3):
    recordings = [
        SignalRecording(values=np.full((2, 10), float(label)), label=label, trial=trial, subject=0)
        for label in range(n_classes) for trial in range(trials)
    ]
    return windows_to_dataset(recordings, win=4, stride=3)


class TestSplits:
    @pytest.mark.parametrize('n_classes, n_known, expected', [(26, 10, (10, 1, 15)), (49, 15, (15, 1, 33))])
    def test_class_counts(self, n_classes, n_known, expected):
        split = make_split(labeled(n_classes, 4), n_known, 0.3, seed=0)
        assert (len(split.known_class_ids), 1, len(split.unknown_class_ids)) == expected

    def test_partition_holds_for_many_seeds(self, rng):
        for seed in range(100):
            n_classes = int(rng.integers(4, 12))
            ds = labeled(n_classes, int(rng.integers(2, 8)), seed=seed)
            n_known = int(rng.integers(1, n_classes - 1))
            split = make_split(ds, n_known, float(rng.uniform(0.05, 0.95)), seed=seed)
            indices = [i for name in INDEX_LISTS for i in getattr(split, name)]
            assert sorted(indices) == list(range(len(ds)))
            assert len(set(split.known_class_ids) | set(split.unknown_class_ids) | {split.background_class_id}) \
                == n_classes
            for class_id in split.known_class_ids:
                members = set(ds.indices_of(class_id).tolist())
                assert members & set(split.train_known) and members & set(split.test_known)

    def test_deterministic_per_seed(self, tiny_dataset):
        first = make_split(tiny_dataset, 3, 0.3, seed=8)
        assert first.to_dict() == make_split(tiny_dataset, 3, 0.3, seed=8).to_dict()

    def test_known_candidates_restrict_known_classes(self, tiny_dataset):
        for seed in range(10):
            split = make_split(tiny_dataset, 3, 0.3, seed=seed, known_candidates=[0, 1, 2, 3])
            assert set(split.known_class_ids) <= {0, 1, 2, 3}

    def test_background_in_test(self, tiny_dataset):
        split = make_split(tiny_dataset, 3, 0.3, seed=1, include_background_in_test=True)
        background = set(tiny_dataset.indices_of(split.background_class_id).tolist())
        assert background & set(split.test_unknown)
        assert background & set(split.train_background)

    def test_groups_stay_whole(self):
        ds = recorded_dataset()
        split = make_split(ds, 2, 0.34, seed=3)
        train_groups = {(ds.labels[i], ds.groups[i]) for i in split.train_known}
        test_groups = {(ds.labels[i], ds.groups[i]) for i in split.test_known}
        assert train_groups and test_groups
        assert not train_groups & test_groups

    @pytest.mark.parametrize('n_known, fraction', [(4, 0.3), (0, 0.3), (2, 0.0), (2, 1.0)])
    def test_invalid_requests(self, n_known, fraction):
        with pytest.raises(DataError):
            make_split(labeled(5, 4), n_known, fraction, seed=0)

    def test_singleton_class_rejected(self):
        ds = LabeledDataset(samples=np.ones((7, 2)), labels=[0, 0, 1, 1, 2, 2, 3])
        with pytest.raises(DataError):
            make_split(ds, 1, 0.5, seed=0)

    def test_remap(self, tiny_split):
        assert tiny_split.remap(tiny_split.known_class_ids).tolist() == [0, 1, 2]
        with pytest.raises(DataError):
            tiny_split.remap([tiny_split.background_class_id])

    def test_validate_catches_overlap(self, tiny_split, tiny_dataset):
        payload = tiny_split.to_dict()
        payload['test_known'] = payload['test_known'] + payload['train_known'][:1]
        with pytest.raises(ContractError):
            OpenSetSplit.from_dict(payload).validate(tiny_dataset)

    def test_manifest_round_trip_and_missing_keys(self, tiny_split):
        assert OpenSetSplit.from_dict(tiny_split.to_dict()) == tiny_split
        payload = tiny_split.to_dict()
        del payload['train_background']
        with pytest.raises(DataError):
            OpenSetSplit.from_dict(payload)

    def test_hold_out_validation(self, tiny_split, tiny_dataset):
        split = hold_out_validation(tiny_split, tiny_dataset, 0.25, seed=0)
        assert split.validation_known
        assert sorted(split.train_known + split.validation_known) == sorted(tiny_split.train_known)
        split.validate(tiny_dataset)
        assert hold_out_validation(tiny_split, tiny_dataset, 0.0, seed=0) is tiny_split
