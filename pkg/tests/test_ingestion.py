import numpy as np
import pytest

from data.ingestion import ingest_csv, load_dataset, write_vector_csv
from data.labeled_dataset import LabeledDataset
from utils.errors import ConfigError, DataError


def write(tmp_path, text, name='data.csv'):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestVectorLayout:
    def test_header_only_file_is_empty(self, tmp_path):
        ds = ingest_csv(write(tmp_path, 'label,f1,f2\n'))
        assert len(ds) == 0 and ds.input_dim == 2

    def test_parses_rows(self, tmp_path):
        ds = ingest_csv(write(tmp_path, 'label,f1,f2\n0,1.5,-2\n3, 0.25,4e-1\n'))
        np.testing.assert_array_equal(ds.samples, [[1.5, -2.0], [0.25, 0.4]])
        assert ds.labels.tolist() == [0, 3]

    @pytest.mark.parametrize('cell', ['nan', 'abc', 'inf', ''])
    def test_bad_cell_reports_line_and_column(self, tmp_path, cell):
        path = write(tmp_path, f'label,f1,f2\n0,1.0,2.0\n1,{cell},3.0\n')
        with pytest.raises(DataError) as excinfo:
            ingest_csv(path)
        assert (excinfo.value.line, excinfo.value.column) == (3, 'f1')

    def test_fractional_label(self, tmp_path):
        with pytest.raises(DataError) as excinfo:
            ingest_csv(write(tmp_path, 'label,f1\n0.5,1.0\n'))
        assert excinfo.value.column == 'label'

    def test_feature_columns_must_be_numbered(self, tmp_path):
        with pytest.raises(DataError):
            ingest_csv(write(tmp_path, 'label,f1,f3\n0,1,2\n'))

    def test_sidecar_round_trip(self, tmp_path, tiny_dataset):
        path = write_vector_csv(tmp_path / 'bench.csv', tiny_dataset)
        assert LabeledDataset.sidecar_path(path).exists()
        loaded = load_dataset(path)
        np.testing.assert_allclose(loaded.samples, tiny_dataset.samples, rtol=1e-15, atol=0)
        np.testing.assert_array_equal(loaded.labels, tiny_dataset.labels)
        assert loaded.class_names == tiny_dataset.class_names
        assert loaded.provenance['known_style_ids'] == tiny_dataset.provenance['known_style_ids']

    def test_without_sidecar(self, tmp_path):
        ds = load_dataset(write(tmp_path, 'label,f1\n0,1\n1,2\n'))
        assert ds.provenance['source'].endswith('data.csv')
        assert ds.class_names is None


SIGNAL_HEADER = 'subject,trial,label,t,ch1,ch2\n'


class TestSignalLayout:
    def test_header_only_file_has_no_recordings(self, tmp_path):
        assert ingest_csv(write(tmp_path, SIGNAL_HEADER)) == []
        with pytest.raises(DataError):
            load_dataset(tmp_path / 'data.csv')

    def test_trials_become_recordings_sorted_by_time(self, tmp_path):
        rows = ['1,1,0,1,10,20', '1,1,0,0,11,21', '1,2,0,0,5,6', '1,2,0,1,7,8', '1,1,0,2,12,22']
        recordings = ingest_csv(write(tmp_path, SIGNAL_HEADER + '\n'.join(rows) + '\n'))
        assert len(recordings) == 2
        first = recordings[0]
        assert (first.subject, first.trial, first.label, first.channels, first.length) == (1, 1, 0, 2, 3)
        np.testing.assert_array_equal(first.values, [[11, 10, 12], [21, 20, 22]])

    def test_windowed_dataset(self, tmp_path):
        rows = [f'0,{trial},{label},{t},{t},{-t}' for label in range(2) for trial in range(2) for t in range(6)]
        ds = load_dataset(write(tmp_path, SIGNAL_HEADER + '\n'.join(rows) + '\n'), win=4, stride=2)
        assert len(ds) == 4 * 2
        assert ds.input_dim == 8
        assert ds.groups is not None

    def test_bad_channel_cell(self, tmp_path):
        with pytest.raises(DataError) as excinfo:
            ingest_csv(write(tmp_path, SIGNAL_HEADER + '1,1,0,0,1.0,x\n'))
        assert (excinfo.value.line, excinfo.value.column) == (2, 'ch2')

    def test_forced_schema_missing_columns(self, tmp_path):
        with pytest.raises(DataError):
            ingest_csv(write(tmp_path, 'label,f1\n0,1\n'), schema='signal')


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / 'absent.csv')


def test_unknown_schema(tmp_path):
    with pytest.raises(ConfigError):
        ingest_csv(write(tmp_path, 'label,f1\n0,1\n'), schema='image')


def test_unrecognized_header(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(write(tmp_path, 'a,b\n1,2\n'))
