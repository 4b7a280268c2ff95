from .labeled_dataset import LabeledDataset
from .synthetic import SyntheticConfig, generate_synthetic
from .signals import SignalRecording, sliding_window, window_count, windows_to_dataset
from .ingestion import ingest_csv, load_dataset, write_vector_csv
from .splits import OpenSetSplit, hold_out_validation, make_split
