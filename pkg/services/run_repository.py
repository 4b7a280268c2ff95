import hashlib
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from interfaces.run_repository_interface import IRunRepository
from utils.errors import DataError
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

CONFIG_FILE = 'config.json'
SPLIT_FILE = 'split.json'
STEPS_FILE = 'steps.log'
HISTORY_FILE = 'history.json'
CHECKPOINT_FILE = 'model.ckpt'
SNAPSHOT_DIR = 'snapshots'


def config_digest(config: Dict[str, Any]) -> str:
    """md5 of the canonical (sorted-key) JSON of a config"""
    return hashlib.md5(ReportWriter.dumps(config).encode('utf-8')).hexdigest()


class RunDirectory(IRunRepository):
    """Run artifacts laid out under one output directory"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._steps = None

    @property
    def checkpoint_path(self) -> Path:
        return self.root / CHECKPOINT_FILE

    @property
    def split_path(self) -> Path:
        return self.root / SPLIT_FILE

    def save_config(self, config: Dict[str, Any]) -> None:
        """Write the resolved config together with its md5 digest"""
        ReportWriter.write_json(self.root / CONFIG_FILE, {'config': config, 'config_md5': config_digest(config)})

    def load_config(self) -> Dict[str, Any]:
        """Read config.json back; a missing file or a digest mismatch raises DataError"""
        path = self.root / CONFIG_FILE
        if not path.exists():
            raise DataError(f"no {CONFIG_FILE} in {self.root}")
        payload = ReportWriter.read_json(path)
        config = payload.get('config')
        if config is None or payload.get('config_md5') != config_digest(config):
            raise DataError(f"{path} fails its md5 check")
        return config

    def save_split(self, split: Dict[str, Any]) -> None:
        ReportWriter.write_json(self.split_path, split)

    def append_step(self, line: str) -> None:
        """Append one step line, truncating the log on the first call of a run"""
        if self._steps is None:
            self._steps = open(self.root / STEPS_FILE, 'w', encoding='utf-8')
        self._steps.write(line + '\n')

    def save_snapshot(self, epoch: int, report: Dict[str, Any]) -> None:
        ReportWriter.write_json(self.root / SNAPSHOT_DIR / f"epoch_{epoch:04d}.json", report)

    def load_snapshots(self) -> List[Dict[str, Any]]:
        return [ReportWriter.read_json(p) for p in sorted((self.root / SNAPSHOT_DIR).glob('epoch_*.json'))]

    def save_history(self, history: Dict[str, Any]) -> None:
        self.flush()
        ReportWriter.write_json(self.root / HISTORY_FILE, history)
        logger.debug(f"[RunDirectory] History saved to {self.root / HISTORY_FILE}")

    def flush(self) -> None:
        if self._steps is not None:
            self._steps.flush()

    def close(self) -> None:
        if self._steps is not None:
            self._steps.close()
            self._steps = None

    def __enter__(self) -> 'RunDirectory':
        return self

    def __exit__(self, *exc_info) -> Optional[bool]:
        self.close()
        return None
