import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import pandas as pd
import ujson

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ReportWriter:
    """JSON and CSV output helpers; JSON is written with sorted keys so files diff cleanly"""

    @staticmethod
    def dumps(payload: Any) -> str:
        return ujson.dumps(payload, indent=2, sort_keys=True, escape_forward_slashes=False) + '\n'

    @staticmethod
    def write_json(path: PathLike, payload: Any) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ReportWriter.dumps(payload), encoding='utf-8')
        logger.debug(f"[ReportWriter] Wrote {path}")
        return path

    @staticmethod
    def read_json(path: PathLike) -> Any:
        with open(path, 'r', encoding='utf-8') as f:
            return ujson.load(f)

    @staticmethod
    def write_csv(path: PathLike, rows: Iterable[Mapping[str, Any]],
                  columns: Optional[Sequence[str]] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(list(rows), columns=list(columns) if columns else None)
        frame.to_csv(path, index=False)
        logger.debug(f"[ReportWriter] Wrote {len(frame)} rows to {path}")
        return path

    @staticmethod
    def curve_rows(curve: Sequence[Sequence[float]]) -> List[Dict[str, float]]:
        return [{'fpr': float(fpr), 'ccr': float(ccr)} for fpr, ccr in curve]

    @staticmethod
    def matrix_rows(matrix, population: str) -> List[Dict[str, Any]]:
        rows = []
        for i, row in enumerate(matrix):
            for j, count in enumerate(row):
                rows.append({'population': population, 'branch_a_class': i,
                             'branch_b_class': j, 'count': int(count)})
        return rows
