"""CSV artifacts: '.' decimals, '\\n' line endings, 17 significant digits."""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd

from errors import InputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Read a CSV back losslessly; with ``columns`` the header must contain them in order."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputError(f"cannot parse {path}: {e}") from e
    if columns is not None:
        header = list(frame.columns)
        tail = header[len(header) - len(columns):] if len(header) >= len(columns) else header
        if tail != list(columns):
            error_msg = f"{path}: header {header} does not end with the expected columns {list(columns)}"
            logger.error(error_msg)
            raise InputError(error_msg)
    return frame
