"""
Plain-text matrix format shared by kernels, tests and the CLI.

    # optional comment lines
    N M complex|real
    re re,im ...        (N lines of M entries)

An entry is `re` or `re,im` with no space inside. Floats are printed with
Python's shortest round-trip repr.
"""
import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from dpp.utils.errors import MatrixFormatError

logger = logging.getLogger(__name__)


def _format_entry(value, complex_mode: bool) -> str:
    if complex_mode:
        return f'{float(value.real)!r},{float(value.imag)!r}'
    return repr(float(np.real(value)))


def format_matrix(matrix, comments: List[str] = ()) -> str:
    """Render a matrix in the text format"""
    arr = np.atleast_2d(np.asarray(matrix))
    complex_mode = bool(np.iscomplexobj(arr) and np.any(arr.imag != 0))
    lines = [f'# {c}' for c in comments]
    lines.append(f'{arr.shape[0]} {arr.shape[1]} {"complex" if complex_mode else "real"}')
    for row in arr:
        lines.append(' '.join(_format_entry(v, complex_mode) for v in row))
    return '\n'.join(lines) + '\n'


def _parse_entry(token: str, line_no: int) -> complex:
    try:
        if ',' in token:
            re_part, im_part = token.split(',')
            return complex(float(re_part), float(im_part))
        return complex(float(token), 0.0)
    except ValueError:
        raise MatrixFormatError(f'line {line_no}: bad entry {token!r}')


def parse_matrix(text: str) -> Tuple[np.ndarray, List[str]]:
    """Parse the text format; returns (matrix, comment lines)"""
    comments = []
    rows = []
    header = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            comments.append(line[1:].strip())
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 3 or tokens[2] not in ('real', 'complex'):
                raise MatrixFormatError(f'line {line_no}: expected "N M real|complex" header')
            try:
                header = (int(tokens[0]), int(tokens[1]), tokens[2])
            except ValueError:
                raise MatrixFormatError(f'line {line_no}: non-integer dimensions')
            if header[0] < 1 or header[1] < 1:
                raise MatrixFormatError(f'line {line_no}: dimensions must be positive')
            continue
        if len(tokens) != header[1]:
            raise MatrixFormatError(
                f'line {line_no}: expected {header[1]} entries, found {len(tokens)}'
            )
        rows.append([_parse_entry(t, line_no) for t in tokens])

    if header is None:
        raise MatrixFormatError('missing header line')
    if len(rows) != header[0]:
        raise MatrixFormatError(f'expected {header[0]} rows, found {len(rows)}')

    matrix = np.array(rows, dtype=np.complex128)
    if header[2] == 'real':
        if np.any(matrix.imag != 0):
            raise MatrixFormatError('imaginary part in a matrix declared real')
        return matrix.real.copy(), comments
    return matrix, comments


def write_matrix(path, matrix, comments: List[str] = ()) -> None:
    Path(path).write_text(format_matrix(matrix, comments))
    logger.debug(f'Wrote {np.shape(matrix)} matrix to {path}')


def read_matrix(path) -> Tuple[np.ndarray, List[str]]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MatrixFormatError(f'cannot read {path}: {e}')
    return parse_matrix(text)
