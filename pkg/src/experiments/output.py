# src/experiments/output.py
import json
import logging
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import numpy as np
import pandas as pd

from src.analysis.metrics import ErrorTableRow
from src.mesh.generator import Mesh

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['ne', 'err_l2', 'ord_l2', 'err_h1', 'ord_h1', 'err_h', 'ord_h', 'iters', 'converged']
VTK_TRIANGLE = 5


def _prepare(path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def emit_vtk(mesh: Mesh, U: np.ndarray, path: Union[str, Path], title: str = 'solution') -> Path:
    """Legacy ASCII unstructured grid with the nodal values as point scalars "u" """
    U = np.asarray(U, dtype=float)
    if U.shape != (mesh.n_total,):
        raise ValueError(f"expected {mesh.n_total} nodal values, got {U.shape}")
    path = _prepare(path)

    lines = ['# vtk DataFile Version 2.0', title.replace('\n', ' '), 'ASCII', 'DATASET UNSTRUCTURED_GRID',
             f"POINTS {mesh.n_total} double"]
    lines.extend(f"{float(x)!r} {float(y)!r} 0.0" for x, y in mesh.vertices)
    t = mesh.n_triangles
    lines.append(f"CELLS {t} {4 * t}")
    lines.extend(f"3 {i} {j} {k}" for i, j, k in mesh.triangles)
    lines.append(f"CELL_TYPES {t}")
    lines.extend([str(VTK_TRIANGLE)] * t)
    lines += [f"POINT_DATA {mesh.n_total}", 'SCALARS u double 1', 'LOOKUP_TABLE default']
    lines.extend(repr(float(v)) for v in U)

    path.write_text("\n".join(lines) + "\n", encoding='ascii')
    logger.info(f"Wrote VTK field to {path}")
    return path


def error_table(rows: Sequence[ErrorTableRow]) -> pd.DataFrame:
    return pd.DataFrame([row.as_record() for row in rows], columns=CSV_COLUMNS)


def write_error_table(rows: Sequence[ErrorTableRow], path: Union[str, Path]) -> Path:
    """CSV table with one line per mesh; values are preformatted strings"""
    path = _prepare(path)
    error_table(rows).to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote convergence table with {len(rows)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote report to {path}")
    return path
