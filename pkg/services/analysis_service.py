"""
Error metrics and tabular reports for snapshot data and campaigns
"""

import csv
import io
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from core.logger import get_logger
from exceptions import InvalidParameterError, ResourceNotFoundError, ZeroReferenceError
from models import ReportRow, SeedStudyRow
from reduction.correlation import CorrDimEstimate, correlation_dimension, plateau_estimate
from reduction.pod import covariance_spectrum
from utils.validators import ArrayValidator

logger = get_logger(__name__)

ZERO_REFERENCE_TOL = 1e-14
REPORT_COLUMNS = ["method", "d", "E_mean_pct", "E_max_pct", "wall_s", "converged_paths"]


def relative_errors(
    rom_states: Sequence[np.ndarray], reference_states: Sequence[np.ndarray]
) -> np.ndarray:
    """||u_rom - u_ref|| / ||u_ref|| for every pair"""
    ArrayValidator.validate_same_length(rom_states, reference_states, "error_metrics")
    errors = np.empty(len(reference_states))
    for i, (u_rom, u_ref) in enumerate(zip(rom_states, reference_states)):
        norm = float(np.linalg.norm(u_ref))
        if norm < ZERO_REFERENCE_TOL:
            raise ZeroReferenceError(
                "Reference solution has zero norm", context={"index": i, "norm": norm}
            )
        errors[i] = np.linalg.norm(np.asarray(u_rom) - np.asarray(u_ref)) / norm
    return errors


def error_metrics(
    rom_states: Sequence[np.ndarray], reference_states: Sequence[np.ndarray]
) -> Tuple[float, float]:
    """Mean and maximal relative error as fractions"""
    errors = relative_errors(rom_states, reference_states)
    if errors.size == 0:
        raise InvalidParameterError("No solutions to compare")
    return float(errors.mean()), float(errors.max())


def eigenvalue_decay_report(U: np.ndarray) -> List[Dict[str, float]]:
    """Descending covariance eigenvalues with cumulative energy fractions"""
    U = ArrayValidator.validate_matrix(U, "U", min_cols=2)
    eigenvalues, _ = covariance_spectrum(U)
    total = float(eigenvalues.sum())
    cumulative = np.cumsum(eigenvalues) / total if total > 0.0 else np.zeros_like(eigenvalues)
    return [
        {"index": i + 1, "eigenvalue": float(lam), "cumulative_fraction": float(frac)}
        for i, (lam, frac) in enumerate(zip(eigenvalues, cumulative))
    ]


def corrdim_report(
    U: np.ndarray, grid_points: int = 100, n_scales: int = 10
) -> Tuple[List[Dict[str, float]], float]:
    """Correlation sum rows and the small-scale plateau estimate"""
    estimate: CorrDimEstimate = correlation_dimension(U, grid_points=grid_points)
    plateau = plateau_estimate(estimate, n_scales=n_scales)
    rows = [
        {"eps": eps, "p_cd": p, "delta_sd": slope, "plateau": plateau}
        for eps, p, slope in estimate.rows()
    ]
    logger.info("Correlation dimension estimated", extra={"plateau": plateau, "s": U.shape[1]})
    return rows, plateau


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value) if np.isfinite(value) else "nan"
    return str(value)


def write_csv(
    path: Union[str, Path], rows: Iterable[Dict], columns: Sequence[str]
) -> Path:
    """Write rows with a fixed column order; floats use repr for exact reruns"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row.get(c, "")) for c in columns])
    path.write_text(buffer.getvalue(), encoding="utf-8")
    return path


def write_report(path: Union[str, Path], rows: Sequence[ReportRow]) -> Path:
    return write_csv(path, [row.model_dump() for row in rows], REPORT_COLUMNS)


def write_seed_study(path: Union[str, Path], rows: Sequence[SeedStudyRow]) -> Path:
    columns = list(SeedStudyRow.model_fields)
    records = []
    for row in rows:
        record = row.model_dump()
        record["seeds"] = " ".join(str(s) for s in row.seeds)
        records.append(record)
    return write_csv(path, records, columns)


def read_report(path: Union[str, Path]) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise ResourceNotFoundError("Report not found", context={"path": str(path)})
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    missing = [c for c in REPORT_COLUMNS if rows and c not in rows[0]]
    if missing:
        raise InvalidParameterError(
            "Report is missing columns", context={"missing": missing, "path": str(path)}
        )
    return rows


def format_report(rows: Sequence[Dict[str, str]]) -> str:
    """Aligned plain-text table of a campaign report"""
    header = REPORT_COLUMNS
    cells = [header]
    for row in rows:
        line = []
        for column in header:
            value = row.get(column, "")
            if column in ("E_mean_pct", "E_max_pct", "wall_s"):
                try:
                    value = f"{float(value):.4f}"
                except ValueError:
                    pass
            line.append(value)
        cells.append(line)
    widths = [max(len(str(r[i])) for r in cells) for i in range(len(header))]
    return "\n".join(
        "  ".join(str(value).rjust(width) for value, width in zip(line, widths))
        for line in cells
    )
