"""
Scale-dependent correlation dimension of a point cloud
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from core.logger import get_logger
from exceptions import InvalidParameterError

logger = get_logger(__name__)


@dataclass
class CorrDimEstimate:
    """
    Pair fraction on an even scale grid and finite-difference slopes.

    ``delta_sd[k]`` is the log-log slope between ``eps_grid[k]`` and
    ``eps_grid[k + 1]``; it is NaN where either scale or pair fraction is zero.
    """

    eps_grid: np.ndarray
    p_cd: np.ndarray
    delta_sd: np.ndarray

    def rows(self):
        """(eps, p_cd, delta_sd) per grid point, NaN slope on the last one"""
        slopes = np.append(self.delta_sd, np.nan)
        return list(zip(self.eps_grid.tolist(), self.p_cd.tolist(), slopes.tolist()))


def correlation_dimension(U: np.ndarray, grid_points: int = 100) -> CorrDimEstimate:
    """Correlation sum over columns of U for eps = 0 .. max pair distance"""
    U = np.asarray(U, dtype=float)
    s = U.shape[1]
    if s < 2:
        raise InvalidParameterError("Need at least two points", context={"s": s})
    if grid_points < 1:
        raise InvalidParameterError("grid_points must be positive")
    if s < 10:
        logger.warning("Correlation dimension from very few points", extra={"s": s})

    distances = np.sort(pdist(U.T))
    eps = np.linspace(0.0, distances[-1], grid_points + 1)
    counts = np.searchsorted(distances, eps, side="right")
    p_cd = counts / distances.size

    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.log(p_cd)
        log_eps = np.log(eps)
        slopes = np.diff(log_p) / np.diff(log_eps)
    undefined = (p_cd[:-1] == 0.0) | (p_cd[1:] == 0.0) | (eps[:-1] == 0.0)
    slopes[undefined] = np.nan
    return CorrDimEstimate(eps_grid=eps, p_cd=p_cd, delta_sd=slopes)


def plateau_estimate(estimate: CorrDimEstimate, n_scales: int = 10) -> float:
    """Median of the first ``n_scales`` defined small-scale slopes"""
    defined = estimate.delta_sd[np.isfinite(estimate.delta_sd)]
    if defined.size == 0:
        return float("nan")
    return float(np.median(defined[:n_scales]))
