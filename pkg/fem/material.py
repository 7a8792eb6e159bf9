"""
Compressible neo-Hooke law in first Piola-Kirchhoff form
"""

from dataclasses import dataclass

import numpy as np

from exceptions import InvalidParameterError, NonPositiveJacobianError


@dataclass(frozen=True)
class MaterialParams:
    """Shear and bulk modulus (N/mm^2)"""

    mu: float
    kappa: float

    def __post_init__(self):
        if self.mu <= 0.0 or self.kappa <= 0.0:
            raise InvalidParameterError(
                "mu and kappa must be positive",
                context={"mu": self.mu, "kappa": self.kappa},
            )

    @classmethod
    def from_youngs(cls, E: float, nu: float) -> "MaterialParams":
        return from_youngs(E, nu)


def from_youngs(E: float, nu: float) -> MaterialParams:
    """Isotropic conversion from Young's modulus and Poisson ratio"""
    if E <= 0.0:
        raise InvalidParameterError("E must be positive", context={"E": E})
    if not -1.0 < nu < 0.5:
        raise InvalidParameterError("nu must lie in (-1, 0.5)", context={"nu": nu})
    return MaterialParams(mu=E / (2.0 * (1.0 + nu)), kappa=E / (3.0 * (1.0 - 2.0 * nu)))


@dataclass
class StressState:
    """Kinematics and stress response at one material point"""

    F: np.ndarray
    P: np.ndarray
    A: np.ndarray
    W: float


def neo_hooke_batch(F: np.ndarray, mat: MaterialParams, tangent: bool = True):
    """
    Evaluate W, P and A = dP/dF for a stack of deformation gradients.

    W = mu/2 (I_c - 3 - 2 ln J) + kappa/4 (J^2 - 1 - 2 ln J), stress free at F = I.
    With G = F^-T and c = kappa/2 (J^2 - 1) - mu:
        P = mu F + c G
        A_iJkL = mu d_ik d_JL - c G_iL G_kJ + kappa J^2 G_iJ G_kL

    F has shape (..., 3, 3); A is None when ``tangent`` is False.
    """
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        flat = int(np.argmax(np.ravel(J) <= 0.0))
        position = np.unravel_index(flat, J.shape) if J.ndim else ()
        raise NonPositiveJacobianError(
            "det F <= 0",
            context={"index": [int(i) for i in position], "det_F": float(np.ravel(J)[flat])},
        )

    G = np.swapaxes(np.linalg.inv(F), -1, -2)
    log_j = np.log(J)
    i_c = np.einsum("...iJ,...iJ->...", F, F)
    W = 0.5 * mat.mu * (i_c - 3.0 - 2.0 * log_j) + 0.25 * mat.kappa * (
        J**2 - 1.0 - 2.0 * log_j
    )
    c = 0.5 * mat.kappa * (J**2 - 1.0) - mat.mu
    P = mat.mu * F + c[..., None, None] * G

    if not tangent:
        return W, P, None

    eye = np.eye(3)
    A = (
        mat.mu * np.einsum("ik,JL->iJkL", eye, eye)
        - c[..., None, None, None, None] * np.einsum("...iL,...kJ->...iJkL", G, G)
        + (mat.kappa * J**2)[..., None, None, None, None]
        * np.einsum("...iJ,...kL->...iJkL", G, G)
    )
    return W, P, A


def neo_hooke(F: np.ndarray, mat: MaterialParams) -> StressState:
    """Stress state at a single deformation gradient"""
    F = np.asarray(F, dtype=float).reshape(3, 3)
    W, P, A = neo_hooke_batch(F[None], mat)
    return StressState(F=F, P=P[0], A=A[0], W=float(W[0]))
