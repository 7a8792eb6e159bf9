"""
Quadratic tetrahedron (Tet10): shape functions, quadrature and element kernels
"""

from typing import Tuple

import numpy as np

from exceptions import InvalidParameterError, NonPositiveJacobianError
from fem.material import MaterialParams, neo_hooke_batch


def quadrature_rule(points: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """Reference-tetrahedron Gauss points (Q, 3) and weights (Q,) summing to 1/6"""
    if points == 4:
        a, b = 0.5854101966249685, 0.1381966011250105
        xi = np.array([[b, b, b], [a, b, b], [b, a, b], [b, b, a]])
        return xi, np.full(4, 1.0 / 24.0)
    if points == 5:
        s, h = 1.0 / 6.0, 0.5
        xi = np.array(
            [[0.25, 0.25, 0.25], [s, s, s], [h, s, s], [s, h, s], [s, s, h]]
        )
        return xi, np.array([-2.0 / 15.0] + [3.0 / 40.0] * 4)
    raise InvalidParameterError("Unsupported quadrature rule", context={"points": points})


def shape_functions(xi: np.ndarray) -> np.ndarray:
    """N (..., 10) at reference points xi (..., 3): corners, then edges 01 12 02 03 13 23"""
    x, y, z = np.moveaxis(np.asarray(xi, dtype=float), -1, 0)
    w = 1.0 - x - y - z
    return np.stack(
        [
            w * (2 * w - 1),
            x * (2 * x - 1),
            y * (2 * y - 1),
            z * (2 * z - 1),
            4 * w * x,
            4 * x * y,
            4 * w * y,
            4 * w * z,
            4 * x * z,
            4 * y * z,
        ],
        axis=-1,
    )


def shape_derivatives(xi: np.ndarray) -> np.ndarray:
    """dN/dxi (..., 10, 3)"""
    x, y, z = np.moveaxis(np.asarray(xi, dtype=float), -1, 0)
    w = 1.0 - x - y - z
    zero = np.zeros_like(x)
    rows = [
        [1 - 4 * w, 1 - 4 * w, 1 - 4 * w],
        [4 * x - 1, zero, zero],
        [zero, 4 * y - 1, zero],
        [zero, zero, 4 * z - 1],
        [4 * (w - x), -4 * x, -4 * x],
        [4 * y, 4 * x, zero],
        [-4 * y, 4 * (w - y), -4 * y],
        [-4 * z, -4 * z, 4 * (w - z)],
        [4 * z, zero, 4 * x],
        [zero, 4 * z, 4 * y],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


class Tet10:
    """
    Vectorised Tet10 kernels over an element batch.

    Geometry arrays have shape (E, 10, 3); displacements (E, 30) ordered
    node-major (3 * a + i).
    """

    def __init__(self, quadrature: int = 4):
        self.xi, self.weights = quadrature_rule(quadrature)
        self.N = shape_functions(self.xi)
        self.dN = shape_derivatives(self.xi)

    def geometry(self, X: np.ndarray, first_element: int = 0):
        """Physical shape gradients (E, Q, 10, 3) and weighted Jacobians (E, Q)"""
        X = np.asarray(X, dtype=float)
        jac = np.einsum("eai,qak->eqik", X, self.dN)
        det = np.linalg.det(jac)
        if np.any(det <= 0.0):
            bad = int(np.argmax(np.any(det <= 0.0, axis=1)))
            raise NonPositiveJacobianError(
                "Non-positive reference Jacobian",
                context={"element": first_element + bad},
            )
        dNdX = np.einsum("qak,eqkj->eqaj", self.dN, np.linalg.inv(jac))
        return dNdX, det * self.weights[None, :]

    @staticmethod
    def deformation_gradient(dNdX: np.ndarray, u: np.ndarray, H_bar: np.ndarray) -> np.ndarray:
        """F = I + H_bar + grad u at every quadrature point (E, Q, 3, 3)"""
        grad = np.einsum("eai,eqaJ->eqiJ", u.reshape(u.shape[0], 10, 3), dNdX)
        return np.eye(3) + np.asarray(H_bar, dtype=float) + grad

    def k_and_f_int(
        self,
        dNdX: np.ndarray,
        dV: np.ndarray,
        u: np.ndarray,
        H_bar: np.ndarray,
        mat: MaterialParams,
        first_element: int = 0,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Element tangents (E, 30, 30) and internal forces (E, 30)"""
        F = self.deformation_gradient(dNdX, u, H_bar)
        try:
            _, P, A = neo_hooke_batch(F, mat)
        except NonPositiveJacobianError as e:
            element = first_element + e.context.get("index", [0])[0]
            raise e.with_context(element=element)

        n_el = u.shape[0]
        f = np.einsum("eq,eqiJ,eqaJ->eai", dV, P, dNdX).reshape(n_el, 30)
        K = np.einsum(
            "eq,eqaJ,eqiJkL,eqbL->eaibk", dV, dNdX, A, dNdX, optimize=True
        ).reshape(n_el, 30, 30)
        return K, f

    def f_int(self, dNdX, dV, u, H_bar, mat, first_element: int = 0) -> np.ndarray:
        F = self.deformation_gradient(dNdX, u, H_bar)
        try:
            _, P, _ = neo_hooke_batch(F, mat, tangent=False)
        except NonPositiveJacobianError as e:
            raise e.with_context(element=first_element + e.context.get("index", [0])[0])
        return np.einsum("eq,eqiJ,eqaJ->eai", dV, P, dNdX).reshape(u.shape[0], 30)

    def energy_and_stress(self, dNdX, dV, u, H_bar, mat):
        """Integrated energy (E,) and integrated first Piola stress (E, 3, 3)"""
        F = self.deformation_gradient(dNdX, u, H_bar)
        W, P, _ = neo_hooke_batch(F, mat, tangent=False)
        return np.einsum("eq,eq->e", dV, W), np.einsum("eq,eqiJ->eiJ", dV, P)


def element_stiffness_residual(
    el_nodes: np.ndarray,
    el_u: np.ndarray,
    H_bar: np.ndarray,
    mat: MaterialParams,
    quadrature: int = 4,
) -> Tuple[np.ndarray, np.ndarray]:
    """Tangent (30, 30) and internal force (30,) of a single Tet10"""
    element = Tet10(quadrature)
    dNdX, dV = element.geometry(np.asarray(el_nodes, dtype=float)[None])
    K, f = element.k_and_f_int(
        dNdX, dV, np.asarray(el_u, dtype=float).reshape(1, 30), H_bar, mat
    )
    return K[0], f[0]


def element_volumes(X: np.ndarray, quadrature: int = 4) -> np.ndarray:
    """Quadrature-integrated volume of every element in the batch"""
    _, dV = Tet10(quadrature).geometry(X)
    return dV.sum(axis=1)
