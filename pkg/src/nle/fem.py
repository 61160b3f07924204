"""Assembly and solution machinery shared by the beam and plate models.

Energies of the structural models are sums over Gauss points of quadratic
forms in two row families evaluated on 1D meshes: nodal interpolation rows N
(hat-function values) and nonlocal gradient rows B (operator matrix rows).
Stiffness blocks are therefore weighted Gram products of those families; the
plate obtains its 2D blocks as Kronecker products of per-axis Grams, which is
an exact reordering of the Gauss-point sum over the tensor product rule.

Dirichlet data is carried symbolically on the StiffnessSystem and eliminated
symmetrically at solve time (row/column reduction with load correction), so
the assembled operator stays symmetric and the free-free system remains
available for spectral checks.  solve() factors the reduced matrix by
Cholesky, refines once or twice if needed, and guarantees a small relative
residual or raises.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .kernels import Kernel, check_admissible
from .operator import HorizonSpec, build_operator_matrix

__all__ = [
    "IntervalMesh",
    "RectangleMesh",
    "GaussRule",
    "gauss_rule",
    "BENDING_POINTS",
    "SHEAR_POINTS",
    "AxisQuadrature",
    "gram",
    "hat_rows",
    "StiffnessSystem",
    "SolverError",
    "apply_dirichlet",
    "assemble",
    "solve",
]

# reduced-integration point counts: full rule for direct strain energy,
# one point fewer for the transverse shear terms (locking control)
BENDING_POINTS = 2
SHEAR_POINTS = 1


class SolverError(RuntimeError):
    """Constrained system could not be factored or solved to tolerance."""


class IntervalMesh:
    """Uniform 1D mesh on [0, length] with linear elements."""

    def __init__(self, length: float, n_elements: int):
        if not length > 0.0:
            raise ValueError(f"mesh length must be positive (got {length!r})")
        if n_elements < 1:
            raise ValueError(f"need at least one element (got {n_elements!r})")
        self.length = float(length)
        self.n_elements = int(n_elements)
        self.nodes = np.linspace(0.0, self.length, self.n_elements + 1)

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def spacing(self) -> float:
        return self.length / self.n_elements

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"IntervalMesh(length={self.length}, n_elements={self.n_elements})"


class RectangleMesh:
    """Tensor-product mesh on [0, lx] x [0, ly].

    Node numbering is lexicographic with x fastest: node(i, j) = j*(nx+1) + i.
    """

    def __init__(self, lx: float, ly: float, nx: int, ny: int):
        self.x_axis = IntervalMesh(lx, nx)
        self.y_axis = IntervalMesh(ly, ny)

    @property
    def n_nodes(self) -> int:
        return self.x_axis.n_nodes * self.y_axis.n_nodes

    def node(self, i: int, j: int) -> int:
        return j * self.x_axis.n_nodes + i

    def center_node(self) -> int:
        nx, ny = self.x_axis.n_elements, self.y_axis.n_elements
        if nx % 2 or ny % 2:
            raise ValueError("center node needs even element counts in both directions")
        return self.node(nx // 2, ny // 2)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return (
            f"RectangleMesh(lx={self.x_axis.length}, ly={self.y_axis.length}, "
            f"nx={self.x_axis.n_elements}, ny={self.y_axis.n_elements})"
        )


@dataclass(frozen=True)
class GaussRule:
    """Gauss-Legendre points and weights on the reference interval [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray


def gauss_rule(n_points: int) -> GaussRule:
    if n_points < 1:
        raise ValueError("quadrature rule needs at least one point")
    p, w = np.polynomial.legendre.leggauss(n_points)
    return GaussRule(points=p, weights=w)


class AxisQuadrature:
    """Gauss data of one rule over one axis mesh, with N and B row families.

    points/weights are the global Gauss abscissae and weights (element
    jacobian folded in).  N holds hat-function values, B the nonlocal
    gradient rows for the given kernel and horizon radius; with the local
    delta kernel B degenerates to the element-gradient rows.
    """

    def __init__(self, mesh: IntervalMesh, rule: GaussRule, kernel: Kernel, horizon_radius: float):
        h = mesh.spacing
        mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
        pts = (mids[:, None] + 0.5 * h * rule.points[None, :]).ravel()
        self.points = pts
        self.weights = np.tile(0.5 * h * rule.weights, mesh.n_elements)
        element = np.repeat(np.arange(mesh.n_elements), rule.points.size)
        t = (pts - mesh.nodes[element]) / h
        self.N = np.zeros((pts.size, mesh.n_nodes))
        rows = np.arange(pts.size)
        self.N[rows, element] = 1.0 - t
        self.N[rows, element + 1] = t
        horizon = HorizonSpec(l_f=horizon_radius, x_min=0.0, x_max=mesh.length)
        self.B = build_operator_matrix(mesh.nodes, pts, horizon, kernel).weights
        self.mesh = mesh

    def load_vector(self) -> np.ndarray:
        """Consistent nodal load of a unit distributed intensity."""
        return self.N.T @ self.weights


def gram(P: np.ndarray, Q: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted Gram product sum_g w_g P_g^T Q_g."""
    return P.T @ (weights[:, None] * Q)


def hat_rows(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Piecewise-linear basis values at points inside the node span.

    Row r holds the hat-function values at points[r]; matrix-vector product
    with nodal values interpolates the field.
    """
    nodes = np.asarray(nodes, dtype=float)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.size and (pts.min() < nodes[0] or pts.max() > nodes[-1]):
        raise ValueError("interpolation points fall outside the mesh span")
    el = np.clip(np.searchsorted(nodes, pts, side="right") - 1, 0, nodes.size - 2)
    t = (pts - nodes[el]) / (nodes[el + 1] - nodes[el])
    rows = np.zeros((pts.size, nodes.size))
    idx = np.arange(pts.size)
    rows[idx, el] = 1.0 - t
    rows[idx, el + 1] = t
    return rows


@dataclass(frozen=True)
class StiffnessSystem:
    """Symmetric stiffness matrix, consistent load, and Dirichlet data."""

    matrix: np.ndarray
    load: np.ndarray
    constraints: dict[int, float]

    @property
    def n_dofs(self) -> int:
        return self.load.size


def assemble(model, kernel: Kernel, horizon_radius: float) -> StiffnessSystem:
    """Validate the kernel and horizon, then assemble the model's system.

    The model provides its own assembly (beam or plate kinematics); this
    entry point enforces the shared admissibility contract: a positive
    horizon radius and a positively decaying kernel.
    """
    if not horizon_radius > 0.0:
        raise ValueError(f"horizon radius must be positive (got {horizon_radius!r})")
    check_admissible(kernel, horizon_radius)
    return model.assemble(kernel, horizon_radius)


def apply_dirichlet(system: StiffnessSystem, constraints: dict[int, float]) -> StiffnessSystem:
    """Attach Dirichlet values; merging is validated, elimination happens in solve().

    An empty constraint set returns the system unchanged.  Re-constraining a
    DOF to the same value is a no-op; to a different value, an error.
    """
    if not constraints:
        return system
    n = system.n_dofs
    merged = dict(system.constraints)
    for dof, value in constraints.items():
        if not 0 <= dof < n:
            raise ValueError(f"constraint on dof {dof} outside system of size {n}")
        if dof in merged and merged[dof] != value:
            raise ValueError(
                f"conflicting constraints on dof {dof}: {merged[dof]!r} vs {value!r}"
            )
        merged[dof] = float(value)
    return replace(system, constraints=merged)


def solve(system: StiffnessSystem, residual_tol: float = 1e-10) -> np.ndarray:
    """Displacements of the constrained system by dense Cholesky.

    Eliminates constrained DOFs symmetrically (load-corrected reduction),
    factors the free block, applies iterative refinement as needed, and
    verifies the free-row residual ||K u - F|| <= residual_tol * ||rhs||.
    """
    n = system.n_dofs
    fixed = np.array(sorted(system.constraints), dtype=int)
    u = np.zeros(n)
    if fixed.size:
        u[fixed] = [system.constraints[d] for d in fixed]
    free = np.setdiff1d(np.arange(n), fixed)
    if free.size == 0:
        return u
    K_ff = system.matrix[np.ix_(free, free)]
    rhs = system.load[free].astype(float, copy=True)
    if fixed.size:
        rhs -= system.matrix[np.ix_(free, fixed)] @ u[fixed]
    try:
        factor = linalg.cho_factor(K_ff, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        pivot = _pivot_from_message(str(exc), free)
        raise SolverError(
            "stiffness matrix is not positive definite after constraints "
            f"(failing pivot at dof {pivot})"
        ) from exc
    x = linalg.cho_solve(factor, rhs, check_finite=False)
    scale = np.linalg.norm(rhs)
    denom = scale if scale > 0.0 else 1.0
    for _ in range(3):
        r = rhs - K_ff @ x
        if np.linalg.norm(r) <= residual_tol * denom:
            break
        x = x + linalg.cho_solve(factor, r, check_finite=False)
    r = rhs - K_ff @ x
    if np.linalg.norm(r) > residual_tol * denom:
        raise SolverError(
            f"solve residual {np.linalg.norm(r) / denom:.3e} exceeds {residual_tol:.1e}"
        )
    u[free] = x
    return u


def _pivot_from_message(message: str, free: np.ndarray) -> int | str:
    m = re.search(r"(\d+)", message)
    if m is None:
        return "unknown"
    return int(free[int(m.group(1)) - 1])
