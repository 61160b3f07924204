"""Static bending of a Timoshenko beam with nonlocal axial/bending strain.

Kinematics: axial displacement u0, deflection w0, cross-section rotation
theta.  The nonlocal gradient replaces d/dx in the strain measures,

    eps_xx   = Dbar u0 - z * Dbar theta
    gamma_xz = Dbar w0 - theta,

while the rotation itself stays pointwise.  The constitutive law is local
(E, kappa*G), so the energy is a plain quadratic form and assembly reduces to
weighted Gram products of the interpolation rows N and operator rows B:
direct terms integrate with the 2-point rule, transverse shear with 1 point.

DOF layout is block-major: dof(field, node) = field * n_nodes + node with
fields (u0, w0, theta) = (0, 1, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem
from .fem import AxisQuadrature, IntervalMesh, StiffnessSystem, apply_dirichlet, gauss_rule, gram
from .kernels import Kernel, KernelError, LocalDelta
from .operator import NonlocalOperatorMatrix
from .results import KernelSpec, SweepResult, check_sweep_grids, run_grid

__all__ = [
    "BeamSection",
    "CantileverTipLoad",
    "SimplySupportedUniformLoad",
    "TimoshenkoBeamModel",
    "BeamDisplacement",
    "BeamResult",
    "solve_beam",
    "beam_strains",
    "beam_sweep",
    "BEAM_SWEEP_COLUMNS",
]

U0, W0, THETA = 0, 1, 2


@dataclass(frozen=True)
class BeamSection:
    """Rectangular prismatic section and isotropic elastic constants."""

    length: float = 1.0
    width: float = 0.1
    height: float = 0.1
    modulus: float = 30e9
    poisson: float = 0.3
    shear_correction: float = 5.0 / 6.0

    def __post_init__(self) -> None:
        for name in ("length", "width", "height", "modulus", "shear_correction"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive (got {getattr(self, name)!r})")
        if not 0.0 <= self.poisson < 0.5:
            raise ValueError(f"poisson ratio must lie in [0, 0.5) (got {self.poisson!r})")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def inertia(self) -> float:
        return self.width * self.height ** 3 / 12.0

    @property
    def shear_modulus(self) -> float:
        return self.modulus / (2.0 * (1.0 + self.poisson))


@dataclass(frozen=True)
class CantileverTipLoad:
    """Clamp at x=0, transverse point force at the tip."""

    magnitude: float = 1.0
    name = "cantilever_tip"


@dataclass(frozen=True)
class SimplySupportedUniformLoad:
    """Pinned deflection at both ends, uniformly distributed transverse load."""

    intensity: float = 1.0
    name = "ss_udtl"


BeamLoad = CantileverTipLoad | SimplySupportedUniformLoad


class TimoshenkoBeamModel:
    def __init__(self, section: BeamSection, load: BeamLoad, n_elements: int = 200):
        if isinstance(load, SimplySupportedUniformLoad) and n_elements % 2:
            raise ValueError("simply supported case needs an even element count (midspan node)")
        if not isinstance(load, (CantileverTipLoad, SimplySupportedUniformLoad)):
            raise ValueError(f"unknown load case {load!r}")
        self.section = section
        self.load = load
        self.mesh = IntervalMesh(section.length, n_elements)

    @property
    def metric_node(self) -> int:
        """Node whose deflection defines w_max: tip or midspan by load case."""
        if isinstance(self.load, CantileverTipLoad):
            return self.mesh.n_nodes - 1
        return (self.mesh.n_nodes - 1) // 2

    def assemble(self, kernel: Kernel, horizon_radius: float) -> StiffnessSystem:
        mesh = self.mesh
        nn = mesh.n_nodes
        bend = AxisQuadrature(mesh, gauss_rule(fem.BENDING_POINTS), kernel, horizon_radius)
        shear = AxisQuadrature(mesh, gauss_rule(fem.SHEAR_POINTS), kernel, horizon_radius)
        s = self.section
        EA = s.modulus * s.area
        EI = s.modulus * s.inertia
        kGA = s.shear_correction * s.shear_modulus * s.area

        Sb = gram(bend.B, bend.B, bend.weights)
        Ss = gram(shear.B, shear.B, shear.weights)
        Cs = gram(shear.B, shear.N, shear.weights)
        Ms = gram(shear.N, shear.N, shear.weights)

        K = np.zeros((3 * nn, 3 * nn))

        def blk(f: int, g: int):
            return np.s_[f * nn : (f + 1) * nn, g * nn : (g + 1) * nn]

        K[blk(U0, U0)] = EA * Sb
        K[blk(W0, W0)] = kGA * Ss
        K[blk(THETA, THETA)] = EI * Sb + kGA * Ms
        wt = -kGA * Cs
        K[blk(W0, THETA)] = wt
        K[blk(THETA, W0)] = wt.T

        F = np.zeros(3 * nn)
        if isinstance(self.load, CantileverTipLoad):
            F[W0 * nn + (nn - 1)] = self.load.magnitude
            constraints = {U0 * nn: 0.0, W0 * nn: 0.0, THETA * nn: 0.0}
        else:
            F[W0 * nn : (W0 + 1) * nn] = self.load.intensity * bend.load_vector()
            constraints = {U0 * nn: 0.0, W0 * nn: 0.0, W0 * nn + (nn - 1): 0.0}
        return apply_dirichlet(StiffnessSystem(K, F, {}), constraints)


@dataclass(frozen=True)
class BeamDisplacement:
    nodes: np.ndarray
    u0: np.ndarray
    w0: np.ndarray
    theta: np.ndarray

    @classmethod
    def from_vector(cls, nodes: np.ndarray, u: np.ndarray) -> "BeamDisplacement":
        nn = nodes.size
        return cls(nodes, u[:nn], u[nn : 2 * nn], u[2 * nn :])


@dataclass(frozen=True)
class BeamResult:
    """Peak transverse deflections of the nonlocal and local solves."""

    w_max: float
    w_max_local: float
    displacement: BeamDisplacement
    displacement_local: BeamDisplacement

    @property
    def softening_ratio(self) -> float:
        """Peak-deflection ratio nonlocal/local; > 1 means nonlocal softening."""
        return self.w_max / self.w_max_local


def solve_beam(
    section: BeamSection,
    load: BeamLoad,
    kernel: Kernel,
    horizon_radius: float,
    n_elements: int = 200,
    residual_tol: float = 1e-10,
) -> BeamResult:
    """Solve the same bending problem with the given kernel and locally.

    The local companion uses the identical mesh, quadrature and constraint
    path with the delta kernel, so the ratio isolates the nonlocal effect.
    The default residual tolerance is attainable up to roughly the default
    mesh density; finer meshes raise the float64 floor (it scales with the
    stiffness norm, hence with 1/h) and need a looser tolerance.
    """
    model = TimoshenkoBeamModel(section, load, n_elements)
    u_nl = fem.solve(fem.assemble(model, kernel, horizon_radius), residual_tol)
    u_loc = fem.solve(fem.assemble(model, LocalDelta(), horizon_radius), residual_tol)
    d_nl = BeamDisplacement.from_vector(model.mesh.nodes, u_nl)
    d_loc = BeamDisplacement.from_vector(model.mesh.nodes, u_loc)
    node = model.metric_node
    return BeamResult(
        w_max=float(np.abs(d_nl.w0[node])),
        w_max_local=float(np.abs(d_loc.w0[node])),
        displacement=d_nl,
        displacement_local=d_loc,
    )


BEAM_SWEEP_COLUMNS = (
    "kernel",
    "param",
    "l_f",
    "load_case",
    "w_max_nonlocal",
    "w_max_local",
    "w_bar",
    "status",
)


def beam_sweep(
    section: BeamSection,
    load: BeamLoad,
    kernel_grid: list[KernelSpec],
    l_f_grid,
    n_elements: int = 200,
    threads: int = 1,
) -> SweepResult:
    """One row per (kernel, horizon) configuration, in listed grid order.

    The local companion depends only on the mesh and load, so it is solved
    once and shared by every row.  A failing configuration keeps its row
    with an error status; the sweep continues.
    """
    check_sweep_grids(kernel_grid, l_f_grid)
    model = TimoshenkoBeamModel(section, load, n_elements)
    w_slice = model.mesh.n_nodes + model.metric_node
    u_loc = fem.solve(fem.assemble(model, LocalDelta(), float(l_f_grid[0])))
    w_local = float(np.abs(u_loc[w_slice]))

    def evaluate(config: tuple[KernelSpec, float]) -> tuple:
        spec, l_f = config
        head = (spec.kind, spec.param, l_f, load.name)
        try:
            u = fem.solve(fem.assemble(model, spec.build(), l_f))
            w = float(np.abs(u[w_slice]))
        except (fem.SolverError, KernelError, ValueError) as exc:
            return head + (None, None, None, f"error:{type(exc).__name__}")
        return head + (w, w_local, w / w_local, "ok")

    configs = [(spec, float(l_f)) for spec in kernel_grid for l_f in l_f_grid]
    rows = run_grid(evaluate, configs, threads)
    return SweepResult(
        columns=BEAM_SWEEP_COLUMNS,
        rows=rows,
        metadata={"model": "beam", "load_case": load.name, "n_elements": str(n_elements)},
    )


def beam_strains(
    displacement: BeamDisplacement, operator: NonlocalOperatorMatrix, z: float
) -> tuple[np.ndarray, np.ndarray]:
    """Axial strain and transverse shear at the operator's evaluation points.

    eps_xx = Dbar u0 - z * Dbar theta; gamma_xz = Dbar w0 - theta, the
    rotation interpolated pointwise (it enters the shear measure locally).
    """
    theta_at = np.interp(operator.eval_points, displacement.nodes, displacement.theta)
    eps = operator.apply(displacement.u0) - z * operator.apply(displacement.theta)
    gamma = operator.apply(displacement.w0) - theta_at
    return eps, gamma
