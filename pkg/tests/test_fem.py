import numpy as np
import pytest
from scipy import integrate

from nle import fem
from nle.fem import (
    AxisQuadrature,
    IntervalMesh,
    RectangleMesh,
    SolverError,
    StiffnessSystem,
    apply_dirichlet,
    gauss_rule,
    gram,
    hat_rows,
    solve,
)
from nle.kernels import ExponentialKernel, KernelError, LocalDelta, PowerLawKernel


# ---------------------------------------------------------------------------
# meshes and quadrature rules
# ---------------------------------------------------------------------------

def test_interval_mesh_layout():
    mesh = IntervalMesh(2.0, 4)
    assert mesh.n_nodes == 5
    assert mesh.spacing == pytest.approx(0.5)
    np.testing.assert_allclose(mesh.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])


def test_interval_mesh_validation():
    with pytest.raises(ValueError, match="positive"):
        IntervalMesh(0.0, 4)
    with pytest.raises(ValueError, match="at least one"):
        IntervalMesh(1.0, 0)


def test_rectangle_mesh_numbering_x_fastest():
    mesh = RectangleMesh(1.2, 0.9, 4, 3)
    assert mesh.n_nodes == 20
    assert mesh.node(0, 0) == 0
    assert mesh.node(4, 0) == 4
    assert mesh.node(0, 1) == 5
    assert mesh.node(3, 2) == 13


def test_rectangle_center_node():
    assert RectangleMesh(1.0, 1.0, 4, 4).center_node() == 12
    with pytest.raises(ValueError, match="even"):
        RectangleMesh(1.0, 1.0, 3, 4).center_node()


def test_gauss_rule_low_orders():
    one = gauss_rule(1)
    np.testing.assert_allclose(one.points, [0.0])
    np.testing.assert_allclose(one.weights, [2.0])
    two = gauss_rule(2)
    np.testing.assert_allclose(np.abs(two.points), [1 / np.sqrt(3)] * 2)
    np.testing.assert_allclose(two.weights, [1.0, 1.0])
    with pytest.raises(ValueError):
        gauss_rule(0)


def test_gauss_two_point_exact_to_cubics():
    rule = gauss_rule(2)
    assert np.sum(rule.weights * rule.points ** 2) == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert np.sum(rule.weights * rule.points ** 3) == pytest.approx(0.0, abs=1e-15)


# ---------------------------------------------------------------------------
# hat interpolation rows
# ---------------------------------------------------------------------------

def test_hat_rows_partition_of_unity_and_cardinality():
    nodes = np.array([0.0, 0.2, 0.5, 1.0])
    pts = np.array([0.0, 0.1, 0.2, 0.33, 0.77, 1.0])
    rows = hat_rows(nodes, pts)
    np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-15)
    np.testing.assert_allclose(hat_rows(nodes, nodes), np.eye(4), atol=1e-15)


def test_hat_rows_reproduce_affine():
    nodes = np.linspace(0.0, 2.0, 7)
    pts = np.array([0.05, 0.4, 1.234, 1.999])
    vals = hat_rows(nodes, pts) @ (3.0 * nodes - 1.0)
    np.testing.assert_allclose(vals, 3.0 * pts - 1.0, rtol=1e-14)


def test_hat_rows_reject_outside_span():
    with pytest.raises(ValueError, match="outside"):
        hat_rows(np.array([0.0, 1.0]), np.array([1.5]))


# ---------------------------------------------------------------------------
# per-axis quadrature data
# ---------------------------------------------------------------------------

def test_axis_quadrature_weights_and_points():
    mesh = IntervalMesh(1.0, 5)
    quad = AxisQuadrature(mesh, gauss_rule(2), LocalDelta(), 0.3)
    assert quad.points.size == 10
    assert np.sum(quad.weights) == pytest.approx(1.0, rel=1e-14)
    # points stay strictly inside their elements, in ascending element order
    element = np.repeat(np.arange(5), 2)
    lo = mesh.nodes[element]
    assert np.all(quad.points > lo) and np.all(quad.points < lo + mesh.spacing)


def test_axis_quadrature_interpolation_rows():
    mesh = IntervalMesh(1.0, 4)
    quad = AxisQuadrature(mesh, gauss_rule(2), LocalDelta(), 0.3)
    nodal = 2.0 * mesh.nodes + 0.5
    np.testing.assert_allclose(quad.N @ nodal, 2.0 * quad.points + 0.5, rtol=1e-14)


def test_axis_quadrature_local_gradient_rows():
    # with the delta kernel the B rows are the element gradients, so the
    # nodal square function maps to twice the element midpoints
    mesh = IntervalMesh(1.0, 4)
    quad = AxisQuadrature(mesh, gauss_rule(1), LocalDelta(), 0.3)
    mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    np.testing.assert_allclose(quad.B @ mesh.nodes ** 2, 2.0 * mids, rtol=1e-13)


def test_axis_quadrature_consistent_unit_load():
    mesh = IntervalMesh(1.0, 5)
    quad = AxisQuadrature(mesh, gauss_rule(2), LocalDelta(), 0.3)
    h = mesh.spacing
    expected = np.full(6, h)
    expected[[0, -1]] = h / 2
    np.testing.assert_allclose(quad.load_vector(), expected, rtol=1e-14)


def test_gram_is_weighted_product():
    P = np.array([[1.0, 2.0], [0.5, -1.0]])
    Q = np.array([[2.0, 0.0], [1.0, 3.0]])
    w = np.array([0.5, 2.0])
    expected = 0.5 * np.outer(P[0], Q[0]) + 2.0 * np.outer(P[1], Q[1])
    np.testing.assert_allclose(gram(P, Q, w), expected, rtol=1e-15)
    sym = gram(P, P, w)
    np.testing.assert_allclose(sym, sym.T, rtol=1e-15)


# ---------------------------------------------------------------------------
# brute-force energy oracle for a 2-element bar
# ---------------------------------------------------------------------------

def _composed_gradient_by_quadrature(x, nodes, vals, kernel, l_f):
    """Nonlocal gradient of the nodal interpolant by adaptive quadrature only."""
    h = nodes[1] - nodes[0]
    n_el = nodes.size - 1

    def slope(y):
        e = min(int(y / h), n_el - 1)
        return (vals[e + 1] - vals[e]) / h

    def side(direction, reach, c):
        breaks = sorted(
            s for s in (direction * (x - n) for n in nodes) if 0.0 < s < reach
        )
        val, _ = integrate.quad(
            lambda s: kernel.eval(s) * slope(x - direction * s),
            0.0,
            reach,
            points=breaks,
            limit=200,
            epsabs=1e-13,
            epsrel=1e-13,
        )
        return c * val

    reach_minus = min(l_f, x - nodes[0])
    reach_plus = min(l_f, nodes[-1] - x)
    c_minus = 0.5 / kernel.interval_integral(reach_minus)
    c_plus = 0.5 / kernel.interval_integral(reach_plus)
    return side(1.0, reach_minus, c_minus) + side(-1.0, reach_plus, c_plus)


def test_bar_stiffness_matches_brute_force_energy_quadrature():
    # wide kernel, horizon spanning the whole bar: every entry of the axial
    # stiffness recovered by polarization of the brute-force strain energy
    kernel = ExponentialKernel(1.0)
    l_f = 1.0
    mesh = IntervalMesh(1.0, 2)
    quad = AxisQuadrature(mesh, gauss_rule(2), kernel, l_f)
    K = gram(quad.B, quad.B, quad.weights)

    def energy(vals):
        d = np.array(
            [
                _composed_gradient_by_quadrature(x, mesh.nodes, vals, kernel, l_f)
                for x in quad.points
            ]
        )
        return 0.5 * np.sum(quad.weights * d ** 2)

    basis = np.eye(3)
    brute = np.zeros((3, 3))
    cache = {}

    def e_of(key, vec):
        if key not in cache:
            cache[key] = energy(vec)
        return cache[key]

    for i in range(3):
        for j in range(3):
            e_ij = e_of((i, j), basis[i] + basis[j]) if i != j else 4.0 * e_of((i,), basis[i])
            brute[i, j] = e_ij - e_of((i,), basis[i]) - e_of((j,), basis[j])
    scale = np.max(np.abs(K))
    assert np.max(np.abs(brute - K)) <= 1e-6 * scale


# ---------------------------------------------------------------------------
# constraint handling
# ---------------------------------------------------------------------------

def _toy_system(n=4, seed=7):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    K = A @ A.T + n * np.eye(n)
    F = rng.standard_normal(n)
    return StiffnessSystem(matrix=K, load=F, constraints={})


def test_apply_dirichlet_empty_is_identity():
    system = _toy_system()
    assert apply_dirichlet(system, {}) is system


def test_apply_dirichlet_merges_and_validates():
    system = apply_dirichlet(_toy_system(), {0: 0.5})
    system = apply_dirichlet(system, {0: 0.5, 2: -1.0})
    assert system.constraints == {0: 0.5, 2: -1.0}
    with pytest.raises(ValueError, match="conflicting"):
        apply_dirichlet(system, {0: 0.25})
    with pytest.raises(ValueError, match="outside"):
        apply_dirichlet(system, {9: 0.0})
    with pytest.raises(ValueError, match="outside"):
        apply_dirichlet(system, {-1: 0.0})


def test_solve_identity_system():
    system = StiffnessSystem(matrix=np.eye(3), load=np.array([1.0, 0.0, 0.0]), constraints={})
    np.testing.assert_allclose(solve(system), [1.0, 0.0, 0.0], atol=1e-15)


def test_solve_matches_dense_oracle():
    system = _toy_system(n=6, seed=3)
    expected = np.linalg.solve(system.matrix, system.load)
    np.testing.assert_allclose(solve(system), expected, rtol=1e-12, atol=1e-14)


def test_constrained_solve_matches_lagrange_multiplier_oracle():
    system = _toy_system(n=6, seed=11)
    values = {0: 0.3, 4: -0.2}
    constrained = apply_dirichlet(system, values)
    u = solve(constrained)

    C = np.zeros((2, 6))
    C[0, 0] = 1.0
    C[1, 4] = 1.0
    g = np.array([0.3, -0.2])
    kkt = np.block([[system.matrix, C.T], [C, np.zeros((2, 2))]])
    rhs = np.concatenate([system.load, g])
    expected = np.linalg.solve(kkt, rhs)[:6]
    np.testing.assert_allclose(u, expected, rtol=1e-10, atol=1e-12)


def test_fully_constrained_solve_returns_prescribed_values():
    system = _toy_system(n=3, seed=1)
    u = solve(apply_dirichlet(system, {0: 1.0, 1: -2.0, 2: 0.25}))
    np.testing.assert_allclose(u, [1.0, -2.0, 0.25], atol=1e-15)


def test_solve_zero_constraints_zero_solution():
    system = _toy_system(n=3, seed=2)
    u = solve(apply_dirichlet(system, {0: 0.0, 1: 0.0, 2: 0.0}))
    np.testing.assert_allclose(u, 0.0, atol=1e-15)


def test_indefinite_matrix_names_failing_pivot():
    bad = StiffnessSystem(
        matrix=np.diag([2.0, -3.0]), load=np.zeros(2), constraints={}
    )
    with pytest.raises(SolverError, match=r"not positive definite.*dof 1"):
        solve(bad)


def test_failing_pivot_reported_in_global_indices():
    # dof 0 is eliminated, so the first free pivot that fails is global dof 2
    bad = StiffnessSystem(
        matrix=np.diag([1.0, 4.0, -1.0]), load=np.zeros(3), constraints={}
    )
    with pytest.raises(SolverError, match="dof 2"):
        solve(apply_dirichlet(bad, {0: 0.0}))


def test_solve_residual_guarantee():
    system = _toy_system(n=8, seed=5)
    constrained = apply_dirichlet(system, {1: 0.1, 6: -0.4})
    u = solve(constrained)
    free = [i for i in range(8) if i not in (1, 6)]
    r = (system.load - system.matrix @ u)[free]
    rhs = system.load[free] - system.matrix[np.ix_(free, [1, 6])] @ np.array([0.1, -0.4])
    assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(rhs)


# ---------------------------------------------------------------------------
# assembly entry point validation
# ---------------------------------------------------------------------------

class _BarModel:
    """Axial-only model used to exercise the generic assembly contract."""

    def __init__(self, n_elements=4):
        self.mesh = IntervalMesh(1.0, n_elements)

    def assemble(self, kernel, horizon_radius):
        quad = AxisQuadrature(self.mesh, gauss_rule(2), kernel, horizon_radius)
        K = gram(quad.B, quad.B, quad.weights)
        return StiffnessSystem(matrix=K, load=quad.load_vector(), constraints={})


class _GrowingKernel(ExponentialKernel):
    def eval(self, distance):
        return 1.0 + np.asarray(distance)


def test_assemble_rejects_bad_horizon():
    with pytest.raises(ValueError, match="positive"):
        fem.assemble(_BarModel(), ExponentialKernel(0.1), 0.0)


def test_assemble_rejects_inadmissible_kernel():
    with pytest.raises(KernelError):
        fem.assemble(_BarModel(), _GrowingKernel(0.1), 0.3)


def test_assemble_runs_model_assembly():
    system = fem.assemble(_BarModel(), ExponentialKernel(0.05), 0.2)
    assert system.n_dofs == 5
    np.testing.assert_allclose(system.matrix, system.matrix.T, atol=1e-15)


@pytest.mark.parametrize("kernel", [ExponentialKernel(0.08), PowerLawKernel(0.75)])
def test_bar_stiffness_symmetric_with_boundary_clipped_horizons(kernel):
    # horizon reaches the walls, so interior rows see unequal side lengths;
    # the Gram construction keeps the matrix symmetric regardless
    system = fem.assemble(_BarModel(n_elements=20), kernel, 0.4)
    K = system.matrix
    assert np.max(np.abs(K - K.T)) <= 1e-12 * np.max(np.abs(K))


def test_bar_constant_field_in_matrix_nullspace():
    system = fem.assemble(_BarModel(n_elements=12), ExponentialKernel(0.05), 0.25)
    ones = np.ones(system.n_dofs)
    scale = np.linalg.norm(system.matrix, 2)
    assert np.linalg.norm(system.matrix @ ones) <= 1e-10 * scale
