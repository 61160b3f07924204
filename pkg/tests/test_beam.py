import numpy as np
import pytest

from nle import fem
from nle.beam import (
    BeamSection,
    CantileverTipLoad,
    SimplySupportedUniformLoad,
    TimoshenkoBeamModel,
    beam_strains,
    beam_sweep,
    solve_beam,
)
from nle.kernels import ExponentialKernel, LocalDelta, PowerLawKernel, power_law
from nle.operator import HorizonSpec, build_operator_matrix
from nle.results import KernelSpec

SECTION = BeamSection()


# ---------------------------------------------------------------------------
# section and model setup
# ---------------------------------------------------------------------------

def test_section_derived_properties():
    assert SECTION.area == pytest.approx(0.01)
    assert SECTION.inertia == pytest.approx(8.3333333333e-6, rel=1e-9)
    assert SECTION.shear_modulus == pytest.approx(30e9 / 2.6, rel=1e-14)


def test_section_validation():
    with pytest.raises(ValueError, match="positive"):
        BeamSection(length=0.0)
    with pytest.raises(ValueError, match="poisson"):
        BeamSection(poisson=0.5)
    with pytest.raises(ValueError, match="poisson"):
        BeamSection(poisson=-0.1)


def test_model_rejects_odd_mesh_for_midspan_metric():
    with pytest.raises(ValueError, match="even"):
        TimoshenkoBeamModel(SECTION, SimplySupportedUniformLoad(), n_elements=7)


def test_metric_nodes():
    tip = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), n_elements=8)
    mid = TimoshenkoBeamModel(SECTION, SimplySupportedUniformLoad(), n_elements=8)
    assert tip.metric_node == 8
    assert mid.metric_node == 4


# ---------------------------------------------------------------------------
# local-limit equivalence with an independent textbook assembly
# ---------------------------------------------------------------------------

def _textbook_local_timoshenko(section, n_elements):
    """Element-loop Timoshenko stiffness, interleaved (u, w, theta) DOFs.

    Linear elements; axial/bending integrated exactly, shear with the
    one-point rule (selective reduced integration).
    """
    h = section.length / n_elements
    nn = n_elements + 1
    EA = section.modulus * section.area
    EI = section.modulus * section.inertia
    kGA = section.shear_correction * section.shear_modulus * section.area
    couple = np.array([[1.0, -1.0], [-1.0, 1.0]])
    axial = EA / h * couple
    bending = EI / h * couple
    shear_row = np.array([-1.0 / h, 1.0 / h, -0.5, -0.5])
    shear = kGA * h * np.outer(shear_row, shear_row)
    K = np.zeros((3 * nn, 3 * nn))
    for e in range(n_elements):
        iu = [3 * e, 3 * (e + 1)]
        iw = [3 * e + 1, 3 * (e + 1) + 1]
        it = [3 * e + 2, 3 * (e + 1) + 2]
        K[np.ix_(iu, iu)] += axial
        K[np.ix_(it, it)] += bending
        iwt = iw + it
        K[np.ix_(iwt, iwt)] += shear
    return K


def _interleave_permutation(nn):
    return np.array([3 * node + f for f in range(3) for node in range(nn)])


@pytest.mark.parametrize("n_elements", [3, 10])
def test_local_delta_assembly_matches_textbook(n_elements):
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), n_elements)
    system = model.assemble(LocalDelta(), 0.5)
    K_textbook = _textbook_local_timoshenko(SECTION, n_elements)
    perm = _interleave_permutation(n_elements + 1)
    expected = K_textbook[np.ix_(perm, perm)]
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(system.matrix - expected)) <= 1e-10 * scale


def test_cantilever_load_and_constraints():
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(magnitude=3.5), 6)
    system = model.assemble(LocalDelta(), 0.5)
    nn = 7
    expected = np.zeros(3 * nn)
    expected[nn + 6] = 3.5
    np.testing.assert_allclose(system.load, expected)
    assert system.constraints == {0: 0.0, nn: 0.0, 2 * nn: 0.0}


def test_udtl_consistent_load_and_constraints():
    model = TimoshenkoBeamModel(SECTION, SimplySupportedUniformLoad(intensity=2.0), 4)
    system = model.assemble(LocalDelta(), 0.5)
    nn = 5
    h = SECTION.length / 4
    w_load = system.load[nn : 2 * nn]
    expected = 2.0 * np.array([h / 2, h, h, h, h / 2])
    np.testing.assert_allclose(w_load, expected, rtol=1e-13)
    assert np.all(system.load[:nn] == 0.0) and np.all(system.load[2 * nn :] == 0.0)
    assert system.constraints == {0: 0.0, nn: 0.0, 2 * nn - 1: 0.0}


# ---------------------------------------------------------------------------
# structural invariants of the assembled system
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kernel", [ExponentialKernel(0.05), PowerLawKernel(0.75)])
def test_stiffness_symmetric_with_clipped_horizons(kernel):
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 20)
    K = model.assemble(kernel, 0.4).matrix
    assert np.max(np.abs(K - K.T)) <= 1e-12 * np.max(np.abs(K))


def test_rigid_body_modes_annihilated():
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 16)
    K = model.assemble(ExponentialKernel(0.05), 0.3).matrix
    nn = 17
    x = model.mesh.nodes
    translation = np.zeros(3 * nn)
    translation[nn : 2 * nn] = 1.0
    rotation = np.zeros(3 * nn)
    rotation[nn : 2 * nn] = x
    rotation[2 * nn :] = 1.0
    axial = np.zeros(3 * nn)
    axial[:nn] = 1.0
    scale = np.linalg.norm(K, 2)
    for mode in (translation, rotation, axial):
        assert np.linalg.norm(K @ mode) <= 1e-10 * scale * np.linalg.norm(mode)


def test_row_support_bounded_by_horizon_window():
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 40)
    l_f = 0.05
    K = model.assemble(ExponentialKernel(0.02), l_f).matrix
    nodes = model.mesh.nodes
    h = model.mesh.spacing
    nn = nodes.size
    for row in range(3 * nn):
        x_row = nodes[row % nn]
        window = np.sum(np.abs(nodes - x_row) <= 2 * l_f + h + 1e-12)
        assert np.count_nonzero(K[row]) <= 3 * window


# ---------------------------------------------------------------------------
# deflection oracles
# ---------------------------------------------------------------------------

def _analytic_cantilever_tip(section, P):
    EI = section.modulus * section.inertia
    kGA = section.shear_correction * section.shear_modulus * section.area
    L = section.length
    return P * L ** 3 / (3 * EI) + P * L / kGA


def _analytic_ss_udtl_midspan(section, q):
    EI = section.modulus * section.inertia
    kGA = section.shear_correction * section.shear_modulus * section.area
    L = section.length
    return 5 * q * L ** 4 / (384 * EI) + q * L ** 2 / (8 * kGA)


def test_local_cantilever_matches_analytic_tip_deflection():
    result = solve_beam(SECTION, CantileverTipLoad(magnitude=1.0), LocalDelta(), 0.5)
    expected = _analytic_cantilever_tip(SECTION, 1.0)
    assert expected == pytest.approx(1.3437e-6, rel=5e-4)
    assert result.w_max_local == pytest.approx(expected, rel=5e-3)
    assert result.w_max == result.w_max_local


def test_local_ss_udtl_matches_analytic_midspan_deflection():
    result = solve_beam(
        SECTION, SimplySupportedUniformLoad(intensity=1.0), LocalDelta(), 0.5
    )
    expected = _analytic_ss_udtl_midspan(SECTION, 1.0)
    assert result.w_max_local == pytest.approx(expected, rel=5e-3)


@pytest.mark.parametrize(
    "kernel",
    [ExponentialKernel(1e-6), power_law(1.0)],
    ids=["exponential-collapsed", "power-law-alpha-1"],
)
@pytest.mark.parametrize("load", [CantileverTipLoad(), SimplySupportedUniformLoad()])
def test_local_limit_recovers_unit_softening_ratio(kernel, load):
    result = solve_beam(SECTION, load, kernel, 0.5)
    assert result.softening_ratio == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("load", [CantileverTipLoad(), SimplySupportedUniformLoad()])
def test_nonlocal_kernels_soften_both_load_cases(load):
    exp = solve_beam(SECTION, load, ExponentialKernel(2.5e-3), 0.5)
    power = solve_beam(SECTION, load, PowerLawKernel(0.8), 0.5)
    assert exp.softening_ratio > 1.0
    assert power.softening_ratio > 1.0


def test_self_convergence_at_production_resolution():
    # the doubled mesh needs a looser residual tolerance: the attainable
    # float64 residual scales with the stiffness norm, which grows as 1/h
    kernel = ExponentialKernel(2.5e-3)
    coarse = solve_beam(SECTION, CantileverTipLoad(), kernel, 0.5, n_elements=200)
    fine = solve_beam(
        SECTION, CantileverTipLoad(), kernel, 0.5, n_elements=400, residual_tol=1e-9
    )
    assert abs(fine.w_max - coarse.w_max) / coarse.w_max < 5e-3


# ---------------------------------------------------------------------------
# strain evaluation
# ---------------------------------------------------------------------------

def _operator_on_mesh(mesh, kernel, l_f, points):
    horizon = HorizonSpec(l_f=l_f, x_min=0.0, x_max=mesh.length)
    return build_operator_matrix(mesh.nodes, points, horizon, kernel)


def test_strains_vanish_for_rigid_translation():
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 8)
    pts = np.linspace(0.07, 0.93, 11)
    op = _operator_on_mesh(model.mesh, ExponentialKernel(0.1), 0.3, pts)
    from nle.beam import BeamDisplacement

    disp = BeamDisplacement(
        nodes=model.mesh.nodes,
        u0=np.zeros(9),
        w0=np.full(9, 0.37),
        theta=np.zeros(9),
    )
    eps, gamma = beam_strains(disp, op, z=0.02)
    np.testing.assert_allclose(eps, 0.0, atol=1e-14)
    np.testing.assert_allclose(gamma, 0.0, atol=1e-14)


def test_strains_vanish_for_rigid_rotation():
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 8)
    pts = np.linspace(0.07, 0.93, 11)
    op = _operator_on_mesh(model.mesh, ExponentialKernel(0.1), 0.3, pts)
    from nle.beam import BeamDisplacement

    a = 0.004
    disp = BeamDisplacement(
        nodes=model.mesh.nodes,
        u0=np.zeros(9),
        w0=a * model.mesh.nodes,
        theta=np.full(9, a),
    )
    eps, gamma = beam_strains(disp, op, z=0.02)
    np.testing.assert_allclose(eps, 0.0, atol=1e-16)
    np.testing.assert_allclose(gamma, 0.0, atol=a * 1e-12)


def test_local_axial_strain_of_square_field():
    # nodal x^2 interpolant has slope 2*midpoint inside each element, which
    # the one-point rule samples exactly
    model = TimoshenkoBeamModel(SECTION, CantileverTipLoad(), 5)
    mesh = model.mesh
    mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    op = _operator_on_mesh(mesh, LocalDelta(), 0.3, mids)
    from nle.beam import BeamDisplacement

    disp = BeamDisplacement(
        nodes=mesh.nodes, u0=mesh.nodes ** 2, w0=np.zeros(6), theta=np.zeros(6)
    )
    eps, _ = beam_strains(disp, op, z=0.0)
    np.testing.assert_allclose(eps, 2.0 * mids, rtol=1e-13)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_beam_sweep_rows_in_grid_order():
    grid = [KernelSpec("exponential", 1e-3), KernelSpec("power_law", 0.8)]
    table = beam_sweep(SECTION, CantileverTipLoad(), grid, [0.5, 1.0], n_elements=40)
    assert table.columns[:4] == ("kernel", "param", "l_f", "load_case")
    assert [(r[0], r[1], r[2]) for r in table.rows] == [
        ("exponential", 1e-3, 0.5),
        ("exponential", 1e-3, 1.0),
        ("power_law", 0.8, 0.5),
        ("power_law", 0.8, 1.0),
    ]
    assert all(r[-1] == "ok" for r in table.rows)
    assert all(r[3] == "cantilever_tip" for r in table.rows)


def test_beam_sweep_local_row_is_exactly_unit():
    table = beam_sweep(
        SECTION, CantileverTipLoad(), [KernelSpec("local")], [0.5], n_elements=20
    )
    assert table.column("w_bar") == [1.0]


def test_beam_sweep_error_rows_keep_sweep_alive():
    grid = [KernelSpec("power_law", 1.5), KernelSpec("exponential", 1e-3)]
    table = beam_sweep(SECTION, CantileverTipLoad(), grid, [0.5], n_elements=20)
    assert table.rows[0][-1] == "error:KernelError"
    assert table.rows[0][4:7] == (None, None, None)
    assert table.rows[1][-1] == "ok"


def test_beam_sweep_rejects_inadmissible_grid():
    with pytest.raises(ValueError, match="floor"):
        beam_sweep(SECTION, CantileverTipLoad(), [KernelSpec("power_law", 0.45)], [0.5])
    with pytest.raises(ValueError, match="nonempty"):
        beam_sweep(SECTION, CantileverTipLoad(), [], [0.5])


def test_beam_sweep_thread_count_does_not_change_rows():
    grid = [KernelSpec("exponential", 1e-3), KernelSpec("power_law", 0.8)]
    serial = beam_sweep(SECTION, CantileverTipLoad(), grid, [0.5, 0.75], n_elements=40)
    threaded = beam_sweep(
        SECTION, CantileverTipLoad(), grid, [0.5, 0.75], n_elements=40, threads=4
    )
    assert serial.rows == threaded.rows
