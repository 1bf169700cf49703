import numpy as np
import pytest

from todalax.chevalley import cached_algebra
from todalax.laxflow import vacuum_coefficients
from todalax import toda as td

ALL_TYPES = ([("A", n) for n in range(1, 9)] +
             [("B", n) for n in range(2, 9)] +
             [("C", n) for n in range(3, 9)] +
             [("D", n) for n in range(4, 9)] +
             [("E", 6), ("E", 7), ("E", 8), ("F", 4), ("G", 2)])


@pytest.fixture(scope="module")
def a2_data(a2, a2_conj):
    return td.CyclicData(a2, a2_conj, tuple(vacuum_coefficients(a2)))


@pytest.fixture(scope="module")
def flow_setup(a2, a2_conj, a2_d4_grids):
    g = a2_d4_grids[0.01]
    return g, td.reconstruct_omega(g), td.grid_cyclic_data(g, a2_conj)


@pytest.mark.parametrize("series,rank", ALL_TYPES)
def test_mark_weighted_duals_sum_to_zero(series, rank):
    """sum_j m_j alpha_j-sharp = 0 exactly (marks over the extended set)."""
    rs = cached_algebra(series, rank).rs
    marks = (1,) + tuple(rs.marks)
    total = None
    for mark, root in zip(marks, rs.extended_simple_roots()):
        term = rs.killing_dual(root).scale(mark)
        total = term if total is None else total + term
    assert total.is_zero


def test_vacuum_residual_exact(a2, a2_data):
    om = td.TodaField(a2, 0.01, np.zeros((11, 11, a2.rank)))
    assert td.toda_residual(om, a2_data).sup == 0.0


def test_constant_omega_matches_closed_form(a2, a2_data):
    c = np.array([0.3, -0.2])
    om = td.TodaField(a2, 0.01, np.broadcast_to(c, (11, 11, 2)).copy())
    rep = td.toda_residual(om, a2_data)
    want = td.dual_rhs(c, a2_data)
    assert abs(rep.sup - np.max(np.abs(want))) < 1e-12


def test_rhs_forms_agree_at_random_points(a2, a2_data):
    rng = np.random.default_rng(0)
    om = td.TodaField(a2, 0.01, 0.3 * rng.standard_normal((7, 7, a2.rank)))
    rep = td.toda_bracket_form(om, a2_data)
    assert rep.sup < 1e-13
    assert rep.details["off_cartan"] < 1e-13


def test_rhs_forms_agree_for_noncyclic_data(a2, a2_conj):
    r = vacuum_coefficients(a2)
    r[1] = 0.0
    data = td.CyclicData(a2, a2_conj, tuple(r))
    assert not data.is_cyclic
    om = td.TodaField(a2, 0.01, 0.2 * np.ones((5, 5, a2.rank)))
    assert td.toda_bracket_form(om, data).sup < 1e-13


def test_reality_precondition(a2):
    with pytest.raises(td.TodaDomainError):
        td.TodaField(a2, 0.01, 1j * np.ones((5, 5, a2.rank)))


def test_masses_are_classical_for_compact(a2, a2_data):
    assert a2_data.rho == [0, 1, 2]
    for m, r in zip(a2_data.masses, a2_data.r):
        assert abs(m - abs(r) ** 2) < 1e-15
    assert a2_data.mass_reality_defect() == 0.0


def test_reconstruction(flow_setup):
    g, om, data = flow_setup
    assert om.loop_defect < 1e-8
    assert om.reality_defect < 1e-12
    assert om.omega.dtype == float
    # origin pinned to zero
    assert np.max(np.abs(om.omega[0, 0])) == 0.0


def test_reconstruction_rejects_broken_grading(a2, a2_d4_grids):
    import copy
    g = copy.deepcopy(a2_d4_grids[0.02])
    idx = a2.root_vector_index(a2.rs.simple_roots[0])
    g.xi[..., 2 * g.d - 1, idx] += 0.1
    with pytest.raises(td.TodaDomainError):
        td.reconstruct_omega(g)


def test_w_constancy(flow_setup):
    g, om, data = flow_setup
    assert td.w_constancy(g, om).sup < 1e-8


def test_flow_omega_satisfies_toda(a2_conj, a2_d4_grids, flow_setup):
    _, _, data = flow_setup
    oms = [td.reconstruct_omega(a2_d4_grids[h]) for h in (0.01, 0.005)]
    rep = td.toda_residual(oms, data)
    assert rep.order is not None and rep.order >= 1.8


def test_frame_form_tracks_residual(flow_setup):
    g, om, data = flow_setup
    lams = np.exp(2j * np.pi * np.arange(4) / 4)
    frame = td.toda_frame_form(om, data, lams)
    res = td.toda_residual(om, data)
    assert frame.sup <= 10 * max(res.sup, 1e-9)


def test_normalization(flow_setup, a2):
    g, om, data = flow_setup
    c = td.g1_coefficient_grid(g)
    rep = td.normalization_check(data, c)
    assert rep.sup < 1e-8
    assert rep.details["r_invariant_agreement"] < 1e-12
    # scaled node -> flagged spread
    c2 = c.copy()
    c2[3, 3] *= 2.0
    assert td.normalization_check(data, c2).sup > 1e-3
    # zero coefficient -> non-cyclic flag
    c3 = c.copy()
    c3[0, 0, 0] = 0.0
    rep3 = td.normalization_check(data, c3)
    assert rep3.details.get("non_cyclic") == 1.0


def test_vacuum_recursion_exact(a2, a2_data):
    om = td.TodaField(a2, 0.01, np.zeros((9, 9, a2.rank)),
                      omega_z=np.zeros((9, 9, a2.rank), complex),
                      omega_zbar=np.zeros((9, 9, a2.rank), complex))
    res = td.formal_killing_recursion(om, a2_data, 2)
    assert max(np.max(np.abs(v)) for v in res.x_coeffs.values()) == 0.0
    assert np.max(np.abs(res.xi[1] - a2_data.W.to_dense())) == 0.0
    assert not res.noncyclic_nodes.any()


def test_recursion_certifies_on_flow(flow_setup, unit_lambdas):
    from todalax.laxflow import mc_residual
    g, om, data = flow_setup
    mc = mc_residual(g, unit_lambdas)
    res = td.formal_killing_recursion(om, data, 2)
    assert res.top_defect < 1e-10
    for deg in (0, 1):
        assert res.lax_report.details[f"deg_{deg}"] <= 10 * mc.sup
    assert res.projection_defect < 1e-9
    assert not res.noncyclic_nodes.any()


def test_recursion_flags_noncyclic_nodes(a2, a2_conj):
    r = vacuum_coefficients(a2)
    r[0] = 0.0
    data = td.CyclicData(a2, a2_conj, tuple(r))
    om = td.TodaField(a2, 0.01, np.zeros((5, 5, a2.rank)),
                      omega_z=np.zeros((5, 5, a2.rank), complex),
                      omega_zbar=np.zeros((5, 5, a2.rank), complex))
    res = td.formal_killing_recursion(om, data, 1)
    assert res.noncyclic_nodes.all()


def test_jacobi_zero_field_is_killing_equation(flow_setup):
    g, om, data = flow_setup
    res = td.formal_killing_recursion(om, data, 4)
    # coefficients down to -3 are exact with M=4; residuals certified
    # for degrees >= -2 (the -3 equation references the truncated -4)
    y = {j: v for j, v in res.xi.items() if j >= -3}
    omdot = np.zeros(om.omega.shape, complex)
    jr = td.jacobi_residual(y, omdot, om, data, extra_margin=res.margin)
    for deg in (-2, -1, 0, 1):
        lax = res.lax_report.details[f"deg_{deg}"]
        assert jr.details[f"deg_{deg}"] <= 2 * lax + 1e-12
    assert jr.details["elliptic"] == 0.0


def test_build_yl_and_jacobi(flow_setup):
    g, om, data = flow_setup
    res = td.formal_killing_recursion(om, data, 5)
    y = {j: v for j, v in res.xi.items() if j >= -3}
    yl, omdot = td.build_Yl(y, 1, data.alg)
    # highest coefficient of every Y^l is Y_1
    assert np.max(np.abs(yl[4] - y[1])) == 0.0
    jr = td.jacobi_residual(yl, omdot, om, data, extra_margin=res.margin)
    worst_lax = max(res.lax_report.details.values())
    assert jr.sup <= 2 * worst_lax + 1e-10
    scale = max(1.0, float(np.max(np.abs(
        td._interior(omdot, res.margin)))))
    assert jr.details["elliptic"] <= 1e-3 * scale


def test_build_yl_requires_depth(flow_setup):
    g, om, data = flow_setup
    res = td.formal_killing_recursion(om, data, 2)
    y = {j: v for j, v in res.xi.items() if j >= -1}
    with pytest.raises(td.TodaDomainError):
        td.build_Yl(y, 1, data.alg)


def test_jacobi_random_field_fails(flow_setup):
    g, om, data = flow_setup
    rng = np.random.default_rng(0)
    y = {0: rng.standard_normal(om.omega.shape[:2] + (data.alg.dim,))}
    omdot = np.zeros(om.omega.shape, complex)
    assert td.jacobi_residual(y, omdot, om, data).sup > 1.0
