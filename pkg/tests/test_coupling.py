import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fembem.bem.spaces import BemSpace
from fembem.coupling import DATA_MODES, assemble_rhs, assemble_system, check_compatibility, solve
from fembem.femspace import build_fe_space, trace_restriction
from fembem.manufactured import CASE_K1, CASE_K2, jump_data
from fembem.mesh import build_lshape, extract_boundary
from fembem.bem.spaces import TraceSpace

from oracles import level_system


def zero_volume(x):
    return np.zeros(np.shape(x)[:-1])


def zero_boundary(x, n):
    return np.zeros(np.shape(x)[:-1])


def fresh(level, k):
    """A system sharing matrices with the cached one but with its own rhs slots."""
    s = level_system(level, k)
    return assemble_system.__globals__["CoupledSystem"](s.fe, s.trace, s.T, s.M, s.A, s.D, s.B, s.C)


@pytest.mark.parametrize("k", [1, 2])
def test_constants_in_kernel_of_first_row(k):
    s = fresh(2, k)
    r1, r2 = s.apply(np.ones(s.n_fem), np.zeros(s.n_bem))
    assert np.abs(r1).max() < 1e-11
    from fembem.bem.matrices import mass_matrix
    assert np.allclose(r2, mass_matrix(s.M, s.T) @ np.ones(s.T.ndof), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_block_matrix_nonsingular_and_consistent(k):
    s = fresh(0, k)
    K = s.matrix().toarray()
    sv = np.linalg.svd(K, compute_uv=False)
    assert sv[-1] > 1e-8 * sv[0]
    rng = np.random.default_rng(0)
    u, phi = rng.normal(size=s.n_fem), rng.normal(size=s.n_bem)
    r1, r2 = s.apply(u, phi)
    assert np.allclose(K @ np.concatenate([u, phi]), np.concatenate([r1, r2]), atol=1e-12)


def test_zero_data_gives_zero_solution():
    s = fresh(2, 1)
    assemble_rhs(s, zero_volume, zero_boundary, zero_boundary)
    sol = solve(s)
    assert np.all(sol.u == 0) and np.all(sol.phi == 0)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("mode", DATA_MODES)
def test_constant_jump(k, mode):
    # u - u_ext = 1 with no flux jump: u = 1 inside, u_ext = 0
    s = fresh(2, k)
    assemble_rhs(s, zero_volume, lambda x, n: np.ones(np.shape(x)[:-1]), zero_boundary, mode)
    assert np.abs(s.rhs1).max() < 1e-11
    sol = solve(s)
    assert np.allclose(sol.u, 1.0, atol=1e-10)
    assert np.abs(sol.phi).max() < 1e-10


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("mode", DATA_MODES)
def test_linear_patch(k, mode):
    # u = a.x inside, u_ext = 0: jumps u0 = a.x, phi0 = a.n; the discrete spaces contain the solution
    a = np.array([0.7, -1.3])
    s = fresh(2, k)
    assemble_rhs(s, zero_volume, lambda x, n: x @ a, lambda x, n: np.asarray(n) @ a, mode)
    sol = solve(s)
    assert np.allclose(sol.u, s.fe.dof_coords @ a, atol=1e-10)
    assert np.abs(sol.phi).max() < 1e-10


def test_solve_deterministic_and_methods_agree():
    s = fresh(3, 2)
    d = jump_data(CASE_K2)
    assemble_rhs(s, d.f, d.u0, d.phi0)
    a, b = solve(s), solve(s)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.phi, b.phi)
    c = solve(s, "schur")
    scale = np.abs(a.u).max()
    assert np.abs(a.u - c.u).max() < 1e-9 * scale
    assert np.abs(a.phi - c.phi).max() < 1e-9 * max(1.0, np.abs(a.phi).max())
    assert a.diagnostics["relative_residual"] < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_linearity(a, b):
    s = fresh(1, 1)
    d = jump_data(CASE_K1)
    assemble_rhs(s, d.f, d.u0, d.phi0)
    base = solve(s)

    def u0(x, n):
        return a * d.u0(x, n) + b

    def phi0(x, n):
        return a * d.phi0(x, n)

    assemble_rhs(s, d.f, u0, phi0)
    comb = solve(s)
    scale = 1 + abs(a) * np.abs(base.u).max()
    assert np.allclose(comb.u, a * base.u + b, atol=1e-9 * scale)
    assert np.allclose(comb.phi, a * base.phi, atol=1e-9 * scale)


def test_solve_requires_rhs_and_known_method():
    s = fresh(0, 1)
    with pytest.raises(ValueError):
        solve(s)
    assemble_rhs(s, zero_volume, zero_boundary, zero_boundary)
    with pytest.raises(ValueError):
        solve(s, "gmres")


def test_unknown_data_mode():
    s = fresh(0, 1)
    for mode in ("exact-quadrature-u0", "bogus"):
        with pytest.raises(ValueError):
            assemble_rhs(s, zero_volume, zero_boundary, zero_boundary, mode)


def test_assemble_system_rejects_mismatch():
    mesh = build_lshape(1)
    bm = extract_boundary(mesh)
    fe = build_fe_space(mesh, 1, bm)
    with pytest.raises(ValueError):
        assemble_system(fe, trace_restriction(fe, bm), TraceSpace(bm, 1), BemSpace(bm, 2))


@pytest.mark.parametrize("case", [CASE_K1, CASE_K2])
def test_compatibility(case):
    s = level_system(3, case.k_target)
    d = jump_data(case)
    assert abs(check_compatibility(d.f, d.phi0, s.fe, s.M)) <= 1e-8
    one_v = lambda x: np.ones(np.shape(x)[:-1])  # noqa: E731
    one_b = lambda x, n: np.ones(np.shape(x)[:-1])  # noqa: E731
    assert check_compatibility(one_v, zero_boundary, s.fe, s.M) == pytest.approx(0.12, rel=1e-13)
    assert check_compatibility(zero_volume, one_b, s.fe, s.M) == pytest.approx(1.6, rel=1e-13)


def test_project_both_close_to_project_u0():
    out = {}
    for mode in DATA_MODES:
        s = fresh(3, 1)
        d = jump_data(CASE_K1)
        assemble_rhs(s, d.f, d.u0, d.phi0, mode)
        out[mode] = solve(s).u
    diff = np.abs(out["project-u0"] - out["project-both"]).max()
    assert 0 < diff < 1e-2 * np.abs(out["project-u0"]).max()


def test_dump_matrix(tmp_path):
    s = fresh(0, 1)
    path = tmp_path / "K.txt"
    s.dump_matrix(path)
    rows = np.loadtxt(path)
    K = s.matrix().toarray()
    assert len(rows) == s.matrix().nnz
    i, j = rows[:, 0].astype(int), rows[:, 1].astype(int)
    assert np.array_equal(rows[:, 2], K[i, j])
