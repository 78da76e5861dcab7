"""Banded solves and the implicit reference integrators."""

import numpy as np
import pytest

from stslab.experiments import bs_closed_form, bs_sinh_grid, call, payoff_eval
from stslab.grids import Grid1D, make_uniform
from stslab.implicit import (BandedMatrix, TRBDF2_GAMMA, banded_factor,
                             bandwidth_of, crank_nicolson_run,
                             operator_banded, trbdf2_run)
from stslab.operators import (StencilOperator, UpwindPolicy, assemble_bs,
                              assemble_heston, to_sparse)


def scalar_op(z: float) -> StencilOperator:
    """Two decoupled copies of the scalar equation y' = z y."""
    g = Grid1D(np.array([0.0, 1.0]))
    zeros = np.zeros(2)
    return StencilOperator(a=zeros.copy(), b=np.full(2, float(z)),
                           c=zeros.copy(), d=zeros.copy(), e=zeros.copy(),
                           cross=zeros.copy(), gx=g, gv=None, r=-z,
                           policy=UpwindPolicy.NONE,
                           fitted_x=np.zeros(2, dtype=bool),
                           fitted_v=np.zeros(2, dtype=bool))


def trbdf2_amplification(z: float) -> float:
    g = TRBDF2_GAMMA
    mid = (1.0 + 0.5 * g * z) / (1.0 - 0.5 * g * z)
    c_mid = 1.0 / (g * (2.0 - g))
    c_old = (1.0 - g) ** 2 / (g * (2.0 - g))
    return (c_mid * mid - c_old) / (1.0 - (1.0 - g) * z / (2.0 - g))


# ------------------------------------------------------------- banded algebra

def test_band_storage_layout(heston_params, gx_small, gv_small):
    op = assemble_heston(heston_params, gx_small, gv_small,
                         UpwindPolicy.PARTIAL_FITTING)
    alpha, beta = 1.0, -0.37
    bm = operator_banded(op, alpha, beta)
    dense = alpha * np.eye(op.size) + beta * to_sparse(op).toarray()
    rebuilt = np.zeros_like(dense)
    for i in range(op.size):
        for j in range(max(0, i - bm.kl), min(op.size, i + bm.ku + 1)):
            rebuilt[i, j] = bm.ab[bm.kl + bm.ku + i - j, j]
    assert np.array_equal(rebuilt, dense)
    assert bm.kl == bm.ku == bandwidth_of(op) == gv_small.m + 2


@pytest.mark.parametrize("policy", [UpwindPolicy.NONE, UpwindPolicy.PARTIAL_FITTING],
                         ids=lambda p: p.value)
def test_banded_solve_matches_dense(policy, heston_params):
    from stslab.experiments import foulon_grid_v, foulon_grid_x
    gx = foulon_grid_x(100.0, m=9)
    gv = foulon_grid_v(n=6)
    op = assemble_heston(heston_params, gx, gv, policy)
    alpha, beta = 1.0, -0.05
    dense = alpha * np.eye(op.size) + beta * to_sparse(op).toarray()
    rng = np.random.default_rng(5)
    rhs = rng.standard_normal(op.size)
    lu = banded_factor(operator_banded(op, alpha, beta))
    got = lu.solve(rhs)
    want = np.linalg.solve(dense, rhs)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def test_banded_solve_matches_dense_1d(bs_params):
    op = assemble_bs(bs_params, make_uniform(0.0, 150.0, 40),
                     UpwindPolicy.PARTIAL_FITTING)
    assert bandwidth_of(op) == 1
    dense = np.eye(41) - 0.01 * to_sparse(op).toarray()
    rhs = np.sin(np.arange(41.0))
    got = banded_factor(operator_banded(op, 1.0, -0.01)).solve(rhs)
    assert np.allclose(got, np.linalg.solve(dense, rhs), rtol=1e-10)


def test_singular_band_matrix_raises():
    bm = BandedMatrix(ab=np.zeros((4, 3)), kl=1, ku=1, n=3)
    with pytest.raises(np.linalg.LinAlgError, match="singular"):
        banded_factor(bm)


def test_solve_length_guard():
    op = scalar_op(-1.0)
    lu = banded_factor(operator_banded(op, 1.0, -0.1))
    with pytest.raises(ValueError, match="rhs length"):
        lu.solve(np.zeros(5))


# ------------------------------------------------------ scalar amplification

@pytest.mark.parametrize("z", [-0.5, -2.0, -10.0, -100.0])
def test_trbdf2_scalar_amplification(z):
    y = trbdf2_run(scalar_op(z), np.ones(2), 1.0, 1)
    assert y[0] == pytest.approx(trbdf2_amplification(z), rel=1e-12)
    assert y[0] == y[1]


def test_trbdf2_l_stable():
    z = -1e8
    assert abs(trbdf2_amplification(z)) < 1e-3
    y = trbdf2_run(scalar_op(z), np.ones(2), 1.0, 1)
    assert abs(y[0]) < 1e-3


def test_trbdf2_second_order():
    errs = []
    for k in (0.02, 0.01):
        y = trbdf2_run(scalar_op(-1.0), np.ones(2), k, 1)
        errs.append(abs(y[0] - np.exp(-k)))
    # one-step defect of a second-order scheme scales like k^3
    assert 6.0 < errs[0] / errs[1] < 10.0


def test_crank_nicolson_scalar_startup_and_steps():
    z, expiry, l = -3.0, 1.0, 4
    k = expiry / l
    y = crank_nicolson_run(scalar_op(z), np.ones(2), expiry, l)
    be_half = 1.0 / (1.0 - 0.5 * k * z)
    cn = (1.0 + 0.5 * k * z) / (1.0 - 0.5 * k * z)
    assert y[0] == pytest.approx(be_half ** 4 * cn ** (l - 2), rel=1e-13)


def test_crank_nicolson_guards(bs_params):
    op = scalar_op(-1.0)
    with pytest.raises(ValueError, match="l >= 3"):
        crank_nicolson_run(op, np.ones(2), 1.0, 2)
    with pytest.raises(ValueError, match="expiry > 0"):
        crank_nicolson_run(op, np.ones(2), 0.0, 8)
    with pytest.raises(ValueError, match="initial shape"):
        crank_nicolson_run(op, np.ones(3), 1.0, 8)
    op2 = assemble_bs(bs_params, make_uniform(0.0, 150.0, 10), UpwindPolicy.NONE)
    with pytest.raises(ValueError, match="one-dimensional"):
        trbdf2_run(assemble_heston_small(), np.ones((11, 3)), 1.0, 4)
    with pytest.raises(ValueError, match="l >= 1"):
        trbdf2_run(op2, np.ones(11), 1.0, 0)


def assemble_heston_small():
    from stslab.experiments import default_heston_params, foulon_grid_v, foulon_grid_x
    return assemble_heston(default_heston_params(), foulon_grid_x(100.0, m=10),
                           foulon_grid_v(n=2), UpwindPolicy.NONE)


# ----------------------------------------------------- PDE reference checks

def test_cn_second_order_at_spot(heston_params, gx_small, gv_small):
    op = assemble_heston(heston_params, gx_small, gv_small,
                         UpwindPolicy.PARTIAL_FITTING)
    y0 = payoff_eval(call(heston_params.strike), gx_small, gv_small)
    from stslab.experiments import price_at_spot
    prices = {}
    for l in (100, 200, 3200):
        fld = crank_nicolson_run(op, y0, heston_params.expiry, l)
        prices[l] = price_at_spot(fld, gx_small, heston_params.spot, gv_small,
                                  heston_params.v0)
    e1 = abs(prices[100] - prices[3200])
    e2 = abs(prices[200] - prices[3200])
    assert 3.0 < e1 / e2 < 5.5


def test_references_agree_with_closed_form(bs_params):
    grid = bs_sinh_grid(m=200)
    op = assemble_bs(bs_params, grid, UpwindPolicy.PARTIAL_FITTING)
    payoff = call(100.0)
    y0 = payoff_eval(payoff, grid)
    exact = bs_closed_form(bs_params, payoff)
    from stslab.experiments import price_at_spot
    cn = price_at_spot(crank_nicolson_run(op, y0, 1.0, 800), grid, 100.0)
    tb = price_at_spot(trbdf2_run(op, y0, 1.0, 800), grid, 100.0)
    assert cn == pytest.approx(exact, rel=5e-4)
    assert tb == pytest.approx(exact, rel=5e-4)
    assert cn == pytest.approx(tb, rel=1e-4)
