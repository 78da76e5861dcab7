"""Spatial discretization of the pricing operators.

Builds the semi-discrete system  df/dt = M f  for the stochastic-volatility
model

    df/dt = (v x^2/2) f_xx + rho sigma x v f_xv + (sigma^2 v/2) f_vv
            + (r - q) x f_x + kappa (theta - v) f_v - r f

and for its one-dimensional constant-volatility counterpart, on tensor-product
grids that may be non-uniform.  Interior nodes use central differences; where
a direction is convection dominated the treatment is controlled by an
UpwindPolicy (exponential fitting of the diffusion coefficient, or first-order
one-sided advection).  Edge rows use one-sided closures: pure advection plus
discounting at the x edges (value linear in x), one-sided v-advection at the
v edges.

Coefficients are stored per node and do not include the time step; the
integrators multiply by dt themselves.  An operator holds six coefficient
arrays a, b, c, d, e, cross so that

    (M f)_{ij} = a_{ij} f_{i-1,j} + b_{ij} f_{ij} + c_{ij} f_{i+1,j}
               + d_{ij} f_{i,j-1} + e_{ij} f_{i,j+1}
               + cross_{ij} (f_{i+1,j+1} - f_{i+1,j-1} - f_{i-1,j+1} + f_{i-1,j-1})

with out-of-lattice neighbors contributing zero because their coefficients
vanish by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse

from .grids import Grid1D

__all__ = [
    "HestonParams",
    "BsParams",
    "UpwindPolicy",
    "StencilOperator",
    "peclet",
    "fitting_factor",
    "assemble_heston",
    "assemble_bs",
    "apply",
    "to_sparse",
    "write_operator_csv",
]


@dataclass(frozen=True)
class HestonParams:
    """Model parameters of the stochastic-volatility dynamics."""

    v0: float
    theta: float
    kappa: float
    sigma: float
    rho: float
    r: float
    q: float
    spot: float
    strike: float
    expiry: float

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError(f"need kappa > 0, got {self.kappa!r}")
        if self.sigma < 0.0:
            raise ValueError(f"need sigma >= 0, got {self.sigma!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"need rho in [-1, 1], got {self.rho!r}")
        if self.v0 < 0.0 or self.theta < 0.0:
            raise ValueError("need v0 >= 0 and theta >= 0")
        if not self.spot > 0.0 or not self.strike > 0.0:
            raise ValueError("need spot > 0 and strike > 0")
        if not self.expiry > 0.0:
            raise ValueError(f"need expiry > 0, got {self.expiry!r}")

    @property
    def mu(self) -> float:
        """Drift coefficient r - q of the spot advection."""
        return self.r - self.q


@dataclass(frozen=True)
class BsParams:
    """Constant-volatility model parameters."""

    sigma: float
    r: float
    q: float
    spot: float
    expiry: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"need sigma > 0, got {self.sigma!r}")
        if not self.spot > 0.0:
            raise ValueError(f"need spot > 0, got {self.spot!r}")
        if not self.expiry > 0.0:
            raise ValueError(f"need expiry > 0, got {self.expiry!r}")

    @property
    def mu(self) -> float:
        return self.r - self.q


class UpwindPolicy(Enum):
    """Treatment of convection-dominated nodes.

    NONE            central differences everywhere.
    PARTIAL_FITTING exponential fitting per dimension wherever |P| >= 2.
    FOULON_REGION   exponential fitting restricted to the v rows with
                    v = v_min or v > 1 (the region upwinded in the ADI
                    literature); elsewhere central.
    OSULLIVAN       first-order one-sided advection per dimension wherever
                    |P| >= 2; diffusion stays central and unfitted.
    """

    NONE = "none"
    PARTIAL_FITTING = "partial-fitting"
    FOULON_REGION = "foulon-region-fitting"
    OSULLIVAN = "osullivan-one-sided"


PECLET_THRESHOLD = 2.0


@dataclass
class StencilOperator:
    """Nine-point (2-D) or three-point (1-D) discrete operator M."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    cross: np.ndarray
    gx: Grid1D
    gv: Grid1D | None
    r: float
    policy: UpwindPolicy
    fitted_x: np.ndarray = field(repr=False, default=None)
    fitted_v: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.b.shape

    @property
    def is_1d(self) -> bool:
        return self.gv is None

    @property
    def size(self) -> int:
        return self.b.size


def peclet(params, gx: Grid1D, gv: Grid1D | None = None):
    """Per-node cell Peclet numbers evaluated with fitting factor 1.

    Returns (P_x, P_v); P_v is an empty array for the 1-D model.  Backward
    spacings are used (the spacing at index 0 is reused for the first node,
    whose row has no second-derivative term anyway).  Nodes where the
    diffusion coefficient vanishes report an infinite Peclet number; the
    assembly policies handle those through the limiting form of the fitted
    diffusion, and edge rows use one-sided closures regardless.
    """
    x = gx.nodes
    hx = np.empty_like(x)
    hx[1:] = gx.spacings
    hx[0] = hx[1]
    mu = params.mu
    if gv is None:
        den = params.sigma**2 * x
        with np.errstate(divide="ignore", invalid="ignore"):
            px = np.where(den != 0.0, 2.0 * hx * mu / den, np.inf * np.sign(mu))
        return px, np.empty(0)
    v = gv.nodes
    wv = np.empty_like(v)
    wv[1:] = gv.spacings
    wv[0] = wv[1]
    den_x = v[None, :] * x[:, None]
    num_x = 2.0 * hx[:, None] * mu
    adv_v = params.kappa * (params.theta - v)
    den_v = params.sigma**2 * v
    num_v = 2.0 * wv * adv_v
    with np.errstate(divide="ignore", invalid="ignore"):
        px = np.where(den_x != 0.0, num_x / den_x, np.inf * np.sign(num_x))
        pv = np.where(den_v != 0.0, num_v / den_v, np.inf * np.sign(num_v))
    return px, pv


def fitting_factor(p):
    """Exponential fitting factor beta(P) = (P/2)/tanh(P/2).

    Even in P, equals 1 at P = 0, and grows like |P|/2 once advection
    dominates; multiplying the diffusion coefficient by beta turns the central
    scheme into one that resolves the advective limit without oscillation.
    """
    p = np.asarray(p, dtype=float)
    half = 0.5 * p
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.where(half == 0.0, 1.0, half / np.tanh(half))
    out = np.where(np.isinf(p), np.inf, out)
    if out.ndim == 0:
        return float(out)
    return out


def _fitted_diffusion(diff, adv, h_lo, h_hi):
    """beta * diff evaluated through the overflow-safe form s/tanh(s/D).

    s is spacing * advection with the full cell width h_lo + h_hi as the
    spacing, i.e. beta = fitting_factor(2 * (h_lo + h_hi) * A / D).  The cell
    width (the same width that appears in the stencil denominators) is the
    one spacing choice that keeps BOTH off-diagonal coefficients strictly
    positive in the advection-dominated limit on a stretched mesh: the
    anti-upwind coefficient tends to A/(h_lo + h_hi) instead of turning
    negative (single-sided spacing, oscillatory spurious eigenvalues) or
    collapsing to zero (upwind-side spacing, a one-way cascade whose Jordan
    structure is hypersensitive to the mixed-derivative coupling).  Where
    D == 0 the value reduces to the advective limit |A| * (h_lo + h_hi).
    """
    diff, adv, h_lo, h_hi = np.broadcast_arrays(
        np.asarray(diff, dtype=float), np.asarray(adv, dtype=float), h_lo, h_hi
    )
    s = (h_lo + h_hi) * adv
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        arg = np.where(diff != 0.0, s / diff, np.inf * np.sign(s))
        out = s / np.tanh(arg)
    return np.where(s == 0.0, diff, out)


def _policy_masks(policy: UpwindPolicy, px, pv, v):
    big_x = np.abs(px) >= PECLET_THRESHOLD
    big_v = np.abs(pv) >= PECLET_THRESHOLD if pv.size else np.zeros(0, dtype=bool)
    if policy is UpwindPolicy.NONE:
        return np.zeros_like(big_x), np.zeros_like(big_v)
    if policy in (UpwindPolicy.PARTIAL_FITTING, UpwindPolicy.OSULLIVAN):
        return big_x, big_v
    if policy is UpwindPolicy.FOULON_REGION:
        region = (v == v[0]) | (v > 1.0)
        return big_x & region[None, :], big_v & region
    raise ValueError(f"unknown policy {policy!r}")


def _x_direction_parts(adv, diff_eff, h_lo, h_hi, onesided):
    """Central stencil contributions of  A f' + (D/2) f''  on a non-uniform mesh.

    Returns (lo, mid, hi) coefficient contributions for the f_{k-1}, f_k,
    f_{k+1} neighbors.  Where onesided is set, the advection difference is
    replaced by the first-order difference on the side the information comes
    from; the diffusion part stays central.
    """
    span = h_lo + h_hi
    adv_c = np.where(onesided, 0.0, adv)
    lo = -(adv_c * h_hi - diff_eff) / (h_lo * span)
    hi = (adv_c * h_lo + diff_eff) / (h_hi * span)
    mid = -(adv_c * (h_lo - h_hi) + diff_eff) / (h_lo * h_hi)
    up = onesided & (adv > 0.0)
    dn = onesided & (adv < 0.0)
    hi = hi + np.where(up, adv / h_hi, 0.0)
    mid = mid - np.where(up, adv / h_hi, 0.0)
    lo = lo - np.where(dn, adv / h_lo, 0.0)
    mid = mid + np.where(dn, adv / h_lo, 0.0)
    return lo, mid, hi


def assemble_heston(params: HestonParams, gx: Grid1D, gv: Grid1D, policy: UpwindPolicy) -> StencilOperator:
    """Assemble the 2-D operator on the (m+1) x (n+1) lattice."""
    x, v = gx.nodes, gv.nodes
    m, n = gx.m, gv.m
    if v[0] < 0.0:
        raise ValueError(f"variance grid must start at v >= 0, got {v[0]!r}")
    h = gx.spacings
    w = gv.spacings
    mu = params.mu
    r = params.r
    shape = (m + 1, n + 1)
    a = np.zeros(shape)
    b = np.zeros(shape)
    c = np.zeros(shape)
    d = np.zeros(shape)
    e = np.zeros(shape)
    cross = np.zeros(shape)

    px, pv = peclet(params, gx, gv)
    fit_x, fit_v = _policy_masks(policy, px, pv, v)
    onesided = policy is UpwindPolicy.OSULLIVAN

    # x-direction parts on rows i = 1..m-1, every v column (the v-edge rows
    # keep the same x stencil).
    h_lo = h[:-1][:, None]
    h_hi = h[1:][:, None]
    xi = x[1:m][:, None]
    adv_x = mu * xi
    diff_x = v[None, :] * xi**2
    if onesided:
        diff_x_eff = diff_x
        os_x = fit_x[1:m, :]
    else:
        diff_x_eff = np.where(fit_x[1:m, :], _fitted_diffusion(diff_x, adv_x, h_lo, h_hi), diff_x)
        os_x = np.zeros_like(fit_x[1:m, :])
    ax, bx, cx = _x_direction_parts(adv_x, diff_x_eff, h_lo, h_hi, os_x)
    a[1:m, :] = ax
    c[1:m, :] = cx
    b[1:m, :] = bx - r

    if n >= 2:
        # v-direction parts on the interior columns j = 1..n-1.
        w_lo = w[:-1][None, :]
        w_hi = w[1:][None, :]
        vj = v[1:n][None, :]
        adv_v = params.kappa * (params.theta - vj)
        diff_v = params.sigma**2 * vj
        if onesided:
            diff_v_eff = np.broadcast_to(diff_v, (m - 1, n - 1))
            os_v = fit_v[None, 1:n] & np.ones((m - 1, 1), dtype=bool)
        else:
            fitted = _fitted_diffusion(diff_v, adv_v, w_lo, w_hi)
            diff_v_eff = np.where(fit_v[1:n][None, :], fitted, diff_v)
            diff_v_eff = np.broadcast_to(diff_v_eff, (m - 1, n - 1))
            os_v = np.zeros((m - 1, n - 1), dtype=bool)
        dv, bv, ev = _x_direction_parts(adv_v, diff_v_eff, w_lo, w_hi, os_v)
        d[1:m, 1:n] = dv
        e[1:m, 1:n] = ev
        b[1:m, 1:n] += bv
        cross[1:m, 1:n] = params.rho * params.sigma * xi * vj / ((h_lo + h_hi) * (w_lo + w_hi))
    elif params.kappa * (params.theta - v[0]) != 0.0:
        raise ValueError("a variance grid without interior nodes needs "
                         "kappa*(theta - v_min) = 0")

    if n >= 1:
        # v = v_min row: one-sided (forward) advection in v, no v diffusion.
        adv0 = params.kappa * (params.theta - v[0]) / w[0]
        b[1:m, 0] -= adv0
        e[1:m, 0] = adv0
        # v = v_max row: one-sided (backward) advection in v.
        advn = params.kappa * (params.theta - v[n]) / w[n - 1]
        b[1:m, n] += advn
        d[1:m, n] = -advn

    # x-edge rows (all j): value linear in x, so only advection and discount.
    a[0, :] = 0.0
    c[0, :] = mu * x[0] / h[0]
    b[0, :] = -(r + mu * x[0] / h[0])
    d[0, :] = e[0, :] = cross[0, :] = 0.0
    a[m, :] = -mu * x[m] / h[m - 1]
    c[m, :] = 0.0
    b[m, :] = -(r - mu * x[m] / h[m - 1])
    d[m, :] = e[m, :] = cross[m, :] = 0.0

    fit_x_full = fit_x.copy()
    fit_x_full[0, :] = fit_x_full[m, :] = False
    fit_v_full = np.zeros(shape, dtype=bool)
    if n >= 2:
        fit_v_full[1:m, 1:n] = fit_v[1:n][None, :]
    return StencilOperator(a, b, c, d, e, cross, gx, gv, r, policy, fit_x_full, fit_v_full)


def assemble_bs(params: BsParams, gx: Grid1D, policy: UpwindPolicy) -> StencilOperator:
    """Assemble the 1-D constant-volatility operator on the m+1 nodes."""
    if policy is UpwindPolicy.FOULON_REGION:
        raise ValueError("foulon-region-fitting selects rows by variance level "
                         "and only applies to the two-dimensional model")
    x = gx.nodes
    m = gx.m
    h = gx.spacings
    mu = params.mu
    r = params.r
    a = np.zeros(m + 1)
    b = np.zeros(m + 1)
    c = np.zeros(m + 1)
    zeros = np.zeros(m + 1)

    px, _ = peclet(params, gx)
    fit_x, _ = _policy_masks(policy, px[:, None], np.empty(0), x)
    fit_x = fit_x[:, 0]
    onesided = policy is UpwindPolicy.OSULLIVAN

    h_lo = h[:-1]
    h_hi = h[1:]
    xi = x[1:m]
    adv = mu * xi
    diff = params.sigma**2 * xi**2
    if onesided:
        diff_eff = diff
        os_mask = fit_x[1:m]
    else:
        diff_eff = np.where(fit_x[1:m], _fitted_diffusion(diff, adv, h_lo, h_hi), diff)
        os_mask = np.zeros(m - 1, dtype=bool)
    ax, bx, cx = _x_direction_parts(adv, diff_eff, h_lo, h_hi, os_mask)
    a[1:m] = ax
    c[1:m] = cx
    b[1:m] = bx - r

    c[0] = mu * x[0] / h[0]
    b[0] = -(r + mu * x[0] / h[0])
    a[m] = -mu * x[m] / h[m - 1]
    b[m] = -(r - mu * x[m] / h[m - 1])

    fit_full = fit_x.copy()
    fit_full[0] = fit_full[m] = False
    return StencilOperator(a, b, c, zeros, zeros.copy(), zeros.copy(), gx, None, r,
                           policy, fit_full, np.zeros(m + 1, dtype=bool))


def apply(op: StencilOperator, f: np.ndarray) -> np.ndarray:
    """Evaluate M f on the lattice."""
    f = np.asarray(f)
    if f.shape != op.shape:
        raise ValueError(f"field shape {f.shape} does not match operator {op.shape}")
    out = op.b * f
    if op.is_1d:
        out[1:] += op.a[1:] * f[:-1]
        out[:-1] += op.c[:-1] * f[1:]
        return out
    out[1:, :] += op.a[1:, :] * f[:-1, :]
    out[:-1, :] += op.c[:-1, :] * f[1:, :]
    out[:, 1:] += op.d[:, 1:] * f[:, :-1]
    out[:, :-1] += op.e[:, :-1] * f[:, 1:]
    out[1:-1, 1:-1] += op.cross[1:-1, 1:-1] * (
        f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]
    )
    return out


def _band_entries(op: StencilOperator):
    """Yield (rows, cols, vals) for every nonzero band of the vectorized operator.

    The lattice is flattened in row-major order (v index fastest), so x
    neighbors sit n+1 columns away and the bandwidth is at most n+2.
    """
    if op.is_1d:
        mm = op.shape[0]
        idx = np.arange(mm)
        yield idx, idx, op.b
        yield idx[1:], idx[:-1], op.a[1:]
        yield idx[:-1], idx[1:], op.c[:-1]
        return
    mm, nn = op.shape
    pij = (np.arange(mm)[:, None] * nn + np.arange(nn)[None, :])
    bands = [
        (op.b, 0, 0, 1.0),
        (op.a, -1, 0, 1.0),
        (op.c, 1, 0, 1.0),
        (op.d, 0, -1, 1.0),
        (op.e, 0, 1, 1.0),
        (op.cross, 1, 1, 1.0),
        (op.cross, 1, -1, -1.0),
        (op.cross, -1, 1, -1.0),
        (op.cross, -1, -1, 1.0),
    ]
    for arr, di, dj, sign in bands:
        i_lo, i_hi = max(0, -di), mm - max(0, di)
        j_lo, j_hi = max(0, -dj), nn - max(0, dj)
        rows = pij[i_lo:i_hi, j_lo:j_hi]
        cols = pij[i_lo + di:i_hi + di, j_lo + dj:j_hi + dj]
        vals = sign * arr[i_lo:i_hi, j_lo:j_hi]
        yield rows.ravel(), cols.ravel(), vals.ravel()


def to_sparse(op: StencilOperator) -> scipy.sparse.coo_matrix:
    """Coordinate-form matrix of the vectorized operator (explicit zeros dropped)."""
    rows, cols, vals = [], [], []
    for rr, cc, vv in _band_entries(op):
        keep = vv != 0.0
        rows.append(rr[keep])
        cols.append(cc[keep])
        vals.append(vv[keep])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    size = op.size
    mat = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(size, size))
    mat.sum_duplicates()
    return mat


def write_operator_csv(op: StencilOperator, path) -> None:
    """Dump the operator as row,col,value triplets sorted by (row, col)."""
    mat = to_sparse(op).tocsr().tocoo()
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for rr, cc, vv in zip(mat.row, mat.col, mat.data):
            fh.write(f"{rr},{cc},{float(vv)!r}\n")
