"""Payoffs, error metrics, and the experiment drivers.

Three studies are provided on top of the operator/integrator stack:

* a time-convergence ladder for the stochastic-volatility model against a
  Crank-Nicolson/Rannacher reference on the same grid and upwinding policy,
  exposing the explosion of region-restricted fitting at low step counts;
* a delta-oscillation comparison of the super-time-stepping families near
  v = 0;
* the flat-volatility barrier study on uniform and stretched grids, where the
  Legendre scheme oscillates at low step counts while the Gegenbauer scheme
  and TR-BDF2 stay clean.

Oscillations are quantified by excess total variation: the total variation of
a slice minus the variation a monotone-per-segment profile would need, the
segments being taken from a 5-point smoothed reference.  The metric is zero
for monotone and single-hump slices and grows with sawtooth amplitude.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import norm

from .grids import Grid1D, StretchKind, StretchSpec, make_cubic, make_sinh, make_uniform
from .implicit import crank_nicolson_run, trbdf2_run
from .operators import (BsParams, HestonParams, StencilOperator, UpwindPolicy,
                        assemble_bs, assemble_heston)
from .schemes import SchemeFamily, rkc, rkg, rkl, run_integrator
from .spectra import Spectrum, eigenvalues_dense, gershgorin_radius
from .operators import to_sparse

__all__ = [
    "Payoff",
    "PayoffKind",
    "call",
    "put",
    "digital_range",
    "payoff_eval",
    "bs_closed_form",
    "rms_error",
    "roi_mask",
    "delta_surface",
    "oscillation_metric",
    "clean_threshold",
    "price_at_spot",
    "ExperimentReport",
    "default_heston_params",
    "default_bs_params",
    "foulon_grid_x",
    "foulon_grid_v",
    "bs_uniform_grid",
    "bs_cubic_grid",
    "bs_sinh_grid",
    "DEFAULT_LADDER",
    "ConvergenceStudy",
    "ConvergenceResult",
    "run_time_convergence",
    "run_delta_comparison",
    "BsScenario",
    "BsStudyResult",
    "run_bs_study",
]


class PayoffKind(Enum):
    CALL = "call"
    PUT = "put"
    DIGITAL_RANGE = "digital-range"


@dataclass(frozen=True)
class Payoff:
    """Terminal condition; vanilla strike or digital barrier pair."""

    kind: PayoffKind
    strike: float = 0.0
    low: float = 0.0
    high: float = 0.0

    def __post_init__(self):
        if self.kind is PayoffKind.DIGITAL_RANGE and not self.low < self.high:
            raise ValueError(f"need low < high, got ({self.low!r}, {self.high!r})")

    @property
    def level(self) -> float:
        """Price level the payoff kinks at; anchors error/oscillation windows."""
        if self.kind is PayoffKind.DIGITAL_RANGE:
            return self.high
        return self.strike


def call(strike: float) -> Payoff:
    return Payoff(PayoffKind.CALL, strike=float(strike))


def put(strike: float) -> Payoff:
    return Payoff(PayoffKind.PUT, strike=float(strike))


def digital_range(low: float, high: float) -> Payoff:
    return Payoff(PayoffKind.DIGITAL_RANGE, low=float(low), high=float(high))


def payoff_eval(p: Payoff, gx: Grid1D, gv: Grid1D | None = None) -> np.ndarray:
    """Terminal values on the grid; broadcast over the v dimension if given."""
    x = gx.nodes
    if p.kind is PayoffKind.CALL:
        vals = np.maximum(x - p.strike, 0.0)
    elif p.kind is PayoffKind.PUT:
        vals = np.maximum(p.strike - x, 0.0)
    elif p.kind is PayoffKind.DIGITAL_RANGE:
        vals = np.where((x > p.low) & (x < p.high), 1.0, 0.0)
    else:
        raise ValueError(f"unsupported payoff {p.kind!r}")
    if gv is None:
        return vals
    return np.repeat(vals[:, None], gv.m + 1, axis=1)


def _d2(params: BsParams, level: float) -> float:
    sig = params.sigma * math.sqrt(params.expiry)
    return (math.log(params.spot / level)
            + (params.mu - 0.5 * params.sigma**2) * params.expiry) / sig


def bs_closed_form(params: BsParams, payoff: Payoff) -> float:
    """Analytic price at the spot under constant volatility."""
    t = params.expiry
    df_r = math.exp(-params.r * t)
    df_q = math.exp(-params.q * t)
    if payoff.kind is PayoffKind.DIGITAL_RANGE:
        return df_r * (norm.cdf(_d2(params, payoff.low))
                       - norm.cdf(_d2(params, payoff.high)))
    k = payoff.strike
    sig = params.sigma * math.sqrt(t)
    d2 = _d2(params, k)
    d1 = d2 + sig
    if payoff.kind is PayoffKind.CALL:
        return params.spot * df_q * norm.cdf(d1) - k * df_r * norm.cdf(d2)
    if payoff.kind is PayoffKind.PUT:
        return k * df_r * norm.cdf(-d2) - params.spot * df_q * norm.cdf(-d1)
    raise ValueError(f"unsupported payoff {payoff.kind!r}")


def rms_error(a: np.ndarray, b: np.ndarray, region: np.ndarray | None = None) -> float:
    """Root mean square of a - b, optionally restricted to a boolean region."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    if region is not None:
        if region.shape != a.shape:
            raise ValueError(f"region shape {region.shape} != field shape {a.shape}")
        diff = diff[region]
        if diff.size == 0:
            raise ValueError("empty region")
    return float(np.sqrt(np.mean(diff**2)))


def roi_mask(gx: Grid1D, x_low: float, x_high: float, gv: Grid1D | None = None,
             v_low: float = 0.0, v_high: float = 1.0) -> np.ndarray:
    """Boolean mask of the error region, inclusive bounds."""
    mx = (gx.nodes >= x_low) & (gx.nodes <= x_high)
    if gv is None:
        return mx
    mv = (gv.nodes >= v_low) & (gv.nodes <= v_high)
    return mx[:, None] & mv[None, :]


def delta_surface(f: np.ndarray, gx: Grid1D) -> np.ndarray:
    """Forward-difference delta; the last x row replicates its neighbor."""
    f = np.asarray(f, dtype=float)
    if gx.m < 2:
        raise ValueError("need at least 3 nodes for a delta surface")
    h = gx.spacings
    out = np.empty_like(f)
    if f.ndim == 1:
        out[:-1] = np.diff(f) / h
        out[-1] = out[-2]
        return out
    out[:-1, :] = np.diff(f, axis=0) / h[:, None]
    out[-1, :] = out[-2, :]
    return out


def oscillation_metric(values: np.ndarray) -> float:
    """Excess total variation of a slice over its smoothed monotone envelope.

    A 5-point moving average of the symmetric-padded slice provides the
    reference; its sign changes split the slice into monotone segments
    (plateaus extend the current segment).  The metric is the total variation
    of the raw slice minus the max-min span of each segment, floored at zero.
    Humps narrower than the smoothing window register as excess variation.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 3:
        raise ValueError("need a 1-D slice of length >= 3")
    padded = np.pad(values, 2, mode="symmetric")
    ref = np.convolve(padded, np.full(5, 0.2), mode="valid")
    dref = np.diff(ref)
    tv = float(np.abs(np.diff(values)).sum())
    envelope = 0.0
    start = 0
    direction = 0
    for idx, d in enumerate(dref):
        s = 0 if d == 0.0 else (1 if d > 0.0 else -1)
        if s == 0:
            continue
        if direction == 0 or s == direction:
            direction = s
            continue
        seg = values[start:idx + 1]
        envelope += float(seg.max() - seg.min())
        start = idx
        direction = s
    seg = values[start:]
    envelope += float(seg.max() - seg.min())
    return max(tv - envelope, 0.0)


def clean_threshold(*clean_values: float, floor: float = 1e-8) -> float:
    """Oscillation threshold: three times the worst clean baseline plus a floor."""
    return 3.0 * max(clean_values) + floor


def price_at_spot(f: np.ndarray, gx: Grid1D, spot: float,
                  gv: Grid1D | None = None, v: float | None = None) -> float:
    """Linear (bilinear in 2-D) interpolation of the lattice at the spot."""
    f = np.asarray(f, dtype=float)
    if gv is None:
        if f.ndim != 1:
            raise ValueError("need the variance grid and coordinate for a 2-D field")
        return float(np.interp(spot, gx.nodes, f))
    if v is None:
        raise ValueError("need the variance coordinate for a 2-D field")
    along_v = np.array([np.interp(spot, gx.nodes, f[:, j])
                        for j in range(gv.m + 1)])
    return float(np.interp(v, gv.nodes, along_v))


@dataclass
class ExperimentReport:
    """One (scheme, l) outcome of a study."""

    scheme: str
    policy: str
    grid: str
    l: int
    rms_error: float
    osc_metric: float
    exploded: bool
    price_at_spot: float
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "policy": self.policy,
            "grid": self.grid,
            "l": self.l,
            "rms_error": self.rms_error,
            "osc_metric": self.osc_metric,
            "exploded": self.exploded,
            "price_at_spot": self.price_at_spot,
            "wall_time": self.wall_time,
        }


def default_heston_params() -> HestonParams:
    """The small-vol-of-vol, large-drift-asymmetry stress case."""
    return HestonParams(v0=0.12, theta=0.12, kappa=3.0, sigma=0.04, rho=0.6,
                        r=0.01, q=0.04, spot=100.0, strike=100.0, expiry=1.0)


def default_bs_params() -> BsParams:
    """Small volatility with a large rate: advection-dominated in 1-D."""
    return BsParams(sigma=0.02, r=0.10, q=0.0, spot=100.0, expiry=1.0)


X_MAX_MULT = 8.0
V_MAX = 5.0


def foulon_grid_x(strike: float, m: int = 100) -> Grid1D:
    """Sinh-stretched x grid on [0, 8K] concentrated at the strike, lam = K/5."""
    spec = StretchSpec(StretchKind.SINH, center=strike, lam=strike / 5.0)
    return make_sinh(0.0, X_MAX_MULT * strike, spec, m)


def foulon_grid_v(n: int = 50, v_max: float = V_MAX, variant: str = "foulon",
                  v0: float | None = None) -> Grid1D:
    """Sinh-stretched v grid on [0, v_max].

    variant "foulon" concentrates hard at v = 0 (lam = v_max/500); variant
    "lefloch" concentrates mildly at v0 (lam = 2 v0).
    """
    if variant == "foulon":
        spec = StretchSpec(StretchKind.SINH, center=0.0, lam=v_max / 500.0)
    elif variant == "lefloch":
        if v0 is None:
            raise ValueError("variant 'lefloch' needs v0")
        spec = StretchSpec(StretchKind.SINH, center=v0, lam=2.0 * v0)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return make_sinh(0.0, v_max, spec, n)


def bs_uniform_grid(m: int = 100, x_max: float = 150.0) -> Grid1D:
    return make_uniform(0.0, x_max, m)


def bs_cubic_grid(m: int = 400, alpha: float = 0.01, center: float = 100.0,
                  x_max: float = 150.0) -> Grid1D:
    spec = StretchSpec(StretchKind.CUBIC, center=center, alpha=alpha)
    return make_cubic(0.0, x_max, spec, m)


def bs_sinh_grid(m: int = 400, strike: float = 100.0) -> Grid1D:
    return foulon_grid_x(strike, m)


DEFAULT_LADDER = (10, 20, 40, 80, 100, 200, 400, 800, 1600)


@dataclass
class ConvergenceStudy:
    """Configuration of the time-convergence ladder on the 2-D model."""

    params: HestonParams
    gx: Grid1D
    gv: Grid1D
    policy: UpwindPolicy
    family: SchemeFamily
    payoff: Payoff
    ladder: tuple[int, ...] = DEFAULT_LADDER
    l_ref: int = 4000
    validate_reference: bool = True
    grid_label: str = ""
    max_workers: int = 1


@dataclass
class ConvergenceResult:
    reports: list[ExperimentReport]
    logs: list[dict]
    reference: np.ndarray
    reference_check: float | None


def _heston_roi(study) -> np.ndarray:
    k = study.payoff.level
    return roi_mask(study.gx, 0.5 * k, 1.5 * k, study.gv, 0.0, 1.0)


def run_time_convergence(study: ConvergenceStudy) -> ConvergenceResult:
    """Run the ladder against a CN/Rannacher reference on the same operator."""
    op = assemble_heston(study.params, study.gx, study.gv, study.policy)
    y0 = payoff_eval(study.payoff, study.gx, study.gv)
    t = study.params.expiry
    roi = _heston_roi(study)
    ref = crank_nicolson_run(op, y0, t, study.l_ref)
    ref_check = None
    if study.validate_reference:
        ref2 = crank_nicolson_run(op, y0, t, 2 * study.l_ref)
        ref_check = rms_error(ref, ref2, roi)
        if not ref_check < 1e-4:
            raise RuntimeError(
                f"reference not self-converged: rms(l={study.l_ref}, "
                f"l={2 * study.l_ref}) = {ref_check:.3e}")
    rho = gershgorin_radius(op)
    x_window = roi_mask(study.gx, 0.5 * study.payoff.level, 1.5 * study.payoff.level)

    def one(l: int):
        fld, log = run_integrator(study.family, op, y0, t, l, rho=rho)
        if log.exploded:
            rep = ExperimentReport(study.family.label, study.policy.value,
                                   study.grid_label, l, float("inf"), float("inf"),
                                   True, float("nan"), log.wall_time)
        else:
            delta0 = delta_surface(fld, study.gx)[:, 0]
            rep = ExperimentReport(
                study.family.label, study.policy.value, study.grid_label, l,
                rms_error(fld, ref, roi),
                oscillation_metric(delta0[x_window]),
                False,
                price_at_spot(fld, study.gx, study.params.spot, study.gv,
                              study.params.v0),
                log.wall_time)
        return rep, log.to_dict()

    if study.max_workers > 1:
        with ThreadPoolExecutor(max_workers=study.max_workers) as pool:
            outcomes = list(pool.map(one, study.ladder))
    else:
        outcomes = [one(l) for l in study.ladder]
    reports = [rep for rep, _ in outcomes]
    logs = [log for _, log in outcomes]
    return ConvergenceResult(reports, logs, ref, ref_check)


def run_delta_comparison(params: HestonParams, gx: Grid1D, gv: Grid1D,
                         policy: UpwindPolicy,
                         families: tuple[SchemeFamily, ...] | None = None,
                         l: int = 10, payoff: Payoff | None = None):
    """Delta slices nearest v = 0 for each family; returns label -> results.

    The oscillation metric is evaluated on the forward-difference delta at the
    lowest variance row, inside the x window around the payoff level.
    """
    if families is None:
        families = (rkc(10.0), rkl(), rkg(2.0))
    if payoff is None:
        payoff = call(params.strike)
    op = assemble_heston(params, gx, gv, policy)
    y0 = payoff_eval(payoff, gx, gv)
    rho = gershgorin_radius(op)
    window = roi_mask(gx, 0.5 * payoff.level, 1.5 * payoff.level)
    out = {}
    for fam in families:
        fld, log = run_integrator(fam, op, y0, params.expiry, l, rho=rho)
        delta0 = delta_surface(fld, gx)[:, 0]
        osc = float("inf") if log.exploded else oscillation_metric(delta0[window])
        rep = ExperimentReport(
            fam.label, policy.value, f"m={gx.m},n={gv.m}", l,
            float("nan"), osc, log.exploded,
            float("nan") if log.exploded else
            price_at_spot(fld, gx, params.spot, gv, params.v0),
            log.wall_time)
        out[fam.label] = {"osc": osc, "report": rep, "delta": delta0,
                          "log": log.to_dict()}
    return out


@dataclass
class BsScenario:
    """One flat-volatility barrier scenario (grid, policy, step count)."""

    params: BsParams
    payoff: Payoff
    grid: Grid1D
    policy: UpwindPolicy
    l: int
    families: tuple[SchemeFamily, ...] = (rkl(), rkg(2.0), rkc(10.0))
    grid_label: str = ""
    with_spectrum: bool = True


@dataclass
class BsStudyResult:
    reports: list[ExperimentReport]
    threshold: float
    curves: dict[str, np.ndarray]
    logs: list[dict]
    spectrum: Spectrum | None


def run_bs_study(scenario: BsScenario) -> BsStudyResult:
    """Price the barrier with each family plus TR-BDF2; calibrate cleanliness.

    The oscillation threshold is three times the worst of the two reliably
    clean baselines (TR-BDF2 and the Gegenbauer scheme) plus a small floor, so
    "oscillating" is always judged relative to this scenario's own grid and
    step count.
    """
    p = scenario.params
    op = assemble_bs(p, scenario.grid, scenario.policy)
    y0 = payoff_eval(scenario.payoff, scenario.grid)
    window = roi_mask(scenario.grid, 0.5 * scenario.payoff.level,
                      1.5 * scenario.payoff.level)
    rho = gershgorin_radius(op)
    reports: list[ExperimentReport] = []
    curves: dict[str, np.ndarray] = {}
    logs: list[dict] = []

    t0 = time.perf_counter()
    f_ref = trbdf2_run(op, y0, p.expiry, scenario.l)
    trbdf2_time = time.perf_counter() - t0
    curves["trbdf2"] = f_ref
    osc_trbdf2 = oscillation_metric(f_ref[window])
    reports.append(ExperimentReport(
        "trbdf2", scenario.policy.value, scenario.grid_label, scenario.l,
        float("nan"), osc_trbdf2, False,
        price_at_spot(f_ref, scenario.grid, p.spot), trbdf2_time))

    osc_by_label = {"trbdf2": osc_trbdf2}
    for fam in scenario.families:
        fld, log = run_integrator(fam, op, y0, p.expiry, scenario.l, rho=rho)
        curves[fam.label] = fld
        osc = float("inf") if log.exploded else oscillation_metric(fld[window])
        osc_by_label[fam.label] = osc
        reports.append(ExperimentReport(
            fam.label, scenario.policy.value, scenario.grid_label, scenario.l,
            float("nan"), osc, log.exploded,
            float("nan") if log.exploded else
            price_at_spot(fld, scenario.grid, p.spot),
            log.wall_time))
        logs.append(log.to_dict())

    rkg_clean = [v for k, v in osc_by_label.items() if k.startswith("rkg")]
    baselines = [v for v in [osc_trbdf2] + rkg_clean if np.isfinite(v)]
    if not baselines:
        raise RuntimeError("no finite clean baseline to calibrate the threshold")
    threshold = clean_threshold(*baselines)
    spectrum = None
    if scenario.with_spectrum:
        spectrum = eigenvalues_dense(to_sparse(op), scale=p.expiry / scenario.l)
    return BsStudyResult(reports, threshold, curves, logs, spectrum)
