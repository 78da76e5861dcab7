"""Configuration-driven command-line front end.

Subcommands: price, converge, spectrum, delta, bs-demo.  Each reads a JSON
config (defaults fill everything, so an empty object is a valid config),
runs the matching experiment driver and writes plot-ready CSV files plus a
JSON-lines run log into the output directory.

Config parsing is strict: unknown keys and out-of-range values are rejected
with the offending path, because experiments here differ by one or two keys
and a silently ignored typo would fake a finding.  Data CSVs contain no
timings, so identical configs produce byte-identical files; wall times go to
the run log only.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import (BsScenario, ConvergenceStudy, DEFAULT_LADDER, Payoff,
                          PayoffKind, call, digital_range, payoff_eval,
                          price_at_spot, put, run_bs_study,
                          run_delta_comparison, run_time_convergence)
from .grids import Grid1D, StretchKind, StretchSpec, make_grid
from .operators import (BsParams, HestonParams, UpwindPolicy, assemble_bs,
                        assemble_heston, to_sparse)
from .schemes import FamilyKind, SchemeFamily, run_integrator
from .spectra import eigenvalues_dense, gershgorin_radius, write_spectrum

__all__ = ["ConfigError", "GridConfig", "RunConfig", "parse_config",
           "default_config", "dispatch", "main"]


class ConfigError(ValueError):
    """Config rejected; the message carries the offending path."""


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")


def _mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _num(d: dict, key: str, default, path: str, lo=None, hi=None,
         lo_open: bool = False, hi_open: bool = False):
    val = d.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    val = float(val)
    if lo is not None and (val <= lo if lo_open else val < lo):
        op = ">" if lo_open else ">="
        raise ConfigError(f"{path}.{key}: need value {op} {lo}, got {val:g}")
    if hi is not None and (val >= hi if hi_open else val > hi):
        op = "<" if hi_open else "<="
        raise ConfigError(f"{path}.{key}: need value {op} {hi}, got {val:g}")
    return val


def _int(d: dict, key: str, default, path: str, lo=None):
    val = d.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
    if lo is not None and val < lo:
        raise ConfigError(f"{path}.{key}: need value >= {lo}, got {val}")
    return val


@dataclass(frozen=True)
class GridConfig:
    """Declarative one-dimensional grid: kind plus stretch parameters."""

    kind: str
    a: float
    b: float
    m: int
    center: float = 0.0
    lam: float = 1.0
    alpha: float = 1.0

    def build(self) -> Grid1D:
        spec = StretchSpec(StretchKind(self.kind), center=self.center,
                           lam=self.lam, alpha=self.alpha)
        return make_grid(self.a, self.b, spec, self.m)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "m": self.m,
                "center": self.center, "lam": self.lam, "alpha": self.alpha}


_GRID_KEYS = {"kind", "a", "b", "m", "center", "lam", "alpha"}
_KINDS = {k.value for k in StretchKind}


def _parse_grid(d: dict, defaults: GridConfig, path: str) -> GridConfig:
    d = _mapping(d, path)
    _check_keys(d, _GRID_KEYS, path)
    kind = d.get("kind", defaults.kind)
    if kind not in _KINDS:
        raise ConfigError(f"{path}.kind: expected one of {sorted(_KINDS)}, "
                          f"got {kind!r}")
    a = _num(d, "a", defaults.a, path)
    b = _num(d, "b", defaults.b, path)
    if not a < b:
        raise ConfigError(f"{path}: need a < b, got [{a:g}, {b:g}]")
    return GridConfig(
        kind=kind, a=a, b=b,
        m=_int(d, "m", defaults.m, path, lo=1),
        center=_num(d, "center", defaults.center, path),
        lam=_num(d, "lam", defaults.lam, path, lo=0.0, lo_open=True),
        alpha=_num(d, "alpha", defaults.alpha, path, lo=0.0, lo_open=True),
    )


_POLICIES = {p.value: p for p in UpwindPolicy}
_FAMILY_KEYS = {"family", "eps", "g"}
_FAMILY_NAMES = {k.value for k in FamilyKind}


def _parse_scheme(d, path: str) -> SchemeFamily:
    d = _mapping(d, path)
    _check_keys(d, _FAMILY_KEYS, path)
    name = d.get("family")
    if name not in _FAMILY_NAMES:
        raise ConfigError(
            f"{path}.family: expected one of {sorted(_FAMILY_NAMES)}, got {name!r}")
    eps = _num(d, "eps", 0.0, path, lo=0.0)
    g = _num(d, "g", 2.0, path, lo=0.0, lo_open=True)
    if name != "rkc" and "eps" in d:
        raise ConfigError(f"{path}.eps: only valid for family 'rkc'")
    if name != "rkg" and "g" in d:
        raise ConfigError(f"{path}.g: only valid for family 'rkg'")
    return SchemeFamily(FamilyKind(name), eps=eps, g=g)


_PAYOFF_KEYS = {"kind", "strike", "low", "high"}
_PAYOFF_NAMES = {k.value for k in PayoffKind}


def _parse_payoff(d, default: Payoff, path: str) -> Payoff:
    if d is None:
        return default
    d = _mapping(d, path)
    _check_keys(d, _PAYOFF_KEYS, path)
    kind = d.get("kind", default.kind.value)
    if kind not in _PAYOFF_NAMES:
        raise ConfigError(f"{path}.kind: expected one of {sorted(_PAYOFF_NAMES)}, "
                          f"got {kind!r}")
    if kind == PayoffKind.DIGITAL_RANGE.value:
        low = _num(d, "low", default.low, path, lo=0.0)
        high = _num(d, "high", default.high if default.high > 0 else low + 1.0, path)
        if not low < high:
            raise ConfigError(f"{path}: need low < high, got ({low:g}, {high:g})")
        return digital_range(low, high)
    strike = _num(d, "strike", default.strike if default.strike > 0 else 100.0,
                  path, lo=0.0, lo_open=True)
    return call(strike) if kind == PayoffKind.CALL.value else put(strike)


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment configuration."""

    model: str
    params: HestonParams | BsParams
    grid_x: GridConfig
    grid_v: GridConfig | None
    policy: UpwindPolicy
    schemes: tuple[SchemeFamily, ...]
    ladder: tuple[int, ...]
    l_ref: int
    validate_reference: bool
    roi: tuple[float, float, float, float] | None
    payoff: Payoff
    l: int | None
    out_dir: str

    def build_grids(self):
        gx = self.grid_x.build()
        gv = self.grid_v.build() if self.grid_v is not None else None
        return gx, gv

    def grid_label(self) -> str:
        lab = f"x:{self.grid_x.kind}(m={self.grid_x.m})"
        if self.grid_v is not None:
            lab += f",v:{self.grid_v.kind}(n={self.grid_v.m})"
        return lab

    def to_json(self) -> str:
        cfg = {
            "model": self.model,
            "params": _params_dict(self.params),
            "grid": {"x": self.grid_x.to_dict()},
            "policy": self.policy.value,
            "schemes": [_scheme_dict(s) for s in self.schemes],
            "ladder": list(self.ladder),
            "reference": {"l_ref": self.l_ref, "validate": self.validate_reference},
            "roi": None if self.roi is None else
                   dict(zip(("x_low", "x_high", "v_low", "v_high"), self.roi)),
            "payoff": _payoff_dict(self.payoff),
            "l": self.l,
            "out_dir": self.out_dir,
        }
        if self.grid_v is not None:
            cfg["grid"]["v"] = self.grid_v.to_dict()
        return json.dumps(cfg, indent=2, sort_keys=True)


def _params_dict(p) -> dict:
    if isinstance(p, HestonParams):
        return {"v0": p.v0, "theta": p.theta, "kappa": p.kappa, "sigma": p.sigma,
                "rho": p.rho, "r": p.r, "q": p.q, "spot": p.spot,
                "strike": p.strike, "expiry": p.expiry}
    return {"sigma": p.sigma, "r": p.r, "q": p.q, "spot": p.spot,
            "expiry": p.expiry}


def _scheme_dict(s: SchemeFamily) -> dict:
    d = {"family": s.kind.value}
    if s.kind is FamilyKind.RKC:
        d["eps"] = s.eps
    elif s.kind is FamilyKind.RKG:
        d["g"] = s.g
    return d


def _payoff_dict(p: Payoff) -> dict:
    if p.kind is PayoffKind.DIGITAL_RANGE:
        return {"kind": p.kind.value, "low": p.low, "high": p.high}
    return {"kind": p.kind.value, "strike": p.strike}


_TOP_KEYS = {"model", "params", "grid", "policy", "schemes", "ladder",
             "reference", "roi", "payoff", "l", "out_dir"}
_HESTON_PARAM_KEYS = {"v0", "theta", "kappa", "sigma", "rho", "r", "q",
                      "spot", "strike", "expiry"}
_BS_PARAM_KEYS = {"sigma", "r", "q", "spot", "expiry"}


def _parse_heston_params(d: dict) -> HestonParams:
    d = _mapping(d, "params")
    _check_keys(d, _HESTON_PARAM_KEYS, "params")
    return HestonParams(
        v0=_num(d, "v0", 0.12, "params", lo=0.0),
        theta=_num(d, "theta", 0.12, "params", lo=0.0),
        kappa=_num(d, "kappa", 3.0, "params", lo=0.0, lo_open=True),
        sigma=_num(d, "sigma", 0.04, "params", lo=0.0),
        rho=_num(d, "rho", 0.6, "params", lo=-1.0, hi=1.0),
        r=_num(d, "r", 0.01, "params"),
        q=_num(d, "q", 0.04, "params"),
        spot=_num(d, "spot", 100.0, "params", lo=0.0, lo_open=True),
        strike=_num(d, "strike", 100.0, "params", lo=0.0, lo_open=True),
        expiry=_num(d, "expiry", 1.0, "params", lo=0.0, lo_open=True),
    )


def _parse_bs_params(d: dict) -> BsParams:
    d = _mapping(d, "params")
    _check_keys(d, _BS_PARAM_KEYS, "params")
    return BsParams(
        sigma=_num(d, "sigma", 0.02, "params", lo=0.0, lo_open=True),
        r=_num(d, "r", 0.10, "params"),
        q=_num(d, "q", 0.0, "params"),
        spot=_num(d, "spot", 100.0, "params", lo=0.0, lo_open=True),
        expiry=_num(d, "expiry", 1.0, "params", lo=0.0, lo_open=True),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config; defaults reproduce the 2-D stress case."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    raw = _mapping(raw, "config")
    _check_keys(raw, _TOP_KEYS, "config")

    model = raw.get("model", "heston")
    if model not in ("heston", "bs"):
        raise ConfigError(f"model: expected 'heston' or 'bs', got {model!r}")

    if model == "heston":
        params = _parse_heston_params(raw.get("params", {}))
        gx_default = GridConfig("sinh", 0.0, 8.0 * params.strike, 100,
                                center=params.strike, lam=params.strike / 5.0)
        gv_default = GridConfig("sinh", 0.0, 5.0, 50, center=0.0, lam=0.01)
        policy_default = UpwindPolicy.PARTIAL_FITTING
        payoff_default = call(params.strike)
    else:
        params = _parse_bs_params(raw.get("params", {}))
        gx_default = GridConfig("uniform", 0.0, 150.0, 100)
        gv_default = None
        policy_default = UpwindPolicy.NONE
        payoff_default = digital_range(10.0, 100.0)

    grid_raw = _mapping(raw.get("grid", {}), "grid")
    _check_keys(grid_raw, {"x", "v"}, "grid")
    grid_x = _parse_grid(grid_raw.get("x", {}), gx_default, "grid.x")
    if model == "bs":
        if "v" in grid_raw:
            raise ConfigError("grid.v: not meaningful for the 1-D model")
        grid_v = None
    else:
        grid_v = _parse_grid(grid_raw.get("v", {}), gv_default, "grid.v")

    policy_name = raw.get("policy", policy_default.value)
    if policy_name not in _POLICIES:
        raise ConfigError(f"policy: expected one of {sorted(_POLICIES)}, "
                          f"got {policy_name!r}")
    policy = _POLICIES[policy_name]
    if model == "bs" and policy is UpwindPolicy.FOULON_REGION:
        raise ConfigError("policy: foulon-region-fitting selects rows by "
                          "variance level and needs model='heston'")

    schemes_raw = raw.get("schemes", [{"family": "rkc", "eps": 10.0}])
    if not isinstance(schemes_raw, list) or not schemes_raw:
        raise ConfigError("schemes: expected a non-empty list")
    schemes = tuple(_parse_scheme(s, f"schemes[{i}]")
                    for i, s in enumerate(schemes_raw))

    ladder_raw = raw.get("ladder", list(DEFAULT_LADDER))
    if (not isinstance(ladder_raw, list) or not ladder_raw
            or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1
                       for v in ladder_raw)):
        raise ConfigError("ladder: expected a non-empty list of integers >= 1")
    if any(b <= a for a, b in zip(ladder_raw, ladder_raw[1:])):
        raise ConfigError("ladder: must be strictly increasing")
    ladder = tuple(ladder_raw)

    ref_raw = _mapping(raw.get("reference", {}), "reference")
    _check_keys(ref_raw, {"l_ref", "validate"}, "reference")
    l_ref = _int(ref_raw, "l_ref", 4000, "reference", lo=3)
    validate = ref_raw.get("validate", True)
    if not isinstance(validate, bool):
        raise ConfigError(f"reference.validate: expected a boolean, got {validate!r}")

    roi_raw = raw.get("roi")
    if roi_raw is None:
        roi = None
    else:
        roi_raw = _mapping(roi_raw, "roi")
        _check_keys(roi_raw, {"x_low", "x_high", "v_low", "v_high"}, "roi")
        lvl = payoff_default.level
        roi = (_num(roi_raw, "x_low", 0.5 * lvl, "roi"),
               _num(roi_raw, "x_high", 1.5 * lvl, "roi"),
               _num(roi_raw, "v_low", 0.0, "roi"),
               _num(roi_raw, "v_high", 1.0, "roi"))
        if not roi[0] < roi[1]:
            raise ConfigError("roi: need x_low < x_high")

    payoff = _parse_payoff(raw.get("payoff"), payoff_default, "payoff")

    l = raw.get("l")
    if l is not None and (isinstance(l, bool) or not isinstance(l, int) or l < 1):
        raise ConfigError(f"l: expected an integer >= 1, got {l!r}")

    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError(f"out_dir: expected a non-empty string, got {out_dir!r}")

    return RunConfig(model=model, params=params, grid_x=grid_x, grid_v=grid_v,
                     policy=policy, schemes=schemes, ladder=ladder, l_ref=l_ref,
                     validate_reference=validate, roi=roi, payoff=payoff, l=l,
                     out_dir=out_dir)


def default_config(model: str = "heston") -> RunConfig:
    return parse_config(json.dumps({"model": model}))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_jsonl(path: Path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _slice_rows(gx, gv, field):
    if gv is None:
        for i, x in enumerate(gx.nodes):
            yield x, 0.0, field[i]
    else:
        for i, x in enumerate(gx.nodes):
            for j, v in enumerate(gv.nodes):
                yield x, v, field[i, j]


def _sanitize(label: str) -> str:
    return (label.replace("(", "_").replace(")", "").replace("=", "")
            .replace(".", "p").replace(",", "_"))


def _assemble(cfg: RunConfig):
    gx, gv = cfg.build_grids()
    if cfg.model == "heston":
        op = assemble_heston(cfg.params, gx, gv, cfg.policy)
    else:
        op = assemble_bs(cfg.params, gx, cfg.policy)
    return gx, gv, op


def _cmd_price(cfg: RunConfig, out: Path, threads: int) -> tuple[int, list[dict]]:
    gx, gv, op = _assemble(cfg)
    l = cfg.l or 100
    y0 = payoff_eval(cfg.payoff, gx, gv)
    logs = []
    summary = {}
    for fam in cfg.schemes:
        fld, log = run_integrator(fam, op, y0, cfg.params.expiry, l)
        logs.append(log.to_dict())
        tag = _sanitize(fam.label)
        _write_csv(out / f"price_{tag}.csv", ["x", "v", "value"],
                   _slice_rows(gx, gv, fld))
        if not log.exploded:
            if gv is None:
                summary[fam.label] = price_at_spot(fld, gx, cfg.params.spot)
            else:
                summary[fam.label] = price_at_spot(fld, gx, cfg.params.spot,
                                                   gv, cfg.params.v0)
        else:
            summary[fam.label] = None
    with open(out / "summary.json", "w") as fh:
        json.dump({"l": l, "price_at_spot": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    exploded = any(log["exploded"] for log in logs)
    return (1 if exploded else 0), logs


def _cmd_converge(cfg: RunConfig, out: Path, threads: int) -> tuple[int, list[dict]]:
    if cfg.model != "heston":
        raise ConfigError("converge drives the 2-D model; set model='heston'")
    gx, gv = cfg.build_grids()
    logs = []
    any_explosion = False
    summary = {}
    for fam in cfg.schemes:
        study = ConvergenceStudy(
            params=cfg.params, gx=gx, gv=gv, policy=cfg.policy, family=fam,
            payoff=cfg.payoff, ladder=cfg.ladder, l_ref=cfg.l_ref,
            validate_reference=cfg.validate_reference,
            grid_label=cfg.grid_label(), max_workers=threads)
        result = run_time_convergence(study)
        tag = _sanitize(fam.label)
        _write_csv(out / f"convergence_{tag}.csv", ["l", "rms_error", "exploded"],
                   ((r.l, r.rms_error, r.exploded) for r in result.reports))
        logs.extend(result.logs)
        any_explosion |= any(r.exploded for r in result.reports)
        summary[fam.label] = {
            "reference_check": result.reference_check,
            "explosions": [r.l for r in result.reports if r.exploded],
        }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (1 if any_explosion else 0), logs


def _cmd_spectrum(cfg: RunConfig, out: Path, threads: int) -> tuple[int, list[dict]]:
    gx, gv, op = _assemble(cfg)
    l = cfg.l or 16
    scale = cfg.params.expiry / l
    spec = eigenvalues_dense(to_sparse(op), scale=scale)
    write_spectrum(spec, out / "spectrum.csv")
    return 0, [{"rho_gershgorin": gershgorin_radius(op), "scale": scale,
                "max_real": spec.max_real, "max_abs_imag": spec.max_abs_imag}]


def _cmd_delta(cfg: RunConfig, out: Path, threads: int) -> tuple[int, list[dict]]:
    if cfg.model != "heston":
        raise ConfigError("delta drives the 2-D model; set model='heston'")
    gx, gv = cfg.build_grids()
    l = cfg.l or 10
    results = run_delta_comparison(cfg.params, gx, gv, cfg.policy,
                                   families=cfg.schemes, l=l, payoff=cfg.payoff)
    logs = []
    osc = {}
    v0_row = gv.nodes[0]
    for label, res in results.items():
        tag = _sanitize(label)
        _write_csv(out / f"delta_{tag}.csv", ["x", "v", "value"],
                   ((x, v0_row, d) for x, d in zip(gx.nodes, res["delta"])))
        logs.append(res["log"])
        osc[label] = res["osc"]
    with open(out / "summary.json", "w") as fh:
        json.dump({"l": l, "osc_metric": osc}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    exploded = any(log["exploded"] for log in logs)
    return (1 if exploded else 0), logs


def _cmd_bs_demo(cfg: RunConfig, out: Path, threads: int) -> tuple[int, list[dict]]:
    if cfg.model != "bs":
        raise ConfigError("bs-demo drives the 1-D model; set model='bs'")
    gx, _ = cfg.build_grids()
    scenario = BsScenario(params=cfg.params, payoff=cfg.payoff, grid=gx,
                          policy=cfg.policy, l=cfg.l or 100,
                          families=cfg.schemes, grid_label=cfg.grid_label())
    result = run_bs_study(scenario)
    for label, curve in result.curves.items():
        _write_csv(out / f"price_{_sanitize(label)}.csv", ["x", "v", "value"],
                   ((x, 0.0, val) for x, val in zip(gx.nodes, curve)))
    if result.spectrum is not None:
        write_spectrum(result.spectrum, out / "spectrum.csv")
    with open(out / "summary.json", "w") as fh:
        json.dump({
            "threshold": result.threshold,
            "osc_metric": {r.scheme: r.osc_metric for r in result.reports},
            "price_at_spot": {r.scheme: r.price_at_spot for r in result.reports},
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    exploded = any(r.exploded for r in result.reports)
    return (1 if exploded else 0), result.logs


_COMMANDS = {
    "price": _cmd_price,
    "converge": _cmd_converge,
    "spectrum": _cmd_spectrum,
    "delta": _cmd_delta,
    "bs-demo": _cmd_bs_demo,
}


def dispatch(cmd: str, cfg: RunConfig, out_dir: str | None = None,
             strict: bool = False, threads: int = 1) -> int:
    """Run one subcommand; returns the process exit status."""
    if cmd not in _COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; "
                          f"expected one of {sorted(_COMMANDS)}")
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    explosion_flag, logs = _COMMANDS[cmd](cfg, out, max(threads, 1))
    _write_jsonl(out / "run_log.jsonl", logs)
    if explosion_flag and strict:
        print(f"{cmd}: explosion detected; failing due to --strict",
              file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="stslab",
        description="Finite-difference lab for super-time-stepping schemes "
                    "on pricing PDEs")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, help_text in [
        ("price", "integrate the payoff and write price slices"),
        ("converge", "time-convergence ladder against the implicit reference"),
        ("spectrum", "dense eigenvalues of the scaled operator"),
        ("delta", "delta slices near v=0 for each configured scheme"),
        ("bs-demo", "flat-volatility barrier study"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config path (defaults apply if omitted)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory (overrides config out_dir)")
        p.add_argument("--strict", action="store_true",
                       help="exit nonzero if any run explodes")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for ladder runs")
    args = parser.parse_args(argv)
    if args.config is not None:
        text = Path(args.config).read_text()
    elif args.cmd == "bs-demo":
        text = '{"model": "bs"}'
    else:
        text = "{}"
    try:
        cfg = parse_config(text)
        return dispatch(args.cmd, cfg, out_dir=args.out, strict=args.strict,
                        threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
