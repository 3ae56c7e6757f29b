"""Command-line surface: run the demonstrations end to end, emit JSON/CSV
reports, and run the analytic-vs-oracle verification suite.

Usage:

    bplab demo <name> [--config cfg.json] [--out DIR] [--seed N]
                      [--format json,csv] [demo-specific overrides]
    bplab verify {fast,full} [--config cfg.json] [--seed N]

Demos: borel, hierarchical, misfit, transdim-uniform, transdim-gaussian,
fig7, units.  Exit codes: 0 success, 1 configuration error, 2 when a demo's
internal verification (analytic vs oracle) fails.

Reports are deterministic for a fixed config and seed: the JSON is written
with sorted keys and full float precision, and volatile metadata (timestamps)
goes to a separate ``<name>.meta.json`` side file.  CSV files carry 17
significant digits, '.' decimal separators, and a header row annotating the
physical unit of each column.

JSON configuration objects
--------------------------
Densities:        {"kind": "uniform-box", "bounds": [[lo, hi], ...],
                   "units": ["second", ...]}
                  {"kind": "gaussian-iid", "mean": 0.0, "sigma": 1.0,
                   "dim": 2, "units": [...]}
                  {"kind": "improper-flat", "dim": 2}
Discrete:         {"atoms": [[value, prob], ...]}
Coordinate maps:  {"kind": "reciprocal", "dim": 2, "eps": 1e-9}
                  {"kind": "identity", "dim": 2}
                  {"kind": "scale", "factors": [c1, c2]}
Forward models:   {"tag": "two-ray-velocity", "length": 1.0,
                   "ray_matrix": [[1, 1], [2, 0]]}
                  {"tag": "one-block"|"two-block", "length": 1.0}
                  {"tag": "linear", "k": 3.0}
Unit names:       "second", "meter", "slowness", "velocity",
                  "dimensionless", or explicit exponent maps
                  {"second": 1, "meter": -1}.

The env var BPL_THREADS bounds internal parallelism (per-width slab profiles
and other independent integrals); all results are deterministic regardless.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conditioning, hierarchical, transdim
from .densities import gaussian_iid
from .forward import linear
from .verification import run_verification

DEMOS = ("borel", "hierarchical", "misfit", "transdim-uniform",
         "transdim-gaussian", "fig7", "units")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved demo invocation."""

    demo: str
    overrides: dict = field(default_factory=dict)
    out: Path = Path("out")
    seed: int = 20260809
    formats: tuple[str, ...] = ("json", "csv")

    def __post_init__(self):
        if self.demo not in DEMOS:
            raise ConfigError(f"unknown demo {self.demo!r}; pick from {DEMOS}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed {self.seed} is not a 64-bit unsigned integer")
        if not set(self.formats) <= {"json", "csv"}:
            raise ConfigError(f"unknown output format in {self.formats}")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_json_report(path: Path, payload: dict, seed: int, demo: str) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    meta = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "demo": demo, "seed": seed}
    path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=1) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _parse_grid(spec: str) -> np.ndarray:
    """Parse 'lo:hi:n' into an n-point inclusive grid."""
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except Exception:
        raise ConfigError(f"bad grid spec {spec!r}; expected lo:hi:n") from None


def _parse_floats(spec: str) -> list[float]:
    try:
        return [float(v) for v in spec.split(",")]
    except Exception:
        raise ConfigError(f"bad list {spec!r}; expected comma-separated numbers") from None


def _load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {p}: {e}") from None


def _merge(file_cfg: dict, demo: str, overrides: dict) -> dict:
    merged = dict(file_cfg.get(demo, file_cfg) if isinstance(file_cfg, dict) else {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


# --- demo runners (each returns exit code) ---------------------------------

def _demo_borel(cfg: dict, out: Path, seed: int, formats) -> int:
    tomo = conditioning.TomographyConfig(
        v_min=float(cfg.get("v_min", 1.0)),
        v_max=float(cfg.get("v_max", 5.0)),
        d_box=tuple(tuple(iv) for iv in cfg.get("d_box", ((0.5, 1.6), (0.5, 1.6)))),
        length=float(cfg.get("length", 1.0)),
    )
    try:
        tomo.validate()
    except ValueError as e:
        raise ConfigError(str(e)) from None
    report = conditioning.borel_contradiction_report(tomo)
    payload = report.to_json()
    payload["formulas"] = ["naive-curve-restriction", "reciprocal-pushforward",
                           "log-log-exponent-fit"]
    if "json" in formats:
        write_json_report(out / "borel.json", payload, seed, "borel")
    if "csv" in formats:
        write_csv(out / "borel_conditionals.csv",
                  ["v1 [velocity]", "velocity_chart [1/velocity]",
                   "from_slowness_chart [1/velocity]"],
                  zip(report.v_grid, report.velocity_chart, report.from_slowness_chart))
    ok = report.status == "ok" and report.constant_ok and report.exponent_ok \
        and report.contradiction
    return 0 if ok else 2


def _demo_hierarchical(cfg: dict, out: Path, seed: int, formats) -> int:
    hier = hierarchical.HierConfig(
        pi_lambda=float(cfg.get("pi_lambda", 0.5)),
        pi_delta=float(cfg.get("pi_delta", 0.5)),
        k=float(cfg.get("k", 1.0)),
    )
    k_grid = cfg.get("k_grid", [0.5, 1.0, 2.0])
    if isinstance(k_grid, str):
        k_grid = _parse_floats(k_grid)
    table = hierarchical.theta_posterior(hier)
    curve = hierarchical.acausality_probe(hier, k_grid)

    # internal verification: closed-form cells against quadrature
    from .oracle import quad_integrate
    worst = 0.0
    for i, lam in enumerate(hier.lambda_atoms):
        for j, dl in enumerate(hier.delta_atoms):
            q = quad_integrate(
                lambda x: hierarchical.posterior_unnormalized(hier, x[0], lam, dl),
                [(-math.inf, math.inf)], rel_tol=1e-12)
            closed = table.probs[i, j] * table.normalization
            if closed > 0:
                worst = max(worst, abs(q.value - closed) / closed)

    payload = {
        "config": hier.to_json(),
        "theta_posterior": table.to_json(),
        "lambda_marginal": hierarchical.lambda_marginal(hier).tolist(),
        "delta_marginal": hierarchical.delta_marginal(hier).tolist(),
        "acausality": curve.to_json(),
        "cells_vs_quadrature_rel_err": worst,
        "formulas": ["hyperparameter-cell-closed-forms", "joint-table-normalization"],
    }
    if "json" in formats:
        write_json_report(out / "hierarchical.json", payload, seed, "hierarchical")
    if "csv" in formats:
        write_csv(out / "theta_table.csv",
                  ["lambda [dimensionless]", "delta [dimensionless]",
                   "posterior [dimensionless]"],
                  [(lam, dl, table.probs[i, j])
                   for i, lam in enumerate(hier.lambda_atoms)
                   for j, dl in enumerate(hier.delta_atoms)])
        write_csv(out / "acausality.csv",
                  ["k [dimensionless]", "p_lambda_first [dimensionless]",
                   "p_delta_first [dimensionless]"],
                  zip(curve.k_grid, curve.p_lambda_first, curve.p_delta_first))
    return 0 if worst <= 1e-8 else 2


def _demo_misfit(cfg: dict, out: Path, seed: int, formats) -> int:
    d_grid = cfg.get("d_obs_grid", [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    if isinstance(d_grid, str):
        d_grid = _parse_floats(d_grid)
    lam_lo = float(cfg.get("lambda_min", 1e-3))
    lam_hi = float(cfg.get("lambda_max", 20.0))
    if not 0 < lam_lo < lam_hi:
        raise ConfigError("lambda range must be a positive interval")
    prior = gaussian_iid(0.0, 1.0, 1)
    fwd = linear(float(cfg.get("k", 1.0)))
    rows = []
    ok = True
    is_identity = float(cfg.get("k", 1.0)) == 1.0
    for d in d_grid:
        r = hierarchical.misfit_lambda_estimator(float(d), fwd, prior, (lam_lo, lam_hi))
        rows.append((d, r.lambda_star, r.evidence))
        if is_identity and d * d > 1.0 + 1e-9:
            best = math.sqrt(d * d - 1)
            if lam_lo < best < lam_hi:
                ok &= abs(r.lambda_star - best) <= 1e-4
    payload = {
        "config": {"d_obs_grid": list(map(float, d_grid)),
                   "lambda_min": lam_lo, "lambda_max": lam_hi},
        "trace": [{"d_obs": d, "lambda_star": l, "evidence": e} for d, l, e in rows],
        "formulas": ["integrated-posterior-golden-section"],
    }
    if "json" in formats:
        write_json_report(out / "misfit.json", payload, seed, "misfit")
    if "csv" in formats:
        write_csv(out / "misfit_trace.csv",
                  ["d_obs [dimensionless]", "lambda_star [dimensionless]",
                   "evidence [dimensionless]"], rows)
    return 0 if ok else 2


def _demo_transdim_uniform(cfg: dict, out: Path, seed: int, formats) -> int:
    try:
        ucfg = transdim.UniformExampleConfig(
            length=float(cfg.get("length", 1.0)),
            s_min=float(cfg.get("s_min", 0.0)),
            s_max=float(cfg.get("s_max", 10.0)),
            d1=tuple(cfg.get("d1", (1.0, 1.2))),
            d2=tuple(cfg.get("d2", (1.05, 1.15))),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    report = transdim.uniform_example_report(ucfg, seed=seed)
    payload = report.to_json()
    flip_error = None
    try:
        flip = transdim.parsimony_flip(ucfg)
        payload["parsimony_flip"] = flip.to_json()
    except ValueError as e:
        flip_error = str(e)
        payload["parsimony_flip"] = {"error": flip_error}
    if "json" in formats:
        write_json_report(out / "transdim_uniform.json", payload, seed,
                          "transdim-uniform")
    if "csv" in formats:
        write_csv(out / "uniform_evidence.csv",
                  ["k [dimensionless]", "evidence [second^-2]",
                   "posterior [dimensionless]"],
                  [(k, report.evidences[k], report.p_k_posterior[k]) for k in (1, 2)])
    mc_ok = abs(report.mc_area - report.area_as_printed) <= 3 * report.mc_area_se
    geo = transdim.uniform_evidences_geometry(ucfg)
    if report.regime == "analytic":
        rel = max(abs(report.evidences[k] - geo[k]) / geo[k] for k in (1, 2))
        analytic_ok = rel <= 1e-6
    else:
        analytic_ok = True
    return 0 if (mc_ok and analytic_ok) else 2


def _demo_transdim_gaussian(cfg: dict, out: Path, seed: int, formats) -> int:
    try:
        gcfg = transdim.GaussianExampleConfig(
            sigma_d=float(cfg.get("sigma_d", 1.0)),
            sigma_s=float(cfg.get("sigma_s", 1.0)))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    report = transdim.gaussian_example_report(gcfg)
    if "json" in formats:
        write_json_report(out / "transdim_gaussian.json", report.to_json(), seed,
                          "transdim-gaussian")
    if "csv" in formats:
        write_csv(out / "gaussian_evidence.csv",
                  ["k [dimensionless]", "evidence [second^-2]",
                   "posterior [dimensionless]"],
                  [(k, report.evidences[k], report.p_k_posterior[k]) for k in (1, 2)])
    return 0 if max(report.quadrature_rel_err.values()) <= 1e-8 else 2


def _demo_fig7(cfg: dict, out: Path, seed: int, formats) -> int:
    sd = cfg.get("sigma_d_grid", "0.1:3:60")
    ss = cfg.get("sigma_s_grid", "0.1:3:60")
    sd = _parse_grid(sd) if isinstance(sd, str) else np.asarray(sd, float)
    ss = _parse_grid(ss) if isinstance(ss, str) else np.asarray(ss, float)
    if np.any(sd <= 0) or np.any(ss <= 0):
        raise ConfigError("sigma grids must be positive")
    fmap = transdim.fig7_region_map(sd, ss)
    if "json" in formats:
        write_json_report(out / "fig7.json", fmap.to_json(), seed, "fig7")
    if "csv" in formats:
        rows = [(d, s, fmap.bf[i, j], fmap.region[i, j])
                for i, d in enumerate(fmap.sigma_d)
                for j, s in enumerate(fmap.sigma_s)]
        write_csv(out / "fig7.csv",
                  ["sigma_d [second]", "sigma_s [second*meter^-1]",
                   "bayes_factor [dimensionless]", "region [dimensionless]"],
                  rows)
        write_csv(out / "fig7_boundary.csv",
                  ["sigma_s [second*meter^-1]", "sigma_d [second]"],
                  fmap.boundary)
    step = float(np.max(np.diff(fmap.sigma_d))) if len(fmap.sigma_d) > 1 else 0.0
    ok = all(abs(d - math.sqrt(2) * s) <= step + 1e-12 for s, d in fmap.boundary)
    return 0 if ok else 2


def _demo_units(cfg: dict, out: Path, seed: int, formats) -> int:
    factor = float(cfg.get("rescale_factor", 1000.0))
    if factor <= 0:
        raise ConfigError("rescale factor must be positive")
    base = transdim.UniformExampleConfig()
    rescaled = transdim.UniformExampleConfig(
        length=base.length / factor, s_min=base.s_min * factor,
        s_max=base.s_max * factor, d1=base.d1, d2=base.d2)
    bf0 = transdim.uniform_bayes_factor(base)
    bf1 = transdim.uniform_bayes_factor(rescaled)
    prob0, prob1 = transdim.uniform_problem(base), transdim.uniform_problem(rescaled)
    r0 = transdim.likelihood_evidence_ratio(prob0, 2, 1)
    r1 = transdim.likelihood_evidence_ratio(prob1, 2, 1)
    ev = transdim.conditional_evidence(prob0, 1)
    payload = {
        "config": {"rescale_factor": factor, "base": base.to_json()},
        "standard_bayes_factor": {"base": bf0, "rescaled": bf1,
                                  "drift": abs(bf1 - bf0),
                                  "unit": {}, "unit_str": "dimensionless"},
        "evidence_unit": ev.unit.to_json(),
        "evidence_unit_str": str(ev.unit),
        "likelihood_evidence_ratio": {
            "base": r0.to_json(), "rescaled": r1.to_json(),
            "scale_observed": r1.value / r0.value,
            "scale_expected": factor,
            "dimensionless": r0.is_dimensionless,
        },
        "formulas": ["evidence-unit-algebra", "likelihood-evidence-unit-excess"],
    }
    if "json" in formats:
        write_json_report(out / "units.json", payload, seed, "units")
    ok = (abs(bf1 - bf0) <= 1e-12 * bf0
          and abs(r1.value / r0.value - factor) / factor <= 1e-9
          and not r0.is_dimensionless)
    return 0 if ok else 2


_RUNNERS = {
    "borel": _demo_borel,
    "hierarchical": _demo_hierarchical,
    "misfit": _demo_misfit,
    "transdim-uniform": _demo_transdim_uniform,
    "transdim-gaussian": _demo_transdim_gaussian,
    "fig7": _demo_fig7,
    "units": _demo_units,
}

_DEMO_FLAGS = {
    "borel": ["v_min", "v_max", "length"],
    "hierarchical": ["pi_lambda", "pi_delta", "k", "k_grid"],
    "misfit": ["d_obs_grid", "lambda_min", "lambda_max", "k"],
    "transdim-uniform": ["length", "s_min", "s_max"],
    "transdim-gaussian": ["sigma_d", "sigma_s"],
    "fig7": ["sigma_d_grid", "sigma_s_grid"],
    "units": ["rescale_factor"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bplab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    demo = sub.add_parser("demo", help="run one demonstration")
    demo.add_argument("name", help=f"one of {', '.join(DEMOS)}")
    demo.add_argument("--config", default=None, help="JSON config file")
    demo.add_argument("--out", default="out", help="output directory")
    demo.add_argument("--seed", type=int, default=20260809)
    demo.add_argument("--format", default="json,csv",
                      help="comma list from {json,csv}")
    for flags in _DEMO_FLAGS.values():
        for flag in flags:
            opt = "--" + flag.replace("_", "-")
            if not any(opt in a.option_strings for a in demo._actions):
                demo.add_argument(opt, default=None, dest=flag)

    verify = sub.add_parser("verify", help="run the analytic-vs-oracle suite")
    verify.add_argument("level", help="fast or full")
    verify.add_argument("--config", default=None)
    verify.add_argument("--seed", type=int, default=20260809)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        if args.command == "demo":
            if args.name not in DEMOS:
                raise ConfigError(f"unknown demo {args.name!r}; pick from {DEMOS}")
            file_cfg = _load_config(args.config)
            overrides = {flag: getattr(args, flag, None) for flag in _DEMO_FLAGS[args.name]}
            run = RunConfig(
                demo=args.name,
                overrides=_merge(file_cfg, args.name, overrides),
                out=Path(args.out),
                seed=args.seed,
                formats=tuple(f.strip() for f in args.format.split(",") if f.strip()),
            )
            try:
                run.out.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise ConfigError(f"cannot create output dir {run.out}: {e}") from None
            code = _RUNNERS[run.demo](run.overrides, run.out, run.seed, run.formats)
            if code != 0:
                print(f"demo {run.demo}: internal verification FAILED", file=sys.stderr)
            return code

        if args.command == "verify":
            if args.level not in ("fast", "full"):
                raise ConfigError(f"unknown verification level {args.level!r}")
            _load_config(args.config)
            results = run_verification(args.level, seed=args.seed)
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
            n_fail = sum(not r.passed for r in results)
            print(f"{len(results) - n_fail}/{len(results)} checks passed")
            return 0 if n_fail == 0 else 2
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
