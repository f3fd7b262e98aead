"""Configuration-driven experiment pipelines with persisted artifacts.

A run takes a plain-text key=value configuration, executes a named stage
chain deterministically, writes every module export into the output
directory, and records each numeric verdict in one manifest keyed by the
configuration hash.  Identical configuration and seed reproduce the manifest
byte for byte (no timestamps inside).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import pathlib
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import biorthogonal as bio
from . import control as ctl
from . import cubic
from . import fractional as fr
from . import moving
from . import product as pr
from . import simulate as sim

__all__ = ["ConfigError", "RunConfig", "load_config", "run_pipeline", "sweep", "PIPELINES"]

PIPELINES = ("spectrum", "gaps", "biorthogonal", "control", "simulate", "full")


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "1", "on"):
        return True
    if text.lower() in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_SCHEMA = {
    # name: (parser, default)
    "s": (float, 0.75),
    "M": (float, 0.5),
    "c": (float, 1.0),
    "T_factor": (float, 1.05),
    "T": (float, None),
    "N": (int, 16),
    "family_N": (int, 12),
    "n_table": (int, 200),
    "omega0_lo": (float, -0.3),
    "omega0_hi": (float, 0.3),
    "sigma_xi": (float, 3.0),
    "sigma_xi_dot": (float, 2.0),
    "sigma_zeta": (float, 1.0),
    "backend": (str, "asymptotic"),
    "projection": (str, "orthogonal"),
    "precision": (str, "mp"),
    "terminal_tol": (float, 1.0e-6),
    "gap_epsilon": (float, None),
    "trials": (int, 200),
    "seed": (int, 0),
    "outdir": (str, "out"),
    "allow_short_horizon": (_parse_bool, False),
}


@dataclass
class RunConfig:
    values: dict

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def validated(self) -> "RunConfig":
        v = self.values
        if not 0.0 < v["s"] < 1.0:
            raise ConfigError("s must lie in (0,1)")
        if v["M"] == 0.0:
            raise ConfigError("M must be nonzero")
        if v["N"] < 1 or v["family_N"] < 1:
            raise ConfigError("N and family_N must be positive")
        if not v["omega0_hi"] > v["omega0_lo"]:
            raise ConfigError("omega0 must be a nonempty interval")
        if v["backend"] not in ("asymptotic", "discretized"):
            raise ConfigError("backend must be asymptotic or discretized")
        if v["projection"] not in ("orthogonal", "exact_gram"):
            raise ConfigError("projection must be orthogonal or exact_gram")
        if v["precision"] not in ("mp", "float64"):
            raise ConfigError("precision must be mp or float64")
        if v["s"] <= 0.5:
            raise ConfigError("control pipelines require s > 1/2")
        if v["c"] == 0.0:
            raise ConfigError("velocity c = 0 is excluded")
        return self

    def text(self) -> str:
        lines = [f"{k} = {self.values[k]}" for k in sorted(self.values)]
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.text().encode("utf-8")).hexdigest()[:16]

    def omega0(self):
        return (self.values["omega0_lo"], self.values["omega0_hi"])

    def with_overrides(self, **kw) -> "RunConfig":
        vals = dict(self.values)
        vals.update(kw)
        return RunConfig(vals).validated()


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Typed key=value configuration; unknown keys are rejected."""
    values = {k: default for k, (_, default) in _SCHEMA.items()}
    if path is not None:
        for lineno, raw in enumerate(pathlib.Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            parser = _SCHEMA[key][0]
            try:
                values[key] = parser(text)
            except ConfigError:
                raise
            except Exception as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    if overrides:
        for key, val in overrides.items():
            if key not in _SCHEMA:
                raise ConfigError(f"unknown override {key!r}")
            if val is not None:
                values[key] = val
    return RunConfig(values).validated()


def _resolve_horizon(config: RunConfig, gamma: float) -> tuple[float, bool]:
    threshold = bio.horizon_threshold(config.c, gamma)
    T = config.values["T"] if config.values["T"] is not None else config.T_factor * threshold
    below = T <= threshold
    if below and not config.allow_short_horizon:
        raise ConfigError(
            f"T = {T:.4f} is below the horizon threshold {threshold:.4f}; "
            "set allow_short_horizon = true for below-threshold sweeps"
        )
    return float(T), below


class _Run:
    def __init__(self, config: RunConfig, outdir: pathlib.Path):
        self.config = config
        self.outdir = outdir
        self.stages: dict = {}
        self.cache: dict = {}

    def record(self, stage: str, verdicts: dict, artifacts: list):
        self.stages[stage] = {"verdicts": verdicts, "artifacts": sorted(artifacts)}

    # ---- stage implementations -------------------------------------------
    def table(self) -> fr.EigenvalueTable:
        if "table" not in self.cache:
            n_max = max(self.config.n_table, 4 * self.config.family_N, self.config.N)
            self.cache["table"] = fr.build_eigenvalue_table(self.config.s, n_max, backend=self.config.backend)
        return self.cache["table"]

    def spectrum_stage(self):
        cfg = self.config
        table = self.table()
        path = self.outdir / "eigenvalues.csv"
        table.to_csv(path)
        artifacts = [path.name]
        verdicts = {
            "monotone": bool(np.all(np.diff(table.rho) > 0)),
            "gap_certified": table.gap_certified,
            "gap_gamma": table.gap_gamma,
            "gap_threshold": table.gap_threshold,
        }
        if cfg.backend == "asymptotic":
            td = fr.build_eigenvalue_table(cfg.s, 32, backend="discretized")
            agr = fr.compare_backends(fr.build_eigenvalue_table(cfg.s, 32), td)
            verdicts["backend_agreement"] = agr.passed
            verdicts["backend_max_rel"] = agr.max_rel
        sym = fr.verify_symbol_identity(math.pi / 2, cfg.s, tol=1e-3)
        verdicts["symbol_identity"] = sym.passed
        verdicts["symbol_max_rel_error"] = sym.max_rel_error
        self.record("spectrum", verdicts, artifacts)
        return verdicts

    def ms(self) -> moving.MovingSpectrum:
        if "ms" not in self.cache:
            self.cache["ms"] = moving.build_moving_spectrum(self.table(), self.config.M, self.config.c, self.config.N)
        return self.cache["ms"]

    def gaps_stage(self):
        cfg = self.config
        ms = self.ms()
        report = moving.gap_diagnostics(ms, epsilon=cfg.values["gap_epsilon"])
        path = self.outdir / "gap_report.json"
        report.to_json(path)
        lam_path = self.outdir / "lambda_table.csv"
        moving.lambda_table_to_csv(ms, lam_path)
        frame = moving.frame_bounds(ms, trials=max(100, cfg.trials), seed=cfg.seed)
        verdicts = {
            "gap_clauses": report.passed,
            "frame_sandwich": frame.passed,
            "frame_a1": frame.a1_hat,
            "frame_a2": frame.a2_hat,
            "critical_velocity": ms.critical.velocity if ms.critical else None,
        }
        self.record("gaps", verdicts, [path.name, lam_path.name])
        return verdicts

    def biorthogonal_stage(self):
        cfg = self.config
        table = self.table()
        ms4 = moving.build_moving_spectrum(table, cfg.M, cfg.c, 4 * cfg.family_N)
        pf = pr.build_product(ms4)
        prep = pr.verify_product_properties(pf, family_N=cfg.family_N)
        T, below = _resolve_horizon(cfg, table.gap_gamma)
        bf = bio.build_biorthogonal(pf, T, family_N=cfg.family_N)
        man_path = self.outdir / "biorthogonal_manifest.json"
        bf.export_manifest(man_path)
        bf.export_samples(self.outdir / "theta_samples")
        low = bio.verify_lower_summation(bf, trials=cfg.trials, seed=cfg.seed)
        verdicts = {
            "product_properties": prep.passed,
            "product_type_empirical": prep.type_empirical,
            "product_growth_d1": prep.growth.d1,
            "derivative_envelope_c2": prep.c2_hat,
            "gram_deviation": bf.gram_deviation,
            "gram_within_1e3": bool(bf.gram_deviation <= 1e-3),
            "norm_ratio_bound": bf.norm_ratio_bound(),
            "lower_summation": low.passed,
            "below_threshold_watermark": below,
        }
        self.record("biorthogonal", verdicts, [man_path.name, "theta_samples"])
        return verdicts

    def control_stage(self):
        cfg = self.config
        ms = self.ms()
        T, below = _resolve_horizon(cfg, self.table().gap_gamma)
        gram = ctl.assemble_gram(ms, cfg.omega0(), T)
        data = ctl.random_initial_data(ms, seed=cfg.seed)
        msys = ctl.assemble_moments(data, ms)
        cf = ctl.synthesize_control(msys, gram)
        path = self.outdir / ("control_belowT.json" if below else "control.json")
        cf.to_json(path)
        cf.sample_csv(self.outdir / "control_samples.csv", nt=48, nx=24)
        obs = ctl.certify_observability(ms, cfg.omega0(), T, trials=cfg.trials, seed=cfg.seed, gram=gram)
        verdicts = {
            "moment_residual": cf.residual,
            "residual_ok": bool(cf.residual <= 1e-10 * max(cf.rhs_norm, 1e-300)),
            "control_norm": cf.norm,
            "gram_cond_scaled": gram.cond_scaled,
            "observability": obs.passed,
            "observability_constant": obs.c_obs_hat,
            "below_threshold_watermark": below,
        }
        self.cache["control"] = (data, cf, T)
        self.record("control", verdicts, [path.name, "control_samples.csv"])
        return verdicts

    def simulate_stage(self):
        cfg = self.config
        ms = self.ms()
        if "control" not in self.cache:
            self.control_stage()
        data, cf, T = self.cache["control"]
        simulator = sim.GalerkinSimulator(
            ms, cfg.omega0(), projection=cfg.projection,
            sigma_weights=(cfg.sigma_xi, cfg.sigma_xi_dot, cfg.sigma_zeta),
        )
        precision = cfg.precision if cfg.projection == "orthogonal" else "float64"
        _, report = simulator.run_to_T(data, cf, T, tol_rel=cfg.terminal_tol, n_checkpoints=24, precision=precision)
        rep_path = self.outdir / "terminal_report.json"
        report.to_json(rep_path)
        report.trajectory_csv(self.outdir / "trajectory.csv")
        rng = np.random.default_rng(cfg.seed + 1)
        modes = [(n, j) for n in ms.mode_indices() for j in (1, 2, 3)]
        residuals = []
        for _ in range(8):
            coeffs = {mk: complex(rng.standard_normal(), rng.standard_normal()) for mk in modes}
            residuals.append(sim.verify_duality(data, cf, coeffs, T, ms))
        verdicts = {
            "terminal_pass": report.passed,
            "terminal_ratios": report.ratios,
            "duality_max_residual": float(max(residuals)),
            "duality_ok": bool(max(residuals) <= 1e-5),
            "plane_wave_gram_deviation": simulator.gram.deviation,
        }
        self.record("simulate", verdicts, [rep_path.name, "trajectory.csv"])
        return verdicts


def run_pipeline(config: RunConfig, pipeline: str, outdir=None):
    """Execute the stage chain; returns (manifest dict, passed flag)."""
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; choose from {PIPELINES}")
    out = pathlib.Path(outdir if outdir is not None else config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(config, out)
    chain = {
        "spectrum": ["spectrum"],
        "gaps": ["spectrum", "gaps"],
        "biorthogonal": ["spectrum", "biorthogonal"],
        "control": ["spectrum", "gaps", "control"],
        "simulate": ["spectrum", "gaps", "control", "simulate"],
        "full": ["spectrum", "gaps", "biorthogonal", "control", "simulate"],
    }[pipeline]
    for stage in chain:
        getattr(run, f"{stage}_stage")()

    failures = []
    for stage, rec in run.stages.items():
        for key, val in rec["verdicts"].items():
            if key.endswith("_watermark"):
                continue  # informational flag, not a pass/fail verdict
            if isinstance(val, bool) and not val:
                failures.append(f"{stage}.{key}")
    manifest = {
        "tool": "memwave",
        "version": __version__,
        "pipeline": pipeline,
        "config": {k: config.values[k] for k in sorted(config.values)},
        "config_hash": config.hash(),
        "stages": run.stages,
        "failures": failures,
        "passed": not failures,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
    return manifest, not failures


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON-serializable: {type(obj)}")


SWEEPABLE = ("c", "T", "N", "M", "s", "T_factor")


def sweep(config: RunConfig, parameter: str, values, pipeline: str = "simulate", outdir=None):
    """Run the pipeline per parameter value and aggregate key scalars."""
    if parameter not in SWEEPABLE:
        raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}")
    out = pathlib.Path(outdir if outdir is not None else config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in values:
        sub = out / f"{parameter}_{value}"
        try:
            cfgv = config.with_overrides(**{parameter: value})
            manifest, ok = run_pipeline(cfgv, pipeline, outdir=sub)
            stages = manifest["stages"]
            row = {
                "parameter": parameter,
                "value": value,
                "passed": ok,
                "error": "",
                "observability_constant": stages.get("control", {}).get("verdicts", {}).get("observability_constant"),
                "control_norm": stages.get("control", {}).get("verdicts", {}).get("control_norm"),
                "moment_residual": stages.get("control", {}).get("verdicts", {}).get("moment_residual"),
                "gram_cond_scaled": stages.get("control", {}).get("verdicts", {}).get("gram_cond_scaled"),
                "terminal_xi": stages.get("simulate", {}).get("verdicts", {}).get("terminal_ratios", {}).get("xi"),
                "terminal_xi_dot": stages.get("simulate", {}).get("verdicts", {}).get("terminal_ratios", {}).get("xi_dot"),
                "terminal_zeta": stages.get("simulate", {}).get("verdicts", {}).get("terminal_ratios", {}).get("zeta"),
            }
        except Exception as exc:  # per-value failures recorded, sweep continues
            row = {"parameter": parameter, "value": value, "passed": False, "error": str(exc)}
        rows.append(row)
    keys = ["parameter", "value", "passed", "error", "observability_constant", "control_norm",
            "moment_residual", "gram_cond_scaled", "terminal_xi", "terminal_xi_dot", "terminal_zeta"]
    path = out / f"sweep_{parameter}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in keys})
    return rows, path
