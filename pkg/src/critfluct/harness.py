"""Experiment harness: configuration records, pipeline commands, and reports.

Every pipeline is a pure function of its ExperimentConfig. The config's
canonical-JSON SHA-256 prefix is embedded in all JSON artifacts so `report`
can refuse to aggregate mismatched runs. CSV artifacts keep fixed headers
(their hash lives in the JSON sidecar next to them).

The statistical primitives (KS distances, block bootstrap, autocorrelation)
live in critfluct.stats and are re-exported here for convenience.
"""

from dataclasses import dataclass, asdict, field, replace
import hashlib
import json
import math
import os

import numpy as np

from critfluct.potentials import ModelParams, gamma_of
from critfluct.birthdeath import (
    build_chain,
    miclo_constants,
    lsi_bounds,
    spectral_gap,
    variance_of_test_function,
    stirling_envelope,
    znorm_scaling,
)
from critfluct.exact import exact_solution, law_of_magnetization, functionals, lsi_probe
from critfluct.limitlaw import quartic_law, moment, invariance_test
from critfluct.lattice import (
    SimulationSchedule,
    run_stationary,
    series_to_csv,
    write_sidecar,
    DEFAULT_EVENT_BUDGET,
)
from critfluct.field import (
    test_function,
    predicted_covariance,
    empirical_field_statistics,
)
from critfluct.stats import (  # noqa: F401  (re-exported API)
    ks_statistic,
    two_sample_ks,
    bootstrap_ci,
    integrated_autocorrelation_time,
    effective_sample_size,
)

__all__ = [
    "ExperimentConfig",
    "CheckResult",
    "StatReport",
    "config_hash",
    "snap_theta",
    "run_suite",
    "ks_statistic",
    "two_sample_ks",
    "bootstrap_ci",
]

COMMANDS = ("simulate", "exact", "birthdeath", "limit", "sde", "field", "report")


def snap_theta(n, theta):
    """Snap theta to +-sqrt(n) when it is within 1e-6 of the boundary.

    CLI users type truncated decimals for the gamma = 0 point (theta =
    sqrt(n)); values just past the boundary by rounding should mean the
    boundary, not a domain error. Anything further out is left alone for
    gamma_of to reject.
    """
    root = math.sqrt(n)
    if abs(theta) > root and abs(abs(theta) - root) <= 1e-6 * max(1.0, root):
        return math.copysign(root, theta)
    return float(theta)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameter record for one pipeline invocation.

    Fields not used by a command are ignored by it but still enter the
    config hash, so reuse the defaults unless a command needs them.
    """

    command: str
    n: int = 64
    theta: float = 0.0
    a: float = 0.1
    seed: int = 2024
    replicas: int = 1
    burn_in: float = None
    samples: int = 1000
    sample_interval: float = None
    dt: float = 1e-3
    t_final: float = 5.0
    paths: int = 100_000
    probe_samples: int = 100
    event_budget: float = DEFAULT_EVENT_BUDGET
    out: str = None
    force: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        object.__setattr__(self, "theta", snap_theta(self.n, self.theta))
        if self.command in ("simulate", "field") and self.n % 2 != 0:
            raise ValueError("simulation commands require even n")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ValueError("seed must fit in 64 bits")

    def model_params(self):
        return ModelParams(n=self.n, theta=self.theta, a=self.a)

    def schedule(self, replica_id=0):
        root = math.sqrt(self.n)
        return SimulationSchedule(
            burn_in_time=10.0 * root if self.burn_in is None else self.burn_in,
            sample_interval=0.5 * root if self.sample_interval is None else self.sample_interval,
            sample_count=self.samples,
            seed=self.seed,
            replica_id=replica_id,
        )


def config_hash(config):
    """12-hex-digit SHA-256 prefix of the canonical JSON config (out/force excluded)."""
    doc = asdict(config)
    doc.pop("out", None)
    doc.pop("force", None)
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    target: str


@dataclass
class StatReport:
    command: str
    config_hash: str
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add_check(self, name, passed, value, target):
        self.checks.append(CheckResult(name, bool(passed), float(value), target))

    def to_dict(self):
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "results": self.results,
            "checks": [asdict(c) for c in self.checks],
        }

    def lines(self):
        out = []
        for c in self.checks:
            flag = "pass" if c.passed else "FAIL"
            out.append(f"[{flag}] {c.name}: {c.value:.6g} (target {c.target})")
        return out


def _ensure_out(config):
    if config.out is None:
        return None
    os.makedirs(config.out, exist_ok=True)
    return config.out


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_simulate(config):
    params = config.model_params()
    report = StatReport("simulate", config_hash(config))
    out = _ensure_out(config)
    all_y = []
    total_events = 0
    for r in range(config.replicas):
        series = run_stationary(params, (), config.schedule(r),
                                event_budget=config.event_budget)
        all_y.append(series.rows[:, 1])
        total_events += series.n_events
        if out:
            base = os.path.join(out, f"series_r{r}")
            series_to_csv(series, base + ".csv")
            write_sidecar(series, base + ".json",
                          extra={"config_hash": report.config_hash})
        report.add_check(
            f"replica_{r}_sample_count", series.rows.shape[0] == config.samples,
            series.rows.shape[0], f"= {config.samples}",
        )
    y = np.concatenate(all_y)
    report.results.update({
        "n_samples": int(y.size),
        "n_events": int(total_events),
        "mean_Y": float(y.mean()),
        "var_Y": float(y.var()),
    })
    return report


def _cmd_exact(config):
    params = config.model_params()
    report = StatReport("exact", config_hash(config))
    solution = exact_solution(params, cross_check=params.n <= 8)
    pmf, support = law_of_magnetization(solution)
    f_ss = solution.f_ss()
    h_n, d_ex, d_g, d_n = functionals(f_ss, solution)

    report.results.update({
        "pmf": pmf.tolist(),
        "Y_support": support.tolist(),
        "H_ss": h_n,
        "D_ex_ss": d_ex,
        "D_G_ss": d_g,
        "D_n_ss": d_n,
    })
    report.add_check("pmf_normalized", abs(pmf.sum() - 1.0) < 1e-12,
                     pmf.sum(), "sum = 1 within 1e-12")
    if params.gamma == 0.0:
        uniform_dev = float(np.max(np.abs(solution.mu_ss * solution.mu_ss.size - 1.0)))
        report.add_check("uniform_at_gamma0", uniform_dev < 1e-10 * solution.mu_ss.size,
                         uniform_dev, "max relative deviation < 1e-10 * 2^n")
        report.add_check("H_ss_zero", h_n < 1e-10, h_n, "< 1e-10")
    if params.n <= 12 and config.probe_samples:
        probe = lsi_probe(config.probe_samples, solution, seed=config.seed)
        report.results["lsi_probe_max"] = probe
        report.add_check("lsi_probe_finite", math.isfinite(probe), probe, "finite")

    out = _ensure_out(config)
    if out:
        doc = {
            "config_hash": report.config_hash,
            "params": {"n": params.n, "theta": params.theta, "a": params.a,
                       "gamma": params.gamma},
            "pmf": pmf.tolist(),
            "Y_support": support.tolist(),
            "H_ss": h_n,
            "D_functionals": {"D_ex": d_ex, "D_G": d_g, "D_n": d_n},
            "lsi_probe_max": report.results.get("lsi_probe_max"),
        }
        _write_json(os.path.join(out, "exact.json"), doc)
    return report


def _detailed_balance_residual(chain):
    lhs = chain.log_pi[:-1] + chain.log_b[:-1]
    rhs = chain.log_pi[1:] + chain.log_d[1:]
    return float(np.max(np.abs(lhs - rhs)))


def _cmd_birthdeath(config):
    report = StatReport("birthdeath", config_hash(config))
    chain = build_chain(config.n, config.theta)
    c_minus, c_plus = miclo_constants(chain)
    lower, upper = lsi_bounds(chain)
    gap = spectral_gap(chain)
    dirichlet, variance = variance_of_test_function(chain)
    znorm = znorm_scaling(config.n, config.theta)
    db = _detailed_balance_residual(chain)
    root = math.sqrt(config.n)

    report.results.update({
        "C_minus": c_minus, "C_plus": c_plus, "C_n": max(c_minus, c_plus),
        "lsi_lower": lower, "lsi_upper": upper,
        "gap": gap, "gap_times_sqrt_n": gap * root,
        "var_fn": variance, "dirichlet_fn": dirichlet,
        "znorm": znorm, "db_residual": db,
    })
    report.add_check("detailed_balance", db < 1e-9, db, "max log residual < 1e-9")
    report.add_check("gap_above_lower_bound", gap >= 2.0 * lower,
                     gap / (2.0 * lower), ">= 1 (gap >= 1/(40 C_n))")

    out = _ensure_out(config)
    if out:
        header = ("n,theta,C_minus,C_plus,C_n,lsi_lower,lsi_upper,gap,"
                  "gap_times_sqrt_n,var_fn,dirichlet_fn,znorm")
        row = [config.n, config.theta, c_minus, c_plus, max(c_minus, c_plus),
               lower, upper, gap, gap * root, variance, dirichlet, znorm]
        path = os.path.join(out, "bd.csv")
        with open(path, "w") as fh:
            fh.write(header + "\n")
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        _write_json(os.path.join(out, "bd.json"),
                    {"config_hash": report.config_hash, **report.results})
    return report


def _cmd_limit(config):
    report = StatReport("limit", config_hash(config))
    law = quartic_law(config.theta)
    m2 = moment(law, 2)
    m4 = moment(law, 4)
    z = math.exp(law.logZ)

    from scipy.integrate import quad
    total = quad(lambda y: float(law.pdf(y)),
                 law.cdf_table[0, 0] - 6.0, law.cdf_table[-1, 0] + 6.0,
                 limit=200)[0]
    report.results.update({"Z": z, "logZ": law.logZ, "moment2": m2, "moment4": m4})
    report.add_check("pdf_normalized", abs(total - 1.0) < 1e-8,
                     total, "integral = 1 within 1e-8")
    report.add_check("cdf_endpoints",
                     law.cdf_table[0, 1] < 1e-12 and law.cdf_table[-1, 1] > 1.0 - 1e-12,
                     law.cdf_table[0, 1], "< 1e-12 at both ends")
    if config.theta == 0.0:
        z_exact = math.gamma(0.25) / 2.0
        report.add_check("Z_gamma_identity", abs(z - z_exact) < 1e-6,
                         z, f"= {z_exact:.7f} within 1e-6")

    out = _ensure_out(config)
    if out:
        y = law.cdf_table[:, 0]
        pdf = law.pdf(y)
        path = os.path.join(out, "limit.csv")
        with open(path, "w") as fh:
            fh.write("y,pdf,cdf\n")
            for yi, pi, ci in zip(y, pdf, law.cdf_table[:, 1]):
                fh.write(f"{yi:.17g},{pi:.17g},{ci:.17g}\n")
        _write_json(os.path.join(out, "limit.json"),
                    {"config_hash": report.config_hash, **report.results})
    return report


def _cmd_sde(config):
    report = StatReport("sde", config_hash(config))
    rng = np.random.default_rng(config.seed)
    ks = invariance_test(config.theta, config.a, config.t_final,
                         config.paths, config.dt, rng)
    law = quartic_law(config.theta)
    report.results.update({
        "ks_two_sample": ks,
        "moment2": moment(law, 2),
        "moment4": moment(law, 4),
    })
    report.add_check("invariance_ks", ks < 0.01, ks, "< 0.01")

    out = _ensure_out(config)
    if out:
        _write_json(os.path.join(out, "sde.json"), {
            "config_hash": report.config_hash,
            "theta": config.theta, "a": config.a, "t_final": config.t_final,
            "dt": config.dt, "paths": config.paths, **report.results,
        })
    return report


def _cmd_field(config):
    params = config.model_params()
    report = StatReport("field", config_hash(config))
    modes = [test_function("cosine", 1, config.n), test_function("cosine", 2, config.n)]
    series = run_stationary(params, modes, config.schedule(0),
                            event_budget=config.event_budget)
    stats = empirical_field_statistics(series, [1, 2], seed=config.seed)

    doc_modes = []
    for j, h in enumerate(modes):
        predicted = predicted_covariance(h, h, config.a)
        var = float(stats.cov[j, j])
        lo, hi = stats.cov_ci[j, j]
        rel = abs(var - predicted) / predicted
        report.add_check(f"var_mode_{h.k}_within_10pct", rel < 0.10,
                         rel, "relative error < 0.10")
        mean_lo, mean_hi = stats.mean_ci[j]
        half = 0.5 * (mean_hi - mean_lo)
        z = abs(stats.mean[j]) / half if half > 0 else math.inf
        report.add_check(f"mean_mode_{h.k}_zero", z < 3.0, z, "|mean| < 3 CI half-widths")
        doc_modes.append({
            "kind": h.kind, "k": h.k, "mean": float(stats.mean[j]),
            "mean_ci": [float(mean_lo), float(mean_hi)],
            "variance": var, "variance_ci": [float(lo), float(hi)],
            "predicted": predicted,
            "z_score": (var - predicted) / (0.5 * (hi - lo)) if hi > lo else None,
        })
    cross = float(stats.cov[0, 1])
    c_lo, c_hi = stats.cov_ci[0, 1]
    half = 0.5 * (c_hi - c_lo)
    z = abs(cross) / half if half > 0 else math.inf
    report.add_check("cross_cov_zero", z < 3.0, z, "|cov| < 3 CI half-widths")
    report.results.update({
        "ess": stats.ess.tolist(),
        "block_length": stats.block_length,
        "cross_cov": cross,
    })

    out = _ensure_out(config)
    if out:
        series_to_csv(series, os.path.join(out, "field_series.csv"))
        write_sidecar(series, os.path.join(out, "field_series.json"),
                      extra={"config_hash": report.config_hash})
        _write_json(os.path.join(out, "field.json"), {
            "config_hash": report.config_hash,
            "params": {"n": params.n, "theta": params.theta, "a": params.a},
            "modes": doc_modes,
            "cross_covariance": {"value": cross, "ci": [float(c_lo), float(c_hi)]},
        })
    return report


def _cmd_report(config):
    """Aggregate JSON artifacts in the out directory into one report."""
    report = StatReport("report", config_hash(config))
    out = config.out
    if out is None or not os.path.isdir(out):
        raise ValueError("report requires --out pointing at an artifact directory")
    hashes = {}
    merged = {}
    for name in sorted(os.listdir(out)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(out, name)) as fh:
            doc = json.load(fh)
        h = doc.get("config_hash")
        if h is not None:
            hashes[name] = h
        merged[name] = doc
    distinct = sorted(set(hashes.values()))
    if len(distinct) > 1 and not config.force:
        raise ValueError(
            f"artifact config hashes differ ({distinct}); rerun or pass force"
        )
    report.results = {"files": sorted(merged), "hashes": hashes}
    report.add_check("hashes_consistent", len(distinct) <= 1 or config.force,
                     len(distinct), "single config hash (or forced)")
    if out:
        _write_json(os.path.join(out, "combined_report.json"),
                    {**report.to_dict(), "artifacts": merged})
    return report


_DISPATCH = {
    "simulate": _cmd_simulate,
    "exact": _cmd_exact,
    "birthdeath": _cmd_birthdeath,
    "limit": _cmd_limit,
    "sde": _cmd_sde,
    "field": _cmd_field,
    "report": _cmd_report,
}


def run_suite(config):
    """Execute the configured pipeline and return its StatReport."""
    return _DISPATCH[config.command](config)
