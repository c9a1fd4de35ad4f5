"""Monte Carlo verification of the sharp oracle inequality.

Per replicate the harness draws Gaussian noise, forms the data-dependent
penalty levels

    lambda_S  = dual( (eps' X)_S / n ),
    lambda_Sc = residual-dual( (eps' X)_{S^c} / n ),

checks applicability (lambda > lambda_Sc), builds the stretch factor

    L_S = ((lambda + lambda_S) / (lambda - lambda_Sc)) * ((1+d)/(1-d)),

solves the penalized least-squares problem and compares

    ||X(bhat - b0)||_n^2 + d (lambda - lambda_Sc) omega_res(bhat_{S^c})
                         + d (lambda + lambda_S) omega(bhat_S - beta)
    <=  ||X(beta - b0)||_n^2
        + [(1+d)(lambda + lambda_S)]^2 * gamma_sq(L_S, S),

where gamma_sq is an upper bound on the effective sparsity computed
from a certified lower bound on the norm eigenvalue (so the verdict is
conservative-valid: an upper bound on gamma_sq can only enlarge the
right-hand side).  Replicates with no positive eigenvalue lower bound
are reported as unverifiable rather than passed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cones import Cone, pontil_maurer_bound
from .core import IndexSet, NoiseModel, load_matrix, restrict, support
from .eigenvalues import (
    ZERO_TOL,
    adaptive_restricted_eigenvalue,
    l1_eigenvalue,
    omega_eigenvalue,
    omega_eigenvalue_lower_bound,
)
from .norms import ConeStructuredNorm, L1Norm, Norm, norm_from_json
from .solvers import SolveOptions, solve_penalized_ls

__all__ = [
    "ExperimentConfig",
    "empirical_lambdas",
    "stretch_factor",
    "oracle_check",
    "comparison_check",
    "pontil_maurer_check",
    "run_experiment",
    "format17",
    "dumps17",
]

SLACK_TOL = -1e-7


def format17(x) -> str:
    """Floats rendered with 17 significant digits (lossless round trip)."""
    if isinstance(x, float):
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        if math.isnan(x):
            return '"nan"'
        return f"{x:.17g}"
    return json.dumps(x)


def dumps17(obj) -> str:
    """JSON text with deterministic key order and 17-digit floats."""
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps17(v)}" for k, v in sorted(obj.items()))
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps17(v) for v in obj) + "]"
    if isinstance(obj, (bool, type(None))):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format17(float(obj))
    return json.dumps(obj)


def _correlated_design(n, p, rho, seed):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, p))
    if rho:
        cov = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        Z = Z @ np.linalg.cholesky(cov).T
    return Z


@dataclass
class ExperimentConfig:
    """One oracle experiment: design, truth, norm, noise, lambda rule."""

    X: np.ndarray
    beta0: np.ndarray
    norm: Norm
    sigma: float
    replicates: int
    seed: int = 0
    beta: Optional[np.ndarray] = None
    S: Optional[IndexSet] = None
    delta_slack: float = 0.0
    lambda_rule: dict = field(default_factory=lambda: {"type": "multiplier", "factor": 1.5, "offset": 1e-6})
    solver_tolerance: float = 1e-8
    orthant_cap: int = 12

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.beta0 = np.asarray(self.beta0, dtype=float)
        if self.beta is None:
            self.beta = self.beta0.copy()
        self.beta = np.asarray(self.beta, dtype=float)
        if not 0 <= self.delta_slack < 1:
            raise ValueError("delta_slack must lie in [0, 1)")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        supp = support(self.beta)
        if self.S is None:
            self.S = self.norm.smallest_allowed_superset(supp)
        if not self.S.issuperset(supp):
            raise ValueError("S must contain the support of the candidate beta")
        self.norm._require_allowed(self.S)

    @classmethod
    def from_json(cls, obj) -> "ExperimentConfig":
        design = obj["design"]
        if "path" in design:
            X = load_matrix(design["path"]).X
        else:
            syn = design["synthetic"]
            X = _correlated_design(
                int(syn["n"]), int(syn["p"]), float(syn.get("rho", 0.0)), int(syn.get("seed", 0))
            )
        p = X.shape[1]
        norm = norm_from_json(obj["norm"], p=p)
        S = IndexSet(tuple(obj["set"]), p) if "set" in obj else None
        beta = np.array(obj["beta"], dtype=float) if "beta" in obj else None
        return cls(
            X=X,
            beta0=np.array(obj["beta0"], dtype=float),
            norm=norm,
            sigma=float(obj.get("sigma", 1.0)),
            replicates=int(obj.get("replicates", 1)),
            seed=int(obj.get("seed", 0)),
            beta=beta,
            S=S,
            delta_slack=float(obj.get("delta_slack", 0.0)),
            lambda_rule=obj.get("lambda_rule", {"type": "multiplier", "factor": 1.5, "offset": 1e-6}),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def empirical_lambdas(X, eps, S: IndexSet, norm: Norm):
    """Dual norms of the S / S^c blocks of the noise-design correlation."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    g = X.T @ np.asarray(eps, dtype=float) / n
    lam_s = norm.dual(restrict(g, S))
    comp = S.complement()
    lam_sc = norm.residual(S).dual(g[comp.positions()]) if len(comp) else 0.0
    return float(lam_s), float(lam_sc)


def stretch_factor(lam, lam_s, lam_sc, delta_slack=0.0) -> float:
    if not 0 <= delta_slack < 1:
        raise ValueError("delta_slack must lie in [0, 1)")
    if not lam > lam_sc:
        raise ValueError(f"inapplicable: lambda={lam} <= lambda_Sc={lam_sc}")
    return ((lam + lam_s) / (lam - lam_sc)) * ((1.0 + delta_slack) / (1.0 - delta_slack))


def _lambda_from_rule(rule, lam_sc):
    kind = rule.get("type", "multiplier")
    if kind == "fixed":
        return float(rule["value"])
    if kind == "multiplier":
        return float(rule.get("factor", 1.5)) * lam_sc + float(rule.get("offset", 1e-6))
    raise ValueError(f"unknown lambda rule {kind!r}")


def oracle_check(config: ExperimentConfig) -> list:
    """Run every replicate; returns one record (dict) per replicate.

    Statuses: ``pass`` / ``fail`` (inequality checked against the
    certified gamma_sq upper bound), ``inapplicable`` (lambda below the
    noise level on the complement), ``unverifiable`` (no positive
    eigenvalue lower bound, or the solver did not converge).
    """
    X, b0, beta, S, norm = config.X, config.beta0, config.beta, config.S, config.norm
    n = X.shape[0]
    ds = config.delta_slack
    res_norm = norm.residual(S)
    comp = S.complement()

    def pred_err(b):
        r = X @ (b - b0)
        return float(r @ r) / n

    approx_err = pred_err(beta)
    records = []
    for i in range(config.replicates):
        eps = NoiseModel(config.sigma, config.seed + i).draw(n)
        lam_s, lam_sc = empirical_lambdas(X, eps, S, norm)
        lam = _lambda_from_rule(config.lambda_rule, lam_sc)
        rec = {
            "replicate": i,
            "lambda_s": lam_s,
            "lambda_sc": lam_sc,
            "lambda": lam,
            "delta_slack": ds,
        }
        if not lam > lam_sc:
            rec.update(status="inapplicable")
            records.append(rec)
            continue
        L_S = stretch_factor(lam, lam_s, lam_sc, ds)
        rec["stretch"] = L_S
        delta_lower = omega_eigenvalue_lower_bound(X, S, L_S, norm, orthant_cap=config.orthant_cap)
        rec["eigenvalue_lower_bound"] = delta_lower
        gamma_sq = math.inf if delta_lower <= ZERO_TOL else 1.0 / delta_lower**2
        rec["gamma_sq_upper"] = gamma_sq
        rec["gamma_certified"] = delta_lower > ZERO_TOL

        Y = X @ b0 + eps
        fit = solve_penalized_ls(X, Y, lam, norm, SolveOptions(tolerance=config.solver_tolerance))
        rec["solver_converged"] = bool(fit.converged)
        bh = fit.beta
        lhs_pred = pred_err(bh)
        lhs_res = ds * (lam - lam_sc) * (res_norm.value(bh[comp.positions()]) if len(comp) else 0.0)
        lhs_norm = ds * (lam + lam_s) * norm.value(restrict(bh, S) - beta)
        rhs_est = ((1.0 + ds) * (lam + lam_s)) ** 2 * gamma_sq
        rec.update(
            lhs_prediction=lhs_pred,
            lhs_residual_term=lhs_res,
            lhs_norm_term=lhs_norm,
            lhs=lhs_pred + lhs_res + lhs_norm,
            rhs_approximation=approx_err,
            rhs_estimation=rhs_est,
            rhs=approx_err + rhs_est,
        )
        rec["slack"] = rec["rhs"] - rec["lhs"]
        if not fit.converged or not rec["gamma_certified"]:
            rec["status"] = "unverifiable"
        else:
            rec["status"] = "pass" if rec["slack"] >= SLACK_TOL else "fail"
        records.append(rec)
    return records


def summarize(records) -> dict:
    applicable = [r for r in records if r["status"] != "inapplicable"]
    verifiable = [r for r in records if r["status"] in ("pass", "fail")]
    slacks = sorted(r["slack"] for r in verifiable)
    return {
        "replicates": len(records),
        "applicable": len(applicable),
        "verifiable": len(verifiable),
        "failed": sum(1 for r in verifiable if r["status"] == "fail"),
        "unverifiable": sum(1 for r in records if r["status"] == "unverifiable"),
        "applicability_rate": len(applicable) / len(records) if records else 0.0,
        "min_slack": slacks[0] if slacks else math.nan,
        "median_slack": slacks[len(slacks) // 2] if slacks else math.nan,
    }


def run_experiment(config: ExperimentConfig, out_path) -> dict:
    """Write a JSON-lines report plus a CSV summary next to it."""
    records = oracle_check(config)
    out_path = str(out_path)
    try:
        with open(out_path, "w") as fh:
            for rec in records:
                fh.write(dumps17(rec) + "\n")
        summary = summarize(records)
        summary_path = out_path + ".summary.csv"
        with open(summary_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            keys = sorted(summary)
            writer.writerow(keys)
            writer.writerow([format17(summary[k]).strip('"') if isinstance(summary[k], float) else summary[k] for k in keys])
    except OSError as exc:
        raise OSError(f"cannot write report at {out_path}: {exc}") from exc
    summary["report"] = out_path
    summary["summary_csv"] = summary_path
    return summary


def comparison_check(X, S: IndexSet, L: float, cone: Cone, seed: int = 0) -> dict:
    """Ordering of the adaptive, l1 and cone-norm eigenvalues.

    Requires the projected cone to stay inside the cone and the
    indicator of S to belong to it; otherwise the cone comparison is
    skipped with a reason.
    """
    out = {"big_l": L, "set": list(S.indices)}
    adaptive = adaptive_restricted_eigenvalue(X, S, L, seed=seed)
    ell1 = l1_eigenvalue(X, S, L)
    out["delta_adaptive"] = adaptive.value
    out["delta_l1"] = ell1.value
    out["l1_ordering_holds"] = ell1.value >= adaptive.value - 1e-7
    if not cone.is_allowed(S):
        out["cone_comparison"] = "skipped: projected cone leaves the cone"
        return out
    if not cone.contains_indicator(S):
        out["cone_comparison"] = "skipped: indicator of S not in the cone"
        return out
    om = omega_eigenvalue(X, S, L, ConeStructuredNorm(cone), seed=seed)
    out["delta_cone"] = om.value
    out["cone_ordering_holds"] = om.value >= adaptive.value - 1e-7
    return out


def pontil_maurer_check(X, cone: Cone, draws: int = 1000, seed: int = 0) -> dict:
    """Empirical mean of the dual noise correlation against its bound.

    Verdict is true when mean - 3 * stderr <= bound, with standard
    Gaussian noise.
    """
    if draws < 100:
        raise ValueError("need at least 100 draws")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    vals = np.empty(draws)
    for k in range(draws):
        eps = rng.standard_normal(n)
        vals[k] = cone.dual(X.T @ eps) / n
    bound = pontil_maurer_bound(X, cone)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(draws))
    return {
        "empirical_mean": mean,
        "stderr": stderr,
        "bound": bound,
        "verdict": mean - 3.0 * stderr <= bound,
    }
