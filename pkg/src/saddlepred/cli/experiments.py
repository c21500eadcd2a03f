"""Named experiment presets writing per-seed and aggregate CSV files."""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from .. import __version__
from ..dynamics import (damped_solution, discrete_iterates, discrete_map_matrix,
                        undamped_solution)
from ..optim import Schedule, make_updater, run
from ..problems import (NoisyGradientConfig, make_bilinear, make_regularized, with_noise)
from ..theorem import check_bound_holds, measure_rate
from ..toygan import MixtureSpec, train_gan
from .config import ExperimentConfig, serialize
from .csvio import write_csv

ORBIT_COLUMNS = ("k", "loss", "dist_u", "dist_v", "norm", "gap_avg", "alpha", "beta")
ORBIT_AGG_COLUMNS = ("k", "mean_norm", "min_norm", "max_norm", "mean_loss", "mean_gap_avg")
SPECTRAL_COLUMNS = ("mode", "kappa", "det", "trace", "lambda1_re", "lambda1_im", "lambda2_re",
                    "lambda2_im", "modulus")
ODE_COLUMNS = ("k", "t", "error")
ODE_AGG_COLUMNS = ("alpha", "max_error", "ratio")
RATE_COLUMNS = ("l", "gap_avg", "gap_last")
RATE_AGG_COLUMNS = ("l", "mean_gap", "bound", "holds")
GAN_COLUMNS = ("step", "covered", "loss")
GAN_SAMPLE_COLUMNS = ("step", "x", "y")
GAN_AGG_COLUMNS = ("seed", "final_covered", "collapsed")


@dataclass
class RunManifest:
    experiment: str
    config_hash: str
    library_version: str
    runs: List[dict] = field(default_factory=list)
    aggregates: List[str] = field(default_factory=list)
    summary: Dict[str, object] = field(default_factory=dict)

    @property
    def collapsed(self):
        return any(r["collapsed"] for r in self.runs)

    def files(self):
        out = list(self.aggregates)
        for r in self.runs:
            out.extend(r["files"])
        return out

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _init(cfg, dim_u, dim_v):
    u0 = np.asarray(cfg.u0, dtype=np.float64) if cfg.u0 is not None else None
    v0 = np.asarray(cfg.v0, dtype=np.float64) if cfg.v0 is not None else None
    if u0 is None:
        u0 = np.ones(dim_u)
    if v0 is None:
        v0 = np.zeros(dim_v)
    return u0, v0


def _updaters(cfg):
    return (make_updater(cfg.updater, momentum=cfg.momentum, beta1=cfg.beta1, beta2=cfg.beta2),
            make_updater(cfg.updater, momentum=cfg.momentum, beta1=cfg.beta1, beta2=cfg.beta2))


def _bilinear_orbit(cfg, out, manifest):
    base = make_bilinear(cfg.K)
    u0, v0 = _init(cfg, base.dim_u, base.dim_v)
    schedules = (Schedule(cfg.schedule, cfg.alpha), Schedule(cfg.schedule, cfg.beta))
    for method in cfg.methods:
        norms, losses, gaps, ks = [], [], [], None
        for seed in cfg.seeds:
            t0 = time.perf_counter()
            problem = with_noise(base, NoisyGradientConfig(cfg.noise_std, seed))
            rec = run(problem, (u0, v0), method=method, updaters=_updaters(cfg),
                      schedules=schedules, n_steps=cfg.n_steps, record_every=cfg.record_every)
            cols = {c: rec.column(c) for c in rec.columns}
            norm = rec.norm
            path = os.path.join(out, f"bilinear_orbit_{method}_seed{seed}.csv")
            write_csv(path, ORBIT_COLUMNS, zip(
                cols["k"].astype(int).tolist(), cols["loss"].tolist(), cols["dist_u"].tolist(),
                cols["dist_v"].tolist(), norm.tolist(), cols["gap_avg"].tolist(),
                cols["alpha"].tolist(), cols["beta"].tolist()))
            manifest.runs.append(dict(method=method, seed=seed, files=[path],
                                      wall_clock_s=time.perf_counter() - t0,
                                      collapsed=rec.collapsed))
            n = len(rec)
            ks = cols["k"][:n] if ks is None or len(ks) > n else ks
            norms.append(norm)
            losses.append(cols["loss"])
            gaps.append(cols["gap_avg"])
        n = min(len(x) for x in norms)
        N = np.array([x[:n] for x in norms])
        agg = os.path.join(out, f"bilinear_orbit_{method}_aggregate.csv")
        write_csv(agg, ORBIT_AGG_COLUMNS, zip(
            ks[:n].astype(int).tolist(), N.mean(0).tolist(), N.min(0).tolist(), N.max(0).tolist(),
            np.mean([x[:n] for x in losses], 0).tolist(), np.mean([x[:n] for x in gaps], 0).tolist()))
        manifest.aggregates.append(agg)
        manifest.summary[f"{method}_final_mean_norm"] = float(N[:, -1].mean())


def _spectral(cfg, out, manifest):
    for method in cfg.methods:
        spec = discrete_map_matrix(method, cfg.K, cfg.alpha, cfg.beta)
        kappa = np.sqrt(np.maximum(np.linalg.eigvalsh(np.asarray(cfg.K).T @ np.asarray(cfg.K)), 0))
        kappa = np.sort(kappa)[::-1]
        rows = []
        for i in range(spec.det.size):
            l1, l2 = spec.eigenvalues[i]
            rows.append((i, float(kappa[i]), float(spec.det[i]), float(spec.trace[i]),
                         l1.real, l1.imag, l2.real, l2.imag, float(abs(l1))))
        for seed in cfg.seeds:
            path = os.path.join(out, f"spectral_{method}_seed{seed}.csv")
            write_csv(path, SPECTRAL_COLUMNS, rows)
            manifest.runs.append(dict(method=method, seed=seed, files=[path], wall_clock_s=0.0,
                                      collapsed=False))
        agg = os.path.join(out, f"spectral_{method}_aggregate.csv")
        write_csv(agg, SPECTRAL_COLUMNS, rows)
        manifest.aggregates.append(agg)
        manifest.summary[f"{method}_spectral_radius"] = spec.spectral_radius


def _ode_tracking(cfg, out, manifest):
    K = np.asarray(cfg.K)
    problem = make_bilinear(K)
    u0, v0 = _init(cfg, problem.dim_u, problem.dim_v)
    for method in cfg.methods:
        solver = undamped_solution if method == "plain" else damped_solution
        errs = []
        for alpha in (cfg.alpha, cfg.alpha / 2):
            beta = cfg.beta * alpha / cfg.alpha
            n = int(math.ceil(cfg.horizon / alpha - 1e-9))
            us, _ = discrete_iterates(method, K, alpha, beta, u0, v0, n)
            t = alpha * np.arange(n + 1)
            err = np.linalg.norm(us - solver(K, alpha, beta, u0, v0)(t), axis=1)
            errs.append((alpha, float(err.max()), err, t))
        _, _, err0, t0 = errs[0]
        for seed in cfg.seeds:
            path = os.path.join(out, f"ode_tracking_{method}_seed{seed}.csv")
            write_csv(path, ODE_COLUMNS, zip(range(err0.size), t0.tolist(), err0.tolist()))
            manifest.runs.append(dict(method=method, seed=seed, files=[path], wall_clock_s=0.0,
                                      collapsed=False))
        ratio = errs[0][1] / errs[1][1]
        agg = os.path.join(out, f"ode_tracking_{method}_aggregate.csv")
        write_csv(agg, ODE_AGG_COLUMNS, [(errs[0][0], errs[0][1], ratio),
                                         (errs[1][0], errs[1][1], 1.0)])
        manifest.aggregates.append(agg)
        manifest.summary[f"{method}_error_ratio"] = ratio


def _theorem_rate(cfg, out, manifest):
    problem = make_regularized(cfg.K, cfg.mu)
    init = None
    if cfg.u0 is not None or cfg.v0 is not None:
        u0 = np.ones(problem.dim_u) if cfg.u0 is None else np.asarray(cfg.u0)
        v0 = np.ones(problem.dim_v) if cfg.v0 is None else np.asarray(cfg.v0)
        init = (u0, v0)
    t0 = time.perf_counter()
    fit = measure_rate(problem, cfg.noise_std, cfg.alpha, cfg.beta, cfg.n_steps, cfg.seeds,
                       init=init, K=cfg.K, n_points=cfg.n_points)
    wall = time.perf_counter() - t0
    for i, seed in enumerate(fit.seeds):
        path = os.path.join(out, f"theorem_rate_predict_seed{seed}.csv")
        write_csv(path, RATE_COLUMNS, zip(fit.l.tolist(), fit.curves[i].tolist(),
                                          fit.last_curves[i].tolist()))
        manifest.runs.append(dict(method="predict", seed=seed, files=[path],
                                  wall_clock_s=wall / max(len(cfg.seeds), 1), collapsed=False))
    for seed in fit.collapsed_seeds:
        manifest.runs.append(dict(method="predict", seed=seed, files=[], wall_clock_s=0.0,
                                  collapsed=True))
    agg = os.path.join(out, "theorem_rate_predict_aggregate.csv")
    if fit.constants is not None:
        check = check_bound_holds(fit.constants, fit.l, fit.mean_gap)
        write_csv(agg, RATE_AGG_COLUMNS, zip(fit.l.tolist(), fit.mean_gap.tolist(),
                                             check.bound.tolist(), check.holds.tolist()))
        manifest.summary["bound_holds"] = check.all_hold
        manifest.summary["constants"] = asdict(fit.constants)
    else:
        write_csv(agg, RATE_AGG_COLUMNS, [])
    manifest.aggregates.append(agg)
    manifest.summary.update(slope=fit.slope, last_iterate_slope=fit.last_slope,
                            seed_slope_mean=fit.slope_mean, seed_slope_std=fit.slope_std,
                            fitted=fit.fitted)


def _toygan(cfg, out, manifest):
    spec = MixtureSpec(cfg.n_modes, cfg.radius, cfg.sigma)
    for method in cfg.methods:
        finals = []
        for seed in cfg.seeds:
            t0 = time.perf_counter()
            res = train_gan(spec, method, cfg.batch_size, cfg.n_steps, seed,
                            learning_rate=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2,
                            hidden=cfg.hidden, objective=cfg.objective,
                            eval_every=cfg.eval_every, probe_size=cfg.probe_size)
            losses = dict(zip(res.trajectory.column("k").astype(int).tolist(),
                              res.trajectory.column("loss").tolist()))
            path = os.path.join(out, f"toygan_{method}_seed{seed}.csv")
            write_csv(path, GAN_COLUMNS, [(s, c.covered, losses.get(s, float("nan")))
                                          for s, c in res.coverage])
            spath = os.path.join(out, f"toygan_{method}_seed{seed}_samples.csv")
            m = min(cfg.sample_dump, cfg.probe_size)
            write_csv(spath, GAN_SAMPLE_COLUMNS,
                      ((s, float(p[0]), float(p[1])) for s, pts in res.samples for p in pts[:m]))
            manifest.runs.append(dict(method=method, seed=seed, files=[path, spath],
                                      wall_clock_s=time.perf_counter() - t0,
                                      collapsed=res.collapsed))
            finals.append((seed, res.final_coverage.covered, res.collapsed))
        agg = os.path.join(out, f"toygan_{method}_aggregate.csv")
        write_csv(agg, GAN_AGG_COLUMNS, finals)
        manifest.aggregates.append(agg)
        manifest.summary[f"{method}_final_covered"] = [c for _, c, _ in finals]


RUNNERS = {
    "bilinear_orbit": _bilinear_orbit,
    "spectral": _spectral,
    "ode_tracking": _ode_tracking,
    "theorem_rate": _theorem_rate,
    "toygan": _toygan,
}


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute ``cfg`` and write its CSV files plus ``manifest.json`` into ``cfg.output_dir``."""
    cfg.validate()
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize(cfg))
    manifest = RunManifest(cfg.experiment, cfg.config_hash(), __version__)
    RUNNERS[cfg.experiment](cfg, out, manifest)
    manifest.write(os.path.join(out, "manifest.json"))
    return manifest
