"""Config-driven experiment runner.

Subcommands: simulate, verify, clt, compare, render, formulas dump.
Replicate i always uses the random stream PCG64(splitmix64(seed, i)), a pure
integer function of (seed, i), and results are gathered by replicate index,
so reports are byte-identical for a fixed seed regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from multiprocessing import Pool

import numpy as np

from . import compare as compare_mod
from . import estimators, formulas, mnw, render
from .config import ConfigError, ExperimentConfig
from .geometry import ConvexPolytope
from .mnw import IFacetRecord, Tessellation

Z_MAX_DEFAULT = 4.0

_MASK = (1 << 64) - 1


def splitmix64(seed: int, i: int) -> int:
    """Pure integer mix of (seed, i): one splitmix64 step of
    seed + (i+1)*0x9E3779B97F4A7C15 (all arithmetic mod 2^64)."""
    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def replicate_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(splitmix64(seed, i)))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


# ---------------------------------------------------------------------------
# Replicate workers (module level for multiprocessing picklability)
# ---------------------------------------------------------------------------


def _rebuild(cfg_json: str):
    cfg = ExperimentConfig.from_json(cfg_json)
    return cfg, cfg.build_window(), cfg.build_measure()


def _worker_verify(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    Y = mnw.run(spec, cfg.t, W, rng, checkpoints=cfg.checkpoints)
    out = {
        "total_surface": estimators.total_surface(Y),
        "n_facets": len(Y.i_facets),
        "n_cells": len(Y.cells),
    }
    if W.d >= 2:
        out["vertex_count"] = len(estimators.interior_vertices(Y))
    if cfg.erosion > 0:
        try:
            out["facet_sizes"] = estimators.isegment_sample(Y, cfg.erosion)
        except estimators.EmptySample:
            out["facet_sizes"] = []
    if cfg.r_grid:
        out["k_hat"] = [
            v for _, v in estimators.k_function_estimate(
                Y, cfg.r_grid, cfg.erosion, cfg.discretization, cfg.t
            )
        ]
    return out


def _worker_simulate(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    Y = mnw.run(spec, cfg.t, W, rng, checkpoints=cfg.checkpoints)
    return Y.to_json()


def _worker_increment(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    WR = W.scaled(cfg.R)
    Y = mnw.run(spec, cfg.t, WR, rng, checkpoints=[cfg.s0, cfg.t])
    d = W.d
    inc = Y.checkpoint_totals[cfg.t] - Y.checkpoint_totals[cfg.s0]
    return {"increment": inc / cfg.R ** (d / 2.0), "n_cells": len(Y.cells)}


def _worker_clt2d(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    WR = W.scaled(cfg.R)
    Y = mnw.run(spec, cfg.t, WR, rng)
    return {"total_surface": estimators.total_surface(Y), "n_cells": len(Y.cells)}


def _worker_clt3d(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    # big-bang-sensitive proxy: R^{-(d-1)} * total surface of Y(R, W)
    Y = mnw.run(spec, cfg.R, W, rng)
    d = W.d
    return {
        "xi_proxy": estimators.total_surface(Y) / cfg.R ** (d - 1),
        "n_cells": len(Y.cells),
    }


def _worker_iterate(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    s, u = cfg.iterate_split
    rng = replicate_rng(cfg.seed, i)
    Y1 = mnw.run(spec, s, W, rng)
    Y12 = mnw.iterate(Y1, spec, u, rng)
    rng2 = replicate_rng(cfg.seed ^ 0x5DEECE66D, i)
    Yfull = mnw.run(spec, s + u, W, rng2)
    return {
        "iterated_surface": estimators.total_surface(Y12),
        "direct_surface": estimators.total_surface(Yfull),
        "n_cells": len(Y12.cells) + len(Yfull.cells),
    }


def _worker_compare(args):
    cfg_json, i = args
    cfg, W, spec = _rebuild(cfg_json)
    rng = replicate_rng(cfg.seed, i)
    P = compare_mod.run_pht(spec, cfg.t, W, rng)
    out = {
        "n_hyperplanes": len(P.hyperplanes),
        "total_surface": P.total_surface,
        "n_cells": 0,
    }
    if cfg.r_grid:
        shim = Tessellation(
            W, cfg.t, [],
            [IFacetRecord(F, 0.0, H, -1) for H, F in zip(P.hyperplanes, P.sections)],
        )
        out["k_hat"] = [
            v for _, v in estimators.k_function_estimate(
                shim, cfg.r_grid, cfg.erosion, cfg.discretization, cfg.t
            )
        ]
    return out


_WORKERS = {
    "verify": _worker_verify,
    "simulate": _worker_simulate,
    "increment": _worker_increment,
    "clt2d": _worker_clt2d,
    "clt3d": _worker_clt3d,
    "iterate-test": _worker_iterate,
    "compare": _worker_compare,
}


def run_replicates(cfg: ExperimentConfig, threads: int):
    worker = _WORKERS[cfg.kind]
    cfg_json = cfg.to_json()
    jobs = [(cfg_json, i) for i in range(cfg.replicates)]
    if threads <= 1 or cfg.replicates == 1:
        return [worker(j) for j in jobs]
    with Pool(threads) as pool:
        return pool.map(worker, jobs)  # order == replicate index


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


class Report:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.rows = []  # (statistic, estimate, se, target, z, provenance)
        self.meta = {}

    def add(self, name, est, se=None, target=None, z=None, provenance="mc"):
        self.rows.append((name, est, se, target, z, provenance))

    def add_estimate(self, name, ewe, provenance="mc"):
        self.add(name, ewe.estimate, ewe.se, ewe.target, ewe.z, provenance)

    def worst_z(self):
        zs = [abs(r[4]) for r in self.rows if r[4] is not None and math.isfinite(r[4])]
        return max(zs) if zs else 0.0

    def passed(self, z_max=Z_MAX_DEFAULT):
        return all(
            r[4] is None or (math.isfinite(r[4]) and abs(r[4]) <= z_max)
            for r in self.rows
        )

    def to_csv(self) -> str:
        lines = ["statistic,estimate,se,target,z,provenance"]
        for name, est, se, target, z, prov in self.rows:
            lines.append(
                ",".join([name, _fmt(est), _fmt(se), _fmt(target), _fmt(z), prov])
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": json.loads(self.cfg.to_json()),
                "rows": [
                    {
                        "statistic": n,
                        "estimate": e,
                        "se": s,
                        "target": t,
                        "z": z,
                        "provenance": p,
                    }
                    for n, e, s, t, z, p in self.rows
                ],
                "meta": self.meta,
                "passed": self.passed(),
            },
            indent=2,
            sort_keys=True,
        )

    def write(self, out_dir, stem):
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, stem + ".csv")
        json_path = os.path.join(out_dir, stem + ".json")
        with open(csv_path, "w") as fh:
            fh.write(self.to_csv())
        with open(json_path, "w") as fh:
            fh.write(self.to_json())
        return csv_path, json_path


def mean_surface_target(cfg: ExperimentConfig) -> float:
    """E[total facet (d-1)-volume] = t * integral over [W] of the section
    measure; equals t Vol_d(W) for the isotropic normalization and
    t * sum_i prod_{j != i} extent_j for the axis measure on a box."""
    W = cfg.build_window()
    spec = cfg.build_measure()
    if spec.kind == "isotropic":
        return cfg.t * W.volume
    if spec.kind == "axis":
        # box windows: each axis section has constant (d-1)-volume, so the
        # integral over offsets contributes Vol_d(W) per axis
        return cfg.t * W.d * W.volume
    raise ValueError("no analytic mean-surface target for this measure")


def _window_ball_radius(cfg: ExperimentConfig):
    return float(cfg.window["ball"]) if "ball" in cfg.window else None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: ExperimentConfig, threads: int, out_dir: str) -> int:
    t0 = time.time()
    results = run_replicates(cfg, threads)
    rep = Report(cfg)
    d, t = cfg.dimension, cfg.t
    W = cfg.build_window()
    spec = cfg.build_measure()

    totals = [r["total_surface"] for r in results]
    rep.add_estimate(
        "mean_total_surface",
        estimators.aggregate(totals, mean_surface_target(cfg)),
    )
    if d == 1:
        counts = [r["n_facets"] for r in results]
        lam = t * W.volume
        rep.add_estimate("poisson_mean_count", estimators.aggregate(counts, lam))
        rep.add_estimate(
            "poisson_var_count", estimators.aggregate_variance(counts, lam)
        )
    if d >= 2 and spec.kind == "isotropic":
        vol = W.volume
        vints = [r["vertex_count"] / vol for r in results]
        rep.add_estimate(
            "vertex_intensity",
            estimators.aggregate(vints, formulas.intensity_NkI(d, 0, t)),
        )
        if d == 2:
            fints = [r["vertex_count"] / (2.0 * vol) for r in results]
            rep.add_estimate(
                "facet_intensity",
                estimators.aggregate(fints, formulas.intensity_NkI(d, d - 1, t)),
            )
            # mean segment length via the endpoint rule: summed length in W
            # over interior vertices / 2, both exactly unbiased, so the ratio
            # avoids the tail truncation of any erosion-based sample
            rep.add_estimate(
                "mean_facet_size",
                estimators.ratio_aggregate(
                    totals,
                    [r["vertex_count"] / 2.0 for r in results],
                    formulas.mean_vol_Ik(d, d - 1, t),
                ),
            )
        if cfg.erosion > 0 and d != 2:
            sums = [sum(r["facet_sizes"]) for r in results]
            cnts = [len(r["facet_sizes"]) for r in results]
            if sum(cnts) > 0:
                rep.add_estimate(
                    "mean_facet_size",
                    estimators.ratio_aggregate(
                        sums, cnts, formulas.mean_vol_Ik(d, d - 1, t)
                    ),
                )
        R = _window_ball_radius(cfg)
        if R is not None and d in (2, 3):
            rep.add_estimate(
                "var_total_surface",
                estimators.aggregate_variance(
                    totals, formulas.variance_exact(d, t, R)
                ),
            )
        if cfg.r_grid:
            khat = np.array([r["k_hat"] for r in results])
            for gi, r_val in enumerate(cfg.r_grid):
                rep.add_estimate(
                    f"K_hat_r={r_val:g}",
                    estimators.aggregate(
                        khat[:, gi], formulas.K_function(d, t, r_val)
                    ),
                )
    print(f"elapsed {time.time() - t0:.1f}s")
    rep.meta["mean_cells"] = float(np.mean([r["n_cells"] for r in results]))
    rep.write(out_dir, "verify")
    _print_report(rep)
    return 0 if rep.passed() else 1


def cmd_clt(cfg: ExperimentConfig, threads: int, out_dir: str) -> int:
    t0 = time.time()
    results = run_replicates(cfg, threads)
    rep = Report(cfg)
    W = cfg.build_window()
    d = cfg.dimension
    if cfg.kind == "increment":
        incs = [r["increment"] for r in results]
        target = formulas.increment_variance(d, W.volume, cfg.s0)
        rep.add_estimate("increment_variance",
                         estimators.aggregate_variance(incs, target))
        diag = estimators.normality_diagnostics(incs)
        rep.add("increment_ks_pvalue", diag["ks_pvalue"])
        rep.add("increment_skewness", diag["skewness"])
    elif cfg.kind == "clt2d":
        totals = np.array([r["total_surface"] for r in results])
        R = cfg.R
        norm = R**2 * math.log(R)
        var = estimators.aggregate_variance(
            totals / math.sqrt(norm), math.pi * W.volume
        )
        rep.add_estimate("var_over_R2logR", var)
        diag = estimators.normality_diagnostics(totals)
        rep.add("skewness", diag["skewness"])
        rep.add("ks_pvalue", diag["ks_pvalue"])
    elif cfg.kind == "clt3d":
        proxies = [r["xi_proxy"] for r in results]
        g1, zskew, p = estimators.skewness_test(proxies)
        rep.add("xi_skewness", g1)
        rep.add("xi_skewness_z", zskew)
        rep.add("xi_skewness_one_sided_p", p)
    else:
        raise ConfigError("kind", "clt expects clt2d, clt3d or increment")
    print(f"elapsed {time.time() - t0:.1f}s")
    rep.meta["mean_cells"] = float(np.mean([r["n_cells"] for r in results]))
    rep.write(out_dir, cfg.kind)
    _print_report(rep)
    return 0 if rep.passed() else 1


def cmd_compare(cfg: ExperimentConfig, threads: int, out_dir: str) -> int:
    t0 = time.time()
    results = run_replicates(cfg, threads)
    rep = Report(cfg)
    W = cfg.build_window()
    spec = cfg.build_measure()
    t = cfg.t
    counts = [r["n_hyperplanes"] for r in results]
    from .measures import measure_hitting

    rep.add_estimate(
        "pht_mean_count", estimators.aggregate(counts, t * measure_hitting(spec, W))
    )
    totals = [r["total_surface"] for r in results]
    if spec.kind == "isotropic":
        rep.add_estimate("pht_mean_surface", estimators.aggregate(totals, t * W.volume))
    camp_rng = replicate_rng(cfg.seed, cfg.replicates + 1)
    camp, camp_se = compare_mod.pht_campbell_variance_mc(spec, t, W, camp_rng)
    var = estimators.aggregate_variance(totals, camp)
    var.se = math.hypot(var.se, camp_se)
    var.z = (var.estimate - camp) / var.se
    rep.add_estimate("pht_var_surface_vs_campbell", var)
    if cfg.r_grid:
        khat = np.array([r["k_hat"] for r in results])
        for gi, r_val in enumerate(cfg.r_grid):
            rep.add_estimate(
                f"pht_K_hat_r={r_val:g}",
                estimators.aggregate(
                    khat[:, gi], formulas.pht_K_function(cfg.dimension, t, r_val)
                ),
            )
    for model, R, val, prov in compare_mod.comparison_table(
        cfg.dimension, t, cfg.r_grid or [1.0, 2.0, 4.0]
    ):
        rep.add(f"asym_var_{model}_R={R:g}", val, provenance=prov)
    print(f"elapsed {time.time() - t0:.1f}s")
    rep.write(out_dir, "compare")
    _print_report(rep)
    return 0 if rep.passed() else 1


def cmd_simulate(cfg: ExperimentConfig, threads: int, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    results = run_replicates(cfg, threads)
    for i, text in enumerate(results):
        path = os.path.join(out_dir, f"tessellation_{i:04d}.json")
        with open(path, "w") as fh:
            fh.write(text)
    print(f"wrote {len(results)} tessellation file(s) to {out_dir}")
    return 0


def cmd_render(in_path: str, fmt: str, out_dir: str, stroke_by_birth: bool) -> int:
    with open(in_path) as fh:
        Y = Tessellation.from_json_dict(json.load(fh))
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(in_path))[0]
    if fmt == "svg":
        out = render.render_svg(Y, stroke_by_birth=stroke_by_birth)
        path = os.path.join(out_dir, stem + ".svg")
    elif fmt == "ply":
        out = render.render_ply(Y)
        path = os.path.join(out_dir, stem + ".ply")
    else:
        print(f"unsupported format {fmt!r}", file=sys.stderr)
        return 2
    with open(path, "w") as fh:
        fh.write(out)
    print(f"wrote {path}")
    return 0


def cmd_formulas_dump(out_dir: str, t: float) -> int:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "formulas.csv")
    lines = ["formula,parameters,value,provenance"]
    for fid, params, value, tag in formulas.catalog(t):
        lines.append(f"{fid},{params},{_fmt(value)},{tag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _print_report(rep: Report):
    for name, est, se, target, z, prov in rep.rows:
        parts = [f"{name}: {_fmt(est)}"]
        if se is not None:
            parts.append(f"se={_fmt(se)}")
        if target is not None:
            parts.append(f"target={_fmt(target)}")
        if z is not None:
            parts.append(f"z={z:+.2f}")
        print("  ".join(parts))
    print("PASS" if rep.passed() else "FAIL", f"(worst |z| = {rep.worst_z():.2f})")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _default_threads() -> int:
    env = os.environ.get("STITLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stitlab")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--out", default=None)

    for name in ("simulate", "verify", "clt", "compare"):
        common(sub.add_parser(name))
    rp = sub.add_parser("render")
    rp.add_argument("--input", required=True)
    rp.add_argument("--format", choices=("svg", "ply"), required=True)
    rp.add_argument("--out", default=".")
    rp.add_argument("--stroke-by-birth", action="store_true")
    fp = sub.add_parser("formulas")
    fp.add_argument("action", choices=("dump",))
    fp.add_argument("--out", default=".")
    fp.add_argument("--t", type=float, default=1.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "render":
        return cmd_render(args.input, args.format, args.out, args.stroke_by_birth)
    if args.command == "formulas":
        return cmd_formulas_dump(args.out, args.t)
    try:
        cfg = ExperimentConfig.load(args.config)
    except ConfigError as e:
        print(f"invalid config {args.config}: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    threads = args.threads if args.threads is not None else _default_threads()
    out_dir = args.out if args.out is not None else cfg.out_dir
    if args.command == "simulate":
        return cmd_simulate(cfg, threads, out_dir)
    if args.command == "verify":
        if cfg.kind == "iterate-test":
            return cmd_iterate_test(cfg, threads, out_dir)
        return cmd_verify(cfg, threads, out_dir)
    if args.command == "clt":
        return cmd_clt(cfg, threads, out_dir)
    if args.command == "compare":
        return cmd_compare(cfg, threads, out_dir)
    return 2


def cmd_iterate_test(cfg: ExperimentConfig, threads: int, out_dir: str) -> int:
    t0 = time.time()
    results = run_replicates(cfg, threads)
    rep = Report(cfg)
    it = np.array([r["iterated_surface"] for r in results])
    di = np.array([r["direct_surface"] for r in results])
    diff = estimators.aggregate(it - di, 0.0)
    rep.add_estimate("iterate_mean_diff", diff)
    v_it = estimators.aggregate_variance(it)
    v_di = estimators.aggregate_variance(di)
    se = math.hypot(v_it.se, v_di.se)
    rep.add(
        "iterate_var_diff",
        v_it.estimate - v_di.estimate,
        se,
        0.0,
        (v_it.estimate - v_di.estimate) / se,
    )
    print(f"elapsed {time.time() - t0:.1f}s")
    rep.write(out_dir, "iterate-test")
    _print_report(rep)
    return 0 if rep.passed() else 1


if __name__ == "__main__":
    raise SystemExit(main())
