"""Experiment driver: argument/config parsing, task dispatch, and emission.

Subcommands: count, expsum-decay, vdc, lemma2, prop2, majorant,
thresholds, verify.  Every experiment decomposes into independent tasks
executed by a stateless worker pool; results are gathered and sorted by
task index before anything is written, so the output is identical for
any worker count.  Randomness always flows from the single master seed
through the published per-task derivation.

Exit codes: 0 success, 2 invalid parameters, 3 capacity/budget
exceeded, 4 verify-suite failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify as _verify
from .errors import AdmissibilityError, CapacityError
from .expsum import error_term, vdc_ratio_sweep, weighted_inverse_vs_dirichlet
from .majorant import (
    DEFAULT_BUDGET,
    MajorantProblem,
    estimate_constant,
    p_threshold,
    uniformity_sweep,
)
from .rvfunc import InverseFn, PsiFn, RegVaryFn, SlowlyVaryingSpec
from .sparseset import SetSpec, build_frac_set, build_set
from .sweeps import (
    StopWatch,
    SweepResult,
    derive_seed,
    fit_loglog_slope,
    write_csv,
    write_jsonl,
    xi_grid,
)
from .trigpoly import (
    fourier_sup_of_difference,
    measure_mu,
    measure_nu,
    restriction_ratios,
)

EXPERIMENTS = ("count", "expsum-decay", "vdc", "lemma2", "prop2",
               "majorant", "thresholds", "verify")


@dataclass
class ExperimentConfig:
    experiment: str
    h1: dict = field(default_factory=dict)
    h2: dict = field(default_factory=dict)
    psi_mode: str = "difference"
    kind: str = "frac_plus"
    N_list: list = field(default_factory=lambda: [10**4, 10**5, 10**6])
    levels: str = "10:18"
    p: float = 2.5
    xi_rule: str = "golden:4"
    m_max: int = 16
    trials: int = 16
    p_offset: float = 0.5
    at_endpoint: bool = False
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    tol: float = 1e-8
    grid_cap: int | None = None
    method: str = "both"
    workers: int = 1
    fmt: str = "both"
    out_dir: str = "."
    set_out: str | None = None
    coeffs_out: str | None = None
    level: str = "quick"

    def echo(self) -> dict:
        d = {}
        for key, val in vars(self).items():
            if key in ("h1", "h2"):
                d[key] = ", ".join(f"{k}={v}" for k, v in sorted(val.items()))
            elif isinstance(val, list):
                d[key] = ",".join(str(v) for v in val)
            else:
                d[key] = val
        return d


def _family(kv: dict, default_c: float = 1.0) -> RegVaryFn:
    ell = SlowlyVaryingSpec(
        kv.get("family", "log_power"),
        B=float(kv.get("B", 1.0)),
        C=float(kv.get("C", 0.5)),
        m=int(kv.get("m", 1)),
    )
    x0 = float(kv["x0"]) if "x0" in kv else None
    return RegVaryFn(float(kv.get("c", default_c)), ell, x0=x0)


def _levels_list(spec: str) -> list:
    lo, _, hi = spec.partition(":")
    return [2**j for j in range(int(lo), int(hi) + 1)]


def _run_tasks(tasks, workers: int):
    """Run index-tagged tasks, deterministically ordered output."""
    if workers <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


# ------------------------------------------------------------ experiments


def _exp_count(cfg: ExperimentConfig):
    spec0 = SetSpec(cfg.kind, _family(cfg.h1), _family(cfg.h2), 1,
                    psi_mode=cfg.psi_mode)
    phi2 = InverseFn(spec0.h2)

    def make_task(i, N):
        def task():
            with StopWatch() as sw:
                sub = SetSpec(cfg.kind, spec0.h1, spec0.h2, int(N),
                              psi_mode=cfg.psi_mode)
                built = build_set(sub)
            if cfg.set_out and N == max(cfg.N_list):
                built.save(cfg.set_out)
            ref = phi2.invert(float(N))
            return SweepResult(
                experiment="count", quantity="cardinality_ratio",
                value=float(len(built)), reference=ref,
                ratio=len(built) / ref, wall_ms=sw.ms, seed=cfg.seed,
                borderline_count=built.borderline_count,
                params={"N": int(N), "kind": cfg.kind,
                        "h1": spec0.h1.to_kv(), "h2": spec0.h2.to_kv(),
                        "psi_mode": cfg.psi_mode},
            )
        return task

    rows = _run_tasks([make_task(i, N) for i, N in enumerate(cfg.N_list)],
                      cfg.workers)
    slope = fit_loglog_slope(cfg.N_list,
                             np.abs(np.array([r.ratio for r in rows]) - 1.0))
    for r in rows:
        r.exponent = slope
    return rows


def _exp_expsum_decay(cfg: ExperimentConfig):
    h1, h2 = _family(cfg.h1), _family(cfg.h2)
    xis = xi_grid(cfg.xi_rule, seed=cfg.seed)
    phi2 = InverseFn(h2)

    def make_task(i, N):
        def task():
            spec = SetSpec(cfg.kind, h1, h2, int(N), psi_mode=cfg.psi_mode)
            bset = build_frac_set(spec)
            ref = phi2.invert(float(N))
            out = []
            for xi in xis:
                with StopWatch() as sw:
                    err = error_term(bset, float(xi))
                out.append(SweepResult(
                    experiment="expsum-decay", quantity="error_over_phi2",
                    value=err, reference=ref, ratio=err / ref, wall_ms=sw.ms,
                    seed=cfg.seed, borderline_count=bset.borderline_count,
                    params={"N": int(N), "xi": float(xi),
                            "h1": h1.to_kv(), "h2": h2.to_kv()},
                ))
            return out
        return task

    groups = _run_tasks([make_task(i, N) for i, N in enumerate(cfg.N_list)],
                        cfg.workers)
    rows = [r for g in groups for r in g]
    for xi in xis:
        sel = [r for r in rows if r.params["xi"] == float(xi)]
        slope = fit_loglog_slope([r.params["N"] for r in sel],
                                 [r.ratio for r in sel])
        for r in sel:
            r.exponent = slope
    return rows


def _exp_vdc(cfg: ExperimentConfig):
    h1, h2 = _family(cfg.h1), _family(cfg.h2)
    phi1 = InverseFn(h1)
    psi = PsiFn(InverseFn(h2), mode=cfg.psi_mode)
    xis = xi_grid(cfg.xi_rule, seed=cfg.seed)
    levels = _levels_list(cfg.levels)

    def make_task(i, xi):
        def task():
            return vdc_ratio_sweep(phi1, psi, cfg.m_max, [float(xi)], levels)
        return task

    groups = _run_tasks([make_task(i, x) for i, x in enumerate(xis)],
                        cfg.workers)
    rows = [r for g in groups for r in g]
    per_level = {N: max(r.ratio for r in rows if r.params["N"] == N)
                 for N in levels}
    slope = fit_loglog_slope(levels, [per_level[N] for N in levels])
    for r in rows:
        r.exponent = slope
        r.seed = cfg.seed
    return rows


def _exp_lemma2(cfg: ExperimentConfig):
    h1, h2 = _family(cfg.h1), _family(cfg.h2)
    xis = xi_grid(cfg.xi_rule, seed=cfg.seed)

    def make_task(i, N):
        def task():
            spec = SetSpec(cfg.kind, h1, h2, int(N), psi_mode=cfg.psi_mode)
            bset = build_frac_set(spec)
            out = []
            for xi in xis:
                with StopWatch() as sw:
                    dev = weighted_inverse_vs_dirichlet(bset, float(xi))
                out.append(SweepResult(
                    experiment="lemma2", quantity="inverse_weight_deviation",
                    value=dev, reference=float(N), ratio=dev / N, wall_ms=sw.ms,
                    seed=cfg.seed, borderline_count=bset.borderline_count,
                    params={"N": int(N), "xi": float(xi)},
                ))
            return out
        return task

    groups = _run_tasks([make_task(i, N) for i, N in enumerate(cfg.N_list)],
                        cfg.workers)
    rows = [r for g in groups for r in g]
    for xi in xis:
        sel = [r for r in rows if r.params["xi"] == float(xi)]
        slope = fit_loglog_slope([r.params["N"] for r in sel],
                                 [r.value for r in sel])
        for r in sel:
            r.exponent = slope
    return rows


def _exp_prop2(cfg: ExperimentConfig):
    h1, h2 = _family(cfg.h1), _family(cfg.h2, default_c=1.1)
    base_p = p_threshold(h1.c, h2.c)
    p = base_p if cfg.at_endpoint else base_p + cfg.p_offset
    levels = _levels_list(cfg.levels)

    def make_task(i, N):
        def task():
            spec = SetSpec(cfg.kind, h1, h2, int(N), psi_mode=cfg.psi_mode)
            bset = build_frac_set(spec)
            with StopWatch() as sw:
                ratios = restriction_ratios(bset, p, trials=cfg.trials,
                                            seed=cfg.seed, tol=cfg.tol)
                sup, grid = fourier_sup_of_difference(
                    measure_mu(bset), measure_nu(int(N)))
            return [
                SweepResult(
                    experiment="prop2", quantity="restriction_ratio_max",
                    value=float(max(ratios)), wall_ms=sw.ms,
                    seed=cfg.seed, borderline_count=bset.borderline_count,
                    params={"N": int(N), "p": p, "trials": cfg.trials,
                            "set_size": len(bset)},
                ),
                SweepResult(
                    experiment="prop2", quantity="mu_nu_fourier_sup",
                    value=sup, reference=None, ratio=None, wall_ms=sw.ms,
                    seed=cfg.seed,
                    params={"N": int(N), "p": p, "grid": grid},
                ),
            ]
        return task

    groups = _run_tasks([make_task(i, N) for i, N in enumerate(levels)],
                        cfg.workers)
    rows = [r for g in groups for r in g]
    for quantity in ("restriction_ratio_max", "mu_nu_fourier_sup"):
        sel = [r for r in rows if r.quantity == quantity]
        slope = fit_loglog_slope([r.params["N"] for r in sel],
                                 [r.value for r in sel])
        for r in sel:
            r.exponent = slope
    return rows


def _exp_majorant(cfg: ExperimentConfig):
    h1, h2 = _family(cfg.h1), _family(cfg.h2)
    if h2.c > 1.0:
        floor = p_threshold(h1.c, h2.c)
        if cfg.p < floor and not cfg.at_endpoint:
            raise AdmissibilityError(
                f"p = {cfg.p} below threshold {floor} for (c1, c2) = "
                f"({h1.c}, {h2.c})")

    def build(N):
        return build_frac_set(SetSpec(cfg.kind, h1, h2, N,
                                      psi_mode=cfg.psi_mode))

    rows = uniformity_sweep(build, cfg.p, cfg.N_list, budget=cfg.budget,
                            seed=cfg.seed, method=cfg.method, tol=max(cfg.tol, 1e-9))
    if cfg.coeffs_out:
        bset = build(int(max(cfg.N_list)))
        prob = MajorantProblem(bset.members, int(max(cfg.N_list)), cfg.p,
                               budget=cfg.budget,
                               seed=derive_seed(cfg.seed, len(cfg.N_list) - 1))
        est = estimate_constant(prob, method=cfg.method)
        with open(cfg.coeffs_out, "w") as fh:
            fh.write("# n, re(a_n), im(a_n)\n")
            for n, a in zip(bset.members, est.argmax_coeffs):
                fh.write(f"{n},{float(a.real)!r},{float(a.imag)!r}\n")
    return rows


def _exp_thresholds(cfg: ExperimentConfig):
    c1_grid = np.linspace(1.0, 1.9, 10)
    c2_grid = np.concatenate([[1.0], np.linspace(1.02, 1.19, 9)])
    rows = []
    for c1 in c1_grid:
        for c2 in c2_grid:
            rows.append(SweepResult(
                experiment="thresholds", quantity="p_threshold",
                value=p_threshold(float(c1), float(c2)),
                params={"c1": round(float(c1), 6), "c2": round(float(c2), 6)},
            ))
    return rows


def _exp_verify(cfg: ExperimentConfig):
    report = _verify.suite(cfg.level)
    for line in report.lines():
        print(line)
    rows = [SweepResult(
        experiment="verify", quantity=r.name,
        value=1.0 if r.passed else 0.0,
        params={"level": r.level, "measured": r.measured.replace(",", ";")},
    ) for r in report.results]
    return rows, report.all_passed


_RUNNERS = {
    "count": _exp_count,
    "expsum-decay": _exp_expsum_decay,
    "vdc": _exp_vdc,
    "lemma2": _exp_lemma2,
    "prop2": _exp_prop2,
    "majorant": _exp_majorant,
    "thresholds": _exp_thresholds,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment and write its artifacts."""
    import os

    if cfg.grid_cap is not None:
        os.environ["MAJORANTLAB_GRID_CAP"] = str(int(cfg.grid_cap))
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = True
    try:
        if cfg.experiment == "verify":
            rows, ok = _exp_verify(cfg)
        else:
            rows = _RUNNERS[cfg.experiment](cfg)
    except (AdmissibilityError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity/budget exceeded: {exc}", file=sys.stderr)
        return 3
    echo = cfg.echo()
    stem = out_dir / cfg.experiment
    if cfg.fmt in ("csv", "both"):
        write_csv(stem.with_suffix(".csv"), rows, config_echo=echo)
    if cfg.fmt in ("jsonl", "both"):
        write_jsonl(stem.with_suffix(".jsonl"), rows, config_echo=echo)
    return 0 if ok else 4


# ---------------------------------------------------------------- parsing


def _add_family_flags(ap: argparse.ArgumentParser):
    for i in ("1", "2"):
        ap.add_argument(f"--c{i}", type=float, default=None)
        ap.add_argument(f"--ell{i}", type=str, default=None,
                        choices=("log_power", "exp_log_power",
                                 "iterated_log", "constant_one"))
        ap.add_argument(f"--B{i}", type=float, default=None)
        ap.add_argument(f"--C{i}", type=float, default=None)
        ap.add_argument(f"--m{i}", type=int, default=None)
    ap.add_argument("--family", type=str, default=None,
                    help="shorthand: slowly varying family for both h1 and h2")
    ap.add_argument("--psi-mode", type=str, default=None,
                    choices=("difference", "derivative"))


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subparser from clobbering a flag that was already
    # given before the subcommand name
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=S)
    common.add_argument("--out", type=str, default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--workers", type=int, default=S)
    common.add_argument("--format", dest="fmt", type=str, default=S,
                        choices=("csv", "jsonl", "both"))
    common.add_argument("--tol", type=float, default=S)
    common.add_argument("--grid-cap", type=int, default=S)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    ap = argparse.ArgumentParser(
        prog="majorantlab",
        parents=[common],
        description="Numerical experiments on sparse-set exponential sums "
                    "and majorant constants.")
    sub = ap.add_subparsers(dest="experiment", required=True)

    sp = {}
    for name in EXPERIMENTS:
        sp[name] = sub.add_parser(name, parents=[common])
        if name != "verify":
            _add_family_flags(sp[name])

    for name in ("count", "expsum-decay", "lemma2", "majorant"):
        sp[name].add_argument("--N-list", type=str, default=None)
    for name in ("count", "expsum-decay", "lemma2"):
        sp[name].add_argument("--kind", type=str, default=None,
                              choices=("frac_plus", "frac_minus", "floor_image"))
    sp["count"].add_argument("--set-out", type=str, default=None)
    for name in ("expsum-decay", "vdc", "lemma2"):
        sp[name].add_argument("--xi-rule", type=str, default=None)
    sp["vdc"].add_argument("--m-max", type=int, default=None)
    for name in ("vdc", "prop2"):
        sp[name].add_argument("--levels", type=str, default=None,
                              help="dyadic exponent range lo:hi")
    sp["prop2"].add_argument("--trials", type=int, default=None)
    sp["prop2"].add_argument("--p-offset", type=float, default=None)
    sp["prop2"].add_argument("--at-endpoint", action="store_true", default=None)
    sp["majorant"].add_argument("--p", type=float, default=None)
    sp["majorant"].add_argument("--N", type=int, default=None)
    sp["majorant"].add_argument("--budget", type=int, default=None)
    sp["majorant"].add_argument("--method", type=str, default=None,
                                choices=("signs", "phase", "both"))
    sp["majorant"].add_argument("--coeffs-out", type=str, default=None)
    sp["majorant"].add_argument("--at-endpoint", action="store_true", default=None)
    sp["verify"].add_argument("--level", type=str, default=None,
                              choices=("quick", "full"))
    return ap


def _config_from_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    out: dict = {"h1": {}, "h2": {}}
    for section in cp.sections():
        if section in ("h1", "h2"):
            out[section].update(dict(cp.items(section)))
        else:
            out.update(dict(cp.items(section)))
    return out


def _parse_n_list(text: str) -> list:
    return [int(float(v)) for v in text.split(",") if v.strip()]


def resolve_config(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    config_path = getattr(args, "config", None)
    file_cfg = (_config_from_file(config_path) if config_path
                else {"h1": {}, "h2": {}})
    cfg = ExperimentConfig(experiment=args.experiment)

    cfg.h1.update(file_cfg.get("h1", {}))
    cfg.h2.update(file_cfg.get("h2", {}))
    for key in ("psi_mode", "kind", "xi_rule", "levels", "method", "fmt",
                "set_out", "coeffs_out", "level"):
        if key in file_cfg:
            setattr(cfg, key, file_cfg[key])
    for key in ("p", "p_offset", "tol"):
        if key in file_cfg:
            setattr(cfg, key, float(file_cfg[key]))
    for key in ("m_max", "trials", "budget", "seed", "workers", "grid_cap"):
        if key in file_cfg:
            setattr(cfg, key, int(file_cfg[key]))
    if "n_list" in file_cfg:
        cfg.N_list = _parse_n_list(file_cfg["n_list"])
    if "out" in file_cfg:
        cfg.out_dir = file_cfg["out"]

    a = vars(args)
    for i in ("1", "2"):
        tgt = cfg.h1 if i == "1" else cfg.h2
        if a.get("family") is not None:
            tgt.setdefault("family", a["family"])
        for flag, key in ((f"c{i}", "c"), (f"ell{i}", "family"),
                          (f"B{i}", "B"), (f"C{i}", "C"), (f"m{i}", "m")):
            if a.get(flag) is not None:
                tgt[key] = a[flag]
    direct = {"out": "out_dir", "seed": "seed", "workers": "workers",
              "fmt": "fmt", "tol": "tol", "grid_cap": "grid_cap",
              "psi_mode": "psi_mode", "kind": "kind", "xi_rule": "xi_rule",
              "m_max": "m_max", "levels": "levels", "trials": "trials",
              "p_offset": "p_offset", "at_endpoint": "at_endpoint",
              "p": "p", "budget": "budget", "method": "method",
              "set_out": "set_out", "coeffs_out": "coeffs_out",
              "level": "level"}
    for flag, key in direct.items():
        if a.get(flag) is not None:
            setattr(cfg, key, a[flag])
    if a.get("N_list") is not None:
        cfg.N_list = _parse_n_list(a["N_list"])
    if a.get("N") is not None:
        cfg.N_list = [a["N"]]
    return cfg


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
