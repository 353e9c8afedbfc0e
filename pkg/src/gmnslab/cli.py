"""Command-line surface tying the modules into reproducible experiments.

Commands: check, simulate, contract, pullback, nse-limit, measure.  Every
run writes the exact resolved config plus JSON summary and CSV series
(17 significant digits) into the output directory, then registers artifact
hashes.  Exit codes: 0 success, 2 config error, 3 assertion failure in
strict mode, 4 instability, 5 insufficient horizon, 6 I/O failure,
7 registry divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import experiments as ex
from . import integrate as it
from . import noise as nz
from . import spectral as sp
from .config import ConfigError, RunConfig, default_config, parse_config
from .cutoff import write_fuzz_report
from .registry import DivergenceError, config_hash, register_run
from .seeding import labeled_generator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERTION = 3
EXIT_INSTABILITY = 4
EXIT_HORIZON = 5
EXIT_IO = 6
EXIT_DIVERGENCE = 7


def _fmt(x) -> str:
    return f"{x:.17g}"


def _write_csv(path: str, header: list[str], columns: list) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(c) if isinstance(c, float) else str(c) for c in row) + "\n")


def _np_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_np_default)
        fh.write("\n")


def _initial_field(basis, spec: dict, seed: int, label: str) -> sp.SpectralField:
    kind = spec.get("kind", "random")
    if kind == "zero":
        return sp.zero_field(basis)
    if kind == "random":
        rng = labeled_generator(seed, spec.get("label", label))
        return sp.random_field(
            basis, rng, decay=spec.get("decay", 2.0), norm=spec.get("norm", 1.0)
        )
    raise ConfigError(f"unknown initial-condition kind {kind!r} for '{label}'")


# ---- experiment runners -----------------------------------------------------


def _run_check(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    o = cfg.options
    kmax = cfg.params.kmax
    reports = [
        ex.check_cutoff_lemma(
            kmax=kmax, n_pairs=o.get("cutoff_pairs", 10_000), seed=cfg.seed,
            level=cfg.params.level if math.isfinite(cfg.params.level) else 1.0,
        ),
        ex.check_trilinear(
            kmax=kmax, n_triples=o.get("trilinear_triples", 1000), seed=cfg.seed + 1
        ),
        ex.check_monotonicity(
            kmax=kmax, n_triples=o.get("monotonicity_triples", 1000), seed=cfg.seed + 2
        ),
        ex.check_ou_stationarity(
            seed=cfg.seed + 3, n_samples=o.get("ou_samples", 100_000),
            nu=cfg.params.nu, chi=o.get("ou_chi", 1.0),
        ),
        ex.check_shift_covariance(seed=cfg.seed + 4, n_pairs=o.get("shift_pairs", 100)),
    ]
    artifacts = []
    for rep in reports:
        if rep.rows:
            path = os.path.join(out, f"fuzz_{rep.name}.csv")
            write_fuzz_report(path, rep.rows)
            artifacts.append(path)
    passed = all(r.passed for r in reports)
    summary = {"checks": [r.summary() for r in reports], "passed": passed}
    return summary, artifacts, passed


def _run_simulate(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    params = cfg.params
    basis = params.basis()
    x = _initial_field(basis, cfg.options.get("initial", {}), cfg.seed, "ic")
    path = nz.make_path(cfg.seed, params.dt_path, 0.0, params.t_final,
                        params.noise, basis)
    cursor = nz.OUCursor(path, params.chi, params.nu)
    v0 = sp.SpectralField(basis, x.coeffs - cursor.advance_to(0.0))
    traj = it.solve_transformed(v0, path, params,
                                record_every=cfg.options.get("record_every", 1))
    csv_path = os.path.join(out, "trajectory.csv")
    with open(csv_path, "w") as fh:
        traj.ledger.to_csv(fh)
    manifest_path = os.path.join(out, "path_manifest.json")
    _write_json(manifest_path, path.manifest())
    ckpt_path = os.path.join(out, "checkpoint.json")
    with open(ckpt_path, "w") as fh:
        fh.write(it.checkpoint_dump(traj.final_state(), path, params))
        fh.write("\n")
    summary = {
        "name": "simulate",
        "final_H_norm_v": math.sqrt(traj.ledger.v_H2[-1]),
        "final_H_norm_u": math.sqrt(traj.ledger.u_H2[-1]),
        "max_energy_residual": traj.ledger.max_residual(),
        "apriori_margin": it.apriori_margin(params, traj.ledger),
        "pullback_margin": it.pullback_inequality_margin(params, traj.ledger),
        "passed": True,
    }
    return summary, [csv_path, manifest_path, ckpt_path], True


def _run_contract(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    params = cfg.params
    basis = params.basis()
    x1 = _initial_field(basis, cfg.options.get("x1", {"norm": 1.0}), cfg.seed, "x1")
    x2 = _initial_field(basis, cfg.options.get("x2", {"norm": 0.5}), cfg.seed, "x2")
    rep = ex.contraction_experiment(
        params, x1, x2, ensemble=cfg.ensemble, seed=cfg.seed,
        record_every=cfg.options.get("record_every", 4), threads=cfg.threads,
        enforce_threshold=cfg.strict,
    )
    csv_path = os.path.join(out, "contraction.csv")
    _write_csv(
        csv_path,
        ["t", "mean_sq_diff", "stderr", "envelope"],
        [rep.times.tolist(), rep.mean_sq.tolist(), rep.stderr.tolist(),
         rep.envelope.tolist()],
    )
    return rep.summary(), [csv_path], rep.passed


def _run_pullback(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    params = cfg.params
    basis = params.basis()
    rate = params.nu * params.lambda_p
    default_times = [m / rate for m in (1, 2, 4, 8, 16, 32)]
    times = cfg.options.get("pullback_times", default_times)
    fam_spec = cfg.options.get(
        "families", {"small": {"norm": 1.0}, "large": {"norm": 100.0}}
    )
    family = {
        name: _initial_field(basis, spec, cfg.seed, f"pullback-{name}")
        for name, spec in fam_spec.items()
    }
    rep = ex.pullback_absorption(
        params, times, family, seed=cfg.seed,
        family_tol=cfg.options.get("family_tol", 1e-6),
    )
    csv_path = os.path.join(out, "pullback.csv")
    names = list(rep.radii)
    _write_csv(
        csv_path,
        ["pullback_time"] + [f"radius_{n}" for n in names]
        + [f"ic_term_{n}" for n in names],
        [list(map(float, rep.pullback_times))]
        + [list(map(float, rep.radii[n])) for n in names]
        + [list(map(float, rep.ic_terms[n])) for n in names],
    )
    return rep.summary(), [csv_path], rep.passed


def _run_nse_limit(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    params = replace(cfg.params, chi=0.0,
                     noise=replace(cfg.params.noise, amplitude=0.0))
    basis = params.basis()
    x = _initial_field(basis, cfg.options.get("initial", {"norm": 2.0}),
                       cfg.seed, "nse-ic")
    rep = ex.nse_limit_experiment(
        x, params, multipliers=tuple(cfg.options.get(
            "multipliers", (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)))
    )
    csv_path = os.path.join(out, "nse_limit.csv")
    _write_csv(
        csv_path,
        ["level", "i_n", "i_n_bound", "int_one_minus_f", "l2_err"],
        [rep.levels, rep.i_n, rep.i_n_bound, rep.int_one_minus_f, rep.l2_err],
    )
    return rep.summary(), [csv_path], rep.passed


def _run_measure(cfg: RunConfig, out: str) -> tuple[dict, list[str], bool]:
    params = cfg.params
    basis = params.basis()
    rate = params.nu * params.lambda_p
    burn_in = cfg.options.get("burn_in", 5.0 / rate)
    horizon = cfg.options.get("horizon", 200.0 / rate)
    ic_spec = cfg.options.get(
        "initial_set", {"zero": {"kind": "zero"}, "big": {"norm": 10.0}}
    )
    ics = {
        name: _initial_field(basis, spec, cfg.seed, f"measure-{name}")
        for name, spec in ic_spec.items()
    }
    rep = ex.invariant_measure_sampler(
        params, ics, burn_in=burn_in, horizon=horizon, seed=cfg.seed,
        enforce_threshold=cfg.strict,
    )
    csv_path = os.path.join(out, "measure.csv")
    names = list(ics)
    rows_obs, rows_ic, rows_avg, rows_se = [], [], [], []
    for obs in rep.observables:
        for name in names:
            rows_obs.append(obs)
            rows_ic.append(name)
            rows_avg.append(rep.averages[obs][name])
            rows_se.append(rep.stderrs[obs][name])
    _write_csv(csv_path, ["observable", "initial", "average", "stderr"],
               [rows_obs, rows_ic, rows_avg, rows_se])
    return rep.summary(), [csv_path], rep.passed


_RUNNERS = {
    "check": _run_check,
    "simulate": _run_simulate,
    "contract": _run_contract,
    "pullback": _run_pullback,
    "nse-limit": _run_nse_limit,
    "measure": _run_measure,
}


def run_experiment(cfg: RunConfig, out_dir: str | None = None) -> int:
    """Execute one configured experiment; returns the process exit code."""
    out = out_dir or cfg.out or f"runs/{cfg.experiment}"
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_IO

    cfg_path = os.path.join(out, "config.json")
    try:
        _write_json(cfg_path, cfg.to_dict())
        summary, artifacts, passed = _RUNNERS[cfg.experiment](cfg, out)
        summary["assertion_mode"] = cfg.assertion_mode
        summary_path = os.path.join(out, "summary.json")
        _write_json(summary_path, summary)
        artifacts = [cfg_path, summary_path] + artifacts
    except it.InstabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except ex.HorizonError as exc:
        print(f"insufficient horizon: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        register_run(out, config_hash(cfg.canonical_json()), cfg.experiment,
                     artifacts, passed)
    except DivergenceError as exc:
        print(f"registry divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE

    status = "pass" if passed else "FAIL"
    print(f"{cfg.experiment}: {status} (artifacts in {out})")
    if not passed:
        _print_failures(summary)
    if cfg.strict and not passed:
        return EXIT_ASSERTION
    return EXIT_OK


def _print_failures(summary: dict) -> None:
    checks = summary.get("checks", [summary])
    for c in checks:
        if not c.get("passed", True):
            print(f"  failed: {c.get('name', '?')}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gmnslab",
        description="Spectral Galerkin experiments for cutoff-modified "
        "Navier-Stokes dynamics with OU forcing",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the root seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="ensemble worker threads")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--strict", action="store_true",
                          help="assertions enforced (default)")
        mode.add_argument("--exploratory", action="store_true",
                          help="assertions reported, not enforced")
    args = parser.parse_args(argv)

    try:
        if args.config:
            cfg = parse_config(args.config)
            if cfg.experiment != args.command:
                raise ConfigError(
                    f"config file is for experiment {cfg.experiment!r}, "
                    f"but the command is {args.command!r}"
                )
        else:
            cfg = default_config(args.command)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        if args.strict:
            cfg.assertion_mode = "strict"
        if args.exploratory:
            cfg.assertion_mode = "exploratory"
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    return run_experiment(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
