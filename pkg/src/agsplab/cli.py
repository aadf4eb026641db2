"""Experiment runner.

Subcommands wrap every module behind a JSON config file plus flag
overrides, persist deterministic records under an output directory, and
signal through the exit code:

    0   every check passed
    2   config or validation error
    3   a certified inequality failed numerically (the interesting outcome)

Layout per run: ``<out>/<run-id>/manifest.json`` (timestamps and versions
live only here), ``records/*.json`` (byte-stable given config and seed),
``tables/*.csv``.  The default output root is ``./outputs`` or the
``AGSPLAB_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from itertools import product as iter_product
from pathlib import Path

import numpy as np

from . import __version__, agsp, chebyshev, combinatorics, detectability, mps, params
from . import hamiltonian as ham
from .io import config_hash, derive_rng, write_csv, write_json
from .schmidt import Cut, schmidt_decompose

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUND = 3

SWEEP_LIMIT_DEFAULT = 10000


class ConfigError(ValueError):
    pass


def _load_schema():
    with resources.files("agsplab.schema").joinpath("config.schema.json").open() as fh:
        return json.load(fh)


def load_config(path: str | None, overrides: dict) -> dict:
    config = {"schema": 1}
    if path is not None:
        try:
            config = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    config.setdefault("schema", 1)
    import jsonschema

    try:
        jsonschema.validate(config, _load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected: {exc.message}") from exc
    return config


# ---------------------------------------------------------------------------
# shared pieces


def _model_and_spectrum(config, cap):
    if "model" not in config:
        raise ConfigError("this subcommand needs a 'model' section")
    spec = ham.ModelSpec.from_dict(config["model"])
    chain = ham.build_model(spec, cap=cap)
    spectral = ham.spectral_gap(chain, seed=spec.seed)
    return spec, chain, spectral


def _cut(config, chain) -> Cut:
    position = config.get("cut", (chain.n + 1) // 2)
    return Cut(position, chain.n, chain.d)


def _product_states(rng, count, n, d):
    states = []
    for _ in range(count):
        state = np.ones(1, dtype=np.complex128)
        for _ in range(n):
            site = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            site /= np.linalg.norm(site)
            state = np.kron(state, site)
        states.append(state)
    return states


def _certificate(config, chain, spectral, rng):
    cut = _cut(config, chain)
    window = agsp.make_window(chain, cut, config.get("window_m", 2))
    probes = _product_states(rng, config.get("probes", 8), chain.n, chain.d)
    # the best product state at the cut joins the probe set: amplification
    # and the tail bounds start from it
    decomp = schmidt_decompose(spectral.ground_state, cut)
    best_pair = np.kron(decomp.left_vectors[:, 0], decomp.right_vectors[:, 0])
    probes.append(best_pair)
    k, cert = agsp.build_k(
        chain, window, q=config.get("q", 2), l=config.get("ell"),
        spectral=spectral, probes=probes,
    )
    return k, cert, cut, decomp


# ---------------------------------------------------------------------------
# subcommand handlers: config, rng, cap -> (record, tables, bound_ok)


def cmd_model(config, rng, cap):
    if "model" not in config:
        raise ConfigError("'model' section required")
    spec = ham.ModelSpec.from_dict(config["model"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        chain = ham.build_model(spec, cap=cap)
    report = ham.validate_frustration_free(chain)
    record = {"validation": report.to_record()}
    ok = report.terms_ok and report.frustration_free
    return record, {}, ok


def cmd_spectrum(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    return {"spectrum": spectral.to_record()}, {}, True


def cmd_dl_check(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    layers = detectability.layer_projectors(chain)
    reports = {}
    for ordering in detectability.ORDERINGS:
        a = detectability.dl_operator(chain, ordering, layers)
        reports[ordering] = detectability.shrink_factor(
            a, spectral, ordering=ordering).to_record()
    ok = all(r["within_bound"] for r in reports.values())
    orderings_close = abs(
        reports["odd_even"]["measured_delta"] - reports["even_odd"]["measured_delta"]
    ) <= 1e-9
    record = {"shrink": reports, "orderings_agree": orderings_close}
    rows = [reports[o] for o in detectability.ORDERINGS]
    return record, {"dl_shrink": (rows, None)}, ok and orderings_close


def cmd_cheb_check(config, rng, cap):
    m_values = config.get("m_list") or [config.get("m", 36)]
    rows = [chebyshev.verify_window_bounds(m).to_row() for m in m_values]
    # outside-interval growth on an (n, delta) grid
    grid_n = np.arange(1, 51)
    grid_delta = np.linspace(0.02, 1.0, 50)
    growth_ok = True
    for n in grid_n:
        values = np.abs(chebyshev.chebyshev_t(int(n), -1.0 - grid_delta))
        if not np.all(values >= 1.0 + n * n * grid_delta - 1e-9):
            growth_ok = False
    ok = all(r["pass"] for r in rows) and growth_ok
    record = {"window_bounds": rows, "outside_growth_ok": growth_ok}
    return record, {"cheb_window": (rows, None)}, ok


def cmd_agsp_certify(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    k, cert, cut, _ = _certificate(config, chain, spectral, rng)
    layers = detectability.layer_projectors(chain)
    a = detectability.dl_operator(chain, "odd_even", layers)
    a_shrink = detectability.shrink_factor(a, spectral)
    a_hat = agsp.hat_a(chain, agsp.make_window(chain, cut, cert.m), cert.q, layers)
    hat_shrink = detectability.shrink_factor(a_hat, spectral)
    q = cert.q
    composition_ok = (
        hat_shrink.measured_delta
        <= a_shrink.measured_delta + 9.0 ** (-q) + 1e-9
    )
    checks = {
        "ground_residual_ok": cert.ground_residual <= 1e-8,
        "measured_below_theory": cert.measured_delta <= cert.theory_delta + 1e-9,
        "hat_composition_ok": composition_ok,
        "dl_within_bound": a_shrink.within_bound,
    }
    record = {
        "certificate": cert.to_record(),
        "dl_shrink": a_shrink.to_record(),
        "hat_shrink": hat_shrink.to_record(),
        "checks": checks,
    }
    return record, {}, all(checks.values())


def cmd_amplify(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    k, cert, cut, _ = _certificate(config, chain, spectral, rng)
    n_states = config.get("initial_states", 5)
    max_iters = config.get("max_iters", 30)
    traces = []
    rows = []
    ok = True
    for idx, initial in enumerate(_product_states(rng, n_states, chain.n, chain.d)):
        if abs(complex(np.vdot(spectral.ground_state, initial))) < 1e-12:
            continue
        trace = agsp.amplify(spectral, k, cert, initial, max_iters=max_iters)
        traces.append({
            "initial_index": idx,
            "termination": trace.termination,
            "target": trace.target,
            "overlaps": trace.overlaps,
        })
        for row in trace.to_rows():
            rows.append({"trace": idx, **row})
        if trace.termination != "reached_target":
            ok = False
    record = {"certificate": cert.to_record(), "traces": traces}
    return record, {"amplify_trace": (rows, None)}, ok


def cmd_entropy_bound(config, rng, cap):
    if config.get("mu") is not None:
        report = agsp.entropy_bound_report(
            config["mu"], config["d_factor"], config["delta"])
        return {"entropy_bound": report.to_record()}, {}, True
    _, chain, spectral = _model_and_spectrum(config, cap)
    k, cert, cut, decomp = _certificate(config, chain, spectral, rng)
    mu = float(decomp.values[0])
    report = agsp.entropy_bound_report(
        mu, max(cert.certified_d, 2.0), cert.certified_delta)
    measured = decomp.entropy
    ok = report.bound >= measured - 1e-12
    record = {
        "entropy_bound": report.to_record(),
        "measured_entropy": measured,
        "certificate": cert.to_record(),
    }
    rows = [{"label": chain.label, "cut": cut.position,
             "measured_entropy": measured, "bound": report.bound,
             "pass": ok}]
    return record, {"entropy_vs_bound": (rows, None)}, ok


def cmd_tail_check(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    k, cert, cut, decomp = _certificate(config, chain, spectral, rng)
    mu = config.get("mu") or float(decomp.values[0])
    report = agsp.tail_bound_check(
        spectral, cut, cert, mu, config.get("l_range", [1, 2, 3, 4, 5]))
    rows = [r.to_row() for r in report.rows]
    record = {"certificate": cert.to_record(), "tails": rows, "mu": mu}
    return record, {"tail_bounds": (rows, None)}, report.passed


def cmd_mps_check(config, rng, cap):
    _, chain, spectral = _model_and_spectrum(config, cap)
    k, cert, cut, decomp = _certificate(config, chain, spectral, rng)
    mu = config.get("mu") or float(decomp.values[0])
    report = mps.mps_error_check(
        spectral, cert, mu, config.get("k_list", [1, 2, 4, 8, "full"]))
    rows = [r.to_row() for r in report.rows]
    record = {
        "certificate": cert.to_record(),
        "mps_rows": rows,
        "monotone": report.monotone,
        "exact_at_full": report.exact_at_full,
    }
    return record, {"mps_error": (rows, None)}, report.passed


def cmd_count_check(config, rng, cap):
    j_max = config.get("j_max", 2**20)
    all_pass, failures = combinatorics.sweep_halving_bound(j_max)
    rows = [combinatorics.min_entangling_count(j, 1).to_row()
            for j in [2, 3, 4] + [2**t for t in range(3, 21) if 2**t <= j_max]]
    cpm_ok = True
    for l in range(1, 7):
        for budget in range(0, 25, 6):
            value, _ = combinatorics.constrained_product_max(l, budget)
            if budget % l == 0 and value != (budget // l + 1) ** l:
                cpm_ok = False
    split_ok = all(
        combinatorics.symbolic_split_check(j, l).passed
        for j in range(0, 7) for l in range(1, 4)
    )
    record = {
        "halving_sweep_pass": all_pass,
        "halving_failures": failures[:20],
        "constrained_product_ok": cpm_ok,
        "symbolic_split_ok": split_ok,
        "j_max": j_max,
    }
    return record, {"count_bounds": (rows, None)}, all_pass and cpm_ok and split_ok


def cmd_plan(config, rng, cap):
    epsilon = config.get("epsilon", 1.0)
    d = config.get("d", 2)
    boundary = config.get("boundary_I")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if boundary is None:
            plan = params.plan_1d(epsilon, d)
        else:
            plan = params.plan_2d(epsilon, d, boundary)
    checks = params.verify_plan(plan)
    ok = plan.passed and all(c["pass"] for c in checks.values())
    record = {"plan": plan.to_record(), "verify": checks,
              "headline_ratio": params.headline_ratio(plan)}
    row = {
        "X": plan.x, "q": plan.q, "k": plan.k, "m": plan.m, "j": plan.j,
        "logD_total": plan.log2_d_total,
        "product_DDelta_log2": plan.log2_d_delta_product,
        "pass": ok,
    }
    return record, {"plan": ([row], None)}, ok


HANDLERS = {
    "model": cmd_model,
    "spectrum": cmd_spectrum,
    "dl-check": cmd_dl_check,
    "cheb-check": cmd_cheb_check,
    "agsp-certify": cmd_agsp_certify,
    "amplify": cmd_amplify,
    "entropy-bound": cmd_entropy_bound,
    "tail-check": cmd_tail_check,
    "mps-check": cmd_mps_check,
    "count-check": cmd_count_check,
    "plan": cmd_plan,
}


# ---------------------------------------------------------------------------
# sweep and report


def _expand_axes(axes: dict):
    names = sorted(axes)
    for combo in iter_product(*(axes[name] for name in names)):
        yield dict(zip(names, combo))


def _set_path(config: dict, dotted: str, value):
    parts = dotted.split(".")
    node = config
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def run_sweep(config, seed, cap, jobs):
    sweep = config["sweep"]
    sub = sweep["subcommand"]
    if sub not in HANDLERS:
        raise ConfigError(f"sweep subcommand {sub!r} unknown")
    limit = sweep.get("limit", SWEEP_LIMIT_DEFAULT)
    base = {k: v for k, v in config.items() if k != "sweep"}
    points = list(_expand_axes(sweep["axes"]))
    if not points:
        points = [{}]
    if len(points) > limit:
        raise ConfigError(f"sweep of {len(points)} points exceeds limit {limit}")
    digest = config_hash({"config": config, "seed": seed, "subcommand": "sweep"})

    def run_point(idx_point):
        idx, point = idx_point
        point_config = json.loads(json.dumps(base))
        for dotted, value in point.items():
            _set_path(point_config, dotted, value)
        rng = derive_rng(seed, digest, stream=idx)
        record, tables, ok = HANDLERS[sub](point_config, rng, cap)
        return idx, point, record, ok

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, enumerate(points)))
    else:
        results = [run_point(item) for item in enumerate(points)]
    results.sort(key=lambda item: item[0])

    records = []
    summary = []
    all_ok = True
    for idx, point, record, ok in results:
        records.append({"point": idx, "axes": point, "record": record, "pass": ok})
        summary.append({"point": idx, **point, "pass": ok})
        all_ok = all_ok and ok
    pass_rate = sum(1 for r in records if r["pass"]) / len(records)
    return records, summary, pass_rate, all_ok


def run_report(run_dir: Path):
    """Re-derive plot-ready tables from a finished run's records."""
    records_dir = run_dir / "records"
    if not records_dir.is_dir():
        raise ConfigError(f"{run_dir} has no records/")
    tables = {}
    mu_rows, entropy_rows, plan_rows = [], [], []
    for path in sorted(records_dir.glob("*.json")):
        body = json.loads(path.read_text())
        payload = body.get("record", body)
        for sub in [payload] + [r.get("record", {}) for r in payload.get("points", [])]:
            if "traces" in sub:
                for trace in sub["traces"]:
                    for it, mu in enumerate(trace["overlaps"]):
                        mu_rows.append({"record": path.stem,
                                        "trace": trace["initial_index"],
                                        "iteration": it, "mu": mu})
            if "entropy_bound" in sub and "measured_entropy" in sub:
                entropy_rows.append({
                    "record": path.stem,
                    "measured_entropy": sub["measured_entropy"],
                    "bound": sub["entropy_bound"]["bound"],
                })
            if "plan" in sub:
                plan_rows.append({
                    "record": path.stem,
                    "X": sub["plan"]["x"],
                    "logD_total": sub["plan"]["log2_d_total"],
                })
    if mu_rows:
        tables["mu_vs_iteration"] = (mu_rows, None)
    if entropy_rows:
        tables["entropy_vs_bound"] = (entropy_rows, None)
    if plan_rows:
        tables["logD_vs_X"] = (plan_rows, None)
    return tables


# ---------------------------------------------------------------------------
# entry point


def _output_root(flag_value):
    if flag_value:
        return Path(flag_value)
    return Path(os.environ.get("AGSPLAB_OUT", "outputs"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="agsplab",
        description="certified numerics for ground-space projections on "
                    "frustration-free chains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output root (default AGSPLAB_OUT or ./outputs)")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--cap", type=int, default=ham.DEFAULT_DIMENSION_CAP,
                        help="Hilbert-space dimension cap")

    overrides = {
        "model": [],
        "spectrum": [],
        "dl-check": [],
        "cheb-check": [("--m", int)],
        "agsp-certify": [("--q", int), ("--window-m", int), ("--ell", int), ("--cut", int)],
        "amplify": [("--q", int), ("--window-m", int), ("--ell", int), ("--cut", int),
                    ("--initial-states", int), ("--max-iters", int)],
        "entropy-bound": [("--mu", float), ("--d-factor", float), ("--delta", float)],
        "tail-check": [("--q", int), ("--window-m", int), ("--cut", int)],
        "mps-check": [("--q", int), ("--window-m", int), ("--cut", int)],
        "count-check": [("--j-max", int)],
        "plan": [("--epsilon", float), ("--d", int), ("--boundary-I", int)],
        "sweep": [],
        "report": [],
    }
    for name, flags in overrides.items():
        p = sub.add_parser(name, parents=[common])
        for flag, ftype in flags:
            p.add_argument(flag, type=ftype)
        if name == "report":
            p.add_argument("run_dir", help="existing run directory")
    return parser


_OVERRIDE_KEYS = {
    "m": "m", "q": "q", "window_m": "window_m", "ell": "ell", "cut": "cut",
    "initial_states": "initial_states", "max_iters": "max_iters",
    "mu": "mu", "d_factor": "d_factor", "delta": "delta",
    "epsilon": "epsilon", "d": "d", "boundary_I": "boundary_I",
    "j_max": "j_max",
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.subcommand

    if name == "report":
        try:
            tables = run_report(Path(args.run_dir))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out_dir = Path(args.run_dir) / "tables"
        for table_name, (rows, columns) in tables.items():
            write_csv(out_dir / f"{table_name}.csv", rows, columns)
            print(f"wrote {out_dir / (table_name + '.csv')}")
        return EXIT_OK

    overrides = {}
    for arg_key, cfg_key in _OVERRIDE_KEYS.items():
        if hasattr(args, arg_key) and getattr(args, arg_key) is not None:
            overrides[cfg_key] = getattr(args, arg_key)
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    digest = config_hash({"config": config, "seed": args.seed, "subcommand": name})
    run_id = f"{name}-{digest[:12]}-s{args.seed}"
    run_dir = _output_root(args.out) / run_id
    started = time.time()

    try:
        if name == "sweep":
            if "sweep" not in config:
                raise ConfigError("'sweep' section required")
            records, summary, pass_rate, ok = run_sweep(
                config, args.seed, args.cap, args.jobs)
            body = {
                "subcommand": name, "config": config, "config_hash": digest,
                "seed": args.seed, "points": records, "pass": ok,
                "pass_rate": pass_rate,
            }
            tables = {"summary": (summary, None)}
        else:
            rng = derive_rng(args.seed, digest)
            record, tables, ok = HANDLERS[name](config, rng, args.cap)
            body = {
                "subcommand": name, "config": config, "config_hash": digest,
                "seed": args.seed, "record": record, "pass": ok,
            }
    except (agsp.CertificateViolationError, params.PlanInvariantError) as exc:
        print(f"certified inequality failed: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (ConfigError, ham.DimensionCapError, ham.DegenerateGroundSpaceError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    write_json(run_dir / "records" / "point-000.json", body)
    for table_name, (rows, columns) in tables.items():
        write_csv(run_dir / "tables" / f"{table_name}.csv", rows, columns)
    write_json(run_dir / "manifest.json", {
        "run_id": run_id,
        "subcommand": name,
        "config_hash": digest,
        "seed": args.seed,
        "version": __version__,
        "started_unix": started,
        "elapsed_seconds": time.time() - started,
        "pass": body["pass"],
    })
    status = "pass" if body["pass"] else "FAIL"
    print(f"{run_id}: {status} ({run_dir})")
    return EXIT_OK if body["pass"] else EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())
