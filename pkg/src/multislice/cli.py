"""Command line front end: sampling, enumeration and verification runs.

Subcommands read a structured text config with sections [spec],
[statistic], [bound] and [run], write CSV or JSON-lines artifacts, and
exit zero exactly when every verdict is PASS or DOMINATED.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

try:
    import tomllib as _toml
except ImportError:  # pragma: no cover - python < 3.11
    import tomli as _toml

from .bounds import REGISTRY as BOUND_REGISTRY
from .convex_distance import convex_distance, load_members, save_distance_report
from .core import (
    EnumeratedMultislice,
    EnumeratedPrefix,
    MultisliceSpec,
    enumerate_configurations,
    sample_batch,
)
from .functional import (
    FunctionTable,
    check_beckner,
    check_local_variance_identity,
    check_lsi,
    check_mlsi,
    check_moment_estimate,
    check_poincare,
    check_projection_identities,
    check_swor_lsi,
    check_swor_mlsi,
    empirical_lsi_constant,
    lsi_constant,
    random_table,
    save_check_reports,
)
from .harness import (
    TailExperiment,
    run_tail,
    run_talagrand_all_subsets,
    run_talagrand_exact,
    save_tail_csv,
    save_tail_metadata,
)
from .tensor_norms import (
    Partition,
    enumerate_partitions,
    load_tensor,
    partition_norm_detailed,
    save_norm_report,
)

DEFAULT_CORPUS = ((1, 1), (2, 1), (2, 2), (3, 2), (2, 2, 1), (1, 1, 1, 1))
BECKNER_PS = (1.25, 1.5, 2.0)
MOMENT_PS = (2.0, 3.0, 4.0)


def _load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        return _toml.load(fh)


def _spec_from_config(cfg: dict) -> MultisliceSpec:
    if "spec" not in cfg:
        raise ValueError("config needs a [spec] section")
    sec = cfg["spec"]
    if "kappa" not in sec or "values" not in sec:
        raise ValueError("[spec] needs 'kappa' and 'values'")
    return MultisliceSpec(tuple(sec["kappa"]), tuple(float(v) for v in sec["values"]))


def _fill_bound_params(bound_id: str, params: dict, spec: MultisliceSpec, n: int) -> dict:
    """Context keys n/total/diam are inferred from the run when omitted."""
    if bound_id not in BOUND_REGISTRY:
        raise ValueError(f"unknown bound id {bound_id!r}")
    wanted = BOUND_REGISTRY[bound_id].params
    defaults = {"n": n, "total": spec.total, "diam": spec.diameter}
    out = dict(params)
    for name in wanted:
        if name not in out and name in defaults:
            out[name] = defaults[name]
    if bound_id == "multilinear" and "norms" in out:
        out["norms"] = {
            Partition.from_string(k): float(v) for k, v in out["norms"].items()
        }
    return out


def _experiment_from_config(cfg: dict) -> TailExperiment:
    spec = _spec_from_config(cfg)
    stat = cfg.get("statistic", {})
    bound = cfg.get("bound", {})
    run = cfg.get("run", {})
    for key, sec in (("statistic", stat), ("bound", bound), ("run", run)):
        if not isinstance(sec, dict):
            raise ValueError(f"[{key}] must be a section")
    if "id" not in stat:
        raise ValueError("[statistic] needs an 'id'")
    if "id" not in bound:
        raise ValueError("[bound] needs an 'id'")
    if "t_grid" not in run or "samples" not in run or "seed" not in run:
        raise ValueError("[run] needs 't_grid', 'samples' and 'seed'")
    n = int(stat.get("n", spec.total))
    return TailExperiment(
        spec=spec,
        n=n,
        statistic=str(stat["id"]),
        statistic_params=dict(stat.get("params", {})),
        t_grid=tuple(float(t) for t in run["t_grid"]),
        samples=int(run["samples"]),
        seed=int(run["seed"]),
        bound=str(bound["id"]),
        bound_params=_fill_bound_params(
            str(bound["id"]), dict(bound.get("params", {})), spec, n
        ),
        workers=int(run.get("workers", 1)),
        centering=str(run.get("centering", "exact-expectation")),
        scale=float(stat.get("scale", 1.0)),
        relative=bool(run.get("relative", False)),
        sided=bound.get("sided"),
    )


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_config(cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("run", {}).get("seed", 0))
    rng = np.random.default_rng(seed)
    batch = sample_batch(spec, args.count, rng)
    if args.prefix_length is not None:
        batch = batch[:, : args.prefix_length]
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for row in batch:
            out.write(json.dumps([float(x) for x in row]) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_config(cfg)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.prefix_length is not None:
            space = EnumeratedPrefix(spec, args.prefix_length)
            for row, w in zip(space.configurations, space.weights):
                out.write(
                    json.dumps({"config": [float(x) for x in row], "weight": w}) + "\n"
                )
        else:
            for row in enumerate_configurations(spec):
                out.write(json.dumps([float(x) for x in row]) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _verify_one_spec(kappa: tuple[int, ...], functions: int, rng) -> tuple[list, float]:
    spec = MultisliceSpec(kappa, tuple(float(i) for i in range(len(kappa))))
    space = EnumeratedMultislice(spec)
    reports = []
    best = 0.0
    for _ in range(functions):
        t = random_table(space, rng)
        pos = random_table(space, rng, positive=True)
        reports.append(check_lsi(t))
        reports.append(check_mlsi(t, op="gamma"))
        reports.append(check_mlsi(t, op="gamma-plus"))
        reports.append(check_poincare(t))
        for p in BECKNER_PS:
            reports.append(check_beckner(pos, p))
        for p in MOMENT_PS:
            reports.append(check_moment_estimate(t, p))
        reports.append(check_local_variance_identity(t))
        reports.append(check_projection_identities(t, pos))
        best = max(best, empirical_lsi_constant(t))

    # symmetric functions on a half-length prefix exercise the swor block
    n = max(1, spec.total // 2)
    prefix = EnumeratedPrefix(spec, n)
    keys = [
        tuple(np.bincount(r, minlength=spec.num_levels)) for r in prefix.level_indices
    ]
    for _ in range(functions):
        assign = {k: rng.uniform(-1.0, 1.0) for k in set(keys)}
        table = FunctionTable(prefix, np.array([assign[k] for k in keys]))
        reports.append(check_swor_lsi(table))
        reports.append(check_swor_mlsi(table, op="h"))
        reports.append(check_swor_mlsi(table, op="h-plus"))
    return reports, best


def cmd_verify_fi(args: argparse.Namespace) -> int:
    if args.config:
        cfg = _load_config(args.config)
        corpus = [tuple(_spec_from_config(cfg).kappa)]
    else:
        corpus = [tuple(k) for k in DEFAULT_CORPUS]
    rng = np.random.default_rng(args.seed)
    all_reports = []
    ok = True
    for kappa in corpus:
        reports, best = _verify_one_spec(kappa, args.functions, rng)
        all_reports.extend(reports)
        failed = [r for r in reports if not r.passed]
        ok = ok and not failed
        worst = max(r.slack for r in reports)
        sigma_sq = lsi_constant(
            MultisliceSpec(kappa, tuple(float(i) for i in range(len(kappa))))
        )
        status = "PASS" if not failed else f"FAIL ({len(failed)} checks)"
        print(
            f"kappa={kappa}: {len(reports)} checks {status}; "
            f"max slack {worst:.3e}; empirical lsi constant {best:.4f} <= {sigma_sq:.4f}"
        )
    if args.out:
        save_check_reports(args.out, all_reports)
    print(f"verify-fi: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_tail(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    experiment = _experiment_from_config(cfg)
    report = run_tail(experiment)
    save_tail_csv(args.out, report)
    meta = args.meta if args.meta else args.out + ".meta.jsonl"
    save_tail_metadata(meta, report)
    for row in report.rows:
        print(
            f"t={row.t:g} p_hat={row.p_hat:.6g} ci_hi={row.ci_hi:.6g} "
            f"bound={row.bound:.6g} {row.verdict}"
        )
    print(f"tail: {'PASS' if report.passed else 'FAIL'} ({args.out})")
    return 0 if report.passed else 1


def cmd_cdist(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_config(cfg)
    if args.all_subsets:
        report = run_talagrand_all_subsets(spec)
        print(
            f"all-subsets: {report.num_sets} sets, max product {report.max_product:.12f}"
        )
        print(f"cdist: {'PASS' if report.passed else 'FAIL'}")
        return 0 if report.passed else 1
    if args.members is None:
        report = run_talagrand_exact(
            spec, set_size=args.set_size, trials=args.trials, seed=args.seed
        )
        print(
            f"random sets: {report.num_sets} trials, max product {report.max_product:.12f}"
        )
        print(f"cdist: {'PASS' if report.passed else 'FAIL'}")
        return 0 if report.passed else 1
    members = load_members(args.members)
    space = EnumeratedMultislice(spec)
    rows = [
        (s, convex_distance(space.configurations[s], members))
        for s in range(space.size)
    ]
    if args.out:
        save_distance_report(args.out, rows)
    for s, res in rows:
        print(f"state {s}: distance {res.value:.9f} (gap {res.gap:.2e})")
    return 0


def cmd_norms(args: argparse.Namespace) -> int:
    tensor = load_tensor(args.tensor)
    results = [
        partition_norm_detailed(tensor, part, restarts=args.restarts, seed=args.seed)
        for part in enumerate_partitions(tensor.ndim)
    ]
    if args.out:
        save_norm_report(args.out, results)
    for res in results:
        print(f"{res.partition}: {res.value:.12f} (spread {res.spread:.2e})")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    bad = 0
    total = 0
    for path in args.files:
        with open(path, newline="") as fh:
            for record in csv.DictReader(fh):
                verdict = record.get("verdict", "")
                total += 1
                if verdict not in ("DOMINATED", "QUALITATIVE", "PASS"):
                    bad += 1
                    print(f"{path}: t={record.get('t')} {verdict}")
    print(f"report: {total} rows, {bad} failing")
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multislice",
        description="Sampling, enumeration and concentration checks for multislices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw random configurations")
    p.add_argument("--config", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--prefix-length", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("enumerate", help="list all configurations or prefixes")
    p.add_argument("--config", required=True)
    p.add_argument("--prefix-length", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("verify-fi", help="run the functional-inequality suite")
    p.add_argument("--config", default=None, help="restrict to the configured spec")
    p.add_argument("--functions", type=int, default=25)
    p.add_argument("--seed", type=int, default=20250819)
    p.add_argument("--out", default=None, help="JSON-lines report path")
    p.set_defaults(fn=cmd_verify_fi)

    p = sub.add_parser("tail", help="Monte Carlo tail comparison against a bound")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--meta", default=None, help="JSON-lines metadata path")
    p.set_defaults(fn=cmd_tail)

    p = sub.add_parser("cdist", help="convex-distance products and tables")
    p.add_argument("--config", required=True)
    p.add_argument("--members", default=None, help="JSON-lines member file")
    p.add_argument("--all-subsets", action="store_true")
    p.add_argument("--set-size", type=int, default=None)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_cdist)

    p = sub.add_parser("norms", help="partition norms of a stored tensor")
    p.add_argument("--tensor", required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_norms)

    p = sub.add_parser("report", help="summarize verdict columns of CSV artifacts")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # noqa: BLE001 - diagnostics to stderr, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
