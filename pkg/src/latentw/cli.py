"""Command line front end.

Subcommands: weight, decompose, bound, tv, classweight, estimate,
simulate, meth.  Exit codes: 0 success, 1 validation error, 2 I/O error.
Every structured output (JSON or TSV file) embeds the package version,
the seed, and a hash of the result-affecting configuration; thread count
is deliberately excluded from the hash because results do not depend on
it.  All randomness flows from ``--seed`` (default 0, never the clock).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .errors import LatentwError
from .space import CountVector, empirical_distribution, read_counts
from . import exchangeable as exch
from . import inference
from . import methylation as meth
from .product import OptimizerOptions, ProductClassSpec, class_weight


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):   # argparse exits 2 by default; we use 1
        raise _UsageError(message)


def _config_hash(args: argparse.Namespace, exclude=("threads", "out")) -> str:
    items = {k: v for k, v in sorted(vars(args).items())
             if k not in exclude and not k.startswith("_") and k != "func"}
    blob = json.dumps(items, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _meta(args, seed=None) -> dict:
    return {"version": __version__, "seed": seed,
            "config_hash": _config_hash(args)}


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _counts_arg(args) -> CountVector:
    return read_counts(args.counts, k=getattr(args, "k", None))


def _scalar_output(value, args, extra: dict | None = None, seed=None) -> str:
    if getattr(args, "json", False):
        payload = {"meta": _meta(args, seed=seed), "value": float(value)}
        if isinstance(value, Fraction):
            payload["exact"] = str(value)
        payload.update(extra or {})
        return json.dumps(payload, indent=2) + "\n"
    if isinstance(value, Fraction):
        return f"{value}\n"
    return f"{float(value):.6f}\n"


# --------------------------------------------------------------- weight ----

def _cmd_weight(args) -> int:
    c = _counts_arg(args)
    p = empirical_distribution(c, exact=args.exact)
    lam = exch.exchangeable_weight(p)
    _emit(_scalar_output(lam, args), args.out)
    return 0


def _cmd_decompose(args) -> int:
    c = _counts_arg(args)
    p = empirical_distribution(c, exact=args.exact)
    dec = exch.decompose(p)
    space = p.space

    def vec(dist):
        return None if dist is None else [float(v) for v in dist.p]

    payload = {
        "meta": _meta(args),
        "lambda": float(dec.lam),
        "q": vec(dec.q),
        "r": vec(dec.r),
        "per_class_min": [float(v) for v in dec.per_class_min],
        "argmin_sets": [[space.outcome_str(i) for i in s]
                        for s in dec.argmin_sets],
    }
    if args.exact:
        payload["lambda_exact"] = str(dec.lam)
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_bound(args) -> int:
    c = _counts_arg(args)
    p = empirical_distribution(c, exact=args.exact)
    if args.bound_kind == "marginal":
        indices = _parse_int_list(args.indices, "indices")
        value = exch.marginal_weight_bound(p, indices)
    else:
        mapping = _read_symbol_map(args.map, p.space.k)
        value = exch.lumping_weight_bound(p, mapping)
    _emit(_scalar_output(value, args), args.out)
    return 0


def _cmd_tv(args) -> int:
    c = _counts_arg(args)
    p = empirical_distribution(c)
    dist, q = exch.tv_distance_to_exchangeable(p)
    extra = {"q": [float(v) for v in q.p]} if args.json else None
    _emit(_scalar_output(dist, args, extra=extra), args.out)
    return 0


def _cmd_classweight(args) -> int:
    c = _counts_arg(args)
    p = empirical_distribution(c)
    if args.cls == "singleton":
        if not args.q0:
            raise _UsageError("--q0 is required for --class singleton")
        q0_counts = read_counts(args.q0, k=p.space.k)
        q0 = empirical_distribution(q0_counts)
        spec = ProductClassSpec(kind="singleton", q0=q0)
    else:
        spec = ProductClassSpec(kind=args.cls)
    opts = OptimizerOptions(grid_points=args.grid, tol=args.tol)
    res = class_weight(p, spec, opts)
    if args.json:
        payload = {
            "meta": _meta(args),
            "lambda": min(res.lam, 1.0),
            "lambda_raw": res.lam,
            "argmax_q": [float(v) for v in res.argmax_q.p],
            "certificate_margin": res.certificate_margin,
            "converged": res.converged,
            "n_starts": len(res.multistart_log),
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(f"{min(res.lam, 1.0):.6f}\n", args.out)
    return 0


def _cmd_estimate(args) -> int:
    c = _counts_arg(args)
    n0 = inference.subsample_size(c.n) if args.subsample else None
    est = inference.estimate(c, n_boot=args.boot, resample_size=n0,
                             seed=args.seed)
    payload = {"meta": _meta(args, seed=args.seed)}
    payload.update({
        "lambda_hat": est.lambda_hat,
        "lambda_corrected": est.lambda_corrected,
        "se_boot": est.se_boot,
        "bias_boot": est.bias_boot,
        "n": est.n,
        "n_boot": est.n_boot,
        "resample_size": est.resample_size,
        "seed": est.seed,
        "regularity_flag": est.regularity_flag,
    })
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_simulate_size(args) -> int:
    from .space import SampleSpace

    space = SampleSpace(k=args.k, d=args.d)
    sizes = _parse_int_list(args.sizes, "sizes")
    rows = inference.sample_size_heuristic(space, sizes, reps=args.reps,
                                           seed=args.seed)
    lines = [f"# {k}={v}" for k, v in _meta(args, seed=args.seed).items()]
    lines.append("n\tmean_bias\tsd")
    for row in rows:
        lines.append(f"{row.n}\t{row.mean_bias:.6g}\t{row.sd:.6g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_meth_triplets(args) -> int:
    paths = [p for p in args.epireads.split(",") if p]
    records = []
    for path in paths:
        records.extend(meth.parse_epiread_file(path))
    triplets = meth.extract_triplets(records,
                                     coverage_threshold=args.min_coverage)
    report = meth.triplet_report(triplets, n_boot=args.boot, seed=args.seed,
                                 threads=_resolve_threads(args.threads))
    meta_kv = {k: str(v) for k, v in _meta(args, seed=args.seed).items()}
    meth.write_report_tsv(report, args.out, meta=meta_kv)
    if report.failures:
        for f in report.failures:
            sys.stderr.write(
                f"latentw: warning: triplet {f.chrom}:{f.index} failed: "
                f"{f.error}\n")
    return 0


def _cmd_meth_correlate(args) -> int:
    rows = meth.read_report_tsv(args.report)
    cov = _read_covariate(args.covariate)
    weights, values, groups = [], [], []
    for row in rows:
        key = (row["chrom"], row["index"])
        if key not in cov:
            continue
        weights.append(row["lambda_corrected"])
        values.append(cov[key])
        groups.append(row["chrom"] if args.group_by == "chrom" else "all")
    reports = meth.correlate(weights, values, groups)
    lines = [f"# {k}={v}" for k, v in _meta(args).items()]
    lines.append("group\tn\tpearson_r\tpearson_p\tspearman_rho\tspearman_p")
    for rep in reports:
        lines.append("\t".join([
            rep.group, str(rep.n), f"{rep.pearson_r:.6g}",
            f"{rep.pearson_p:.6g}", f"{rep.spearman_rho:.6g}",
            f"{rep.spearman_p:.6g}",
        ]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# ------------------------------------------------------------- helpers ----

def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"--{what} must be a comma-separated integer list")


def _read_symbol_map(path: str, k: int) -> dict[int, str]:
    mapping: dict[int, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if line_no == 1 and fields == ["from", "to"]:
                continue
            if len(fields) != 2:
                raise LatentwError(
                    f"map file line {line_no}: expected 'from<TAB>to'")
            sym = int(fields[0], 36)
            mapping[sym] = fields[1]
    return mapping


def _read_covariate(path: str) -> dict[tuple[str, int], float]:
    out: dict[tuple[str, int], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if header is None:
                header = fields
                if header != ["chrom", "index", "value"]:
                    raise LatentwError(
                        "covariate file header must be chrom<TAB>index<TAB>value")
                continue
            if len(fields) != 3:
                raise LatentwError(f"covariate row has {len(fields)} fields")
            out[(fields[0], int(fields[1]))] = float(fields[2])
    return out


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("LATENTW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"LATENTW_THREADS={env!r} is not an integer")
    return os.cpu_count() or 1


# -------------------------------------------------------------- parser ----

def build_parser() -> _Parser:
    parser = _Parser(prog="latentw",
                     description="Latent-weight analysis of categorical data")
    parser.add_argument("--version", action="version",
                        version=f"latentw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_counts(p, exact=True):
        p.add_argument("--counts", required=True, help="counts TSV file")
        p.add_argument("--k", type=int, default=None,
                       help="alphabet size override")
        if exact:
            p.add_argument("--exact", action="store_true",
                           help="exact rational arithmetic")
        p.add_argument("--json", action="store_true",
                       help="structured JSON output")
        p.add_argument("--out", default=None, help="write output to file")

    p = sub.add_parser("weight", help="exchangeable weight of the counts")
    add_counts(p)
    p.set_defaults(func=_cmd_weight)

    p = sub.add_parser("decompose",
                       help="exchangeable component + residual as JSON")
    add_counts(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("bound", help="upper bounds on the exchangeable weight")
    bsub = p.add_subparsers(dest="bound_kind", required=True)
    bm = bsub.add_parser("marginal", help="weight of a marginal")
    add_counts(bm)
    bm.add_argument("--indices", required=True,
                    help="1-based coordinate list, e.g. 1,2")
    bm.set_defaults(func=_cmd_bound)
    bl = bsub.add_parser("lump", help="weight after symbol lumping")
    add_counts(bl)
    bl.add_argument("--map", required=True, help="symbol map TSV (from, to)")
    bl.set_defaults(func=_cmd_bound)

    p = sub.add_parser("tv", help="TV distance to the exchangeable class")
    add_counts(p, exact=False)
    p.set_defaults(func=_cmd_tv)

    p = sub.add_parser("classweight",
                       help="latent weight w.r.t. a product-form class")
    add_counts(p, exact=False)
    p.add_argument("--class", dest="cls", required=True,
                   choices=["singleton", "iid", "product"])
    p.add_argument("--q0", default=None,
                   help="counts TSV defining the singleton model")
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=_cmd_classweight)

    p = sub.add_parser("estimate", help="bootstrap-corrected weight estimate")
    p.add_argument("--counts", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--subsample", action="store_true",
                   help="use the 2*sqrt(n) subsample bootstrap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="simulation helpers")
    ssub = p.add_subparsers(dest="simulate_kind", required=True)
    sz = ssub.add_parser("size", help="sample-size table from the worst-case "
                                      "test source")
    sz.add_argument("--k", type=int, required=True)
    sz.add_argument("--d", type=int, required=True)
    sz.add_argument("--sizes", required=True, help="e.g. 100,1000,10000")
    sz.add_argument("--reps", type=int, required=True)
    sz.add_argument("--seed", type=int, default=0)
    sz.add_argument("--out", default=None)
    sz.set_defaults(func=_cmd_simulate_size)

    p = sub.add_parser("meth", help="methylation triplet pipeline")
    msub = p.add_subparsers(dest="meth_kind", required=True)
    mt = msub.add_parser("triplets", help="per-triplet 21-column report")
    mt.add_argument("--epireads", required=True,
                    help="epiread file(s), comma separated")
    mt.add_argument("--min-coverage", type=int, default=100)
    mt.add_argument("--boot", type=int, default=1000)
    mt.add_argument("--seed", type=int, default=0)
    mt.add_argument("--threads", type=int, default=None)
    mt.add_argument("--out", required=True)
    mt.set_defaults(func=_cmd_meth_triplets)
    mc = msub.add_parser("correlate",
                         help="correlate report weights with a covariate")
    mc.add_argument("--report", required=True)
    mc.add_argument("--covariate", required=True,
                    help="TSV: chrom, index, value")
    mc.add_argument("--group-by", choices=["chrom", "dataset"],
                    default="chrom")
    mc.add_argument("--out", default=None)
    mc.set_defaults(func=_cmd_meth_correlate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:      # --version and friends
        return int(exc.code or 0)
    except _UsageError as exc:
        sys.stderr.write(f"latentw: error [E_USAGE]: {exc}\n")
        return 1
    except LatentwError as exc:
        sys.stderr.write(f"latentw: error [{exc.code}]: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"latentw: error [E_VALIDATION]: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"latentw: error [E_IO]: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
