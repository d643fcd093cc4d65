"""Command-line interface: ``cluster-posterior {run,generate,verify}``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import (
    ClusterPosteriorError,
    DataError,
    DomainError,
    EnumerationLimitError,
    PrecisionError,
)
from .likelihood import BINARY, CONTINUOUS, BetaBinomial, GammaNormal, build_f_table
from .posterior import OUTPUTS, analyze
from .priors import VARIANTS, PriorSpec
from .subsets import DEFAULT_SCALE_BITS

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 2, 3, 4

log = logging.getLogger("cluster_posterior")


def _scale_bits(text: str):
    if text == "auto":
        return None
    try:
        bits = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'") from None
    if bits < 1:
        raise argparse.ArgumentTypeError("scale bits must be positive")
    return bits


def _outputs(text: str) -> tuple:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in OUTPUTS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"choose a comma-separated subset of {','.join(OUTPUTS)}")
    return items


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file, one row per item")
    p.add_argument("--header", action="store_true", help="first CSV row holds feature names")
    p.add_argument("--model", required=True, choices=["binary", "normal"])
    p.add_argument("--prior", default="uniform-k", choices=VARIANTS)
    p.add_argument("--theta", type=float, default=1.0, help="Dirichlet-process concentration")
    p.add_argument(
        "--strict-paper-dp",
        action="store_true",
        help="drop the theta**k factor from the Dirichlet-process weights",
    )
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0, help="normal model only")
    p.add_argument("--tau", type=float, default=1.0, help="normal model only")
    p.add_argument("--engine", default="direct", choices=["direct", "fast-exact"])
    p.add_argument(
        "--scale-bits",
        type=_scale_bits,
        default=DEFAULT_SCALE_BITS,
        help="fixed-point fraction bits for fast-exact, or 'auto'",
    )
    p.add_argument("--outputs", type=_outputs, default=OUTPUTS)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cluster-posterior",
        description="Exact clustering posteriors for small item sets via subset convolution.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compute posteriors for a dataset")
    _add_model_args(run)
    run.add_argument("--out", required=True)
    run.add_argument("--format", default="json", choices=["json", "csv"])
    run.add_argument(
        "--omit-timing", action="store_true", help="write wall_time_s as null for byte-stable output"
    )
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("generate", help="draw a synthetic dataset")
    gen.add_argument("--experiment", required=True, choices=["normal-18", "binary-20", "custom"])
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True, help="CSV path; the generating partition goes to <out>.truth.json")
    gen.add_argument("--n", type=int)
    gen.add_argument("--k", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--kind", choices=[BINARY, CONTINUOUS], default=CONTINUOUS)
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="check the engine against brute-force enumeration (n <= 13)")
    _add_model_args(ver)
    ver.add_argument("--tolerance", type=float, default=1e-9)
    ver.add_argument("--out", help="optional JSON report")
    ver.set_defaults(func=cmd_verify)
    return parser


def _configure_threads(threads) -> None:
    if threads is None:
        return
    import numba

    if threads < 1:
        raise DomainError("--threads must be positive")
    limit = numba.config.NUMBA_NUM_THREADS
    if threads > limit:
        log.warning("only %d threads available; using %d", limit, limit)
        threads = limit
    numba.set_num_threads(threads)


def _model_and_prior(args):
    if args.model == "binary":
        model = BetaBinomial(args.alpha, args.beta)
    else:
        model = GammaNormal(args.alpha, args.beta, args.mu, args.tau)
    prior = PriorSpec(args.prior, args.theta, args.strict_paper_dp)
    return model, prior


def _load(args, model):
    from .io import load_csv

    return load_csv(args.data, header=args.header, kind=model.kind)


def _analyze(args, model, prior, data):
    _configure_threads(args.threads)
    f = build_f_table(data, model, prior)
    log.info("n=%d items, D=%d features, engine=%s", data.n, data.D, args.engine)
    result = analyze(f, prior, outputs=args.outputs, engine=args.engine, scale_bits=args.scale_bits)
    if args.engine == "fast-exact" and args.scale_bits is None:
        result.engine["scale_bits"] = "auto"
    return result


def cmd_run(args) -> int:
    from .io import emit_results

    model, prior = _model_and_prior(args)
    result = _analyze(args, model, prior, _load(args, model))
    files = emit_results(
        result,
        args.out,
        model=model.describe(),
        prior=prior.describe(),
        fmt=args.format,
        timing=not args.omit_timing,
    )
    for path in files:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_generate(args) -> int:
    from .io import write_csv
    from .synthetic import generate

    sample = generate(args.experiment, args.seed, n=args.n, k=args.k, D=args.d, kind=args.kind)
    write_csv(sample.data, args.out)
    truth = {
        "experiment": args.experiment,
        "seed": args.seed,
        "kind": sample.data.kind,
        "n": sample.data.n,
        "D": sample.data.D,
        "clusters": sample.clusters,
    }
    Path(f"{args.out}.truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    log.info("wrote %s (n=%d, D=%d)", args.out, sample.data.n, sample.data.D)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .oracle import MAX_ORACLE_N, brute_posteriors, compare

    model, prior = _model_and_prior(args)
    data = _load(args, model)
    if data.n > MAX_ORACLE_N:
        raise EnumerationLimitError(f"verify supports at most {MAX_ORACLE_N} items, got {data.n}")
    result = _analyze(args, model, prior, data)
    oracle = brute_posteriors(data, model, prior)
    problems = compare(result, oracle, args.tolerance)
    report = {"n": data.n, "partitions": oracle.count, "tolerance": args.tolerance, "mismatches": problems}
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    if problems:
        for line in problems:
            print(f"MISMATCH {line}", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"OK: engine matches enumeration of {oracle.count} partitions within {args.tolerance:g}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (DataError, EnumerationLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DomainError, PrecisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClusterPosteriorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
