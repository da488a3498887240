"""Command-line surface: experiment configuration, execution, reports.

Exit codes: 0 success (and Landau pass), 1 mathematical failure (Landau
violation), 2 usage or spec parse errors.  Numeric arguments accept power
notation like 2^20.  Reports are JSON by default, CSV via --format csv, and
--figures DIR renders matplotlib figures next to the delimited output.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction

from . import divisibility, empirical, runner, sequences, theory
from .empirical import ScanConfig
from .reports import (
    Report,
    encode_valuation,
    rational,
    to_csv,
    to_json,
    valuation_histogram_payload,
)

__all__ = [
    "main",
    "parse_count",
    "cmd_moments",
    "cmd_digit_pairs",
    "cmd_clt",
    "cmd_landau",
    "cmd_scan",
    "cmd_valuation",
]


def parse_count(text: str) -> int:
    """Parse a positive integer, allowing power notation like 2^20."""
    text = text.strip()
    if "^" in text:
        base_s, _, exp_s = text.partition("^")
        try:
            value = int(base_s) ** int(exp_s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad power notation {text!r}")
    else:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive count, got {text!r}")
    return value


def _count_list(text: str) -> list[int]:
    return [parse_count(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list: {text!r}")


def _matrix_payload(matrix, encode=rational) -> list[list]:
    return [[encode(x) for x in row] for row in matrix]


def _float_matrix(matrix) -> list[list[float]]:
    return [[float(x) for x in row] for row in matrix]


# ---------------------------------------------------------------------------
# command implementations (each returns a Report; exit codes handled by main)


def cmd_moments(q: int, multipliers: list[int], n_limit: int, workers: int = 1) -> Report:
    t0 = time.perf_counter()
    config = ScanConfig(q=q, multipliers=tuple(multipliers), n_limit=n_limit)
    summary = runner.parallel_empirical_scan(config, workers)
    mean, cov = empirical.exact_moments(summary)
    log_n = math.log(n_limit) / math.log(q)
    cov_per_log = [[float(c) / log_n for c in row] for row in cov]
    prediction = None
    deviation = None
    reason = None
    try:
        pred = theory.covariance_matrix(q, multipliers)
        prediction = _matrix_payload(pred.entries)
        deviation = [
            [cov_per_log[i][j] - float(pred.entries[i][j]) for j in range(pred.dim)]
            for i in range(pred.dim)
        ]
    except ValueError as exc:
        reason = str(exc)
    result = {
        "count": summary.count,
        "mean": [rational(m) for m in mean],
        "covariance": _matrix_payload(cov),
        "covariance_per_log": cov_per_log,
        "log_q_n": log_n,
        "prediction": prediction,
        "prediction_omitted_reason": reason,
        "deviation": deviation,
    }
    return Report(
        schema="digitlab.moments/1",
        config={"q": q, "multipliers": list(multipliers), "n_limit": n_limit},
        result=result,
        duration_seconds=time.perf_counter() - t0,
        workers=workers,
    )


def _lemma_window(q: int, n_limit: int) -> tuple[float, float]:
    cube = math.log(n_limit) ** (1.0 / 3.0)
    return cube, math.log(n_limit) / math.log(q) - cube


def cmd_digit_pairs(
    q: int, a1: int, a2: int, i: int, j: int, n_limit: int,
    terms: int = 100_000, workers: int = 1,
) -> Report:
    t0 = time.perf_counter()
    table = runner.parallel_digit_pair_scan(q, a1, a2, i, j, n_limit, workers)
    freq = table.frequencies()
    prediction = None
    tail = None
    max_dev = None
    reason = None
    warnings = []
    try:
        pred, tail = theory.joint_digit_prediction(q, a1, a2, i == j, terms)
        prediction = pred
        max_dev = max(
            abs(freq[a][b] - pred[a][b]) for a in range(q) for b in range(q)
        )
    except ValueError as exc:
        reason = str(exc)
    lo, hi = _lemma_window(q, n_limit)
    for label, pos in (("i", i), ("j", j)):
        if not lo <= pos <= hi:
            warnings.append(
                f"position {label}={pos} is outside the asymptotic window "
                f"[{lo:.2f}, {hi:.2f}] for N={n_limit}; the prediction may be off"
            )
    result = {
        "counts": table.counts,
        "frequencies": freq,
        "prediction": prediction,
        "prediction_omitted_reason": reason,
        "tail_bound": tail,
        "max_abs_deviation": max_dev,
        "window": {"low": lo, "high": hi, "i_inside": lo <= i <= hi, "j_inside": lo <= j <= hi},
        "warnings": warnings,
    }
    return Report(
        schema="digitlab.digit_pairs/1",
        config={
            "q": q, "a1": a1, "a2": a2, "i": i, "j": j,
            "n_limit": n_limit, "series_terms": terms,
        },
        result=result,
        duration_seconds=time.perf_counter() - t0,
        workers=workers,
    )


def cmd_clt(q: int, multiplier: int, n_limit: int, bins: int = 1, workers: int = 1) -> Report:
    t0 = time.perf_counter()
    if n_limit < q * q:
        raise ValueError(f"need N >= q^2 = {q * q}, got {n_limit}")
    counts = runner.parallel_value_histogram(q, multiplier, n_limit, workers)
    hist = empirical.histogram_from_counts(counts, q, n_limit)
    ks = empirical.ks_from_histogram(hist, bins)
    total = sum(hist.counts)
    mean = Fraction(sum(v * c for v, c in zip(hist.values, hist.counts)), total)
    second = Fraction(sum(v * v * c for v, c in zip(hist.values, hist.counts)), total)
    result = {
        "ks_distance": ks,
        "count": total,
        "values": hist.values,
        "value_counts": hist.counts,
        "mean": rational(mean),
        "variance": rational(second - mean * mean),
        "standardization": {"center": hist.center, "scale": hist.scale},
        "bin_width": bins,
    }
    return Report(
        schema="digitlab.clt/1",
        config={"q": q, "multiplier": multiplier, "n_limit": n_limit, "bins": bins},
        result=result,
        duration_seconds=time.perf_counter() - t0,
        workers=workers,
    )


def cmd_landau(c_factors: list[int], d_factors: list[int]) -> Report:
    t0 = time.perf_counter()
    verdict = sequences.landau_check(c_factors, d_factors)
    # full step-function profile: exact breakpoints and values for plot/audit
    points = sorted(
        {Fraction(k, m) for m in set(c_factors) | set(d_factors) for k in range(m)}
    )
    profile = [
        {
            "x": rational(x),
            "value": sum(m * x.numerator // x.denominator for m in c_factors)
            - sum(m * x.numerator // x.denominator for m in d_factors),
        }
        for x in points
    ]
    result = {
        "passed": verdict.passed,
        "witness": rational(verdict.witness) if verdict.witness is not None else None,
        "value_at_witness": verdict.value_at_witness,
        "min_value": verdict.min_value,
        "argmin": rational(verdict.argmin),
        "breakpoints": verdict.breakpoints,
        "profile": profile,
    }
    return Report(
        schema="digitlab.landau/1",
        config={"c_factors": list(c_factors), "d_factors": list(d_factors)},
        result=result,
        duration_seconds=time.perf_counter() - t0,
    )


def _spec_config(spec: sequences.SequenceSpec) -> dict:
    return {"spec_name": spec.name, "spec": sequences.render(spec)}


def cmd_scan(
    spec: sequences.SequenceSpec,
    modulus: int,
    n_limits: list[int],
    eta: float | None = None,
    workers: int = 1,
) -> Report:
    t0 = time.perf_counter()
    spec.validate()
    factors = divisibility.factorize(modulus)
    if len(n_limits) > 1:
        if len(factors) != 1:
            raise ValueError("trend scans need a prime-power modulus")
        p, alpha = factors[0]
        segments = runner.parallel_trend_segments(spec, p, n_limits, workers)
        tr = divisibility.trend_from_histograms(spec, p, alpha, n_limits, segments, eta)
        result = {
            **_spec_config(spec),
            "p": p,
            "alpha": alpha,
            "eta": eta,
            "points": [
                {
                    "n_limit": pt.n_limit,
                    "divisible_count": pt.divisible_count,
                    "skipped_count": pt.skipped_count,
                    "fraction": pt.fraction,
                    "small_valuation_count": pt.small_valuation_count,
                    "small_valuation_threshold": pt.small_valuation_threshold,
                }
                for pt in tr.points
            ],
        }
        schema = "digitlab.trend/1"
    else:
        n_limit = n_limits[0]
        primes = tuple(p for p, _ in factors)
        hists = runner.parallel_histogram_scan(spec, primes, n_limit, workers)
        joint = (
            runner.parallel_joint_divisible(spec, factors, n_limit, workers)
            if len(factors) > 1
            else None
        )
        rep = divisibility.assemble_report(spec, modulus, n_limit, hists, joint)
        small = None
        if eta is not None:
            threshold = divisibility.small_valuation_threshold(eta, n_limit)
            small = {
                "eta": eta,
                "threshold": threshold,
                "count": sum(
                    c for v, c in hists.hists[primes[0]].items() if v < threshold
                ),
            }
        result = {
            **_spec_config(spec),
            "modulus": modulus,
            "factors": [[p, a] for p, a in factors],
            "n_limit": n_limit,
            "divisible_count": rep.divisible_count,
            "skipped_count": rep.skipped_count,
            "considered": rep.considered,
            "fraction": rep.fraction,
            "histograms": {
                str(p): valuation_histogram_payload(rep.histograms[p]) for p in primes
            },
            "small_valuation": small,
        }
        schema = "digitlab.scan/1"
    return Report(
        schema=schema,
        config={
            **_spec_config(spec),
            "modulus": modulus,
            "n_limits": list(n_limits),
            "eta": eta,
        },
        result=result,
        duration_seconds=time.perf_counter() - t0,
        workers=workers,
    )


def cmd_valuation(spec: sequences.SequenceSpec, p: int, n_values: list[int]) -> Report:
    t0 = time.perf_counter()
    rows = []
    for n in n_values:
        try:
            v = spec.valuation(n, p)
            bound = spec.valuation_lower_bound(n, p)
            rows.append(
                {
                    "n": n,
                    "valuation": encode_valuation(v),
                    "lower_bound": rational(bound),
                    "pole": False,
                }
            )
        except sequences.PoleError:
            rows.append({"n": n, "valuation": None, "lower_bound": None, "pole": True})
    result = {**_spec_config(spec), "p": p, "values": rows}
    return Report(
        schema="digitlab.valuation/1",
        config={**_spec_config(spec), "p": p, "n_values": list(n_values)},
        result=result,
        duration_seconds=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# argument plumbing


def _add_output_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("json", "csv"), default="json",
                     help="report format (default json)")
    sub.add_argument("--output", "-o", default="-",
                     help="output path, '-' for stdout (default)")
    sub.add_argument("--figures", metavar="DIR", default=None,
                     help="also render matplotlib figures into DIR")


def _add_workers_option(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--workers", "-w", type=int, default=None,
                     help="worker processes (default: DIGITLAB_WORKERS or 1)")


def _resolve_workers(args) -> int:
    workers = args.workers if args.workers is not None else runner.default_workers()
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def _add_spec_options(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="sequence expression text")
    group.add_argument("--corpus", metavar="NAME", help="named spec from the bundled corpus")
    sub.add_argument("--corpus-file", default=None,
                     help="corpus file to resolve --corpus names from")


def _resolve_spec(args) -> sequences.SequenceSpec:
    if args.spec is not None:
        return sequences.parse(args.spec)
    specs = sequences.load_corpus(args.corpus_file)
    try:
        return specs[args.corpus]
    except KeyError:
        known = ", ".join(sorted(specs))
        raise ValueError(f"unknown corpus spec {args.corpus!r}; known: {known}")


def _parse_landau_sets(text: str) -> tuple[list[int], list[int]]:
    """Parse the 'C=1,1 D=2' argument form."""
    import re

    m = re.fullmatch(r"\s*C\s*=\s*([\d,\s]+?)\s*D\s*=\s*([\d,\s]+?)\s*", text)
    if not m:
        raise ValueError(f"expected 'C=c1,c2,... D=d1,d2,...', got {text!r}")
    c = [int(x) for x in m.group(1).replace(" ", "").split(",") if x]
    d = [int(x) for x in m.group(2).replace(" ", "").split(",") if x]
    if not c or not d:
        raise ValueError(f"both C and D need at least one entry: {text!r}")
    return c, d


def _emit(report: Report, args) -> None:
    text = to_json(report) + "\n" if args.format == "json" else to_csv(report)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.figures:
        from . import figures

        for path in figures.render(report.to_dict(), args.figures):
            print(f"figure: {path}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="digitlab",
        description="Exact digit-sum statistics and factorial-ratio divisibility scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="empirical vs predicted digit-sum moments")
    p.add_argument("-q", type=parse_count, required=True, help="base (>= 2)")
    p.add_argument("-A", "--multipliers", type=_int_list, required=True,
                   help="comma-separated multipliers, e.g. 1,3")
    p.add_argument("-N", "--n-limit", type=parse_count, required=True,
                   help="scan n in [0, N); accepts 2^20 notation")
    _add_workers_option(p)
    _add_output_options(p)

    p = sub.add_parser("digit-pairs", help="joint digit distribution at two positions")
    p.add_argument("-q", type=parse_count, required=True)
    p.add_argument("--a1", type=parse_count, required=True, help="first multiplier")
    p.add_argument("--a2", type=parse_count, required=True, help="second multiplier")
    p.add_argument("-i", type=int, required=True, help="digit position for A1 n")
    p.add_argument("-j", type=int, required=True, help="digit position for A2 n")
    p.add_argument("-N", "--n-limit", type=parse_count, required=True)
    p.add_argument("-L", "--terms", type=parse_count, default=100_000,
                   help="series truncation for the prediction (default 10^5)")
    _add_workers_option(p)
    _add_output_options(p)

    p = sub.add_parser("clt", help="distance of standardized digit sums to the Gaussian")
    p.add_argument("-q", type=parse_count, required=True)
    p.add_argument("-A", "--multiplier", type=parse_count, default=1)
    p.add_argument("-N", "--n-limit", type=parse_count, required=True)
    p.add_argument("--bins", type=parse_count, default=1,
                   help="lattice coarsening for the CDF comparison (default 1)")
    _add_workers_option(p)
    _add_output_options(p)

    p = sub.add_parser("landau", help="integrality criterion for factorial ratios")
    p.add_argument("sets", help="multiplier multisets, e.g. 'C=1,1 D=2'")
    _add_output_options(p)

    p = sub.add_parser("scan", help="divisibility of S(n) by a prime power or modulus")
    _add_spec_options(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-a", "--alpha", type=parse_count, help="prime-power exponent")
    group.add_argument("-m", "--modulus", type=parse_count, help="composite modulus")
    p.add_argument("-p", type=parse_count, default=None, help="prime (with --alpha)")
    p.add_argument("-N", "--n-limits", type=_count_list, required=True,
                   help="range bound, or comma list for a trend, e.g. 2^6,2^10,2^14")
    p.add_argument("--eta", type=float, default=None,
                   help="also count n with v_p(S(n)) < eta * ln N")
    _add_workers_option(p)
    _add_output_options(p)

    p = sub.add_parser("valuation", help="exact v_p(S(n)) at chosen n")
    _add_spec_options(p)
    p.add_argument("-p", type=parse_count, required=True)
    p.add_argument("-n", "--n-values", type=_count_list, required=True,
                   help="comma-separated n values")
    _add_output_options(p)

    p = sub.add_parser("corpus", help="list the bundled sequence specs")
    p.add_argument("--corpus-file", default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "corpus":
            for name, spec in sequences.load_corpus(args.corpus_file).items():
                print(f"{name} : {sequences.render(spec)}")
            return 0
        if args.command == "moments":
            report = cmd_moments(args.q, args.multipliers, args.n_limit, _resolve_workers(args))
        elif args.command == "digit-pairs":
            report = cmd_digit_pairs(
                args.q, args.a1, args.a2, args.i, args.j,
                args.n_limit, args.terms, _resolve_workers(args),
            )
        elif args.command == "clt":
            report = cmd_clt(args.q, args.multiplier, args.n_limit, args.bins,
                             _resolve_workers(args))
        elif args.command == "landau":
            c, d = _parse_landau_sets(args.sets)
            report = cmd_landau(c, d)
        elif args.command == "scan":
            spec = _resolve_spec(args)
            if args.alpha is not None:
                if args.p is None:
                    parser.error("--alpha needs -p")
                modulus = args.p**args.alpha
            else:
                modulus = args.modulus
            report = cmd_scan(spec, modulus, args.n_limits, args.eta, _resolve_workers(args))
        elif args.command == "valuation":
            spec = _resolve_spec(args)
            report = cmd_valuation(spec, args.p, args.n_values)
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command!r}")
    except KeyboardInterrupt:
        partial = Report(
            schema="digitlab.interrupted/1",
            config={"command": args.command},
            result={},
            incomplete=True,
        )
        sys.stdout.write(to_json(partial) + "\n")
        return 130
    except (sequences.SpecParseError, sequences.SpecValidationError, ValueError) as exc:
        print(f"digitlab: error: {exc}", file=sys.stderr)
        return 2
    _emit(report, args)
    if report.schema == "digitlab.landau/1" and not report.result["passed"]:
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
