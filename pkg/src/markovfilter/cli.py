"""Command-line front end.

Subcommands cover the whole workflow: simulate a chain, filter it, check a
filter's identifiability, estimate parameters from a filtered chain (EM +
supplemented EM + intervals), test hypotheses against a fitted report, and
embed higher-order chains. Exit codes: 0 success, 3 parse error, 4
inconsistent pattern, 5 numerical failure, 6 identifiability unknown
(argparse itself exits 2 on usage errors). All numbers print with 12
significant digits.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import io
from .core import (
    embed_higher_order,
    embedded_support,
    probs_to_theta,
    simulate_chain,
    transition_counts,
)
from .em import run_em
from .errors import (
    ConsistencyError,
    FileFormatError,
    MarkovFilterError,
)
from .filtering import (
    Verdict,
    apply_filter,
    classify_transitions,
    identifiability_verdict,
    reduction_fraction,
    validate_consistency,
)
from .inference import chi_square_test, confidence_interval, z_test
from .sem import run_sem

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_CONSISTENCY = 4
EXIT_NUMERICAL = 5
EXIT_UNIDENTIFIABLE = 6


@dataclass
class RunConfig:
    """Knobs shared by the estimation commands."""

    k: int
    order: int = 1
    blank_token: str = "-"
    tol: float = 1e-12
    sem_tol: float = 1e-6
    max_iter: int = 100_000
    seed: int | None = None
    alpha: float = 0.05

    def __post_init__(self):
        if self.tol <= 0 or self.sem_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.order < 1:
            raise ValueError("order must be at least 1")


def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def _print_matrix(matrix, title: str) -> None:
    matrix = np.asarray(matrix, dtype=float)
    print(title)
    for row in matrix:
        print("  " + "  ".join(_fmt(v) for v in row))


def cmd_simulate(args) -> int:
    P = io.read_probability_csv(args.probabilities)
    seed = 0 if args.seed is None else args.seed
    chain = simulate_chain(P, args.initial, args.n, seed)
    io.write_chain(args.out, chain)
    counts = transition_counts(chain)
    print(f"wrote {len(chain)} states ({chain.n_transitions} transitions) to {args.out}")
    _print_matrix(counts.counts, "transition counts:")
    missing = [
        (i + 1, j + 1)
        for i in range(P.k)
        for j in range(P.k)
        if P.support[i, j] and counts.counts[i, j] == 0
    ]
    for i, j in missing:
        print(
            f"warning: transition {i}->{j} is allowed but never occurred; "
            "estimates from this realization may sit on the boundary"
        )
    return EXIT_OK


def cmd_filter(args) -> int:
    F = io.read_filter_csv(args.filter)
    chain = io.read_chain(args.chain, F.k)
    y = apply_filter(chain, F)
    io.write_filtered_chain(args.out, y, args.blank_token)
    print(f"wrote filtered chain to {args.out}")
    print(f"reduction fraction = {_fmt(reduction_fraction(y))}")
    print("transition visibility:")
    for (i, j), vis in sorted(classify_transitions(chain, F).items()):
        print(f"  {i}->{j}: {vis.value}")
    return EXIT_OK


def cmd_check_filter(args) -> int:
    F = io.read_filter_csv(args.filter)
    support = io.read_support_csv(args.support) if args.support else None
    verdict = identifiability_verdict(F, support)
    print(f"member of one-zero-row/column family: {verdict.in_c1}")
    print(f"member of two-zero-column family:     {verdict.in_c2}")
    print(f"member of two-zero-row family:        {verdict.in_c3}")
    if support is not None:
        print(f"records an allowed transition per row: {verdict.satisfies_r}")
    if verdict.closure_witness is not None:
        _print_matrix(
            verdict.closure_witness.bits.astype(float), "closure witness (filter below this one):"
        )
    print(f"verdict: {verdict.verdict.value}")
    return EXIT_OK if verdict.verdict is Verdict.SUFFICIENT_IDENTIFIABLE else EXIT_UNIDENTIFIABLE


def _estimate_report(config: RunConfig, y, em_result, sem_result, alpha: float) -> dict:
    k = config.k
    probs = em_result.probs
    entries: dict = {
        "estimate.k": k,
        "estimate.n": y.n_transitions,
        "estimate.reduction": reduction_fraction(y),
        "estimate.iterations": em_result.iterations,
        "estimate.converged": em_result.converged,
        "estimate.loglik": em_result.final_observed_loglik,
        "estimate.alpha": alpha,
    }
    for i in range(k):
        for j in range(k):
            entries[f"estimate.theta.{i + 1}.{j + 1}"] = float(probs[i, j])
    if sem_result is not None:
        d = k * (k - 1)
        diag = np.diag(sem_result.v_obs)
        theta = em_result.theta_hat.theta
        for idx in range(d):
            i, j = idx // (k - 1) + 1, idx % (k - 1) + 1
            se = float(np.sqrt(diag[idx])) if diag[idx] > 0 else float("nan")
            entries[f"estimate.se.{i}.{j}"] = se
            if diag[idx] > 0:
                lo, hi = confidence_interval(theta[idx], diag[idx], alpha)
                entries[f"estimate.ci.lo.{i}.{j}"] = lo
                entries[f"estimate.ci.hi.{i}.{j}"] = hi
        for name, mat in (
            ("v_com", sem_result.v_com),
            ("m1", sem_result.m1),
            ("v_obs", sem_result.v_obs),
            ("delta_v", sem_result.delta_v),
        ):
            for a in range(d):
                for b in range(d):
                    entries[f"estimate.{name}.{a + 1}.{b + 1}"] = float(mat[a, b])
        entries["estimate.symmetry"] = sem_result.asymmetry
    return entries


def cmd_estimate(args) -> int:
    F = io.read_filter_csv(args.filter)
    config = RunConfig(
        k=F.k,
        blank_token=args.blank_token,
        tol=args.tol,
        sem_tol=args.sem_tol,
        max_iter=args.max_iter,
        alpha=args.alpha,
    )
    if args.states is not None and args.states != F.k:
        raise FileFormatError(args.filter, f"filter is {F.k}x{F.k} but --states={args.states}")
    y = io.read_filtered_chain(args.filtered, F.k, config.blank_token)
    support = io.read_support_csv(args.support) if args.support else None
    try:
        validate_consistency(y, F, support)
    except ConsistencyError as err:
        print(
            f"error: {err}\nhint: check that the blank token and the filter match the "
            "ones used when the chain was recorded",
            file=sys.stderr,
        )
        return EXIT_CONSISTENCY

    em_result = run_em(
        y, F, tol=config.tol, max_iter=config.max_iter, support=support
    )
    sem_result = None
    if not args.skip_sem:
        try:
            sem_result = run_sem(
                y, F, em_result, sem_tol=config.sem_tol, max_iter=config.max_iter
            )
        except MarkovFilterError as err:
            print(
                f"error: {err}\nhint: the estimate itself is fine; rerun with "
                "--skip-sem to report it without covariances, or collect more "
                "data / record more transitions for usable standard errors",
                file=sys.stderr,
            )
            return EXIT_NUMERICAL

    print(f"EM converged: {em_result.converged} after {em_result.iterations} iterations")
    print(f"observed log-likelihood = {_fmt(em_result.final_observed_loglik)}")
    print(f"reduction fraction = {_fmt(reduction_fraction(y))}")
    _print_matrix(em_result.probs, "estimated transition matrix:")
    if sem_result is not None:
        k = config.k
        diag = np.diag(sem_result.v_obs)
        theta = em_result.theta_hat.theta
        print("parameter  estimate        std.err         ci.lo           ci.hi")
        for idx in range(k * (k - 1)):
            i, j = idx // (k - 1) + 1, idx % (k - 1) + 1
            if diag[idx] > 0:
                se = np.sqrt(diag[idx])
                lo, hi = confidence_interval(theta[idx], diag[idx], config.alpha)
                lo_c, hi_c = max(lo, 0.0), min(hi, 1.0)
                clamp = " *" if (lo_c, hi_c) != (lo, hi) else ""
                print(
                    f"p_{i}{j}       {_fmt(theta[idx]):<15s} {_fmt(se):<15s} "
                    f"{_fmt(lo_c):<15s} {_fmt(hi_c)}{clamp}"
                )
            else:
                print(f"p_{i}{j}       {_fmt(theta[idx]):<15s} (fixed)")
        _print_matrix(sem_result.v_com, "complete-data covariance:")
        _print_matrix(sem_result.m1, "EM-map Jacobian:")
        _print_matrix(sem_result.v_obs, "observed covariance:")
        _print_matrix(sem_result.delta_v, "variance increase from filtering:")
        print(f"symmetry diagnostic = {_fmt(sem_result.asymmetry)}")
        if sem_result.asymmetry > 1e-4:
            print(
                "warning: observed covariance is visibly asymmetric; "
                "tighten --tol/--sem-tol",
                file=sys.stderr,
            )
    entries = _estimate_report(config, y, em_result, sem_result, config.alpha)
    if args.out:
        io.write_kv_report(args.out, entries)
        print(f"wrote report to {args.out}")
    else:
        print("report:")
        for key, value in entries.items():
            text = _fmt(value) if isinstance(value, float) else str(value)
            print(f"{key} = {text}")
    return EXIT_OK


def cmd_test(args) -> int:
    report = io.read_kv_report(args.report)
    try:
        k = int(report["estimate.k"])
        probs_hat = np.array(
            [
                [float(report[f"estimate.theta.{i + 1}.{j + 1}"]) for j in range(k)]
                for i in range(k)
            ]
        )
        d = k * (k - 1)
        v = np.array(
            [
                [float(report[f"estimate.v_obs.{a + 1}.{b + 1}"]) for b in range(d)]
                for a in range(d)
            ]
        )
    except KeyError as err:
        raise FileFormatError(args.report, f"missing report key {err}")
    P0 = io.read_probability_csv(args.null)
    if P0.k != k:
        raise FileFormatError(args.null, f"expected a {k}x{k} matrix")
    theta_hat = probs_to_theta(probs_hat)
    theta0 = probs_to_theta(P0.probs)

    overall = chi_square_test(theta_hat, theta0, v, alphas=(args.alpha,))
    print(f"chi-square statistic = {_fmt(overall.statistic)}")
    print(f"degrees of freedom   = {overall.df} (k*k = {k * k} under the looser convention)")
    print(f"p-value              = {_fmt(overall.p_value)}")
    decision = "reject" if overall.reject_at[args.alpha] else "fail to reject"
    print(f"decision at alpha={_fmt(args.alpha)}: {decision}")
    print("per-parameter z tests:")
    diag = np.diag(v)
    for idx in range(d):
        i, j = idx // (k - 1) + 1, idx % (k - 1) + 1
        if diag[idx] <= 0:
            print(f"  p_{i}{j}: variance not positive, skipped")
            continue
        rep = z_test(theta_hat[idx], theta0[idx], diag[idx], alphas=(args.alpha,))
        flag = " (reject)" if rep.reject_at[args.alpha] else ""
        print(f"  p_{i}{j}: z = {_fmt(rep.statistic)}, p = {_fmt(rep.p_value)}{flag}")
    return EXIT_OK


def cmd_embed(args) -> int:
    if args.order < 2:
        raise ValueError("--order must be at least 2 for embedding")
    chain = io.read_chain(args.chain, args.states)
    embedded = embed_higher_order(chain, args.order)
    io.write_chain(args.out, embedded)
    mask = embedded_support(args.states, args.order)
    io.write_matrix_csv(args.support_out, mask)
    print(
        f"wrote {len(embedded)} tuple states over {args.states ** args.order} labels "
        f"to {args.out}"
    )
    print(f"wrote embedded support mask ({int(mask.sum())} allowed transitions) to {args.support_out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markovfilter",
        description="Record only chosen Markov-chain transitions, verify the filter "
        "keeps the parameters identifiable, and estimate them from the blanked chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a chain from a transition matrix")
    p.add_argument("probabilities", help="CSV transition matrix")
    p.add_argument("--initial", type=int, required=True, help="initial state (1-based)")
    p.add_argument("--n", type=int, required=True, help="number of transitions")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output chain file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="apply a filter matrix to a chain")
    p.add_argument("chain", help="chain file")
    p.add_argument("filter", help="CSV 0/1 filter matrix")
    p.add_argument("--blank-token", default="-")
    p.add_argument("--out", required=True, help="output filtered-chain file")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("check-filter", help="decide the sufficient identifiability conditions")
    p.add_argument("filter", help="CSV 0/1 filter matrix")
    p.add_argument("--support", help="CSV 0/1 structural-support mask")
    p.set_defaults(func=cmd_check_filter)

    p = sub.add_parser("estimate", help="EM + supplemented-EM estimation from a filtered chain")
    p.add_argument("filtered", help="filtered-chain file")
    p.add_argument("filter", help="CSV 0/1 filter matrix")
    p.add_argument("--states", type=int, default=None, help="number of states (checked against the filter)")
    p.add_argument("--blank-token", default="-")
    p.add_argument("--tol", type=float, default=1e-12, help="EM convergence tolerance")
    p.add_argument("--sem-tol", type=float, default=1e-6, help="Jacobian ratio tolerance")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--alpha", type=float, default=0.05, help="level for the intervals")
    p.add_argument("--support", help="CSV 0/1 structural-support mask")
    p.add_argument("--skip-sem", action="store_true", help="report the estimate only")
    p.add_argument("--out", help="write the machine-readable report here")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("test", help="chi-square and z tests against a fitted report")
    p.add_argument("report", help="report written by estimate --out")
    p.add_argument("null", help="CSV transition matrix under the null")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("embed", help="re-express an order-s chain over tuple states")
    p.add_argument("chain", help="chain file")
    p.add_argument("--states", type=int, required=True, help="number of base states")
    p.add_argument("--order", type=int, required=True, help="chain order s >= 2")
    p.add_argument("--out", required=True, help="output embedded-chain file")
    p.add_argument("--support-out", required=True, help="output support-mask CSV")
    p.set_defaults(func=cmd_embed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except ConsistencyError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except MarkovFilterError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
