"""EM estimation of transition probabilities from a filtered chain.

The observed data decompose into adjacent observed pairs (known transitions)
and gaps (maximal blank runs). Conditional on its endpoints, a gap's hidden
path moves only along unrecorded transitions, so its law is governed by
powers of the matrix P0 that keeps p_ij where f_ij = 0 and zeroes the rest.
The E-step adds, for every gap edge, the conditional probability of each
(alpha, beta) move; the M-step row-normalizes the expected counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CountMatrix,
    ParamVector,
    StateSpace,
    TransitionMatrix,
    probs_to_theta,
    theta_to_probs,
)
from .errors import NonFiniteError, ZeroDenominatorError, ZeroRowTotalError
from .filtering import FilteredChain, FilterMatrix, _iter_segments, validate_consistency


@dataclass(frozen=True)
class SplitMatrices:
    """P split along the filter: p0 keeps unrecorded entries (f_ij = 0),
    p1 keeps recorded ones; p0 + p1 = P entrywise."""

    p0: np.ndarray
    p1: np.ndarray

    @property
    def k(self) -> int:
        return self.p0.shape[0]


@dataclass(frozen=True)
class GapSegment:
    """A maximal blank run: ``length`` transitions starting at observed state
    ``prev_state``; ``next_state`` is the observed endpoint or None when the
    chain ends inside the gap (``length`` trailing blanks)."""

    prev_state: int
    length: int
    next_state: int | None


@dataclass(frozen=True)
class EMResult:
    theta_hat: ParamVector
    iterations: int
    converged: bool
    final_observed_loglik: float
    expected_counts: CountMatrix
    loglik_trace: tuple

    @property
    def probs(self) -> np.ndarray:
        return self.theta_hat.to_probs()


def split_p(P, F: FilterMatrix) -> SplitMatrices:
    probs = P.probs if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)
    if probs.shape != F.bits.shape:
        raise ValueError("matrix and filter dimensions disagree")
    p1 = np.where(F.bits, probs, 0.0)
    p0 = np.where(F.bits, 0.0, probs)
    return SplitMatrices(p0=p0, p1=p1)


def unobserved_step_probs(S: SplitMatrices, nu: int) -> np.ndarray:
    """(P0)^nu: entry (i, j) is the probability of reaching j from i in nu
    steps along unrecorded transitions only; nu = 0 gives the identity."""
    if nu < 0:
        raise ValueError("step count must be nonnegative")
    return np.linalg.matrix_power(S.p0, nu)


def segment_chain(y: FilteredChain):
    """Split the pattern's transitions into adjacent observed pairs and
    gaps; together they cover all n transitions exactly once."""
    pairs = []
    gaps = []
    for kind, _pos, seg in _iter_segments(y):
        if kind == "pair":
            pairs.append(seg)
        else:
            a, nu, b = seg
            gaps.append(GapSegment(a, nu, b))
    return pairs, gaps


def _power_table(p0: np.ndarray, nu_max: int):
    powers = [np.eye(p0.shape[0])]
    for _ in range(nu_max):
        powers.append(powers[-1] @ p0)
    return powers


def _gap_weights(gap: GapSegment, p0: np.ndarray, powers) -> np.ndarray:
    """Expected transition counts contributed by one gap, total mass nu."""
    nu = gap.length
    a = gap.prev_state - 1
    if gap.next_state is None:
        denom = powers[nu][a].sum()
        if denom <= 0.0:
            raise ZeroDenominatorError(
                f"no unrecorded continuation of length {nu} from state {gap.prev_state}"
            )
        lead = np.stack([powers[m][a] for m in range(nu)])
        trail = np.stack([powers[nu - 1 - m].sum(axis=1) for m in range(nu)])
    else:
        b = gap.next_state - 1
        denom = powers[nu][a, b]
        if denom <= 0.0:
            raise ZeroDenominatorError(
                f"no unrecorded path of length {nu} from state {gap.prev_state} "
                f"to state {gap.next_state}"
            )
        lead = np.stack([powers[m][a] for m in range(nu)])
        trail = np.stack([powers[nu - 1 - m][:, b] for m in range(nu)])
    return (lead.T @ trail) * p0 / denom


def gap_expected_counts(gap: GapSegment, S: SplitMatrices) -> CountMatrix:
    """Conditional expected counts of each transition inside one gap.

    For an interior gap (a, nu, b) and edge index m, a move alpha -> beta
    contributes P0^m[a, alpha] * P0[alpha, beta] * P0^(nu-1-m)[beta, b]
    over P0^nu[a, b]; trailing gaps replace the b-column with row sums.
    """
    powers = _power_table(S.p0, gap.length)
    return CountMatrix(_gap_weights(gap, S.p0, powers))


class _Segments:
    """Grouped, reusable decomposition of one filtered chain.

    Grouping identical (a, nu, b) gaps lets every EM iteration pay per gap
    *type* rather than per gap occurrence.
    """

    __slots__ = ("k", "n", "pair_counts", "pair_mask", "gap_groups", "nu_max")

    def __init__(self, y: FilteredChain):
        k = y.space.k
        pair_counts = np.zeros((k, k))
        gap_groups: dict = {}
        for kind, _pos, seg in _iter_segments(y):
            if kind == "pair":
                a, b = seg
                pair_counts[a - 1, b - 1] += 1.0
            else:
                gap_groups[seg] = gap_groups.get(seg, 0) + 1
        self.k = k
        self.n = y.n_transitions
        self.pair_counts = pair_counts
        self.pair_mask = pair_counts > 0
        self.gap_groups = gap_groups
        self.nu_max = max((nu for (_a, nu, _b) in gap_groups), default=0)

    def expected_counts(self, probs: np.ndarray, bits: np.ndarray):
        """(expected counts, observed log-likelihood) at the given parameters."""
        p0 = np.where(bits, 0.0, probs)
        powers = _power_table(p0, self.nu_max)
        counts = self.pair_counts.copy()
        if self.pair_mask.any():
            pair_probs = probs[self.pair_mask]
            if np.any(pair_probs <= 0.0):
                loglik = -np.inf
            else:
                loglik = float(
                    (self.pair_counts[self.pair_mask] * np.log(pair_probs)).sum()
                )
        else:
            loglik = 0.0
        for (a, nu, b), mult in self.gap_groups.items():
            gap = GapSegment(a, nu, b)
            weights = _gap_weights(gap, p0, powers)
            counts += mult * weights
            ai = a - 1
            denom = powers[nu][ai].sum() if b is None else powers[nu][ai, b - 1]
            loglik += mult * float(np.log(denom))
        return counts, loglik

    def loglik(self, probs: np.ndarray, bits: np.ndarray) -> float:
        """Observed log-likelihood only; -inf instead of an error when a
        factor vanishes."""
        p0 = np.where(bits, 0.0, probs)
        powers = _power_table(p0, self.nu_max)
        with np.errstate(divide="ignore"):
            total = 0.0
            if self.pair_mask.any():
                pair_probs = probs[self.pair_mask]
                if np.any(pair_probs <= 0.0):
                    return -np.inf
                total += float(
                    (self.pair_counts[self.pair_mask] * np.log(pair_probs)).sum()
                )
            for (a, nu, b), mult in self.gap_groups.items():
                ai = a - 1
                denom = powers[nu][ai].sum() if b is None else powers[nu][ai, b - 1]
                if denom <= 0.0:
                    return -np.inf
                total += mult * float(np.log(denom))
        return total


def _as_probs(theta, k: int) -> np.ndarray:
    if isinstance(theta, ParamVector):
        return theta.to_probs()
    theta = np.asarray(theta, dtype=float)
    if theta.shape == (k, k):
        return theta
    return theta_to_probs(theta, k)


def e_step(y: FilteredChain, theta, F: FilterMatrix) -> CountMatrix:
    """Conditional expected transition counts given the pattern; observed
    pairs contribute one count each, gaps their conditional expectations.
    The total equals the number of transitions n."""
    seg = _Segments(y)
    counts, _ = seg.expected_counts(_as_probs(theta, y.space.k), F.bits)
    return CountMatrix(counts)


def m_step(E: CountMatrix) -> ParamVector:
    """Row-normalize expected counts; raises when a state gathered no mass."""
    counts = E.counts if isinstance(E, CountMatrix) else np.asarray(E, dtype=float)
    rowsums = counts.sum(axis=1)
    for i, total in enumerate(rowsums):
        if total <= 0.0:
            raise ZeroRowTotalError(i + 1)
    probs = counts / rowsums[:, None]
    return ParamVector(probs_to_theta(probs), StateSpace(counts.shape[0]))


def observed_loglik(y: FilteredChain, theta, F: FilterMatrix) -> float:
    """Exact log-probability of the pattern: observed pairs contribute
    log p_ab, interior gaps log of the unrecorded-path mass, trailing gaps
    log of the unrecorded continuation mass. Returns -inf when a factor
    vanishes."""
    seg = _Segments(y)
    return seg.loglik(_as_probs(theta, y.space.k), F.bits)


def _uniform_start(k: int, support) -> np.ndarray:
    if support is None:
        probs = np.full((k, k), 1.0 / k)
    else:
        support = np.asarray(support, dtype=bool)
        probs = support / support.sum(axis=1, keepdims=True)
    return probs


def run_em(
    y: FilteredChain,
    F: FilterMatrix,
    theta0=None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    support=None,
) -> EMResult:
    """Iterate E and M steps until the parameter max-change drops below
    ``tol``. The default start is uniform over each row's support. The
    returned expected counts and log-likelihood are evaluated at the
    estimate itself, and ``loglik_trace`` holds the log-likelihood of every
    iterate (non-decreasing, up to roundoff)."""
    k = y.space.k
    if F.k != k:
        raise ValueError("filter and pattern dimensions disagree")
    validate_consistency(y, F, support)
    seg = _Segments(y)
    probs = _uniform_start(k, support) if theta0 is None else _as_probs(theta0, k)
    if support is not None and np.any(probs[~np.asarray(support, dtype=bool)] != 0.0):
        raise ValueError("starting point puts mass on a structural zero")

    trace = []
    theta = probs_to_theta(probs)
    converged = False
    iterations = 0
    for _ in range(max_iter):
        counts, loglik = seg.expected_counts(probs, F.bits)
        if not np.isfinite(loglik):
            raise NonFiniteError("observed log-likelihood is not finite")
        trace.append(loglik)
        rowsums = counts.sum(axis=1)
        for i, total in enumerate(rowsums):
            if total <= 0.0:
                raise ZeroRowTotalError(i + 1)
        new_probs = counts / rowsums[:, None]
        new_theta = probs_to_theta(new_probs)
        iterations += 1
        delta = float(np.max(np.abs(new_theta - theta)))
        probs, theta = new_probs, new_theta
        if delta < tol:
            converged = True
            break

    counts_hat, loglik_hat = seg.expected_counts(probs, F.bits)
    if not np.isfinite(loglik_hat):
        raise NonFiniteError("observed log-likelihood is not finite")
    trace.append(loglik_hat)
    return EMResult(
        theta_hat=ParamVector(theta, StateSpace(k)),
        iterations=iterations,
        converged=converged,
        final_observed_loglik=loglik_hat,
        expected_counts=CountMatrix(counts_hat),
        loglik_trace=tuple(trace),
    )
