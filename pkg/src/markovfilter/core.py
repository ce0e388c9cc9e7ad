"""State spaces, complete chains, simulation, transition counting, the
complete-data MLE, and the embedding of higher-order chains.

States are labeled 1..k everywhere a user sees them; arrays are indexed
0-based internally. All value types are immutable after construction and
safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChainTooShortError, ZeroRowTotalError

ROW_SUM_TOL = 1e-12


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Finite state space {1, ..., k}."""

    k: int

    def __post_init__(self):
        if int(self.k) < 2:
            raise ValueError(f"need at least two states, got k={self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def labels(self) -> range:
        return range(1, self.k + 1)


@dataclass(frozen=True)
class CompleteChain:
    """A fully observed realization: n+1 states, n transitions."""

    states: tuple
    space: StateSpace

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise ChainTooShortError("a chain needs at least two states")
        k = self.space.k
        for pos, s in enumerate(states):
            if not 1 <= s <= k:
                raise ValueError(f"state {s} at position {pos} outside 1..{k}")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def n_transitions(self) -> int:
        return len(self.states) - 1

    def as_indices(self) -> np.ndarray:
        """0-based state indices, shape (n+1,)."""
        return np.asarray(self.states, dtype=np.intp) - 1


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic transition probabilities with an explicit support mask.

    ``support[i, j]`` marks transitions allowed to be positive; entries off
    the support are structural zeros fixed before any data are collected.
    Every row and every column of the support must contain at least one
    allowed transition.
    """

    probs: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        probs = _readonly(self.probs, float)
        support = _readonly(self.support, bool)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "support", support)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
            raise ValueError(f"probs must be square, got shape {probs.shape}")
        if support.shape != probs.shape:
            raise ValueError("support mask shape differs from probs")
        if probs.shape[0] < 2:
            raise ValueError("need at least two states")
        if np.any(probs < -ROW_SUM_TOL):
            raise ValueError("negative transition probability")
        rowsums = probs.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > ROW_SUM_TOL):
            bad = int(np.argmax(np.abs(rowsums - 1.0)))
            raise ValueError(f"row {bad + 1} sums to {rowsums[bad]!r}, not 1")
        if np.any(probs[~support] != 0.0):
            raise ValueError("positive probability on a structural zero")
        if np.any(~support.any(axis=1)) or np.any(~support.any(axis=0)):
            raise ValueError("support must allow a transition in every row and column")

    @classmethod
    def from_probs(cls, probs, support=None) -> "TransitionMatrix":
        probs = np.asarray(probs, dtype=float)
        if support is None:
            support = np.ones_like(probs, dtype=bool)
        return cls(probs, np.asarray(support, dtype=bool))

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    @property
    def space(self) -> StateSpace:
        return StateSpace(self.k)

    def theta(self) -> "ParamVector":
        return ParamVector(probs_to_theta(self.probs), self.space)


def theta_to_probs(theta: np.ndarray, k: int) -> np.ndarray:
    """Expand the free-parameter layout (row-major, last column omitted)
    into a full k x k matrix with p_ik = 1 - sum of the row's stored entries."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (k * (k - 1),):
        raise ValueError(f"expected {k * (k - 1)} parameters, got shape {theta.shape}")
    probs = np.empty((k, k), dtype=float)
    probs[:, : k - 1] = theta.reshape(k, k - 1)
    probs[:, k - 1] = 1.0 - probs[:, : k - 1].sum(axis=1)
    return probs


def probs_to_theta(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    return probs[:, :-1].reshape(-1).copy()


@dataclass(frozen=True)
class ParamVector:
    """Free transition parameters: d = k^2 - k reals, row-major with each
    row's last column omitted. Bijective with TransitionMatrix via
    p_ik = 1 - sum of the row's stored entries."""

    theta: np.ndarray
    space: StateSpace

    def __post_init__(self):
        theta = _readonly(self.theta, float)
        object.__setattr__(self, "theta", theta)
        k = self.space.k
        if theta.shape != (k * (k - 1),):
            raise ValueError(
                f"expected {k * (k - 1)} parameters for k={k}, got shape {theta.shape}"
            )
        if np.any(theta < -ROW_SUM_TOL) or np.any(theta > 1.0 + ROW_SUM_TOL):
            raise ValueError("parameter outside [0, 1]")
        partial = theta.reshape(k, k - 1).sum(axis=1)
        if np.any(partial > 1.0 + 1e-9):
            bad = int(np.argmax(partial))
            raise ValueError(f"row {bad + 1} stored entries sum to {partial[bad]!r} > 1")

    @property
    def k(self) -> int:
        return self.space.k

    @property
    def d(self) -> int:
        return self.space.k * (self.space.k - 1)

    def to_probs(self) -> np.ndarray:
        return theta_to_probs(self.theta, self.k)

    def to_matrix(self, support=None) -> TransitionMatrix:
        return TransitionMatrix.from_probs(self.to_probs(), support)

    @classmethod
    def from_matrix(cls, P: TransitionMatrix) -> "ParamVector":
        return cls(probs_to_theta(P.probs), P.space)


@dataclass(frozen=True)
class CountMatrix:
    """k x k nonnegative transition counts; integer-valued for complete data,
    real-valued for conditional expected counts."""

    counts: np.ndarray

    def __post_init__(self):
        counts = _readonly(self.counts, float)
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"counts must be square, got shape {counts.shape}")
        if np.any(counts < -1e-9):
            raise ValueError("negative transition count")

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def simulate_chain(P: TransitionMatrix, initial: int, n: int, seed: int) -> CompleteChain:
    """Draw n transitions starting from ``initial``; deterministic per seed."""
    k = P.k
    if not 1 <= initial <= k:
        raise ValueError(f"initial state {initial} outside 1..{k}")
    if n < 1:
        raise ValueError("need at least one transition")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(P.probs, axis=1)
    draws = rng.random(n)
    states = np.empty(n + 1, dtype=np.intp)
    states[0] = initial - 1
    cur = initial - 1
    for t in range(n):
        cur = min(int(np.searchsorted(cum[cur], draws[t], side="right")), k - 1)
        states[t + 1] = cur
    return CompleteChain(tuple(int(s) + 1 for s in states), StateSpace(k))


def transition_counts(x: CompleteChain) -> CountMatrix:
    """Count adjacent (i, j) pairs; the total equals the transition count n."""
    k = x.space.k
    idx = x.as_indices()
    counts = np.zeros((k, k), dtype=float)
    np.add.at(counts, (idx[:-1], idx[1:]), 1.0)
    return CountMatrix(counts)


def complete_mle(N: CountMatrix, support=None) -> TransitionMatrix:
    """Row-normalize the counts: p_ij = n_ij / n_i. Every state must occur
    as a source at least once."""
    counts = N.counts
    rowsums = counts.sum(axis=1)
    for i, total in enumerate(rowsums):
        if total <= 0:
            raise ZeroRowTotalError(i + 1)
    return TransitionMatrix.from_probs(counts / rowsums[:, None], support)


def encode_tuple_state(tup, k: int) -> int:
    """Label a state tuple by base-k positional encoding, oldest coordinate
    most significant; labels run 1..k**s."""
    code = 0
    for a in tup:
        a = int(a)
        if not 1 <= a <= k:
            raise ValueError(f"coordinate {a} outside 1..{k}")
        code = code * k + (a - 1)
    return code + 1


def decode_tuple_state(label: int, k: int, s: int) -> tuple:
    code = int(label) - 1
    if not 0 <= code < k**s:
        raise ValueError(f"label {label} outside 1..{k**s}")
    out = []
    for _ in range(s):
        out.append(code % k + 1)
        code //= k
    return tuple(reversed(out))


def embed_higher_order(x: CompleteChain, s: int) -> CompleteChain:
    """Re-express an order-s chain as a simple chain over k**s tuple states
    Y_t = (X_t, ..., X_{t+s-1}); output length is len(x) - s + 1."""
    if s < 2:
        raise ValueError("embedding order must be at least 2")
    if len(x) < s + 1:
        raise ChainTooShortError(
            f"chain of length {len(x)} too short for order {s} (need {s + 1})"
        )
    k = x.space.k
    labels = tuple(
        encode_tuple_state(x.states[t : t + s], k) for t in range(len(x) - s + 1)
    )
    return CompleteChain(labels, StateSpace(k**s))


def embedded_support(k: int, s: int) -> np.ndarray:
    """Support mask of the tuple-state chain: a transition is allowed exactly
    when the target tuple's first s-1 coordinates equal the source tuple's
    last s-1 coordinates; k**(s+1) entries are allowed."""
    if s < 2:
        raise ValueError("embedding order must be at least 2")
    K = k**s
    mask = np.zeros((K, K), dtype=bool)
    tail = k ** (s - 1)
    for a in range(K):
        base = (a % tail) * k
        mask[a, base : base + k] = True
    return mask


def project_embedded_params(P_emb: TransitionMatrix, s: int) -> dict:
    """Read the order-s transition probabilities back out of an embedded
    matrix: key (a_1, ..., a_s, a_{s+1}) maps to the probability of moving
    to a_{s+1} given the history (a_1, ..., a_s)."""
    K = P_emb.k
    k = round(K ** (1.0 / s))
    if k**s != K:
        raise ValueError(f"matrix of size {K} is not a {s}-fold tuple space")
    tail = k ** (s - 1)
    out = {}
    for a in range(K):
        history = decode_tuple_state(a + 1, k, s)
        base = (a % tail) * k
        for b in range(k):
            out[history + (b + 1,)] = float(P_emb.probs[a, base + b])
    return out
