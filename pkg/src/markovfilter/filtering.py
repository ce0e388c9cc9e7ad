"""Filter matrices: applying them to chains, classifying transitions, and
deciding the sufficient identifiability conditions.

A filter matrix F records transition i -> j exactly when f_ij = 1. Applying
it to a complete chain blanks every state not adjacent to a recorded
transition (the initial state is always revealed). The identifiability
checker searches for a witness filter D below F that belongs to one of the
three structured families known to keep all transition probabilities
identifiable; data reduced by any filter above such a D stays estimable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import CompleteChain, StateSpace, _readonly
from .errors import ConsistencyError

#: Placeholder for a hidden state inside a filtered chain.
BLANK = None


@dataclass(frozen=True)
class FilterMatrix:
    """Binary k x k matrix; bit (i, j) set means transition i -> j is stored."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.dtype != bool:
            if not np.isin(bits, (0, 1)).all():
                raise ValueError("filter entries must be 0 or 1")
            bits = bits.astype(bool)
        bits = _readonly(bits, bool)
        object.__setattr__(self, "bits", bits)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1] or bits.shape[0] < 2:
            raise ValueError(f"filter must be square of size >= 2, got {bits.shape}")

    @property
    def k(self) -> int:
        return self.bits.shape[0]

    @classmethod
    def all_ones(cls, k: int) -> "FilterMatrix":
        return cls(np.ones((k, k), dtype=bool))

    @classmethod
    def all_zeros(cls, k: int) -> "FilterMatrix":
        return cls(np.zeros((k, k), dtype=bool))


@dataclass(frozen=True)
class FilteredChain:
    """Sequence of observed states and blanks produced by a filter.

    The first symbol is always observed (the initial state is known).
    ``symbols`` holds 1-based state labels with ``None`` for blanks.
    """

    symbols: tuple
    space: StateSpace

    def __post_init__(self):
        symbols = tuple(None if s is None else int(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 2:
            raise ValueError("a filtered chain needs at least two symbols")
        if symbols[0] is None:
            raise ValueError("the initial state must be observed")
        k = self.space.k
        for pos, s in enumerate(symbols):
            if s is not None and not 1 <= s <= k:
                raise ValueError(f"state {s} at position {pos} outside 1..{k}")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def n_transitions(self) -> int:
        return len(self.symbols) - 1

    @property
    def blank_count(self) -> int:
        return sum(1 for s in self.symbols if s is None)

    def tokens(self, blank_token: str = "-") -> list:
        return [blank_token if s is None else str(s) for s in self.symbols]

    def to_text(self, blank_token: str = "-", sep: str = " ") -> str:
        return sep.join(self.tokens(blank_token))


class TransitionVisibility(enum.Enum):
    DIRECT = "directly recorded"
    INDIRECT = "indirectly recorded"
    UNOBSERVED = "unobserved"


class Verdict(enum.Enum):
    SUFFICIENT_IDENTIFIABLE = "sufficient-identifiable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class IdentifiabilityVerdict:
    """Outcome of the sufficient-condition checks for one filter.

    ``verdict`` is SUFFICIENT_IDENTIFIABLE exactly when a closure witness
    exists (one that also meets the per-row restriction R when a support
    mask with structural zeros is supplied). UNKNOWN is not a proof of
    non-identifiability; it only means the sufficient conditions fail.
    """

    in_c1: bool
    in_c2: bool
    in_c3: bool
    closure_witness: FilterMatrix | None
    satisfies_r: bool
    verdict: Verdict


def apply_filter(x: CompleteChain, F: FilterMatrix) -> FilteredChain:
    """Blank every state of x not adjacent to a recorded transition.

    Position p stays observed iff p = 0, or the transition into p is
    recorded, or the transition out of p is recorded.
    """
    if F.k != x.space.k:
        raise ValueError(f"filter is {F.k}x{F.k} but the chain has k={x.space.k}")
    idx = x.as_indices()
    recorded = F.bits[idx[:-1], idx[1:]]
    n = len(idx) - 1
    symbols = []
    for p, state in enumerate(x.states):
        observed = p == 0 or (p > 0 and recorded[p - 1]) or (p < n and recorded[p])
        symbols.append(state if observed else None)
    return FilteredChain(tuple(symbols), x.space)


def classify_transitions(x: CompleteChain, F: FilterMatrix) -> dict:
    """Classify every transition occurring in x as directly recorded
    (f_ij = 1), indirectly recorded (f_ij = 0 but both endpoints of some
    occurrence survive filtering), or unobserved."""
    y = apply_filter(x, F)
    observed = [s is not None for s in y.symbols]
    out: dict = {}
    for t in range(x.n_transitions):
        i, j = x.states[t], x.states[t + 1]
        if F.bits[i - 1, j - 1]:
            out[(i, j)] = TransitionVisibility.DIRECT
        elif observed[t] and observed[t + 1]:
            out[(i, j)] = TransitionVisibility.INDIRECT
        else:
            out.setdefault((i, j), TransitionVisibility.UNOBSERVED)
    return out


def dominates(M: FilterMatrix, H: FilterMatrix) -> bool:
    """True iff M stores at least the transitions H stores (h_ij=1 => m_ij=1)."""
    if M.k != H.k:
        raise ValueError("filters must have the same size")
    return bool(np.all(M.bits | ~H.bits))


def reduction_fraction(y: FilteredChain) -> float:
    """Fraction of symbols discarded by the filter."""
    return y.blank_count / len(y)


def in_class_c1(F: FilterMatrix):
    """Witness (alpha, beta), 1-based, iff row alpha and column beta are zero
    and every other row and column holds exactly one 1; None otherwise."""
    bits = F.bits
    k = F.k
    row_ones = bits.sum(axis=1)
    col_ones = bits.sum(axis=0)
    for a in range(k):
        if row_ones[a] != 0:
            continue
        for b in range(k):
            if col_ones[b] != 0:
                continue
            rows_ok = all(row_ones[r] == 1 for r in range(k) if r != a)
            cols_ok = all(col_ones[c] == 1 for c in range(k) if c != b)
            if rows_ok and cols_ok:
                return (a + 1, b + 1)
    return None


def _is_permutation(sub: np.ndarray) -> bool:
    if sub.size == 0:
        return True
    return bool(np.all(sub.sum(axis=1) == 1) and np.all(sub.sum(axis=0) == 1))


def in_class_c2(F: FilterMatrix):
    """Witness (alpha, beta), 1-based with alpha < beta, iff columns alpha and
    beta are zero, rows alpha and beta are all ones outside {alpha, beta}, and
    the remaining (k-2)x(k-2) submatrix is a permutation matrix."""
    bits = F.bits
    k = F.k
    if k < 3:
        return None
    col_ones = bits.sum(axis=0)
    for a in range(k):
        if col_ones[a] != 0:
            continue
        for b in range(a + 1, k):
            if col_ones[b] != 0:
                continue
            outside = [c for c in range(k) if c not in (a, b)]
            if not (bits[a, outside].all() and bits[b, outside].all()):
                continue
            sub = bits[np.ix_(outside, outside)]
            if _is_permutation(sub):
                return (a + 1, b + 1)
    return None


def in_class_c3(F: FilterMatrix):
    """Transpose condition of the two-zero-column class: rows alpha, beta zero,
    columns alpha, beta all ones outside {alpha, beta}, remaining submatrix a
    permutation."""
    return in_class_c2(FilterMatrix(F.bits.T))


def _augmenting_matching(adj: np.ndarray):
    """Maximum bipartite matching by augmenting paths.

    ``adj`` is rows x cols boolean. Returns (size, match_row) where
    match_row[r] is the matched column of row r or -1.
    """
    n_rows, n_cols = adj.shape
    match_col = np.full(n_cols, -1, dtype=int)

    def try_assign(r: int, seen: np.ndarray) -> bool:
        for c in range(n_cols):
            if adj[r, c] and not seen[c]:
                seen[c] = True
                if match_col[c] == -1 or try_assign(match_col[c], seen):
                    match_col[c] = r
                    return True
        return False

    size = 0
    for r in range(n_rows):
        if try_assign(r, np.zeros(n_cols, dtype=bool)):
            size += 1
    match_row = np.full(n_rows, -1, dtype=int)
    for c, r in enumerate(match_col):
        if r >= 0:
            match_row[r] = c
    return size, match_row


def _c1_closure_witness(F: FilterMatrix):
    bits = F.bits
    k = F.k
    for a in range(k):
        rows = [r for r in range(k) if r != a]
        for b in range(k):
            cols = [c for c in range(k) if c != b]
            size, match_row = _augmenting_matching(bits[np.ix_(rows, cols)])
            if size == k - 1:
                wit = np.zeros((k, k), dtype=bool)
                for ri, r in enumerate(rows):
                    wit[r, cols[match_row[ri]]] = True
                return FilterMatrix(wit)
    return None


def _c2_closure_witness(F: FilterMatrix, support):
    bits = F.bits
    k = F.k
    if k < 3:
        return None
    edges = bits if support is None else bits & support
    for a in range(k):
        for b in range(a + 1, k):
            outside = [c for c in range(k) if c not in (a, b)]
            if not (bits[a, outside].all() and bits[b, outside].all()):
                continue
            if support is not None and not (
                support[a, outside].any() and support[b, outside].any()
            ):
                # rows a and b would observe no allowed transition
                continue
            size, match_row = _augmenting_matching(edges[np.ix_(outside, outside)])
            if size == k - 2:
                wit = np.zeros((k, k), dtype=bool)
                wit[a, outside] = True
                wit[b, outside] = True
                for ri, r in enumerate(outside):
                    wit[r, outside[match_row[ri]]] = True
                return FilterMatrix(wit)
    return None


def _c3_closure_witness(F: FilterMatrix):
    wit = _c2_closure_witness(FilterMatrix(F.bits.T), None)
    if wit is None:
        return None
    return FilterMatrix(wit.bits.T)


def closure_witness(F: FilterMatrix, support=None):
    """Search for a filter D below F (D's ones a subset of F's) belonging to
    one of the three identifiable families; with a support mask, D must also
    observe at least one allowed transition per row (restriction R).

    The search enumerates the O(k^2) candidate (alpha, beta) pairs and runs
    an augmenting-path matching per candidate, so it is exact and polynomial.
    Returns None when no witness exists.
    """
    if support is not None:
        support = np.asarray(support, dtype=bool)
        if support.shape != F.bits.shape:
            raise ValueError("support mask shape differs from the filter")
        # The one-zero-row and two-zero-row families cannot observe anything
        # in their zero rows, so restriction R rules them out entirely.
        return _c2_closure_witness(F, support)
    wit = _c1_closure_witness(F)
    if wit is not None:
        return wit
    wit = _c2_closure_witness(F, None)
    if wit is not None:
        return wit
    return _c3_closure_witness(F)


def satisfies_r(F: FilterMatrix, support) -> bool:
    """True iff every row records at least one transition the support allows."""
    support = np.asarray(support, dtype=bool)
    if support.shape != F.bits.shape:
        raise ValueError("support mask shape differs from the filter")
    if np.any(~support.any(axis=1)) or np.any(~support.any(axis=0)):
        raise ValueError("support must allow a transition in every row and column")
    return bool((F.bits & support).any(axis=1).all())


def identifiability_verdict(F: FilterMatrix, support=None) -> IdentifiabilityVerdict:
    """Assemble class memberships and the closure-witness search into a
    verdict. SUFFICIENT_IDENTIFIABLE is a proof; UNKNOWN only means the
    sufficient conditions checked here do not apply."""
    wit = closure_witness(F, support)
    r_ok = True if support is None else satisfies_r(F, support)
    return IdentifiabilityVerdict(
        in_c1=in_class_c1(F) is not None,
        in_c2=in_class_c2(F) is not None,
        in_c3=in_class_c3(F) is not None,
        closure_witness=wit,
        satisfies_r=r_ok,
        verdict=Verdict.SUFFICIENT_IDENTIFIABLE if wit is not None else Verdict.UNKNOWN,
    )


def _coverage_failure(y: FilteredChain, F: FilterMatrix):
    """First observed position that no complete chain can explain, or None.

    An observed position needs a recorded transition to or from an observed
    neighbour, unless it is position 0 or sits next to a blank (the hidden
    neighbour, not the filter, accounts for it then).
    """
    sym = y.symbols
    bits = F.bits
    last = len(sym) - 1
    for p, s in enumerate(sym):
        if s is None or p == 0:
            continue
        left = sym[p - 1]
        right = sym[p + 1] if p < last else -1  # -1: no successor exists
        if left is None or right is None:
            continue
        if bits[left - 1, s - 1]:
            continue
        if right != -1 and bits[s - 1, right - 1]:
            continue
        return p
    return None


def _iter_segments(y: FilteredChain):
    """Yield ("pair", p, (a, b)) for adjacent observed pairs and
    ("gap", p, (a, nu, b_or_None)) for maximal blank runs, where p is the
    0-based position of the segment's first transition."""
    sym = y.symbols
    obs_positions = [p for p, s in enumerate(sym) if s is not None]
    for prev, nxt in zip(obs_positions, obs_positions[1:]):
        if nxt == prev + 1:
            yield ("pair", prev, (sym[prev], sym[nxt]))
        else:
            yield ("gap", prev, (sym[prev], nxt - prev, sym[nxt]))
    tail = obs_positions[-1]
    if tail < len(sym) - 1:
        yield ("gap", tail, (sym[tail], len(sym) - 1 - tail, None))


def validate_consistency(y: FilteredChain, F: FilterMatrix, support=None) -> None:
    """Raise ConsistencyError unless some complete chain produces ``y``.

    Checks, in position order: every observed position away from blanks has a
    recorded adjacent transition (or is position 0); observed adjacent pairs
    lie on the support; every gap is spanned by an unrecorded path through the
    support graph; trailing blanks admit at least one all-unrecorded
    continuation of the right length.
    """
    if F.k != y.space.k:
        raise ValueError(f"filter is {F.k}x{F.k} but the pattern has k={y.space.k}")
    k = F.k
    if support is None:
        support_arr = np.ones((k, k), dtype=bool)
    else:
        support_arr = np.asarray(support, dtype=bool)

    failures = []
    cov = _coverage_failure(y, F)
    if cov is not None:
        failures.append((cov, "observed position has no recorded adjacent transition"))

    unrecorded = ~F.bits & support_arr
    segments = list(_iter_segments(y))
    max_nu = max((seg[1] for kind, _, seg in segments if kind == "gap"), default=0)
    # boolean reachability table over unrecorded allowed edges
    reach = [np.eye(k, dtype=bool)]
    for _ in range(max_nu):
        reach.append((reach[-1].astype(np.int64) @ unrecorded.astype(np.int64)) > 0)

    for kind, pos, seg in segments:
        if kind == "pair":
            a, b = seg
            if not support_arr[a - 1, b - 1]:
                failures.append((pos, "observed transition off the support"))
        else:
            a, nu, b = seg
            # pos is the observed predecessor; the first blank sits at pos + 1
            if b is None:
                if not reach[nu][a - 1].any():
                    failures.append(
                        (pos + 1, "trailing blanks admit no unrecorded continuation")
                    )
            elif not reach[nu][a - 1, b - 1]:
                failures.append((pos + 1, "no unrecorded path of the gap's length"))

    if failures:
        failures.sort(key=lambda f: f[0])
        raise ConsistencyError(*failures[0])
