"""Finite-alphabet probability tables, information measures and typicality.

All logarithms are base 2. A :class:`JointPmf` carries a dense probability
table whose axes are named, so that entropies and mutual informations can be
requested by variable name, e.g. ``mutual_information(p, ["U"], ["Y1"])``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

NORM_TOL = 1e-9
# count-bound slack so that a sequence whose type equals p exactly is typical
_COUNT_SLACK = 1e-9


def _as_names(group) -> tuple[str, ...]:
    if group is None:
        return ()
    if isinstance(group, str):
        return (group,)
    return tuple(group)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Dense joint pmf over a product of named finite alphabets.

    ``axes`` is a sequence of ``(name, cardinality)`` pairs and ``probs`` an
    array of shape ``tuple(card for _, card in axes)``.
    """

    axes: tuple[tuple[str, int], ...]
    probs: np.ndarray

    def __init__(self, axes: Sequence[tuple[str, int]], probs, *, normalize: bool = False):
        axes = tuple((str(name), int(card)) for name, card in axes)
        names = [name for name, _ in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"axis names must be unique, got {names}")
        if any(card < 1 for _, card in axes):
            raise ValueError("cardinalities must be >= 1")
        shape = tuple(card for _, card in axes)
        arr = np.array(probs, dtype=float)
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(f"table size {arr.size} does not match shape {shape}")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        total = arr.sum()
        if normalize:
            if total <= 0:
                raise ValueError("cannot normalize an all-zero table")
            arr = arr / total
        elif abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", arr)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    def card(self, name: str) -> int:
        return self.shape[self.index(name)]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown axis {name!r}; axes are {self.names}") from None

    def marginal(self, names: Iterable[str]) -> "JointPmf":
        """Marginal pmf on ``names``, with axes in the requested order."""
        names = _as_names(names)
        idx = [self.index(n) for n in names]
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated axis in {names}")
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        table = self.probs.sum(axis=drop) if drop else self.probs
        # remaining axes are in original order; permute to requested order
        kept = sorted(idx)
        perm = [kept.index(i) for i in idx]
        table = np.transpose(table, perm) if perm else np.asarray(table)
        return JointPmf([self.axes[i] for i in idx], table, normalize=not names)

    def relabel(self, mapping: Mapping[str, str]) -> "JointPmf":
        return JointPmf([(mapping.get(n, n), c) for n, c in self.axes], self.probs)

    def support(self) -> np.ndarray:
        return self.probs > 0


def entropy_of(probs) -> float:
    """Shannon entropy (bits) of a flat probability vector, with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(x: float) -> float:
    return entropy_of([x, 1.0 - x])


def entropy(p: JointPmf, names=None, given=None) -> float:
    """H(names) or H(names | given) in bits. ``names=None`` means all axes."""
    names = p.names if names is None else _as_names(names)
    given = _as_names(given)
    joint = entropy_of(p.marginal(tuple(dict.fromkeys(names + given))).probs)
    if not given:
        return joint
    return joint - entropy_of(p.marginal(given).probs)


def mutual_information(p: JointPmf, group_a, group_b, given=None) -> float:
    """I(A;B) or I(A;B|C) in bits, clamped at zero below -1e-12 roundoff."""
    a, b, c = _as_names(group_a), _as_names(group_b), _as_names(given)
    for name in a + b + c:
        p.index(name)
    if not a or not b:
        raise ValueError("mutual information needs two nonempty groups")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError(f"groups must be disjoint: {a}, {b}, {c}")
    h = lambda names: entropy_of(p.marginal(names).probs) if names else 0.0
    value = h(a + c) + h(b + c) - h(a + b + c) - h(c)
    if value < -1e-12:
        raise ArithmeticError(f"negative mutual information {value}")
    return max(value, 0.0)


def conditional_table(joint: np.ndarray, axis: int = -1) -> np.ndarray:
    """Normalize ``joint`` along ``axis``; rows with zero mass become uniform."""
    joint = np.asarray(joint, dtype=float)
    tot = joint.sum(axis=axis, keepdims=True)
    k = joint.shape[axis]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(tot > 0, joint / np.where(tot > 0, tot, 1.0), 1.0 / k)
    return out


# --------------------------------------------------------------------------
# typicality


@dataclass(frozen=True)
class SequenceTuple:
    """Named symbol sequences of a common length ``n``."""

    names: tuple[str, ...]
    data: np.ndarray  # shape (len(names), n), integer symbols

    def __init__(self, seqs: Mapping[str, Sequence[int]]):
        names = tuple(seqs)
        rows = [np.asarray(seqs[k], dtype=np.int64).ravel() for k in names]
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise ValueError(f"sequence lengths differ: {sorted(lengths)}")
        data = np.vstack(rows) if rows else np.zeros((0, 0), dtype=np.int64)
        data.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[self.names.index(name)]


def count_bounds(p: np.ndarray, n: int, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive integer count bounds [lo, hi] of robust epsilon-typicality.

    A symbol ``a`` may occur ``N(a)`` times iff ``|N(a)/n - p(a)| <= epsilon p(a)``.
    """
    p = np.asarray(p, dtype=float)
    lo = np.ceil(n * p * (1.0 - epsilon) - _COUNT_SLACK)
    hi = np.floor(n * p * (1.0 + epsilon) + _COUNT_SLACK)
    lo = np.maximum(lo, 0).astype(np.int64)
    hi = np.where(p > 0, hi, 0).astype(np.int64)
    return lo, hi


def joint_counts(seqs: SequenceTuple, shape: tuple[int, ...]) -> np.ndarray:
    flat = np.ravel_multi_index(tuple(seqs.data), shape)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)


def is_typical(seqs: SequenceTuple | Mapping[str, Sequence[int]], p: JointPmf, epsilon: float) -> bool:
    """Robust typicality of ``seqs`` with respect to ``p``.

    True iff every joint symbol ``a`` satisfies ``|freq(a) - p(a)| <= epsilon p(a)``;
    in particular symbols of probability zero must not occur.
    """
    if not isinstance(seqs, SequenceTuple):
        seqs = SequenceTuple(seqs)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    missing = set(p.names) - set(seqs.names)
    if missing:
        raise ValueError(f"no sequence for axes {sorted(missing)}")
    n = seqs.n
    if n == 0:
        raise ValueError("empty sequences")
    ordered = SequenceTuple({k: seqs[k] for k in p.names})
    for row, (name, card) in zip(ordered.data, p.axes):
        if row.min() < 0 or row.max() >= card:
            raise ValueError(f"symbol out of range on axis {name!r}")
    counts = joint_counts(ordered, p.shape)
    lo, hi = count_bounds(p.probs, n, epsilon)
    return bool(np.all((counts >= lo) & (counts <= hi)))
