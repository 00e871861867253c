"""Two-receiver channels with encoder-side state, and auxiliary coding schemes.

Only the marginal transitions ``p(y1|x,s)`` and ``p(y2|x,s)`` are stored: the
common-message capacity depends on the joint law only through them.
Transition tables use axis order ``(x, s, y)``.

A cardinality-1 auxiliary alphabet stands for an empty (constant) auxiliary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .itcore import NORM_TOL, JointPmf, entropy_of

JSON_ROW_TOL = 1e-6


class ChannelFormatError(ValueError):
    """Malformed channel or auxiliary description."""


def _check_conditional(table: np.ndarray, what: str, tol: float = NORM_TOL) -> None:
    if np.any(table < 0) or not np.all(np.isfinite(table)):
        raise ChannelFormatError(f"{what}: entries must be finite and nonnegative")
    sums = table.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > tol)
    if bad.size:
        row = tuple(int(i) for i in bad[0])
        raise ChannelFormatError(f"{what}: row {row} sums to {sums[row]:.9g}, not 1")


def _readonly(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateChannel:
    state_pmf: np.ndarray  # (S,)
    y1_given_xs: np.ndarray  # (X, S, Y1)
    y2_given_xs: np.ndarray  # (X, S, Y2)

    def __post_init__(self):
        ps = _readonly(self.state_pmf)
        w1 = _readonly(self.y1_given_xs)
        w2 = _readonly(self.y2_given_xs)
        if ps.ndim != 1 or w1.ndim != 3 or w2.ndim != 3:
            raise ChannelFormatError("expected p_s of shape (S,) and transitions of shape (X, S, Y)")
        if w1.shape[:2] != w2.shape[:2] or w1.shape[1] != ps.shape[0]:
            raise ChannelFormatError(
                f"inconsistent alphabets: p_s {ps.shape}, p_y1 {w1.shape}, p_y2 {w2.shape}")
        _check_conditional(ps, "p_s")
        _check_conditional(w1, "p_y1")
        _check_conditional(w2, "p_y2")
        object.__setattr__(self, "state_pmf", ps)
        object.__setattr__(self, "y1_given_xs", w1)
        object.__setattr__(self, "y2_given_xs", w2)

    @classmethod
    def from_joint(cls, state_pmf, y1y2_given_xs) -> "StateChannel":
        """Build from a full ``p(y1, y2 | x, s)`` table of shape (X, S, Y1, Y2)."""
        joint = np.asarray(y1y2_given_xs, dtype=float)
        return cls(state_pmf, joint.sum(axis=3), joint.sum(axis=2))

    @property
    def n_states(self) -> int:
        return self.state_pmf.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.y1_given_xs.shape[0]

    @property
    def n_outputs(self) -> tuple[int, int]:
        return self.y1_given_xs.shape[2], self.y2_given_xs.shape[2]

    def transition(self, receiver: int) -> np.ndarray:
        if receiver == 1:
            return self.y1_given_xs
        if receiver == 2:
            return self.y2_given_xs
        raise ValueError(f"receiver must be 1 or 2, got {receiver!r}")

    def is_deterministic(self) -> bool:
        return all(np.all((t == 0) | (t == 1)) for t in (self.y1_given_xs, self.y2_given_xs))

    def output_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """Output functions ``y_k(x, s)`` of a deterministic channel."""
        if not self.is_deterministic():
            raise ValueError("channel is not deterministic")
        return self.y1_given_xs.argmax(axis=2), self.y2_given_xs.argmax(axis=2)

    def input_joint(self, x_given_s) -> JointPmf:
        """Joint over (S, X, Y1, Y2) with Y1, Y2 conditionally independent given (X, S)."""
        q = np.asarray(x_given_s, dtype=float).reshape(self.n_states, self.n_inputs)
        _check_conditional(q, "p(x|s)")
        t = np.einsum("s,sx,xsa,xsb->sxab", self.state_pmf, q, self.y1_given_xs, self.y2_given_xs)
        ny1, ny2 = self.n_outputs
        return JointPmf([("S", self.n_states), ("X", self.n_inputs), ("Y1", ny1), ("Y2", ny2)], t)

    # ---- JSON --------------------------------------------------------
    def to_dict(self) -> dict:
        ny1, ny2 = self.n_outputs
        return {"S": self.n_states, "X": self.n_inputs, "Y1": ny1, "Y2": ny2,
                "p_s": self.state_pmf.tolist(),
                "p_y1": self.y1_given_xs.tolist(), "p_y2": self.y2_given_xs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StateChannel":
        try:
            sizes = {k: int(d[k]) for k in ("S", "X", "Y1", "Y2")}
            ps = np.asarray(d["p_s"], dtype=float)
            w1 = np.asarray(d["p_y1"], dtype=float)
            w2 = np.asarray(d["p_y2"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ChannelFormatError(f"malformed channel description: {exc}") from exc
        want = {"p_s": (sizes["S"],), "p_y1": (sizes["X"], sizes["S"], sizes["Y1"]),
                "p_y2": (sizes["X"], sizes["S"], sizes["Y2"])}
        for key, arr in (("p_s", ps), ("p_y1", w1), ("p_y2", w2)):
            if arr.shape != want[key]:
                raise ChannelFormatError(f"{key} has shape {arr.shape}, expected {want[key]}")
            _check_conditional(arr, key, JSON_ROW_TOL)
        # accept the looser file tolerance, then renormalize exactly
        ps = ps / ps.sum()
        w1 = w1 / w1.sum(axis=-1, keepdims=True)
        w2 = w2 / w2.sum(axis=-1, keepdims=True)
        return cls(ps, w1, w2)

    @classmethod
    def load(cls, path) -> "StateChannel":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ChannelFormatError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


@dataclass(frozen=True, eq=False)
class AuxScheme:
    """Conditional pmf ``p(w,u,v|s)`` plus deterministic input map ``x(w,u,v,s)``.

    ``aux_pmf`` has shape (S, W, U, V) and ``x_map`` shape (W, U, V, S).
    """

    aux_pmf: np.ndarray
    x_map: np.ndarray

    def __post_init__(self):
        q = _readonly(self.aux_pmf)
        xm = _readonly(self.x_map, dtype=np.int64)
        if q.ndim != 4 or xm.ndim != 4:
            raise ChannelFormatError("aux_pmf must be (S,W,U,V) and x_map (W,U,V,S)")
        if xm.shape != q.shape[1:] + q.shape[:1]:
            raise ChannelFormatError(f"x_map shape {xm.shape} does not match aux_pmf {q.shape}")
        flat = q.reshape(q.shape[0], -1)
        _check_conditional(flat, "p(w,u,v|s)")
        if xm.size and xm.min() < 0:
            raise ChannelFormatError("x_map has negative symbols")
        object.__setattr__(self, "aux_pmf", q)
        object.__setattr__(self, "x_map", xm)

    @property
    def cards(self) -> tuple[int, int, int]:
        return self.aux_pmf.shape[1:]

    @property
    def n_states(self) -> int:
        return self.aux_pmf.shape[0]

    def check_channel(self, ch: StateChannel) -> None:
        if self.n_states != ch.n_states:
            raise ChannelFormatError(f"aux has {self.n_states} states, channel {ch.n_states}")
        if self.x_map.max() >= ch.n_inputs:
            raise ChannelFormatError(f"x_map uses input {self.x_map.max()} but |X| = {ch.n_inputs}")

    def x_given_s(self, n_inputs: int) -> np.ndarray:
        """Induced ``p(x|s)`` of shape (S, X)."""
        out = np.zeros((self.n_states, n_inputs))
        for s in range(self.n_states):
            np.add.at(out[s], self.x_map[..., s].ravel(), self.aux_pmf[s].ravel())
        return out

    def to_dict(self) -> dict:
        return {"kind": "thm1", "cards": list(self.cards),
                "p_wuv_given_s": self.aux_pmf.tolist(), "x_map": self.x_map.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AuxScheme":
        try:
            return cls(np.asarray(d["p_wuv_given_s"], dtype=float), np.asarray(d["x_map"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ChannelFormatError(f"malformed aux description: {exc}") from exc


@dataclass(frozen=True, eq=False)
class GpAux:
    """Single auxiliary ``p(u|s)`` of shape (S, U) and map ``x(u,s)`` of shape (U, S)."""

    u_given_s: np.ndarray
    x_map: np.ndarray

    def __post_init__(self):
        q = _readonly(self.u_given_s)
        xm = _readonly(self.x_map, dtype=np.int64)
        if q.ndim != 2 or xm.shape != q.shape[::-1]:
            raise ChannelFormatError(f"u_given_s {q.shape} and x_map {xm.shape} are inconsistent")
        _check_conditional(q, "p(u|s)")
        object.__setattr__(self, "u_given_s", q)
        object.__setattr__(self, "x_map", xm)

    @property
    def card(self) -> int:
        return self.u_given_s.shape[1]

    def as_aux_scheme(self) -> AuxScheme:
        """Equivalent three-layer scheme with W := U and trivial U, V."""
        S, U = self.u_given_s.shape
        return AuxScheme(self.u_given_s.reshape(S, U, 1, 1), self.x_map.reshape(U, 1, 1, S))

    def to_dict(self) -> dict:
        return {"kind": "gp", "card": self.card,
                "p_u_given_s": self.u_given_s.tolist(), "x_map": self.x_map.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GpAux":
        try:
            return cls(np.asarray(d["p_u_given_s"], dtype=float), np.asarray(d["x_map"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ChannelFormatError(f"malformed aux description: {exc}") from exc


def load_aux(path) -> AuxScheme | GpAux:
    d = json.loads(Path(path).read_text())
    if d.get("kind") == "gp" or "p_u_given_s" in d:
        return GpAux.from_dict(d)
    return AuxScheme.from_dict(d)


AXES = ("S", "W", "U", "V", "X")


def induced_joint(ch: StateChannel, aux: AuxScheme, receiver: int) -> JointPmf:
    """Joint pmf over (S, W, U, V, X, Yk) induced by ``aux`` on receiver ``k``."""
    aux.check_channel(ch)
    trans = ch.transition(receiver)
    S = ch.n_states
    W, U, V = aux.cards
    X = ch.n_inputs
    Y = trans.shape[2]
    swuv = ch.state_pmf[:, None, None, None] * aux.aux_pmf
    onehot = np.zeros((S, W, U, V, X))
    xs = np.moveaxis(aux.x_map, -1, 0)  # (S, W, U, V)
    np.put_along_axis(onehot, xs[..., None], 1.0, axis=-1)
    # p(y|x,s) arranged as (S, X, Y)
    t = np.transpose(trans, (1, 0, 2))
    joint = (swuv[..., None] * onehot)[..., None] * t[:, None, None, None, :, :]
    return JointPmf([("S", S), ("W", W), ("U", U), ("V", V), ("X", X), (f"Y{receiver}", Y)], joint)


def example_channel() -> StateChannel:
    """Binary example: S ~ Bern(1/2).

    S=0: Y1 = X, Y2 = 0.   S=1: Y1 = 1, Y2 = X.

    Any relabeling of the output symbols leaves every rate unchanged.
    """
    w1 = np.zeros((2, 2, 2))
    w2 = np.zeros((2, 2, 2))
    for x in range(2):
        w1[x, 0, x] = 1.0
        w1[x, 1, 1] = 1.0
        w2[x, 0, 0] = 1.0
        w2[x, 1, x] = 1.0
    return StateChannel(np.array([0.5, 0.5]), w1, w2)


def output_identity_scheme(ch: StateChannel, x_given_s) -> AuxScheme:
    """W trivial, U = Y1, V = Y2 for a deterministic channel and input law ``p(x|s)``.

    ``x(u, v, s)`` is any input consistent with the outputs; pairs that cannot
    occur are mapped to input 0.
    """
    f1, f2 = ch.output_maps()
    q = np.asarray(x_given_s, dtype=float).reshape(ch.n_states, ch.n_inputs)
    ny1, ny2 = ch.n_outputs
    pmf = np.zeros((ch.n_states, 1, ny1, ny2))
    xmap = np.zeros((1, ny1, ny2, ch.n_states), dtype=np.int64)
    for s in range(ch.n_states):
        # iterate inputs in reverse so the smallest consistent input wins
        for x in reversed(range(ch.n_inputs)):
            u, v = f1[x, s], f2[x, s]
            pmf[s, 0, u, v] += q[s, x]
            xmap[0, u, v, s] = x
    # distinct inputs with identical outputs merge; their mass already adds up
    return AuxScheme(pmf, xmap)


def section3_scheme() -> AuxScheme:
    """Preset on :func:`example_channel`: W trivial, U = Y1, V = Y2, uniform p(x|s)."""
    return output_identity_scheme(example_channel(), np.full((2, 2), 0.5))


@dataclass(frozen=True)
class CommonPart:
    """Gacs-Korner common part ``Z = f(Y1) = g(Y2)``."""

    f: np.ndarray
    g: np.ndarray
    n_components: int
    entropy: float


def gacs_korner_common(p: JointPmf, first: str = "Y1", second: str = "Y2") -> CommonPart:
    """Connected components of the bipartite support graph of ``p(first, second)``.

    Values of zero marginal probability get their own component (they never occur).
    """
    pj = p.marginal((first, second)).probs
    n1, n2 = pj.shape
    r, c = np.nonzero(pj > 0)
    adj = coo_matrix((np.ones(len(r)), (r, n1 + c)), shape=(n1 + n2, n1 + n2))
    ncomp, labels = connected_components(adj, directed=False)
    f, g = labels[:n1], labels[n1:]
    # relabel so that components are numbered in order of first appearance
    order = {lab: i for i, lab in enumerate(dict.fromkeys(np.concatenate([f, g]).tolist()))}
    f = np.array([order[v] for v in f], dtype=np.int64)
    g = np.array([order[v] for v in g], dtype=np.int64)
    pz = np.zeros(len(order))
    np.add.at(pz, f, pj.sum(axis=1))
    return CommonPart(f, g, len(order), entropy_of(pz))
