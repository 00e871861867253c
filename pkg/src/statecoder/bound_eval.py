"""Exact evaluation of the achievable-rate expressions for a given scheme."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .channel_model import AuxScheme, GpAux, StateChannel, induced_joint
from .itcore import JointPmf, entropy, entropy_of, mutual_information

GP_TERMS = ("I(U;Y1)-I(U;S)", "I(U;Y2)-I(U;S)")
THM1_TERMS = (
    "I(W,U;Y1)-I(W,U;S)",
    "I(W,V;Y2)-I(W,V;S)",
    "1/2[I(W,U;Y1)-I(W,U;S)+I(W,V;Y2)-I(W,V;S)-I(U;V|W,S)]",
)


class PremiseError(ValueError):
    """The channel is outside the class an expression applies to."""


@dataclass(frozen=True)
class RateReport:
    """Named bound terms in bits; ``overall`` is their minimum."""

    terms: dict[str, float]
    overall: float = field(init=False)

    def __post_init__(self):
        terms = {k: float(v) for k, v in self.terms.items()}
        if not terms or not all(np.isfinite(v) for v in terms.values()):
            raise ValueError(f"terms must be finite and nonempty: {terms}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "overall", min(terms.values()))

    @property
    def achievable(self) -> float:
        """Rate a scheme can actually use; sending nothing is always possible."""
        return max(0.0, self.overall)

    def to_dict(self) -> dict:
        return {"terms": dict(self.terms), "overall": self.overall}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class InformationTerms:
    """Every mutual information that enters the rate expressions of a scheme."""

    i_wu_y1: float
    i_wv_y2: float
    i_w_s: float
    i_u_s_w: float
    i_v_s_w: float
    i_u_v_ws: float

    @property
    def rate1(self) -> float:
        return self.i_wu_y1 - self.i_w_s - self.i_u_s_w

    @property
    def rate2(self) -> float:
        return self.i_wv_y2 - self.i_w_s - self.i_v_s_w


def information_terms(ch: StateChannel, aux: AuxScheme) -> InformationTerms:
    j1 = induced_joint(ch, aux, 1)
    j2 = induced_joint(ch, aux, 2)
    return InformationTerms(
        i_wu_y1=mutual_information(j1, ("W", "U"), "Y1"),
        i_wv_y2=mutual_information(j2, ("W", "V"), "Y2"),
        i_w_s=mutual_information(j1, "W", "S"),
        i_u_s_w=mutual_information(j1, "U", "S", "W"),
        i_v_s_w=mutual_information(j1, "V", "S", "W"),
        i_u_v_ws=mutual_information(j1, "U", "V", ("W", "S")),
    )


def gp_rate(ch: StateChannel, aux: GpAux) -> RateReport:
    """Both receivers' single-layer Gelfand-Pinsker rates and their minimum."""
    scheme = aux.as_aux_scheme()
    terms = []
    for k in (1, 2):
        j = induced_joint(ch, scheme, k).relabel({"W": "U_gp"})
        terms.append(mutual_information(j, "U_gp", f"Y{k}") - mutual_information(j, "U_gp", "S"))
    return RateReport(dict(zip(GP_TERMS, terms)))


def thm1_rate(ch: StateChannel, aux: AuxScheme) -> RateReport:
    """Three-term superposition/Marton bound evaluated at one scheme."""
    it = information_terms(ch, aux)
    ta, tb = it.rate1, it.rate2
    tc = 0.5 * (ta + tb - it.i_u_v_ws)
    return RateReport(dict(zip(THM1_TERMS, (ta, tb, tc))))


# --------------------------------------------------------------------------
# the inequality system before elimination

CONSTRAINTS = (
    "R+T0+T1<I(W,U;Y1)",
    "R+T0+T2<I(W,V;Y2)",
    "T0>I(W;S)",
    "T1>I(U;S|W)",
    "T2>I(V;S|W)",
    "T1+T2>I(U;S|W)+I(V;S|W)+I(U;V|W,S)",
)


@dataclass(frozen=True)
class RegionCheck:
    slacks: dict[str, float]
    vacuous: frozenset[str]

    @property
    def active(self) -> dict[str, float]:
        return {k: v for k, v in self.slacks.items() if k not in self.vacuous}

    @property
    def min_slack(self) -> float:
        return min(self.active.values())

    @property
    def binding(self) -> str:
        active = self.active
        return min(active, key=active.get)

    @property
    def feasible(self) -> bool:
        return self.min_slack > 0


def _vacuous_constraints(cards) -> frozenset[str]:
    """Covering conditions on layers that only have one sequence value.

    A cardinality-1 layer is the constant sequence, which is typical whenever
    the rest of the tuple is, so its covering condition imposes nothing.
    """
    W, U, V = cards
    out = set()
    if W == 1:
        out.add(CONSTRAINTS[2])
    if U == 1:
        out.add(CONSTRAINTS[3])
    if V == 1:
        out.add(CONSTRAINTS[4])
    if U == 1 and V == 1:
        out.add(CONSTRAINTS[5])
    return frozenset(out)


def constraint_region(ch: StateChannel, aux: AuxScheme, rates) -> RegionCheck:
    """Slack of each of the six rate constraints at ``rates = (R, T0, T1, T2)``."""
    R, T0, T1, T2 = (float(r) for r in rates)
    if min(R, T0, T1, T2) < 0:
        raise ValueError(f"rates must be nonnegative, got {rates}")
    it = information_terms(ch, aux)
    slacks = (
        it.i_wu_y1 - (R + T0 + T1),
        it.i_wv_y2 - (R + T0 + T2),
        T0 - it.i_w_s,
        T1 - it.i_u_s_w,
        T2 - it.i_v_s_w,
        T1 + T2 - (it.i_u_s_w + it.i_v_s_w + it.i_u_v_ws),
    )
    return RegionCheck(dict(zip(CONSTRAINTS, slacks)), _vacuous_constraints(aux.cards))


def max_feasible_rate(ch: StateChannel, aux: AuxScheme) -> float:
    """Supremum of R over the closure of the six constraints, solved as an LP.

    R is left free in sign so that schemes with a negative bound are still
    comparable with the eliminated three-term form.
    """
    it = information_terms(ch, aux)
    # variables (R, T0, T1, T2); constraints as A x <= b
    A = np.array([
        [1, 1, 1, 0],
        [1, 1, 0, 1],
        [0, -1, 0, 0],
        [0, 0, -1, 0],
        [0, 0, 0, -1],
        [0, 0, -1, -1],
    ], dtype=float)
    b = np.array([it.i_wu_y1, it.i_wv_y2, -it.i_w_s, -it.i_u_s_w, -it.i_v_s_w,
                  -(it.i_u_s_w + it.i_v_s_w + it.i_u_v_ws)])
    bounds = [(None, None), (0, None), (0, None), (0, None)]
    res = linprog(c=[-1, 0, 0, 0], A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    return float(res.x[0])


# --------------------------------------------------------------------------
# deterministic class and cut-set bound


def cutset_upper(ch: StateChannel, x_given_s) -> float:
    """min{I(X;Y1|S), I(X;Y2|S)} at the given input law."""
    j = ch.input_joint(x_given_s)
    return min(mutual_information(j, "X", "Y1", "S"), mutual_information(j, "X", "Y2", "S"))


def _check_deterministic_premise(ch: StateChannel, j: JointPmf, tol: float = 1e-12) -> None:
    if not ch.is_deterministic():
        h = max(entropy(j, "Y1", ("X", "S")), entropy(j, "Y2", ("X", "S")))
        raise PremiseError(f"outputs are not functions of (X,S): H(Y|X,S) = {h:.6g}")
    cmi = mutual_information(j, "Y1", "Y2", "S")
    if cmi > tol:
        raise PremiseError(f"I(Y1;Y2|S) = {cmi:.6g} > 0")


def deterministic_rate(ch: StateChannel, x_given_s) -> float:
    """min{H(Y1|S), H(Y2|S)} at one input law; checks the class premise."""
    j = ch.input_joint(x_given_s)
    _check_deterministic_premise(ch, j)
    return min(entropy(j, "Y1", "S"), entropy(j, "Y2", "S"))


def _simplex_grid(k: int, steps: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in multiples of 1/steps."""
    pts = [c for c in itertools.product(range(steps + 1), repeat=k - 1) if sum(c) <= steps]
    pts = np.array([list(c) + [steps - sum(c)] for c in pts], dtype=float)
    return pts / steps


def _cond_entropies(ch: StateChannel, q: np.ndarray) -> np.ndarray:
    """H(Y1|S), H(Y2|S) for a batch of input laws ``q`` of shape (B, S, X)."""
    out = []
    for t in (ch.y1_given_xs, ch.y2_given_xs):
        py = np.einsum("bsx,xsy->bsy", q, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = -np.where(py > 0, py * np.log2(py), 0.0).sum(axis=2)
        out.append(h @ ch.state_pmf)
    return np.stack(out, axis=1)


@dataclass(frozen=True)
class DeterministicCapacity:
    value: float
    x_given_s: np.ndarray


def deterministic_capacity(ch: StateChannel, steps: int = 20, refine: int = 6) -> DeterministicCapacity:
    """Grid maximization of min{H(Y1|S), H(Y2|S)} over p(x|s).

    The per-state simplex grid is refined ``refine`` times around the incumbent,
    halving the step each time. Raises :class:`PremiseError` if the channel is
    not deterministic or I(Y1;Y2|S) > 0 at the maximizer.
    """
    if not ch.is_deterministic():
        _check_deterministic_premise(ch, ch.input_joint(np.full((ch.n_states, ch.n_inputs), 1 / ch.n_inputs)))
    S, X = ch.n_states, ch.n_inputs
    base = _simplex_grid(X, steps)
    cand = np.array(list(itertools.product(range(len(base)), repeat=S)))
    if len(cand) > 2_000_000:
        raise ValueError(f"grid too large ({len(cand)} points); lower steps")
    q = base[cand]  # (B, S, X)
    vals = _cond_entropies(ch, q).min(axis=1)
    best = int(np.argmax(vals))
    q_best, v_best = q[best], float(vals[best])
    step = 1.0 / steps
    local = _simplex_grid(X, 4) - 1.0 / X  # zero-sum directions
    local = local[np.any(local != 0, axis=1)]
    for _ in range(refine):
        step /= 2
        moves = np.concatenate([np.zeros((1, X)), local * step * X / 2])
        idx = np.array(list(itertools.product(range(len(moves)), repeat=S)))
        trial = q_best[None] + moves[idx]
        ok = np.all(trial >= -1e-15, axis=(1, 2))
        trial = np.clip(trial[ok], 0, None)
        trial /= trial.sum(axis=2, keepdims=True)
        tv = _cond_entropies(ch, trial).min(axis=1)
        j = int(np.argmax(tv))
        if tv[j] > v_best:
            q_best, v_best = trial[j], float(tv[j])
    _check_deterministic_premise(ch, ch.input_joint(q_best))
    return DeterministicCapacity(v_best, q_best)
