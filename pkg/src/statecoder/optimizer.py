"""Numerical maximization of the rate bounds over auxiliary schemes.

Both searches enumerate the deterministic input maps and optimize the
auxiliary conditional pmf for each map: random Dirichlet screening picks the
most promising starting points, which are then refined by a pattern search
over mass transfers (single transfers and pairs of transfers, so that the
search can climb along the ridge where two rate terms are equal).

Also holds the exact machinery for the binary example channel: receiver
symmetrization, the reduced two-parameter objective and its case analysis,
and the three-letter optimal scheme.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar, root

from .bound_eval import RateReport, gp_rate, thm1_rate
from .channel_model import AuxScheme, GpAux, StateChannel, example_channel, output_identity_scheme
from .itcore import binary_entropy

MAX_MAPS = 4096
MIN_STEP = 1e-7
COARSE_STEP = 1e-3
FINE_STARTS = 8


def _h(p: np.ndarray, axes) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=axes)


# --------------------------------------------------------------------------
# batched objectives


def _gp_terms(ch: StateChannel, xmap: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Both GP terms for a batch ``q`` of p(u|s) tables of shape (B, S, U)."""
    ps = ch.state_pmf
    pus = q * ps[None, :, None]  # (B, S, U)
    h_s = _h(ps, 0)
    h_us = _h(pus, (1, 2))
    out = []
    for t in (ch.y1_given_xs, ch.y2_given_xs):
        # A[s, u, y] = p(y | x(u, s), s)
        A = t[xmap.T, np.arange(ch.n_states)[:, None], :]
        puy = np.einsum("bsu,suy->buy", pus, A)
        h_y = _h(puy.sum(axis=1), 1)
        out.append(h_y - _h(puy, (1, 2)) - h_s + h_us)
    return np.stack(out, axis=-1)


def _thm1_terms(ch: StateChannel, cards, xmap: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Three terms of the three-term bound for a batch ``q`` of shape (B, S, W*U*V)."""
    W, U, V = cards
    S = ch.n_states
    B = q.shape[0]
    p = (q * ch.state_pmf[None, :, None]).reshape(B, S, W, U, V)
    h_s = _h(ch.state_pmf, 0)
    p_swu = p.sum(axis=4)
    p_swv = p.sum(axis=3)
    p_sw = p_swu.sum(axis=3)
    xm = xmap.reshape(W, U, V, S)
    terms = []
    for k, t in enumerate((ch.y1_given_xs, ch.y2_given_xs)):
        A = t[np.moveaxis(xm, -1, 0), np.arange(S)[:, None, None, None], :]  # (S,W,U,V,Y)
        pwuvy = np.einsum("bswuv,swuvy->bwuvy", p, A)
        if k == 0:
            p_ly = pwuvy.sum(axis=3).reshape(B, W * U, -1)
            h_ls = _h(p_swu.reshape(B, S, -1), (1, 2))
        else:
            p_ly = pwuvy.sum(axis=2).reshape(B, W * V, -1)
            h_ls = _h(p_swv.reshape(B, S, -1), (1, 2))
        h_y = _h(p_ly.sum(axis=1), 1)
        terms.append(h_y - _h(p_ly, (1, 2)) - h_s + h_ls)
    cmi = (_h(p_swu.reshape(B, -1), 1) + _h(p_swv.reshape(B, -1), 1)
           - _h(p.reshape(B, -1), 1) - _h(p_sw.reshape(B, -1), 1))
    terms.append(0.5 * (terms[0] + terms[1] - cmi))
    return np.stack(terms, axis=-1)


# --------------------------------------------------------------------------
# local search on a product of simplices


def _transfer_moves(S: int, K: int, rng: np.random.Generator, max_pairs: int = 2000) -> np.ndarray:
    """Unit move directions (M, S, K): single mass transfers and sums of two."""
    singles = []
    for s in range(S):
        for i, j in itertools.permutations(range(K), 2):
            d = np.zeros((S, K))
            d[s, i], d[s, j] = -1.0, 1.0
            singles.append(d)
    if not singles:
        return np.zeros((0, S, K))
    singles = np.array(singles)
    pairs = list(itertools.combinations(range(len(singles)), 2))
    if len(pairs) > max_pairs:
        pick = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in np.sort(pick)]
    if pairs:
        idx = np.array(pairs)
        combo = singles[idx[:, 0]] + singles[idx[:, 1]]
        return np.concatenate([singles, combo])
    return singles


def _pattern_search(objective, q0: np.ndarray, moves: np.ndarray,
                    step: float = 0.25, min_step: float = MIN_STEP) -> tuple[np.ndarray, float]:
    """Greedy best-improvement pattern search with step halving.

    ``objective`` maps a batch (B, S, K) to values (B,). Moves that would push
    mass below zero are clipped to the available mass.
    """
    q = q0.copy()
    best = float(objective(q[None])[0])
    if len(moves) == 0:
        return q, best
    while step >= min_step:
        trial = q[None] + step * moves
        # clip each move so no coordinate goes negative
        neg = trial < 0
        if neg.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(moves < 0, q[None] / (-moves * step), np.inf)
            scale = np.minimum(1.0, ratio.min(axis=(1, 2)))
            trial = q[None] + (step * scale)[:, None, None] * moves
            trial = np.clip(trial, 0.0, None)
        vals = objective(trial)
        j = int(np.argmax(vals))
        if vals[j] > best + 1e-15:
            q, best = trial[j], float(vals[j])
        else:
            step /= 2
    q = q / q.sum(axis=-1, keepdims=True)
    return q, float(objective(q[None])[0])


def _dirichlet(rng: np.random.Generator, count: int, S: int, K: int) -> np.ndarray:
    return rng.dirichlet(np.ones(K), size=(count, S))


@dataclass(frozen=True)
class _Candidate:
    value: float
    order: int
    map_index: int
    q: np.ndarray


def _search(objective_for_map, maps: list[np.ndarray], seeds: list[tuple[int, np.ndarray]],
            S: int, K: int, budget: int, screen: int, rng: np.random.Generator):
    """Screen every map, refine the top ``budget`` starts, return the best."""
    pool: list[_Candidate] = []
    order = 0
    objectives = [objective_for_map(m) for m in maps]
    for mi, (obj) in enumerate(objectives):
        qs = _dirichlet(rng, screen, S, K)
        qs = np.concatenate([np.full((1, S, K), 1.0 / K), qs])
        vals = obj(qs)
        for v, qq in zip(vals, qs):
            pool.append(_Candidate(float(v), order, mi, qq))
            order += 1
    seeded = []
    for mi, qq in seeds:
        v = float(objectives[mi](qq[None])[0])
        seeded.append(_Candidate(v, -1 - len(seeded), mi, qq))
    pool.sort(key=lambda c: (-c.value, c.order))
    starts = seeded + pool[:budget]
    moves = _transfer_moves(S, K, rng)
    # coarse pass on every start, full-precision pass on the leaders
    coarse = []
    for c in starts:
        q, v = _pattern_search(objectives[c.map_index], c.q, moves, min_step=COARSE_STEP)
        coarse.append((v, len(coarse), c.map_index, q))
    coarse.sort(key=lambda r: (-r[0], r[1]))
    best = None
    for v, _, mi, q in coarse[:FINE_STARTS]:
        q, v = _pattern_search(objectives[mi], q, moves, step=COARSE_STEP)
        if best is None or v > best[0] + 1e-12:
            best = (v, mi, q)
    return best


def _column_multisets(n_inputs: int, S: int, card: int, rng) -> list[np.ndarray]:
    """x(u, s) maps up to relabeling of u: multisets of per-u columns s -> x."""
    columns = list(itertools.product(range(n_inputs), repeat=S))
    n = math.comb(len(columns) + card - 1, card)
    if n <= MAX_MAPS:
        combos = itertools.combinations_with_replacement(range(len(columns)), card)
        return [np.array([columns[c] for c in combo], dtype=np.int64) for combo in combos]
    picks = rng.integers(len(columns), size=(MAX_MAPS, card))
    return [np.array([columns[c] for c in sorted(row)], dtype=np.int64) for row in picks]


def maximize_gp(ch: StateChannel, max_card: int, budget: int = 200, *,
                seed: int = 0, screen: int = 32) -> tuple[GpAux, RateReport]:
    """Best single-layer scheme with ``|U| <= max_card``.

    Maps ``x(u, s)`` are enumerated up to relabeling of ``u`` (a smaller
    alphabet is covered by letting some letters carry no mass); ``budget``
    is the number of locally refined starting points.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if max_card < 1:
        raise ValueError("max_card must be at least 1")
    rng = np.random.default_rng(seed)
    S = ch.n_states
    maps = _column_multisets(ch.n_inputs, S, max_card, rng)

    def objective_for_map(m):
        return lambda q: _gp_terms(ch, m, q).min(axis=-1)

    seeds = []
    if max_card >= S:
        # u = s with x constant per column choice: cheap structured starts
        q_id = np.zeros((S, max_card))
        q_id[np.arange(S), np.arange(S)] = 1.0
        seeds.extend((mi, q_id) for mi in range(len(maps)))
    v, mi, q = _search(objective_for_map, maps, seeds, S, max_card, budget, screen, rng)
    aux = GpAux(q, maps[mi])
    return aux, gp_rate(ch, aux)


def _thm1_maps(ch: StateChannel, K: int, rng) -> list[np.ndarray]:
    S, X = ch.n_states, ch.n_inputs
    total = X ** (K * S)
    if total <= MAX_MAPS:
        return [np.array(m, dtype=np.int64).reshape(K, S)
                for m in itertools.product(range(X), repeat=K * S)]
    return [rng.integers(X, size=(K, S)) for _ in range(MAX_MAPS)]


def _structured_thm1_seeds(ch: StateChannel, cards) -> list[AuxScheme]:
    """Identity-style starting schemes that fit in ``cards``."""
    W, U, V = cards
    S, X = ch.n_states, ch.n_inputs
    uniform = np.full((S, X), 1.0 / X)
    out = []
    ny1, ny2 = ch.n_outputs
    if ch.is_deterministic() and U >= ny1 and V >= ny2:
        base = output_identity_scheme(ch, uniform)
        pmf = np.zeros((S, W, U, V))
        pmf[:, :1, :ny1, :ny2] = base.aux_pmf
        xm = np.zeros((W, U, V, S), dtype=np.int64)
        xm[:1, :ny1, :ny2, :] = base.x_map
        out.append(AuxScheme(pmf, xm))
    for layer, card in enumerate(cards):
        if card < X:
            continue
        pmf = np.zeros((S, W, U, V))
        xm = np.zeros((W, U, V, S), dtype=np.int64)
        for x in range(X):
            idx = [0, 0, 0]
            idx[layer] = x
            pmf[(slice(None), *idx)] = 1.0 / X
            xm[tuple(idx)] = x
        out.append(AuxScheme(pmf, xm))
    return out


def maximize_thm1(ch: StateChannel, cards, budget: int = 200, *,
                  seed: int = 0, screen: int = 16) -> tuple[AuxScheme, RateReport]:
    """Best three-layer scheme with auxiliary cardinalities ``cards = (W, U, V)``."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    cards = tuple(int(c) for c in cards)
    if min(cards) < 1:
        raise ValueError(f"cardinalities must be >= 1, got {cards}")
    rng = np.random.default_rng(seed)
    S = ch.n_states
    K = int(np.prod(cards))
    maps = _thm1_maps(ch, K, rng)
    seeds = []
    for aux in _structured_thm1_seeds(ch, cards):
        m = aux.x_map.reshape(K, S)
        maps.append(m)
        seeds.append((len(maps) - 1, aux.aux_pmf.reshape(S, K)))

    def objective_for_map(m):
        return lambda q: _thm1_terms(ch, cards, m, q).min(axis=-1)

    v, mi, q = _search(objective_for_map, maps, seeds, S, K, budget, screen, rng)
    aux = AuxScheme(q.reshape(S, *cards), maps[mi].reshape(*cards, S))
    return aux, thm1_rate(ch, aux)


# --------------------------------------------------------------------------
# binary example: symmetrization and the reduced problem


def _require_example(ch: StateChannel | None) -> None:
    ex = example_channel()
    if ch is None:
        return
    if (ch.state_pmf.shape != ex.state_pmf.shape
            or ch.y1_given_xs.shape != ex.y1_given_xs.shape
            or ch.y2_given_xs.shape != ex.y2_given_xs.shape
            or not np.array_equal(ch.state_pmf, ex.state_pmf)
            or not np.array_equal(ch.y1_given_xs, ex.y1_given_xs)
            or not np.array_equal(ch.y2_given_xs, ex.y2_given_xs)):
        raise ValueError("symmetrization is defined for the binary example channel only")


def symmetrize(aux: GpAux, ch: StateChannel | None = None) -> GpAux:
    """Mix ``aux`` with its receiver-swapped mirror image.

    On the example channel the relabeling ``(s, x) -> (1 - s, 1 - x)`` exchanges
    the roles of the two receivers (up to flipping output symbols). The new
    auxiliary is ``U' = (U, b)`` with a fair bit ``b``: letter ``(i, 0)`` is the
    original scheme and ``(i, 1)`` its mirror, so the two receiver terms
    coincide and equal at least the average of the original two.
    """
    _require_example(ch)
    q, xm = aux.u_given_s, aux.x_map  # (S, U), (U, S)
    U = aux.card
    # S is uniform, so p(u'|s) is the average of the two halves
    new_q = np.zeros((2, 2 * U))
    new_x = np.zeros((2 * U, 2), dtype=np.int64)
    for s in range(2):
        new_q[s, :U] = q[s] / 2
        new_q[s, U:] = q[1 - s] / 2
        new_x[:U, s] = xm[:, s]
        new_x[U:, s] = 1 - xm[:, 1 - s]
    return GpAux(new_q, new_x)


def appendix_b_objective(t: float, s4: float) -> float:
    """Reduced objective ``(1 + t/4) H((4 - s4)/(4 + t)) - t/2 - s4/2``.

    Domain: ``t, s4 >= 0`` and ``t + s4 <= 2``.
    """
    if t < -1e-12 or s4 < -1e-12 or t + s4 > 2 + 1e-12:
        raise ValueError(f"(t, s4) = ({t}, {s4}) outside the triangle t, s4 >= 0, t + s4 <= 2")
    return (1 + t / 4) * binary_entropy((4 - s4) / (4 + t)) - t / 2 - s4 / 2


def _objective_grid(t: np.ndarray, s4: np.ndarray) -> np.ndarray:
    r = (4 - s4) / (4 + t)
    return (1 + t / 4) * _h(np.stack([r, 1 - r]), 0) - t / 2 - s4 / 2


def _gradient(t: float, s4: float) -> np.ndarray:
    r = (4 - s4) / (4 + t)
    dh = math.log2((1 - r) / r)
    d_t = binary_entropy(r) / 4 - (4 - s4) / (4 * (4 + t)) * dh - 0.5
    d_s4 = -dh / 4 - 0.5
    return np.array([d_t, d_s4])


@dataclass(frozen=True)
class AppendixBOptimum:
    t: float
    s4: float
    value: float
    case: int
    cases: dict  # case -> (t, s4, value) or None when the case has no candidate


def appendix_b_maximize(grid_step: float | None = None) -> AppendixBOptimum:
    """Maximize the reduced objective over the triangle by explicit case analysis.

    Cases: 1 interior stationary point, 2 edge t = 0, 3 edge s4 = 0, 4 edge
    t + s4 = 2 with both coordinates positive. Each edge is a bounded 1-D
    maximization that also considers its endpoints; the interior case solves
    the gradient equations from a lattice of starting points and keeps roots
    strictly inside the triangle. If ``grid_step`` is given the result is also
    compared against a brute-force grid and a mismatch raises.
    """
    f = appendix_b_objective
    cases: dict[int, tuple[float, float, float] | None] = {}

    roots = []
    for t0 in np.linspace(0.1, 1.8, 7):
        for s0 in np.linspace(0.1, 1.8 - t0, 5):
            try:
                sol = root(lambda z: _gradient(*z), [t0, s0], method="hybr")
            except (ValueError, ZeroDivisionError):
                continue
            if not sol.success:
                continue
            t, s4 = sol.x
            if t > 1e-9 and s4 > 1e-9 and t + s4 < 2 - 1e-9 and np.allclose(_gradient(t, s4), 0, atol=1e-9):
                roots.append((float(t), float(s4), f(t, s4)))
    cases[1] = max(roots, key=lambda c: c[2]) if roots else None

    def edge(param, lo=0.0, hi=2.0):
        res = minimize_scalar(lambda a: -param(a)[2], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        cands = [param(lo), param(hi), param(float(res.x))]
        return max(cands, key=lambda c: c[2])

    cases[2] = edge(lambda a: (0.0, a, f(0.0, a)))
    cases[3] = edge(lambda a: (a, 0.0, f(a, 0.0)))
    # edge suprema include the endpoints shared with the neighbouring cases
    cases[4] = edge(lambda a: (a, 2.0 - a, f(a, 2.0 - a)))

    case, (t, s4, value) = max(((k, v) for k, v in cases.items() if v is not None),
                               key=lambda kv: kv[1][2])
    if grid_step is not None:
        gt, gs, gv = appendix_b_grid(grid_step)
        if gv > value + 1e-9:
            raise ArithmeticError(f"grid value {gv} at ({gt}, {gs}) beats case analysis {value}")
    return AppendixBOptimum(t, s4, value, case, cases)


def appendix_b_grid(step: float = 1e-3) -> tuple[float, float, float]:
    """Brute-force maximum of the reduced objective on a square lattice."""
    m = int(round(2 / step))
    best = (0.0, 0.0, -np.inf)
    ts = np.arange(m + 1) * step
    for i0 in range(0, m + 1, 256):
        t = ts[i0:i0 + 256, None]
        s4 = ts[None, :]
        ok = t + s4 <= 2 + 1e-12
        vals = np.where(ok, _objective_grid(np.broadcast_to(t, ok.shape), np.broadcast_to(s4, ok.shape)), -np.inf)
        k = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[k] > best[2]:
            best = (float(t[k[0], 0]), float(s4[0, k[1]]), float(vals[k]))
    return best


def appendix_b_witness() -> GpAux:
    """Three-letter optimal single-layer scheme on the example channel.

    Joint masses P{U=u, S=s} (columns s = 0, 1): u1: 1/6, 1/6; u2: 1/12, 1/4;
    u3: 1/4, 1/12. Input x(u, s): u1 -> (1, 0), u2 -> (1, 1), u3 -> (0, 0).
    """
    joint = np.array([[1 / 6, 1 / 6], [1 / 12, 1 / 4], [1 / 4, 1 / 12]])
    u_given_s = (joint / joint.sum(axis=0)).T
    x_map = np.array([[1, 0], [1, 1], [0, 0]])
    return GpAux(u_given_s, x_map)
