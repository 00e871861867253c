"""Monte Carlo simulation of the layered random coding scheme.

Codebook: for every message ``m`` a bin of ``L0`` cloud sequences ``w^n``
(iid ``p_W``); for every cloud ``L1`` satellite sequences ``u^n`` drawn from
``p(u|w)`` and ``L2`` sequences ``v^n`` drawn from ``p(v|w)``. Bin sizes are
``2^ceil(n T)``; a layer with a one-letter alphabet has a single index.

Encoder: smallest ``l0`` with ``(w^n, s^n)`` typical (else the first),
then the smallest ``(l1, l2)`` in lexicographic order with
``(w^n, s^n, u^n, v^n)`` typical (else the first pair); it sends
``x(w_i, u_i, v_i, s_i)`` either way and reports whether a search failed.

Decoder k: the unique message with some ``(l0, l_k)`` making
``(w^n, u^n or v^n, y_k^n)`` typical at the looser slack ``epsilon'``.

Random streams. Every draw comes from a generator seeded with
``[seed, trial, stream, *extra]``; streams are: 0 message, 1 state sequence,
2 the bin of message ``m`` (extra key ``m``), 3 channel outputs, 4 sampling
of wrong-message hits (extra key = receiver). Symbols are drawn by inverse
CDF from one uniform variate per symbol in row-major order; a one-letter
alphabet consumes no variates. A trial therefore does not depend on the
order in which trials run.

Large codebooks are simulated without storing the other messages' bins:
those bins are independent of the state, the transmitted bin and the
outputs, so the number of wrong messages that pass the decoder's test is
Binomial(M - 1, q(y)), where q(y) is computed exactly from multinomial
probabilities of the typicality box.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .bound_eval import information_terms
from .channel_model import AuxScheme, StateChannel
from .itcore import count_bounds

SIZE_GUARD_LOG2 = 26
EXPLICIT_LIMIT = 1 << 20  # stored symbols per trial below which wrong bins are generated
MAX_TYPE_TERMS = 200_000

STREAM_MESSAGE, STREAM_STATE, STREAM_BIN, STREAM_CHANNEL, STREAM_WRONG = range(5)
CSV_FIELDS = ("n", "R", "T0", "T1", "T2", "epsilon", "trials",
              "enc_fail", "err1", "err2", "err_overall")


class SizeGuardError(ValueError):
    """Requested codebook is larger than the simulator accepts."""


def default_epsilon(n: int) -> float:
    return 0.1 if n <= 16 else 0.05


@dataclass(frozen=True)
class SimConfig:
    n: int
    R: float
    T0: float = 0.0
    T1: float = 0.0
    T2: float = 0.0
    epsilon: float | None = None
    epsilon_prime: float | None = None
    trials: int = 100
    seed: int = 0
    mode: str = "auto"  # "auto", "explicit" or "lazy"

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("blocklength n must be >= 1")
        if min(self.R, self.T0, self.T1, self.T2) < 0:
            raise ValueError("rates must be nonnegative")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in ("auto", "explicit", "lazy"):
            raise ValueError(f"unknown mode {self.mode!r}")
        eps = default_epsilon(self.n) if self.epsilon is None else float(self.epsilon)
        eps2 = 2 * eps if self.epsilon_prime is None else float(self.epsilon_prime)
        if not 0 < eps < eps2:
            raise ValueError(f"need 0 < epsilon < epsilon_prime, got {eps}, {eps2}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "epsilon_prime", eps2)

    def exponent(self, rate: float) -> int:
        # tiny slack keeps n * rate from rounding up on float noise
        return int(math.ceil(self.n * rate - 1e-9))

    def sizes(self, cards=(2, 2, 2)) -> tuple[int, int, int, int]:
        """Number of messages and of ``l0``, ``l1``, ``l2`` indices."""
        W, U, V = cards
        M = 1 << self.exponent(self.R)
        L0 = 1 if W == 1 else 1 << self.exponent(self.T0)
        L1 = 1 if U == 1 else 1 << self.exponent(self.T1)
        L2 = 1 if V == 1 else 1 << self.exponent(self.T2)
        return M, L0, L1, L2

    def check_guard(self, cards=(2, 2, 2)) -> None:
        M, L0, L1, L2 = self.sizes(cards)
        bits = math.log2(M) + math.log2(L0) + math.log2(max(L1, L2))
        if bits > SIZE_GUARD_LOG2:
            raise SizeGuardError(
                f"codebook of 2^{bits:.0f} codewords exceeds the 2^{SIZE_GUARD_LOG2} guard; "
                f"lower n or the rates so that ceil(nR)+ceil(nT0)+max(ceil(nT1),ceil(nT2)) "
                f"<= {SIZE_GUARD_LOG2}")


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *(int(k) for k in key)])


def _cdf(p: np.ndarray) -> np.ndarray:
    """Row-wise thresholds for inverse-CDF sampling (last column dropped)."""
    c = np.cumsum(p, axis=-1)[..., :-1]
    return np.minimum(c, 1.0)


def draw_symbols(rng: np.random.Generator, probs: np.ndarray, shape) -> np.ndarray:
    """iid symbols from ``probs``; no variates are consumed for a one-letter alphabet."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape[-1] == 1:
        return np.zeros(shape, dtype=np.int64)
    r = rng.random(shape)
    return (r[..., None] >= _cdf(probs)).sum(axis=-1)


def draw_conditional(rng: np.random.Generator, cond: np.ndarray, given: np.ndarray,
                     count: int | None = None) -> np.ndarray:
    """Symbols ``z_i ~ cond[given_i, :]``; ``count`` independent rows if given."""
    shape = given.shape if count is None else (count,) + given.shape
    if cond.shape[-1] == 1:
        return np.zeros(shape, dtype=np.int64)
    r = rng.random(shape)
    return (r[..., None] >= _cdf(cond)[given]).sum(axis=-1)


class Scheme:
    """Probability tables of one (channel, auxiliary scheme) pair."""

    def __init__(self, ch: StateChannel, aux: AuxScheme):
        aux.check_channel(ch)
        self.ch = ch
        self.aux = aux
        self.cards = tuple(aux.cards)
        S = ch.n_states
        W, U, V = self.cards
        p_swuv = ch.state_pmf[:, None, None, None] * aux.aux_pmf
        self.p_swuv = p_swuv
        self.p_sw = p_swuv.sum(axis=(2, 3))
        self.p_w = self.p_sw.sum(axis=0)
        p_wu = p_swuv.sum(axis=(0, 3))
        p_wv = p_swuv.sum(axis=(0, 2))
        self.u_given_w = _cond_rows(p_wu)
        self.v_given_w = _cond_rows(p_wv)
        self.s_probs = ch.state_pmf
        # (w, s) code = w * S + s; layer tables p(ws, u, v)
        self.p_ws_u_v = np.transpose(p_swuv, (1, 0, 2, 3)).reshape(W * S, U, V)
        self.p_ws_u = self.p_ws_u_v.sum(axis=2)
        self.p_ws_v = self.p_ws_u_v.sum(axis=1)
        self.p_ws = self.p_ws_u.sum(axis=1)
        # decoder tables p(w, layer, y_k)
        self.p_dec = {}
        for k in (1, 2):
            t = ch.transition(k)  # (X, S, Y)
            xs = np.moveaxis(aux.x_map, -1, 0)  # (S, W, U, V)
            A = t[xs, np.arange(S)[:, None, None, None], :]  # (S, W, U, V, Y)
            p = np.einsum("swuv,swuvy->wuvy", p_swuv, A)
            self.p_dec[k] = p.sum(axis=2) if k == 1 else p.sum(axis=1)

    def layer_given_w(self, receiver: int) -> np.ndarray:
        return self.u_given_w if receiver == 1 else self.v_given_w


def _cond_rows(joint2: np.ndarray) -> np.ndarray:
    tot = joint2.sum(axis=1, keepdims=True)
    k = joint2.shape[1]
    return np.where(tot > 0, joint2 / np.where(tot > 0, tot, 1.0), 1.0 / k)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Explicit codebook: ``w[m, l0]``, ``u[m, l0, l1]``, ``v[m, l0, l2]`` (0-based)."""

    scheme: Scheme
    w: np.ndarray  # (M, L0, n)
    u: np.ndarray  # (M, L0, L1, n)
    v: np.ndarray  # (M, L0, L2, n)

    @property
    def n_messages(self) -> int:
        return self.w.shape[0]

    @property
    def n(self) -> int:
        return self.w.shape[-1]

    def bin(self, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.w[m], self.u[m], self.v[m]


def generate_bin(scheme: Scheme, sizes, n: int, rng: np.random.Generator):
    """Cloud and satellite sequences of one message."""
    _, L0, L1, L2 = sizes
    w = draw_symbols(rng, scheme.p_w, (L0, n))
    u = np.moveaxis(draw_conditional(rng, scheme.u_given_w, w, L1), 0, 1)
    v = np.moveaxis(draw_conditional(rng, scheme.v_given_w, w, L2), 0, 1)
    return w, u, v


def generate_codebook(ch: StateChannel, aux: AuxScheme, cfg: SimConfig,
                      rng: np.random.Generator | int) -> Codebook:
    """Full codebook; bins are drawn in message order from ``rng``."""
    scheme = ch if isinstance(ch, Scheme) else Scheme(ch, aux)
    cfg.check_guard(scheme.cards)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    sizes = cfg.sizes(scheme.cards)
    bins = [generate_bin(scheme, sizes, cfg.n, rng) for _ in range(sizes[0])]
    return Codebook(scheme, *(np.stack(parts) for parts in zip(*bins)))


# --------------------------------------------------------------------------
# typicality on batches of sequences


def _typical_rows(codes: np.ndarray, probs: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Robust typicality of each row of joint-symbol ``codes`` (B, n) w.r.t. flat ``probs``."""
    lo, hi = count_bounds(probs.ravel(), n, eps)
    A = probs.size
    if codes.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    offs = codes + A * np.arange(codes.shape[0])[:, None]
    counts = np.bincount(offs.ravel(), minlength=A * codes.shape[0]).reshape(-1, A)
    return np.all((counts >= lo) & (counts <= hi), axis=1)


@dataclass(frozen=True)
class Encoding:
    l0: int
    l1: int
    l2: int
    x: np.ndarray
    failed: bool


def encode_bin(scheme: Scheme, w, u, v, s: np.ndarray, eps: float) -> Encoding:
    """Run the encoder on one message's bin. Indices are 0-based."""
    S = scheme.ch.n_states
    n = s.shape[0]
    W, U, V = scheme.cards
    failed = False
    ws_codes = w * S + s[None, :]
    ok0 = _typical_rows(ws_codes, scheme.p_ws, n, eps)
    hits0 = np.flatnonzero(ok0)
    l0 = int(hits0[0]) if hits0.size else 0
    failed |= hits0.size == 0
    c = ws_codes[l0]
    uu, vv = u[l0], v[l0]
    cand1 = np.flatnonzero(_typical_rows(c[None] * U + uu, scheme.p_ws_u, n, eps))
    cand2 = np.flatnonzero(_typical_rows(c[None] * V + vv, scheme.p_ws_v, n, eps))
    pair = _first_typical_pair(c, uu[cand1], vv[cand2], scheme.p_ws_u_v, n, eps)
    if pair is None:
        l1 = l2 = 0
        failed = True
    else:
        l1, l2 = int(cand1[pair[0]]), int(cand2[pair[1]])
    x = scheme.aux.x_map[w[l0], uu[l1], vv[l2], s]
    return Encoding(l0, l1, l2, x, bool(failed))


def _first_typical_pair(c, us, vs, p_cuv, n, eps):
    """Row-major first (i, j) with (c, us[i], vs[j]) typical, or None."""
    flat = np.flatnonzero(_pair_matrix(c, us, vs, p_cuv, n, eps).ravel())
    if flat.size == 0:
        return None
    return divmod(int(flat[0]), len(vs))


def encode(m: int, s_seq, codebook: Codebook, cfg: SimConfig) -> Encoding:
    """Encode message ``m`` (0-based) for state sequence ``s_seq``."""
    if not 0 <= m < codebook.n_messages:
        raise ValueError(f"message {m} out of range [0, {codebook.n_messages})")
    s = np.asarray(s_seq, dtype=np.int64)
    return encode_bin(codebook.scheme, *codebook.bin(m), s, cfg.epsilon)


# --------------------------------------------------------------------------
# decoding


NONE = "none"
AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class Decoded:
    message: int | None
    marker: str  # "ok", "none" or "ambiguous"


def message_hits(scheme: Scheme, receiver: int, w: np.ndarray, layer: np.ndarray,
                 y: np.ndarray, eps: float) -> np.ndarray:
    """Per message: whether some (l0, l_k) is typical with ``y``.

    ``w`` has shape (M, L0, n) and ``layer`` (M, L0, Lk, n).
    """
    p = scheme.p_dec[receiver]  # (W, L, Y)
    _, L, Y = p.shape
    M, L0, n = w.shape
    wy = _typical_rows((w * Y + y).reshape(-1, n), p.sum(axis=1), n, eps)
    hits = np.zeros(M, dtype=bool)
    rows = np.flatnonzero(wy)
    if rows.size == 0:
        return hits
    m_idx, l0_idx = np.divmod(rows, L0)
    sub_w = w[m_idx, l0_idx]  # (r, n)
    sub_l = layer[m_idx, l0_idx]  # (r, Lk, n)
    codes = (sub_w[:, None, :] * L + sub_l) * Y + y
    ok = _typical_rows(codes.reshape(-1, n), p, n, eps).reshape(len(rows), -1).any(axis=1)
    hits[m_idx[ok]] = True
    return hits


def bin_hits(scheme: Scheme, receiver: int, w: np.ndarray, layer: np.ndarray,
             y: np.ndarray, eps: float) -> bool:
    """Whether some (l0, l_k) of one bin is typical with ``y``."""
    return bool(message_hits(scheme, receiver, w[None], layer[None], y, eps)[0])


def decode(receiver: int, y_seq, codebook: Codebook, cfg: SimConfig) -> Decoded:
    """Indirect decoding of the message through the receiver's layer pair."""
    y = np.asarray(y_seq, dtype=np.int64)
    if y.shape != (codebook.n,):
        raise ValueError(f"expected an output sequence of length {codebook.n}")
    layer = codebook.u if receiver == 1 else codebook.v
    hits = np.flatnonzero(message_hits(codebook.scheme, receiver, codebook.w, layer, y,
                                       cfg.epsilon_prime)).tolist()
    if len(hits) == 1:
        return Decoded(hits[0], "ok")
    return Decoded(None, NONE if not hits else AMBIGUOUS)


class WrongBinModel:
    """Exact probability that an independent random bin passes the decoder test."""

    def __init__(self, scheme: Scheme, receiver: int, n: int, L0: int, Lk: int, eps: float):
        self.p = scheme.p_dec[receiver]  # (W, L, Y)
        self.lo, self.hi = count_bounds(self.p, n, eps)
        self.cond = scheme.layer_given_w(receiver)
        self.p_w = scheme.p_w
        self.n, self.L0, self.Lk = n, L0, Lk
        self._box = lru_cache(maxsize=None)(self._box_prob)

    def _box_prob(self, count: int, w: int, y: int) -> float:
        """P(multinomial(count, p(.|w)) lands in the typicality box of cells (w, ., y))."""
        lo, hi = self.lo[w, :, y], self.hi[w, :, y]
        probs = self.cond[w]
        L = len(probs)
        if lo.sum() > count or hi.sum() < count:
            return 0.0
        total = 0.0
        logp = np.log(np.where(probs > 0, probs, 1.0))
        base = gammaln(count + 1)
        for head in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(L - 1))):
            last = count - sum(head)
            if not lo[L - 1] <= last <= hi[L - 1]:
                continue
            ks = head + (last,)
            if any(k > 0 and probs[i] == 0 for i, k in enumerate(ks)):
                continue
            total += math.exp(base + sum(k * logp[i] - gammaln(k + 1) for i, k in enumerate(ks)))
        return min(total, 1.0)

    def hit_probability(self, y: np.ndarray) -> float:
        W = self.p.shape[0]
        y_counts = np.bincount(y, minlength=self.p.shape[2])
        # w-counts within each y class: independent multinomials with p_W
        per_class = []
        for b, nb in enumerate(y_counts):
            comps = [c for c in _compositions(int(nb), W) if all(k == 0 or self.p_w[i] > 0 for i, k in enumerate(c))]
            per_class.append(comps)
        n_terms = math.prod(len(c) for c in per_class)
        if n_terms > MAX_TYPE_TERMS:
            raise SizeGuardError(f"{n_terms} joint types to enumerate; use the explicit mode")
        log_pw = np.log(np.where(self.p_w > 0, self.p_w, 1.0))
        # probability that one random cloud has a typical satellite among its Lk
        cloud_hit = 0.0
        for combo in itertools.product(*per_class):
            pi = 1.0
            for b, comp in enumerate(combo):
                for w, k in enumerate(comp):
                    if k:
                        pi *= self._box(k, w, b)
                    elif self.lo[w, :, b].sum() > 0:
                        pi = 0.0
                if pi == 0.0:
                    break
            if pi == 0.0:
                continue
            logprob = sum(gammaln(int(y_counts[b]) + 1)
                          + sum(k * log_pw[i] - gammaln(k + 1) for i, k in enumerate(comp))
                          for b, comp in enumerate(combo))
            sat_hit = 1.0 if pi >= 1 else -math.expm1(self.Lk * math.log1p(-pi))
            cloud_hit += math.exp(logprob) * sat_hit
        cloud_hit = min(max(cloud_hit, 0.0), 1.0)
        if cloud_hit == 1.0:
            return 1.0
        return -math.expm1(self.L0 * math.log1p(-cloud_hit))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


# --------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    trials: int
    encoder_failures: int
    decoder1_errors: int
    decoder2_errors: int
    overall_errors: int
    mode: str = "explicit"

    @property
    def encoder_failure_rate(self) -> float:
        return self.encoder_failures / self.trials

    @property
    def decoder1_error_rate(self) -> float:
        return self.decoder1_errors / self.trials

    @property
    def decoder2_error_rate(self) -> float:
        return self.decoder2_errors / self.trials

    @property
    def overall_error_rate(self) -> float:
        return self.overall_errors / self.trials

    def csv_row(self) -> dict:
        c = self.config
        return {"n": c.n, "R": c.R, "T0": c.T0, "T1": c.T1, "T2": c.T2,
                "epsilon": c.epsilon, "trials": self.trials,
                "enc_fail": self.encoder_failure_rate, "err1": self.decoder1_error_rate,
                "err2": self.decoder2_error_rate, "err_overall": self.overall_error_rate}


def results_to_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def _choose_mode(cfg: SimConfig, sizes) -> str:
    if cfg.mode != "auto":
        return cfg.mode
    M, L0, L1, L2 = sizes
    return "explicit" if M * L0 * (1 + L1 + L2) * cfg.n <= EXPLICIT_LIMIT else "lazy"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("STATECODER_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TrialOutcome:
    enc_fail: bool
    err1: bool
    err2: bool


def _run_one(scheme: Scheme, cfg: SimConfig, sizes, mode: str, trial: int, models) -> TrialOutcome:
    M = sizes[0]
    n = cfg.n
    seed = cfg.seed
    m = int(_rng(seed, trial, STREAM_MESSAGE).integers(M)) if M > 1 else 0
    s = draw_symbols(_rng(seed, trial, STREAM_STATE), scheme.s_probs, (n,))
    own = generate_bin(scheme, sizes, n, _rng(seed, trial, STREAM_BIN, m))
    enc = encode_bin(scheme, *own, s, cfg.epsilon)
    rc = _rng(seed, trial, STREAM_CHANNEL)
    ys = []
    for k in (1, 2):
        t = scheme.ch.transition(k)
        ys.append(draw_conditional(rc, t.reshape(-1, t.shape[2]), enc.x * scheme.ch.n_states + s))
    errs = []
    if mode == "explicit":
        bins = [own if mm == m else generate_bin(scheme, sizes, n, _rng(seed, trial, STREAM_BIN, mm))
                for mm in range(M)]
        stacked = [np.stack(parts) for parts in zip(*bins)]
        for k, y in zip((1, 2), ys):
            hits = np.flatnonzero(message_hits(scheme, k, stacked[0], stacked[k], y, cfg.epsilon_prime))
            errs.append(hits.tolist() != [m])
    else:
        for k, y in zip((1, 2), ys):
            own_hit = bin_hits(scheme, k, own[0], own[k], y, cfg.epsilon_prime)
            q = models[k].hit_probability(y) if M > 1 else 0.0
            wrong = int(_rng(seed, trial, STREAM_WRONG, k).binomial(M - 1, q)) if M > 1 else 0
            errs.append(not (own_hit and wrong == 0))
    return TrialOutcome(enc.failed, errs[0], errs[1])


def _prepare(ch: StateChannel, aux: AuxScheme, cfg: SimConfig):
    scheme = Scheme(ch, aux)
    cfg.check_guard(scheme.cards)
    sizes = cfg.sizes(scheme.cards)
    mode = _choose_mode(cfg, sizes)
    M, L0, L1, L2 = sizes
    models = {}
    if mode == "lazy":
        models = {1: WrongBinModel(scheme, 1, cfg.n, L0, L1, cfg.epsilon_prime),
                  2: WrongBinModel(scheme, 2, cfg.n, L0, L2, cfg.epsilon_prime)}
    elif M * L0 * (L1 + L2) * cfg.n > (1 << SIZE_GUARD_LOG2):
        raise SizeGuardError("explicit mode would store more than 2^26 symbols; use mode='lazy'")
    return scheme, sizes, mode, models


def trial_outcomes(ch: StateChannel, aux: AuxScheme, cfg: SimConfig) -> list[TrialOutcome]:
    """Per-trial encoder failure and decoder error flags, in trial order."""
    scheme, sizes, mode, models = _prepare(ch, aux, cfg)
    run = lambda t: _run_one(scheme, cfg, sizes, mode, t, models)
    threads = thread_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(run, range(cfg.trials)))
    return [run(t) for t in range(cfg.trials)]


def run_trials(ch: StateChannel, aux: AuxScheme, cfg: SimConfig) -> SimResult:
    """Fresh state, message and codebook per trial; counts of each error type."""
    outcomes = trial_outcomes(ch, aux, cfg)
    return SimResult(
        config=cfg,
        trials=cfg.trials,
        encoder_failures=sum(o.enc_fail for o in outcomes),
        decoder1_errors=sum(o.err1 for o in outcomes),
        decoder2_errors=sum(o.err2 for o in outcomes),
        overall_errors=sum(o.err1 or o.err2 for o in outcomes),
        mode=_choose_mode(cfg, cfg.sizes(aux.cards)),
    )


def margin_rates(ch: StateChannel, aux: AuxScheme, R: float, margin: float) -> tuple[float, float, float]:
    """(T0, T1, T2) placed ``margin`` above their covering thresholds.

    Layers with a one-letter alphabet get rate 0. The sum condition is met by
    raising both satellite rates equally when needed.
    """
    it = information_terms(ch, aux)
    W, U, V = aux.cards
    T0 = 0.0 if W == 1 else it.i_w_s + margin
    T1 = 0.0 if U == 1 else it.i_u_s_w + margin
    T2 = 0.0 if V == 1 else it.i_v_s_w + margin
    need = it.i_u_s_w + it.i_v_s_w + it.i_u_v_ws + margin
    if U > 1 and V > 1 and T1 + T2 < need:
        extra = (need - T1 - T2) / 2
        T1 += extra
        T2 += extra
    return T0, T1, T2


# --------------------------------------------------------------------------
# covering experiment


@dataclass(frozen=True)
class CoveringTable:
    n: int
    epsilon: float
    trials: int
    T1: tuple[float, ...]
    T2: tuple[float, ...]
    success: np.ndarray  # (len(T1), len(T2))
    conditions: dict = field(default_factory=dict)

    def is_monotone(self) -> bool:
        s = self.success
        return bool(np.all(np.diff(s, axis=0) >= 0) and np.all(np.diff(s, axis=1) >= 0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "epsilon", "trials", "T1", "T2", "success"])
        for i, t1 in enumerate(self.T1):
            for j, t2 in enumerate(self.T2):
                writer.writerow([self.n, self.epsilon, self.trials, t1, t2, float(self.success[i, j])])
        return buf.getvalue()


def _draw_typical_ws(scheme: Scheme, n: int, eps: float, rng: np.random.Generator,
                     max_tries: int = 100_000) -> tuple[np.ndarray, np.ndarray]:
    """(w^n, s^n) iid from p(s, w), conditioned on being typical."""
    S = scheme.ch.n_states
    flat = scheme.p_sw.ravel()  # code = s * W + w
    W = scheme.cards[0]
    p_ws = scheme.p_ws
    for _ in range(max_tries):
        codes = draw_symbols(rng, flat, (n,))
        s, w = np.divmod(codes, W)
        if _typical_rows((w * S + s)[None], p_ws, n, eps)[0]:
            return w, s
    raise RuntimeError("no typical (w, s) pair found; epsilon too small for this n")


def covering_experiment(ch: StateChannel, aux: AuxScheme, n: int, T1_grid, T2_grid, *,
                        trials: int = 200, epsilon: float | None = None, seed: int = 0) -> CoveringTable:
    """Empirical probability that the satellite search finds a typical pair.

    Per trial one typical ``(w^n, s^n)`` is drawn together with the largest
    satellite lists; the cell ``(T1, T2)`` uses the first ``2^ceil(n T1)``
    ``u``-sequences and first ``2^ceil(n T2)`` ``v``-sequences of those lists,
    so candidate sets are nested across the grid.
    """
    scheme = Scheme(ch, aux)
    eps = default_epsilon(n) if epsilon is None else float(epsilon)
    cfg = SimConfig(n=n, R=0.0, T1=max(T1_grid), T2=max(T2_grid), epsilon=eps, trials=trials, seed=seed)
    cfg.check_guard(scheme.cards)
    W, U, V = scheme.cards
    L1s = np.array([1 if U == 1 else 1 << cfg.exponent(t) for t in T1_grid])
    L2s = np.array([1 if V == 1 else 1 << cfg.exponent(t) for t in T2_grid])
    L1max, L2max = int(L1s.max()), int(L2s.max())
    S = ch.n_states
    success = np.zeros((len(L1s), len(L2s)))
    for trial in range(trials):
        rng = _rng(seed, trial)
        w, s = _draw_typical_ws(scheme, n, eps, rng)
        u = draw_conditional(rng, scheme.u_given_w, w, L1max)
        v = draw_conditional(rng, scheme.v_given_w, w, L2max)
        c = w * S + s
        cand1 = np.flatnonzero(_typical_rows(c[None] * U + u, scheme.p_ws_u, n, eps))
        cand2 = np.flatnonzero(_typical_rows(c[None] * V + v, scheme.p_ws_v, n, eps))
        ok = _pair_matrix(c, u[cand1], v[cand2], scheme.p_ws_u_v, n, eps)
        # smallest l2 over pairs whose l1 is at most a given index
        first_l2 = np.full(L1max, np.iinfo(np.int64).max)
        for i, l1 in enumerate(cand1):
            js = np.flatnonzero(ok[i])
            if js.size:
                first_l2[l1] = cand2[js[0]]
        prefix = np.minimum.accumulate(first_l2)
        success += prefix[L1s - 1][:, None] < L2s[None, :]
    it = information_terms(ch, aux)
    conds = {"I(U;S|W)": it.i_u_s_w, "I(V;S|W)": it.i_v_s_w,
             "I(U;S|W)+I(V;S|W)+I(U;V|W,S)": it.i_u_s_w + it.i_v_s_w + it.i_u_v_ws}
    return CoveringTable(n, eps, trials, tuple(float(t) for t in T1_grid),
                         tuple(float(t) for t in T2_grid), success / trials, conds)


def _pair_matrix(c, us, vs, p_cuv, n, eps) -> np.ndarray:
    """Typicality of (c, us[i], vs[j]) for all pairs, via per-cell count products."""
    if len(us) == 0 or len(vs) == 0:
        return np.zeros((len(us), len(vs)), dtype=bool)
    C, U, V = p_cuv.shape
    lo, hi = count_bounds(p_cuv, n, eps)
    ok = np.ones((len(us), len(vs)), dtype=bool)
    v_ind = [(vs == b).astype(np.float64) for b in range(V)]
    for a in range(C):
        mask_c = c == a
        for uu in range(U):
            left = ((us == uu) & mask_c[None]).astype(np.float64)
            for b in range(V):
                cnt = left @ v_ind[b].T
                ok &= (cnt >= lo[a, uu, b] - 0.5) & (cnt <= hi[a, uu, b] + 0.5)
    return ok
