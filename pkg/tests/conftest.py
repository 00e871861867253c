import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from statecoder.channel_model import AuxScheme, GpAux, StateChannel, example_channel, section3_scheme

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_channel(rng, S=None, X=None, Y1=None, Y2=None, sparse=0.3):
    """Random channel with alphabets of at most 3 letters and some zero entries."""
    S, X, Y1, Y2 = (int(v) if v else int(rng.integers(1, 4)) for v in (S, X, Y1, Y2))

    def table(Y):
        t = rng.dirichlet(np.ones(Y), size=(X, S))
        t = np.where(rng.random(t.shape) < sparse, 0.0, t)
        t[..., 0] += (t.sum(axis=-1) == 0)
        return t / t.sum(axis=-1, keepdims=True)

    return StateChannel(rng.dirichlet(np.ones(S)), table(Y1), table(Y2))


def random_scheme(rng, ch, cards=None, sparse=0.3):
    cards = tuple(cards) if cards else tuple(int(c) for c in rng.integers(1, 4, size=3))
    K = int(np.prod(cards))
    q = rng.dirichlet(np.ones(K), size=ch.n_states)
    q = np.where(rng.random(q.shape) < sparse, 0.0, q)
    q[:, 0] += (q.sum(axis=1) == 0)
    q /= q.sum(axis=1, keepdims=True)
    xmap = rng.integers(ch.n_inputs, size=cards + (ch.n_states,))
    return AuxScheme(q.reshape((ch.n_states,) + cards), xmap)


def random_gp(rng, ch, card=None):
    card = int(card or rng.integers(1, 5))
    q = rng.dirichlet(np.ones(card), size=ch.n_states)
    return GpAux(q, rng.integers(ch.n_inputs, size=(card, ch.n_states)))


def brute_joint(ch, aux, receiver):
    """Dense p(s,w,u,v,x,y) by explicit loops; independent of the library's einsum path."""
    S = ch.n_states
    W, U, V = aux.cards
    t = ch.transition(receiver)
    Y = t.shape[2]
    out = np.zeros((S, W, U, V, ch.n_inputs, Y))
    for s, w, u, v in itertools.product(range(S), range(W), range(U), range(V)):
        x = aux.x_map[w, u, v, s]
        for y in range(Y):
            out[s, w, u, v, x, y] += ch.state_pmf[s] * aux.aux_pmf[s, w, u, v] * t[x, s, y]
    return out


def h_bits(p):
    p = np.asarray(p).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@pytest.fixture
def ex():
    return example_channel()


@pytest.fixture
def s3():
    return section3_scheme()
