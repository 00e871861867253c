"""Compound Gaussian channel with a Bernoulli channel selector and dirty-paper coding.

The state is ``S = (T, Z_S)`` with ``T ~ Bern(alpha)`` choosing the active
receiver gain and ``Z_S`` Gaussian interference of variance ``Q_T``. On each
branch the encoder dirty-paper codes with its own power, ``P1`` when T=0 and
``P2`` when T=1, subject to ``alpha P1 + (1-alpha) P2 = P``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

POWER_TOL = 1e-9


def gaussian_capacity(x: float) -> float:
    """C(x) = 0.5 log2(1 + x)."""
    return 0.5 * math.log2(1.0 + x)


@dataclass(frozen=True)
class GaussianCompound:
    alpha: float
    g1: float
    g2: float
    Q0: float = 1.0
    Q1: float = 1.0
    P: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.g1 == 0 or self.g2 == 0:
            raise ValueError("channel gains must be nonzero")
        if self.Q0 < 0 or self.Q1 < 0:
            raise ValueError("state-noise variances must be nonnegative")
        if not self.P > 0:
            raise ValueError(f"power budget must be positive, got {self.P}")

    @property
    def alpha_bar(self) -> float:
        return 1.0 - self.alpha


@dataclass(frozen=True)
class BranchRates:
    rate1: float
    rate2: float

    @property
    def rate(self) -> float:
        return min(self.rate1, self.rate2)


def branch_rate(params: GaussianCompound, P1: float, P2: float) -> BranchRates:
    """Time-weighted dirty-paper rates of the two branches for one power split."""
    if P1 < 0 or P2 < 0:
        raise ValueError(f"branch powers must be nonnegative, got {(P1, P2)}")
    used = params.alpha * P1 + params.alpha_bar * P2
    if abs(used - params.P) > POWER_TOL:
        raise ValueError(f"power constraint violated: alpha*P1 + (1-alpha)*P2 = {used!r} != {params.P!r}")
    return BranchRates(params.alpha * gaussian_capacity(params.g1 ** 2 * P1),
                       params.alpha_bar * gaussian_capacity(params.g2 ** 2 * P2))


@dataclass(frozen=True)
class PowerSplit:
    P1: float
    P2: float
    rate1: float
    rate2: float
    rate: float
    interior: bool


def _p2(params: GaussianCompound, P1: float) -> float:
    return max(0.0, (params.P - params.alpha * P1) / params.alpha_bar)


def optimize_power_split(params: GaussianCompound) -> PowerSplit:
    """Maximize the smaller branch rate over ``P1 in [0, P/alpha]``.

    The first branch rate increases and the second decreases in ``P1``, so the
    optimum is where they cross; a root bracket always exists because the
    difference is negative at ``P1 = 0`` and positive at ``P1 = P/alpha``.
    """
    hi = params.P / params.alpha

    def diff(p1):
        p1 = min(max(p1, 0.0), hi)
        return (params.alpha * gaussian_capacity(params.g1 ** 2 * p1)
                - params.alpha_bar * gaussian_capacity(params.g2 ** 2 * _p2(params, p1)))

    P1 = brentq(diff, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    P2 = _p2(params, P1)
    r = BranchRates(params.alpha * gaussian_capacity(params.g1 ** 2 * P1),
                    params.alpha_bar * gaussian_capacity(params.g2 ** 2 * P2))
    return PowerSplit(P1, P2, r.rate1, r.rate2, r.rate, interior=0.0 < P1 < hi)


def grid_power_split(params: GaussianCompound, step: float = 1e-6) -> tuple[float, float]:
    """Brute-force oracle: best (P1, rate) on a uniform grid of the P1 range."""
    hi = params.P / params.alpha
    p1 = np.linspace(0.0, hi, int(round(hi / step)) + 1)
    p2 = np.maximum(0.0, (params.P - params.alpha * p1) / params.alpha_bar)
    r = np.minimum(params.alpha * 0.5 * np.log2(1 + params.g1 ** 2 * p1),
                   params.alpha_bar * 0.5 * np.log2(1 + params.g2 ** 2 * p2))
    i = int(np.argmax(r))
    return float(p1[i]), float(r[i])


# --------------------------------------------------------------------------
# precoding coefficient and its rate identity


def costa_coefficient(g: float, Pk: float) -> float:
    """MMSE coefficient a of U = X + a Z_S for Y = g X + Z_S + Z with unit noise."""
    return g * Pk / (1.0 + g ** 2 * Pk)


def _gauss_mi(cov: np.ndarray, a: list[int], b: list[int]) -> float:
    """I(A;B) in bits of a jointly Gaussian vector with covariance ``cov``."""
    def logdet(idx):
        sign, ld = np.linalg.slogdet(cov[np.ix_(idx, idx)])
        if sign <= 0:
            raise ArithmeticError("covariance block is singular")
        return ld
    return (logdet(a) + logdet(b) - logdet(a + b)) / (2 * math.log(2))


@dataclass(frozen=True)
class DpcCheck:
    coefficient: float
    i_u_y: float
    i_u_zs: float
    rate: float
    target: float

    @property
    def error(self) -> float:
        return abs(self.rate - self.target)


def dpc_auxiliary(g: float, Pk: float, Q: float, a: float | None = None) -> DpcCheck:
    """Precoding coefficient and the value of I(U;Y) - I(U;Z_S) on one branch.

    Variables are (X, Z_S, Z) independent with variances (Pk, Q, 1),
    ``Y = g X + Z_S + Z`` and ``U = X + a Z_S``. With ``Q = 0`` the interference
    vanishes and ``I(U;Z_S)`` is zero by convention.
    """
    if not Pk > 0:
        raise ValueError(f"branch power must be positive, got {Pk}")
    if g == 0:
        raise ValueError("gain must be nonzero")
    if Q < 0:
        raise ValueError("state-noise variance must be nonnegative")
    a = costa_coefficient(g, Pk) if a is None else float(a)
    target = gaussian_capacity(g ** 2 * Pk)
    if Q == 0:
        i_u_y = gaussian_capacity(g ** 2 * Pk)
        return DpcCheck(a, i_u_y, 0.0, i_u_y, target)
    # rows map the independent sources (X, Z_S, Z) to (U, Y, Z_S)
    A = np.array([[1.0, a, 0.0],
                  [g, 1.0, 1.0],
                  [0.0, 1.0, 0.0]])
    cov = A @ np.diag([Pk, Q, 1.0]) @ A.T
    i_u_y = _gauss_mi(cov, [0], [1])
    i_u_zs = _gauss_mi(cov, [0], [2])
    return DpcCheck(a, float(i_u_y), float(i_u_zs), float(i_u_y - i_u_zs), target)


def report(params: GaussianCompound) -> dict:
    """JSON-ready summary: parameters, optimal split, branch rates and checks."""
    split = optimize_power_split(params)
    checks = []
    for g, Pk, Q in ((params.g1, split.P1, params.Q0), (params.g2, split.P2, params.Q1)):
        if Pk > 0:
            c = dpc_auxiliary(g, Pk, Q)
            checks.append({"coefficient": c.coefficient, "rate": c.rate, "target": c.target})
        else:
            checks.append(None)
    return {"params": asdict(params), "split": asdict(split), "dpc": checks}


def report_json(params: GaussianCompound, **kw) -> str:
    return json.dumps(report(params), **kw)
