"""Primitive parameters, Bayesian posteriors and the critical-fine algebra.

The state of the project is ``theta`` in {-1, 1}.  The agent sees a
verifiable signal ``x`` and an unverifiable signal ``y``, both in {-1, 1},
conditionally independent given ``theta``, matching it with probabilities
``p_x`` and ``p_y`` respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Iterator, Optional, Tuple

SIGNALS = (1, -1)

# Root finding for the critical precisions.
BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200


class ModelError(ValueError):
    """Invalid parameters or a request outside an operation's domain."""


class CaseError(ModelError):
    """The environment is not in the efficiency case an operation requires."""


class EmptyRegionError(ModelError):
    """No precision level puts the environment in the requested case."""


class AgentType(str, Enum):
    UNBIASED = "u"
    BIASED = "b"


class CaseLabel(str, Enum):
    """Which signal pairs make acting interim efficient."""

    X_PIVOTAL = "x_pivotal"  # act iff x = 1
    Y_PIVOTAL = "y_pivotal"  # act iff y = 1
    EITHER_POSITIVE = "either_positive"  # act iff x + y >= 0
    BOTH_POSITIVE = "both_positive"  # act iff x = y = 1
    ALWAYS_EFFICIENT = "always_efficient"
    NEVER_EFFICIENT = "never_efficient"


def _open_unit(name: str, value: float, low: float = 0.0) -> float:
    value = float(value)
    if not (math.isfinite(value) and low < value < 1.0):
        raise ModelError(f"{name}={value!r} must lie strictly inside ({low}, 1)")
    return value


def _check_signal(name: str, value: int) -> int:
    if value not in (-1, 1):
        raise ModelError(f"{name} must be -1 or 1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class SignalPair:
    x: int
    y: int

    def __post_init__(self) -> None:
        _check_signal("x", self.x)
        _check_signal("y", self.y)


@dataclass(frozen=True)
class InformationEnvironment:
    """Prior ``beta`` that the project is good and the two signal precisions."""

    beta: float
    p_x: float
    p_y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", _open_unit("beta", self.beta))
        object.__setattr__(self, "p_x", _open_unit("p_x", self.p_x, 0.5))
        object.__setattr__(self, "p_y", _open_unit("p_y", self.p_y, 0.5))

    def with_(self, **changes: float) -> "InformationEnvironment":
        return replace(self, **changes)

    def likelihood(self, x: int, y: int, theta: int) -> float:
        """P(X=x, Y=y | theta)."""
        px = self.p_x if x == theta else 1.0 - self.p_x
        py = self.p_y if y == theta else 1.0 - self.p_y
        return px * py

    def prior(self, theta: int) -> float:
        return self.beta if theta == 1 else 1.0 - self.beta

    def joint(self, x: int, y: int, theta: int) -> float:
        """P(X=x, Y=y, theta)."""
        return self.prior(theta) * self.likelihood(x, y, theta)

    def signal_probability(self, x: int, y: int) -> float:
        return self.joint(x, y, 1) + self.joint(x, y, -1)

    def value(self, x: int, y: int) -> float:
        """Welfare weight of acting on (x, y): P(x, y) * (2 * posterior - 1)."""
        return self.joint(x, y, 1) - self.joint(x, y, -1)

    def pairs(self) -> Iterator[Tuple[int, int]]:
        for x in SIGNALS:
            for y in SIGNALS:
                yield x, y


@dataclass(frozen=True)
class PopulationModel:
    """Prior ``gamma`` on the unbiased type and the court's conviction threshold.

    ``gamma_bar = 1 / (1 + L)``.  Environments with ``gamma <= gamma_bar`` are
    accepted but flagged through :attr:`supported`.
    """

    gamma: float
    gamma_bar: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", _open_unit("gamma", self.gamma))
        object.__setattr__(self, "gamma_bar", _open_unit("gamma_bar", self.gamma_bar))

    @classmethod
    def from_loss(cls, gamma: float, loss: float) -> "PopulationModel":
        if not (math.isfinite(loss) and loss > 0):
            raise ModelError(f"L={loss!r} must be positive")
        return cls(gamma=gamma, gamma_bar=1.0 / (1.0 + loss))

    @property
    def loss(self) -> float:
        return 1.0 / self.gamma_bar - 1.0

    @property
    def supported(self) -> bool:
        return self.gamma > self.gamma_bar

    def prior(self, omega: AgentType) -> float:
        return self.gamma if omega is AgentType.UNBIASED else 1.0 - self.gamma


def _pair(s) -> Tuple[int, int]:
    if isinstance(s, SignalPair):
        return s.x, s.y
    x, y = s
    return _check_signal("x", x), _check_signal("y", y)


def posterior(env: InformationEnvironment, s) -> float:
    """Posterior probability that the project is good after observing ``s``."""
    x, y = _pair(s)
    good = env.joint(x, y, 1)
    bad = env.joint(x, y, -1)
    return good / (good + bad)


def posteriors(env: InformationEnvironment) -> dict:
    return {(x, y): posterior(env, (x, y)) for x, y in env.pairs()}


def is_efficient(belief: float) -> bool:
    # The designer is indifferent at 1/2; ties count as efficient.
    return belief >= 0.5


def classify_case(env: InformationEnvironment) -> CaseLabel:
    post = posteriors(env)
    efficient = {pair for pair, b in post.items() if is_efficient(b)}
    if len(efficient) == 4:
        return CaseLabel.ALWAYS_EFFICIENT
    if not efficient:
        return CaseLabel.NEVER_EFFICIENT
    if efficient == {(1, 1), (1, -1), (-1, 1)}:
        return CaseLabel.EITHER_POSITIVE
    if efficient == {(1, 1)}:
        return CaseLabel.BOTH_POSITIVE
    if efficient == {(1, 1), (1, -1)}:
        return CaseLabel.X_PIVOTAL
    if efficient == {(1, 1), (-1, 1)}:
        return CaseLabel.Y_PIVOTAL
    # Posteriors are ordered in each signal, so no other pattern can occur.
    raise AssertionError(f"impossible efficiency pattern {sorted(efficient)}")


def is_interior_either_positive(env: InformationEnvironment) -> bool:
    post = posteriors(env)
    return post[(-1, -1)] < 0.5 < post[(-1, 1)] and post[(1, -1)] > 0.5


def _odds(beta: float) -> float:
    return beta / (1.0 - beta)


def _delta(beta: float, p_x: float, p_y: float) -> float:
    bracket = (1.0 - p_y) / p_y - p_y / (1.0 - p_y)
    return 2.0 + _odds(beta) * (1.0 - p_x) / p_x * bracket


def delta(env: InformationEnvironment) -> float:
    """Gap between the deterring fine and the chilling fine, ``F^b - F^u``."""
    return _delta(env.beta, env.p_x, env.p_y)


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    increasing: bool,
    tol: float = BISECTION_TOL,
    max_iter: int = BISECTION_MAX_ITER,
) -> float:
    """Root of a monotone ``f`` on ``(lo, hi)``; endpoints are never evaluated.

    The caller guarantees a sign change, stating the direction instead of
    letting the routine probe the (possibly singular) endpoints.
    """
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        value = f(mid)
        if value == 0.0:
            return mid
        if (value < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_px(beta: float, p_y: float) -> Optional[float]:
    """Verifiable precision at which ``F^b = F^u`` inside the x+y>=0 region.

    ``delta`` rises in ``p_x`` towards 2 as ``p_x -> 1``, so a root exists iff
    it is negative at ``p_x = 1/2``.
    """
    beta = _open_unit("beta", beta)
    p_y = _open_unit("p_y", p_y, 0.5)
    if _delta(beta, 0.5, p_y) >= 0.0:
        return None
    root = bisect(lambda p: _delta(beta, p, p_y), 0.5, 1.0, increasing=True)
    if not is_interior_either_positive(InformationEnvironment(beta, root, p_y)):
        return None
    return root


def critical_py(beta: float, p_x: float) -> Optional[float]:
    """Unverifiable precision at which ``F^b = F^u`` inside the x+y>=0 region.

    ``delta`` equals 2 at ``p_y = 1/2`` and falls without bound as ``p_y -> 1``,
    so the root always exists; only the region check can reject it.
    """
    beta = _open_unit("beta", beta)
    p_x = _open_unit("p_x", p_x, 0.5)
    root = bisect(lambda p: _delta(beta, p_x, p), 0.5, 1.0, increasing=False)
    if not is_interior_either_positive(InformationEnvironment(beta, p_x, root)):
        return None
    return root


def case_region_bounds(beta: float, p_x: float) -> Tuple[float, float]:
    """Range of ``p_y`` for which acting is efficient iff ``x + y >= 0``.

    Each bound comes from one posterior sitting exactly at 1/2:
    ``beta_{-1,1}`` (lower), ``beta_{-1,-1}`` (lower, excluded) and
    ``beta_{1,-1}`` (upper).
    """
    beta = _open_unit("beta", beta)
    p_x = _open_unit("p_x", p_x, 0.5)
    good = beta * (1.0 - p_x)  # P(theta=1, x=-1)
    bad = (1.0 - beta) * p_x  # P(theta=-1, x=-1)
    act_on_mixed = bad / (good + bad)  # beta_{-1,1} >= 1/2
    deter_on_negative = good / (good + bad)  # beta_{-1,-1} < 1/2
    good_up = beta * p_x
    bad_up = (1.0 - beta) * (1.0 - p_x)
    act_on_x = good_up / (good_up + bad_up)  # beta_{1,-1} >= 1/2
    low = max(act_on_mixed, deter_on_negative, 0.5)
    high = min(act_on_x, 1.0)
    if low >= high:
        raise EmptyRegionError(
            f"no p_y puts (beta={beta}, p_x={p_x}) in the x+y>=0 region"
        )
    return low, high
