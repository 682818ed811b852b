"""Synthetic two-class scenarios with a known optimal decision rule.

Two scenarios are provided. "normal" draws the two classes from unit-variance
Gaussians centered at (0, 0) and (2, 2), half the sample each, so the optimal
rule is the diagonal line x1 + x2 = 2 and its error rate has a closed form.
"sine" draws points uniformly on [-3, 3]^2 and assigns +1 with probability
exp(g) / (exp(g) + exp(-g)) where g(x) = (x2 - 3 sin x1) / 2, so labels are
inherently stochastic near the curve x2 = 3 sin x1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .util import sign_pm

__all__ = [
    "SynthSpec",
    "gen_normal",
    "gen_sine",
    "generate",
    "bayes_label",
    "sine_margin",
    "sine_positive_prob",
    "normal_bayes_error",
]

SCENARIOS = ("normal", "sine")


@dataclass(frozen=True)
class SynthSpec:
    scenario: str
    n: int
    seed: int

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}, expected one of {SCENARIOS}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")


def gen_normal(n: int, seed: int) -> Dataset:
    """n//2 points from N((0,0), I) labeled -1 and the rest from N((2,2), I) labeled +1.

    Rows are shuffled after drawing so class blocks are not contiguous.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    n_neg = n // 2
    n_pos = n - n_neg
    X = rng.standard_normal((n, 2))
    X[n_neg:] += 2.0
    y = np.concatenate([-np.ones(n_neg, dtype=np.int64), np.ones(n_pos, dtype=np.int64)])
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm])


def sine_margin(X) -> np.ndarray:
    """g(x) = (x2 - 3 sin x1) / 2, positive above the sine curve."""
    X = np.asarray(X, dtype=np.float64)
    return 0.5 * (X[..., 1] - 3.0 * np.sin(X[..., 0]))


def sine_positive_prob(X) -> np.ndarray:
    """P(label = +1 | x) = exp(g) / (exp(g) + exp(-g)), a logistic in 2 g(x)."""
    g = sine_margin(X)
    return 1.0 / (1.0 + np.exp(-2.0 * g))


def gen_sine(n: int, seed: int) -> Dataset:
    """Uniform features on [-3, 3]^2 with stochastic labels around x2 = 3 sin x1."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3.0, 3.0, size=(n, 2))
    u = rng.uniform(size=n)
    y = np.where(u < sine_positive_prob(X), 1, -1).astype(np.int64)
    return Dataset(X, y)


def generate(spec: SynthSpec) -> Dataset:
    if spec.scenario == "normal":
        return gen_normal(spec.n, spec.seed)
    return gen_sine(spec.n, spec.seed)


def bayes_label(scenario: str, x) -> np.ndarray:
    """Optimal label(s) for feature vector(s) x under the named scenario.

    Ties on the decision boundary go to +1, matching the package-wide
    convention for zero scores.
    """
    x = np.asarray(x, dtype=np.float64)
    if scenario == "normal":
        return sign_pm(x[..., 0] + x[..., 1] - 2.0)
    if scenario == "sine":
        return sign_pm(sine_margin(x))
    raise ValueError(f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")


def normal_bayes_error() -> float:
    """Error rate of the optimal rule for the normal scenario.

    The optimal rule thresholds x1 + x2 at 2; projecting either class onto
    the (1,1)/sqrt(2) direction gives a unit-variance Gaussian whose mean sits
    sqrt(2) away from the threshold, hence Phi(-sqrt(2)).
    """
    return 0.5 * (1.0 + math.erf(-1.0))
