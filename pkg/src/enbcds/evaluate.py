"""Expected net benefit of a GDF as a function of cyber-defense spending.

The static net benefit of deploying a functionality is its benefit minus
direct costs, minus expected non-cyber losses, minus the expected
cyberattack cost.  Only the cyberattack term responds to defense spending,
through each attack's breach-probability model; everything else is a
constant, so the benefit-versus-spend curve is that constant minus the
spend-dependent cost ``f(s)``.

Two readings of how defense spend enters ``f`` are supported:

* ``ADDITIVE`` (default): ``f(s) = s + sum_j P_s(j) * loss_j``.  The spend
  is charged once, which keeps the curve strictly concave for the
  parametric breach families and gives the classic single-peak shape.
* ``LITERAL``: ``f(s) = sum_j P_s(j) * (loss_j + s)``, i.e. the defense
  cost is folded into every attack's cost term and therefore scaled by its
  success probability.  Kept for comparison only; not concave in general,
  so optimizers fall back to grid search under this mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .model import Gdf, Portfolio

__all__ = [
    "ADDITIVE",
    "LITERAL",
    "EvaluationError",
    "UnknownGdfError",
    "CycleDetectedError",
    "DegenerateRangeError",
    "EvalContext",
    "EnbcdsCurve",
    "effective_prob",
    "expected_cyber_cost",
    "enb",
    "enbcds_curve",
]

ADDITIVE = "additive"
LITERAL = "literal"


class EvaluationError(Exception):
    pass


class UnknownGdfError(EvaluationError):
    pass


class CycleDetectedError(EvaluationError):
    pass


class DegenerateRangeError(EvaluationError):
    pass


@dataclass(frozen=True)
class EvalContext:
    """Evaluation environment: portfolio edges, per-GDF spends, and mode.

    ``spends`` supplies the defense spend of every deployed GDF so that
    upstream compromise probabilities can be computed; a GDF missing from
    the map is treated as unfunded (spend 0).  Contexts cache upstream
    compromise probabilities, so build a fresh context whenever the spends
    change.
    """

    portfolio: Portfolio | None = None
    spends: Mapping[str, float] = field(default_factory=dict)
    mode: str = ADDITIVE
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in (ADDITIVE, LITERAL):
            raise ValueError(f"unknown evaluation mode {self.mode!r}")
        spends = {str(k): float(v) for k, v in dict(self.spends).items()}
        for k, v in spends.items():
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"spend for {k!r} must be finite and >= 0, got {v!r}")
            if self.portfolio is not None:
                try:
                    self.portfolio.gdf(k)
                except KeyError:
                    raise UnknownGdfError(f"spend names gdf {k!r} not in the portfolio")
        object.__setattr__(self, "spends", spends)


def _require_spend(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s < 0.0:
        raise ValueError(f"spend must be finite and >= 0, got {s!r}")
    return s


def _check_member(x: Gdf, context: EvalContext | None) -> None:
    if context is not None and context.portfolio is not None:
        try:
            context.portfolio.gdf(x.id)
        except KeyError:
            raise UnknownGdfError(f"gdf {x.id!r} is not part of the context portfolio")


def _base_prob(x: Gdf, attack, s: float) -> float:
    mult = attack.breach.multiplier(s, attack.baseline_prob)
    return min(1.0, attack.baseline_prob * mult)


def _compromise_prob(gdf_id: str, context: EvalContext, visiting: frozenset) -> float:
    """Probability that at least one attack against ``gdf_id`` succeeds."""
    cache = context._cache
    if gdf_id in cache:
        return cache[gdf_id]
    gdf = context.portfolio.gdf(gdf_id)
    s = context.spends.get(gdf_id, 0.0)
    miss = 1.0
    for attack in gdf.attacks:
        miss *= 1.0 - _effective_prob(gdf, attack, s, context, visiting)
    q = 1.0 - miss
    cache[gdf_id] = q
    return q


def _effective_prob(x: Gdf, attack, s: float, context: EvalContext | None, visiting: frozenset) -> float:
    base = _base_prob(x, attack, s)
    if context is None or context.portfolio is None:
        return base
    parents = context.portfolio.parents_of(x.id)
    if not parents:
        return base
    visiting = visiting | {x.id}
    # Parents compromise independently; fold each one's two states
    # (untouched / compromised, the latter multiplying the uplift) into a
    # distribution over accumulated uplift products, then take the expected
    # clamped probability.  This matches exhaustive enumeration over parent
    # compromise-state combinations exactly.
    dist = [(1.0, 1.0)]
    for edge in parents:
        if edge.source in visiting:
            raise CycleDetectedError(
                f"dependency cycle through {edge.source!r} while evaluating {x.id!r}"
            )
        q = _compromise_prob(edge.source, context, visiting)
        uplift = edge.uplift.get(attack.id, 1.0)
        dist = [
            pair
            for prob, prod in dist
            for pair in ((prob * (1.0 - q), prod), (prob * q, prod * uplift))
        ]
    return sum(prob * min(1.0, base * prod) for prob, prod in dist)


def effective_prob(x: Gdf, attack_id: str, s: float, context: EvalContext | None = None) -> float:
    """Success probability of ``attack_id`` against ``x`` at spend ``s``.

    Without dependency context this is ``baseline * g(s)``.  With upstream
    parents, each parent's compromise probability mixes the baseline with
    the uplifted (clamped) probability, independently across parents.
    """
    _require_spend(s)
    _check_member(x, context)
    return _effective_prob(x, x.attack(attack_id), s, context, frozenset())


def expected_cyber_cost(x: Gdf, s: float, context: EvalContext | None = None) -> float:
    """Expected cyberattack cost ``f(s)`` of ``x`` at defense spend ``s``.

    In the default additive mode this is the spend plus the expected loss
    over the GDF's attack set; see the module docstring for the literal
    alternative.
    """
    s = _require_spend(s)
    _check_member(x, context)
    loss = 0.0
    prob_total = 0.0
    for attack in x.attacks:
        p = _effective_prob(x, attack, s, context, frozenset())
        loss += p * attack.loss
        prob_total += p
    if context is not None and context.mode == LITERAL:
        return loss + s * prob_total
    return s + loss


def enb(x: Gdf, s: float, context: EvalContext | None = None) -> float:
    """Expected net benefit of deploying ``x`` with defense spend ``s``.

    Benefits minus direct costs, minus the expected non-cyber adverse cost
    (spend-independent), minus :func:`expected_cyber_cost`.  Negative values
    mean the functionality is an expected loss at that spending level.
    """
    noncyber = sum(ev.prob * ev.cost for ev in x.adverse)
    return x.ben - x.dir_costs - noncyber - expected_cyber_cost(x, s, context)


@dataclass(frozen=True)
class EnbcdsCurve:
    """Sampled benefit-versus-spend curve with its solved peak."""

    gdf_id: str
    samples: tuple[tuple[float, float], ...]
    s_star: float
    peak_value: float

    @property
    def spends(self) -> tuple[float, ...]:
        return tuple(s for s, _ in self.samples)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.samples)


def enbcds_curve(
    x: Gdf,
    s_max: float | None = None,
    n_samples: int = 200,
    context: EvalContext | None = None,
) -> EnbcdsCurve:
    """Uniformly sample the net-benefit curve of ``x`` on ``[0, s_max]``.

    ``s_max`` defaults to ``f(0)``: spending more than the expected
    zero-spend loss is always dominated (then ``f(s) >= s > f(0)``), so the
    default window is guaranteed to contain the peak.  For a GDF with no
    expected loss at all the window falls back to [0, 1].  ``s_star`` is the
    maximizer within the sampled window.
    """
    if n_samples < 2:
        raise DegenerateRangeError(f"n_samples must be >= 2, got {n_samples}")
    _check_member(x, context)
    if s_max is None:
        f0 = expected_cyber_cost(x, 0.0, context)
        s_max = f0 if f0 > 0.0 else 1.0
    else:
        s_max = float(s_max)
        if not math.isfinite(s_max) or s_max <= 0.0:
            raise DegenerateRangeError(f"s_max must be finite and > 0, got {s_max!r}")

    step = s_max / (n_samples - 1)
    samples = []
    for i in range(n_samples):
        s = s_max if i == n_samples - 1 else i * step
        samples.append((s, enb(x, s, context)))

    from .optimize import optimal_spend  # local import: optimize builds on this module

    best = optimal_spend(x, context=context, upper=s_max)
    s_star, peak_value = best.s_star, best.value
    grid_s, grid_v = max(samples, key=lambda sv: sv[1])
    if grid_v > peak_value:  # only reachable in the non-concave literal mode
        s_star, peak_value = grid_s, grid_v
    return EnbcdsCurve(gdf_id=x.id, samples=tuple(samples), s_star=s_star, peak_value=peak_value)
