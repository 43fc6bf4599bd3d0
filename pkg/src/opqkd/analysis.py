"""Exact and estimated figures of merit for the channel strategies.

The central quantity is the probability that a strategy stays invisible in
one round: Bob's measurement returns exactly the label Alice prepared. It
is computed three ways that are kept deliberately separate: full outcome
enumeration over a concrete set, closed forms for the recursive family,
and Monte Carlo over the actual protocol machinery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .adversary import canonical_variant, conditional_b_basis, make_strategy
from .errors import InsufficientDataError
from .qcore import RngStream, born_probabilities
from .stateset import StateSet, bob_basis, build_symmetric
from .protocol import run_round, wilson_interval

# Closed forms and the recurrence must agree to this slack.
RECURRENCE_ATOL = 1e-12


@dataclass(frozen=True)
class ExactResult:
    """Exact per-round survival probability of a strategy on one set."""

    n: int
    variant: str
    value: float
    contributions: tuple[float, ...]  # per prepared state; value is their mean


@dataclass(frozen=True)
class EstimateResult:
    """Monte Carlo estimate with a Wilson 95% interval."""

    n: int
    variant: str
    value: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int
    seed: int


def _intercept_contribution(state_set: StateSet, index: int, bases) -> float:
    st = state_set[index]
    terms = []
    for m in range(state_set.n):
        weight_a = abs(st.ket_a.amps[m]) ** 2
        if weight_a == 0.0:
            continue
        probs_b = born_probabilities(st.ket_b, bases[m])
        survive_b = math.fsum(p * p for p in probs_b)
        terms.append(weight_a * weight_a * survive_b)
    return math.fsum(terms)


def exact_undetected_prob(state_set: StateSet, variant: str = "intercept") -> ExactResult:
    """Enumerate every measurement branch of a strategy and return the exact
    probability that Bob's outcome matches Alice's label.

    Alice's label is uniform, so the value is the mean of the per-state
    contributions; those are returned too.
    """
    name = canonical_variant(variant)
    n = state_set.n
    if name == "intercept-resend-conditional":
        bases = [conditional_b_basis(state_set, m) for m in range(n)]
        contributions = [
            _intercept_contribution(state_set, i, bases) for i in range(len(state_set))
        ]
    elif name == "measure-second-only":
        contributions = [
            math.fsum(abs(z) ** 4 for z in st.ket_b.amps) for st in state_set
        ]
    elif name == "substitute-collective":
        # Bob holds a uniform substitute |r> and the untouched B-part, so the
        # survival chance is the mean squared A amplitude: exactly 1/n.
        contributions = [
            math.fsum(abs(z) ** 2 for z in st.ket_a.amps) / n for st in state_set
        ]
    elif name == "none":
        contributions = [1.0] * len(state_set)
    else:
        raise ValueError(f"no exact treatment for variant {name!r}")
    value = math.fsum(contributions) / len(state_set)
    return ExactResult(n, name, value, tuple(contributions))


def p3_formula(params) -> float:
    """Survival probability of the conditional intercept-resend attack on the
    parameterized 3x3 set: (5 + 2(|c|^4 + |d|^4 + |g|^4 + |h|^4)) / 9."""
    fourth = math.fsum(abs(z) ** 4 for z in (params.c, params.d, params.g, params.h))
    return (5.0 + 2.0 * fourth) / 9.0


def p_recurrence_step(prev: float, m: int, vertical_fourth_moments: float) -> float:
    """One odd growth step: the (2m+1)-dimensional survival probability from
    the (2m-1)-dimensional one plus the ring columns' fourth-moment total."""
    if m < 2:
        raise ValueError("the odd recurrence starts at m = 2")
    if not 0.0 <= prev <= 1.0:
        raise ValueError("prev must be a probability")
    size = 2 * m + 1
    return ((2 * m - 1) ** 2 * prev + 4 * m + vertical_fourth_moments) / (size * size)


def _even_step(prev: float, m: int, vertical_fourth_moments: float) -> float:
    # Same growth step written for the even chain: dimension 2m from 2m-2.
    size = 2 * m
    return ((2 * m - 2) ** 2 * prev + 2 * (2 * m - 1) + vertical_fourth_moments) / (size * size)


def min_p_odd(m: int, verify_with_oracle: bool = False) -> float:
    """Minimum intercept-resend survival probability at odd dimension 2m+1:
    1/2 + (1 + 4m) / (2 (2m+1)^2), cross-checked against the recurrence."""
    if m < 1:
        raise ValueError("odd chain starts at m = 1 (dimension 3)")
    size = 2 * m + 1
    closed = 0.5 + (1 + 4 * m) / (2.0 * size * size)
    recurred = 7.0 / 9.0
    for k in range(2, m + 1):
        recurred = p_recurrence_step(recurred, k, 2.0)
    if abs(closed - recurred) > RECURRENCE_ATOL:
        raise AssertionError(
            f"closed form {closed!r} and recurrence {recurred!r} disagree at m={m}"
        )
    if verify_with_oracle:
        _verify_oracle(size, closed)
    return closed


def min_p_even(m: int, verify_with_oracle: bool = False) -> float:
    """Minimum intercept-resend survival probability at even dimension 2m:
    1/2 + 1/(2m), cross-checked against the recurrence."""
    if m < 2:
        raise ValueError("even chain starts at m = 2 (dimension 4)")
    closed = 0.5 + 1.0 / (2.0 * m)
    recurred = 3.0 / 4.0
    for k in range(3, m + 1):
        recurred = _even_step(recurred, k, 2.0)
    if abs(closed - recurred) > RECURRENCE_ATOL:
        raise AssertionError(
            f"closed form {closed!r} and recurrence {recurred!r} disagree at m={m}"
        )
    if verify_with_oracle:
        _verify_oracle(2 * m, closed)
    return closed


def _verify_oracle(n: int, expected: float) -> None:
    got = exact_undetected_prob(build_symmetric(n), "intercept").value
    if abs(got - expected) > RECURRENCE_ATOL:
        raise AssertionError(f"oracle value {got!r} != closed form {expected!r} at n={n}")


def min_p(n: int) -> float:
    """Minimum intercept-resend survival probability at dimension n >= 3."""
    if n < 3:
        raise ValueError("the family starts at dimension 3")
    return min_p_odd((n - 1) // 2) if n % 2 else min_p_even(n // 2)


def monte_carlo_estimate(
    state_set: StateSet, variant: str, trials: int, seed: int = 0
) -> EstimateResult:
    """Estimate the survival probability by running independent single
    rounds of the real protocol machinery, one keyed stream per trial."""
    if trials < 1:
        raise InsufficientDataError("need at least one trial")
    name = canonical_variant(variant)
    strategy = make_strategy(name, state_set if name != "none" else None)
    joint = bob_basis(state_set)
    successes = 0
    for trial in range(trials):
        rng = RngStream(seed, trial)
        alice, bob, _ = run_round(state_set, joint, strategy, trial, rng)
        successes += int(alice == bob)
    low, high = wilson_interval(successes, trials)
    return EstimateResult(
        state_set.n, name, successes / trials, low, high, trials, successes, seed
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    variant: str
    exact: float | None
    closed_form: float
    gap_to_half: float
    mc_estimate: float | None
    ci_low: float | None
    ci_high: float | None
    trials: int
    seed: int


def dimension_sweep(
    max_n: int,
    variant: str = "intercept",
    trials: int = 0,
    seed: int = 0,
    exact_budget: int = 9,
) -> tuple[SweepRow, ...]:
    """Survival probability of a strategy on the recursive family for every
    n from 3 to max_n: exact enumeration up to `exact_budget`, closed form
    everywhere, optional Monte Carlo when trials > 0."""
    if max_n < 3:
        raise ValueError("sweep needs max_n >= 3")
    name = canonical_variant(variant)
    rows = []
    for n in range(3, max_n + 1):
        closed = 1.0 / n if name == "substitute-collective" else min_p(n)
        exact = mc = low = high = None
        if n <= exact_budget:
            built = build_symmetric(n)
            exact = exact_undetected_prob(built, name).value
            if trials > 0:
                est = monte_carlo_estimate(built, name, trials, seed)
                mc, low, high = est.value, est.ci_low, est.ci_high
        reference = exact if exact is not None else closed
        rows.append(
            SweepRow(n, name, exact, closed, reference - 0.5, mc, low, high, trials, seed)
        )
    return tuple(rows)
