"""Glicko-2 rating system: full rating-period updates.

Each player carries a rating R, a rating deviation RD quantifying uncertainty
(the interval [R - 2 RD, R + 2 RD] covers the player's strength with 95%
confidence), and a volatility sigma measuring how erratic the strength is.
A rating period collects a batch of match outcomes and updates all three in
one step; players with no matches keep R and sigma but their RD drifts up.

All internal work happens on the Glicko-2 scale: mu = (R - 1500) / 173.7178,
phi = RD / 173.7178.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

GLICKO2_SCALE = 173.7178
DEFAULT_RATING = 1500.0
DEFAULT_RD = 350.0
DEFAULT_VOLATILITY = 0.06
DEFAULT_TAU = 0.5

VOLATILITY_EPS = 1e-6
MAX_VOLATILITY_STEPS = 100


@dataclass(frozen=True)
class Rating:
    """Immutable Glicko-scale rating state."""

    rating: float = DEFAULT_RATING
    rd: float = DEFAULT_RD
    volatility: float = DEFAULT_VOLATILITY

    def __post_init__(self):
        if not (math.isfinite(self.rating) and math.isfinite(self.rd) and math.isfinite(self.volatility)):
            raise DomainError("rating fields must be finite")
        if self.rd <= 0:
            raise DomainError(f"rating deviation must be positive, got {self.rd}")
        if self.volatility <= 0:
            raise DomainError(f"volatility must be positive, got {self.volatility}")

    def to_json_dict(self) -> dict:
        return {"rating": self.rating, "rd": self.rd, "volatility": self.volatility}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Rating":
        return cls(float(obj["rating"]), float(obj["rd"]), float(obj["volatility"]))


@dataclass(frozen=True)
class MatchOutcome:
    """One game against an opponent frozen at their pre-period state."""

    opponent: Rating
    score: float

    def __post_init__(self):
        if self.score not in (0.0, 0.5, 1.0):
            raise DomainError(f"score must be 0, 0.5, or 1, got {self.score}")


def confidence_interval(r: Rating) -> tuple[float, float]:
    """95% strength interval [R - 2 RD, R + 2 RD]."""
    return (r.rating - 2.0 * r.rd, r.rating + 2.0 * r.rd)


def _g(phi: float) -> float:
    """Impact dampener g(phi) = 1 / sqrt(1 + 3 phi^2 / pi^2)."""
    return 1.0 / math.sqrt(1.0 + 3.0 * phi * phi / math.pi**2)


def _expected(mu: float, mu_j: float, phi_j: float) -> float:
    """E(mu, mu_j, phi_j) = 1 / (1 + exp(-g(phi_j) (mu - mu_j)))."""
    return 1.0 / (1.0 + math.exp(-_g(phi_j) * (mu - mu_j)))


def expected_score(player: Rating, opponent: Rating) -> float:
    """Expected score of player against opponent, in (0, 1)."""
    mu = (player.rating - DEFAULT_RATING) / GLICKO2_SCALE
    mu_j = (opponent.rating - DEFAULT_RATING) / GLICKO2_SCALE
    phi_j = opponent.rd / GLICKO2_SCALE
    return _expected(mu, mu_j, phi_j)


def _solve_volatility(sigma: float, phi: float, v: float, delta: float, tau: float, trace=None) -> float:
    """New volatility via the bracketed Illinois iteration on f(x).

        f(x) = e^x (delta^2 - phi^2 - v - e^x) / (2 (phi^2 + v + e^x)^2)
               - (x - a) / tau^2,   a = ln(sigma^2)

    The bracket starts at A = a; B is the analytic point ln(delta^2-phi^2-v)
    when delta^2 exceeds phi^2 + v, otherwise the first a - k tau with
    non-negative f. Regula falsi with the Illinois halving of the retained
    endpoint narrows |B - A| below 1e-6. The optional trace list receives
    (A, B, f(A), f(B)) before each step, for verification.
    """
    a = math.log(sigma * sigma)
    delta_sq = delta * delta
    phi_sq = phi * phi

    def f(x: float) -> float:
        ex = math.exp(x)
        return ex * (delta_sq - phi_sq - v - ex) / (2.0 * (phi_sq + v + ex) ** 2) - (x - a) / (tau * tau)

    big_a = a
    if delta_sq > phi_sq + v:
        big_b = math.log(delta_sq - phi_sq - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
        big_b = a - k * tau

    f_a = f(big_a)
    f_b = f(big_b)
    steps = 0
    while abs(big_b - big_a) > VOLATILITY_EPS:
        steps += 1
        if steps > MAX_VOLATILITY_STEPS:
            raise ConvergenceError(
                f"volatility iteration exceeded {MAX_VOLATILITY_STEPS} steps"
            )
        if trace is not None:
            trace.append((big_a, big_b, f_a, f_b))
        big_c = big_a + (big_a - big_b) * f_a / (f_b - f_a)
        f_c = f(big_c)
        if f_c * f_b <= 0:
            big_a, f_a = big_b, f_b
        else:
            f_a = f_a / 2.0
        big_b, f_b = big_c, f_c
    return math.exp(big_a / 2.0)


def update_rating(player: Rating, outcomes: list[MatchOutcome], tau: float = DEFAULT_TAU) -> Rating:
    """One full rating-period update.

    On the internal scale: v = [sum g(phi_j)^2 E (1 - E)]^-1 is the estimated
    variance of the performance, delta = v sum g(phi_j) (s_j - E) the
    estimated improvement; the volatility iteration yields sigma', then
    phi* = sqrt(phi^2 + sigma'^2), phi' = 1 / sqrt(1/phi*^2 + 1/v) and
    mu' = mu + phi'^2 sum g(phi_j) (s_j - E).

    An empty outcome list is the inactivity case: R and sigma are unchanged
    while RD drifts to 173.7178 sqrt(phi^2 + sigma^2).
    """
    if not (math.isfinite(tau) and tau > 0):
        raise DomainError(f"tau must be positive, got {tau!r}")

    mu = (player.rating - DEFAULT_RATING) / GLICKO2_SCALE
    phi = player.rd / GLICKO2_SCALE
    sigma = player.volatility

    if not outcomes:
        phi_star = math.sqrt(phi * phi + sigma * sigma)
        return Rating(player.rating, GLICKO2_SCALE * phi_star, sigma)

    v_inv = 0.0
    delta_sum = 0.0
    for outcome in outcomes:
        mu_j = (outcome.opponent.rating - DEFAULT_RATING) / GLICKO2_SCALE
        phi_j = outcome.opponent.rd / GLICKO2_SCALE
        g_j = _g(phi_j)
        e_j = _expected(mu, mu_j, phi_j)
        v_inv += g_j * g_j * e_j * (1.0 - e_j)
        delta_sum += g_j * (outcome.score - e_j)
    v = 1.0 / v_inv
    delta = v * delta_sum

    sigma_prime = _solve_volatility(sigma, phi, v, delta, tau)
    phi_star = math.sqrt(phi * phi + sigma_prime * sigma_prime)
    phi_prime = 1.0 / math.sqrt(1.0 / (phi_star * phi_star) + 1.0 / v)
    mu_prime = mu + phi_prime * phi_prime * delta_sum

    return Rating(
        DEFAULT_RATING + GLICKO2_SCALE * mu_prime,
        GLICKO2_SCALE * phi_prime,
        sigma_prime,
    )
