"""Three-parameter logistic (3PL) model: ICC evaluation and joint estimation.

The model gives the probability that a respondent of ability theta answers an
item correctly:

    P(U = 1 | theta) = c + (1 - c) / (1 + exp(-a (theta - b)))

with discrimination a (sign-free; negative a marks a pathological item),
difficulty b, and guessing c (the lower asymptote). Joint estimation follows
the Birnbaum two-step alternation: fit item parameters holding abilities
fixed, then re-estimate abilities holding items fixed, repeating until both
the abilities and the total log-likelihood stabilize.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import DomainError, EmptyInput, ShapeError, TooManyItems
from .responses import ITEM_HARD_LIMIT, ResponseMatrix

A_BOUNDS = (-50.0, 50.0)
B_BOUNDS = (-10.0, 10.0)
C_BOUNDS = (0.0, 0.5)
THETA_BOUNDS = (-6.0, 6.0)

# Deterministic multi-start grid for item fits; the negative-a start keeps
# pathological (inverted) items reachable.
ITEM_FIT_STARTS = (
    (1.0, 0.0, 0.1),
    (2.0, -1.0, 0.2),
    (0.5, 1.0, 0.05),
    (-1.0, 0.0, 0.1),
)

# Ability estimation walks the items in 10 cumulative groups of ascending
# difficulty, re-solving the bounded MLE after each group with a warm start.
ABILITY_STAGES = 10

MAX_ROUNDS = 50
THETA_TOL = 1e-3
LOGLIK_REL_TOL = 1e-5

_PROB_CLAMP = 1e-9

# Inner optimizer budgets per alternation round. Joint alternation only needs
# approximate blockwise maximization per round; the final rounds polish.
_LBFGS_COLD = {"maxiter": 150, "ftol": 1e-11, "gtol": 1e-6}
_LBFGS_WARM = {"maxiter": 60, "ftol": 1e-11, "gtol": 1e-6}

# Bayes-modal regularization of the item fits. The 3PL likelihood has flat
# directions: a moderate p-value item can be explained as pure guessing
# (c -> p) with b arbitrary, and joint fits drift toward ever-sharper items,
# so fits use a weak normal prior on b, a lognormal prior on |a| (sign-free,
# so inverted items stay reachable), and a one-sided quadratic penalty
# holding c out of the degenerate upper region. Prior curvature is far below
# the data information wherever an item is actually identified; the reported
# item_log_likelihood stays the pure likelihood.
_PRIOR_B_VAR = 9.0
_PRIOR_LOG_A_VAR = 0.25
_PRIOR_C_KNEE = 0.35
_PRIOR_C_WEIGHT = 200.0


@dataclass(frozen=True)
class ItemParams:
    """Fitted 3PL parameters of one item, within the fitting bounds."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name, value, (lo, hi) in (
            ("a", self.a, A_BOUNDS),
            ("b", self.b, B_BOUNDS),
            ("c", self.c, C_BOUNDS),
        ):
            if not (np.isfinite(value) and lo <= value <= hi):
                raise DomainError(f"item parameter {name}={value!r} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class FitReport:
    iterations: int
    log_likelihood: float
    converged: bool
    degenerate_items: tuple[int, ...] = ()


@dataclass
class IrtModel:
    """Joint fit of one dataset: item parameters plus respondent abilities."""

    dataset_id: str
    items: list[ItemParams]
    abilities: dict[str, float]
    fit_report: FitReport

    def to_json_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "items": [{"a": it.a, "b": it.b, "c": it.c} for it in self.items],
            "abilities": dict(self.abilities),
            "fit_report": {
                "iterations": self.fit_report.iterations,
                "log_likelihood": self.fit_report.log_likelihood,
                "converged": self.fit_report.converged,
                "degenerate_items": list(self.fit_report.degenerate_items),
            },
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "IrtModel":
        report = obj.get("fit_report", {})
        return cls(
            dataset_id=str(obj["dataset_id"]),
            items=[ItemParams(float(d["a"]), float(d["b"]), float(d["c"])) for d in obj["items"]],
            abilities={str(k): float(v) for k, v in obj["abilities"].items()},
            fit_report=FitReport(
                iterations=int(report.get("iterations", 0)),
                log_likelihood=float(report.get("log_likelihood", 0.0)),
                converged=bool(report.get("converged", True)),
                degenerate_items=tuple(int(i) for i in report.get("degenerate_items", ())),
            ),
        )


def icc_probability(theta: float, item: ItemParams) -> float:
    """Correct-response probability c + (1-c)/(1+exp(-a(theta-b))).

    Numerically stable for exponents far beyond +-700; the result lies in
    [c, 1] with the asymptotes reached exactly in floating point.
    """
    if not np.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta!r}")
    z = item.a * (theta - item.b)
    return float(item.c + (1.0 - item.c) * expit(z))


def _prob_matrix(a, b, c, thetas):
    """ICC probabilities for every (respondent, item) pair, shape (R, I)."""
    z = a[None, :] * (np.asarray(thetas, float)[:, None] - b[None, :])
    return c[None, :] + (1.0 - c[None, :]) * expit(z)


def _clamped(p):
    return np.clip(p, _PROB_CLAMP, 1.0 - _PROB_CLAMP)


def item_log_likelihood(item: ItemParams, responses, thetas) -> float:
    """Bernoulli log-likelihood of one item's response column.

    Probabilities are clamped to [1e-9, 1-1e-9] so degenerate parameter
    combinations never produce non-finite values.
    """
    u = np.asarray(responses, float)
    th = np.asarray(thetas, float)
    if u.shape != th.shape or u.ndim != 1 or u.size < 1:
        raise ShapeError(f"responses {u.shape} and thetas {th.shape} must be equal-length vectors")
    p = _clamped(item.c + (1.0 - item.c) * expit(item.a * (th - item.b)))
    return float(np.sum(u * np.log(p) + (1.0 - u) * np.log1p(-p)))


def item_loglik_gradient(item: ItemParams, responses, thetas) -> tuple[float, float, float]:
    """Analytic gradient of item_log_likelihood in (a, b, c).

    With L the plain logistic term and P the clamped ICC probability:
    dLL/dP = (u - P)/(P(1-P)), dP/da = (1-c) L(1-L) (theta-b),
    dP/db = -(1-c) L(1-L) a, dP/dc = 1 - L.
    """
    u = np.asarray(responses, float)
    th = np.asarray(thetas, float)
    if u.shape != th.shape:
        raise ShapeError("responses and thetas must have equal length")
    L = expit(item.a * (th - item.b))
    p = _clamped(item.c + (1.0 - item.c) * L)
    w = (u - p) / (p * (1.0 - p))
    lp = L * (1.0 - L)
    da = float(np.sum(w * (1.0 - item.c) * lp * (th - item.b)))
    db = float(np.sum(w * (1.0 - item.c) * lp * (-item.a)))
    dc = float(np.sum(w * (1.0 - L)))
    return da, db, dc


def ability_loglik_gradient(items: list[ItemParams], responses, theta: float) -> float:
    """Analytic d/dtheta of the respondent log-likelihood over the given items."""
    a = np.array([it.a for it in items])
    b = np.array([it.b for it in items])
    c = np.array([it.c for it in items])
    u = np.asarray(responses, float)
    if u.shape != a.shape:
        raise ShapeError("responses length must match items")
    L = expit(a * (theta - b))
    p = _clamped(c + (1.0 - c) * L)
    dp = (1.0 - c) * a * L * (1.0 - L)
    return float(np.sum((u - p) / (p * (1.0 - p)) * dp))


def is_degenerate_column(responses) -> bool:
    u = np.asarray(responses)
    return bool(np.all(u == u.flat[0]))


def _degenerate_params(responses) -> ItemParams:
    # Zero-information columns get flat curves by convention: all-wrong sits
    # at the origin, all-correct at the lower difficulty bound.
    if np.asarray(responses).flat[0] == 0:
        return ItemParams(0.0, 0.0, 0.0)
    return ItemParams(0.0, B_BOUNDS[0], 0.0)


def _stacked_nll(x, u, thetas, n_items, penalize=True):
    """Total negative log-likelihood and gradient over stacked item blocks.

    Parameters are laid out as [a_1..a_I, b_1..b_I, c_1..c_I]; the objective
    is separable per item, so one bounded quasi-Newton run per start point
    optimizes every item at once while per-item solutions stay independent.
    With penalize set, stabilizing priors are added: joint estimation has
    flat directions (guessing drifting to the item p-value, unbounded
    discrimination, mirror-mode sign flips) that pure likelihood cannot
    resolve. Single-item fits stay pure maximum likelihood.
    """
    a = x[:n_items]
    b = x[n_items : 2 * n_items]
    c = x[2 * n_items :]
    th = thetas[:, None]
    L = expit(a[None, :] * (th - b[None, :]))
    p = _clamped(c[None, :] + (1.0 - c[None, :]) * L)
    nll = -float(np.sum(u * np.log(p) + (1.0 - u) * np.log1p(-p)))
    w = (u - p) / (p * (1.0 - p))
    lp = L * (1.0 - L)
    ga = np.sum(w * (1.0 - c[None, :]) * lp * (th - b[None, :]), axis=0)
    gb = np.sum(w * (1.0 - c[None, :]) * lp, axis=0) * (-a)
    gc = np.sum(w * (1.0 - L), axis=0)

    if penalize:
        c_excess = np.maximum(0.0, c - _PRIOR_C_KNEE)
        log_abs_a = np.log(np.maximum(np.abs(a), 1e-8))
        nll += float(np.sum(b * b) / (2.0 * _PRIOR_B_VAR))
        nll += float(np.sum(log_abs_a * log_abs_a) / (2.0 * _PRIOR_LOG_A_VAR))
        nll += float(_PRIOR_C_WEIGHT * np.sum(c_excess * c_excess))
        ga -= log_abs_a / (_PRIOR_LOG_A_VAR * np.where(np.abs(a) > 1e-8, a, 1e-8))
        gb -= b / _PRIOR_B_VAR
        gc -= 2.0 * _PRIOR_C_WEIGHT * c_excess
    return nll, -np.concatenate([ga, gb, gc])


def _per_item_ll(a, b, c, u, thetas):
    p = _clamped(_prob_matrix(a, b, c, thetas))
    return np.sum(u * np.log(p) + (1.0 - u) * np.log1p(-p), axis=0)


def _per_item_prior(a, b, c):
    """Per-item prior cost, matching the penalty inside _stacked_nll."""
    log_abs_a = np.log(np.maximum(np.abs(a), 1e-8))
    c_excess = np.maximum(0.0, c - _PRIOR_C_KNEE)
    return (
        b * b / (2.0 * _PRIOR_B_VAR)
        + log_abs_a * log_abs_a / (2.0 * _PRIOR_LOG_A_VAR)
        + _PRIOR_C_WEIGHT * c_excess * c_excess
    )


def _fit_items(
    u: np.ndarray, thetas: np.ndarray, starts, options=_LBFGS_COLD, penalize=True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fit all non-degenerate item columns of u; returns (a, b, c) arrays.

    Each start is run as one stacked bounded L-BFGS-B solve; the per-item
    winner across starts is selected by the per-item objective (penalized
    when penalize is set), which is equivalent to running the multi-start
    per item.
    """
    n_items = u.shape[1]
    degenerate = np.array([is_degenerate_column(u[:, j]) for j in range(n_items)])
    a = np.zeros(n_items)
    b = np.zeros(n_items)
    c = np.zeros(n_items)
    for j in np.flatnonzero(degenerate):
        params = _degenerate_params(u[:, j])
        a[j], b[j], c[j] = params.a, params.b, params.c

    active = np.flatnonzero(~degenerate)
    if active.size == 0:
        return a, b, c
    u_act = u[:, active].astype(float)
    bounds = [A_BOUNDS] * active.size + [B_BOUNDS] * active.size + [C_BOUNDS] * active.size

    best_ll = np.full(active.size, -np.inf)
    best = np.zeros((3, active.size))
    for start in starts:
        start = np.asarray(start, float)
        if start.ndim == 1:
            x0 = np.concatenate([np.full(active.size, start[k]) for k in range(3)])
        else:
            x0 = np.concatenate([start[active, 0], start[active, 1], start[active, 2]])
        res = minimize(
            _stacked_nll,
            x0,
            args=(u_act, thetas, active.size, penalize),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options=options,
        )
        xa = res.x[: active.size]
        xb = res.x[active.size : 2 * active.size]
        xc = res.x[2 * active.size :]
        ll = _per_item_ll(xa, xb, xc, u_act, thetas)
        if penalize:
            ll = ll - _per_item_prior(xa, xb, xc)
        better = ll > best_ll
        best_ll[better] = ll[better]
        best[0, better] = xa[better]
        best[1, better] = xb[better]
        best[2, better] = xc[better]

    a[active], b[active], c[active] = best
    return a, b, c


def fit_item(responses, thetas, *, starts=ITEM_FIT_STARTS) -> ItemParams:
    """Maximum-likelihood 3PL parameters for one item column.

    Runs bounded quasi-Newton ascent from each deterministic start and keeps
    the best; all-identical columns short-circuit to the degenerate
    conventions (a=0, b=0, c=0 for all-wrong; a=0, b=-10, c=0 for
    all-correct).
    """
    u = np.asarray(responses, float)
    th = np.asarray(thetas, float)
    if u.ndim != 1 or u.shape != th.shape or u.size < 1:
        raise ShapeError(f"responses {u.shape} and thetas {th.shape} must be equal-length vectors")
    if not np.all(np.isfinite(th)):
        raise DomainError("thetas must be finite")
    if is_degenerate_column(u):
        return _degenerate_params(u)
    a, b, c = _fit_items(u[:, None], th, starts, penalize=False)
    return ItemParams(float(a[0]), float(b[0]), float(c[0]))


def _ability_mle(a, b, c, u, theta0, max_iter=100, tol=1e-7):
    """Bounded MLE of theta for each respondent row of u, warm-started.

    Damped Fisher scoring: the step g/I always points uphill because the
    information I is positive; backtracking halves any step that fails to
    improve the likelihood, and every iterate stays clipped to THETA_BOUNDS.
    """
    lo, hi = THETA_BOUNDS
    theta = np.clip(np.asarray(theta0, float), lo, hi).copy()

    def loglik(th):
        p = _clamped(_prob_matrix(a, b, c, th))
        return np.sum(u * np.log(p) + (1.0 - u) * np.log1p(-p), axis=1)

    ll = loglik(theta)
    for _ in range(max_iter):
        L = expit(a[None, :] * (theta[:, None] - b[None, :]))
        p = _clamped(c[None, :] + (1.0 - c[None, :]) * L)
        dp = (1.0 - c[None, :]) * a[None, :] * L * (1.0 - L)
        denom = p * (1.0 - p)
        g = np.sum((u - p) / denom * dp, axis=1)
        info = np.sum(dp * dp / denom, axis=1)
        step = np.clip(g / np.maximum(info, 1e-12), -1.0, 1.0)

        cand = np.clip(theta + step, lo, hi)
        llc = loglik(cand)
        for _halving in range(40):
            worse = llc < ll - 1e-12
            if not np.any(worse):
                break
            step = np.where(worse, 0.5 * step, step)
            cand = np.clip(theta + step, lo, hi)
            llc = loglik(cand)

        improved = llc >= ll - 1e-12
        new_theta = np.where(improved, cand, theta)
        moved = np.max(np.abs(new_theta - theta)) if theta.size else 0.0
        theta = new_theta
        ll = np.where(improved, llc, ll)
        if moved < tol:
            break
    return theta


def _difficulty_stages(b: np.ndarray) -> list[np.ndarray]:
    """Cumulative item index groups, sorted stably by (difficulty, index)."""
    order = sorted(range(b.size), key=lambda j: (b[j], j))
    groups = np.array_split(np.array(order, dtype=int), ABILITY_STAGES)
    stages = []
    cum: list[int] = []
    for grp in groups:
        if grp.size == 0:
            continue
        cum.extend(int(j) for j in grp)
        stages.append(np.array(cum, dtype=int))
    return stages


def _estimate_abilities(a, b, c, u, theta0):
    """Staged ability estimation for every row of u, vectorized."""
    theta = np.asarray(theta0, float).copy()
    for idx in _difficulty_stages(b):
        theta = _ability_mle(a[idx], b[idx], c[idx], u[:, idx].astype(float), theta)
    return theta


def _identify_scale(thetas: np.ndarray) -> np.ndarray:
    """Pin the joint fit's free affine scale: mean 0, population std 1.

    Joint (items + abilities) likelihood is invariant under affine rescaling
    of theta with compensating (a, b) changes, so without this constraint the
    fitted difficulty scale is arbitrary. Degenerate spreads are left alone.
    """
    std = thetas.std()
    if std == 0.0 or not np.isfinite(std):
        return thetas
    lo, hi = THETA_BOUNDS
    return np.clip((thetas - thetas.mean()) / std, lo, hi)


def estimate_ability(items: list[ItemParams], responses, theta0: float) -> float:
    """Bounded MLE of one respondent's ability, theta in [-6, 6].

    Items are sorted by difficulty ascending (stable on ties) and split into
    10 near-equal groups; theta is re-estimated after each cumulative group,
    each stage warm-starting from the previous stage's solution.
    """
    if not items:
        raise EmptyInput("no items to estimate ability from")
    u = np.asarray(responses, float)
    if u.ndim != 1 or u.size != len(items):
        raise ShapeError(f"responses length {u.size} != items {len(items)}")
    a = np.array([it.a for it in items])
    b = np.array([it.b for it in items])
    c = np.array([it.c for it in items])
    theta = _estimate_abilities(a, b, c, u[None, :], np.array([float(theta0)]))
    return float(theta[0])


def total_log_likelihood(items: list[ItemParams], responses, thetas) -> float:
    """Joint log-likelihood of the whole matrix at the given abilities."""
    a = np.array([it.a for it in items])
    b = np.array([it.b for it in items])
    c = np.array([it.c for it in items])
    p = _clamped(_prob_matrix(a, b, c, thetas))
    u = np.asarray(responses, float)
    return float(np.sum(u * np.log(p) + (1.0 - u) * np.log1p(-p)))


def birnbaum_fit(matrix: ResponseMatrix) -> IrtModel:
    """Joint two-step MLE of item parameters and abilities.

    Abilities start at raw per-respondent accuracy. Each round fits all item
    columns against the current abilities (round 1 from the deterministic
    multi-start grid, later rounds warm-started from the previous round),
    re-estimates all abilities against the new items, and standardizes the
    ability vector to mean 0 / unit variance, the identification constraint
    resolving the joint likelihood's affine indeterminacy. Stops when the
    largest ability change falls below 1e-3 and the relative log-likelihood
    change below 1e-5, or after 50 rounds; non-convergence is reported in
    fit_report, never raised.
    """
    if matrix.items >= ITEM_HARD_LIMIT:
        raise TooManyItems(
            f"{matrix.items} items; joint estimation requires fewer than {ITEM_HARD_LIMIT}"
        )
    u = matrix.responses.astype(float)
    # Accuracies order the respondents; mapping them onto the identification
    # scale from the start keeps round 1 consistent with the item priors.
    thetas = _identify_scale(u.mean(axis=1))
    degenerate = tuple(int(j) for j in range(matrix.items) if is_degenerate_column(u[:, j]))

    a = b = c = None
    ll = -math.inf
    rounds = 0
    converged = False
    for rounds in range(1, MAX_ROUNDS + 1):
        if a is None:
            a, b, c = _fit_items(u, thetas, ITEM_FIT_STARTS, _LBFGS_COLD)
        else:
            a, b, c = _fit_items(u, thetas, (np.column_stack([a, b, c]),), _LBFGS_WARM)
        new_thetas = _identify_scale(_estimate_abilities(a, b, c, u, thetas))
        new_ll = total_log_likelihood(
            [ItemParams(float(x), float(y), float(z)) for x, y, z in zip(a, b, c)],
            u,
            new_thetas,
        )
        delta_theta = float(np.max(np.abs(new_thetas - thetas))) if thetas.size else 0.0
        rel_ll = abs(new_ll - ll) / max(1.0, abs(ll)) if math.isfinite(ll) else math.inf
        thetas = new_thetas
        ll = new_ll
        if delta_theta < THETA_TOL and rel_ll < LOGLIK_REL_TOL:
            converged = True
            break

    items = [ItemParams(float(x), float(y), float(z)) for x, y, z in zip(a, b, c)]
    return IrtModel(
        dataset_id=matrix.dataset_id,
        items=items,
        abilities={name: float(t) for name, t in zip(matrix.respondents, thetas)},
        fit_report=FitReport(
            iterations=rounds,
            log_likelihood=ll,
            converged=converged,
            degenerate_items=degenerate,
        ),
    )


def true_score(theta: float, items: list[ItemParams], exclude_negative_discrimination: bool = False) -> float:
    """Expected number of correct answers: the sum of ICC probabilities.

    With exclude_negative_discrimination set, only items with a > 0
    contribute; if the filter removes every item the score is 0.0 and a
    RuntimeWarning is emitted.
    """
    if not items:
        raise EmptyInput("true_score needs at least one item")
    if exclude_negative_discrimination:
        retained = [it for it in items if it.a > 0]
        if not retained:
            _warnings.warn(
                "all items filtered out by exclude_negative_discrimination; True-Score is 0",
                RuntimeWarning,
                stacklevel=2,
            )
            return 0.0
    else:
        retained = items
    return float(sum(icc_probability(theta, it) for it in retained))
