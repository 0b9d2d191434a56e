"""Round-robin tournaments over dataset sequences, rated with Glicko-2.

Each dataset is one rating period: every classifier's True-Score on that
dataset is compared against every other's, wins/draws/losses become match
outcomes (1 / 0.5 / 0 points), and all ratings update simultaneously from
the period's frozen starting states before the next dataset is played.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyInput, NotFound, TooFewPlayers
from .glicko2 import DEFAULT_TAU, MatchOutcome, Rating, update_rating
from .irt import IrtModel, true_score


@dataclass(frozen=True)
class PeriodResult:
    """Outcome of one dataset's round-robin.

    scores maps each participating classifier to its total points for the
    period; absent lists classifiers that had no ability in the dataset's
    model and therefore only received the inactivity update.
    """

    dataset_id: str
    scores: dict[str, float]
    standings_after: list[tuple[str, Rating]]
    absent: tuple[str, ...] = ()


@dataclass(frozen=True)
class RatingHistory:
    periods: list[PeriodResult]
    final_ranking: list[tuple[str, Rating]]

    def to_json_dict(self) -> dict:
        return {
            "periods": [
                {
                    "dataset_id": p.dataset_id,
                    "scores": dict(p.scores),
                    "standings_after": [
                        {"classifier": name, **r.to_json_dict()} for name, r in p.standings_after
                    ],
                    "absent": list(p.absent),
                }
                for p in self.periods
            ],
            "final_ranking": [
                {"classifier": name, **r.to_json_dict()} for name, r in self.final_ranking
            ],
        }


def _ranking_order(ratings: dict[str, Rating]) -> list[tuple[str, Rating]]:
    """Sort by rating descending; ties broken by lower RD, then name."""
    return sorted(ratings.items(), key=lambda kv: (-kv[1].rating, kv[1].rd, kv[0]))


def round_robin_scores(
    true_scores: dict[str, float],
    ratings: dict[str, Rating],
    draw_epsilon: float = 0.0,
) -> dict[str, list[MatchOutcome]]:
    """Pair every classifier against every other on True-Score.

    The higher score takes 1 point and the lower 0; scores within
    draw_epsilon of each other (exact equality by default) draw for 0.5
    each. Outcomes reference the opponents' pre-period Ratings, listed in
    sorted opponent-name order so downstream sums are order-independent.
    """
    names = sorted(true_scores)
    if len(names) < 2:
        raise TooFewPlayers(f"round-robin needs at least 2 classifiers, got {len(names)}")
    missing = [n for n in names if n not in ratings]
    if missing:
        raise NotFound(f"no rating states for {missing}")

    outcomes: dict[str, list[MatchOutcome]] = {name: [] for name in names}
    for i, left in enumerate(names):
        for right in names[i + 1 :]:
            ts_l, ts_r = true_scores[left], true_scores[right]
            if abs(ts_l - ts_r) <= draw_epsilon:
                s_l = s_r = 0.5
            elif ts_l > ts_r:
                s_l, s_r = 1.0, 0.0
            else:
                s_l, s_r = 0.0, 1.0
            outcomes[left].append(MatchOutcome(ratings[right], s_l))
            outcomes[right].append(MatchOutcome(ratings[left], s_r))
    return outcomes


def run_tournament(
    dataset_order: list[str],
    models: dict[str, IrtModel],
    classifiers: list[str],
    *,
    tau: float = DEFAULT_TAU,
    exclude_negative_discrimination: bool = False,
    draw_epsilon: float = 0.0,
) -> RatingHistory:
    """Play the datasets in order, one rating period each.

    All classifiers start at the default Rating. Per dataset, present
    classifiers (those with an ability in the dataset's model) are scored and
    round-robined; absent ones are flagged and receive the inactivity
    update. All updates within a period read the period's starting states.
    An empty dataset_order yields no periods and a default ranking ordered
    by name.
    """
    if len(classifiers) < 2:
        raise TooFewPlayers(f"a tournament needs at least 2 classifiers, got {len(classifiers)}")
    if len(set(classifiers)) != len(classifiers):
        raise NotFound(f"duplicate classifier names in {classifiers}")
    roster = sorted(classifiers)
    ratings: dict[str, Rating] = {name: Rating() for name in roster}

    periods: list[PeriodResult] = []
    for dataset_id in dataset_order:
        if dataset_id not in models:
            raise NotFound(f"no fitted model for dataset {dataset_id!r}")
        model = models[dataset_id]
        present = [n for n in roster if n in model.abilities]
        absent = tuple(n for n in roster if n not in model.abilities)

        scores: dict[str, float] = {}
        new_ratings: dict[str, Rating] = {}
        if len(present) >= 2:
            ts = {
                name: true_score(model.abilities[name], model.items, exclude_negative_discrimination)
                for name in present
            }
            outcomes = round_robin_scores(ts, ratings, draw_epsilon)
            for name in present:
                scores[name] = sum(o.score for o in outcomes[name])
                new_ratings[name] = update_rating(ratings[name], outcomes[name], tau)
        else:
            for name in present:
                new_ratings[name] = update_rating(ratings[name], [], tau)
        for name in absent:
            new_ratings[name] = update_rating(ratings[name], [], tau)

        ratings = new_ratings
        periods.append(
            PeriodResult(
                dataset_id=dataset_id,
                scores=scores,
                standings_after=_ranking_order(ratings),
                absent=absent,
            )
        )

    return RatingHistory(periods=periods, final_ranking=_ranking_order(ratings))


@dataclass(frozen=True)
class BumpPoint:
    """One bump-chart cell: a classifier's dense rank after one period."""

    period: int
    classifier: str
    rank: int
    rating: float
    rd: float


def bump_chart_data(history: RatingHistory) -> list[BumpPoint]:
    """Dense per-period ranks (1 = highest rating; equal ratings share a rank).

    Rows are ordered by (period, rank, classifier) for stable emission.
    """
    points: list[BumpPoint] = []
    for p_idx, period in enumerate(history.periods, start=1):
        rank = 0
        last_rating: float | None = None
        for name, rating in period.standings_after:
            if last_rating is None or rating.rating != last_rating:
                rank += 1
                last_rating = rating.rating
            points.append(BumpPoint(p_idx, name, rank, rating.rating, rating.rd))
    return points
