"""Human / adaptive critic pair for the reinforcement loop.

Every emitted attribution waits in a FIFO review queue (the one-step delay
between output and judgment). A human verdict yields the deviance vector xi
(zero when accepted); the adaptive critic is a small net that learns to predict
xi from the attribution and gradually takes over routing as its accept/reject
decisions agree with the human's. A gate compares candidate and serving model
evaluations to decide whether a refinement survives.
"""
from __future__ import annotations

import datetime
from dataclasses import dataclass, field, replace

import numpy as np

from .neural import DenseNet, ffnn_backprop_step, ffnn_forward, make_net
from .rbpnn import Attribution, EvaluationRecord

TAU_ACCEPT = 0.25        # L2 threshold on predicted deviance for an adaptive accept
AGREEMENT_WINDOW = 50
AGREE_HIGH = 0.95
AGREE_LOW = 0.8
P_DECAY = 0.9
P_RECOVER = 0.2
P_MIN = 0.05
BATCH_THRESHOLD = 10

REVIEW_STATES = ("pending", "human_judged", "critic_judged", "applied")
_STATE_ORDER = {s: i for i, s in enumerate(REVIEW_STATES)}


class ReviewError(ValueError):
    pass


@dataclass
class ReviewItem:
    item_id: str
    attribution: Attribution
    feature_vector: object = None
    created_at: str = field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat()
    )
    state: str = "pending"

    def advance(self, new_state: str) -> None:
        if _STATE_ORDER[new_state] < _STATE_ORDER[self.state]:
            raise ReviewError(f"cannot move item {self.item_id} from {self.state} to {new_state}")
        self.state = new_state


@dataclass(frozen=True)
class Verdict:
    item_id: str
    source: str              # "human" | "adaptive"
    accepted: bool
    true_author: int | None
    xi: np.ndarray


def compute_xi(attribution: Attribution, accepted: bool, true_author: int | None = None) -> np.ndarray:
    """Deviance vector: zero on acceptance, scores minus the one-hot true author
    on rejection."""
    n = len(attribution.scores)
    if accepted:
        return np.zeros(n)
    if true_author is None:
        raise ReviewError("a rejection requires the true author")
    if not 0 <= true_author < n:
        raise ReviewError(f"true_author {true_author} out of range [0, {n})")
    target = np.zeros(n)
    target[true_author] = 1.0
    return attribution.scores - target


@dataclass(frozen=True)
class AdaptiveCritic:
    """Net predicting the deviance from (scores, margin), plus the autonomy
    state: a sliding window of (adaptive accept, human accept) pairs and the
    probability p_human of routing an item to the human."""

    net: DenseNet
    window: tuple[tuple[bool, bool], ...] = ()
    window_size: int = AGREEMENT_WINDOW
    p_human: float = 1.0
    p_min: float = P_MIN
    tau_accept: float = TAU_ACCEPT


def make_critic(
    n_authors: int,
    hidden: int = 16,
    seed: int = 0,
    learning_rate: float = 0.4,
) -> AdaptiveCritic:
    net = make_net(
        (n_authors + 1, hidden, n_authors),
        activation="tanh",
        learning_rate=learning_rate,
        seed=seed,
        scale=0.3,
    )
    return AdaptiveCritic(net=net)


def _rank_order(attribution: Attribution) -> np.ndarray:
    return np.argsort(-attribution.scores, kind="stable")


def _critic_input(attribution: Attribution) -> np.ndarray:
    # scores are presented in rank order so "the deviance points away from the
    # top-ranked author" is a position-stable pattern the net can regress
    order = _rank_order(attribution)
    return np.append(attribution.scores[order], attribution.margin)


def _canonical_xi(attribution: Attribution, xi: np.ndarray) -> np.ndarray:
    """Deviance in the critic's frame: rank-sorted, sign fixed so the leading
    component is non-negative. Deviances for a rejection point from the true
    author toward the scored ones; without the sign fix the two common cases
    (true author ranked first vs second) cancel each other out under a
    squared-error fit."""
    order = _rank_order(attribution)
    xs = xi[order]
    if xs[0] < 0:
        xs = -xs
    return xs


def critic_predict(critic: AdaptiveCritic, attribution: Attribution):
    """Predicted deviance (author order, canonical orientation) and the accept
    decision from its magnitude."""
    out, _ = ffnn_forward(critic.net, _critic_input(attribution))
    order = _rank_order(attribution)
    xi_hat = np.empty_like(out)
    xi_hat[order] = out
    return xi_hat, bool(np.linalg.norm(out) < critic.tau_accept)


def windowed_agreement(critic: AdaptiveCritic) -> float | None:
    if not critic.window:
        return None
    return float(np.mean([a == h for a, h in critic.window]))


def _updated_autonomy(p: float, window, window_size: int, p_min: float) -> float:
    if len(window) < window_size:
        return p
    agreement = float(np.mean([a == h for a, h in window]))
    if agreement >= AGREE_HIGH:
        return max(p_min, p * P_DECAY)
    if agreement < AGREE_LOW:
        return min(1.0, p + P_RECOVER)
    return p


def critic_learn(critic: AdaptiveCritic, attribution: Attribution, xi_human) -> AdaptiveCritic:
    """One training step toward the human deviance, plus the agreement/autonomy
    bookkeeping for this (adaptive, human) judgment pair."""
    xi_human = np.asarray(xi_human, dtype=float)
    _, would_accept = critic_predict(critic, attribution)
    x = _critic_input(attribution)
    out, _ = ffnn_forward(critic.net, x)
    net = ffnn_backprop_step(critic.net, x, out - _canonical_xi(attribution, xi_human))
    human_accepted = not np.any(xi_human)
    window = (critic.window + ((would_accept, bool(human_accepted)),))[-critic.window_size :]
    p = _updated_autonomy(critic.p_human, window, critic.window_size, critic.p_min)
    return replace(critic, net=net, window=window, p_human=p)


def route(critic: AdaptiveCritic, rng: np.random.Generator) -> str:
    """Draw the review route: 'ask_human' with probability p_human, otherwise
    'adaptive_only'."""
    return "ask_human" if rng.random() < critic.p_human else "adaptive_only"


@dataclass(frozen=True)
class GateDecision:
    retrain: bool
    persist_candidate: bool
    reason: str


def gate(
    verdicts,
    candidate_eval: EvaluationRecord | None,
    serving_eval: EvaluationRecord | None,
    new_sample_count: int = 0,
    batch_threshold: int = BATCH_THRESHOLD,
) -> GateDecision:
    """Decide whether this cycle retrains and whether the refined candidate
    replaces the serving snapshot. Persisting requires the candidate to hold its
    own on the held-out set, so serving accuracy never regresses."""
    rejected = any(not v.accepted for v in verdicts)
    retrain = rejected or new_sample_count >= batch_threshold
    if not retrain:
        return GateDecision(False, False, "no rejections and not enough new data")
    if candidate_eval is None or serving_eval is None:
        raise ReviewError("gate needs candidate and serving evaluations when retraining")
    if candidate_eval.accuracy >= serving_eval.accuracy:
        return GateDecision(
            True,
            True,
            f"candidate accuracy {candidate_eval.accuracy:.4f} >= serving {serving_eval.accuracy:.4f}",
        )
    return GateDecision(
        True,
        False,
        f"candidate accuracy {candidate_eval.accuracy:.4f} < serving {serving_eval.accuracy:.4f}",
    )
