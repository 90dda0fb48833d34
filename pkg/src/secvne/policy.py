"""Policy-gradient node mapper.

A single shared kernel scores every substrate node's feature column, a
feasibility mask removes unusable nodes, and a softmax over the remaining
scores gives the selection distribution. Training follows REINFORCE with the
per-request revenue/cost ratio as reward and batch updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embedding import Embedding, NodeMapper
from .features import FeatureMatrix, build_feature_matrix, floyd_warshall
from .metrics import DEFAULT_WINDOW, MetricsSeries
from .network import ContractViolation, SubstrateNetwork, VirtualRequest, feasible_mask
from .scenario import EventStream
from .simulate import replay

NUM_FEATURES = 4
DEFAULT_LEARNING_RATE = 0.005
DEFAULT_BATCH_SIZE = 100
INIT_STD = 0.1

STOCHASTIC = "stochastic"
GREEDY = "greedy"


class NoCandidateError(ValueError):
    """Every substrate node is masked out."""


@dataclass
class PolicyParams:
    kernel: np.ndarray
    bias: float = 0.0
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel, dtype=float).reshape(NUM_FEATURES).copy()
        self.bias = float(self.bias)
        if not np.all(np.isfinite(self.kernel)) or not np.isfinite(self.bias):
            raise ValueError("policy parameters must be finite")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")

    @classmethod
    def initialize(cls, rng: np.random.Generator, learning_rate=DEFAULT_LEARNING_RATE, batch_size=DEFAULT_BATCH_SIZE):
        kernel = rng.normal(0.0, INIT_STD, NUM_FEATURES)
        bias = rng.normal(0.0, INIT_STD)
        return cls(kernel, bias, learning_rate, batch_size)

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.kernel, self.bias, self.learning_rate, self.batch_size)


@dataclass
class Decision:
    node: int
    probabilities: np.ndarray
    grad_kernel: np.ndarray
    grad_bias: float = 0.0


@dataclass
class GradientAccumulator:
    kernel: np.ndarray = field(default_factory=lambda: np.zeros(NUM_FEATURES))
    bias: float = 0.0
    requests: int = 0

    def tick(self) -> None:
        self.requests += 1

    def reset(self) -> None:
        self.kernel = np.zeros(NUM_FEATURES)
        self.bias = 0.0
        self.requests = 0


def _features(m) -> np.ndarray:
    return m.normalized if isinstance(m, FeatureMatrix) else np.asarray(m, dtype=float)


def score(params: PolicyParams, features) -> np.ndarray:
    return params.kernel @ _features(features) + params.bias


def masked_softmax(scores, feasible) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    feasible = np.asarray(feasible, dtype=bool)
    if not feasible.any():
        raise NoCandidateError("no feasible substrate node")
    shifted = np.where(feasible, scores - scores[feasible].max(), -np.inf)
    w = np.exp(shifted)
    return w / w.sum()


def log_prob_gradient(features, probabilities, node: int) -> tuple[np.ndarray, float]:
    """d log p(node) / d(kernel, bias) for the masked softmax of ``kernel @ v + bias``."""
    v = _features(features)
    return v[:, node] - v @ probabilities, 0.0


def sample_node(probabilities, mode: str, rng: np.random.Generator | None, features) -> tuple[int, Decision]:
    p = np.asarray(probabilities, dtype=float)
    if mode == GREEDY:
        node = int(np.argmax(p))
    elif mode == STOCHASTIC:
        cum = np.cumsum(p)
        node = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        # float rounding can push the draw onto the last entry boundary
        node = min(node, int(np.flatnonzero(p)[-1]))
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    gk, gb = log_prob_gradient(features, p, node)
    return node, Decision(node, p, gk, gb)


def accumulate_gradient(acc: GradientAccumulator, decisions: list[Decision], reward: float, learning_rate: float) -> None:
    if not decisions:
        return
    g_kernel = np.sum([d.grad_kernel for d in decisions], axis=0)
    g_bias = sum(d.grad_bias for d in decisions)
    acc.kernel = acc.kernel + learning_rate * reward * g_kernel
    acc.bias += learning_rate * reward * g_bias


def batch_update(params: PolicyParams, acc: GradientAccumulator) -> None:
    if acc.requests != params.batch_size:
        raise ContractViolation(f"batch update after {acc.requests} requests; batch size is {params.batch_size}")
    params.kernel = params.kernel + acc.kernel
    params.bias += acc.bias
    acc.reset()


class PolicyMapper(NodeMapper):
    """Node mapper driven by the policy network; records decisions per request."""

    name = "css-rl"

    def __init__(self, params: PolicyParams, net: SubstrateNetwork, mode: str = GREEDY,
                 rng: np.random.Generator | None = None, dist: np.ndarray | None = None):
        if mode == STOCHASTIC and rng is None:
            raise ValueError("stochastic mode needs an rng")
        self.params = params
        self.mode = mode
        self.rng = rng
        self.dist = floyd_warshall(net) if dist is None else dist
        self.decisions: list[Decision] = []

    def start(self, net, vnr):
        self.decisions = []

    def choose(self, net, vnr, node_map, vi):
        used = list(node_map.values())
        mask = feasible_mask(net, vnr.nodes[vi], used)
        if not mask.any():
            return None
        fm = build_feature_matrix(net, used, self.dist)
        probs = masked_softmax(score(self.params, fm), mask)
        node, decision = sample_node(probs, self.mode, self.rng, fm)
        self.decisions.append(decision)
        return node


@dataclass
class TrainingWindow:
    epoch: int
    window: int
    requests: int = 0
    acceptances: int = 0
    revenue: int = 0
    cost: int = 0
    reward_sum: float = 0.0
    last_time: float = 0.0
    epoch_revenue: int = 0
    epoch_elapsed: float = 0.0

    @property
    def acc_ratio(self) -> float:
        return self.acceptances / self.requests if self.requests else 0.0

    @property
    def rc_ratio(self) -> float:
        return self.revenue / self.cost if self.cost else 1.0

    @property
    def mean_reward(self) -> float:
        """Mean reward signal over the window's accepted requests."""
        return self.reward_sum / self.acceptances if self.acceptances else 0.0

    @property
    def avg_revenue(self) -> float:
        return self.epoch_revenue / self.epoch_elapsed if self.epoch_elapsed > 0 else 0.0


@dataclass
class TrainingResult:
    params: PolicyParams
    curves: list[TrainingWindow]
    batch_rewards: list[float]
    updates: int


def request_reward(emb: Embedding) -> float:
    return emb.revenue / emb.cost if emb.cost > 0 else 1.0


def train(params: PolicyParams, net: SubstrateNetwork, stream: EventStream, epochs: int,
          rng: np.random.Generator, window_requests: int | None = None) -> TrainingResult:
    """Replay ``stream`` ``epochs`` times on a fresh copy of ``net``, sampling nodes
    stochastically and applying a batch update every ``batch_size`` requests.

    ``batch_rewards`` holds, per parameter update, the mean reward over the
    accepted requests of that batch. Batches may span epoch boundaries;
    curve windows do not.
    """
    params = params.copy()
    work = net.copy()
    mapper = PolicyMapper(params, work, STOCHASTIC, rng)
    acc = GradientAccumulator()
    window_requests = window_requests or params.batch_size
    curves: list[TrainingWindow] = []
    batch_rewards: list[float] = []
    batch_state = {"reward": 0.0, "accepted": 0}
    updates = 0

    for epoch in range(epochs):
        work.reset()
        origin = None
        state = {"win": None, "epoch_rev": 0}

        def on_outcome(vnr: VirtualRequest, emb: Optional[Embedding]):
            nonlocal origin, updates
            if origin is None:
                origin = vnr.arrival_time
            win = state["win"]
            if win is None or win.requests == window_requests:
                win = TrainingWindow(epoch, len([c for c in curves if c.epoch == epoch]))
                curves.append(win)
                state["win"] = win
            win.requests += 1
            win.last_time = vnr.arrival_time
            if emb is not None:
                reward = request_reward(emb)
                accumulate_gradient(acc, mapper.decisions, reward, params.learning_rate)
                win.acceptances += 1
                win.revenue += emb.revenue
                win.cost += emb.cost
                win.reward_sum += reward
                state["epoch_rev"] += emb.revenue
                batch_state["reward"] += reward
                batch_state["accepted"] += 1
            # rejected: this request's gradient is discarded
            win.epoch_revenue = state["epoch_rev"]
            win.epoch_elapsed = vnr.arrival_time - origin
            acc.tick()
            if acc.requests == params.batch_size:
                batch_update(params, acc)
                updates += 1
                n = batch_state["accepted"]
                batch_rewards.append(batch_state["reward"] / n if n else 0.0)
                batch_state["reward"], batch_state["accepted"] = 0.0, 0

        replay(work, stream, mapper, on_outcome)

    return TrainingResult(params, curves, batch_rewards, updates)


def evaluate(params: PolicyParams, net: SubstrateNetwork, stream: EventStream,
             window: float = DEFAULT_WINDOW) -> MetricsSeries:
    """Greedy replay with frozen parameters on an empty copy of ``net``."""
    work = net.copy()
    work.reset()
    return replay(work, stream, PolicyMapper(params, work, GREEDY), window=window)
