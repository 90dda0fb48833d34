"""Random substrate topologies and Poisson request streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, asdict
from typing import NamedTuple, Union

import numpy as np

from .network import SubstrateNetwork, VirtualLink, VirtualNode, VirtualRequest

MAX_TOPOLOGY_ATTEMPTS = 200

ARRIVAL = "arrival"
DEPARTURE = "departure"


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ScenarioConfig:
    # defaults follow the experimental settings table; topology is our own choice
    substrate_nodes: int = 100
    link_model: str = "waxman"
    waxman_alpha: float = 0.5
    waxman_beta: float = 0.2
    link_probability: float = 0.1
    cpu_range: tuple[int, int] = (50, 100)
    sto_range: tuple[int, int] = (50, 100)
    bw_range: tuple[int, int] = (50, 100)
    sl_range: tuple[int, int] = (0, 3)
    vnr_count: int = 2000
    vnr_nodes_range: tuple[int, int] = (2, 10)
    vnr_extra_link_prob: float = 0.5
    cpu_demand_range: tuple[int, int] = (0, 50)
    sto_demand_range: tuple[int, int] = (0, 50)
    bw_demand_range: tuple[int, int] = (0, 50)
    sr_range: tuple[int, int] = (0, 3)
    arrival_rate: float = 4.0  # requests per 100 time units
    mean_lifetime: float = 1000.0
    train_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            if f.name.endswith("_range"):
                setattr(self, f.name, tuple(getattr(self, f.name)))
        self.validate()

    def validate(self) -> None:
        for f in fields(self):
            if not f.name.endswith("_range"):
                continue
            rng = getattr(self, f.name)
            if len(rng) != 2:
                raise ConfigError(f.name, "range must have exactly two bounds")
            lo, hi = rng
            if lo > hi:
                raise ConfigError(f.name, f"min {lo} exceeds max {hi}")
            if lo < 0:
                raise ConfigError(f.name, "bounds must be non-negative")
        for key in ("sl_range", "sr_range"):
            lo, hi = getattr(self, key)
            if hi > 3:
                raise ConfigError(key, "security grades lie in {0,1,2,3}")
        if self.vnr_nodes_range[0] < 2:
            raise ConfigError("vnr_nodes_range", "requests need at least 2 nodes")
        if self.substrate_nodes < 2:
            raise ConfigError("substrate_nodes", "need at least 2 substrate nodes")
        if self.link_model not in ("waxman", "uniform"):
            raise ConfigError("link_model", f"unknown model {self.link_model!r}")
        if self.arrival_rate <= 0:
            raise ConfigError("arrival_rate", "must be positive")
        if self.mean_lifetime <= 0:
            raise ConfigError("mean_lifetime", "must be positive")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction", "must lie strictly between 0 and 1")
        if self.vnr_count < 0:
            raise ConfigError("vnr_count", "must be non-negative")
        if not 0 <= self.vnr_extra_link_prob <= 1:
            raise ConfigError("vnr_extra_link_prob", "must be a probability")
        if not 0 <= self.link_probability <= 1:
            raise ConfigError("link_probability", "must be a probability")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown scenario key")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError("scenario", str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


class Arrival(NamedTuple):
    time: float
    request: VirtualRequest


class Departure(NamedTuple):
    time: float
    request_id: int


Event = Union[Arrival, Departure]


def _event_key(ev: Event):
    # departures before arrivals at equal times so freed resources are visible
    if isinstance(ev, Departure):
        return (ev.time, 0, ev.request_id)
    return (ev.time, 1, ev.request.request_id)


class EventStream(list):
    """Time-ordered list of Arrival/Departure events."""

    @classmethod
    def from_requests(cls, requests) -> "EventStream":
        events: list[Event] = []
        for r in requests:
            events.append(Arrival(r.arrival_time, r))
            events.append(Departure(r.departure_time, r.request_id))
        events.sort(key=_event_key)
        return cls(events)

    @property
    def requests(self) -> list[VirtualRequest]:
        return [ev.request for ev in self if isinstance(ev, Arrival)]

    def check(self) -> None:
        """Raise AssertionError unless sorted and every departure follows its arrival."""
        seen: dict[int, VirtualRequest] = {}
        last = -math.inf
        for ev in self:
            assert ev.time >= last, "stream not sorted by time"
            last = ev.time
            if isinstance(ev, Arrival):
                seen[ev.request.request_id] = ev.request
            else:
                assert ev.request_id in seen, f"departure of {ev.request_id} precedes arrival"
                assert ev.time == seen[ev.request_id].departure_time


def seed_streams(seed: int, n: int = 4) -> list[np.random.Generator]:
    """Independent generators for substrate, requests, policy init and training draws."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _uniform_int(rng: np.random.Generator, bounds, size=None):
    lo, hi = bounds
    return rng.integers(lo, hi + 1, size=size)


def _waxman_links(n, alpha, beta, rng):
    pos = rng.random((n, 2))
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    scale = dist.max() or 1.0
    prob = alpha * np.exp(-dist / (beta * scale))
    draws = rng.random((n, n))
    iu, ju = np.triu_indices(n, k=1)
    keep = draws[iu, ju] < prob[iu, ju]
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def _uniform_links(n, p, rng):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def generate_substrate(cfg: ScenarioConfig, rng: np.random.Generator) -> SubstrateNetwork:
    n = cfg.substrate_nodes
    for _ in range(MAX_TOPOLOGY_ATTEMPTS):
        if cfg.link_model == "waxman":
            links = _waxman_links(n, cfg.waxman_alpha, cfg.waxman_beta, rng)
        else:
            links = _uniform_links(n, cfg.link_probability, rng)
        cpu = _uniform_int(rng, cfg.cpu_range, n)
        sto = _uniform_int(rng, cfg.sto_range, n)
        sl = _uniform_int(rng, cfg.sl_range, n)
        bw = _uniform_int(rng, cfg.bw_range, len(links))
        net = SubstrateNetwork(cpu, sto, sl, links, bw)
        if net.is_connected():
            return net
    raise RuntimeError(f"no connected substrate after {MAX_TOPOLOGY_ATTEMPTS} attempts; raise link density")


def random_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random labelled tree on n nodes via a random Pruefer sequence."""
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = degree.index(1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return edges


def random_request(cfg: ScenarioConfig, rng: np.random.Generator, request_id: int, arrival: float, lifetime: float) -> VirtualRequest:
    n = int(_uniform_int(rng, cfg.vnr_nodes_range))
    tree = set(random_tree(n, rng))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    extra = rng.random(len(pairs)) < cfg.vnr_extra_link_prob
    edges = [p for p, e in zip(pairs, extra) if p in tree or e]
    cpu = _uniform_int(rng, cfg.cpu_demand_range, n).tolist()
    sto = _uniform_int(rng, cfg.sto_demand_range, n).tolist()
    sr = _uniform_int(rng, cfg.sr_range, n).tolist()
    bw = _uniform_int(rng, cfg.bw_demand_range, len(edges)).tolist()
    nodes = [VirtualNode(i, cpu[i], sto[i], sr[i]) for i in range(n)]
    links = [VirtualLink(e, b) for e, b in zip(edges, bw)]
    return VirtualRequest(request_id, nodes, links, arrival, lifetime)


def generate_requests(cfg: ScenarioConfig, rng: np.random.Generator) -> EventStream:
    count = cfg.vnr_count
    gaps = rng.exponential(100.0 / cfg.arrival_rate, size=count)
    arrivals = np.cumsum(gaps)
    lifetimes = rng.exponential(cfg.mean_lifetime, size=count)
    # exponential draws are almost surely positive; guard the measure-zero case
    lifetimes = np.maximum(lifetimes, np.finfo(float).tiny)
    requests = [
        random_request(cfg, rng, i, float(arrivals[i]), float(lifetimes[i])) for i in range(count)
    ]
    return EventStream.from_requests(requests)


def split_train_test(stream: EventStream, cfg: ScenarioConfig) -> tuple[EventStream, EventStream]:
    requests = stream.requests
    n_train = math.ceil(cfg.train_fraction * len(requests))
    train_ids = {r.request_id for r in requests[:n_train]}
    train, test = EventStream(), EventStream()
    for ev in stream:
        rid = ev.request_id if isinstance(ev, Departure) else ev.request.request_id
        (train if rid in train_ids else test).append(ev)
    return train, test


def build_scenario(cfg: ScenarioConfig):
    """Substrate plus full event stream, both derived from ``cfg.seed``."""
    sub_rng, req_rng = seed_streams(cfg.seed)[:2]
    return generate_substrate(cfg, sub_rng), generate_requests(cfg, req_rng)
