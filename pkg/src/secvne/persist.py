"""JSON file formats for scenarios, trained models and run configs.

Every file carries ``format`` and ``format_version`` keys; loaders reject
anything else. Floats are written with ``repr`` precision, so a load after a
save reproduces the exact values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .network import SubstrateNetwork, VirtualLink, VirtualNode, VirtualRequest
from .policy import DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE, PolicyParams
from .scenario import ConfigError, EventStream, ScenarioConfig

SCENARIO_FORMAT = "secvne-scenario"
MODEL_FORMAT = "secvne-model"
CONFIG_FORMAT = "secvne-config"
FORMAT_VERSION = 1

ALGORITHMS = ("css-rl", "greedy", "topsis-ta", "topsis-nta")


class FormatError(ValueError):
    pass


def _dump(obj, path) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _load(path, expected: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict) or data.get("format") != expected:
        raise FormatError(f"{path}: expected a {expected} file")
    if data.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {data.get('format_version')!r}")
    return data


def scenario_to_dict(cfg: ScenarioConfig, net: SubstrateNetwork, stream: EventStream) -> dict:
    return {
        "format": SCENARIO_FORMAT,
        "format_version": FORMAT_VERSION,
        "config": cfg.to_dict(),
        "substrate": {
            "cpu": net.cpu_capacity.tolist(),
            "sto": net.sto_capacity.tolist(),
            "security": net.security_level.tolist(),
            "links": [list(e) for e in net.endpoints],
            "bw": net.bw_capacity.tolist(),
        },
        "requests": [
            {
                "id": r.request_id,
                "arrival": r.arrival_time,
                "lifetime": r.lifetime,
                "nodes": [[vn.cpu_demand, vn.sto_demand, vn.security_requirement] for vn in r.nodes],
                "links": [[vl.endpoints[0], vl.endpoints[1], vl.bw_demand] for vl in r.links],
            }
            for r in stream.requests
        ],
    }


def save_scenario(path, cfg: ScenarioConfig, net: SubstrateNetwork, stream: EventStream) -> None:
    _dump(scenario_to_dict(cfg, net, stream), path)


def load_scenario(path) -> tuple[ScenarioConfig, SubstrateNetwork, EventStream]:
    data = _load(path, SCENARIO_FORMAT)
    cfg = ScenarioConfig.from_dict(data["config"])
    s = data["substrate"]
    net = SubstrateNetwork(s["cpu"], s["sto"], s["security"], [tuple(e) for e in s["links"]], s["bw"])
    requests = [
        VirtualRequest(
            r["id"],
            [VirtualNode(i, c, st, sr) for i, (c, st, sr) in enumerate(r["nodes"])],
            [VirtualLink((a, b), bw) for a, b, bw in r["links"]],
            r["arrival"],
            r["lifetime"],
        )
        for r in data["requests"]
    ]
    return cfg, net, EventStream.from_requests(requests)


@dataclass
class ModelArtifact:
    params: PolicyParams
    seed: int = 0
    epochs: int = 0
    updates: int = 0

    def __eq__(self, other):
        if not isinstance(other, ModelArtifact):
            return NotImplemented
        a, b = self.params, other.params
        return (
            a.kernel.tolist() == b.kernel.tolist()
            and a.bias == b.bias
            and a.learning_rate == b.learning_rate
            and a.batch_size == b.batch_size
            and (self.seed, self.epochs, self.updates) == (other.seed, other.epochs, other.updates)
        )


def save_model(path, model: ModelArtifact) -> None:
    p = model.params
    _dump(
        {
            "format": MODEL_FORMAT,
            "format_version": FORMAT_VERSION,
            "kernel": [float(x) for x in p.kernel],
            "bias": p.bias,
            "learning_rate": p.learning_rate,
            "batch_size": p.batch_size,
            "training": {"seed": model.seed, "epochs": model.epochs, "batch_updates": model.updates},
        },
        path,
    )


def load_model(path) -> ModelArtifact:
    data = _load(path, MODEL_FORMAT)
    params = PolicyParams(data["kernel"], data["bias"], data["learning_rate"], data["batch_size"])
    t = data.get("training", {})
    return ModelArtifact(params, t.get("seed", 0), t.get("epochs", 0), t.get("batch_updates", 0))


@dataclass
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    algorithm: str = "css-rl"
    epochs: int = 50
    batch_size: int = DEFAULT_BATCH_SIZE
    learning_rate: float = DEFAULT_LEARNING_RATE
    window: float = 100.0
    seeds: list[int] = field(default_factory=lambda: [0])
    out: str = "out"

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.epochs < 0:
            raise ConfigError("epochs", "must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("batch_size", "must be at least 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate", "must be positive")
        if not self.window > 0:
            raise ConfigError("window", "must be positive")
        if not self.seeds:
            raise ConfigError("seeds", "need at least one seed")
        for s in self.seeds:
            if not isinstance(s, int) or not 0 <= s < 2**64:
                raise ConfigError("seeds", f"seed {s!r} is not an unsigned 64-bit integer")


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    if data.pop("format", CONFIG_FORMAT) != CONFIG_FORMAT:
        raise ConfigError("format", f"expected {CONFIG_FORMAT!r}")
    version = data.pop("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError("format_version", f"unsupported version {version!r}")
    scenario = ScenarioConfig.from_dict(data.pop("scenario", {}))
    known = {"algorithm", "epochs", "batch_size", "learning_rate", "window", "seeds", "out"}
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown config key")
    cfg = RunConfig(scenario=scenario, **data)
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    return {
        "format": CONFIG_FORMAT,
        "format_version": FORMAT_VERSION,
        "scenario": cfg.scenario.to_dict(),
        "algorithm": cfg.algorithm,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "learning_rate": cfg.learning_rate,
        "window": cfg.window,
        "seeds": list(cfg.seeds),
        "out": cfg.out,
    }
