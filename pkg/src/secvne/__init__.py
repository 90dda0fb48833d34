"""Secure, resource-constrained virtual network embedding with a policy-gradient node mapper."""

from .embedding import Embedding, EmbeddingRejected, NodeMapper, bfs_link_map, brute_force_feasible, commit, embed_request, release
from .network import ContractViolation, StateError, SubstrateNetwork, VirtualLink, VirtualNode, VirtualRequest
from .policy import PolicyParams, evaluate, train
from .scenario import ScenarioConfig, build_scenario, generate_requests, generate_substrate, split_train_test

__version__ = "0.1.0"
