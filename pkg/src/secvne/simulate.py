"""Discrete-event replay of an arrival/departure stream against a substrate."""

from __future__ import annotations

from typing import Callable, Optional

from .embedding import Embedding, EmbeddingRejected, NodeMapper, embed_request, release
from .metrics import DEFAULT_WINDOW, MetricsSeries
from .network import SubstrateNetwork, VirtualRequest
from .scenario import Arrival, EventStream

OutcomeHook = Callable[[VirtualRequest, Optional[Embedding]], None]


def stream_origin(stream: EventStream) -> float:
    for ev in stream:
        if isinstance(ev, Arrival):
            return ev.time
    return 0.0


def replay(
    net: SubstrateNetwork,
    stream: EventStream,
    mapper: NodeMapper,
    on_outcome: OutcomeHook | None = None,
    window: float = DEFAULT_WINDOW,
) -> MetricsSeries:
    """Process every event in order; returns the windowed metrics series.

    The series origin is the first arrival, so a test stream that starts
    late in simulated time still reports elapsed time from its own start.
    Departures of requests that were rejected are ignored.
    """
    series = MetricsSeries(origin=stream_origin(stream), window=window)
    for ev in stream:
        if isinstance(ev, Arrival):
            vnr = ev.request
            try:
                emb = embed_request(net, vnr, mapper)
            except EmbeddingRejected:
                emb = None
            if emb is None:
                series.update(ev.time, False)
            else:
                series.update(ev.time, True, emb.revenue, emb.cost)
            if on_outcome is not None:
                on_outcome(vnr, emb)
        elif ev.request_id in net.active:
            release(net, ev.request_id)
    series.close()
    return series
