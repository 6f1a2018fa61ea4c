"""Single-process storage-cluster simulation with failure injection.

A cluster holds one share list per node per ingested stripe.  Scenarios
are ordered events (ingest / fail / repair / collect / assert-durability)
executed synchronously; repairs go through the repair planners and their
traffic is metered against the naive k*alpha baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

from .codec import Message, NodeShare, dc_decode, encode
from .construct import MSRCode
from .repair import execute_repair, plan_for_node


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class Event:
    op: str                      # ingest | fail | repair | collect | assert-durability
    data: tuple = ()


@dataclass(frozen=True)
class Scenario:
    events: tuple

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        events = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            op, _, rest = line.partition(" ")
            rest = rest.strip()
            if op == "ingest":
                if not rest:
                    raise ScenarioError("ingest needs hex data or symbol list")
                events.append(Event("ingest", (rest,)))
            elif op == "fail":
                events.append(Event("fail", (int(rest),)))
            elif op == "repair":
                parts = rest.split()
                node = int(parts[0])
                survivors = None
                for p in parts[1:]:
                    if p.startswith("survivors="):
                        survivors = tuple(int(s) for s in p.removeprefix("survivors=").split(","))
                    else:
                        raise ScenarioError(f"unknown repair option {p!r}")
                events.append(Event("repair", (node, survivors)))
            elif op == "collect":
                events.append(Event("collect", (tuple(int(s) for s in rest.split(",")),)))
            elif op == "assert-durability":
                events.append(Event("assert-durability", ()))
            else:
                raise ScenarioError(f"unknown scenario command {op!r}")
        return cls(tuple(events))


@dataclass
class RepairRecord:
    node: int
    stripes: int
    symbols: int
    links: int
    naive: int


@dataclass
class Cluster:
    code: MSRCode
    storage: dict = dc_field(default_factory=dict)   # node -> [FieldVector]
    pristine: dict = dc_field(default_factory=dict)  # node -> [FieldVector]
    sources: list = dc_field(default_factory=list)   # ingested Messages
    failed: set = dc_field(default_factory=set)
    repairs: list = dc_field(default_factory=list)
    log: list = dc_field(default_factory=list)

    def __post_init__(self):
        for node in range(1, self.code.params.n + 1):
            self.storage.setdefault(node, [])
            self.pristine.setdefault(node, [])

    @property
    def stripe_count(self) -> int:
        return len(self.sources)

    def live_nodes(self):
        return [n for n in range(1, self.code.params.n + 1) if n not in self.failed]

    def ingest(self, messages):
        for msg in messages:
            shares = encode(self.code, msg)
            for s in shares:
                if s.node in self.failed:
                    raise ScenarioError("cannot ingest while a node is failed")
                self.storage[s.node].append(s.symbols)
                self.pristine[s.node].append(s.symbols)
            self.sources.append(msg)
        self.log.append(f"ingest stripes={len(messages)} total={self.stripe_count}")

    def fail(self, node: int):
        p = self.code.params
        if not 1 <= node <= p.n:
            raise ScenarioError(f"node {node} outside 1..{p.n}")
        if self.failed:
            raise ScenarioError(
                f"node {sorted(self.failed)[0]} is already failed; single "
                "failures only")
        self.failed.add(node)
        self.storage[node] = []
        self.log.append(f"fail node={node}")

    def repair(self, node: int, survivors=None):
        if node not in self.failed:
            raise ScenarioError(f"node {node} is not failed")
        plan = plan_for_node(self.code, node, survivors)
        regenerated = []
        symbols_moved = 0
        for idx in range(self.stripe_count):
            shares = [NodeShare(s, self.storage[s][idx]) for s in plan.survivors]
            result = execute_repair(plan, shares)
            regenerated.append(result.share.symbols)
            symbols_moved += result.bandwidth.symbols
        self.storage[node] = regenerated
        self.failed.discard(node)
        naive = self.code.params.k * self.code.params.alpha * self.stripe_count
        self.repairs.append(RepairRecord(node=node, stripes=self.stripe_count,
                                         symbols=symbols_moved, links=plan.d,
                                         naive=naive))
        self.log.append(
            f"repair node={node} path={plan.path} symbols={symbols_moved} "
            f"naive={naive}")

    def collect(self, nodes) -> list:
        nodes = tuple(nodes)
        for n in nodes:
            if n in self.failed:
                raise ScenarioError(f"cannot collect from failed node {n}")
        out = []
        for idx in range(self.stripe_count):
            shares = [NodeShare(n, self.storage[n][idx]) for n in nodes]
            out.append(dc_decode(self.code, shares))
        self.log.append(f"collect nodes={','.join(map(str, nodes))}")
        return out

    def durability_witnesses(self) -> list:
        """Exact-repair and decode sweep; empty result means durable."""
        witnesses = []
        for node in self.live_nodes():
            if self.storage[node] != self.pristine[node]:
                witnesses.append(f"node={node} differs from its original encoding")
        live = self.live_nodes()
        k = self.code.params.k
        for idx, src in enumerate(self.sources):
            for subset in combinations(live, k):
                shares = [NodeShare(n, self.storage[n][idx]) for n in subset]
                try:
                    got = dc_decode(self.code, shares)
                except Exception as exc:
                    witnesses.append(f"stripe={idx} nodes={subset} error={exc}")
                    continue
                if got != src:
                    witnesses.append(f"stripe={idx} nodes={subset} wrong-decode")
        return witnesses


@dataclass(frozen=True)
class TrafficSummary:
    repairs: int
    symbols_moved: int
    naive_symbols: int
    savings: Fraction

    def render(self) -> str:
        return (f"repairs {self.repairs}\nsymbols-moved {self.symbols_moved}\n"
                f"naive-baseline {self.naive_symbols}\nsavings-factor {self.savings}\n")


def traffic_summary(cluster: Cluster) -> TrafficSummary:
    p = cluster.code.params
    moved = sum(r.symbols for r in cluster.repairs)
    naive = sum(r.naive for r in cluster.repairs)
    return TrafficSummary(
        repairs=len(cluster.repairs),
        symbols_moved=moved,
        naive_symbols=naive,
        savings=Fraction(p.k * p.alpha, p.d),
    )


@dataclass(frozen=True)
class ScenarioReport:
    passed: bool
    lines: tuple

    def render(self) -> str:
        body = "\n".join(self.lines)
        return f"emsr-scenario-report 1\n{body}\nresult {'pass' if self.passed else 'fail'}\n"


def _parse_ingest_payload(cluster: Cluster, payload: str):
    from .codec import stripes_from_bytes, stripes_from_symbols

    if payload.startswith("symbols:"):
        symbols = [int(s) for s in payload.removeprefix("symbols:").split(",")]
        return stripes_from_symbols(cluster.code, symbols)
    return stripes_from_bytes(cluster.code, bytes.fromhex(payload))


def run_scenario(cluster: Cluster, scenario: Scenario) -> ScenarioReport:
    lines = []
    passed = True
    for event in scenario.events:
        if event.op == "ingest":
            cluster.ingest(_parse_ingest_payload(cluster, event.data[0]))
        elif event.op == "fail":
            cluster.fail(event.data[0])
        elif event.op == "repair":
            cluster.repair(event.data[0], event.data[1])
        elif event.op == "collect":
            nodes = event.data[0]
            decoded = cluster.collect(nodes)
            ok = decoded == cluster.sources
            passed &= ok
            lines.append(f"collect nodes={','.join(map(str, nodes))} "
                         f"{'ok' if ok else 'MISMATCH'}")
            continue
        elif event.op == "assert-durability":
            witnesses = cluster.durability_witnesses()
            if witnesses:
                passed = False
                lines.append("assert-durability FAIL")
                lines.extend(f"witness {w}" for w in witnesses)
            else:
                lines.append("assert-durability ok")
            continue
        else:
            raise ScenarioError(f"unknown event {event.op!r}")
        lines.append(cluster.log[-1])
    summary = traffic_summary(cluster)
    lines.extend(summary.render().strip().splitlines())
    return ScenarioReport(passed=passed, lines=tuple(lines))
