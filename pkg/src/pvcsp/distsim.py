"""Synchronous anonymous message passing on the factor graph of an instance.

One agent per factor-graph vertex, one channel per edge.  With
``N = |I| + |C_I|`` the schedule is:

* rounds ``0 .. N-1``: colour refinement, each agent sending its current colour;
* round ``N``: agents exchange their final colours, which now serve as
  identifiers, and compute their own piece of the reduced SA1 program plus
  coefficient-ratio facts;
* rounds ``N+1 .. 2N``: every agent forwards all facts it knows;
* end of round ``2N``: every agent rebuilds the program, solves it, halts.

Agents never see their position in the network; the simulator keeps it only
to deliver messages and to check the outcome against the centralised code.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import INF, format_ext, parse_ext, to_ext
from .errors import Disconnected, InvalidParameter, ProtocolViolation, ScheduleExceeded
from .lpcore import Optimal, solve_lp
from .model import _require_instance, check_similar, is_connected
from .relax import (
    SA1,
    Fragment,
    Verdict,
    assemble,
    build_reduced,
    constraint_fragment,
    row_text,
    variable_fragment,
)
from .wl import EncodingTable, digest, factor_graph, initial_string, round_string

REFINING = "refining"
IDENTIFIED = "identified"
EXCHANGING = "exchanging-fragments"
SOLVING = "solving"
HALTED = "halted"

DIGEST = "digest"
FULL = "full"


@dataclass
class AgentState:
    label: object  # None for a variable agent, (symbol, weight) for a constraint agent
    ports: tuple  # edge label S per channel
    phase: str = REFINING
    color: str = ""
    neighbour_colors: tuple = ()
    facts: dict = field(default_factory=dict)  # content address -> canonical text
    verdict: Verdict | None = None
    value: object = None
    program: str | None = None

    def snapshot(self, rnd, sent):
        return {
            "round": rnd,
            "phase": self.phase,
            "sent": sent,
            "color": self.color,
            "facts": len(self.facts),
            "verdict": None if self.verdict is None else str(self.verdict),
        }


@dataclass
class Network:
    A: object
    B: object
    threshold: Fraction
    n_variables: int
    n_constraints: int
    agents: list
    channels: list  # per agent: ((neighbour position, S), ...)
    encoding: str = DIGEST
    round: int = 0
    traces: list = field(default_factory=list)
    table: EncodingTable = field(default_factory=EncodingTable)
    solver_cache: dict = field(default_factory=dict)
    graph: object = None  # simulator-side only, never shown to agents
    instance: object = None

    @property
    def size(self):
        return self.n_variables + self.n_constraints

    @property
    def schedule_length(self):
        return 2 * self.size + 1

    @property
    def finished(self):
        return self.round >= self.schedule_length


def build_network(I, A, B, threshold=None, encoding=DIGEST) -> Network:
    _require_instance(I)
    check_similar(A, B)
    check_similar(I, A)
    if not is_connected(I):
        raise Disconnected("the network must be connected")
    if encoding not in (DIGEST, FULL):
        raise InvalidParameter(f"unknown encoding {encoding!r}")
    if threshold is None:
        threshold = I.threshold
    if threshold is None:
        raise InvalidParameter("no threshold given")
    threshold = to_ext(threshold)
    if threshold is INF:
        raise InvalidParameter("threshold must be finite")
    G = factor_graph(I)
    agents = [AgentState(G.labels[x], tuple(s for _, s in G.adj[x])) for x in range(G.n_vertices)]
    channels = [tuple(G.adj[x]) for x in range(G.n_vertices)]
    net = Network(
        A, B, threshold, G.n_variables, G.n_constraints, agents, channels, encoding, graph=G, instance=I
    )
    net.traces = [[] for _ in agents]
    return net


# -- facts -----------------------------------------------------------------


def _fragment_text(frag: Fragment):
    rows = [[[[v, format_ext(c)] for v, c in items], rel, format_ext(rhs)] for items, rel, rhs in frag.rows]
    data = {
        "vars": list(frag.variables),
        "rows": rows,
        "objective": [[v, format_ext(c)] for v, c in frag.objective],
        "zero": list(frag.fixed_zero),
        "class": frag.cls,
    }
    return "frag:" + json.dumps(data, sort_keys=True, separators=(",", ":"))


def _fragment_from_text(text):
    data = json.loads(text[len("frag:"):])
    rows = tuple(
        (tuple((v, parse_ext(c)) for v, c in items), rel, parse_ext(rhs))
        for items, rel, rhs in data["rows"]
    )
    return Fragment(
        tuple(data["vars"]),
        rows,
        tuple((v, parse_ext(c)) for v, c in data["objective"]),
        tuple(data["zero"]),
        data["class"],
    )


def _ratio_text(cls, base, q):
    return "ratio:" + json.dumps([cls, base, format_ext(q)], separators=(",", ":"))


def _add_fact(agent, text):
    agent.facts.setdefault(digest(text), text)


# -- the transition function (identical for every agent) -------------------


def _colour(net, text):
    return text if net.encoding == FULL else net.table.encode(text)


def _local_facts(agent, A):
    me = agent.color
    if agent.label is None:
        _add_fact(agent, _fragment_text(variable_fragment(me, A)))
        # per neighbouring constraint class and edge label: number of such edges
        counts = {}
        for s, c in zip(agent.ports, agent.neighbour_colors):
            counts[(c, tuple(sorted(s)))] = counts.get((c, tuple(sorted(s))), 0) + 1
        first = {}
        for (c, s), n in sorted(counts.items()):
            first.setdefault(c, n)
        if first:
            base = min(first)
            for c, n in sorted(first.items()):
                if c != base:
                    _add_fact(agent, _ratio_text(c, base, Fraction(n, first[base])))
    else:
        symbol, weight = agent.label
        groups = list(zip(agent.ports, agent.neighbour_colors))
        _add_fact(agent, _fragment_text(constraint_fragment(me, symbol, weight, groups, A, SA1)))


def _coefficients(facts, n_constraints):
    """Class multiplicities from ratio facts, scaled to sum to ``n_constraints``."""
    classes = sorted({f.cls for f in facts["frag"] if f.cls is not None})
    if not classes:
        return {}
    adj = {c: [] for c in classes}
    for cls, base, q in facts["ratio"]:
        if cls not in adj or base not in adj:
            raise ProtocolViolation("ratio fact mentions an unknown class")
        adj[base].append((cls, q))
        adj[cls].append((base, 1 / q))
    for c in adj:
        adj[c].sort()
    rel = {classes[0]: Fraction(1)}
    todo = deque([classes[0]])
    while todo:
        c = todo.popleft()
        for d, q in adj[c]:
            if d not in rel:
                rel[d] = rel[c] * q
                todo.append(d)
    if len(rel) != len(classes):
        raise ProtocolViolation("ratio graph is disconnected")
    for c in adj:
        for d, q in adj[c]:
            if rel[d] != rel[c] * q:
                raise ProtocolViolation("ratio facts are inconsistent")
    scale = n_constraints / sum(rel.values())
    k = {c: rel[c] * scale for c in classes}
    for c, v in k.items():
        if v.denominator != 1 or v < 1:
            raise ProtocolViolation(f"class multiplicity {v} is not a positive integer")
    return {c: int(v) for c, v in k.items()}


def _parse_facts(agent):
    facts = {"frag": [], "ratio": []}
    for text in agent.facts.values():
        if text.startswith("frag:"):
            facts["frag"].append(_fragment_from_text(text))
        else:
            cls, base, q = json.loads(text[len("ratio:"):])
            facts["ratio"].append((cls, base, parse_ext(q)))
    facts["frag"].sort(key=_fragment_text)
    facts["ratio"].sort()
    return facts


def _solve(net, agent):
    facts = _parse_facts(agent)
    k = _coefficients(facts, net.n_constraints)
    lp, _ = assemble(facts["frag"], k)
    text = lp.to_text()
    # every agent builds the same program; solve it once per network
    if text not in net.solver_cache:
        out = solve_lp(lp)
        net.solver_cache[text] = out.value if isinstance(out, Optimal) else INF
    value = net.solver_cache[text]
    agent.program = text
    agent.value = value
    agent.verdict = Verdict.YES if value <= net.threshold else Verdict.NO


def _send(net, agent, rnd):
    n = net.size
    if rnd <= n:
        return agent.color
    return dict(agent.facts)


def _receive(net, agent, rnd, inbox):
    n = net.size
    if rnd < n:
        agent.color = _colour(net, round_string(agent.label, zip(agent.ports, inbox)))
        if rnd == n - 1:
            agent.phase = IDENTIFIED
    elif rnd == n:
        agent.neighbour_colors = tuple(inbox)
        _local_facts(agent, net.A)
        agent.phase = EXCHANGING
    else:
        for facts in inbox:
            for key, text in facts.items():
                prev = agent.facts.setdefault(key, text)
                if prev != text:
                    raise ProtocolViolation("fact address collision")
        if rnd == 2 * n:
            agent.phase = SOLVING
            _solve(net, agent)
            agent.phase = HALTED


def _summary(msg):
    return msg if isinstance(msg, str) else len(msg)


def step(net: Network, rnd=None) -> Network:
    """Run one synchronous round: all agents send, then all agents update."""
    if rnd is not None and rnd != net.round:
        raise InvalidParameter(f"network is at round {net.round}, not {rnd}")
    rnd = net.round
    if net.finished:
        raise ScheduleExceeded(f"schedule has {net.schedule_length} rounds")
    if rnd == 0:
        for agent in net.agents:
            agent.color = _colour(net, initial_string(agent.label))
    outbox = [_send(net, agent, rnd) for agent in net.agents]
    for x, agent in enumerate(net.agents):
        inbox = [outbox[y] for y, _ in net.channels[x]]
        _receive(net, agent, rnd, inbox)
        net.traces[x].append(agent.snapshot(rnd, _summary(outbox[x])))
    net.round += 1
    return net


@dataclass
class RunResult:
    verdict: Verdict
    rounds: int
    traces: list  # per agent, list of round records
    value: object
    program: str

    def trace_lines(self):
        """JSON lines, one record per (round, agent position)."""
        out = []
        rounds = len(self.traces[0]) if self.traces else 0
        for r in range(rounds):
            for x, trace in enumerate(self.traces):
                rec = {"agent": x, **trace[r]}
                out.append(json.dumps(rec, sort_keys=True))
        return out


def run(net: Network, check=True) -> RunResult:
    while not net.finished:
        step(net)
    verdicts = {a.verdict for a in net.agents}
    if len(verdicts) != 1 or None in verdicts:
        raise ProtocolViolation("agents disagree on the verdict")
    programs = {a.program for a in net.agents}
    if len(programs) != 1:
        raise ProtocolViolation("agents reconstructed different programs")
    if check:
        check_reconstruction(net)
    agent = net.agents[0]
    return RunResult(agent.verdict, net.round, net.traces, agent.value, agent.program)


def simulate(I, A, B, threshold=None, encoding=DIGEST, check=True) -> RunResult:
    return run(build_network(I, A, B, threshold, encoding), check)


# -- simulator-side cross-check --------------------------------------------

_NAME = re.compile(r"^p\[(.*)\]\((.*)\)$")


def _renamer(mapping):
    def fix(name):
        m = _NAME.match(name)
        if not m or m.group(1) not in mapping:
            raise ProtocolViolation(f"unexpected program variable {name!r}")
        return f"p[{mapping[m.group(1)]}]({m.group(2)})"

    return fix


def _canonical(lp, fix):
    rows = sorted(
        row_text((tuple(sorted((fix(v), c) for v, c in r.coeffs)), r.rel, r.rhs)) for r in lp.rows
    )
    objective = sorted((fix(v), c) for v, c in lp.objective.items())
    return sorted(fix(v) for v in lp.variables), rows, objective


def check_reconstruction(net: Network):
    """Compare the agents' program with :func:`relax.build_reduced` up to class names."""
    G = net.graph
    central = build_reduced(net.instance, net.A)
    mapping = {}
    for x, agent in enumerate(net.agents):
        key = G.keys[x]
        cls = central.var_class[key[1]] if G.is_variable(x) else central.con_class[(key[1], key[2])]
        if mapping.setdefault(agent.color, cls) != cls:
            raise ProtocolViolation("agent identifiers do not match the stable partition")
    if len(set(mapping.values())) != len(mapping):
        raise ProtocolViolation("agent identifiers merge distinct classes")
    facts = _parse_facts(net.agents[0])
    k = _coefficients(facts, net.n_constraints)
    if {mapping[c]: v for c, v in k.items()} != central.k:
        raise ProtocolViolation("reconstructed class multiplicities differ")
    lp, _ = assemble(facts["frag"], k)
    ident = {c: c for c in mapping.values()}
    mine = _canonical(lp, _renamer(mapping))
    theirs = _canonical(central.lp, _renamer(ident))
    if mine != theirs:
        raise ProtocolViolation("reconstructed program differs from the centralised one")
    return True
