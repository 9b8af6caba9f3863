"""Role-tagged causal DAGs: d-separation, backdoor paths, adjustment sets, graph surgery.

Node identifiers are case-sensitive strings. Every listing this module returns is
sorted lexicographically so that command-line output is diffable.
"""
from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CycleDetected, DuplicateEdge, OverlapError, UnknownEndpoint, UnknownNode


class Role(str, enum.Enum):
    TREATMENT = "treatment"
    OBSERVED_CONFOUNDER = "observed_confounder"
    UNOBSERVED_CONFOUNDER = "unobserved_confounder"
    OUTCOME = "outcome"
    INSTRUMENT = "instrument"
    ASSIGNMENT_INDICATOR = "assignment_indicator"
    CENSORING_INDICATOR = "censoring_indicator"
    RUNNING_VARIABLE = "running_variable"
    GENERIC = "generic"

    @classmethod
    def parse(cls, value) -> "Role":
        if isinstance(value, Role):
            return value
        key = str(value).strip()
        for role in cls:
            # accept "observed_confounder", "ObservedConfounder" and "OBSERVED_CONFOUNDER"
            if key.lower() == role.value or key.replace("_", "").lower() == role.value.replace("_", ""):
                return role
        raise ValueError(f"unknown role {value!r}")


class CausalDag:
    """Immutable directed acyclic graph whose nodes carry a :class:`Role` tag.

    Roles are metadata; none of the graph algorithms look at them.
    """

    __slots__ = ("_roles", "_edges", "_parents", "_children", "_order")

    def __init__(self, roles: Mapping[str, Role], edges: Iterable[tuple[str, str]]):
        self._roles = dict(sorted(roles.items()))
        self._edges = tuple(sorted(edges))
        self._parents = {v: set() for v in self._roles}
        self._children = {v: set() for v in self._roles}
        for a, b in self._edges:
            self._parents[b].add(a)
            self._children[a].add(b)
        self._order = _topological_order(self._roles, self._parents, self._children)

    # -- basic accessors -------------------------------------------------
    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self._roles)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def roles(self) -> dict[str, Role]:
        return dict(self._roles)

    def role(self, node: str) -> Role:
        self._check(node)
        return self._roles[node]

    def parents(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return tuple(sorted(self._parents[node]))

    def children(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return tuple(sorted(self._children[node]))

    def topological_order(self) -> tuple[str, ...]:
        """Kahn order with lexicographic tie-breaking."""
        return self._order

    def descendants(self, node: str) -> set[str]:
        self._check(node)
        return _reach(node, self._children)

    def ancestors(self, node: str) -> set[str]:
        self._check(node)
        return _reach(node, self._parents)

    def has_edge(self, a: str, b: str) -> bool:
        return a in self._children and b in self._children[a]

    def _check(self, *nodes: str) -> None:
        for v in nodes:
            if v not in self._roles:
                raise UnknownNode(f"unknown node {v!r}")

    def __contains__(self, node) -> bool:
        return node in self._roles

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalDag):
            return NotImplemented
        return self._roles == other._roles and self._edges == other._edges

    def __hash__(self):
        return hash((tuple(self._roles.items()), self._edges))

    def __repr__(self) -> str:
        edges = ", ".join(f"{a}->{b}" for a, b in self._edges)
        return f"CausalDag(nodes={list(self._roles)}, edges=[{edges}])"

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": v, "role": r.value} for v, r in self._roles.items()],
            "edges": [[a, b] for a, b in self._edges],
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "CausalDag":
        nodes = {}
        for item in payload.get("nodes", []):
            if isinstance(item, str):
                nodes[item] = Role.GENERIC
            else:
                nodes[item["id"]] = Role.parse(item.get("role", "generic"))
        edges = [tuple(e) for e in payload.get("edges", [])]
        return build_dag(nodes, edges)


def _reach(start: str, adjacency: Mapping[str, set]) -> set[str]:
    seen: set[str] = set()
    stack = list(adjacency[start])
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(adjacency[v])
    return seen


def _topological_order(roles, parents, children) -> tuple[str, ...]:
    indegree = {v: len(parents[v]) for v in roles}
    ready = [v for v, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != len(roles):
        done = set(order)
        raise CycleDetected(_find_cycle({v for v in roles if v not in done}, parents))
    return tuple(order)


def _find_cycle(candidates: set[str], parents) -> list[str]:
    # every node left over by Kahn's algorithm keeps a parent among the leftovers,
    # so walking parents must eventually revisit a node
    path, index = [], {}
    v = min(candidates)
    while v not in index:
        index[v] = len(path)
        path.append(v)
        v = min(p for p in parents[v] if p in candidates)
    cycle = path[index[v]:][::-1]
    return cycle + [cycle[0]]


def build_dag(nodes, edges: Iterable[tuple[str, str]] = ()) -> CausalDag:
    """Validate and build a :class:`CausalDag`.

    ``nodes`` may be a mapping ``id -> role``, an iterable of ``(id, role)`` pairs,
    or an iterable of bare ids (tagged ``generic``).
    """
    if isinstance(nodes, Mapping):
        items = list(nodes.items())
    else:
        items = [(v, Role.GENERIC) if isinstance(v, str) else tuple(v) for v in nodes]
    roles: dict[str, Role] = {}
    for v, r in items:
        if not isinstance(v, str) or not v:
            raise ValueError(f"node identifiers must be non-empty strings, got {v!r}")
        roles[v] = Role.parse(r)
    seen: set[tuple[str, str]] = set()
    for edge in edges:
        a, b = edge
        for end in (a, b):
            if end not in roles:
                raise UnknownEndpoint(f"edge {a}->{b} references undeclared node {end!r}")
        if a == b:
            raise CycleDetected([a, a])
        if (a, b) in seen:
            raise DuplicateEdge(f"edge {a}->{b} declared twice")
        seen.add((a, b))
    return CausalDag(roles, seen)


def load_dag(path) -> CausalDag:
    with open(path) as fh:
        return CausalDag.from_dict(json.load(fh))


def save_dag(dag: CausalDag, path) -> None:
    Path(path).write_text(json.dumps(dag.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PathWitness:
    """A simple path in the skeleton, with edge directions relative to traversal.

    ``directions[i]`` is ``"->"`` when the edge points from ``nodes[i]`` to
    ``nodes[i + 1]`` and ``"<-"`` otherwise.
    """

    nodes: tuple[str, ...]
    directions: tuple[str, ...]

    @property
    def kinds(self) -> tuple[str, ...]:
        out = []
        for i in range(1, len(self.nodes) - 1):
            left, right = self.directions[i - 1], self.directions[i]
            if left == "->" and right == "<-":
                out.append("collider")
            elif left == "<-" and right == "->":
                out.append("fork")
            else:
                out.append("chain")
        return tuple(out)

    @property
    def is_backdoor(self) -> bool:
        return bool(self.directions) and self.directions[0] == "<-"

    def edges(self) -> list[tuple[str, str]]:
        out = []
        for (a, b), d in zip(zip(self.nodes, self.nodes[1:]), self.directions):
            out.append((a, b) if d == "->" else (b, a))
        return out

    def __str__(self) -> str:
        parts = [self.nodes[0]]
        for d, v in zip(self.directions, self.nodes[1:]):
            parts += [d, v]
        return " ".join(parts)


def all_paths(dag: CausalDag, source: str, target: str) -> list[PathWitness]:
    """Every simple path between two nodes in the undirected skeleton."""
    dag._check(source, target)
    found: list[PathWitness] = []
    neighbours = {
        v: sorted([(c, "->") for c in dag.children(v)] + [(p, "<-") for p in dag.parents(v)])
        for v in dag.nodes
    }

    def walk(v, nodes, dirs, on_path):
        if v == target:
            found.append(PathWitness(tuple(nodes), tuple(dirs)))
            return
        for w, d in neighbours[v]:
            if w not in on_path:
                on_path.add(w)
                walk(w, nodes + [w], dirs + [d], on_path)
                on_path.discard(w)

    if source != target:
        walk(source, [source], [], {source})
    return sorted(found, key=lambda p: p.nodes)


def path_is_open(dag: CausalDag, path: PathWitness, given: Iterable[str] = ()) -> bool:
    given = set(given)
    for v, kind in zip(path.nodes[1:-1], path.kinds):
        if kind == "collider":
            if v not in given and not (dag.descendants(v) & given):
                return False
        elif v in given:
            return False
    return True


def open_paths(dag: CausalDag, x: str, y: str, given: Iterable[str] = ()) -> list[PathWitness]:
    given = set(given)
    return [p for p in all_paths(dag, x, y) if path_is_open(dag, p, given)]


def backdoor_paths(dag: CausalDag, treatment: str, outcome: str) -> list[PathWitness]:
    """Paths from treatment to outcome whose first edge points into the treatment."""
    dag._check(treatment, outcome)
    if treatment == outcome:
        raise ValueError("treatment and outcome must differ")
    return [p for p in all_paths(dag, treatment, outcome) if p.is_backdoor]


# ---------------------------------------------------------------------------
# d-separation


def _check_query(dag: CausalDag, x: str, y: str, given: set[str]) -> None:
    dag._check(x, y, *given)
    if x == y:
        raise ValueError("x and y must differ")
    if x in given or y in given:
        raise OverlapError(f"{x if x in given else y!r} is both queried and conditioned on")


def d_separated(dag: CausalDag, x: str, y: str, given: Iterable[str] = ()) -> bool:
    """True iff ``x`` and ``y`` are d-separated by ``given``.

    Uses the reachable-set (Bayes-ball) traversal; :func:`open_paths` gives the
    explicit paths when a witness is wanted.
    """
    given = set(given)
    _check_query(dag, x, y, given)
    return y not in _reachable(dag, x, given)


def _reachable(dag: CausalDag, source: str, given: set[str]) -> set[str]:
    # ancestors of the conditioning set, including the set itself
    anc = set(given)
    for z in given:
        anc |= dag.ancestors(z)

    up, down = "up", "down"
    stack = [(source, up)]
    visited: set[tuple[str, str]] = set()
    reachable: set[str] = set()
    while stack:
        v, d = stack.pop()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v not in given:
            reachable.add(v)
        if d == up and v not in given:
            stack += [(p, up) for p in dag._parents[v]]
            stack += [(c, down) for c in dag._children[v]]
        elif d == down:
            if v not in given:
                stack += [(c, down) for c in dag._children[v]]
            if v in anc:
                stack += [(p, up) for p in dag._parents[v]]
    reachable.discard(source)
    return reachable


def is_valid_adjustment_set(dag: CausalDag, treatment: str, outcome: str, z: Iterable[str]) -> bool:
    """Backdoor criterion: no descendant of the treatment, every backdoor path blocked."""
    z = set(z)
    _check_query(dag, treatment, outcome, z)
    if z & dag.descendants(treatment):
        return False
    # backdoor paths are exactly the paths that survive deleting the treatment's out-edges
    pruned = CausalDag(dag.roles, [e for e in dag.edges if e[0] != treatment])
    return d_separated(pruned, treatment, outcome, z)


def intervene(dag: CausalDag, targets: Iterable[str]) -> CausalDag:
    """Graph surgery for do(targets): drop every edge entering a target."""
    targets = set(targets)
    dag._check(*targets)
    return CausalDag(dag.roles, [e for e in dag.edges if e[1] not in targets])


def to_dot(dag: CausalDag, highlight: tuple[str, str] | None = None) -> str:
    """Graphviz source, one line per edge.

    With ``highlight=(treatment, outcome)``, edges on a backdoor path are drawn red.
    """
    marked: set[tuple[str, str]] = set()
    if highlight is not None:
        for p in backdoor_paths(dag, *highlight):
            marked.update(p.edges())
    lines = ["digraph G {"]
    for v in dag.nodes:
        if not dag.parents(v) and not dag.children(v):
            lines.append(f'  "{v}";')
    for a, b in dag.edges:
        attr = ' [color=red, label="backdoor"]' if (a, b) in marked else ""
        lines.append(f'  "{a}" -> "{b}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"
