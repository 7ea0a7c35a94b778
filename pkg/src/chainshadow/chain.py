"""Delta-transition graphs and chain-recurrence structure.

At resolution delta the transition graph has an edge p -> q exactly when
d(f(p), q) <= delta, so the exact edge p -> f(p) is always present. Chain
recurrence at that resolution is membership in a directed cycle, classes
are the strongly connected pieces of the recurrent part, and the class
order is reachability between classes (possibly through transient points).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .bits import bits as _bits
from .errors import BadParams, EmptySet, NotDecreasing
from .rational import format_rational, parse_nonnegative
from .system import FiniteMetricSystem


@dataclass(frozen=True)
class DeltaGraph:
    """Directed graph of allowed single steps at resolution ``delta``."""

    system: FiniteMetricSystem
    delta: Fraction
    succ: tuple[tuple[int, ...], ...]

    @cached_property
    def _components(self):
        """(scc_of, sccs, reach) with sccs in condensation-topological order.

        reach[s] is a bitmask over scc ids reachable from scc s, s included.
        """
        n = self.system.n
        order = self._finish_order()
        preds: list[list[int]] = [[] for _ in range(n)]
        for p in range(n):
            for q in self.succ[p]:
                preds[q].append(p)
        scc_of = [-1] * n
        sccs: list[tuple[int, ...]] = []
        for root in reversed(order):
            if scc_of[root] >= 0:
                continue
            sid = len(sccs)
            members = [root]
            scc_of[root] = sid
            stack = [root]
            while stack:
                v = stack.pop()
                for w in preds[v]:
                    if scc_of[w] < 0:
                        scc_of[w] = sid
                        members.append(w)
                        stack.append(w)
            sccs.append(tuple(sorted(members)))
        reach = [0] * len(sccs)
        for sid in range(len(sccs) - 1, -1, -1):  # sinks first
            mask = 1 << sid
            for v in sccs[sid]:
                for w in self.succ[v]:
                    if scc_of[w] != sid:
                        mask |= reach[scc_of[w]]
            reach[sid] = mask
        return tuple(scc_of), tuple(sccs), tuple(reach)

    def _finish_order(self) -> list[int]:
        n = self.system.n
        seen = [False] * n
        order: list[int] = []
        for start in range(n):
            if seen[start]:
                continue
            seen[start] = True
            stack: list[tuple[int, int]] = [(start, 0)]
            while stack:
                v, i = stack[-1]
                if i < len(self.succ[v]):
                    stack[-1] = (v, i + 1)
                    w = self.succ[v][i]
                    if not seen[w]:
                        seen[w] = True
                        stack.append((w, 0))
                else:
                    order.append(v)
                    stack.pop()
        return order

    def is_cyclic_point(self, p: int) -> bool:
        scc_of, sccs, _ = self._components
        members = sccs[scc_of[p]]
        return len(members) > 1 or p in self.succ[p]


def build_delta_graph(system: FiniteMetricSystem, delta) -> DeltaGraph:
    delta = parse_nonnegative(delta)
    succ = tuple(
        tuple(q for q in system.points if system.dist[system.map[p]][q] <= delta)
        for p in system.points
    )
    return DeltaGraph(system, delta, succ)


def reaches(graph: DeltaGraph, x: int, y: int) -> bool:
    """True when a directed path of length >= 1 runs from x to y."""
    _check_point(graph.system, x)
    _check_point(graph.system, y)
    scc_of, _, reach = graph._components
    target = 1 << scc_of[y]
    return any(reach[scc_of[z]] & target for z in graph.succ[x])


def chain_recurrent_set(graph: DeltaGraph) -> frozenset[int]:
    """Points lying on a directed cycle of the delta graph."""
    _, sccs, _ = graph._components
    out = []
    for members in sccs:
        if len(members) > 1 or members[0] in graph.succ[members[0]]:
            out.extend(members)
    return frozenset(out)


@dataclass(frozen=True)
class ChainDecomposition:
    """Classes of mutual reachability inside the recurrent set at one delta.

    ``class_reach[i]`` is a bitmask of other classes reachable from class i;
    ``separation[i]`` is the least distance from class i to any other class
    (None when the decomposition has a single class).
    """

    system: FiniteMetricSystem
    delta: Fraction
    classes: tuple[frozenset[int], ...]
    class_index: tuple[int | None, ...]
    class_reach: tuple[int, ...]
    separation: tuple[Fraction | None, ...]

    @cached_property
    def cr(self) -> frozenset[int]:
        return frozenset(p for p, c in enumerate(self.class_index) if c is not None)

    @cached_property
    def _incoming(self) -> tuple[int, ...]:
        masks = [0] * len(self.classes)
        for j, mask in enumerate(self.class_reach):
            for i in _bits(mask):
                masks[i] |= 1 << j
        return tuple(masks)

    def class_of(self, p: int) -> int | None:
        return self.class_index[p]

    def is_terminal(self, i: int) -> bool:
        return self.class_reach[i] == 0

    def is_initial(self, i: int) -> bool:
        return self._incoming[i] == 0

    def terminal_classes(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.classes)) if self.is_terminal(i))

    def initial_classes(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.classes)) if self.is_initial(i))

    def order_pairs(self) -> tuple[tuple[int, int], ...]:
        """All strict pairs (i, j) with class i below class j."""
        return tuple(
            (i, j) for j, mask in enumerate(self.class_reach) for i in _bits(mask)
        )


def decompose(graph: DeltaGraph) -> ChainDecomposition:
    scc_of, sccs, reach = graph._components
    cyclic = [
        sid
        for sid, members in enumerate(sccs)
        if len(members) > 1 or members[0] in graph.succ[members[0]]
    ]
    cyclic.sort(key=lambda sid: sccs[sid][0])
    classes = tuple(frozenset(sccs[sid]) for sid in cyclic)
    index_of_sid = {sid: i for i, sid in enumerate(cyclic)}
    class_index: list[int | None] = [None] * graph.system.n
    for sid, i in index_of_sid.items():
        for p in sccs[sid]:
            class_index[p] = i
    class_reach = []
    for sid in cyclic:
        mask = 0
        for other in _bits(reach[sid]):
            if other != sid and other in index_of_sid:
                mask |= 1 << index_of_sid[other]
        class_reach.append(mask)
    dist = graph.system.dist
    separation: list[Fraction | None] = []
    for i, cls in enumerate(classes):
        best: Fraction | None = None
        for j, other in enumerate(classes):
            if i == j:
                continue
            for p in cls:
                row = dist[p]
                for q in other:
                    if best is None or row[q] < best:
                        best = row[q]
        separation.append(best)
    return ChainDecomposition(
        graph.system,
        graph.delta,
        classes,
        tuple(class_index),
        tuple(class_reach),
        tuple(separation),
    )


def class_order(dec: ChainDecomposition, a: int, b: int) -> bool:
    """Reflexive order: class a is below class b when b reaches a."""
    _check_class(dec, a)
    _check_class(dec, b)
    return a == b or bool(dec.class_reach[b] & (1 << a))


def maximal_classes(dec: ChainDecomposition) -> tuple[int, ...]:
    """Classes with nothing else above them (no other class reaches them)."""
    return tuple(
        i
        for i in range(len(dec.classes))
        if not any(class_order(dec, i, j) for j in range(len(dec.classes)) if j != i)
    )


def neighborhood(system: FiniteMetricSystem, points, r) -> frozenset[int]:
    """Closed r-neighborhood of a nonempty point set."""
    r = parse_nonnegative(r)
    points = frozenset(points)
    if not points:
        raise EmptySet("neighborhood of the empty set")
    for p in points:
        _check_point(system, p)
    return frozenset(
        x for x in system.points if min(system.dist[x][s] for s in points) <= r
    )


def isolated_classes(dec: ChainDecomposition, r) -> tuple[int, ...]:
    """Classes whose separation radius exceeds r (r must be positive)."""
    r = parse_nonnegative(r)
    if r == 0:
        raise BadParams("isolation radius must be positive")
    return tuple(
        i
        for i, sep in enumerate(dec.separation)
        if sep is None or sep > r
    )


def hausdorff_distance(system: FiniteMetricSystem, a, b) -> Fraction:
    a = frozenset(a)
    b = frozenset(b)
    if not a or not b:
        raise EmptySet("Hausdorff distance needs nonempty sets")
    for p in a | b:
        _check_point(system, p)
    d = system.dist
    forward = max(min(d[x][y] for y in b) for x in a)
    backward = max(min(d[y][x] for x in a) for y in b)
    return max(forward, backward)


def omega_cycle(system: FiniteMetricSystem, x: int) -> frozenset[int]:
    """The eventual periodic cycle of the forward orbit of x."""
    _check_point(system, x)
    seen: dict[int, int] = {}
    trail: list[int] = []
    while x not in seen:
        seen[x] = len(trail)
        trail.append(x)
        x = system.map[x]
    return frozenset(trail[seen[x]:])


def invariant_core(system: FiniteMetricSystem, points) -> frozenset[int]:
    """Greatest forward-invariant subset of the given point set."""
    core = set(points)
    for p in core:
        _check_point(system, p)
    while True:
        leaving = {p for p in core if system.map[p] not in core}
        if not leaving:
            return frozenset(core)
        core -= leaving


@dataclass(frozen=True)
class DeltaLadder:
    """Decompositions along strictly decreasing resolutions.

    ``refinement[k][j]`` is the class at level k containing class j of
    level k+1. ``stabilized_at`` is the first level whose delta lies below
    the functional threshold, after which all levels agree with the plain
    orbit graph.
    """

    system: FiniteMetricSystem
    deltas: tuple[Fraction, ...]
    levels: tuple[ChainDecomposition, ...]
    refinement: tuple[tuple[int, ...], ...]
    threshold: Fraction | None
    stabilized_at: int | None

    def class_counts(self) -> tuple[int, ...]:
        return tuple(len(level.classes) for level in self.levels)


def refine_ladder(system: FiniteMetricSystem, deltas) -> DeltaLadder:
    resolved = [parse_nonnegative(d) for d in deltas]
    if not resolved:
        raise BadParams("need at least one delta")
    if any(a <= b for a, b in zip(resolved, resolved[1:])):
        raise NotDecreasing(f"deltas must strictly decrease, got {resolved}")
    levels = [decompose(build_delta_graph(system, d)) for d in resolved]
    refinement = []
    for coarse, fine in zip(levels, levels[1:]):
        if not fine.cr <= coarse.cr:
            raise RuntimeError("recurrence monotonicity violated")
        mapping = []
        for cls in fine.classes:
            parents = {coarse.class_index[p] for p in cls}
            if len(parents) != 1 or None in parents:
                raise RuntimeError("class containment violated across levels")
            mapping.append(parents.pop())
        refinement.append(tuple(mapping))
    threshold = system.functional_threshold
    stabilized = None
    if threshold is not None:
        for k, d in enumerate(resolved):
            if d < threshold:
                stabilized = k
                break
    elif resolved:
        stabilized = 0  # one-point system: always the plain orbit graph
    return DeltaLadder(
        system, tuple(resolved), tuple(levels), tuple(refinement), threshold, stabilized
    )


# ---------------------------------------------------------------------------
# exports


def decomposition_report(dec: ChainDecomposition) -> dict:
    """JSON-ready report; ``order`` pairs [i, j] mean class i <= class j."""
    return {
        "delta": format_rational(dec.delta),
        "cr_size": len(dec.cr),
        "classes": [
            {
                "id": i,
                "points": sorted(cls),
                "terminal": dec.is_terminal(i),
                "initial": dec.is_initial(i),
                "separation": None if sep is None else format_rational(sep),
            }
            for i, (cls, sep) in enumerate(zip(dec.classes, dec.separation))
        ],
        "order": [list(pair) for pair in sorted(dec.order_pairs())],
    }


def decomposition_dot(dec: ChainDecomposition, isolation_radius=None) -> str:
    """DOT digraph of the condensation (transitively reduced).

    Edges point in flow direction: A -> B means chains run from A to B.
    When ``isolation_radius`` is given, classes separated by more than it
    are flagged as isolated.
    """
    if isolation_radius is not None:
        isolation_radius = parse_nonnegative(isolation_radius)
    lines = ["digraph chain_components {", "  node [shape=box];"]
    maximal = set(maximal_classes(dec))
    for i, cls in enumerate(dec.classes):
        flags = []
        if dec.is_terminal(i):
            flags.append("terminal")
        if dec.is_initial(i):
            flags.append("initial")
        if i in maximal:
            flags.append("maximal")
        sep = dec.separation[i]
        if isolation_radius is not None and (sep is None or sep > isolation_radius):
            flags.append("isolated")
        label = f"C{i}|size={len(cls)}"
        if flags:
            label += "|" + ",".join(flags)
        if sep is not None:
            label += f"|sep={format_rational(sep)}"
        lines.append(f'  C{i} [label="{label}"];')
    reach = dec.class_reach
    for a in range(len(dec.classes)):
        for b in _bits(reach[a]):
            through = any(
                reach[k] & (1 << b) for k in _bits(reach[a]) if k != b
            )
            if not through:
                lines.append(f"  C{a} -> C{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"



def _check_point(system: FiniteMetricSystem, p) -> None:
    if not isinstance(p, int) or isinstance(p, bool) or not 0 <= p < system.n:
        raise BadParams(f"point index out of range: {p!r}")


def _check_class(dec: ChainDecomposition, i) -> None:
    if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < len(dec.classes):
        raise BadParams(f"class index out of range: {i!r}")
