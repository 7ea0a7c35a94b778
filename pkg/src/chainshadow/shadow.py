"""Pseudo-orbits and exact shadowing decisions.

Finite-scale semantics of a vanishing error sequence: on a finite metric
space any positive step error is bounded below by the minimum gap, so a
pseudo-orbit whose errors tend to zero is one whose errors are eventually
exactly zero. Eventually-exact orbits (a bounded-error prefix followed by
the exact orbit of the last prefix point) therefore model limit-style
pseudo-orbits without loss.

The system-level checks run a determinized automaton over states
(pseudo-point p, candidate set Y): Y is exactly the set of current
positions of true orbits tracking the prefix within eps. Emptiness of Y
certifies an unshadowable prefix; on a finite space nonemptiness along
every reachable state yields shadows for arbitrarily long pseudo-orbits,
because the tracker sets for a fixed infinite pseudo-orbit form a
decreasing chain of nonempty finite sets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .bits import bits, mask_of, min_bit, to_frozenset
from .errors import (
    BadParams,
    DomainNotInvariant,
    EmptyDomain,
    Inconclusive,
    KindMismatch,
    NotFailing,
    TooLarge,
)
from .rational import format_rational, parse_nonnegative
from .system import FiniteMetricSystem

PLAIN = "plain"
EVENTUALLY_EXACT = "eventually_exact"

DEFAULT_MAX_LEN = 8
_ORACLE_POINT_GUARD = 12
_ORACLE_LENGTH_GUARD = 8


@dataclass(frozen=True)
class PseudoOrbit:
    """A stored finite pseudo-orbit.

    ``tail_start=None`` means a plain orbit: every step error bounded by
    delta. Otherwise the orbit is eventually exact: errors bounded by
    delta before ``tail_start`` and exactly zero from it on, and the
    sequence is read as continuing forever along the exact orbit of
    ``points[tail_start]``.
    """

    points: tuple[int, ...]
    delta: Fraction
    tail_start: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "delta", parse_nonnegative(self.delta))
        if not self.points:
            raise BadParams("a pseudo-orbit needs at least one point")
        if self.tail_start is not None:
            if not isinstance(self.tail_start, int) or isinstance(self.tail_start, bool):
                raise BadParams("tail_start must be an int position")
            if not 0 <= self.tail_start < len(self.points):
                raise BadParams("tail_start must index a stored point")

    @classmethod
    def plain(cls, points, delta) -> "PseudoOrbit":
        return cls(tuple(points), delta, None)

    @classmethod
    def eventually_exact(cls, points, delta, tail_start: int) -> "PseudoOrbit":
        return cls(tuple(points), delta, tail_start)

    @property
    def kind(self) -> str:
        return PLAIN if self.tail_start is None else EVENTUALLY_EXACT

    def errors(self, system: FiniteMetricSystem) -> tuple[Fraction, ...]:
        """Step errors d(f(x_i), x_{i+1}) along the stored sequence."""
        pts = self.points
        return tuple(
            system.dist[system.map[pts[i]]][pts[i + 1]] for i in range(len(pts) - 1)
        )

    def to_json(self) -> dict:
        out = {
            "points": list(self.points),
            "kind": self.kind,
            "delta": format_rational(self.delta),
        }
        if self.tail_start is not None:
            out["tail_start"] = self.tail_start
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PseudoOrbit":
        kind = data.get("kind", PLAIN)
        if kind not in (PLAIN, EVENTUALLY_EXACT):
            raise BadParams(f"unknown pseudo-orbit kind {kind!r}")
        tail = data.get("tail_start")
        if kind == PLAIN:
            if tail is not None:
                raise BadParams("plain orbits take no tail_start")
            return cls.plain(data["points"], data["delta"])
        if tail is None:
            raise BadParams("eventually_exact orbits need a tail_start")
        return cls.eventually_exact(data["points"], data["delta"], tail)


class OrbitViolation(NamedTuple):
    position: int
    error: Fraction
    bound: Fraction


def first_violation(system: FiniteMetricSystem, po: PseudoOrbit) -> OrbitViolation | None:
    """First step breaking the orbit's own error bounds, if any."""
    for p in po.points:
        _check_point(system, p)
    zero = Fraction(0)
    for i, err in enumerate(po.errors(system)):
        if po.tail_start is not None and i >= po.tail_start:
            if err != 0:
                return OrbitViolation(i, err, zero)
        elif err > po.delta:
            return OrbitViolation(i, err, po.delta)
    return None


def validate_pseudo_orbit(system: FiniteMetricSystem, po: PseudoOrbit) -> bool:
    return first_violation(system, po) is None


class ShadowState(NamedTuple):
    """One determinized state: current pseudo-point and candidate positions."""

    point: int
    candidates: frozenset[int]


@dataclass(frozen=True)
class ShadowVerdict:
    """Outcome of a system-level shadowing or slimit check."""

    prop: str
    delta: Fraction
    eps: Fraction
    passed: bool
    witness: PseudoOrbit | None
    states_explored: int

    def to_json(self) -> dict:
        return {
            "property": self.prop,
            "delta": format_rational(self.delta),
            "eps": format_rational(self.eps),
            "pass": self.passed,
            "witness": None if self.witness is None else self.witness.to_json(),
            "states_explored": self.states_explored,
        }


@dataclass(frozen=True)
class MergeSet:
    """Per point p, the points whose orbit joins p's orbit after finitely
    many steps while staying within eps beforehand (p always qualifies)."""

    eps: Fraction
    tracks: tuple[frozenset[int], ...]

    def of(self, p: int) -> frozenset[int]:
        return self.tracks[p]


# ---------------------------------------------------------------------------
# per-orbit checks


def shadow_sets(system, po: PseudoOrbit, eps, domain=None) -> list[frozenset[int]]:
    """Candidate position sets Y_i along the stored sequence.

    Y_0 is the eps-ball around the first point; each later Y is the image
    of the previous one intersected with the ball around the next point.
    An empty set certifies that no point eps-tracks the prefix.
    """
    eps = parse_nonnegative(eps)
    _require_valid(system, po)
    dmask = _domain_mask(system, domain)
    return [to_frozenset(m) for m in _shadow_masks(system, po.points, eps, dmask)]


def is_shadowed(system, po: PseudoOrbit, eps, domain=None) -> int | None:
    """A concrete point tracking a plain pseudo-orbit within eps, if any.

    Reconstruction walks the candidate sets backwards picking the smallest
    index at every choice, so the answer is deterministic.
    """
    if po.kind != PLAIN:
        raise KindMismatch("is_shadowed expects a plain pseudo-orbit")
    eps = parse_nonnegative(eps)
    _require_valid(system, po)
    dmask = _domain_mask(system, domain)
    masks = _shadow_masks(system, po.points, eps, dmask)
    if any(m == 0 for m in masks):
        return None
    return _backtrack(system, masks)


def merge_sets(system, eps, domain=None) -> MergeSet:
    """Merge sets for every point, via a fixpoint on the pair graph."""
    eps = parse_nonnegative(eps)
    dmask = _domain_mask(system, domain)
    masks = _asymp_masks(system, eps, dmask)
    return MergeSet(eps, tuple(to_frozenset(m) for m in masks))


def is_limit_shadowed(system, po: PseudoOrbit, eps, domain=None) -> int | None:
    """A point eps-tracking the whole orbit and merging into its tail."""
    if po.kind != EVENTUALLY_EXACT:
        raise KindMismatch("is_limit_shadowed expects an eventually-exact pseudo-orbit")
    eps = parse_nonnegative(eps)
    _require_valid(system, po)
    dmask = _domain_mask(system, domain)
    t = po.tail_start
    masks = _shadow_masks(system, po.points[: t + 1], eps, dmask)
    if any(m == 0 for m in masks):
        return None
    final = masks[t] & _asymp_masks(system, eps, dmask)[po.points[t]]
    if final == 0:
        return None
    masks[t] = final
    return _backtrack(system, masks)


# ---------------------------------------------------------------------------
# system-level checks


def check_shadowing_property(
    system, delta, eps, domain=None, *, state_cap=None, workers=1
) -> ShadowVerdict:
    """Decide whether every delta pseudo-orbit is eps-shadowed.

    Explores the determinized automaton breadth-first; fails exactly when
    some reachable state has an empty candidate set, and then reports the
    lexicographically smallest shortest failing prefix as witness.
    """
    delta = parse_nonnegative(delta)
    eps = parse_nonnegative(eps)
    dmask = _domain_mask(system, domain)
    path, explored = _explore(
        system, delta, eps, dmask, lambda p, y: y == 0, state_cap, workers
    )
    witness = None if path is None else PseudoOrbit.plain(path, delta)
    return ShadowVerdict("shadowing", delta, eps, path is None, witness, explored)


def check_slimit_property(
    system, delta, eps, domain=None, *, state_cap=None, workers=1
) -> ShadowVerdict:
    """Decide whether every eventually-exact delta pseudo-orbit is
    eps-limit shadowed.

    Any reachable state (p, Y) extends to the pseudo-orbit that follows
    the realizing prefix and then the exact orbit of p, so the check
    requires a candidate in Y that merges into p's orbit. Failures are
    reported as the prefix plus tail marker.
    """
    delta = parse_nonnegative(delta)
    eps = parse_nonnegative(eps)
    dmask = _domain_mask(system, domain)
    asymp = _asymp_masks(system, eps, dmask)
    path, explored = _explore(
        system, delta, eps, dmask, lambda p, y: y & asymp[p] == 0, state_cap, workers
    )
    witness = None
    if path is not None:
        witness = PseudoOrbit.eventually_exact(path, delta, len(path) - 1)
    return ShadowVerdict("slimit", delta, eps, path is None, witness, explored)


def extract_witness(verdict: ShadowVerdict) -> PseudoOrbit:
    """The stored counterexample pseudo-orbit of a failing verdict."""
    if verdict.passed:
        raise NotFailing(f"{verdict.prop} verdict passed; no witness to extract")
    assert verdict.witness is not None
    return verdict.witness


def reachable_shadow_states(
    system, delta, eps, domain=None, *, state_cap=None
) -> list[ShadowState]:
    """Every reachable determinized state, in canonical BFS order."""
    delta = parse_nonnegative(delta)
    eps = parse_nonnegative(eps)
    dmask = _domain_mask(system, domain)
    balls = _ball_masks(system, eps, dmask)
    succ = _succ_in_domain(system, delta, dmask)
    image = _image_fn(system)
    seen: dict[tuple[int, int], None] = {}
    level = []
    for p in bits(dmask):
        state = (p, balls[p])
        if state not in seen:
            seen[state] = None
            level.append(state)
    while level:
        nxt = []
        for p, y in level:
            iy = image(y)
            for q in succ[p]:
                child = (q, iy & balls[q])
                if child not in seen:
                    seen[child] = None
                    nxt.append(child)
        if state_cap is not None and len(seen) > state_cap:
            raise Inconclusive(len(seen), state_cap)
        level = nxt
    return [ShadowState(p, to_frozenset(y)) for p, y in seen]


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleVerdict:
    """Result of exhaustive bounded-length enumeration."""

    prop: str
    delta: Fraction
    eps: Fraction
    passed: bool
    witness: PseudoOrbit | None
    nodes_explored: int


def brute_force_oracle(
    system,
    delta,
    eps,
    prop: str = "shadowing",
    max_len: int = DEFAULT_MAX_LEN,
    domain=None,
    *,
    point_limit: int = _ORACLE_POINT_GUARD,
    length_limit: int = _ORACLE_LENGTH_GUARD,
) -> OracleVerdict:
    """Enumerate every delta chain of up to ``max_len`` points and test it
    against all candidate shadow points directly from the distance table.

    Kept deliberately separate from the automaton code path: candidate
    survivors are carried as plain sets, merging is decided by walking
    pair orbits, and the search is a depth-first iterative deepening over
    the chain tree. Shortest failing chains are found first; within a
    length, the lexicographically smallest. Guards refuse instances that
    are too large to enumerate at desk scale.
    """
    if prop not in ("shadowing", "slimit"):
        raise BadParams(f"unknown property {prop!r}")
    delta = parse_nonnegative(delta)
    eps = parse_nonnegative(eps)
    if system.n > point_limit:
        raise TooLarge(f"{system.n} points exceeds the oracle guard {point_limit}")
    if max_len > length_limit:
        raise TooLarge(f"max_len {max_len} exceeds the oracle guard {length_limit}")
    if max_len < 2:
        raise BadParams("max_len must be at least 2")
    pts = sorted(bits(_domain_mask(system, domain)))
    dist = system.dist
    fmap = system.map
    balls = {p: frozenset(q for q in pts if dist[p][q] <= eps) for p in pts}
    succ = {p: tuple(q for q in pts if dist[fmap[p]][q] <= delta) for p in pts}

    merge_memo: dict[tuple[int, int], bool] = {}

    def merges(x: int, p: int) -> bool:
        walked: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        cx, cp = x, p
        while True:
            if cx == cp:
                result = True
                break
            key = (cx, cp)
            cached = merge_memo.get(key)
            if cached is not None:
                result = cached
                break
            if key in seen or dist[cx][cp] > eps:
                result = False
                break
            seen.add(key)
            walked.append(key)
            cx, cp = fmap[cx], fmap[cp]
        for key in walked:
            merge_memo[key] = result
        return result

    if prop == "shadowing":
        def fails(p: int, survivors: frozenset[int]) -> bool:
            return not survivors
    else:
        def fails(p: int, survivors: frozenset[int]) -> bool:
            return not any(merges(y, p) for y in survivors)

    memo: dict[tuple[int, frozenset[int]], int] = {}
    nodes = 0
    witness_points: tuple[int, ...] | None = None

    def extend(p: int, survivors: frozenset[int], path: list[int], limit: int) -> bool:
        nonlocal nodes, witness_points
        nodes += 1
        remaining = limit - len(path)
        key = (p, survivors)
        if memo.get(key, -1) >= remaining:
            return False
        if remaining == 0:
            if fails(p, survivors):
                witness_points = tuple(path)
                return True
            memo[key] = 0
            return False
        for q in succ[p]:
            step = frozenset(
                fmap[y] for y in survivors if dist[fmap[y]][q] <= eps
            )
            path.append(q)
            if extend(q, step, path, limit):
                return True
            path.pop()
        if remaining > memo.get(key, -1):
            memo[key] = remaining
        return False

    for limit in range(2, max_len + 1):
        for x0 in pts:
            if extend(x0, balls[x0], [x0], limit):
                witness = (
                    PseudoOrbit.plain(witness_points, delta)
                    if prop == "shadowing"
                    else PseudoOrbit.eventually_exact(
                        witness_points, delta, len(witness_points) - 1
                    )
                )
                return OracleVerdict(prop, delta, eps, False, witness, nodes)
    return OracleVerdict(prop, delta, eps, True, None, nodes)


# ---------------------------------------------------------------------------
# internals


def _check_point(system: FiniteMetricSystem, p) -> None:
    if not isinstance(p, int) or isinstance(p, bool) or not 0 <= p < system.n:
        raise BadParams(f"point index out of range: {p!r}")


def _require_valid(system, po: PseudoOrbit) -> None:
    hit = first_violation(system, po)
    if hit is not None:
        raise BadParams(
            f"pseudo-orbit breaks its bound at position {hit.position}: "
            f"error {hit.error} > {hit.bound}"
        )


def _domain_mask(system: FiniteMetricSystem, domain) -> int:
    if domain is None:
        return (1 << system.n) - 1
    pts = frozenset(domain)
    if not pts:
        raise EmptyDomain("domain must contain at least one point")
    for p in pts:
        _check_point(system, p)
    for p in pts:
        if system.map[p] not in pts:
            raise DomainNotInvariant(
                f"domain is not forward-invariant: f({p}) = {system.map[p]} leaves it"
            )
    return mask_of(pts)


def _ball_masks(system, eps: Fraction, dmask: int) -> list[int]:
    balls = []
    domain_points = list(bits(dmask))
    for p in system.points:
        row = system.dist[p]
        m = 0
        for q in domain_points:
            if row[q] <= eps:
                m |= 1 << q
        balls.append(m)
    return balls


def _succ_in_domain(system, delta: Fraction, dmask: int) -> list[tuple[int, ...]]:
    domain_points = list(bits(dmask))
    out = []
    for p in system.points:
        if not (dmask >> p) & 1:
            out.append(())
            continue
        row = system.dist[system.map[p]]
        out.append(tuple(q for q in domain_points if row[q] <= delta))
    return out


def _image_fn(system):
    image_bit = [1 << t for t in system.map]

    def image(mask: int) -> int:
        out = 0
        while mask:
            low = mask & -mask
            out |= image_bit[low.bit_length() - 1]
            mask ^= low
        return out

    return image


def _shadow_masks(system, points, eps: Fraction, dmask: int) -> list[int]:
    balls = _ball_masks(system, eps, dmask)
    image = _image_fn(system)
    masks = [balls[points[0]]]
    for x in points[1:]:
        masks.append(image(masks[-1]) & balls[x])
    return masks


def _backtrack(system, masks: list[int]) -> int:
    chosen = min_bit(masks[-1])
    for mask in reversed(masks[:-1]):
        chosen = min(y for y in bits(mask) if system.map[y] == chosen)
    return chosen


def _asymp_masks(system, eps: Fraction, dmask: int) -> list[int]:
    """masks[p] holds every x merging exactly into p's orbit while staying
    within eps beforehand; least fixpoint over the deterministic pair map."""
    n = system.n
    fmap = system.map
    dist = system.dist
    points = list(bits(dmask))
    member = bytearray(n * n)
    queue = []
    for x in points:
        member[x * n + x] = 1
        queue.append(x * n + x)
    preds: dict[int, list[int]] = {}
    for x in points:
        row = dist[x]
        for p in points:
            if x != p and row[p] <= eps:
                preds.setdefault(fmap[x] * n + fmap[p], []).append(x * n + p)
    while queue:
        cur = queue.pop()
        for pre in preds.get(cur, ()):
            if not member[pre]:
                member[pre] = 1
                queue.append(pre)
    masks = [0] * n
    for x in points:
        base = x * n
        for p in points:
            if member[base + p]:
                masks[p] |= 1 << x
    return masks


def _explore(system, delta, eps, dmask, failing, state_cap, workers):
    """Level-synchronized BFS over determinized states.

    Returns (witness path | None, states explored). Frontier order is the
    lexicographic order of shortest realizing prefixes, and failing levels
    are resolved by taking the smallest reconstructed path, so the outcome
    is identical for every worker count.
    """
    balls = _ball_masks(system, eps, dmask)
    succ = _succ_in_domain(system, delta, dmask)
    image = _image_fn(system)

    visited: dict[tuple[int, int], tuple[int, int] | None] = {}
    level: list[tuple[int, int]] = []
    for p in bits(dmask):
        state = (p, balls[p])
        if state not in visited:
            visited[state] = None
            level.append(state)

    def expand(chunk):
        out = []
        for state in chunk:
            p, y = state
            iy = image(y)
            for q in succ[p]:
                out.append(((q, iy & balls[q]), state))
        return out

    while level:
        bad = [s for s in level if failing(*s)]
        if bad:
            return min(_path_to(visited, s) for s in bad), len(visited)
        if workers > 1 and len(level) > 1:
            chunks = _chunked(level, workers)
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                produced = list(pool.map(expand, chunks))
        else:
            produced = [expand(level)]
        nxt = []
        for batch in produced:
            for child, parent in batch:
                if child not in visited:
                    visited[child] = parent
                    nxt.append(child)
        if state_cap is not None and len(visited) > state_cap:
            raise Inconclusive(len(visited), state_cap)
        level = nxt
    return None, len(visited)


def _path_to(visited, state) -> tuple[int, ...]:
    points = []
    cur = state
    while cur is not None:
        points.append(cur[0])
        cur = visited[cur]
    return tuple(reversed(points))


def _chunked(items, pieces: int):
    pieces = max(1, min(pieces, len(items)))
    size, extra = divmod(len(items), pieces)
    out = []
    start = 0
    for i in range(pieces):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out
