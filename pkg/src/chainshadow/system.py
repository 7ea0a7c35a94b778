"""Finite metric dynamical systems.

A system is a finite point set 0..n-1 carrying an exact rational metric
table and a total self-map. This module validates explicit descriptions,
generates the built-in corpus, and discretizes circle/interval maps onto
uniform grids. Every comparison downstream (``d <= delta`` and friends)
is exact, so systems built here never depend on float rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import BadParams, InvalidSystem, UnknownGenerator, Violation
from .rational import format_rational, parse_rational

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)

_MAX_VIOLATIONS = 50
_MAX_CANTOR_DEPTH = 10


@dataclass(frozen=True)
class FiniteMetricSystem:
    """Points 0..n-1 with an exact metric table and a total self-map.

    ``quantization`` is a resolution floor recorded by grid discretization;
    it is informational only and never enforced.
    """

    n: int
    dist: tuple[tuple[Fraction, ...], ...]
    map: tuple[int, ...]
    invertible: bool = False
    quantization: Fraction | None = None

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]

    @property
    def points(self) -> range:
        return range(self.n)

    def orbit(self, x: int, length: int) -> tuple[int, ...]:
        """First ``length`` points of the forward orbit of ``x``."""
        out = []
        for _ in range(length):
            out.append(x)
            x = self.map[x]
        return tuple(out)

    @cached_property
    def diameter(self) -> Fraction:
        return max((v for row in self.dist for v in row), default=_ZERO)

    @cached_property
    def distance_values(self) -> tuple[Fraction, ...]:
        """Distinct positive distances, ascending."""
        values = {self.dist[i][j] for i in self.points for j in range(i)}
        return tuple(sorted(values))

    @cached_property
    def min_gap(self) -> Fraction | None:
        values = self.distance_values
        return values[0] if values else None

    @cached_property
    def functional_threshold(self) -> Fraction | None:
        """Smallest positive value of d(f(p), q) over q != f(p).

        Below this resolution a delta graph carries only the exact edges
        p -> f(p), so refining delta further cannot change anything.
        None for a one-point system.
        """
        best = None
        for p in self.points:
            row = self.dist[self.map[p]]
            for q in self.points:
                if q != self.map[p] and (best is None or row[q] < best):
                    best = row[q]
        return best

    def to_spec(self) -> dict:
        """Explicit JSON-ready description (rationals as strings)."""
        return {
            "n": self.n,
            "dist": [[format_rational(v) for v in row] for row in self.dist],
            "map": list(self.map),
            "invertible": self.invertible,
        }


def metric_violations(dist, fmap, invertible: bool) -> list[Violation]:
    """Collect violated axioms (capped at a readable number of entries)."""
    n = len(dist)
    out: list[Violation] = []

    def add(kind, *indices):
        if len(out) < _MAX_VIOLATIONS:
            out.append(Violation(kind, tuple(indices)))

    for i in range(n):
        if dist[i][i] != 0:
            add("identity", i, i)
        for j in range(i):
            if dist[i][j] <= 0:
                add("positivity", i, j)
            if dist[i][j] != dist[j][i]:
                add("symmetry", i, j)
    for i in range(n):
        for j in range(n):
            dij = dist[i][j]
            row_j = dist[j]
            for k in range(n):
                if dist[i][k] > dij + row_j[k]:
                    add("triangle", i, j, k)
    total = True
    for i, target in enumerate(fmap):
        if not isinstance(target, int) or isinstance(target, bool) or not 0 <= target < n:
            add("map_not_total", i)
            total = False
    if total and invertible and len(set(fmap)) != n:
        add("not_bijective")
    return out


def make_system(dist_rows, fmap, invertible=False, quantization=None) -> FiniteMetricSystem:
    """Build a system from raw rows, validating every axiom exactly."""
    dist = tuple(tuple(parse_rational(v) for v in row) for row in dist_rows)
    n = len(dist)
    if n < 1:
        raise BadParams("a system needs at least one point")
    if any(len(row) != n for row in dist):
        raise BadParams("dist must be a square table")
    fmap = tuple(fmap)
    if len(fmap) != n:
        raise BadParams(f"map must list {n} image indices")
    violations = metric_violations(dist, fmap, bool(invertible))
    if violations:
        raise InvalidSystem(violations)
    if quantization is not None:
        quantization = parse_rational(quantization)
    return FiniteMetricSystem(n, dist, fmap, bool(invertible), quantization)


def validate_system(spec) -> FiniteMetricSystem:
    """Validate a system description.

    Accepts either an explicit record {"n", "dist", "map", "invertible"} or
    a generator reference {"generator": name, "params": {...}}. Raises
    InvalidSystem with the full list of violated axioms, or BadParams for
    structural problems.
    """
    if isinstance(spec, FiniteMetricSystem):
        spec = spec.to_spec()
    if not isinstance(spec, dict):
        raise BadParams("system spec must be a mapping")
    if "generator" in spec:
        return build_corpus_system(spec["generator"], spec.get("params", {}))
    missing = {"n", "dist", "map"} - spec.keys()
    if missing:
        raise BadParams(f"system spec missing keys: {sorted(missing)}")
    system = make_system(spec["dist"], spec["map"], spec.get("invertible", False))
    if system.n != spec["n"]:
        raise BadParams(f"declared n={spec['n']} but dist has {system.n} rows")
    return system


def system_from_json(text: str) -> FiniteMetricSystem:
    return validate_system(json.loads(text))


def load_system(path) -> FiniteMetricSystem:
    with open(path, "r", encoding="utf-8") as handle:
        return validate_system(json.load(handle))


def shortest_path_metric(n: int, edges) -> list[list[Fraction]]:
    """All-pairs shortest-path completion of symmetric positive edge weights.

    The result satisfies the triangle inequality by construction. Raises
    BadParams for nonpositive weights or a disconnected graph.
    """
    if n < 1:
        raise BadParams("need at least one point")
    dist: list[list[Fraction | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = _ZERO
    for i, j, w in edges:
        w = parse_rational(w)
        if w <= 0:
            raise BadParams(f"edge weight must be positive, got {w}")
        if i == j:
            raise BadParams("self edges are not allowed")
        if dist[i][j] is None or w < dist[i][j]:
            dist[i][j] = dist[j][i] = w
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik is None:
                continue
            for j in range(n):
                dkj = dist[k][j]
                if dkj is None:
                    continue
                via = dik + dkj
                if dist[i][j] is None or via < dist[i][j]:
                    dist[i][j] = dist[j][i] = via
    if any(v is None for row in dist for v in row):
        raise BadParams("edge graph is disconnected; metric would be infinite")
    return [list(row) for row in dist]  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# grid discretization


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


_GEOMETRIES = ("interval", "circle")
_FORMULAS = ("identity", "doubling", "tent", "rotation")


@dataclass(frozen=True)
class GridSystem1D:
    """Uniform grid of cell centers on [0,1] or on the unit circle.

    The named formula is evaluated exactly on rational inputs; the derived
    finite map sends each center to the nearest center of its image, ties
    broken toward the smaller index.
    """

    cells: int
    geometry: str
    formula: str
    params: tuple[Fraction, ...] = ()
    quantization: Fraction | None = None

    def __post_init__(self):
        if self.cells < 1:
            raise BadParams("grid needs at least one cell")
        if self.geometry not in _GEOMETRIES:
            raise BadParams(f"unknown geometry {self.geometry!r}")
        if self.formula not in _FORMULAS:
            raise BadParams(f"unknown formula {self.formula!r}")
        if self.formula == "rotation" and len(self.params) != 1:
            raise BadParams("rotation needs exactly one angle parameter")
        if self.quantization is not None and self.quantization < self.half_cell:
            raise BadParams("quantization bound below half the cell width")

    @property
    def half_cell(self) -> Fraction:
        return Fraction(1, 2 * self.cells)

    @cached_property
    def centers(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(2 * i + 1, 2 * self.cells) for i in range(self.cells))

    def metric(self, x: Fraction, y: Fraction) -> Fraction:
        gap = abs(x - y)
        if self.geometry == "circle":
            return min(gap, _ONE - gap)
        return gap

    def apply(self, x: Fraction) -> Fraction:
        if self.formula == "identity":
            return x
        if self.formula == "doubling":
            return _mod1(2 * x)
        if self.formula == "tent":
            return 2 * x if x <= _HALF else 2 - 2 * x
        return _mod1(x + self.params[0])


def discretize(grid: GridSystem1D) -> FiniteMetricSystem:
    """Round the grid's source map to nearest centers and tabulate the metric."""
    centers = grid.centers
    fmap = []
    for c in centers:
        image = grid.apply(c)
        best = 0
        best_d = grid.metric(image, centers[0])
        for j in range(1, grid.cells):
            dj = grid.metric(image, centers[j])
            if dj < best_d:  # strict: ties keep the smaller index
                best, best_d = j, dj
        fmap.append(best)
    dist = tuple(
        tuple(grid.metric(a, b) for b in centers) for a in centers
    )
    return FiniteMetricSystem(
        n=grid.cells,
        dist=dist,
        map=tuple(fmap),
        invertible=len(set(fmap)) == grid.cells,
        quantization=grid.quantization or grid.half_cell,
    )


# ---------------------------------------------------------------------------
# built-in generators


def cantor_identity(depth: int) -> FiniteMetricSystem:
    """Identity map on the 2**depth left endpoints of the level-``depth``
    middle-thirds construction, with the line metric |x - y|."""
    _require_int("depth", depth, 0, _MAX_CANTOR_DEPTH)
    points = [Fraction(0)]
    for level in range(1, depth + 1):
        step = Fraction(2, 3**level)
        points = sorted(x + off for x in points for off in (_ZERO, step))
    dist = tuple(tuple(abs(a - b) for b in points) for a in points)
    n = len(points)
    return FiniteMetricSystem(n, dist, tuple(range(n)), invertible=True)


def rotation(n: int, k: int) -> FiniteMetricSystem:
    """Rigid rotation p -> p + k on n equally spaced circle points."""
    _require_int("n", n, 1, 4096)
    if not isinstance(k, int) or isinstance(k, bool):
        raise BadParams("rotation step k must be an integer")
    dist = tuple(
        tuple(Fraction(min(abs(i - j), n - abs(i - j)), n) for j in range(n))
        for i in range(n)
    )
    fmap = tuple((i + k) % n for i in range(n))
    return FiniteMetricSystem(n, dist, fmap, invertible=True)


def north_south(n: int) -> FiniteMetricSystem:
    """Source/sink flow on a circle.

    One fixed source at angle 0 and one fixed sink at angle 1/2; the other
    n-2 points march stepwise toward the sink along their arc. Spacing is
    chosen so that, at resolutions between the source's escape gap and one
    step, the chain structure is exactly two classes: the source (initial)
    and the sink (terminal).
    """
    _require_int("n", n, 3, 4096)
    interior = n - 2
    side_a = (interior + 1) // 2
    side_b = interior // 2
    gap = Fraction(1, 8 * (side_a + 1))
    step_a = (_HALF - gap) / side_a
    positions = [_ZERO]
    positions += [gap + (j - 1) * step_a for j in range(1, side_a + 1)]
    positions.append(_HALF)
    if side_b:
        step_b = (_HALF - gap) / side_b
        positions += [_ONE - gap - (j - 1) * step_b for j in range(1, side_b + 1)]
    sink = side_a + 1
    fmap = [0]
    fmap += [j + 1 for j in range(1, side_a + 1)]  # last A step lands on the sink
    fmap.append(sink)
    for j in range(1, side_b + 1):
        fmap.append(sink if j == side_b else sink + j + 1)
    dist = tuple(
        tuple(min(abs(a - b), _ONE - abs(a - b)) for b in positions) for a in positions
    )
    return FiniteMetricSystem(n, dist, tuple(fmap), invertible=False)


def parallel_cycles() -> FiniteMetricSystem:
    """Five points: two parallel 2-cycles plus one transient feeding them.

    Points are a=0, c1=1, c2=2, e1=3, e2=4 with map [2, 2, 1, 4, 3]; the
    c-cycle and e-cycle run side by side at distance 1 while everything
    else sits 4 apart (a is 1 from c1 and 2 from e1).
    """
    d = {
        (0, 1): 1, (0, 2): 4, (0, 3): 2, (0, 4): 4,
        (1, 2): 4, (1, 3): 1, (1, 4): 4,
        (2, 3): 4, (2, 4): 1,
        (3, 4): 4,
    }
    dist = tuple(
        tuple(
            Fraction(0) if i == j else Fraction(d[(min(i, j), max(i, j))])
            for j in range(5)
        )
        for i in range(5)
    )
    return FiniteMetricSystem(5, dist, (2, 2, 1, 4, 3), invertible=False)


def doubling(cells: int) -> FiniteMetricSystem:
    """Angle doubling on the circle, discretized to ``cells`` centers."""
    _require_int("cells", cells, 1, 4096)
    return discretize(GridSystem1D(cells, "circle", "doubling"))


def tent(cells: int) -> FiniteMetricSystem:
    """Tent map on the unit interval, discretized to ``cells`` centers."""
    _require_int("cells", cells, 1, 4096)
    return discretize(GridSystem1D(cells, "interval", "tent"))


def far_two_cycles() -> FiniteMetricSystem:
    """Two 2-cycles of internal distance 1 separated by distance 4."""
    rows = [
        [0, 1, 4, 4],
        [1, 0, 4, 4],
        [4, 4, 0, 1],
        [4, 4, 1, 0],
    ]
    return make_system(rows, (1, 0, 3, 2), invertible=True)


def _require_int(name: str, value, lo: int, hi: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise BadParams(f"{name} must be an integer")
    if not lo <= value <= hi:
        raise BadParams(f"{name} must be in [{lo}, {hi}], got {value}")


_GENERATORS = {
    "rotation": (("n", "k"), rotation),
    "cantor-identity": (("depth",), cantor_identity),
    "north-south": (("n",), north_south),
    "parallel-cycles": ((), parallel_cycles),
    "doubling": (("cells",), doubling),
    "tent": (("cells",), tent),
}


def generator_names() -> tuple[str, ...]:
    return tuple(sorted(_GENERATORS))


def build_corpus_system(name: str, params=()) -> FiniteMetricSystem:
    """Instantiate a named generator with positional or keyword params."""
    if name not in _GENERATORS:
        raise UnknownGenerator(f"unknown generator {name!r}; known: {', '.join(generator_names())}")
    param_names, fn = _GENERATORS[name]
    if isinstance(params, dict):
        unknown = set(params) - set(param_names)
        if unknown:
            raise BadParams(f"{name}: unknown params {sorted(unknown)}")
        missing = [p for p in param_names if p not in params]
        if missing:
            raise BadParams(f"{name}: missing params {missing}")
        args = [params[p] for p in param_names]
    else:
        args = list(params)
        if len(args) != len(param_names):
            raise BadParams(
                f"{name} takes {len(param_names)} params ({', '.join(param_names) or 'none'})"
            )
    return fn(*(_coerce_int(a) for a in args))


def _coerce_int(value):
    if isinstance(value, str):
        try:
            return int(value, 10)
        except ValueError as exc:
            raise BadParams(f"expected an integer, got {value!r}") from exc
    return value


def parse_generator_string(text: str) -> FiniteMetricSystem:
    """Build from shorthand ``name:arg1:arg2`` (e.g. ``rotation:4:1``)."""
    name, *args = text.split(":")
    return build_corpus_system(name, args)


def standard_corpus() -> tuple[tuple[str, FiniteMetricSystem], ...]:
    """The built-in corpus used by the verification harness and tests."""
    return (
        ("cantor-identity:1", cantor_identity(1)),
        ("cantor-identity:2", cantor_identity(2)),
        ("cantor-identity:3", cantor_identity(3)),
        ("rotation:4:1", rotation(4, 1)),
        ("rotation:6:2", rotation(6, 2)),
        ("north-south:6", north_south(6)),
        ("parallel-cycles", parallel_cycles()),
        ("doubling:6", doubling(6)),
        ("tent:6", tent(6)),
        ("far-two-cycles", far_two_cycles()),
    )
