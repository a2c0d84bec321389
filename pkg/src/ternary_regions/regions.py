"""Exact linear-region counting for piecewise-linear networks.

Regions are counted over a :class:`BoxDomain`.  The main engine walks the
ReLU units depth first, keeps only branches whose open cell meets the open
box (decided by an exact LP), then merges facet-adjacent cells that carry
the same affine map.  A cell is full-dimensional by construction; cells
that live only on a hyperplane are never produced.

Two maps are treated as one region only if their cells are connected
through shared (d-1)-dimensional facets; ``distinct_affine_count`` reports
the coarser count that ignores connectivity.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .lp import max_slack
from .netcore import (
    Activation,
    AffineMap,
    BoxDomain,
    DimensionError,
    NetError,
    Pattern,
    ReluNet,
    Vector,
    affine_map_for_pattern,
    compose,
    matmul,
    to_vector,
)

_ZERO = Fraction(0)

DEFAULT_MAX_NODES = 10**6
DEFAULT_MAX_CELLS = 10**5
DEFAULT_MAX_UNITS = 4096


class EmptyDomainError(NetError):
    pass


class RegionBudgetExceeded(RuntimeError):
    """Search stopped early; ``cells_found`` is a lower bound on the cell count."""

    def __init__(self, message: str, cells_found: int, nodes_visited: int):
        super().__init__(f"{message} (cells found so far: {cells_found}, nodes visited: {nodes_visited})")
        self.cells_found = cells_found
        self.nodes_visited = nodes_visited


@dataclass(frozen=True)
class Halfspace:
    """``normal . x + offset`` compared with zero using ``relation``."""

    normal: Vector
    offset: Fraction
    relation: str  # ">=" (unit active) or "<=" (unit inactive)

    def as_row(self) -> Tuple[Vector, Fraction]:
        """Scale-normalized ``(a, b)`` with the halfspace equal to ``a . x <= b``."""
        if self.relation == ">=":
            a, b = tuple(-v for v in self.normal), self.offset
        else:
            a, b = self.normal, -self.offset
        return _normalize(a, b)

    def holds(self, x: Sequence[Fraction], strict: bool = False) -> bool:
        v = sum((a * b for a, b in zip(self.normal, x)), self.offset)
        if self.relation == ">=":
            return v > 0 if strict else v >= 0
        return v < 0 if strict else v <= 0

    def to_json(self) -> dict:
        return {"normal": [str(v) for v in self.normal], "offset": str(self.offset),
                "relation": self.relation}


def _normalize(a: Sequence[Fraction], b: Fraction) -> Tuple[Vector, Fraction]:
    scale = max(abs(v) for v in a)
    if scale == 1:
        return tuple(a), b
    return tuple(v / scale for v in a), b / scale


@dataclass(frozen=True)
class RegionCell:
    pattern: Pattern
    halfspaces: Tuple[Halfspace, ...]
    affine: AffineMap
    witness: Vector
    # pattern index of the unit behind each halfspace; units whose
    # pre-activation is constant on the cell contribute no halfspace
    units: Tuple[int, ...] = ()

    def contains(self, x: Sequence[Fraction], strict: bool = False) -> bool:
        return all(h.holds(x, strict) for h in self.halfspaces)

    def to_json(self) -> dict:
        return {
            "pattern": "".join("1" if b else "0" for b in self.pattern),
            "halfspaces": [h.to_json() for h in self.halfspaces],
            "affine": self.affine.to_json(),
            "witness": [str(v) for v in self.witness],
        }


@dataclass(frozen=True)
class RegionReport:
    cell_count: int
    region_count: int
    distinct_affine_count: int
    domain: BoxDomain
    elapsed: float
    method: str = "exact"

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "cell_count": self.cell_count,
            "region_count": self.region_count,
            "distinct_affine_count": self.distinct_affine_count,
            "domain": self.domain.to_json(),
            "elapsed_ms": round(self.elapsed * 1000, 3),
        }


def _check_domain(net: ReluNet, domain: BoxDomain) -> None:
    if domain.dim != net.input_dim:
        raise DimensionError(f"domain has dimension {domain.dim}, net expects {net.input_dim}")
    if not domain.has_interior():
        raise EmptyDomainError("domain box has empty interior")


class _Search:
    """Depth-first walk over ReLU units; one instance per worker."""

    def __init__(self, net: ReluNet, domain: BoxDomain, max_nodes: int, max_cells: int,
                 split_depth: Optional[int] = None):
        self.layers = net.layers
        self.d = net.input_dim
        self.max_nodes = max_nodes
        self.max_cells = max_cells
        self.split_depth = split_depth
        self.cells: List[RegionCell] = []
        self.frontier: list = []
        self.nodes = 0

    def start(self, domain: BoxDomain):
        d = self.d
        eye = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
        rows = tuple(domain.halfspaces())
        w = max_slack(rows, d).point
        first = self.enter_layer(0, eye, (_ZERO,) * d, (), (), (), rows, w)
        if first is not None:
            self.run(first)

    def enter_layer(self, li, A, b, bits, hs, units, rows, w):
        """Push the partial cell through identity layers.

        Returns the search state at the first unit of the next ReLU layer,
        or None once the cell is complete.
        """
        while True:
            layer = self.layers[li]
            P = matmul(layer.weights, A, layer.in_dim, self.d)
            o = layer.affine(b)
            if li == len(self.layers) - 1:
                if len(self.cells) >= self.max_cells:
                    raise RegionBudgetExceeded("cell budget exceeded", len(self.cells), self.nodes)
                self.cells.append(RegionCell(bits, hs, AffineMap(P, o), w, units))
                return None
            if layer.activation is Activation.RELU:
                return (li, P, o, 0, bits, hs, units, rows, w)
            li, A, b = li + 1, P, o

    def run(self, state):
        # explicit stack: wide layers would exhaust Python's recursion limit
        stack = [state]
        while stack:
            st = stack.pop()
            li, P, o, u, bits, hs, units, rows, w = st
            if u == len(P):
                on = bits[len(bits) - len(P):]
                zero = (_ZERO,) * self.d
                A = tuple(r if a else zero for r, a in zip(P, on))
                b = tuple(v if a else _ZERO for v, a in zip(o, on))
                nxt = self.enter_layer(li + 1, A, b, bits, hs, units, rows, w)
                if nxt is not None:
                    stack.append(nxt)
                continue
            if self.split_depth is not None and len(bits) == self.split_depth:
                self.frontier.append(st)
                continue
            self.nodes += 1
            if self.nodes > self.max_nodes:
                raise RegionBudgetExceeded("node budget exceeded", len(self.cells), self.nodes)

            normal, off = P[u], o[u]
            if not any(normal):
                # constant over the cell; zero means the unit is dead here
                stack.append((li, P, o, u + 1, bits + (off > 0,), hs, units, rows, w))
                continue
            val = sum((a * x for a, x in zip(normal, w) if a), off)
            children = []
            for active in (True, False):
                h = Halfspace(normal, off, ">=" if active else "<=")
                row = h.as_row()
                if val != 0 and (val > 0) == active:
                    wit = w
                else:
                    res = max_slack(rows + (row,), self.d)
                    if not res.interior:
                        continue
                    wit = res.point
                children.append((li, P, o, u + 1, bits + (active,), hs + (h,),
                                 units + (len(bits),), rows + (row,), wit))
            # active branch is explored first
            stack.extend(reversed(children))


def _dfs_order(cell: RegionCell):
    return tuple(not b for b in cell.pattern)


def _resume(args):
    net, domain, max_nodes, max_cells, state = args
    s = _Search(net, domain, max_nodes, max_cells)
    s.run(state)
    return s.cells, s.nodes


def enumerate_cells(net: ReluNet, domain: BoxDomain, *, max_nodes: int = DEFAULT_MAX_NODES,
                    max_cells: int = DEFAULT_MAX_CELLS, max_units: int = DEFAULT_MAX_UNITS,
                    workers: int = 1) -> List[RegionCell]:
    """All full-dimensional activation cells of ``net`` inside ``domain``.

    Cells come out in lexicographic pattern order (active before inactive),
    independent of ``workers``.
    """
    _check_domain(net, domain)
    if net.relu_units > max_units:
        raise RegionBudgetExceeded(
            f"net has {net.relu_units} ReLU units, budget is {max_units}", 0, 0)
    if workers <= 1 or net.relu_units < 4:
        s = _Search(net, domain, max_nodes, max_cells)
        s.start(domain)
        return sorted(s.cells, key=_dfs_order)

    split = min(net.relu_units, max(2, workers.bit_length() + 2))
    s = _Search(net, domain, max_nodes, max_cells, split_depth=split)
    s.start(domain)
    cells = list(s.cells)
    nodes = s.nodes
    jobs = [(net, domain, max_nodes, max_cells, st) for st in s.frontier]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, which is DFS order
        for sub_cells, sub_nodes in pool.map(_resume, jobs):
            cells.extend(sub_cells)
            nodes += sub_nodes
    if nodes > max_nodes:
        raise RegionBudgetExceeded("node budget exceeded", len(cells), nodes)
    if len(cells) > max_cells:
        raise RegionBudgetExceeded("cell budget exceeded", len(cells), nodes)
    cells.sort(key=_dfs_order)
    return cells


def _cell_rows(cell: RegionCell):
    return [h.as_row() for h in cell.halfspaces]


def _facet_test(rows1, rows2, box, hyperplane, d) -> bool:
    a, b = hyperplane
    neg = (tuple(-v for v in a), -b)
    others = tuple(r for r in rows1 + rows2 + box if r != hyperplane and r != neg)
    return max_slack(others, d, equality=hyperplane).interior


def cells_adjacent(c1: RegionCell, c2: RegionCell, domain: BoxDomain) -> bool:
    """True if the closures of two cells share a (d-1)-dimensional facet.

    Both cells agree on every unit before their first differing bit, so
    they sit on opposite sides of that unit's hyperplane and any common
    facet lies in it.  Only that hyperplane is tested.
    """
    d = domain.dim
    rows1, rows2 = _cell_rows(c1), _cell_rows(c2)
    box = domain.halfspaces()
    first = next((i for i, (x, y) in enumerate(zip(c1.pattern, c2.pattern)) if x != y), None)
    if first is not None and first in c1.units:
        return _facet_test(rows1, rows2, box, rows1[c1.units.index(first)], d)
    # cells built by hand without unit bookkeeping: try every opposed pair
    opposite = {(tuple(-v for v in a), -b) for a, b in rows2}
    for hyperplane in dict.fromkeys(r for r in rows1 if r in opposite):
        if _facet_test(rows1, rows2, box, hyperplane, d):
            return True
    return False


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def merge_cells(cells: Sequence[RegionCell], domain: BoxDomain) -> List[List[int]]:
    """Group cell indices into maximal linear regions.

    Only cells with identical affine maps can merge, so adjacency is tested
    inside each such group.
    """
    groups: Dict[AffineMap, List[int]] = {}
    for i, c in enumerate(cells):
        groups.setdefault(c.affine, []).append(i)
    uf = _UnionFind(len(cells))
    for members in groups.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = members[x], members[y]
                if uf.find(i) != uf.find(j) and cells_adjacent(cells[i], cells[j], domain):
                    uf.union(i, j)
    comps: Dict[int, List[int]] = {}
    for i in range(len(cells)):
        comps.setdefault(uf.find(i), []).append(i)
    return sorted(comps.values())


def count_regions_exact(net: ReluNet, domain: BoxDomain, **kwargs) -> RegionReport:
    t0 = time.perf_counter()
    cells = enumerate_cells(net, domain, **kwargs)
    regions = merge_cells(cells, domain)
    distinct = len({c.affine for c in cells})
    return RegionReport(len(cells), len(regions), distinct, domain,
                        time.perf_counter() - t0, "exact")


# ---------------------------------------------------------------------------
# 1-D breakpoint propagation


@dataclass(frozen=True)
class Segment:
    left: Fraction
    right: Fraction
    slope: Vector
    intercept: Vector

    def at(self, x: Fraction) -> Vector:
        return tuple(s * x + c for s, c in zip(self.slope, self.intercept))


def _affine_layer(layer, slope, intercept):
    ws = tuple(sum((w * s for w, s in zip(row, slope) if w), _ZERO) for row in layer.weights)
    wc = tuple(sum((w * c for w, c in zip(row, intercept) if w), bias)
               for row, bias in zip(layer.weights, layer.bias))
    return ws, wc


def propagate_1d(net: ReluNet, lo: Fraction, hi: Fraction) -> List[Segment]:
    """Unmerged pieces of a 1-input net on ``[lo, hi]``.

    Breakpoints are inserted wherever some ReLU pre-activation changes sign
    strictly inside a piece.
    """
    segs = [Segment(lo, hi, (Fraction(1),), (_ZERO,))]
    for layer in net.layers:
        nxt = []
        for seg in segs:
            ws, wc = _affine_layer(layer, seg.slope, seg.intercept)
            if layer.activation is Activation.IDENTITY:
                nxt.append(Segment(seg.left, seg.right, ws, wc))
                continue
            cuts = {seg.left, seg.right}
            for s, c in zip(ws, wc):
                if s:
                    t = -c / s
                    if seg.left < t < seg.right:
                        cuts.add(t)
            pts = sorted(cuts)
            for l, r in zip(pts, pts[1:]):
                mid = (l + r) / 2
                on = [s * mid + c > 0 for s, c in zip(ws, wc)]
                nxt.append(Segment(
                    l, r,
                    tuple(s if a else _ZERO for s, a in zip(ws, on)),
                    tuple(c if a else _ZERO for c, a in zip(wc, on)),
                ))
        segs = nxt
    return segs


def merge_segments(segs: Sequence[Segment]) -> List[Segment]:
    out: List[Segment] = []
    for seg in segs:
        if out and out[-1].slope == seg.slope and out[-1].intercept == seg.intercept:
            out[-1] = Segment(out[-1].left, seg.right, seg.slope, seg.intercept)
        else:
            out.append(seg)
    return out


def _interval(net: ReluNet, interval: BoxDomain) -> Tuple[Fraction, Fraction]:
    if net.input_dim != 1 or interval.dim != 1:
        raise DimensionError("the 1-D oracle needs a 1-input net and a 1-D interval")
    if not interval.bounded:
        raise EmptyDomainError("the 1-D oracle needs a bounded interval")
    lo, hi = interval.lower[0], interval.upper[0]
    if not lo < hi:
        raise EmptyDomainError("interval has empty interior")
    return lo, hi


def count_regions_1d(net: ReluNet, interval: BoxDomain) -> RegionReport:
    t0 = time.perf_counter()
    lo, hi = _interval(net, interval)
    raw = propagate_1d(net, lo, hi)
    merged = merge_segments(raw)
    distinct = len({(s.slope, s.intercept) for s in merged})
    return RegionReport(len(raw), len(merged), distinct, interval,
                        time.perf_counter() - t0, "oracle1d")


def breakpoints_1d(net: ReluNet, interval: BoxDomain) -> List[Fraction]:
    """Interior points where the function changes affine piece."""
    lo, hi = _interval(net, interval)
    return [s.left for s in merge_segments(propagate_1d(net, lo, hi))[1:]]


# ---------------------------------------------------------------------------
# sampling estimate


MAX_GRID_POINTS = 10**6


def pattern_at(net: ReluNet, x: Sequence) -> Pattern:
    """Activation pattern of the cell entered from ``x`` along ``eps*e1 + eps^2*e2 + ...``.

    Unlike the plain forward pass this never reports a pattern that only
    exists on a hyperplane, so the result always names a full-dimensional
    cell whose closure contains ``x``.
    """
    x = to_vector(x)
    d = net.input_dim
    h = x
    J = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    bits = []
    for layer in net.layers:
        z = layer.affine(h)
        G = matmul(layer.weights, J, layer.in_dim, d)
        if layer.activation is Activation.RELU:
            on = []
            for v, g in zip(z, G):
                key = next((t for t in (v,) + g if t != 0), _ZERO)
                on.append(key > 0)
            bits.extend(on)
            zero = (_ZERO,) * d
            h = tuple(v if a else _ZERO for v, a in zip(z, on))
            J = tuple(g if a else zero for g, a in zip(G, on))
        else:
            h, J = z, G
    return tuple(bits)


def grid_points(domain: BoxDomain, resolution: int):
    """Cell-centred lattice: ``resolution`` points per axis, all interior."""
    import itertools

    axes = []
    for lo, hi in zip(domain.lower, domain.upper):
        step = (hi - lo) / resolution
        axes.append([lo + step * (k + Fraction(1, 2)) for k in range(resolution)])
    return itertools.product(*axes)


def estimate_regions_grid(net: ReluNet, domain: BoxDomain, resolution: int) -> int:
    """Number of distinct affine maps seen on a lattice; a lower bound."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    _check_domain(net, domain)
    if not domain.bounded:
        raise EmptyDomainError("grid estimate needs a bounded domain")
    if resolution ** domain.dim > MAX_GRID_POINTS:
        raise ValueError(f"{resolution}^{domain.dim} lattice points exceed {MAX_GRID_POINTS}")
    patterns = {pattern_at(net, p) for p in grid_points(domain, resolution)}
    return len({affine_map_for_pattern(net, p) for p in patterns})


# ---------------------------------------------------------------------------
# composition lemma


@dataclass(frozen=True)
class CompositionVerdict:
    inner_count: int
    outer_count: Optional[int]
    composite_count: int
    precondition: str  # "met", "unmet" or "unchecked"
    holds: Optional[bool]
    detail: str = ""

    @property
    def counts(self):
        return (self.inner_count, self.outer_count, self.composite_count)

    def to_json(self) -> dict:
        return {"inner_count": self.inner_count, "outer_count": self.outer_count,
                "composite_count": self.composite_count, "precondition": self.precondition,
                "holds": self.holds, "detail": self.detail}


def range_1d(net: ReluNet, interval: BoxDomain) -> BoxDomain:
    lo, hi = _interval(net, interval)
    vals = []
    for s in propagate_1d(net, lo, hi):
        vals += [s.at(s.left)[0], s.at(s.right)[0]]
    return BoxDomain.interval(min(vals), max(vals))


def check_composition_lemma(g: ReluNet, f: ReluNet, domain: BoxDomain,
                            f_domain: Optional[BoxDomain] = None) -> CompositionVerdict:
    """Check ``|L(f o g)| = |L(f)| |L(g)|`` when every piece of ``g`` is a bijection onto f's domain.

    For 1-D nets the bijection precondition is verified piece by piece and
    f's domain defaults to the exact range of ``g``.  In higher dimension the
    caller must pass ``f_domain`` and the precondition is left unchecked.
    """
    if f.input_dim != g.output_dim:
        raise DimensionError(f"f takes {f.input_dim} inputs but g produces {g.output_dim}")
    inner = count_regions_exact(g, domain).region_count
    composite = count_regions_exact(compose(f, g), domain).region_count

    if g.input_dim == 1 and g.output_dim == 1:
        rng = range_1d(g, domain)
        if f_domain is None:
            f_domain = rng
        lo2, hi2 = f_domain.lower[0], f_domain.upper[0]
        lo, hi = _interval(g, domain)
        problems = []
        if (rng.lower[0], rng.upper[0]) != (lo2, hi2):
            problems.append(f"range of g is [{rng.lower[0]}, {rng.upper[0]}], not f's domain")
        for seg in merge_segments(propagate_1d(g, lo, hi)):
            ends = {seg.at(seg.left)[0], seg.at(seg.right)[0]}
            if seg.slope[0] == 0:
                problems.append(f"g is constant on [{seg.left}, {seg.right}]")
            elif ends != {lo2, hi2}:
                problems.append(f"g maps [{seg.left}, {seg.right}] onto [{min(ends)}, {max(ends)}]")
        precondition = "unmet" if problems else "met"
        detail = "; ".join(problems)
    else:
        if f_domain is None:
            raise ValueError("f_domain is required when g is not 1-D")
        precondition, detail = "unchecked", "bijection precondition only verified for 1-D g"

    outer = count_regions_exact(f, f_domain).region_count if f_domain.has_interior() else None
    holds = None
    if precondition != "unmet" and outer is not None:
        holds = composite == outer * inner
    return CompositionVerdict(inner, outer, composite, precondition, holds, detail)
