"""Graph-based constraint placement.

Objects are placed one connected component at a time: the best-connected
object is put in its anchor region, then neighbors are placed breadth-first
on grid candidates that satisfy every relation to already placed objects
and collide with nothing. Objects that cannot be placed that way fall back
to the nearest free candidate of their region; if even that fails a bounded
depth-first search looks for any collision-free assignment.
"""

import logging
import math
from collections import deque
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from splatscene.config import LayoutConfig
from splatscene.errors import DomainError, InfeasibleLayoutError
from splatscene.gaussians.geometry import transform_box
from splatscene.layout.models import Layout, LayoutReport, ViolationKind
from splatscene.layout.regions import anchor_yaw, candidate_positions, within_bounds
from splatscene.layout.relations import (
    DIRECTIONAL,
    Placed,
    aabb_overlap,
    facing_yaw,
    placed_from,
    relation_holds,
)
from splatscene.layout.verify import vertical_pairs, verify_layout
from splatscene.models import (
    AffineTransform,
    AnchorRegion,
    Box3,
    Relation,
    Vec3,
    wrap_angle,
    yaw_towards,
)
from splatscene.planning.scene_spec import ConstraintGraph

log = logging.getLogger(__name__)


def scaling_factor(real_size: Vec3 | Sequence[float], model_box: Box3) -> float:
    """Largest uniform scale that keeps the model inside the real size on every axis."""
    extent = model_box.extent
    if np.any(extent <= 0):
        raise DomainError(f"model box has zero extent: {tuple(float(v) for v in extent)}")
    return float(np.min(np.asarray(real_size, dtype=np.float64) / extent))


def select_anchor_object(graph: ConstraintGraph, among: Iterable[str] | None = None) -> str:
    """Most connected node; CENTER anchors win ties, then the smaller id."""
    pool = list(among) if among is not None else list(graph.nodes)
    if not pool:
        raise DomainError("cannot select an anchor object from an empty graph")
    return min(
        pool,
        key=lambda n: (-graph.degree(n), graph.anchors[n] is not AnchorRegion.CENTER, n),
    )


def _distance_key(c: tuple[float, float], tx: float, ty: float) -> tuple[float, float, float]:
    return (round(math.hypot(c[0] - tx, c[1] - ty), 9), c[0], c[1])


class _Solver:
    def __init__(
        self,
        graph: ConstraintGraph,
        assets: Mapping[str, Box3],
        grid: float,
        seed: int,
        config: LayoutConfig,
    ):
        missing = [n for n in graph.nodes if n not in assets]
        if missing:
            raise DomainError(f"no model box for {missing}")
        self.graph = graph
        self.assets = assets
        self.scene = graph.scene
        self.seed = seed
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.scales = {
            n: scaling_factor(graph.instances[n].size, assets[n]) for n in graph.nodes
        }
        self.candidates = {
            n: candidate_positions(graph.anchors[n], self.scene, grid, config, n).positions
            for n in graph.nodes
        }
        self.exempt = vertical_pairs(graph)
        self.placements: dict[str, AffineTransform] = {}
        self.placed: dict[str, Placed] = {}

    # -- geometry ----------------------------------------------------------

    def _support(self, node: str) -> tuple[str, bool, float] | None:
        """Placed OVER/UNDER partner as (id, node_on_top, z of the shared face)."""
        for e in self.graph.incident(node):
            if not e.relation.vertical:
                continue
            other = e.object if e.subject == node else e.subject
            if other not in self.placed:
                continue
            box = self.placed[other].box
            on_top = (e.subject == node) == (e.relation is Relation.OVER)
            return other, on_top, box.max[2] if on_top else box.min[2]
        return None

    def _build(
        self, node: str, x: float, y: float, yaw: float, stack: bool
    ) -> tuple[AffineTransform, Placed]:
        s = self.scales[node]
        model_box = self.assets[node]
        base = transform_box(model_box, AffineTransform.from_yaw(yaw, s))
        cx, cy, _ = base.center
        tz = -base.min[2]
        support = self._support(node) if stack else None
        if support is not None:
            _, on_top, z = support
            tz = z - (base.min[2] if on_top else base.max[2])
        affine = AffineTransform.from_yaw(yaw, s, (x - float(cx), y - float(cy), tz))
        return affine, placed_from(affine, model_box)

    def _admissible(self, node: str, p: Placed, relations: bool, exempt_vertical: bool) -> bool:
        if not within_bounds(p.box, self.scene):
            return False
        for other, q in self.placed.items():
            if exempt_vertical and frozenset((node, other)) in self.exempt:
                continue
            if aabb_overlap(p.box, q.box, self.config.clearance):
                return False
        if relations:
            for e in self.graph.incident(node):
                other = e.object if e.subject == node else e.subject
                if other not in self.placed:
                    continue
                q = self.placed[other]
                sub, ref = (p, q) if e.subject == node else (q, p)
                if not relation_holds(e.relation, sub, ref, self.config):
                    return False
        return True

    def _commit(self, node: str, affine: AffineTransform, p: Placed) -> None:
        self.placements[node] = affine
        self.placed[node] = p

    def _release(self, node: str) -> None:
        del self.placements[node]
        del self.placed[node]

    def _ranked(self, node: str, tx: float, ty: float) -> list[tuple[float, float]]:
        return sorted(self.candidates[node], key=lambda c: _distance_key(c, tx, ty))

    # -- placement strategies ----------------------------------------------

    def place_anchor_only(self, node: str, diversify: bool = False) -> bool:
        region = self.graph.anchors[node]
        order = self._ranked(node, 0.0, 0.0)
        if diversify and order:
            start = int(self.rng.integers(len(order)))
            order = order[start:] + order[:start]
        for x, y in order:
            affine, p = self._build(node, x, y, anchor_yaw(region, x, y, self.scene), stack=True)
            if self._admissible(node, p, relations=True, exempt_vertical=True):
                self._commit(node, affine, p)
                log.debug("Anchored %s at (%.2f, %.2f)", node, x, y)
                return True
        return False

    def _relative_yaw(self, node: str, ref: str, x: float, y: float) -> float:
        q = self.placed[ref]
        for e in self.graph.between(node, ref):
            if e.relation is Relation.OPPOSITE:
                return wrap_angle(q.yaw + math.pi)
            if e.subject == node and e.relation is not Relation.NEXT:
                return q.yaw
            if e.object == node and e.relation in DIRECTIONAL:
                yaw = facing_yaw(e.relation, q.x - x, q.y - y)
                if yaw is not None:
                    return yaw
        return anchor_yaw(self.graph.anchors[node], x, y, self.scene)

    def try_place_relative(self, node: str, ref: str) -> bool:
        support = self._support(node)
        target = self.placed[support[0]] if support else self.placed[ref]
        for x, y in self._ranked(node, target.x, target.y):
            affine, p = self._build(node, x, y, self._relative_yaw(node, ref, x, y), stack=True)
            if self._admissible(node, p, relations=True, exempt_vertical=True):
                self._commit(node, affine, p)
                log.debug("Placed %s at (%.2f, %.2f) against %s", node, x, y, ref)
                return True
        return False

    def place_fallback(self, node: str) -> bool:
        for x, y in self._ranked(node, 0.0, 0.0):
            affine, p = self._build(node, x, y, yaw_towards(-x, -y), stack=False)
            if self._admissible(node, p, relations=False, exempt_vertical=False):
                self._commit(node, affine, p)
                log.info("Relations of %s deferred; placed at (%.2f, %.2f)", node, x, y)
                return True
        return False

    def repair(self) -> bool:
        """Depth-first search over anchor candidates, bounds and collisions only."""
        self.placements.clear()
        self.placed.clear()
        order = sorted(
            self.graph.nodes,
            key=lambda n: (len(self.candidates[n]), -self.graph.degree(n), n),
        )
        budget = self.config.repair_budget

        def dfs(k: int) -> bool:
            nonlocal budget
            if k == len(order):
                return True
            node = order[k]
            region = self.graph.anchors[node]
            for x, y in self._ranked(node, 0.0, 0.0):
                if budget <= 0:
                    return False
                budget -= 1
                yaw = anchor_yaw(region, x, y, self.scene)
                affine, p = self._build(node, x, y, yaw, stack=False)
                if self._admissible(node, p, relations=False, exempt_vertical=False):
                    self._commit(node, affine, p)
                    if dfs(k + 1):
                        return True
                    self._release(node)
            return False

        found = dfs(0)
        if not found and budget <= 0:
            log.warning("Layout repair ran out of budget (%d)", self.config.repair_budget)
        return found

    # -- driver -------------------------------------------------------------

    def solve(self) -> Layout:
        graph = self.graph
        failed: set[str] = set()
        while True:
            pool = [n for n in graph.nodes if n not in self.placed and n not in failed]
            if not pool:
                break
            root = select_anchor_object(graph, pool)
            diversify = self.config.diversify and not self.placed
            if not self.place_anchor_only(root, diversify=diversify):
                failed.add(root)
                continue
            queue = deque([root])
            while queue:
                i = queue.popleft()
                for j in sorted(graph.neighbors(i), key=lambda n: (-graph.degree(n), n)):
                    if j in self.placed:
                        continue
                    if self.try_place_relative(j, i):
                        failed.discard(j)
                        queue.append(j)
                    else:
                        failed.add(j)

        blocker = next(
            (n for n in graph.nodes if n not in self.placed and not self.place_fallback(n)),
            None,
        )
        if blocker is not None:
            log.warning("Greedy placement stuck at %s, searching exhaustively", blocker)
            if not self.repair():
                raise InfeasibleLayoutError(blocker, "no collision-free assignment found")

        layout = Layout(
            placements={n: self.placements[n] for n in graph.nodes},
            model_boxes={n: self.assets[n] for n in graph.nodes},
            scene=self.scene,
            seed=self.seed,
        )
        deferred = verify_layout(layout, graph, config=self.config).of_kind(ViolationKind.RELATION)
        if deferred:
            log.info("%d relation(s) deferred", len(deferred))
        return layout.model_copy(update={"report": LayoutReport(violations=deferred)})


def place_instance(
    layout: Layout,
    graph: ConstraintGraph,
    node: str,
    model_box: Box3,
    grid: float | None = None,
    config: LayoutConfig | None = None,
) -> AffineTransform:
    """Find a placement for one new node of ``graph`` around an existing layout.

    Existing placements stay fixed. The node is placed against its best
    connected placed neighbor, or anchor-only when it has none; if both fail
    it takes the nearest free candidate and its relations are left unsatisfied.
    """
    config = config or LayoutConfig()
    grid = grid if grid is not None else config.grid
    assets = {**layout.model_boxes, node: model_box}
    solver = _Solver(graph, assets, grid, layout.seed, config)
    for other, affine in layout.placements.items():
        if other != node and other in graph.instances:
            solver._commit(other, affine, placed_from(affine, assets[other]))

    neighbors = sorted(
        (n for n in graph.neighbors(node) if n in solver.placed),
        key=lambda n: (-graph.degree(n), n),
    )
    placed = any(solver.try_place_relative(node, ref) for ref in neighbors)
    if not placed and not neighbors:
        placed = solver.place_anchor_only(node)
    if not placed and not solver.place_fallback(node):
        raise InfeasibleLayoutError(node, "no free candidate in its anchor region")
    return solver.placements[node]


def solve_layout(
    graph: ConstraintGraph,
    assets: Mapping[str, Box3],
    grid: float | None = None,
    seed: int = 0,
    config: LayoutConfig | None = None,
) -> Layout:
    """Place every instance of the graph; deterministic in its arguments."""
    config = config or LayoutConfig()
    grid = grid if grid is not None else config.grid
    if grid <= 0:
        raise DomainError(f"grid spacing must be > 0, got {grid}")
    if not graph.nodes:
        raise DomainError("cannot lay out an empty graph")
    return _Solver(graph, assets, grid, seed, config).solve()
