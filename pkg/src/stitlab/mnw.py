"""Event-driven cell-division construction of Y(t, W).

Each live cell carries an exponential lifetime with rate Lambda([cell]),
assigned at birth (memorylessness makes this equivalent to re-drawing after
every event).  When a cell dies before t_end it is split by a hyperplane
drawn from Lambda(. )/Lambda([cell]); the separating facet is recorded with
its birth time.  A heap keyed by absolute death time drives the recursion.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ConvexPolytope,
    DegenerateSplit,
    FacetPolygon,
    Hyperplane,
    NoIntersection,
    split_polytope,
)
from .measures import HyperplaneMeasureSpec, measure_hitting, sample_hitting

MAX_CELLS_DEFAULT = 10**7
_MAX_RESAMPLE = 1000


class CellBudgetExceeded(RuntimeError):
    pass


@dataclass
class CellRecord:
    polytope: ConvexPolytope
    birth_time: float
    death_time: float  # +inf when still alive at t_end
    cell_id: int = -1


@dataclass
class IFacetRecord:
    facet: FacetPolygon
    birth_time: float
    carrier: Hyperplane
    parent_cell_id: int


@dataclass
class Tessellation:
    window: ConvexPolytope
    t_end: float
    cells: list  # final (alive) CellRecords
    i_facets: list
    checkpoint_totals: dict = field(default_factory=dict)

    def total_surface(self) -> float:
        return float(sum(f.facet.area for f in self.i_facets))

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.window.d,
            "t_end": self.t_end,
            "window": {
                "vertices": self.window.vertices.tolist(),
                "faces": [list(f) for f in self.window.faces]
                if self.window.faces is not None
                else None,
            },
            "cells": [
                {
                    "vertices": c.polytope.vertices.tolist(),
                    "faces": [list(f) for f in c.polytope.faces]
                    if c.polytope.faces is not None
                    else None,
                    "birth_time": c.birth_time,
                }
                for c in self.cells
            ],
            "i_facets": [
                {
                    "vertices": f.facet.vertices.tolist(),
                    "birth_time": f.birth_time,
                    "normal": list(f.carrier.normal),
                    "offset": f.carrier.offset,
                    "area": f.facet.area,
                }
                for f in self.i_facets
            ],
            "checkpoint_totals": {
                repr(k): v for k, v in sorted(self.checkpoint_totals.items())
            },
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, **kw)

    @staticmethod
    def from_json_dict(obj: dict) -> "Tessellation":
        d = obj["dimension"]

        def poly(rec):
            faces = rec.get("faces")
            return ConvexPolytope(
                np.array(rec["vertices"]),
                [tuple(f) for f in faces] if faces is not None else None,
            )

        cells = [
            CellRecord(poly(c), c.get("birth_time", 0.0), math.inf, i)
            for i, c in enumerate(obj["cells"])
        ]
        facets = [
            IFacetRecord(
                FacetPolygon(
                    d,
                    np.array(f["vertices"]),
                    Hyperplane(tuple(f["normal"]), f["offset"]),
                    area=f.get("area"),
                ),
                f["birth_time"],
                Hyperplane(tuple(f["normal"]), f["offset"]),
                -1,
            )
            for f in obj["i_facets"]
        ]
        return Tessellation(
            poly(obj["window"]),
            obj["t_end"],
            cells,
            facets,
            {float(k): v for k, v in obj.get("checkpoint_totals", {}).items()},
        )


def run(
    spec: HyperplaneMeasureSpec,
    t_end: float,
    W: ConvexPolytope,
    rng: np.random.Generator,
    checkpoints=(),
    max_cells: int = MAX_CELLS_DEFAULT,
    time_offset: float = 0.0,
    id_start: int = 0,
) -> Tessellation:
    """Run the construction in W up to t_end.

    `time_offset` shifts recorded birth times (used by iterate for
    bookkeeping); the internal clock always runs on [0, t_end].
    """
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")
    heap = []  # (death_time, seq, CellRecord)
    seq = 0
    next_id = id_start

    def admit(poly: ConvexPolytope, birth: float):
        nonlocal seq, next_id
        rate = measure_hitting(spec, poly)
        death = birth + (rng.exponential(1.0 / rate) if rate > 0.0 else math.inf)
        rec = CellRecord(poly, birth, death, next_id)
        next_id += 1
        heapq.heappush(heap, (death, seq, rec))
        seq += 1
        return rec

    admit(W, 0.0)
    facets = []
    alive = []
    n_cells = 1
    while heap:
        death, _, cell = heapq.heappop(heap)
        if death > t_end:
            cell.death_time = math.inf
            alive.append(cell)
            continue
        if n_cells >= max_cells:
            raise CellBudgetExceeded(f"cell budget {max_cells} exhausted")
        for _ in range(_MAX_RESAMPLE):
            H = sample_hitting(spec, cell.polytope, rng)
            try:
                Pp, Pm, facet = split_polytope(cell.polytope, H)
                break
            except (DegenerateSplit, NoIntersection):
                continue  # probability-zero fringe; resample
        else:
            raise RuntimeError("could not find a valid splitting hyperplane")
        facets.append(IFacetRecord(facet, death + time_offset, H, cell.cell_id))
        admit(Pp, death)
        admit(Pm, death)
        n_cells += 1

    for i, c in enumerate(alive):
        c.birth_time += time_offset
    Y = Tessellation(W, t_end + time_offset, alive, facets)
    if checkpoints:
        Y.checkpoint_totals = checkpoint_totals(Y, [c + time_offset for c in checkpoints])
    return Y


def checkpoint_totals(Y: Tessellation, checkpoints) -> dict:
    """Cumulative facet (d-1)-volume born up to each checkpoint time."""
    births = np.array([f.birth_time for f in Y.i_facets])
    areas = np.array([f.facet.area for f in Y.i_facets])
    out = {}
    for s in checkpoints:
        out[float(s)] = float(areas[births <= s].sum()) if len(births) else 0.0
    return out


def iterate(
    Y1: Tessellation,
    spec: HyperplaneMeasureSpec,
    u: float,
    rng: np.random.Generator,
    checkpoints=(),
) -> Tessellation:
    """Y1 boxplus Y(u, .): re-run the construction for time u independently
    inside every final cell of Y1 and superpose the facets."""
    if u <= 0.0:
        return Tessellation(
            Y1.window, Y1.t_end, list(Y1.cells), list(Y1.i_facets),
            dict(Y1.checkpoint_totals),
        )
    cells = []
    facets = list(Y1.i_facets)
    next_id = max((c.cell_id for c in Y1.cells), default=-1) + 1
    for cell in Y1.cells:
        sub = run(
            spec, u, cell.polytope, rng,
            time_offset=Y1.t_end, id_start=next_id,
        )
        next_id = max((c.cell_id for c in sub.cells), default=next_id - 1) + 1
        cells.extend(sub.cells)
        facets.extend(sub.i_facets)
    Y = Tessellation(Y1.window, Y1.t_end + u, cells, facets)
    if checkpoints:
        Y.checkpoint_totals = checkpoint_totals(Y, checkpoints)
    return Y


def rescale(Y: Tessellation, m: float) -> Tessellation:
    """Scale every coordinate by m (facet areas pick up m^(d-1))."""
    if not m > 0.0:
        raise ValueError("m must be positive")
    d = Y.window.d
    cells = [
        CellRecord(c.polytope.scaled(m), c.birth_time, c.death_time, c.cell_id)
        for c in Y.cells
    ]
    facets = [
        IFacetRecord(
            FacetPolygon(
                d,
                f.facet.vertices * m,
                Hyperplane.make(f.carrier.normal, f.carrier.offset * m),
                area=f.facet.area * m ** (d - 1) if d > 1 else 1.0,
            ),
            f.birth_time,
            Hyperplane.make(f.carrier.normal, f.carrier.offset * m),
            f.parent_cell_id,
        )
        for f in Y.i_facets
    ]
    return Tessellation(
        Y.window.scaled(m),
        Y.t_end,
        cells,
        facets,
        {s: v * m ** (d - 1) for s, v in Y.checkpoint_totals.items()},
    )
