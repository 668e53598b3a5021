"""Export of tessellations: SVG line drawings for d=2 and PLY polygon soups
for d=3.  Output is deterministic (fixed float formatting, facet order as
recorded) so renders can be used as golden files."""

from __future__ import annotations

import numpy as np

from .mnw import Tessellation

_F = "{:.6f}".format


def render_svg(Y: Tessellation, stroke_by_birth: bool = False) -> str:
    if Y.window.d != 2:
        raise ValueError("SVG export needs a planar tessellation")
    v = Y.window.vertices
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    pad = 0.02 * max(hi - lo)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_F(lo[0]-pad)} '
        f'{_F(lo[1]-pad)} {_F(hi[0]-lo[0]+2*pad)} {_F(hi[1]-lo[1]+2*pad)}">',
        f'<g transform="translate(0,{_F(lo[1]+hi[1])}) scale(1,-1)">',
    ]
    outline = " ".join(f"{_F(x)},{_F(y)}" for x, y in v)
    w0 = 0.004 * float(max(hi - lo))
    lines.append(
        f'<polygon points="{outline}" fill="none" stroke="black" '
        f'stroke-width="{_F(w0)}"/>'
    )
    t_end = Y.t_end if Y.t_end > 0 else 1.0
    for f in Y.i_facets:
        (x1, y1), (x2, y2) = f.facet.vertices
        w = w0
        if stroke_by_birth:
            w = w0 * (0.3 + 1.4 * (1.0 - f.birth_time / t_end))
        lines.append(
            f'<line x1="{_F(x1)}" y1="{_F(y1)}" x2="{_F(x2)}" y2="{_F(y2)}" '
            f'stroke="black" stroke-width="{_F(w)}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_ply(Y: Tessellation) -> str:
    """PLY polygon export of the I-facets (one face per facet)."""
    if Y.window.d != 3:
        raise ValueError("PLY export needs a spatial tessellation")
    verts = []
    faces = []
    for f in Y.i_facets:
        base = len(verts)
        verts.extend(f.facet.vertices.tolist())
        faces.append(list(range(base, base + len(f.facet.vertices))))
    head = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(verts)}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {len(faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    body = [" ".join(_F(c) for c in p) for p in verts]
    body += [str(len(f)) + " " + " ".join(map(str, f)) for f in faces]
    return "\n".join(head + body) + "\n"
