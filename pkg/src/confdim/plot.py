"""Static SVG weight table for a dimension report."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .conformal import critical_exponent
from .igs import GeneratorSpec


def _colour(t: float) -> str:
    # white to dark blue
    r = int(255 - 215 * t)
    g = int(255 - 175 * t)
    b = int(255 - 75 * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def report_svg(spec: GeneratorSpec, report) -> str:
    """One row per generator edge, shaded by the density at the critical exponent."""
    g = spec.g1
    if report.witness is not None:
        vals = np.array([report.witness[e] for e in g.edges])
        label = "witness density"
    else:
        crit = critical_exponent(spec)
        if crit.rho is not None:
            vals = crit.rho.values
            label = "optimal density at Q*"
        else:
            vals = np.array([1.0 if e not in report.removable_edges else 0.0 for e in g.edges])
            label = "essential edges"
    top = float(vals.max()) or 1.0
    row, width = 22, 420
    height = row * (len(g.edges) + 2)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="monospace" font-size="12">',
             f'<text x="8" y="16">{escape(spec.name or "generator")}: {escape(label)}, '
             f'Q* = {report.q_star!r}</text>']
    for i, e in enumerate(g.edges):
        y = row * (i + 1) + 6
        u, v = g.ends(e)
        parts.append(f'<rect x="8" y="{y}" width="140" height="{row - 4}" fill="{_colour(vals[i] / top)}" '
                     f'stroke="#888"/>')
        parts.append(f'<text x="156" y="{y + 13}">{escape(e)} ({escape(u)}, {escape(v)}) = '
                     f'{float(vals[i])!r}</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)
