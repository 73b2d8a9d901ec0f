"""SVG figures for links and planar circle patterns.

Output is deterministic: no timestamps, fixed float formatting, and element
order derived only from the input.  Geodesics in the disk chart are drawn as
circular arcs orthogonal to the unit circle; the carrier center c of the arc
through chart points z satisfies 2 Re(z conj(c)) = 1 + |z|^2, which
degenerates to a diameter when the endpoints are collinear with the origin.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

from .circles import NearPoleDegeneracy

BLACK = "#1a1a1a"
GREEN = "#1f9d55"
FAINT = "#9aa5b1"
ALERT = "#c0392b"


def _fmt(x: float) -> str:
    if abs(x) < 5e-7:
        return "0"  # would round to "0" or "-0" anyway
    return f"{x:.6f}".rstrip("0").rstrip(".")


def _svg_open(lines: list, box: float, size: int) -> None:
    lines.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{size}" height="{size}" '
        f'viewBox="{_fmt(-box)} {_fmt(-box)} {_fmt(2 * box)} {_fmt(2 * box)}">'
    )


def _geodesic_path(z1: complex, z2: complex) -> str:
    """SVG path for the geodesic chart arc from z1 to z2 (y flipped for SVG)."""
    p1 = complex(z1.real, -z1.imag)
    p2 = complex(z2.real, -z2.imag)
    det = 4.0 * (z1.real * z2.imag - z1.imag * z2.real)
    if abs(det) < 1e-9 * max(1.0, abs(z1), abs(z2)):
        return (f"M {_fmt(p1.real)} {_fmt(p1.imag)} "
                f"L {_fmt(p2.real)} {_fmt(p2.imag)}")
    b1 = 1.0 + abs(z1) ** 2
    b2 = 1.0 + abs(z2) ** 2
    cx = (b1 * 2.0 * z2.imag - b2 * 2.0 * z1.imag) / det
    cy = (b2 * 2.0 * z1.real - b1 * 2.0 * z2.real) / det
    r = math.sqrt(max(cx * cx + cy * cy - 1.0, 0.0))
    c = complex(cx, -cy)
    a1 = math.atan2(p1.imag - c.imag, p1.real - c.real)
    a2 = math.atan2(p2.imag - c.imag, p2.real - c.real)
    delta = (a2 - a1 + math.pi) % (2.0 * math.pi) - math.pi
    sweep = 1 if delta > 0 else 0
    return (f"M {_fmt(p1.real)} {_fmt(p1.imag)} "
            f"A {_fmt(r)} {_fmt(r)} 0 0 {sweep} {_fmt(p2.real)} {_fmt(p2.imag)}")


def _path_el(d: str, color: str, width: float, dashed: bool = False) -> str:
    dash = ' stroke-dasharray="0.05 0.03"' if dashed else ""
    return (f'<path d="{d}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}" stroke-linecap="round"{dash}/>')


def _dot(z: complex, color: str, r: float = 0.028) -> str:
    return (f'<circle cx="{_fmt(z.real)}" cy="{_fmt(-z.imag)}" r="{_fmt(r)}" '
            f'fill="{color}"/>')


def _caption(lines: list, text: str, box: float, color: str = BLACK) -> None:
    esc = (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
    lines.append(
        f'<text x="{_fmt(-box + 0.05)}" y="{_fmt(box - 0.06)}" '
        f'font-size="0.09" font-family="monospace" fill="{color}">{esc}</text>'
    )


def render_link_svg(link, size: int = 480) -> str:
    """Disk-chart figure of a link.

    Proper links draw the alternating polygon with colored edges and vertex
    dots.  Improper links fall back to the raw support lines so the failure
    can be inspected, with the reason in the caption.
    """
    box = 1.12
    out: list = []
    _svg_open(out, box, size)
    out.append(f'<circle cx="0" cy="0" r="1" fill="none" stroke="{FAINT}" '
               'stroke-width="0.012"/>')

    polygon = getattr(link, "polygon", None)
    positions = polygon.positions() if polygon is not None else None

    if link.proper and positions is not None:
        n = len(positions)
        edges = polygon.edges
        for k in range(n):
            a = positions[(k - 1) % n]
            b = positions[k]
            color = GREEN if edges[k].color == "green" else BLACK
            out.append(_path_el(_geodesic_path(a, b), color, 0.02))
        for k in range(n):
            v = polygon.vertices[k]
            out.append(_dot(positions[k], GREEN if v.color == "green" else BLACK))
        _caption(out, f"link at {link.vertex}", box)
    else:
        for ln in link.lines:
            out.append(_path_el(_geodesic_path(ln.alpha, ln.omega), FAINT,
                                0.012, dashed=True))
            out.append(_dot(ln.alpha, FAINT, 0.015))
        reason = getattr(link, "improper_reason", None) or "improper"
        _caption(out, f"link at {link.vertex}: {reason}", box, color=ALERT)

    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_planar_circles_svg(circles: Mapping, pole_tol: float = 1e-6,
                              size: int = 600) -> str:
    """Stereographic picture of a circle family, one planar circle per key.

    Circles too close to the projection pole come out as lines, drawn across
    the whole frame; a circle that is degenerate even as a line is skipped
    with a comment in the output.
    """
    planar = []
    skipped = []
    for key in sorted(circles, key=str):
        try:
            planar.append((key, circles[key].to_planar(pole_tol=pole_tol)))
        except NearPoleDegeneracy:
            skipped.append(key)

    xs: list = []
    for _, pc in planar:
        if pc.kind == "circle":
            xs.extend([abs(pc.center) + pc.radius])
    box = 1.15 * max(xs) if xs else 2.0

    out: list = []
    _svg_open(out, box, size)
    for key in skipped:
        out.append(f"<!-- skipped near-pole circle {key} -->")
    width = 0.004 * box
    for key, pc in planar:
        if pc.kind == "circle":
            dash = "" if pc.orientation > 0 else \
                f' stroke-dasharray="{_fmt(6 * width)} {_fmt(4 * width)}"'
            out.append(
                f'<circle cx="{_fmt(pc.center.real)}" cy="{_fmt(-pc.center.imag)}" '
                f'r="{_fmt(pc.radius)}" fill="none" stroke="{BLACK}" '
                f'stroke-width="{_fmt(width)}"{dash}/>')
            label = pc.center
        else:
            base = pc.offset * pc.normal
            span = 4.0 * box
            a = base - span * pc.direction
            b = base + span * pc.direction
            out.append(
                f'<line x1="{_fmt(a.real)}" y1="{_fmt(-a.imag)}" '
                f'x2="{_fmt(b.real)}" y2="{_fmt(-b.imag)}" '
                f'stroke="{BLACK}" stroke-width="{_fmt(width)}"/>')
            label = base
        esc = str(key).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(
            f'<text x="{_fmt(label.real)}" y="{_fmt(-label.imag)}" '
            f'font-size="{_fmt(0.05 * box)}" font-family="monospace" '
            f'text-anchor="middle" fill="{ALERT}">{esc}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
