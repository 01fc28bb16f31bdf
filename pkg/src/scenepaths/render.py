"""Top-down SVG rendering of placed scenes."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .layout import PlacedScene

MARGIN = 20
GROUND_FILL = "#d9e6f2"
STACKED_FILL = "#f2dcc4"


def render_svg(scene: PlacedScene, scale: float = 60.0, rotation: int = 0) -> str:
    """One rectangle per footprint, an arrow for facing, a label per id.

    ``rotation`` turns the whole view about the room center in 90 degree steps.
    """
    w, d = scene.room.width * scale, scene.room.depth * scale
    side = max(w, d) + 2 * MARGIN
    ox, oy = (side - w) / 2, (side - d) / 2
    cx, cy = side / 2, side / 2

    def sx(x: float) -> float:
        return ox + x * scale

    def sy(y: float) -> float:
        return oy + d - y * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side:.0f}" height="{side:.0f}" '
        f'viewBox="0 0 {side:.2f} {side:.2f}">',
        f"<title>{escape(scene.scene_type)}</title>",
        f'<g transform="rotate({-rotation % 360} {cx:.2f} {cy:.2f})">',
        f'<rect x="{ox:.2f}" y="{oy:.2f}" width="{w:.2f}" height="{d:.2f}" fill="white" stroke="black" stroke-width="3"/>',
    ]
    ordered = sorted(scene.placements, key=lambda p: (p.supported_by is not None, p.z))
    for p in ordered:
        fill = STACKED_FILL if p.supported_by else GROUND_FILL
        pw, pd = p.dims[0] * scale, p.dims[1] * scale
        x, y = sx(p.x), sy(p.y)
        out.append(f'<g transform="translate({x:.2f} {y:.2f}) rotate({-p.yaw})">')
        out.append(f'<rect x="{-pd / 2:.2f}" y="{-pw / 2:.2f}" width="{pd:.2f}" height="{pw:.2f}" '
                   f'fill="{fill}" stroke="#333" stroke-width="1"/>')
        tip = pd / 2 + 8
        out.append(f'<line x1="0" y1="0" x2="{tip:.2f}" y2="0" stroke="#c0392b" stroke-width="2"/>')
        out.append(f'<polygon points="{tip:.2f},0 {tip - 6:.2f},-4 {tip - 6:.2f},4" fill="#c0392b"/>')
        out.append("</g>")
        out.append(f'<text x="{x:.2f}" y="{y:.2f}" font-size="10" font-family="sans-serif" '
                   f'text-anchor="middle">{escape(p.asset_id)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_views(scene: PlacedScene, scale: float = 60.0) -> list[str]:
    """Four views rotated by 0, 90, 180 and 270 degrees."""
    return [render_svg(scene, scale, k * 90) for k in range(4)]
