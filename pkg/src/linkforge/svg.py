"""SVG rendering of trajectories: one polyline per node path, end-effector on top."""
from __future__ import annotations

from xml.etree import ElementTree as ET

# Node colors follow the linkage drawing convention: motor green, fixed red,
# movable gray, end-effector blue.
MOTOR_COLOR = "#2ca02c"
FIXED_COLOR = "#d62728"
MOVABLE_COLOR = "#7f7f7f"
END_EFFECTOR_COLOR = "#1f77b4"


def _points_attr(path):
    return " ".join(f"{repr(float(x))},{repr(float(y))}" for x, y in path)


def trajectory_svg(trajectory, linkage=None, margin_frac=0.05):
    """Serialize node paths as an SVG document (string)."""
    pos = trajectory.positions
    lo = pos.reshape(-1, 2).min(axis=0)
    hi = pos.reshape(-1, 2).max(axis=0)
    span = max(float(hi[0] - lo[0]), float(hi[1] - lo[1]), 1e-9)
    pad = margin_frac * span
    view = (lo[0] - pad, -(hi[1] + pad), (hi[0] - lo[0]) + 2 * pad, (hi[1] - lo[1]) + 2 * pad)

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "viewBox": " ".join(repr(float(v)) for v in view),
        "width": "640", "height": "640",
    })
    # Flip the y axis so curve coordinates render in the usual orientation.
    group = ET.SubElement(svg, "g", {"transform": "scale(1,-1)"})
    n = trajectory.n_nodes
    for i in range(1, n + 1):
        if i == n and n > 1:
            color, cls, width = END_EFFECTOR_COLOR, "end-effector", 0.012
        elif i == 1:
            color, cls, width = MOTOR_COLOR, "motor", 0.006
        elif linkage is not None and i in linkage.fixed_indices():
            color, cls, width = FIXED_COLOR, "fixed", 0.006
        else:
            color, cls, width = MOVABLE_COLOR, "movable", 0.006
        path = list(pos[:, i - 1, :])
        path.append(path[0])
        ET.SubElement(group, "polyline", {
            "class": cls,
            "data-node": str(i),
            "points": _points_attr(path),
            "fill": "none",
            "stroke": color,
            "stroke-width": repr(width * span),
        })
    return ET.tostring(svg, encoding="unicode", xml_declaration=True)


def write_svg(path, trajectory, linkage=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(trajectory_svg(trajectory, linkage))
        fh.write("\n")
