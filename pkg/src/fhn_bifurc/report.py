"""Deterministic CSV / JSON-lines / SVG emission.

CSV files carry a header row, RFC-4180 quoting, '.' decimal separator and
floats at 17 significant digits (full round-trip).  JSON-lines logs sort
keys.  SVG portraits are built through ElementTree so the output is always
well-formed XML, and contain only computed geometry.
"""

from __future__ import annotations

import csv
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

__all__ = ["fmt_float", "write_csv", "write_jsonl", "PortraitBuilder"]


def fmt_float(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def write_jsonl(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True))
            fh.write("\n")


class PortraitBuilder:
    """Collects phase-plane geometry and renders one SVG document."""

    def __init__(self, width: int = 720, height: int = 720, margin: float = 0.06):
        self.width = width
        self.height = height
        self.margin = margin
        self._trajectories: list[np.ndarray] = []
        self._nullclines: list[np.ndarray] = []
        self._cycles: list[np.ndarray] = []
        self._equilibria: list[tuple[float, float, str]] = []

    def add_trajectory(self, pts) -> None:
        self._trajectories.append(np.asarray(pts, dtype=float))

    def add_nullcline(self, pts) -> None:
        self._nullclines.append(np.asarray(pts, dtype=float))

    def add_cycle(self, pts) -> None:
        self._cycles.append(np.asarray(pts, dtype=float))

    def add_equilibrium(self, x: float, y: float, kind: str) -> None:
        self._equilibria.append((float(x), float(y), kind))

    # -- rendering --------------------------------------------------------

    def _bounds(self):
        arrays = self._trajectories + self._nullclines + self._cycles
        pts = [a for a in arrays if len(a)]
        if self._equilibria:
            pts.append(np.asarray([(x, y) for x, y, _ in self._equilibria]))
        if not pts:
            return (-1.0, 1.0, -1.0, 1.0)
        allp = np.vstack(pts)
        finite = allp[np.isfinite(allp).all(axis=1)]
        if not len(finite):
            return (-1.0, 1.0, -1.0, 1.0)
        x0, y0 = finite.min(axis=0)
        x1, y1 = finite.max(axis=0)
        dx = max(x1 - x0, 1e-9)
        dy = max(y1 - y0, 1e-9)
        return (x0 - self.margin * dx, x1 + self.margin * dx,
                y0 - self.margin * dy, y1 + self.margin * dy)

    def _mapper(self):
        x0, x1, y0, y1 = self._bounds()
        sx = self.width / (x1 - x0)
        sy = self.height / (y1 - y0)

        def to_px(p):
            return ((p[0] - x0) * sx, (y1 - p[1]) * sy)  # y grows downward in SVG

        return to_px

    @staticmethod
    def _poly_points(pts, to_px) -> str:
        out = []
        for p in pts:
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                continue
            px, py = to_px(p)
            out.append(f"{px:.2f},{py:.2f}")
        return " ".join(out)

    def render(self) -> str:
        to_px = self._mapper()
        svg = ET.Element("svg", {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": str(self.width), "height": str(self.height),
            "viewBox": f"0 0 {self.width} {self.height}",
        })
        ET.SubElement(svg, "rect", {"x": "0", "y": "0",
                                    "width": str(self.width),
                                    "height": str(self.height),
                                    "fill": "white"})
        for pts in self._trajectories:
            s = self._poly_points(pts, to_px)
            if s:
                ET.SubElement(svg, "polyline", {
                    "points": s, "fill": "none",
                    "stroke": "#4477aa", "stroke-width": "1.0"})
        for pts in self._nullclines:
            s = self._poly_points(pts, to_px)
            if s:
                ET.SubElement(svg, "polyline", {
                    "points": s, "fill": "none", "stroke": "#999999",
                    "stroke-width": "1.2", "stroke-dasharray": "6,4"})
        for pts in self._cycles:
            s = self._poly_points(pts, to_px)
            if s:
                ET.SubElement(svg, "polyline", {
                    "points": s, "fill": "none",
                    "stroke": "#cc3311", "stroke-width": "2.5"})
        for (x, y, kind) in self._equilibria:
            px, py = to_px((x, y))
            if kind == "saddle":
                for dx, dy in ((1, 1), (1, -1)):
                    ET.SubElement(svg, "line", {
                        "x1": f"{px - 6 * dx:.2f}", "y1": f"{py - 6 * dy:.2f}",
                        "x2": f"{px + 6 * dx:.2f}", "y2": f"{py + 6 * dy:.2f}",
                        "stroke": "#000000", "stroke-width": "2"})
            elif kind.startswith("stable"):
                ET.SubElement(svg, "circle", {
                    "cx": f"{px:.2f}", "cy": f"{py:.2f}", "r": "5",
                    "fill": "#000000"})
            elif kind.startswith("unstable"):
                ET.SubElement(svg, "circle", {
                    "cx": f"{px:.2f}", "cy": f"{py:.2f}", "r": "5",
                    "fill": "white", "stroke": "#000000", "stroke-width": "2"})
            else:  # center candidates, saddle-nodes, degenerate
                ET.SubElement(svg, "rect", {
                    "x": f"{px - 5:.2f}", "y": f"{py - 5:.2f}",
                    "width": "10", "height": "10",
                    "fill": "none", "stroke": "#000000", "stroke-width": "2",
                    "transform": f"rotate(45 {px:.2f} {py:.2f})"})
        return ET.tostring(svg, encoding="unicode")

    def write(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render() + "\n", encoding="utf-8")
