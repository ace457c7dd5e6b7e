"""Serialization of results: exact JSON, SVG drawings, CSV tables, run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import xml.etree.ElementTree as ET
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

from . import __version__
from .cantor_comb import CantorStage, Polyline, stage
from .exact_geometry import Dyadic, JordanPolygon

OUT_ENV = "SCHOENLAB_OUT"


# ---------------------------------------------------------------------------
# numbers


def dyadic_pair(value) -> list[int]:
    return Dyadic.from_value(value).to_pair()


def dyadic_decimal(value) -> str:
    """Exact decimal expansion of a dyadic rational."""
    d = Dyadic.from_value(value)
    m, e = d.mantissa, d.exponent
    if e == 0:
        return str(m)
    digits = str(abs(m) * 5**e).rjust(e + 1, "0")
    body = f"{digits[:-e]}.{digits[-e:]}".rstrip("0").rstrip(".")
    return ("-" if m < 0 else "") + body


def fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _point_records(ints: np.ndarray, exponent: int) -> tuple[list, list]:
    den = 1 << exponent
    exact, dec = [], []
    for x, y in ints.tolist():
        fx, fy = Fraction(int(x), den), Fraction(int(y), den)
        exact.append([dyadic_pair(fx), dyadic_pair(fy)])
        dec.append([dyadic_decimal(fx), dyadic_decimal(fy)])
    return exact, dec


# ---------------------------------------------------------------------------
# payloads


def cantor_payload(i: int) -> dict:
    st: CantorStage = stage(i)
    return {
        "kind": "cantor",
        "depth": i,
        "intervals": [
            {"lo": dyadic_pair(a), "hi": dyadic_pair(b), "lo_decimal": dyadic_decimal(a), "hi_decimal": dyadic_decimal(b)}
            for a, b in st.intervals
        ],
        "gaps": [
            {"lo": dyadic_pair(a), "hi": dyadic_pair(b), "lo_decimal": dyadic_decimal(a), "hi_decimal": dyadic_decimal(b),
             "generation": g}
            for a, b, g in st.gap_list()
        ],
        "measure": dyadic_pair(st.measure()),
        "measure_decimal": dyadic_decimal(st.measure()),
    }


def t1_curve_payload(curve: Polyline, depth: int, rho: Fraction) -> dict:
    exact, dec = _point_records(curve.ints, curve.exponent)
    return {
        "kind": "t1",
        "depth": depth,
        "rho": dyadic_pair(rho),
        "rho_decimal": dyadic_decimal(rho),
        "vertices": exact,
        "vertices_decimal": dec,
        # the closed domain boundary continues from (1, 0) through these corners back to (0, 0)
        "closure": [[dyadic_pair(1), dyadic_pair(-1)], [dyadic_pair(0), dyadic_pair(-1)]],
    }


def t2_curve_payload(poly: JordanPolygon, s: float, C: float, N: int, M: int) -> dict:
    out = {
        "kind": "t2",
        "s": s,
        "C": C,
        "N": N,
        "M": M,
        "exact": poly.exact,
        "polygon_decimal": poly.xy.tolist(),
    }
    if poly.exact:
        out["polygon"] = _point_records(poly.ints, poly.exponent)[0]
    return out


def polygon_from_payload(payload: dict) -> JordanPolygon:
    """Rebuild the closed domain boundary stored by the ``curve`` command."""

    def pair(p):
        return Fraction(p[0], 1 << p[1])

    if payload.get("kind") == "t1":
        pts = [(pair(x), pair(y)) for x, y in payload["vertices"] + payload["closure"]]
        return JordanPolygon.from_points(pts)
    if payload.get("kind") == "t2":
        if "polygon" in payload:
            return JordanPolygon.from_points([(pair(x), pair(y)) for x, y in payload["polygon"]])
        return JordanPolygon.from_floats(np.array(payload["polygon_decimal"]))
    if "polygon_decimal" in payload:
        return JordanPolygon.from_floats(np.array(payload["polygon_decimal"]))
    raise ValueError("file does not describe a polygon")


# ---------------------------------------------------------------------------
# schemas and files


def schema(name: str) -> dict:
    text = resources.files("schoenlab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(payload: dict, name: str) -> None:
    jsonschema.validate(payload, schema(name))


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def resolve_out(path: str | os.PathLike) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_atomic(path: str | os.PathLike, data: str | bytes) -> Path:
    """Write via a temporary file in the same directory and rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256_file(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_payload(argv: Sequence[str], parameters: dict, seeds: Sequence[int], inputs: Iterable[Path],
                     outputs: Iterable[Path], seconds: float) -> dict:
    return {
        "command": list(argv),
        "parameters": parameters,
        "seeds": list(seeds),
        "version": __version__,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
        "wall_clock_seconds": seconds,
    }


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


# ---------------------------------------------------------------------------
# CSV


T1_COLUMNS = ["n", "omega_mean", "omega_stderr", "unresolved_fraction", "D_n", "LB", "seed", "rho", "epsilon", "samples"]
T2_COLUMNS = ["i", "term", "term_decimal", "S", "S_decimal", "s", "C"]


def csv_text(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# SVG


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _points(xy: np.ndarray) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in xy)


class SvgCanvas:
    """Drawing in world coordinates (y up) mapped onto a fixed pixel frame."""

    def __init__(self, bounds: tuple[float, float, float, float], width: int = 800, title: str = ""):
        x0, y0, x1, y1 = bounds
        self.height = int(round(width * (y1 - y0) / (x1 - x0)))
        self.root = ET.Element("svg", {
            "xmlns": "http://www.w3.org/2000/svg", "width": str(width), "height": str(self.height),
            "viewBox": f"{_fmt(x0)} {_fmt(-y1)} {_fmt(x1 - x0)} {_fmt(y1 - y0)}",
        })
        if title:
            ET.SubElement(self.root, "title").text = title
        # flip y so world coordinates are drawn upright
        self.body = ET.SubElement(self.root, "g", {"transform": "scale(1,-1)"})
        self.stroke = (x1 - x0) / width

    def group(self, gid: str, parent=None, **attrs) -> ET.Element:
        return ET.SubElement(self.body if parent is None else parent, "g", {"id": gid, **attrs})

    def polyline(self, parent, xy, cls: str, closed: bool = False, color: str = "black") -> ET.Element:
        tag = "polygon" if closed else "polyline"
        return ET.SubElement(parent, tag, {
            "class": cls, "points": _points(np.asarray(xy, dtype=float)), "fill": "none", "stroke": color,
            "stroke-width": _fmt(1.5 * self.stroke),
        })

    def segment(self, parent, a, b, cls: str, color: str = "black", width: float = 1.5) -> ET.Element:
        return ET.SubElement(parent, "line", {
            "class": cls, "x1": _fmt(a[0]), "y1": _fmt(a[1]), "x2": _fmt(b[0]), "y2": _fmt(b[1]),
            "stroke": color, "stroke-width": _fmt(width * self.stroke),
        })

    def dot(self, parent, p, cls: str, r: float = 3.0, color: str = "black") -> ET.Element:
        return ET.SubElement(parent, "circle", {
            "class": cls, "cx": _fmt(p[0]), "cy": _fmt(p[1]), "r": _fmt(r * self.stroke), "fill": color,
        })

    def tostring(self) -> str:
        ET.indent(self.root)
        return ET.tostring(self.root, encoding="unicode") + "\n"


def svg_structure(svg_text: str) -> list:
    """Element tree summary used for golden comparisons: tags, ids, classes and point counts."""

    def walk(el):
        tag = el.tag.split("}")[-1]
        node = {"tag": tag}
        for key in ("id", "class"):
            if key in el.attrib:
                node[key] = el.attrib[key]
        if "points" in el.attrib:
            node["points"] = len(el.attrib["points"].split())
        kids = [walk(c) for c in el]
        if kids:
            node["children"] = kids
        return node

    return walk(ET.fromstring(svg_text))
