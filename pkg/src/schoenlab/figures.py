"""Drawings of the comb curves and the cusped square."""

from __future__ import annotations

from fractions import Fraction

from .cantor_comb import CombParams, big_gamma, close_jordan, gamma, stage
from .cusp_john import CuspParams, john_domain, slit_arcs
from .reports import SvgCanvas

TOOTH_COLORS = ["#1f4e9c", "#b8441f", "#2e7d32", "#6a1b9a"]


def comb_construction_svg(depths=(1, 2, 3)) -> str:
    """The curves gamma_i stacked vertically, each above the Cantor stage it decorates."""
    gap = 1.5
    top = gap * (len(depths) - 1) + 1.2
    cv = SvgCanvas((-0.05, -0.15, 1.05, top), title="comb curves gamma_i over Cantor stages")
    for row, i in enumerate(depths):
        off = gap * (len(depths) - 1 - row)
        g = cv.group(f"gamma-{i}", transform=f"translate(0,{off})")
        cv.polyline(g, gamma(i).xy, "curve", color=TOOTH_COLORS[0])
        cantor = cv.group(f"stage-{i}", g)
        for lo, hi in stage(i).interval_floats():
            cv.segment(cantor, (lo, -0.08), (hi, -0.08), "cantor-interval", color=TOOTH_COLORS[1], width=3)
    return cv.tostring()


def comb_side_teeth_svg(depth: int = 2, rho=Fraction(3, 4)) -> str:
    """The decorated comb closed by the lower square, with band boundaries marked."""
    poly = close_jordan(big_gamma(CombParams(depth, rho)))
    cv = SvgCanvas((-0.05, -1.05, 1.05, 1.05), title=f"decorated comb at depth {depth}")
    g = cv.group("domain")
    cv.polyline(g, poly.xy, "jordan-polygon", closed=True, color=TOOTH_COLORS[0])
    bands = cv.group("bands")
    for m in range(1, depth + 1):
        y = 2.0 ** -(m + 1)
        cv.segment(bands, (-0.04, y), (1.04, y), "band-floor", color="#999999", width=0.5)
    return cv.tostring()


def cusp_square_svg(depth: int = 4, arc_samples: int = 32) -> str:
    """The square with cusped slits; arcs A_i in one colour, B_i in another, tips dotted."""
    params = CuspParams(0.5, 1.0, depth, arc_samples)
    poly = john_domain(params)
    cv = SvgCanvas((-0.05, -0.05, 1.05, 1.05), title=f"cusped slits, depth {depth}")
    g = cv.group("domain")
    cv.polyline(g, poly.xy, "jordan-polygon", closed=True)
    arcs = cv.group("arcs")
    for i in range(1, depth + 1):
        sa = slit_arcs(i, params)
        gi = cv.group(f"slit-{i}", arcs)
        (ax0, ay), (ax1, _) = sa.A
        cv.segment(gi, (float(ax0), float(ay)), (float(ax1), float(ay)), "arc-A", color=TOOTH_COLORS[1], width=3)
        cv.polyline(gi, sa.B, "arc-B", color=TOOTH_COLORS[2])
        cv.dot(gi, (float(sa.tip[0]), float(sa.tip[1])), "tip")
    return cv.tostring()


FIGURES = {
    "figure1_comb_construction.svg": comb_construction_svg,
    "figure2_side_teeth.svg": comb_side_teeth_svg,
    "figure3_cusped_square.svg": cusp_square_svg,
}
