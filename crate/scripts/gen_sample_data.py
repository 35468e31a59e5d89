#!/usr/bin/env python3
"""Generate the bundled sample survey and the frozen constants used by the test suite.

Everything here is computed independently of the Rust code: geodesy with mpmath at
50-digit precision, volumes with exact Fraction arithmetic (Simpson on piecewise
quadratics), membership counts with plain Python floats. Outputs:

  crates/massif/sample/plan.kml           plan-view wireframe (4 closed traces)
  crates/massif/sample/profile.kml        profile wireframe (3 layer bands)
  crates/massif/tests/data/merged_plan.kml     outer footprint ring
  crates/massif/tests/data/merged_profile.kml  outer profile ring
  crates/massif/tests/data/expected.json       frozen areas/volumes/extents

plus a table of scalar constants to paste into Rust tests. Re-run after editing the
chain definitions below; the KML coordinate text is deterministic.
"""

import json
import os
from fractions import Fraction as Fr

import mpmath as mp

mp.mp.dps = 50

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)
SAMPLE_DIR = os.path.join(ROOT, "crates", "massif", "sample")
DATA_DIR = os.path.join(ROOT, "crates", "massif", "tests", "data")

# ---------------------------------------------------------------------------
# geodesy oracle (sphere + WGS84), mpmath
# ---------------------------------------------------------------------------

R_MEAN = mp.mpf("6371008.8")
WGS_A = mp.mpf("6378137.0")
WGS_F = 1 / mp.mpf("298.257223563")
WGS_E2 = WGS_F * (2 - WGS_F)

ORIGIN = (mp.mpf("48.7408"), mp.mpf("7.3318"), mp.mpf("425.0"))


def haversine(lat1, lon1, lat2, lon2):
    p1, p2 = mp.radians(lat1), mp.radians(lat2)
    dp = p2 - p1
    dl = mp.radians(lon2 - lon1)
    a = mp.sin(dp / 2) ** 2 + mp.cos(p1) * mp.cos(p2) * mp.sin(dl / 2) ** 2
    return R_MEAN * 2 * mp.atan2(mp.sqrt(a), mp.sqrt(1 - a))


def geodetic_to_ecef(lat, lon, alt):
    phi, lam = mp.radians(lat), mp.radians(lon)
    n = WGS_A / mp.sqrt(1 - WGS_E2 * mp.sin(phi) ** 2)
    x = (n + alt) * mp.cos(phi) * mp.cos(lam)
    y = (n + alt) * mp.cos(phi) * mp.sin(lam)
    z = (n * (1 - WGS_E2) + alt) * mp.sin(phi)
    return x, y, z


def ecef_to_geodetic(x, y, z):
    lam = mp.atan2(y, x)
    p = mp.sqrt(x * x + y * y)
    phi = mp.atan2(z, p * (1 - WGS_E2))
    for _ in range(200):
        n = WGS_A / mp.sqrt(1 - WGS_E2 * mp.sin(phi) ** 2)
        phi_next = mp.atan2(z + WGS_E2 * n * mp.sin(phi), p)
        if abs(phi_next - phi) < mp.mpf("1e-40"):
            phi = phi_next
            break
        phi = phi_next
    n = WGS_A / mp.sqrt(1 - WGS_E2 * mp.sin(phi) ** 2)
    alt = p / mp.cos(phi) - n
    return mp.degrees(phi), mp.degrees(lam), alt


def enu_basis(lat, lon):
    phi, lam = mp.radians(lat), mp.radians(lon)
    east = (-mp.sin(lam), mp.cos(lam), mp.mpf(0))
    north = (-mp.sin(phi) * mp.cos(lam), -mp.sin(phi) * mp.sin(lam), mp.cos(phi))
    up = (mp.cos(phi) * mp.cos(lam), mp.cos(phi) * mp.sin(lam), mp.sin(phi))
    return east, north, up


def geodetic_to_enu(lat, lon, alt, origin=ORIGIN):
    x0, y0, z0 = geodetic_to_ecef(*origin)
    x, y, z = geodetic_to_ecef(lat, lon, alt)
    d = (x - x0, y - y0, z - z0)
    e, n, u = enu_basis(origin[0], origin[1])
    dot = lambda a, b: a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    return dot(d, e), dot(d, n), dot(d, u)


def enu_to_geodetic(e_val, n_val, u_val, origin=ORIGIN):
    x0, y0, z0 = geodetic_to_ecef(*origin)
    e, n, u = enu_basis(origin[0], origin[1])
    x = x0 + e_val * e[0] + n_val * n[0] + u_val * u[0]
    y = y0 + e_val * e[1] + n_val * n[1] + u_val * u[1]
    z = z0 + e_val * e[2] + n_val * n[2] + u_val * u[2]
    return ecef_to_geodetic(x, y, z)


# ---------------------------------------------------------------------------
# sample survey geometry
#
# Plan view: an elongated footprint (x 0..255 m, y 0..70 m) tiled into a base
# bar and three rock outlines. Every tile is given as a bottom chain and a top
# chain, both strictly increasing in x, so each vertical line crosses the tile
# in a single interval. Coordinates are multiples of 0.5 m (exact in f64).
# ---------------------------------------------------------------------------

BOTTOM = [(0, 6), (18, 2.5), (55, 0), (110, 1), (170, 0.5), (215, 2), (240, 4), (255, 8)]

WEST_SHOULDER = [(0, 14), (12, 20)]
BULGE1 = [(12, 20), (20, 48), (30, 62), (45, 70), (60, 64), (72, 40), (78, 21)]
VALLEY1 = [(78, 21), (84, 20), (88, 20.5), (92, 22)]
BULGE2 = [(92, 22), (100, 45), (112, 60), (126, 66), (140, 58), (150, 38), (158, 23)]
VALLEY2 = [(158, 23), (164, 22), (168, 22.5), (172, 24)]
BULGE3 = [(172, 24), (180, 42), (196, 56), (214, 62), (232, 52), (244, 36), (248, 26)]
EAST_SHOULDER = [(248, 26), (255, 16)]

CUT1 = [(12, 20), (25, 17), (40, 15), (60, 16), (78, 21)]
CUT2 = [(92, 22), (108, 18.5), (124, 17.5), (142, 18), (158, 23)]
CUT3 = [(172, 24), (190, 19), (208, 18), (228, 19.5), (248, 26)]


def chain(*parts):
    """Concatenate chains, dropping duplicated junction vertices."""
    out = []
    for part in parts:
        for p in part:
            if not out or out[-1] != p:
                out.append(p)
    return out


BAR_TOP = chain(WEST_SHOULDER[:1], CUT1, VALLEY1, CUT2, VALLEY2, CUT3, EAST_SHOULDER)
OUTLINE_TOP = chain(
    WEST_SHOULDER[:1], BULGE1, VALLEY1, BULGE2, VALLEY2, BULGE3, EAST_SHOULDER
)

# (id, name, bottom chain, top chain)
PLAN_TILES = [
    (1, "Markenfels", CUT1, BULGE1),
    (2, "Median Rock", CUT2, BULGE2),
    (3, "Septentrional Rock", CUT3, BULGE3),
    (4, "Base bar", BOTTOM, BAR_TOP),
]

# Profile view: three layer bands spanning x 0..255, z -5..45 (local metres,
# origin altitude 425 -> geodetic 420..470).
PROF_FLOOR = [(0, -5), (255, -5)]
PROF_B1 = [(0, 14), (60, 13), (130, 11.5), (200, 10), (255, 9)]
PROF_B2 = [(0, 31), (70, 29.5), (140, 28), (255, 26)]
PROF_TOP = [(0, 45), (255, 45)]

PROFILE_TILES = [
    (1, "lower sandstone", PROF_FLOOR, PROF_B1),
    (2, "main sandstone", PROF_B1, PROF_B2),
    (3, "conglomerate cap", PROF_B2, PROF_TOP),
]


def ring_of(bottom, top):
    """CCW ring: bottom west->east, then top east->west (caps implicit).

    Open, i.e. the first vertex is not repeated; the KML writer closes it.
    """
    ring = chain(bottom, list(reversed(top)))
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring.pop()
    return ring


def frac_pt(p):
    return (Fr(p[0]).limit_denominator(10**6), Fr(p[1]).limit_denominator(10**6))


def chain_value(ch, x):
    """Piecewise-linear value of a chain at x (Fraction)."""
    pts = [frac_pt(p) for p in ch]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x0 <= x <= x1 and x0 != x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    if x == pts[0][0]:
        return pts[0][1]
    if x == pts[-1][0]:
        return pts[-1][1]
    raise ValueError(f"x={x} outside chain")


def chain_support(ch):
    return Fr(ch[0][0]), Fr(ch[-1][0])


def width_fn(bottom, top):
    """Return (support, f(x)) for top(x) - bottom(x), zero outside support."""
    lo1, hi1 = chain_support(bottom)
    lo2, hi2 = chain_support(top)
    assert (lo1, hi1) == (lo2, hi2), "tile chains must share x support"

    def f(x):
        if x < lo1 or x > hi1:
            return Fr(0)
        return chain_value(top, x) - chain_value(bottom, x)

    return (lo1, hi1), f


def integrate_product(tile_a, tile_b):
    """Exact integral of width_a(x) * width_b(x) dx (piecewise quadratic)."""
    (lo_a, hi_a), fa = width_fn(tile_a[2], tile_a[3])
    (lo_b, hi_b), fb = width_fn(tile_b[2], tile_b[3])
    lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
    if lo >= hi:
        return Fr(0)
    xs = {lo, hi}
    for ch in (tile_a[2], tile_a[3], tile_b[2], tile_b[3]):
        for p in ch:
            x = Fr(p[0]).limit_denominator(10**6)
            if lo < x < hi:
                xs.add(x)
    xs = sorted(xs)
    total = Fr(0)
    for a, b in zip(xs, xs[1:]):
        m = (a + b) / 2
        g = lambda x: fa(x) * fb(x)
        total += (b - a) / 6 * (g(a) + 4 * g(m) + g(b))
    return total


def tile_area(tile):
    (lo, hi), f = width_fn(tile[2], tile[3])
    xs = sorted({Fr(p[0]).limit_denominator(10**6) for ch in (tile[2], tile[3]) for p in ch})
    total = Fr(0)
    for a, b in zip(xs, xs[1:]):
        m = (a + b) / 2
        total += (b - a) / 6 * (f(a) + 4 * f(m) + f(b))
    return total


def shoelace(ring):
    s = Fr(0)
    pts = [frac_pt(p) for p in ring]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return s / 2


def check_design():
    import itertools

    # chains strictly increasing in x
    all_chains = [t[2] for t in PLAN_TILES + PROFILE_TILES] + [
        t[3] for t in PLAN_TILES + PROFILE_TILES
    ]
    for ch in all_chains:
        xs = [p[0] for p in ch]
        assert all(a < b for a, b in zip(xs, xs[1:])), f"chain not x-monotone: {ch}"

    # tile areas agree with shoelace of the assembled ring
    for tile in PLAN_TILES + PROFILE_TILES:
        ring = ring_of(tile[2], tile[3])
        assert shoelace(ring) == tile_area(tile), tile[1]
        assert shoelace(ring) > 0, f"{tile[1]} not CCW"

    # plan tiles partition the outline
    outline = ring_of(BOTTOM, OUTLINE_TOP)
    assert shoelace(outline) == sum(tile_area(t) for t in PLAN_TILES)

    # profile bands partition the rectangle and have positive thickness
    rect = ring_of(PROF_FLOOR, PROF_TOP)
    assert shoelace(rect) == sum(tile_area(t) for t in PROFILE_TILES) == Fr(255 * 50)
    for t in PROFILE_TILES:
        (lo, hi), f = width_fn(t[2], t[3])
        for p in t[2] + t[3]:
            x = Fr(p[0]).limit_denominator(10**6)
            assert f(x) > 0, f"band {t[1]} pinches at x={x}"

    # extents
    plan_pts = [p for t in PLAN_TILES for p in t[2] + t[3]]
    xs = [p[0] for p in plan_pts]
    ys = [p[1] for p in plan_pts]
    assert min(xs) == 0 and max(xs) == 255 and min(ys) == 0 and max(ys) == 70
    prof_pts = [p for t in PROFILE_TILES for p in t[2] + t[3]]
    assert min(p[0] for p in prof_pts) == 0 and max(p[0] for p in prof_pts) == 255
    assert min(p[1] for p in prof_pts) == -5 and max(p[1] for p in prof_pts) == 45

    # tiles pairwise interior-disjoint (shapely, belt and braces)
    try:
        from shapely.geometry import Polygon
    except ImportError:
        return
    polys = [(t[1], Polygon([(float(x), float(y)) for x, y in ring_of(t[2], t[3])])) for t in PLAN_TILES]
    for (na, a), (nb, b) in itertools.combinations(polys, 2):
        assert a.is_valid and b.is_valid
        inter = a.intersection(b)
        assert inter.area < 1e-12, f"{na} overlaps {nb}: {inter.area}"


# ---------------------------------------------------------------------------
# KML emission
# ---------------------------------------------------------------------------

KML_HEAD = """<?xml version="1.0" encoding="UTF-8"?>
<kml xmlns="http://www.opengis.net/kml/2.2">
<Document>
<name>{name}</name>
"""
KML_TAIL = "</Document>\n</kml>\n"


def linestring_placemark(name, coords):
    rows = "\n".join(f"  {lon},{lat},{alt}" for lon, lat, alt in coords)
    return (
        f"<Placemark>\n<name>{name}</name>\n<LineString>\n<tessellate>1</tessellate>\n"
        f"<coordinates>\n{rows}\n</coordinates>\n</LineString>\n</Placemark>\n"
    )


def enu_ring_to_coords(ring, to_enu3):
    """Back-convert design vertices to geodetic via the exact inverse."""
    out = []
    for p in ring + ring[:1]:
        e, n, u = to_enu3(p)
        lat, lon, alt = enu_to_geodetic(mp.mpf(e), mp.mpf(n), mp.mpf(u))
        out.append((f"{float(lon):.14f}", f"{float(lat):.14f}", f"{float(alt):.9f}"))
    return out


def write_kml(path, doc_name, placemarks):
    with open(path, "w") as f:
        f.write(KML_HEAD.format(name=doc_name))
        for name, coords in placemarks:
            f.write(linestring_placemark(name, coords))
        f.write(KML_TAIL)
    print(f"wrote {path}")


def build_kml_files():
    os.makedirs(SAMPLE_DIR, exist_ok=True)
    os.makedirs(DATA_DIR, exist_ok=True)

    plan_enu = lambda p: (p[0], p[1], 12.5)  # traced ~12.5 m above origin altitude
    prof_enu = lambda p: (p[0], 0, p[1])

    plan_marks = []
    for tid, name, bot, top in PLAN_TILES:
        ring = ring_of(bot, top)
        plan_marks.append((name, enu_ring_to_coords(ring, plan_enu)))
    write_kml(os.path.join(SAMPLE_DIR, "plan.kml"), "Haut-Barr plan traces", plan_marks)

    prof_marks = []
    for tid, name, bot, top in PROFILE_TILES:
        ring = ring_of(bot, top)
        prof_marks.append((name, enu_ring_to_coords(ring, prof_enu)))
    write_kml(os.path.join(SAMPLE_DIR, "profile.kml"), "Haut-Barr profile layers", prof_marks)

    write_kml(
        os.path.join(DATA_DIR, "merged_plan.kml"),
        "merged footprint",
        [("footprint", enu_ring_to_coords(ring_of(BOTTOM, OUTLINE_TOP), plan_enu))],
    )
    write_kml(
        os.path.join(DATA_DIR, "merged_profile.kml"),
        "merged profile",
        [("profile outline", enu_ring_to_coords(ring_of(PROF_FLOOR, PROF_TOP), prof_enu))],
    )


# ---------------------------------------------------------------------------
# frozen expectations
# ---------------------------------------------------------------------------

def build_expected():
    cells = []
    total = Fr(0)
    for pt in PLAN_TILES:
        for lt in PROFILE_TILES:
            v = integrate_product(pt, lt)
            total += v
            cells.append(
                {"mass_id": pt[0], "layer_id": lt[0], "volume_m3": float(v)}
            )
    unit_areas = {str(t[0]): float(tile_area(t)) for t in PLAN_TILES}
    layer_areas = {str(t[0]): float(tile_area(t)) for t in PROFILE_TILES}
    expected = {
        "origin": {"lat": 48.7408, "lon": 7.3318, "alt": 425.0},
        "box": {"length": 255.0, "width": 70.0, "height": 50.0},
        "box_pad0_height": 45.0,
        "cells": cells,
        "total_volume_m3": float(total),
        "plan_unit_areas_m2": unit_areas,
        "profile_unit_areas_m2": layer_areas,
        "footprint_area_m2": float(sum(tile_area(t) for t in PLAN_TILES)),
    }
    path = os.path.join(DATA_DIR, "expected.json")
    with open(path, "w") as f:
        json.dump(expected, f, indent=1)
        f.write("\n")
    print(f"wrote {path}")
    return expected


# ---------------------------------------------------------------------------
# scalar constants for the Rust tests
# ---------------------------------------------------------------------------

def wedge_voxel_count(res):
    """Replicate the voxel oracle convention: centres at lo + res/2 + k*res,
    count strictly-inside centres (boundary band 1e-9 excluded)."""
    n = round(10.0 / res)
    count = 0
    for i in range(n):
        x = res / 2 + i * res
        for k in range(n):
            z = res / 2 + k * res
            d = 10.0 - x - z
            if d > 1e-9 * 2**0.5:
                count += n  # all y columns inside
    return count, count * res**3


def print_constants(expected):
    print("\n===== frozen scalars =====")
    h1 = haversine(0, 0, 0, 180)
    h2 = haversine(0, 0, 0, 1)
    h3 = haversine(48.7408, 7.3318, 48.7408, 7.3418)
    print(f"haversine (0,0)-(0,180)   = {mp.nstr(h1, 18)}")
    print(f"haversine (0,0)-(0,1)     = {mp.nstr(h2, 18)}")
    print(f"haversine origin +0.01lon = {mp.nstr(h3, 18)}")

    e, n, u = geodetic_to_enu(mp.mpf("0.001"), 0, 0, (mp.mpf(0), mp.mpf(0), mp.mpf(0)))
    print(f"enu of 0.001N at (0,0,0)  = e {mp.nstr(e, 12)} n {mp.nstr(n, 18)} u {mp.nstr(u, 12)}")

    vectors = []
    for de, dn, du in [(100, 0, 0), (0, 100, 0), (120.5, -80.25, 10), (-2000, 3000, -50)]:
        lat, lon, alt = enu_to_geodetic(mp.mpf(de), mp.mpf(dn), mp.mpf(du))
        back = geodetic_to_enu(lat, lon, alt)
        err = max(abs(back[0] - de), abs(back[1] - dn), abs(back[2] - du))
        assert err < mp.mpf("1e-20")
        vectors.append((de, dn, du, lat, lon, alt))
        print(
            f"enu ({de},{dn},{du}) -> lat {mp.nstr(lat, 20)} lon {mp.nstr(lon, 20)} alt {mp.nstr(alt, 16)}"
        )

    for res in (0.1, 0.05):
        cnt, vol = wedge_voxel_count(res)
        print(f"wedge voxel res {res}: inside-count {cnt} volume {vol:.6f}")

    print(f"footprint area = {expected['footprint_area_m2']}")
    print(f"total volume   = {expected['total_volume_m3']}")
    for c in expected["cells"]:
        print(f"cell ({c['mass_id']},{c['layer_id']}): {c['volume_m3']:.9f}")


if __name__ == "__main__":
    check_design()
    build_kml_files()
    expected = build_expected()
    print_constants(expected)
