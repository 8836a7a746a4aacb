"""Closed-form inverse branches of the canonical Newton maps and the
backward-dynamics machinery built on them: preimage trees, restricted-branch
chaos games, repellor iteration, and Hausdorff-distance diagnostics.

For quadratic components the equation N(z) = p collapses, via the exact
second-order Taylor identity, to radicals in the offset u = p - z:

* parabolic family: u_x^2 = p_x^2 - p_y and u_y^2 = (p_y - y0)^2 - p_x + x0,
  giving up to four sign branches;
* hyperbolic family: u_x u_y = p_x p_y - 1 =: c1 together with
  u_x^2 - a u_y^2 = c2 gives the biquadratic u^4 - c2 u^2 - a c1^2 = 0 and
  exactly two real branches away from the coincidence locus.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, WrongType
from .pencil import Hyperbolic, Parabolic

PARABOLIC_IDS = ((0, 0), (0, 1), (1, 0), (1, 1))
HYPERBOLIC_IDS = ("+", "-")

_DEFAULT_CAP = 2_000_000


# ----------------------------------------------------------------------
# point clouds


@dataclass
class PointCloud:
    """Finite planar point set with per-point flags and provenance."""

    points: np.ndarray
    flags: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)
    capped: bool = False
    stalled: bool = False

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.flags is not None:
            self.flags = np.asarray(self.flags, dtype=np.uint8).reshape(-1)

    def __len__(self):
        return len(self.points)


def save_cloud_csv(cloud: PointCloud, path) -> None:
    flags = cloud.flags if cloud.flags is not None \
        else np.zeros(len(cloud), dtype=np.uint8)
    with open(path, "w") as fh:
        fh.write("x,y,flag\n")
        for (x, y), fl in zip(cloud.points, flags):
            fh.write(f"{x!r},{y!r},{int(fl)}\n")


_NPC1_MAGIC = b"NPC1"


def save_cloud_npc1(cloud: PointCloud, path) -> None:
    """Compact binary cloud: magic, JSON header, float64-LE pairs, flags."""
    header = {
        "count": len(cloud),
        "seed": cloud.provenance.get("seed"),
        "provenance": cloud.provenance,
        "has_flags": cloud.flags is not None,
        "capped": cloud.capped,
        "stalled": cloud.stalled,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_NPC1_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(cloud.points.astype("<f8").tobytes(order="C"))
        if cloud.flags is not None:
            fh.write(cloud.flags.astype(np.uint8).tobytes())


def load_cloud_npc1(path) -> PointCloud:
    with open(path, "rb") as fh:
        if fh.read(4) != _NPC1_MAGIC:
            raise ValueError("not an NPC1 cloud file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        n = header["count"]
        pts = np.frombuffer(fh.read(16 * n), dtype="<f8").reshape(n, 2).copy()
        flags = None
        if header.get("has_flags"):
            flags = np.frombuffer(fh.read(n), dtype=np.uint8).copy()
    return PointCloud(points=pts, flags=flags,
                      provenance=header.get("provenance", {}),
                      capped=header.get("capped", False),
                      stalled=header.get("stalled", False))


# ----------------------------------------------------------------------
# branch formulas


def parabolic_branch_images(x0: float, y0: float, pts):
    """All four formal branches at an (n, 2) block of points.

    Returns (ids, images, valid) with images of shape (4, n, 2); entries
    with a negative radicand are flagged invalid and hold NaN.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    rad1 = px * px - py
    rad2 = (py - y0) ** 2 - px + x0
    with np.errstate(invalid="ignore"):
        s1 = np.sqrt(rad1)
        s2 = np.sqrt(rad2)
    valid1 = rad1 >= 0.0
    valid2 = rad2 >= 0.0
    images = np.empty((4, len(pts), 2))
    valid = np.empty((4, len(pts)), dtype=bool)
    for k, (m, n) in enumerate(PARABOLIC_IDS):
        sx = s1 if m == 0 else -s1
        sy = s2 if n == 0 else -s2
        images[k, :, 0] = px + sx
        images[k, :, 1] = py + sy
        valid[k] = valid1 & valid2
    return PARABOLIC_IDS, images, valid


def hyperbolic_branch_images(x0: float, y0: float, a: float, pts):
    """Both branches at an (n, 2) block of points, shape (2, n, 2).

    The magnitudes |u_x|, |u_y| come from the two stable biquadratic roots
    (their product is exactly |c1|); the relative sign is fixed by
    u_x u_y = c1, which also covers the degenerate c1 = 0 paths.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    c1 = px * py - 1.0
    c2 = (px - x0) ** 2 - a * (py - y0) ** 2 - 1.0
    disc = np.sqrt(c2 * c2 + 4.0 * a * c1 * c1)
    ux = np.sqrt(np.maximum(0.5 * (c2 + disc), 0.0))
    uy = np.sqrt(np.maximum(0.5 * (disc - c2) / a, 0.0))
    s = np.where(c1 < 0.0, -1.0, 1.0)
    images = np.empty((2, len(pts), 2))
    images[0, :, 0] = px - ux
    images[0, :, 1] = py - s * uy
    images[1, :, 0] = px + ux
    images[1, :, 1] = py + s * uy
    valid = np.ones((2, len(pts)), dtype=bool)
    return HYPERBOLIC_IDS, images, valid


def parabolic_branches(x0: float, y0: float, p) -> list:
    """Real preimages of one point, as (branch_id, point) pairs with
    coincident branches merged."""
    ids, images, valid = parabolic_branch_images(x0, y0, [p])
    return _collect_scalar(ids, images, valid, p)


def hyperbolic_branches(x0: float, y0: float, a: float, p) -> list:
    ids, images, valid = hyperbolic_branch_images(x0, y0, a, [p])
    return _collect_scalar(ids, images, valid, p)


def _collect_scalar(ids, images, valid, p):
    scale = 1.0 + abs(float(p[0])) + abs(float(p[1]))
    out = []
    for k, bid in enumerate(ids):
        if not valid[k, 0]:
            continue
        z = images[k, 0]
        if any(np.abs(z - w).max() <= 1e-9 * scale for _, w in out):
            continue
        out.append((bid, z))
    return out


@dataclass(frozen=True)
class InverseBranchSystem:
    """Branch family attached to a canonical normal form."""

    form: object

    def __post_init__(self):
        if not isinstance(self.form, (Parabolic, Hyperbolic)):
            raise WrongType("inverse branches exist only for the canonical "
                            "families")

    @property
    def branch_ids(self):
        if isinstance(self.form, Parabolic):
            return PARABOLIC_IDS
        return HYPERBOLIC_IDS

    def images(self, pts):
        f = self.form
        if isinstance(f, Parabolic):
            return parabolic_branch_images(f.x0, f.y0, pts)
        return hyperbolic_branch_images(f.x0, f.y0, f.a, pts)

    def at(self, p) -> list:
        f = self.form
        if isinstance(f, Parabolic):
            return parabolic_branches(f.x0, f.y0, p)
        return hyperbolic_branches(f.x0, f.y0, f.a, p)


# ----------------------------------------------------------------------
# preimage trees


def preimage_tree(system: InverseBranchSystem, p, depth: int,
                  cap: int = _DEFAULT_CAP, seed: int = 0) -> PointCloud:
    """Breadth-first expansion of all real branches; returns the last level.

    Levels larger than ``cap`` are subsampled uniformly (seeded) instead of
    truncated, which keeps the spatial distribution unbiased; the result is
    then flagged as capped.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = np.random.default_rng(seed)
    level = np.asarray(p, dtype=float).reshape(1, 2)
    capped = False
    for _ in range(depth):
        _, images, valid = system.images(level)
        pts = images[valid]
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        if len(pts) == 0:
            level = pts
            break
        if len(pts) > cap:
            keep = rng.choice(len(pts), size=cap, replace=False)
            keep.sort()
            pts = pts[keep]
            capped = True
        level = pts
    return PointCloud(points=level, capped=capped,
                      provenance={"kind": "preimage_tree", "depth": depth,
                                  "cap": cap, "seed": seed,
                                  "point": [float(p[0]), float(p[1])]})


# ----------------------------------------------------------------------
# chaos game


def chaos_game(system: InverseBranchSystem, allowed_ids, region_test,
               z0, n: int, seed: int, burnin: int = 100) -> PointCloud:
    """Random backward orbit restricted to branches whose image passes
    ``region_test`` (a predicate on (k, 2) arrays).

    When no allowed branch lands inside the region the step falls back to
    any real branch and the point is flagged; when no real branch exists at
    all the partial cloud is returned with ``stalled`` set.  Returns the
    last ``n - burnin`` points; identical seeds give identical clouds.
    """
    rng = np.random.default_rng(seed)
    allowed = sorted(set(allowed_ids), key=lambda b: str(b))
    z = np.asarray(z0, dtype=float).reshape(2)
    keep_from = min(burnin, max(n - 1, 0))
    pts = np.empty((n, 2))
    flags = np.zeros(n, dtype=np.uint8)
    stalled = False
    count = 0
    for i in range(n):
        branches = system.at(z)
        if not branches:
            stalled = True
            break
        in_region = [(bid, w) for bid, w in branches
                     if bid in allowed
                     and bool(region_test(w.reshape(1, 2))[0])]
        if in_region:
            bid, z = in_region[int(rng.integers(len(in_region)))]
        else:
            bid, z = branches[int(rng.integers(len(branches)))]
            flags[i] = 1
        pts[i] = z
        count = i + 1
    cloud_pts = pts[keep_from:count]
    cloud_flags = flags[keep_from:count]
    return PointCloud(points=cloud_pts, flags=cloud_flags, stalled=stalled,
                      provenance={"kind": "chaos_game", "n": n, "seed": seed,
                                  "burnin": burnin,
                                  "start": [float(z0[0]), float(z0[1])],
                                  "branches": [str(b) for b in allowed]})


def hutchinson_step(system: InverseBranchSystem, allowed_ids,
                    region_test, pts) -> np.ndarray:
    """One application of the union of the allowed branches to a point set."""
    allowed = set(allowed_ids)
    ids, images, valid = system.images(pts)
    out = []
    for k, bid in enumerate(ids):
        if bid not in allowed:
            continue
        block = images[k][valid[k]]
        block = block[np.all(np.isfinite(block), axis=1)]
        if region_test is not None and len(block):
            block = block[region_test(block)]
        out.append(block)
    if not out:
        return np.zeros((0, 2))
    return np.concatenate(out, axis=0)


# ----------------------------------------------------------------------
# repellor iteration


def repellor_iterate(model, region_test, seeds: PointCloud, n: int,
                     cap: int = _DEFAULT_CAP, seed: int = 0):
    """Iterate full preimage sets intersected with a region.

    Returns (cloud, distances) where distances[k] is the Hausdorff distance
    between levels k and k+1; the sequence settling down is the practical
    sign that the backward limit set has been reached.
    """
    system = model.closed_form_inverse
    if system is None:
        raise WrongType("model has no closed-form inverse branches")
    rng = np.random.default_rng(seed)
    level = np.asarray(seeds.points, dtype=float).reshape(-1, 2)
    if region_test is not None and len(level):
        level = level[region_test(level)]
    dists: list[float] = []
    capped = False
    for _ in range(n):
        _, images, valid = system.images(level)
        pts = images[valid]
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        if region_test is not None and len(pts):
            pts = pts[region_test(pts)]
        if len(pts) > cap:
            keep = rng.choice(len(pts), size=cap, replace=False)
            keep.sort()
            pts = pts[keep]
            capped = True
        if len(level) and len(pts):
            dists.append(hausdorff_distance_points(level, pts))
        level = pts
        if len(level) == 0:
            break
    cloud = PointCloud(points=level, capped=capped,
                       provenance={"kind": "repellor_iteration", "n": n,
                                   "seed": seed})
    return cloud, dists


# ----------------------------------------------------------------------
# Hausdorff distance


def hausdorff_distance_points(a: np.ndarray, b: np.ndarray) -> float:
    """Exact two-sided Hausdorff distance between finite point sets."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("hausdorff distance needs nonempty sets")
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    return hausdorff_distance_points(a.points, b.points)


def halfplane(a: float, b: float, c: float) -> Callable[[np.ndarray], np.ndarray]:
    """Region predicate for a x + b y + c <= 0, acting on (n, 2) arrays."""

    def test(pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return a * pts[:, 0] + b * pts[:, 1] + c <= 0.0

    return test
