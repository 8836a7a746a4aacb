"""Newton iteration maps of planar polynomial pairs as explicit rational maps.

Given f = (p, q), the iteration z -> z - [Df(z)]^-1 f(z) is assembled
symbolically through the adjugate of Df into two numerator polynomials over
the shared denominator det Df.  On top of that representation this module
provides Jacobians in closed form, forward-orbit classification (roots,
cycles, escape, indeterminacy hits), the inventory of indeterminacy points
and invariant lines, the one-dimensional reduction of maps with a linear
pencil member, and extraction of the curve where det Df vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import pencil as pencil_mod
from .errors import (
    EverywhereSingular,
    NearIndeterminate,
    NearSingular,
    VerificationFailed,
    WrongType,
)
from .poly2 import AffineMap2, PlanarMap, Poly2, pencil_type

# |den(z)| below this scale-aware cutoff counts as sitting on the
# degeneracy curve; numerators use the looser cutoff for the 0/0 test.
EPS_DEN = 1e-12
EPS_NUM = 1e-9


# ----------------------------------------------------------------------
# model


@dataclass
class NewtonMapModel:
    """Rational form of a Newton map: (num_x / den, num_y / den)."""

    source: PlanarMap
    num_x: Poly2
    num_y: Poly2
    den: Poly2
    roots: list = field(default_factory=list)
    root_set: object = None
    closed_form_inverse: object = None
    ghost_lines: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def deg_den(self) -> int:
        return max(self.den.degree(), 0)

    def second_partials(self):
        if "hess" not in self._cache:
            p, q = self.source.p, self.source.q
            self._cache["hess"] = {
                "px": p.partial("x"), "py": p.partial("y"),
                "qx": q.partial("x"), "qy": q.partial("y"),
                "pxx": p.partial("x").partial("x"),
                "pxy": p.partial("x").partial("y"),
                "pyy": p.partial("y").partial("y"),
                "qxx": q.partial("x").partial("x"),
                "qxy": q.partial("x").partial("y"),
                "qyy": q.partial("y").partial("y"),
            }
        return self._cache["hess"]

    def roots_array(self) -> np.ndarray:
        if not self.roots:
            return np.zeros((0, 2))
        return np.asarray(self.roots, dtype=float).reshape(-1, 2)


def build_newton(f: PlanarMap, verify: bool = True) -> NewtonMapModel:
    """Assemble the Newton map of f through the adjugate of Df.

    den   = p_x q_y - p_y q_x
    num_x = x*den - (q_y p - p_y q)
    num_y = y*den - (p_x q - q_x p)

    Raises EverywhereSingular when det Df is identically zero.  The result
    is spot-checked against the direct linear-solve form on random points.
    """
    den = f.det_df()
    scale = max(f.p.max_abs_coeff(), f.q.max_abs_coeff())
    den = Poly2({k: c for k, c in den.terms.items()
                 if abs(c) > 1e-12 * scale})
    if den.is_zero():
        raise EverywhereSingular("det Df vanishes identically")
    p, q = f.p, f.q
    px, py = p.partial("x"), p.partial("y")
    qx, qy = q.partial("x"), q.partial("y")
    num_x = (Poly2.var_x() * den - (qy * p - py * q)).pruned(1e-13)
    num_y = (Poly2.var_y() * den - (px * q - qx * p)).pruned(1e-13)
    model = NewtonMapModel(source=f, num_x=num_x, num_y=num_y, den=den)
    if verify:
        _verify_model(model)
    return model


def _verify_model(model: NewtonMapModel, n: int = 100, seed: int = 12345):
    rng = np.random.default_rng(seed)
    hs = model.second_partials()
    checked = 0
    while checked < n:
        z = rng.uniform(-5, 5, size=2)
        d = model.den.eval_at(z)
        if abs(d) < 0.05:
            continue
        jac = np.array([[hs["px"].eval_at(z), hs["py"].eval_at(z)],
                        [hs["qx"].eval_at(z), hs["qy"].eval_at(z)]])
        direct = z - np.linalg.solve(jac, model.source(z))
        rational = np.array([model.num_x.eval_at(z) / d,
                             model.num_y.eval_at(z) / d])
        err = np.abs(direct - rational).max()
        if err > 1e-10 * (1.0 + np.abs(direct).max()):
            raise VerificationFailed(
                f"rational form disagrees with linear solve at {z}: {err:.3e}")
        checked += 1


# ----------------------------------------------------------------------
# evaluation


def _den_cutoff(z2, deg_den):
    return EPS_DEN * (1.0 + z2) ** (deg_den / 2.0)


def eval_newton(model: NewtonMapModel, z) -> np.ndarray:
    """Value of the Newton map at one point.

    Raises NearSingular when the denominator is at round-off scale with a
    nonzero numerator, and NearIndeterminate when the numerators vanish too
    (a 0/0 point).
    """
    x, y = float(z[0]), float(z[1])
    d = model.den(x, y)
    nx = model.num_x(x, y)
    ny = model.num_y(x, y)
    z2 = x * x + y * y
    if abs(d) <= _den_cutoff(z2, model.deg_den):
        num_scale = EPS_NUM * (1.0 + z2) ** (max(model.num_x.degree(), 1) / 2.0)
        if abs(nx) <= num_scale and abs(ny) <= num_scale:
            raise NearIndeterminate(f"0/0 point at {(x, y)}")
        raise NearSingular(f"denominator ~ 0 at {(x, y)}")
    return np.array([nx / d, ny / d])


def _batch_step(model: NewtonMapModel):
    """Vectorized guarded iteration step.

    Returns a function mapping active-lane coordinate arrays to the next
    iterate plus a 0/0 mask; lanes that merely sit on the degeneracy curve
    produce huge values and are left for the escape test.
    """
    num_x, num_y, den = model.num_x, model.num_y, model.den
    deg_den = model.deg_den
    deg_num = max(num_x.degree(), num_y.degree(), 1)

    def step(idx, x, y):
        d = den(x, y)
        nx = num_x(x, y)
        ny = num_y(x, y)
        z2 = x * x + y * y
        small = np.abs(d) <= _den_cutoff(z2, deg_den)
        num_scale = EPS_NUM * (1.0 + z2) ** (deg_num / 2.0)
        indet = small & (np.abs(nx) <= num_scale) & (np.abs(ny) <= num_scale)
        # an exactly zero denominator off the 0/0 set sends the iterate to
        # infinity; the escape test picks it up
        safe = np.where(d == 0.0, np.finfo(float).tiny, d)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out_x = nx / safe
            out_y = ny / safe
        return out_x, out_y, indet

    return step


def jacobian_newton(model: NewtonMapModel, z) -> np.ndarray:
    """Closed-form Jacobian of the Newton map.

    With v = [Df]^-1 f, row b of M set to Hess(f^b) v, the derivative is
    [Df]^-1 M; it vanishes at simple roots, which is what makes them
    super-attracting.
    """
    x, y = float(z[0]), float(z[1])
    d = model.den(x, y)
    z2 = x * x + y * y
    if abs(d) <= _den_cutoff(z2, model.deg_den):
        raise NearSingular(f"denominator ~ 0 at {(x, y)}")
    hs = model.second_partials()
    jac = np.array([[hs["px"](x, y), hs["py"](x, y)],
                    [hs["qx"](x, y), hs["qy"](x, y)]])
    fval = model.source((x, y))
    v = np.linalg.solve(jac, fval)
    hp = np.array([[hs["pxx"](x, y), hs["pxy"](x, y)],
                   [hs["pxy"](x, y), hs["pyy"](x, y)]])
    hq = np.array([[hs["qxx"](x, y), hs["qxy"](x, y)],
                   [hs["qxy"](x, y), hs["qyy"](x, y)]])
    m = np.vstack([hp @ v, hq @ v])
    return np.linalg.solve(jac, m)


# ----------------------------------------------------------------------
# forward-orbit classification


class OutcomeKind(Enum):
    CONVERGED_TO_ROOT = "converged-to-root"
    CYCLE = "cycle"
    ESCAPED = "escaped"
    HIT_INDETERMINACY = "hit-indeterminacy"
    UNDECIDED = "undecided"


@dataclass
class OrbitOutcome:
    kind: OutcomeKind
    iters: int
    trace_len: int
    root_index: int | None = None
    period: int | None = None
    points: list | None = None

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind.value, "iters": self.iters}
        if self.root_index is not None:
            out["root_index"] = self.root_index
        if self.period is not None:
            out["period"] = self.period
        return out


# integer kinds used by the batch engine
K_ACTIVE, K_ROOT, K_CYCLE, K_ESCAPED, K_INDET, K_UNDECIDED = -1, 0, 1, 2, 3, 4

# cycles are only reported away from roots; inside this radius the orbit is
# treated as converging instead
_CYCLE_ROOT_MARGIN = 1e-6


def classify_batch(step, x0, y0, roots, max_iter, tol, escape_radius):
    """Classify many forward orbits at once.

    ``step(idx, x, y)`` advances the active lanes listed in ``idx``;
    ``roots`` is an (m, 2) array shared by all lanes or an (n, m, 2) array
    of per-lane root lists padded with +inf.  Cycle detection keeps one
    checkpoint per lane, refreshed at power-of-two step counts, and fires
    when the orbit returns to it within ``tol``.

    Returns arrays (kind, root_idx, period, iters, fx, fy).
    """
    x = np.array(x0, dtype=float).ravel().copy()
    y = np.array(y0, dtype=float).ravel().copy()
    n = x.size
    roots = np.asarray(roots, dtype=float)
    per_lane = roots.ndim == 3
    m = roots.shape[-2] if roots.size else 0

    kind = np.full(n, K_ACTIVE, dtype=np.int8)
    root_idx = np.full(n, -1, dtype=np.int32)
    period = np.zeros(n, dtype=np.int32)
    iters = np.full(n, max_iter, dtype=np.int32)
    streak_root = np.full(n, -1, dtype=np.int32)
    streak_len = np.zeros(n, dtype=np.int32)
    cx = x.copy()
    cy = y.copy()

    act = np.arange(n)
    r2 = escape_radius * escape_radius
    tol2 = tol * tol
    margin2 = max(_CYCLE_ROOT_MARGIN, 10.0 * tol) ** 2
    power, lam = 1, 0

    def root_dist2(idx, xs, ys):
        if m == 0:
            return None, None
        r = roots[idx] if per_lane else roots
        dx = xs[:, None] - r[..., 0]
        dy = ys[:, None] - r[..., 1]
        d2 = dx * dx + dy * dy
        k = np.argmin(d2, axis=-1)
        return d2[np.arange(len(xs)), k], k

    # a start on an indeterminacy point resolves immediately
    _, _, ind0 = step(act, x, y)
    if ind0.any():
        hit = act[ind0]
        kind[hit] = K_INDET
        iters[hit] = 0
        act = act[~ind0]

    for t in range(1, max_iter + 1):
        if act.size == 0:
            break
        xs, ys = x[act], y[act]
        nx, ny, indet = step(act, xs, ys)
        x[act], y[act] = nx, ny
        lam += 1

        resolved = np.zeros(act.size, dtype=bool)

        if indet.any():
            hit = act[indet]
            kind[hit] = K_INDET
            iters[hit] = t
            resolved |= indet

        live = ~resolved
        d2r, kr = root_dist2(act, nx, ny)
        if d2r is not None:
            near = live & (d2r <= tol2)
            same = near & (streak_root[act] == kr)
            streak_len[act] = np.where(same, streak_len[act] + 1,
                                       np.where(near, 1, 0))
            streak_root[act] = np.where(near, kr, -1)
            conv = same & (streak_len[act] >= 2)
            if conv.any():
                hit = act[conv]
                kind[hit] = K_ROOT
                root_idx[hit] = kr[conv]
                iters[hit] = t
                resolved |= conv
                live = ~resolved

        bad = live & (~np.isfinite(nx) | ~np.isfinite(ny)
                      | (nx * nx + ny * ny > r2))
        if bad.any():
            hit = act[bad]
            kind[hit] = K_ESCAPED
            iters[hit] = t
            resolved |= bad
            live = ~resolved

        if lam >= 2 and live.any():
            ddx = nx - cx[act]
            ddy = ny - cy[act]
            close = live & (ddx * ddx + ddy * ddy <= tol2)
            if d2r is not None:
                close &= d2r > margin2
            if close.any():
                hit = act[close]
                kind[hit] = K_CYCLE
                period[hit] = lam
                iters[hit] = t
                resolved |= close

        if resolved.any():
            act = act[~resolved]

        if lam == power:
            cx[act] = x[act]
            cy[act] = y[act]
            power *= 2
            lam = 0

    kind[kind == K_ACTIVE] = K_UNDECIDED
    return kind, root_idx, period, iters, x, y


def _scalar_step_fn(model: NewtonMapModel):
    raw = _batch_step(model)

    def step(z):
        nx, ny, ind = raw(None, np.array([z[0]]), np.array([z[1]]))
        if ind[0]:
            raise NearIndeterminate(str(z))
        return np.array([nx[0], ny[0]])

    return step


def _refine_cycle(model, z, lam, tol):
    """Minimal period by divisor scan plus a full-period residual check."""
    step = _scalar_step_fn(model)
    pts = [np.asarray(z, dtype=float)]
    cur = pts[0]
    try:
        for _ in range(lam):
            cur = step(cur)
            pts.append(cur)
    except NearIndeterminate:
        return None
    if not np.all(np.isfinite(cur)):
        return None
    resid = np.abs(pts[lam] - pts[0]).max()
    if resid > 10.0 * tol * (1.0 + np.abs(pts[0]).max()):
        return None
    for d in range(2, lam + 1):
        if lam % d:
            continue
        if np.abs(pts[d] - pts[0]).max() <= 10.0 * tol * (1.0 + np.abs(pts[0]).max()):
            return d, [pts[i] for i in range(d)]
    return None


def classify_orbit(model: NewtonMapModel, z0, max_iter: int = 200,
                   tol: float = 1e-9,
                   escape_radius: float = 1e8) -> OrbitOutcome:
    """Forward-orbit outcome of one starting point.

    Converging means sitting within ``tol`` of the same listed root for two
    consecutive iterates; a cycle needs period >= 2 confirmed over a full
    period; crossing ``escape_radius`` counts as escape; 0/0 points end the
    orbit as an indeterminacy hit; anything else is undecided.
    """
    step = _batch_step(model)
    kind, ridx, per, iters, fx, fy = classify_batch(
        step, [z0[0]], [z0[1]], model.roots_array(), max_iter, tol,
        escape_radius)
    k, it = int(kind[0]), int(iters[0])
    if k == K_ROOT:
        return OrbitOutcome(OutcomeKind.CONVERGED_TO_ROOT, it, it,
                            root_index=int(ridx[0]))
    if k == K_ESCAPED:
        return OrbitOutcome(OutcomeKind.ESCAPED, it, it)
    if k == K_INDET:
        return OrbitOutcome(OutcomeKind.HIT_INDETERMINACY, it, it)
    if k == K_CYCLE:
        ref = _refine_cycle(model, (float(fx[0]), float(fy[0])),
                            int(per[0]), tol)
        if ref is not None:
            d, pts = ref
            return OrbitOutcome(OutcomeKind.CYCLE, it, it, period=d,
                                points=pts)
    return OrbitOutcome(OutcomeKind.UNDECIDED, it, it)


def orbit_trace(model: NewtonMapModel, z0, n: int) -> np.ndarray:
    """First n iterates (including the start); stops early on 0/0 points."""
    step = _scalar_step_fn(model)
    out = [np.asarray(z0, dtype=float)]
    cur = out[0]
    for _ in range(n):
        try:
            cur = step(cur)
        except NearIndeterminate:
            break
        if not np.all(np.isfinite(cur)):
            break
        out.append(cur)
    return np.asarray(out)


def trace_to_csv(trace: np.ndarray) -> str:
    lines = ["iter,x,y"]
    for i, (x, y) in enumerate(trace):
        lines.append(f"{i},{x!r},{y!r}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# projective points and indeterminacy inventory


@dataclass(frozen=True)
class ProjectivePoint:
    """Homogeneous coordinates scaled to max-abs 1, first significant
    coordinate positive."""

    x: float
    y: float
    z: float

    @classmethod
    def of(cls, x: float, y: float, z: float) -> "ProjectivePoint":
        v = np.array([x, y, z], dtype=float)
        m = np.abs(v).max()
        if m == 0:
            raise ValueError("zero vector is not a projective point")
        v = v / m
        for c in v:
            if abs(c) > 1e-12:
                if c < 0:
                    v = -v
                break
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def affine_point(cls, x: float, y: float) -> "ProjectivePoint":
        return cls.of(x, y, 1.0)

    @property
    def is_infinite(self) -> bool:
        return abs(self.z) <= 1e-12

    def affine(self) -> np.ndarray | None:
        if self.is_infinite:
            return None
        return np.array([self.x / self.z, self.y / self.z])


def find_system_roots(g1: Poly2, g2: Poly2, window=(-20.0, 20.0, -20.0, 20.0),
                      grid: int = 64, tol: float = 1e-10,
                      merge: float = 1e-6) -> list[np.ndarray]:
    """Real common zeros of two polynomials inside a window.

    Damped Newton iteration is started from every node of a uniform grid;
    converged points are validated against both residuals and merged when
    closer than ``merge``.
    """
    x_min, x_max, y_min, y_max = window
    gx = np.linspace(x_min, x_max, grid)
    gy = np.linspace(y_min, y_max, grid)
    xs, ys = np.meshgrid(gx, gy)
    x = xs.ravel().copy()
    y = ys.ravel().copy()
    g1x, g1y = g1.partial("x"), g1.partial("y")
    g2x, g2y = g2.partial("x"), g2.partial("y")
    clamp = 0.25 * max(x_max - x_min, y_max - y_min)
    for _ in range(60):
        a = g1x(x, y)
        b = g1y(x, y)
        c = g2x(x, y)
        d = g2y(x, y)
        v1 = g1(x, y)
        v2 = g2(x, y)
        det = a * d - b * c
        with np.errstate(divide="ignore", invalid="ignore"):
            sx = (d * v1 - b * v2) / det
            sy = (-c * v1 + a * v2) / det
        bad = ~np.isfinite(sx) | ~np.isfinite(sy)
        sx[bad] = 0.0
        sy[bad] = 0.0
        norm = np.hypot(sx, sy)
        scl = np.where(norm > clamp, clamp / np.where(norm == 0, 1, norm), 1.0)
        x = x - sx * scl
        y = y - sy * scl
    v1 = np.abs(g1(x, y))
    v2 = np.abs(g2(x, y))
    scale1 = 1.0 + g1.max_abs_coeff() * (1.0 + x * x + y * y) ** (max(g1.degree(), 1) / 2)
    scale2 = 1.0 + g2.max_abs_coeff() * (1.0 + x * x + y * y) ** (max(g2.degree(), 1) / 2)
    good = (v1 <= tol * scale1) & (v2 <= tol * scale2)
    good &= (x >= x_min - 1) & (x <= x_max + 1) & (y >= y_min - 1) & (y <= y_max + 1)
    pts = np.stack([x[good], y[good]], axis=1)
    out: list[np.ndarray] = []
    for p in pts[np.lexsort((pts[:, 1], pts[:, 0]))] if len(pts) else []:
        if all(np.abs(p - q).max() > merge for q in out):
            out.append(p)
    return out


def _real_direction_zeros(form: Poly2) -> list[ProjectivePoint]:
    """Real projective zeros [x:y:0] of a homogeneous form in (x, y)."""
    d = form.degree()
    if d < 0:
        return []
    coeffs = np.array([form.coeff(d - k, k) for k in range(d + 1)])
    out: list[ProjectivePoint] = []
    scale = np.abs(coeffs).max()
    # chart x = 1: F(1, t) with t = y/x; highest power first for np.roots
    c = np.where(np.abs(coeffs) > 1e-13 * scale, coeffs, 0.0)[::-1]
    nz = np.nonzero(c)[0]
    if len(nz) and nz[0] < len(c) - 1:
        for t in np.roots(c[nz[0]:]):
            if abs(t.imag) <= 1e-9 * (1.0 + abs(t.real)):
                pt = ProjectivePoint.of(1.0, float(t.real), 0.0)
                if not any(_proj_close(pt, o) for o in out):
                    out.append(pt)
    if abs(coeffs[-1]) <= 1e-13 * scale:  # y^d coefficient: zero at [0:1:0]
        out.append(ProjectivePoint.of(0.0, 1.0, 0.0))
    return out


def indeterminacy_points(model: NewtonMapModel,
                         window=(-20.0, 20.0, -20.0, 20.0),
                         grid: int = 64) -> list[ProjectivePoint]:
    """Points where the rational map has no continuous value.

    In the affine chart these are the common zeros of the denominator with
    either numerator (each pair solved separately and the results merged);
    on the line at infinity they are the common real direction zeros of the
    numerators' leading forms.  Identically zero numerators are skipped in
    the affine part and count as everywhere-zero at infinity.
    """
    found: list[np.ndarray] = []
    for g in (model.num_x, model.num_y):
        if g.is_zero():
            continue
        for p in find_system_roots(g, model.den, window=window, grid=grid):
            if all(np.abs(p - q).max() > 1e-6 for q in found):
                found.append(p)
    found.sort(key=lambda p: (p[0], p[1]))
    out = [ProjectivePoint.affine_point(p[0], p[1]) for p in found]

    tops = []
    for g in (model.num_x, model.num_y):
        if not g.is_zero():
            tops.append(g.top_form())
    if tops:
        zero_sets = [_real_direction_zeros(t) for t in tops]
        for pt in zero_sets[0]:
            ok = all(
                any(_proj_close(pt, other) for other in zs)
                for zs in zero_sets[1:]
            )
            if ok:
                out.append(pt)
    return out


def _proj_close(a: ProjectivePoint, b: ProjectivePoint,
                tol: float = 1e-8) -> bool:
    va = np.array([a.x, a.y, a.z])
    vb = np.array([b.x, b.y, b.z])
    return min(np.abs(va - vb).max(), np.abs(va + vb).max()) <= tol


# ----------------------------------------------------------------------
# invariant lines


def invariant_lines(model: NewtonMapModel, tol: float = 1e-8,
                    samples: int = 20) -> list[tuple[np.ndarray, str]]:
    """Lines kept invariant by the map: one through each pair of distinct
    real roots, plus the real trace of every conjugate complex root pair
    (ghost lines).  Every returned line is verified by sampling; needs the
    model's root set."""
    rs = model.root_set
    if rs is None:
        raise WrongType("model has no root set attached")

    def ev(pt):
        return eval_newton(model, pt)

    out: list[tuple[np.ndarray, str]] = []
    reals = rs.real
    for i in range(len(reals)):
        for j in range(i + 1, len(reals)):
            d = np.asarray(reals[j]) - np.asarray(reals[i])
            if np.abs(d).max() < 1e-12:
                continue
            normal = np.array([d[1], -d[0]])
            line = pencil_mod._normalize_line(
                np.array([normal[0], normal[1],
                          -float(normal @ np.asarray(reals[i]))]))
            pencil_mod._check_invariant_line(line, ev, tol, samples)
            out.append((line, "root-pair"))
    for line in pencil_mod.ghost_lines(_form_of(model), rs, newton_eval=ev,
                                       tol=tol):
        out.append((line, "ghost"))
    return out


def _form_of(model: NewtonMapModel):
    return model._cache.get("form")


# ----------------------------------------------------------------------
# degenerate (m, 1) reduction


@dataclass
class Reduced1D:
    """One-dimensional restriction of a Newton map whose pencil contains a
    linear member.

    ``newton(x)`` evaluates (x q' - q)/q' for the restricted polynomial q,
    ``embed`` carries the 1-D coordinate back into the original plane, and
    the coefficient arrays are highest-degree first.
    """

    poly: np.ndarray
    num: np.ndarray
    den: np.ndarray
    psi: AffineMap2

    def newton(self, x):
        return np.polyval(self.num, x) / np.polyval(self.den, x)

    def derivative(self, x):
        # N' = q q'' / (q')^2
        q = np.polyval(self.poly, x)
        dq = np.polyval(np.polyder(self.poly), x)
        ddq = np.polyval(np.polyder(self.poly, 2), x)
        return q * ddq / (dq * dq)

    def embed(self, x):
        return self.psi(np.array([x, 0.0]))

    def roots(self) -> np.ndarray:
        rr = np.roots(self.poly)
        rr = rr[np.abs(rr.imag) <= 1e-9 * (1.0 + np.abs(rr.real))].real
        return np.sort(rr)


def _linear_member(f: PlanarMap):
    """Linear pencil member and the recombination rows producing
    (other, linear)."""
    dp, dq = f.p.degree(), f.q.degree()
    if dq == 1:
        return f.q, np.eye(2)
    if dp == 1:
        return f.p, np.array([[0.0, 1.0], [1.0, 0.0]])
    # equal degrees with a hidden drop
    d = dp
    tp = np.array([f.p.coeff(d - k, k) for k in range(d + 1)])
    tq = np.array([f.q.coeff(d - k, k) for k in range(d + 1)])
    c = float(tq @ tp) / float(tp @ tp)
    r = (f.q - f.p.scale(c)).pruned(1e-12)
    return r, np.array([[1.0, 0.0], [-c, 1.0]])


def reduce_degenerate(f: PlanarMap):
    """Reduce a pencil-type (m, 1) map to its one-dimensional Newton map.

    The map is first normalized so its second component is exactly y; the
    restriction to the x-axis is then the classical one-variable Newton map
    of q(x) = p(x, 0).  Returns a Reduced1D; raises WrongType otherwise.
    """
    t = pencil_type(f)
    if t.lo != 1:
        raise WrongType(f"pencil type {tuple(t)} has no linear member")
    ell, phi = _linear_member(f)
    if ell.degree() != 1:
        raise WrongType("linear member extraction failed")
    alpha = ell.coeff(1, 0)
    beta = ell.coeff(0, 1)
    gamma = ell.coeff(0, 0)
    if abs(beta) >= abs(alpha):
        # x = X, y = (Y - gamma - alpha X) / beta
        psi = AffineMap2(np.array([[1.0, 0.0],
                                   [-alpha / beta, 1.0 / beta]]),
                         np.array([0.0, -gamma / beta]))
    else:
        # x = (Y - gamma - beta X)/alpha, y = X  (also swaps the roles)
        psi = AffineMap2(np.array([[-beta / alpha, 1.0 / alpha],
                                   [1.0, 0.0]]),
                         np.array([-gamma / alpha, 0.0]))
    g = f.recombine(phi).compose_affine(psi)
    # g = (other', linear') with linear' == y
    if not g.q.allclose(Poly2.var_y(), tol=1e-9):
        raise VerificationFailed("normalization did not produce (p, y)")
    deg = g.p.degree()
    q_coeffs = np.array([g.p.coeff(k, 0) for k in range(deg, -1, -1)])
    dq = np.polyder(q_coeffs)
    num = np.polysub(np.polymul([1.0, 0.0], dq), q_coeffs)
    return Reduced1D(poly=q_coeffs, num=num, den=dq, psi=psi)


# ----------------------------------------------------------------------
# degeneracy curve (zero set of det Df)


_MS_EDGES = {  # case index -> list of (edge, edge) segments
    1: [(3, 2)], 2: [(1, 2)], 3: [(3, 1)], 4: [(0, 1)],
    6: [(0, 2)], 7: [(3, 0)], 8: [(0, 3)],
    9: [(0, 2)], 11: [(0, 1)], 12: [(1, 3)],
    13: [(1, 2)], 14: [(2, 3)],
}
# edges: 0 = top (i,j)-(i,j+1), 1 = right (i,j+1)-(i+1,j+1),
#        2 = bottom (i+1,j)-(i+1,j+1), 3 = left (i,j)-(i+1,j)


def degeneracy_curve(model: NewtonMapModel, window, resolution: int = 256,
                     max_resid: float = 1e-6) -> list[np.ndarray]:
    """Polyline chains tracing den = 0 inside a rectangular window.

    Standard marching squares on a (resolution+1)^2 sample grid; every
    crossing is then refined by bisection along its cell edge so emitted
    vertices satisfy |den| < ``max_resid``.  Saddle cells are disambiguated
    with the cell-center sample.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    x_min, x_max, y_min, y_max = window
    gx = np.linspace(x_min, x_max, resolution + 1)
    gy = np.linspace(y_min, y_max, resolution + 1)
    xs, ys = np.meshgrid(gx, gy, indexing="ij")
    vals = model.den(xs, ys)
    pos = vals > 0.0

    segs = []  # (edge_key_a, edge_key_b) with edge key = (i, j, axis)
    edge_set = {}

    def edge_key(i, j, e):
        # axis 0: vertical edge from (i,j) to (i,j+1); axis 1: horizontal
        if e == 0:
            return (i, j, 0)
        if e == 1:
            return (i, j + 1, 1)
        if e == 2:
            return (i + 1, j, 0)
        return (i, j, 1)

    for i in range(resolution):
        for j in range(resolution):
            idx = (pos[i, j] << 3) | (pos[i, j + 1] << 2) \
                | (pos[i + 1, j + 1] << 1) | int(pos[i + 1, j])
            if idx in (0, 15):
                continue
            if idx in (5, 10):
                # saddle cell: the center sample decides which diagonal the
                # sign region connects through
                cx = 0.5 * (gx[i] + gx[i + 1])
                cy = 0.5 * (gy[j] + gy[j + 1])
                center_pos = model.den(cx, cy) > 0.0
                if center_pos == pos[i, j]:
                    pairs = [(0, 1), (2, 3)]
                else:
                    pairs = [(3, 0), (1, 2)]
            else:
                pairs = _MS_EDGES[idx]
            for ea, eb in pairs:
                ka, kb = edge_key(i, j, ea), edge_key(i, j, eb)
                segs.append((ka, kb))
                edge_set[ka] = None
                edge_set[kb] = None

    if not segs:
        return []

    # refine every crossing edge by bisection
    keys = sorted(edge_set)
    a_pts = np.empty((len(keys), 2))
    b_pts = np.empty((len(keys), 2))
    for idx, (i, j, axis) in enumerate(keys):
        if axis == 0:
            a_pts[idx] = (gx[i], gy[j])
            b_pts[idx] = (gx[i], gy[j + 1])
        else:
            a_pts[idx] = (gx[i], gy[j])
            b_pts[idx] = (gx[i + 1], gy[j])
    fa = model.den(a_pts[:, 0], a_pts[:, 1])
    for _ in range(80):
        mid = 0.5 * (a_pts + b_pts)
        fm = model.den(mid[:, 0], mid[:, 1])
        take_left = (fa > 0) == (fm > 0)
        a_pts = np.where(take_left[:, None], mid, a_pts)
        fa = np.where(take_left, fm, fa)
        b_pts = np.where(take_left[:, None], b_pts, mid)
    verts = 0.5 * (a_pts + b_pts)
    resid = np.abs(model.den(verts[:, 0], verts[:, 1]))
    vert_of = {}
    ok = {}
    for idx, k in enumerate(keys):
        vert_of[k] = verts[idx]
        ok[k] = resid[idx] < max_resid

    segs = [(a, b) for a, b in segs if ok[a] and ok[b]]

    # stitch segments into chains
    adj: dict = {}
    for a, b in segs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    visited = set()
    chains = []
    endpoints = sorted(k for k, nbrs in adj.items() if len(nbrs) == 1)
    seeds = endpoints + sorted(adj)
    for seed in seeds:
        if seed in visited or seed not in adj:
            continue
        chain = [seed]
        visited.add(seed)
        cur = seed
        while True:
            nxt = [k for k in adj[cur] if k not in visited]
            if not nxt:
                break
            cur = nxt[0]
            visited.add(cur)
            chain.append(cur)
        if len(chain) > 1:
            chains.append(np.array([vert_of[k] for k in chain]))
    return chains
