"""Classification of quadratic planar pencils into canonical families.

A pair of degree-2 polynomials in generic position is affinely conjugate to
exactly one of two canonical shapes:

* parabolic family  (y - x^2, (x - x0) - (y - y0)^2)
* hyperbolic family (xy - 1, (x - x0)^2 - a (y - y0)^2 - 1), a > 0

The reduction is constructive: it returns the affine change of coordinates
and the linear recombination of components that carry the input onto the
canonical representative, which is what makes the Newton dynamics of the two
maps identical up to that coordinate change.  The module also computes all
four (complex) roots of a canonical form and the real trace lines of its
conjugate complex root pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import NotGeneric, VerificationFailed, WrongDegree, WrongType
from .poly2 import AffineMap2, PlanarMap, Poly2, pencil_type

_GENERIC_ROOT_SEP = 1e-7  # all four roots must be pairwise farther than this


# ----------------------------------------------------------------------
# canonical families


@dataclass(frozen=True)
class Parabolic:
    """Canonical pair (y - x^2, (x - x0) - (y - y0)^2)."""

    x0: float
    y0: float

    def planar_map(self) -> PlanarMap:
        return parabolic_map(self.x0, self.y0)

    @property
    def kind(self) -> str:
        return "parabolic"

    def params(self) -> dict:
        return {"x0": self.x0, "y0": self.y0}


@dataclass(frozen=True)
class Hyperbolic:
    """Canonical pair (xy - 1, (x - x0)^2 - a (y - y0)^2 - 1), a > 0."""

    x0: float
    y0: float
    a: float

    def planar_map(self) -> PlanarMap:
        return hyperbolic_map(self.x0, self.y0, self.a)

    @property
    def kind(self) -> str:
        return "hyperbolic"

    def params(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "a": self.a}


@dataclass(frozen=True)
class DegenerateLine:
    """Placeholder for pencils whose reduction collapses onto a line pair."""

    p: Poly2

    @property
    def kind(self) -> str:
        return "degenerate-line"


NormalForm = Union[Parabolic, Hyperbolic, DegenerateLine]


def parabolic_map(x0: float, y0: float) -> PlanarMap:
    p = Poly2({(0, 1): 1.0, (2, 0): -1.0})
    q = Poly2({(1, 0): 1.0, (0, 2): -1.0, (0, 1): 2.0 * y0,
               (0, 0): -x0 - y0 * y0})
    return PlanarMap(p, q)


def hyperbolic_map(x0: float, y0: float, a: float) -> PlanarMap:
    p = Poly2({(1, 1): 1.0, (0, 0): -1.0})
    q = Poly2({(2, 0): 1.0, (1, 0): -2.0 * x0, (0, 2): -a,
               (0, 1): 2.0 * a * y0,
               (0, 0): x0 * x0 - a * y0 * y0 - 1.0})
    return PlanarMap(p, q)


def form_map(form: NormalForm) -> PlanarMap:
    if isinstance(form, (Parabolic, Hyperbolic)):
        return form.planar_map()
    raise WrongType("no planar map for a degenerate normal form")


# ----------------------------------------------------------------------
# conic classification


def classify_conic(p: Poly2) -> str:
    """Type of the generic level set: elliptic, hyperbolic, parabolic,
    or degenerate (rank-deficient conic matrix)."""
    if p.degree() != 2:
        raise WrongDegree(f"degree {p.degree()} polynomial is not a conic")
    a, b, c = p.quad_form()
    scale = max(abs(a), abs(b), abs(c))
    disc = a * c - b * b
    sv = np.linalg.svd(p.conic_matrix(), compute_uv=False)
    if sv[2] <= 1e-12 * max(float(sv[0]), 1e-300):
        return "degenerate"  # rank <= 2: line pairs, double lines, points
    if disc > 1e-12 * scale * scale:
        return "elliptic"
    if disc < -1e-12 * scale * scale:
        return "hyperbolic"
    return "parabolic"


# ----------------------------------------------------------------------
# roots


@dataclass
class RootSet:
    """Real roots plus conjugate complex root pairs of a quadratic pair."""

    real: list[np.ndarray]
    complex_pairs: list[tuple[np.ndarray, np.ndarray]]

    @property
    def n_real(self) -> int:
        return len(self.real)

    def all_complex(self) -> list[np.ndarray]:
        out = [np.asarray(r, dtype=complex) for r in self.real]
        for r, rbar in self.complex_pairs:
            out.extend([r, rbar])
        return out


def root_quartic_coeffs(form: NormalForm) -> np.ndarray:
    """Monic quartic in x whose roots are the x-coordinates of the roots."""
    if isinstance(form, Parabolic):
        return np.array([1.0, 0.0, -2.0 * form.y0, -1.0,
                         form.y0 ** 2 + form.x0])
    if isinstance(form, Hyperbolic):
        return np.array([1.0, -2.0 * form.x0,
                         form.x0 ** 2 - 1.0 - form.a * form.y0 ** 2,
                         2.0 * form.a * form.y0, -form.a])
    raise WrongType("no root quartic for a degenerate normal form")


def _polish_quartic(coeffs: np.ndarray, z: complex, iters: int = 12) -> complex:
    der = np.polyder(coeffs)
    for _ in range(iters):
        dv = np.polyval(der, z)
        if dv == 0:
            break
        step = np.polyval(coeffs, z) / dv
        z = z - step
        if abs(step) < 1e-16 * (1.0 + abs(z)):
            break
    return z


def _polish_real_root(f: PlanarMap, z: np.ndarray, iters: int = 8) -> np.ndarray:
    px, py = f.p.partial("x"), f.p.partial("y")
    qx, qy = f.q.partial("x"), f.q.partial("y")
    z = np.asarray(z, dtype=float)
    for _ in range(iters):
        jac = np.array([[px.eval_at(z), py.eval_at(z)],
                        [qx.eval_at(z), qy.eval_at(z)]])
        val = f(z)
        try:
            step = np.linalg.solve(jac, val)
        except np.linalg.LinAlgError:
            break
        z = z - step
        if np.abs(step).max() < 1e-15 * (1.0 + np.abs(z).max()):
            break
    return z


def real_roots(form: NormalForm) -> RootSet:
    """All roots of the canonical pair, split into real ones and conjugate
    complex pairs.  Real roots are polished on the original system and sorted
    lexicographically by (x, y)."""
    coeffs = root_quartic_coeffs(form)
    xs = np.roots(coeffs)
    f = form_map(form)
    parabolic = isinstance(form, Parabolic)

    def lift(x):
        return x * x if parabolic else 1.0 / x

    real_pts: list[np.ndarray] = []
    complex_roots: list[np.ndarray] = []
    for x in xs:
        x = _polish_quartic(coeffs, complex(x))
        if abs(x.imag) <= 1e-8 * (1.0 + abs(x.real)):
            pt = _polish_real_root(f, np.array([x.real, lift(x).real]))
            real_pts.append(pt)
        else:
            complex_roots.append(np.array([x, lift(x)], dtype=complex))

    real_pts.sort(key=lambda r: (r[0], r[1]))

    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    used = [False] * len(complex_roots)
    order = sorted(range(len(complex_roots)),
                   key=lambda k: (complex_roots[k][0].real,
                                  abs(complex_roots[k][0].imag)))
    for a_idx in order:
        if used[a_idx]:
            continue
        ra = complex_roots[a_idx]
        best, best_d = None, np.inf
        for b_idx in order:
            if b_idx == a_idx or used[b_idx]:
                continue
            d = np.abs(ra - np.conj(complex_roots[b_idx])).max()
            if d < best_d:
                best, best_d = b_idx, d
        if best is not None and best_d <= 1e-8 * (1.0 + np.abs(ra).max()):
            used[a_idx] = used[best] = True
            first = ra if ra[0].imag > 0 else complex_roots[best]
            pairs.append((first, np.conj(first)))
    return RootSet(real=real_pts, complex_pairs=pairs)


# ----------------------------------------------------------------------
# ghost lines


def _normalize_line(line: np.ndarray) -> np.ndarray:
    line = np.asarray(line, dtype=float)
    m = np.abs(line).max()
    if m == 0:
        raise ValueError("zero line")
    line = line / m
    for c in line:
        if abs(c) > 1e-12:
            if c < 0:
                line = -line
            break
    return line


def ghost_lines(form: NormalForm, roots: RootSet,
                newton_eval: Callable[[np.ndarray], np.ndarray] | None = None,
                tol: float = 1e-8) -> list[np.ndarray]:
    """Real trace lines of the conjugate complex root pairs.

    Each line is returned as homogeneous coefficients (A, B, C) meaning
    A x + B y + C = 0, normalized to max-abs 1 with the first significant
    coefficient positive.  When ``newton_eval`` is supplied, each line is
    checked to be invariant under the map by sampling; a failing candidate
    raises VerificationFailed.
    """
    lines = []
    for r, _rbar in roots.complex_pairs:
        a = np.real(r)
        b = np.imag(r)
        if np.abs(b).max() <= 1e-12 * (1.0 + np.abs(a).max()):
            continue
        normal = np.array([b[1], -b[0]])
        line = _normalize_line(np.array([normal[0], normal[1],
                                         -float(normal @ a)]))
        if newton_eval is not None:
            _check_invariant_line(line, newton_eval, tol)
        lines.append(line)
    return lines


def _check_invariant_line(line: np.ndarray,
                          newton_eval: Callable[[np.ndarray], np.ndarray],
                          tol: float, samples: int = 20) -> None:
    a, b, c = line
    direction = np.array([-b, a])
    direction = direction / np.linalg.norm(direction)
    n2 = math.hypot(a, b)
    if abs(a) >= abs(b):
        base = np.array([-c / a, 0.0])
    else:
        base = np.array([0.0, -c / b])
    checked = 0
    for t in np.linspace(-3.1, 3.3, 4 * samples):
        pt = base + t * direction
        try:
            img = newton_eval(pt)
        except Exception:
            continue
        if not np.all(np.isfinite(img)) or np.abs(img).max() > 1e6:
            continue
        resid = abs(a * img[0] + b * img[1] + c) / n2
        if resid > tol * (1.0 + np.abs(img).max()):
            raise VerificationFailed(
                f"line {line} not invariant: residual {resid:.3e} at {pt}")
        checked += 1
        if checked >= samples:
            return
    if checked < samples // 2:
        raise VerificationFailed(f"could not sample line {line}")


# ----------------------------------------------------------------------
# reduction to normal form


@dataclass(frozen=True)
class ConjugacyWitness:
    """Pair (psi, phi) with phi o f o psi equal to the canonical map."""

    psi: AffineMap2
    phi: np.ndarray

    def apply(self, f: PlanarMap) -> PlanarMap:
        return f.compose_affine(self.psi).recombine(self.phi)

    def residual(self, f: PlanarMap, form: NormalForm) -> float:
        g = self.apply(f)
        target = form_map(form)
        r = 0.0
        for got, want in ((g.p, target.p), (g.q, target.q)):
            keys = set(got.terms) | set(want.terms)
            for k in keys:
                r = max(r, abs(got.terms.get(k, 0.0) - want.terms.get(k, 0.0)))
        return r


def _square_root_of_form(top: Poly2) -> tuple[float, np.ndarray]:
    """Write a rank-one quadratic form as s*(alpha x + beta y)^2."""
    a, b, c = top.quad_form()
    if abs(a) >= abs(c):
        s = math.copysign(1.0, a)
        alpha = math.sqrt(abs(a))
        beta = b / (s * alpha)
    else:
        s = math.copysign(1.0, c)
        beta = math.sqrt(abs(c))
        alpha = b / (s * beta)
    return s, np.array([alpha, beta])


def _hyperbolic_factors(top: Poly2) -> tuple[float, np.ndarray, np.ndarray]:
    """Factor an indefinite form as k * l1 * l2 with independent l1, l2."""
    a, b, c = top.quad_form()
    if abs(a) < 1e-14 * max(abs(b), abs(c), 1e-300) and \
       abs(c) < 1e-14 * max(abs(b), abs(a), 1e-300):
        return 2.0 * b, np.array([1.0, 0.0]), np.array([0.0, 1.0])
    disc = b * b - a * c
    if disc <= 0:
        raise NotGeneric("quadratic form is not indefinite")
    root = math.sqrt(disc)
    if abs(a) >= abs(c):
        # a(x - r1 y)(x - r2 y)
        r1 = (-b + root) / a
        r2 = (-b - root) / a
        return a, np.array([1.0, -r1]), np.array([1.0, -r2])
    r1 = (-b + root) / c
    r2 = (-b - root) / c
    return c, np.array([-r1, 1.0]), np.array([-r2, 1.0])


def _member(f: PlanarMap, mu: float, nu: float) -> Poly2:
    return (f.p.scale(mu) + f.q.scale(nu)).pruned(1e-13)


def _parabolic_member_directions(f: PlanarMap):
    """Projective solutions (mu, nu) of disc(mu*top_p + nu*top_q) = 0.

    Returns None when no real solution exists (all members hyperbolic),
    otherwise a list of two direction pairs.  A double root means the pencil
    sits on the boundary of the classification and is rejected as
    non-generic.
    """
    ap, bp, cp = f.p.top_form().quad_form()
    aq, bq, cq = f.q.top_form().quad_form()
    A = ap * cp - bp * bp
    C = aq * cq - bq * bq
    B = ap * cq + aq * cp - 2.0 * bp * bq
    scale = max(abs(A), abs(B), abs(C), 1e-300)
    disc = B * B - 4.0 * A * C
    if abs(A) <= 1e-13 * scale:
        if abs(B) <= 1e-13 * scale:
            raise NotGeneric("pencil discriminant is degenerate")
        # roots: (mu, nu) = (1, 0) and B*mu + C*nu = 0
        return [(1.0, 0.0), (-C, B)]
    if disc < -1e-13 * scale * scale:
        return None
    if disc <= 1e-13 * scale * scale:
        raise NotGeneric("pencil has a double parabolic member")
    root = math.sqrt(disc)
    # stable quadratic roots for mu/nu
    qq = -0.5 * (B + math.copysign(root, B))
    t1 = qq / A
    t2 = C / qq if qq != 0 else 0.0
    return [(t1, 1.0), (t2, 1.0)]


def _coeffs_1d(m: Poly2):
    return (m.coeff(2, 0), m.coeff(1, 1), m.coeff(0, 2),
            m.coeff(1, 0), m.coeff(0, 1), m.coeff(0, 0))


def _assert_shape(m: Poly2, zero_keys, scale, where):
    for k in zero_keys:
        if abs(m.coeff(*k)) > 1e-8 * (1.0 + scale):
            raise VerificationFailed(
                f"{where}: unexpected coefficient {k} = {m.coeff(*k):.3e}")


def _reduce_parabolic(f: PlanarMap, dirs) -> tuple[Parabolic, ConjugacyWitness]:
    phi = np.array([[dirs[0][0], dirs[0][1]],
                    [dirs[1][0], dirs[1][1]]], dtype=float)
    m1 = _member(f, *dirs[0])
    m2 = _member(f, *dirs[1])
    s1, l1 = _square_root_of_form(m1.top_form())
    s2, l2 = _square_root_of_form(m2.top_form())
    mat = np.array([l1, l2])
    if abs(np.linalg.det(mat)) < 1e-12:
        raise NotGeneric("parabolic members share their axis direction")
    psi = AffineMap2.linear(np.linalg.inv(mat))
    m1 = m1.compose_affine(psi)
    m2 = m2.compose_affine(psi)
    scale = max(m1.max_abs_coeff(), m2.max_abs_coeff())
    _assert_shape(m1, [(1, 1), (0, 2)], scale, "parabolic step 1")

    # m1 = s1 U^2 + a1 U + b1 V + c1  ->  sigma (Y - X^2)
    s1 = m1.coeff(2, 0)
    a1, b1, c1 = m1.coeff(1, 0), m1.coeff(0, 1), m1.coeff(0, 0)
    if abs(b1) <= 1e-10 * (1.0 + scale):
        raise NotGeneric("first parabolic member is a univariate quadratic")
    h = a1 / (2.0 * s1)
    e1 = c1 - a1 * a1 / (4.0 * s1)
    psi2 = AffineMap2(np.array([[1.0, 0.0], [0.0, -s1 / b1]]),
                      np.array([-h, -e1 / b1]))
    psi = psi.compose(psi2)
    sigma = -s1
    m2 = m2.compose_affine(psi2)
    _assert_shape(m2, [(2, 0), (1, 1)], scale, "parabolic step 2")

    # m2 = s2'' Y^2 + a2 X + b2 Y + c2  ->  x0, y0 after a cube-root scaling
    s2pp = m2.coeff(0, 2)
    a2, b2, c2 = m2.coeff(1, 0), m2.coeff(0, 1), m2.coeff(0, 0)
    if abs(a2) <= 1e-10 * (1.0 + scale) or abs(s2pp) <= 1e-10 * (1.0 + scale):
        raise NotGeneric("second parabolic member degenerates")
    y0_pre = -b2 / (2.0 * s2pp)
    e2 = c2 - b2 * b2 / (4.0 * s2pp)
    alpha = float(np.cbrt(-a2 / s2pp))
    psi3 = AffineMap2.linear(np.diag([alpha, alpha * alpha]))
    psi = psi.compose(psi3)
    x0 = -e2 / (a2 * alpha)
    y0 = y0_pre / (alpha * alpha)
    phi = np.diag([1.0 / (sigma * alpha * alpha),
                   1.0 / (a2 * alpha)]) @ phi

    form = Parabolic(x0, y0)
    witness = ConjugacyWitness(psi, phi)

    # canonical representative of the pair under swapping the two members
    if x0 + y0 < 0.0:
        chi = AffineMap2(np.array([[0.0, 1.0], [1.0, 0.0]]),
                         np.array([x0, y0]))
        witness = ConjugacyWitness(psi.compose(chi),
                                   np.array([[0.0, 1.0], [1.0, 0.0]]) @ phi)
        form = Parabolic(-y0, -x0)
    return form, witness


def _reduce_hyperbolic(f: PlanarMap) -> tuple[Hyperbolic, ConjugacyWitness]:
    phi = np.eye(2)
    m1, m2 = f.p, f.q
    k, l1, l2 = _hyperbolic_factors(m1.top_form())
    mat = np.array([l1, l2])
    psi = AffineMap2.linear(np.linalg.inv(mat))
    m1 = m1.compose_affine(psi)
    m2 = m2.compose_affine(psi)
    scale = max(m1.max_abs_coeff(), m2.max_abs_coeff())
    _assert_shape(m1, [(2, 0), (0, 2)], scale, "hyperbolic step 1")

    # m1 = k UV + a1 U + b1 V + c1  ->  sigma (XY - 1)
    k = m1.coeff(1, 1)
    a1, b1, c1 = m1.coeff(1, 0), m1.coeff(0, 1), m1.coeff(0, 0)
    e1 = c1 - a1 * b1 / k
    if abs(e1) <= 1e-10 * (1.0 + scale):
        raise NotGeneric("first member is a pair of lines")
    psi_t = AffineMap2.translation([-b1 / k, -a1 / k])
    t = -e1 / k
    psi_sc = AffineMap2.linear(np.diag([t, 1.0]))
    step = psi_t.compose(psi_sc)
    psi = psi.compose(step)
    sigma = -e1
    m1 = m1.compose_affine(step)
    m2 = m2.compose_affine(step)

    # kill the cross term of the second member with the first
    lam = m2.coeff(1, 1) / sigma
    m2 = (m2 - m1.scale(lam)).pruned(1e-13)
    phi = np.array([[1.0, 0.0], [-lam, 1.0]]) @ phi
    _assert_shape(m2, [(1, 1)], scale, "hyperbolic step 2")

    A, _, C, d, e, g = _coeffs_1d(m2)
    if A * C >= -1e-12 * (1.0 + scale) ** 2:
        raise NotGeneric("second member is not an independent hyperbola")
    if A < 0:
        m2 = -m2
        phi = np.diag([1.0, -1.0]) @ phi
        A, _, C, d, e, g = _coeffs_1d(m2)
    u = -d / (2.0 * A)
    v = -e / (2.0 * C)
    w = g - d * d / (4.0 * A) - e * e / (4.0 * C)
    if abs(w) <= 1e-10 * (1.0 + scale):
        raise NotGeneric("second member passes through the base hyperbola")
    if w > 0:
        swap = AffineMap2.swap_axes()
        psi = psi.compose(swap)
        m2 = (-m2.compose_affine(swap)).pruned(1e-13)
        phi = np.diag([1.0, -1.0]) @ phi
        A, _, C, d, e, g = _coeffs_1d(m2)
        u = -d / (2.0 * A)
        v = -e / (2.0 * C)
        w = g - d * d / (4.0 * A) - e * e / (4.0 * C)

    k2 = math.sqrt(-w / A)
    psi4 = AffineMap2.linear(np.diag([k2, 1.0 / k2]))
    psi = psi.compose(psi4)
    x0 = u / k2
    y0 = k2 * v
    a = C / (w * k2 * k2)
    phi = np.diag([1.0 / sigma, -1.0 / w]) @ phi

    if x0 < 0.0 or (x0 == 0.0 and y0 < 0.0):
        psi = psi.compose(AffineMap2.linear(-np.eye(2)))
        x0, y0 = -x0, -y0

    return Hyperbolic(x0, y0, a), ConjugacyWitness(psi, phi)


def reduce_to_normal_form(f: PlanarMap) -> tuple[NormalForm, ConjugacyWitness]:
    """Constructive affine reduction of a generic (2,2) pair to its
    canonical family, returning the normal form and the witness maps.

    Raises WrongType for pencils that are not of type (2,2) and NotGeneric
    when roots collide or the reduction degenerates.
    """
    t = pencil_type(f)
    if t != (2, 2):
        raise WrongType(f"pencil type {tuple(t)} is not (2, 2)")
    dirs = _parabolic_member_directions(f)
    if dirs is None:
        form, witness = _reduce_hyperbolic(f)
    else:
        form, witness = _reduce_parabolic(f, dirs)

    resid = witness.residual(f, form)
    scale = 1.0 + max(form_map(form).p.max_abs_coeff(),
                      form_map(form).q.max_abs_coeff())
    if resid > 1e-9 * scale:
        raise VerificationFailed(
            f"normal-form witness residual {resid:.3e} too large")

    roots = real_roots(form).all_complex()
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if np.abs(roots[i] - roots[j]).max() < _GENERIC_ROOT_SEP:
                raise NotGeneric("map has (nearly) multiple roots")
    return form, witness
