"""Sparse bivariate polynomials, affine changes of variables, and pencils.

A polynomial is a mapping from exponent pairs ``(i, j)`` (the monomial
``x**i * y**j``) to float coefficients; the zero polynomial stores no terms.
Arithmetic keeps results canonical (no stored zero coefficients) and iterates
terms in sorted order, so repeated runs produce bit-identical floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import DegeneratePencil, ParseError

# Products and affine substitutions drop coefficients below this fraction of
# the largest one; plain sums/differences are left untouched.
PRUNE_REL = 1e-14


class Poly2:
    """Real polynomial in two variables, stored sparsely."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], float] | None = None):
        out: dict[tuple[int, int], float] = {}
        if terms:
            for (i, j), c in terms.items():
                i, j = int(i), int(j)
                if i < 0 or j < 0:
                    raise ValueError("negative exponent in polynomial term")
                c = float(c)
                if c != 0.0:
                    out[(i, j)] = c
        self.terms = out

    # ------------------------------------------------------------------
    # constructors
    @classmethod
    def zero(cls) -> "Poly2":
        return cls()

    @classmethod
    def const(cls, c: float) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def var_x(cls) -> "Poly2":
        return cls({(1, 0): 1.0})

    @classmethod
    def var_y(cls) -> "Poly2":
        return cls({(0, 1): 1.0})

    # ------------------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, int], float]]:
        return [(k, self.terms[k]) for k in sorted(self.terms)]

    def degree(self) -> int:
        """Total degree, or -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(i + j for i, j in self.terms)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self.terms

    # ------------------------------------------------------------------
    # arithmetic
    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0.0) + c
            if s == 0.0:
                out.pop(k, None)
            else:
                out[k] = s
        return Poly2(out)

    def __sub__(self, other: "Poly2") -> "Poly2":
        return self + (-other)

    def __neg__(self) -> "Poly2":
        return Poly2({k: -c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        out: dict[tuple[int, int], float] = {}
        for (i1, j1), c1 in self.sorted_terms():
            for (i2, j2), c2 in other.sorted_terms():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0.0) + c1 * c2
        return Poly2(out).pruned()

    __rmul__ = __mul__

    def scale(self, c: float) -> "Poly2":
        if c == 0.0:
            return Poly2()
        return Poly2({k: c * v for k, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly2":
        if n < 0:
            raise ValueError("negative power")
        out = Poly2.const(1.0)
        for _ in range(n):
            out = out * self
        return out

    def pruned(self, rel: float = PRUNE_REL) -> "Poly2":
        """Drop round-off residue relative to the largest coefficient."""
        m = self.max_abs_coeff()
        if m == 0.0:
            return Poly2()
        cut = rel * m
        return Poly2({k: c for k, c in self.terms.items() if abs(c) > cut})

    # ------------------------------------------------------------------
    # evaluation and calculus
    def __call__(self, x, y):
        """Evaluate at scalars or broadcasting numpy arrays."""
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        shape = np.broadcast(xa, ya).shape
        out = np.zeros(shape)
        if self.terms:
            imax = max(i for i, _ in self.terms)
            jmax = max(j for _, j in self.terms)
            xp = [np.ones(shape)]
            for _ in range(imax):
                xp.append(xp[-1] * xa)
            yp = [np.ones(shape)]
            for _ in range(jmax):
                yp.append(yp[-1] * ya)
            for (i, j), c in self.sorted_terms():
                out += c * xp[i] * yp[j]
        if out.ndim == 0:
            return float(out)
        return out

    def eval_at(self, pt) -> float:
        """Evaluate at a single 2-vector."""
        return float(self(pt[0], pt[1]))

    def partial(self, axis: str) -> "Poly2":
        """Formal partial derivative along ``'x'`` or ``'y'``."""
        if axis not in ("x", "y"):
            raise ValueError("axis must be 'x' or 'y'")
        out: dict[tuple[int, int], float] = {}
        for (i, j), c in self.terms.items():
            if axis == "x" and i > 0:
                out[(i - 1, j)] = c * i
            elif axis == "y" and j > 0:
                out[(i, j - 1)] = c * j
        return Poly2(out)

    def compose_affine(self, psi: "AffineMap2") -> "Poly2":
        """Substitute ``(x, y) <- psi(X, Y)`` and expand."""
        a, u = psi.matrix, psi.shift
        lx = Poly2({(1, 0): a[0, 0], (0, 1): a[0, 1], (0, 0): u[0]})
        ly = Poly2({(1, 0): a[1, 0], (0, 1): a[1, 1], (0, 0): u[1]})
        if not self.terms:
            return Poly2()
        imax = max(i for i, _ in self.terms)
        jmax = max(j for _, j in self.terms)
        xp = [Poly2.const(1.0)]
        for _ in range(imax):
            xp.append(xp[-1] * lx)
        yp = [Poly2.const(1.0)]
        for _ in range(jmax):
            yp.append(yp[-1] * ly)
        out = Poly2()
        for (i, j), c in self.sorted_terms():
            out = out + (xp[i] * yp[j]).scale(c)
        return out.pruned()

    # ------------------------------------------------------------------
    # structure helpers
    def homogeneous_part(self, d: int) -> "Poly2":
        return Poly2({k: c for k, c in self.terms.items() if k[0] + k[1] == d})

    def top_form(self) -> "Poly2":
        return self.homogeneous_part(self.degree())

    def coeff(self, i: int, j: int) -> float:
        return self.terms.get((i, j), 0.0)

    def quad_form(self) -> tuple[float, float, float]:
        """Quadratic part as (a, b, c) with a*x^2 + 2b*xy + c*y^2."""
        return (self.coeff(2, 0), self.coeff(1, 1) / 2.0, self.coeff(0, 2))

    def conic_matrix(self) -> np.ndarray:
        """Symmetric 3x3 matrix of a degree-<=2 polynomial in (x, y, 1)."""
        a, b, c = self.quad_form()
        d = self.coeff(1, 0) / 2.0
        e = self.coeff(0, 1) / 2.0
        f = self.coeff(0, 0)
        return np.array([[a, b, d], [b, c, e], [d, e, f]])

    # ------------------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Poly2) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.sorted_terms()))

    def allclose(self, other: "Poly2", tol: float = 1e-9) -> bool:
        keys = set(self.terms) | set(other.terms)
        scale = 1.0 + max(self.max_abs_coeff(), other.max_abs_coeff())
        return all(
            abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= tol * scale
            for k in keys
        )

    def __repr__(self):
        return f"Poly2({format_poly(self)!r})"


# ----------------------------------------------------------------------
# affine maps of the plane


@dataclass(frozen=True)
class AffineMap2:
    """Affine map z -> A z + u of the real plane."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float).reshape(2, 2)
        u = np.array(self.shift, dtype=float).reshape(2)
        a.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "shift", u)

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def linear(cls, a) -> "AffineMap2":
        return cls(np.asarray(a, dtype=float), np.zeros(2))

    @classmethod
    def translation(cls, u) -> "AffineMap2":
        return cls(np.eye(2), np.asarray(u, dtype=float))

    @classmethod
    def swap_axes(cls) -> "AffineMap2":
        return cls(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2))

    @property
    def det(self) -> float:
        a = self.matrix
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])

    def is_invertible(self, tol: float = 1e-14) -> bool:
        return abs(self.det) > tol * (1.0 + float(np.abs(self.matrix).max()) ** 2)

    def __call__(self, pt):
        p = np.asarray(pt, dtype=float)
        return p @ self.matrix.T + self.shift

    def compose(self, other: "AffineMap2") -> "AffineMap2":
        """Return self after other: (self o other)(z) = self(other(z))."""
        return AffineMap2(self.matrix @ other.matrix,
                          self.matrix @ other.shift + self.shift)

    def inverse(self) -> "AffineMap2":
        if not self.is_invertible():
            raise ValueError("affine map is not invertible")
        a = np.linalg.inv(self.matrix)
        return AffineMap2(a, -a @ self.shift)


# ----------------------------------------------------------------------
# planar maps and pencils


@dataclass(frozen=True)
class PlanarMap:
    """Pair of bivariate polynomials viewed as a map of the plane."""

    p: Poly2
    q: Poly2

    def __post_init__(self):
        if self.p.is_zero() and self.q.is_zero():
            raise ValueError("both components are zero")

    def __call__(self, pt):
        p = np.asarray(pt, dtype=float)
        return np.stack([self.p(p[..., 0], p[..., 1]),
                         self.q(p[..., 0], p[..., 1])], axis=-1)

    def det_df(self) -> Poly2:
        """Jacobian determinant p_x q_y - p_y q_x as a polynomial."""
        return (self.p.partial("x") * self.q.partial("y")
                - self.p.partial("y") * self.q.partial("x")).pruned()

    def compose_affine(self, psi: AffineMap2) -> "PlanarMap":
        return PlanarMap(self.p.compose_affine(psi), self.q.compose_affine(psi))

    def recombine(self, phi) -> "PlanarMap":
        """Apply a linear map phi to the components: (p, q) -> phi @ (p, q)."""
        m = np.asarray(phi, dtype=float)
        return PlanarMap(self.p.scale(m[0, 0]) + self.q.scale(m[0, 1]),
                         self.p.scale(m[1, 0]) + self.q.scale(m[1, 1]))


class PencilType(NamedTuple):
    hi: int
    lo: int


def _top_coeff_vector(p: Poly2, d: int) -> np.ndarray:
    return np.array([p.coeff(d - k, k) for k in range(d + 1)])


def pencil_type(f: PlanarMap) -> PencilType:
    """Extreme degrees over the line of combinations of the two components.

    The highest degree is attained by a generic combination; a drop below it
    happens only along the single combination that cancels the two leading
    forms, which exists iff they are proportional.

    Raises DegeneratePencil when the components are linearly dependent.
    """
    dp, dq = f.p.degree(), f.q.degree()
    if dp < 0 or dq < 0:
        raise DegeneratePencil("a component is identically zero")
    if dp != dq:
        return PencilType(max(dp, dq), min(dp, dq))
    d = dp
    tp = _top_coeff_vector(f.p, d)
    tq = _top_coeff_vector(f.q, d)
    denom = float(tp @ tp)
    c = float(tq @ tp) / denom
    resid = tq - c * tp
    scale = max(np.abs(tp).max(), np.abs(tq).max())
    if np.abs(resid).max() > 1e-10 * scale:
        return PencilType(d, d)
    # leading forms proportional: q - c*p drops degree
    r = (f.q - f.p.scale(c)).pruned(1e-12)
    coeff_scale = max(f.p.max_abs_coeff(), f.q.max_abs_coeff())
    r = Poly2({k: v for k, v in r.terms.items()
               if abs(v) > 1e-10 * coeff_scale})
    if r.is_zero():
        raise DegeneratePencil("components are linearly dependent")
    return PencilType(d, r.degree())


# ----------------------------------------------------------------------
# text form

_TERM_RE = re.compile(r"([+-]?)(\d*\.?\d*)((?:[xy](?:\^\d+)?)*)$")
_VAR_RE = re.compile(r"([xy])(?:\^(\d+))?")


def parse_poly(text: str) -> Poly2:
    """Parse a sum of monomials like ``"y - x^2"`` or ``"2x^2y + 1"``.

    Coefficients are plain decimals (no exponent notation); ``*`` separators
    are tolerated and variables may appear in either order.
    """
    s = text.replace(" ", "").replace("*", "").replace("−", "-")
    if not s:
        raise ParseError("empty polynomial")
    chunks = re.findall(r"[+-]?[^+-]+", s)
    if "".join(chunks) != s:
        raise ParseError(f"cannot tokenize polynomial: {text!r}")
    terms: dict[tuple[int, int], float] = {}
    for chunk in chunks:
        m = _TERM_RE.match(chunk)
        if not m:
            raise ParseError(f"bad monomial {chunk!r} in {text!r}")
        sign, num, vars_part = m.groups()
        if not num and not vars_part:
            raise ParseError(f"bad monomial {chunk!r} in {text!r}")
        if num in ("", "."):
            coeff = 1.0
        else:
            try:
                coeff = float(num)
            except ValueError as exc:
                raise ParseError(f"bad coefficient {num!r} in {text!r}") from exc
        if sign == "-":
            coeff = -coeff
        i = j = 0
        consumed = 0
        for vm in _VAR_RE.finditer(vars_part):
            consumed += len(vm.group(0))
            e = int(vm.group(2)) if vm.group(2) else 1
            if vm.group(1) == "x":
                i += e
            else:
                j += e
        if consumed != len(vars_part):
            raise ParseError(f"bad monomial {chunk!r} in {text!r}")
        terms[(i, j)] = terms.get((i, j), 0.0) + coeff
    return Poly2(terms)


def _monomial_str(i: int, j: int) -> str:
    out = ""
    if i:
        out += "x" if i == 1 else f"x^{i}"
    if j:
        out += "y" if j == 1 else f"y^{j}"
    return out


def _coeff_str(mag: float) -> str:
    if mag == int(mag) and abs(mag) < 1e16:
        return str(int(mag))
    return repr(mag)  # shortest round-trip decimal


def format_poly(p: Poly2) -> str:
    """Render as a human-readable sum of monomials, e.g. ``"y - x^2"``."""
    if p.is_zero():
        return "0"
    keys = sorted(p.terms, key=lambda k: (-(k[0] + k[1]), -k[0]))
    parts = []
    for idx, k in enumerate(keys):
        c = p.terms[k]
        mono = _monomial_str(*k)
        mag = abs(c)
        coeff_str = "" if (mag == 1.0 and mono) else _coeff_str(mag)
        body = coeff_str + mono
        if idx == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def parse_map(text: str) -> PlanarMap:
    """Parse two semicolon-separated polynomials into a planar map."""
    pieces = text.split(";")
    if len(pieces) != 2:
        raise ParseError("map spec must be two polynomials separated by ';'")
    return PlanarMap(parse_poly(pieces[0]), parse_poly(pieces[1]))
