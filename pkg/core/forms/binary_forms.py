# core/forms/binary_forms.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import sympy
from sympy import QQ, Poly

from core.errors import DegenerateInput, PreconditionViolated

logger = logging.getLogger(__name__)

X, Y = sympy.symbols("x y")

RatLike = Union[Fraction, int, str, sympy.Rational]


# =============================================================================
# Rationals
# =============================================================================

def as_rat(value: RatLike) -> Fraction:
    """Read an exact rational from a Fraction, int, "num/den" string or sympy number."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DegenerateInput(f"as_rat: boolean {value!r} is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DegenerateInput(f"as_rat: cannot parse {value!r}") from exc
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, sympy.Basic) and value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    raise DegenerateInput(f"as_rat: {value!r} is not an exact rational")


def to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


# =============================================================================
# Points and coordinate changes
# =============================================================================

@dataclass(frozen=True, slots=True)
class RationalPoint:
    """A point [a:b] of the projective line, stored as [a:1] or [1:0]."""

    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        a, b = as_rat(self.a), as_rat(self.b)
        if a == 0 and b == 0:
            raise DegenerateInput("RationalPoint: [0:0] is not a point")
        if b != 0:
            a, b = a / b, Fraction(1)
        else:
            a = Fraction(1)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def affine(cls, a: RatLike) -> "RationalPoint":
        return cls(as_rat(a), Fraction(1))

    @classmethod
    def infinity(cls) -> "RationalPoint":
        return cls(Fraction(1), Fraction(0))

    @classmethod
    def parse(cls, text: str) -> "RationalPoint":
        """Accepts "inf", "a/b" (the affine point [a/b:1]) or "[a:b]"."""
        s = str(text).strip()
        if s.lower() in {"inf", "infinity", "[1:0]"}:
            return cls.infinity()
        if s.startswith("[") and s.endswith("]"):
            parts = s[1:-1].split(":")
            if len(parts) != 2:
                raise DegenerateInput(f"RationalPoint.parse: bad point {text!r}")
            return cls(as_rat(parts[0]), as_rat(parts[1]))
        return cls.affine(as_rat(s))

    @property
    def is_infinity(self) -> bool:
        return self.b == 0

    def __str__(self) -> str:
        return "inf" if self.is_infinity else str(self.a)


@dataclass(frozen=True, slots=True)
class MobiusMatrix:
    """[[a, b], [c, d]] acting by the substitution (x, y) -> (a x + b y, c x + d y)."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, as_rat(getattr(self, name)))
        if self.det == 0:
            raise DegenerateInput(f"MobiusMatrix: singular matrix {self.rows()}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RatLike]]) -> "MobiusMatrix":
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise DegenerateInput(f"MobiusMatrix.from_rows: expected 2x2, got {rows!r}")
        return cls(as_rat(rows[0][0]), as_rat(rows[0][1]), as_rat(rows[1][0]), as_rat(rows[1][1]))

    @classmethod
    def identity(cls) -> "MobiusMatrix":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    @classmethod
    def swap(cls) -> "MobiusMatrix":
        return cls(Fraction(0), Fraction(1), Fraction(1), Fraction(0))

    @classmethod
    def translation(cls, shift: RatLike) -> "MobiusMatrix":
        """x -> x + shift*y; carries the root [shift:1] of a form to [0:1]."""
        return cls(Fraction(1), as_rat(shift), Fraction(0), Fraction(1))

    @classmethod
    def moving_to_origin(cls, p: RationalPoint) -> "MobiusMatrix":
        """Matrix M with M*[0:1] = p, so f∘M vanishes at [0:1] iff f vanishes at p."""
        return cls.swap() if p.is_infinity else cls.translation(p.a)

    @classmethod
    def from_three_points(
        cls,
        src: Sequence[RationalPoint],
        dst: Sequence[RationalPoint],
    ) -> "MobiusMatrix":
        """The unique matrix (up to scalar) with M*src[i] proportional to dst[i]."""
        return cls._frame(dst) @ cls._frame(src).inverse()

    @classmethod
    def _frame(cls, pts: Sequence[RationalPoint]) -> "MobiusMatrix":
        # columns alpha*p0, beta*p1 with alpha*p0 + beta*p1 = p2
        p0, p1, p2 = pts
        det = p0.a * p1.b - p1.a * p0.b
        if det == 0:
            raise DegenerateInput("MobiusMatrix: frame points are not distinct")
        alpha = (p2.a * p1.b - p1.a * p2.b) / det
        beta = (p0.a * p2.b - p2.a * p0.b) / det
        if alpha == 0 or beta == 0:
            raise DegenerateInput("MobiusMatrix: frame points are not distinct")
        return cls(alpha * p0.a, beta * p1.a, alpha * p0.b, beta * p1.b)

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "MobiusMatrix":
        det = self.det
        return MobiusMatrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def __matmul__(self, other: "MobiusMatrix") -> "MobiusMatrix":
        return MobiusMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply_to_point(self, p: RationalPoint) -> RationalPoint:
        return RationalPoint(self.a * p.a + self.b * p.b, self.c * p.a + self.d * p.b)

    def rows(self) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        return ((self.a, self.b), (self.c, self.d))


# =============================================================================
# Binary forms
# =============================================================================

@dataclass(frozen=True, slots=True)
class BinaryForm:
    """
    Homogeneous form of degree m in (x, y) with exact rational coefficients.

    coeffs[i] is the coefficient of x^i y^(m-i), so the list starts at the
    lowest x-power. The zero form keeps its nominal degree.
    """

    degree: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise DegenerateInput(f"BinaryForm: negative degree {self.degree}")
        coeffs = tuple(as_rat(c) for c in self.coeffs)
        if len(coeffs) != self.degree + 1:
            raise DegenerateInput(
                f"BinaryForm: degree {self.degree} needs {self.degree + 1} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    # ---- constructors ----

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[RatLike]) -> "BinaryForm":
        if not coeffs:
            raise DegenerateInput("BinaryForm.from_coeffs: empty coefficient list")
        return cls(len(coeffs) - 1, tuple(as_rat(c) for c in coeffs))

    @classmethod
    def zero(cls, degree: int) -> "BinaryForm":
        return cls(degree, (Fraction(0),) * (degree + 1))

    @classmethod
    def constant(cls, value: RatLike = 1) -> "BinaryForm":
        return cls(0, (as_rat(value),))

    @classmethod
    def monomial(cls, degree: int, x_power: int, coeff: RatLike = 1) -> "BinaryForm":
        if not 0 <= x_power <= degree:
            raise DegenerateInput(f"BinaryForm.monomial: x-power {x_power} outside 0..{degree}")
        coeffs = [Fraction(0)] * (degree + 1)
        coeffs[x_power] = as_rat(coeff)
        return cls(degree, tuple(coeffs))

    @classmethod
    def linear(cls, x_coeff: RatLike, y_coeff: RatLike) -> "BinaryForm":
        return cls(1, (as_rat(y_coeff), as_rat(x_coeff)))

    @classmethod
    def from_expr(cls, expr: sympy.Expr | str, degree: Optional[int] = None) -> "BinaryForm":
        """Build from a sympy expression (or string) in x, y."""
        poly = Poly(sympy.sympify(expr, locals={"x": X, "y": Y}), X, Y, domain=QQ)
        if poly.is_zero:
            if degree is None:
                raise DegenerateInput("BinaryForm.from_expr: zero expression needs an explicit degree")
            return cls.zero(degree)
        if not poly.is_homogeneous:
            raise DegenerateInput(f"BinaryForm.from_expr: {expr} is not homogeneous")
        m = poly.total_degree() if degree is None else degree
        if m != poly.total_degree():
            raise DegenerateInput(f"BinaryForm.from_expr: {expr} has degree {poly.total_degree()}, not {m}")
        return cls(m, tuple(as_rat(poly.coeff_monomial((i, m - i))) for i in range(m + 1)))

    # ---- inspection ----

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def x_degree(self) -> Optional[int]:
        for i in range(self.degree, -1, -1):
            if self.coeffs[i] != 0:
                return i
        return None

    @property
    def y_power(self) -> int:
        """Order of vanishing at [1:0]."""
        xd = self.x_degree
        return 0 if xd is None else self.degree - xd

    @property
    def low_x_order(self) -> Optional[int]:
        """Order of vanishing at [0:1]."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def evaluate(self, p: RationalPoint) -> Fraction:
        return sum(
            (c * p.a**i * p.b ** (self.degree - i) for i, c in enumerate(self.coeffs) if c != 0),
            Fraction(0),
        )

    def to_expr(self) -> sympy.Expr:
        return sum(
            (to_sympy(c) * X**i * Y ** (self.degree - i) for i, c in enumerate(self.coeffs)),
            sympy.Integer(0),
        )

    def __str__(self) -> str:
        return "0" if self.is_zero else str(sympy.expand(self.to_expr()))

    # ---- arithmetic ----

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        if self.degree != other.degree:
            raise DegenerateInput(f"BinaryForm: cannot add degrees {self.degree} and {other.degree}")
        return BinaryForm(self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "BinaryForm") -> "BinaryForm":
        return self + other.scale(-1)

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        out = [Fraction(0)] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b != 0:
                    out[i + j] += a * b
        return BinaryForm(self.degree + other.degree, tuple(out))

    def __pow__(self, n: int) -> "BinaryForm":
        if n < 0:
            raise DegenerateInput("BinaryForm: negative power")
        result = BinaryForm.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: RatLike) -> "BinaryForm":
        c = as_rat(c)
        return BinaryForm(self.degree, tuple(c * a for a in self.coeffs))

    def first_nonzero(self) -> Fraction:
        for c in self.coeffs:
            if c != 0:
                return c
        return Fraction(0)

    def sort_key(self) -> Tuple[int, Tuple[Fraction, ...]]:
        return (self.degree, self.coeffs)


X_FORM = BinaryForm.linear(1, 0)
Y_FORM = BinaryForm.linear(0, 1)


# =============================================================================
# Univariate bridge (dehomogenization at y = 1)
# =============================================================================

def _dehomogenize(f: BinaryForm) -> Tuple[Poly, int]:
    xd = f.x_degree
    if xd is None:
        raise DegenerateInput("binary form calculus: zero form not allowed here")
    coeffs = [to_sympy(c) for c in reversed(f.coeffs[: xd + 1])]
    return Poly(coeffs, X, domain=QQ), f.degree - xd


def _poly_to_form(poly: Poly, y_power: int) -> BinaryForm:
    xd = poly.degree()
    low_first = [as_rat(poly.nth(i)) for i in range(xd + 1)]
    return BinaryForm(xd + y_power, tuple(low_first + [Fraction(0)] * y_power))


def gcd_free_basis(polys: Iterable[Poly]) -> List[Poly]:
    """
    Squarefree, pairwise coprime monic polynomials refining the squarefree
    decompositions of every input. Each basis element divides, or is coprime
    to, every squarefree layer of every input, so all of its roots carry the
    same multiplicity in each input.

    Works over any sympy field domain (QQ for fibers, QQ(t) for generic fibers).
    """
    basis: List[Poly] = []
    for poly in polys:
        if poly.is_zero or poly.degree() <= 0:
            continue
        _, layers = poly.sqf_list()
        for layer, _mult in layers:
            p = layer.monic()
            refined: List[Poly] = []
            for b in basis:
                g = b.gcd(p)
                if g.degree() > 0:
                    refined.append(g.monic())
                    rest = b.quo(g)
                    if rest.degree() > 0:
                        refined.append(rest.monic())
                    p = p.quo(g)
                else:
                    refined.append(b)
            if p.degree() > 0:
                refined.append(p.monic())
            basis = refined
    logger.debug("gcd_free_basis: %d basis elements", len(basis))
    return basis


def factor_multiplicity(poly: Poly, factor: Poly) -> int:
    """Largest e with factor^e dividing poly (factor non-constant)."""
    if factor.degree() <= 0:
        raise DegenerateInput("factor_multiplicity: constant factor")
    e = 0
    current = poly
    while not current.is_zero:
        q, r = current.div(factor)
        if not r.is_zero:
            break
        current = q
        e += 1
    return e


# =============================================================================
# Operations
# =============================================================================

def normalize(coeffs: Union[BinaryForm, Sequence[RatLike]]) -> BinaryForm:
    """Content 1, first nonzero coefficient (lowest x-power) positive."""
    f = coeffs if isinstance(coeffs, BinaryForm) else BinaryForm.from_coeffs(coeffs)
    if f.is_zero:
        return BinaryForm.zero(f.degree)
    den = reduce(lcm, (c.denominator for c in f.coeffs), 1)
    ints = [int(c * den) for c in f.coeffs]
    content = reduce(gcd, (abs(v) for v in ints if v != 0))
    sign = 1 if next(v for v in ints if v != 0) > 0 else -1
    return BinaryForm(f.degree, tuple(Fraction(sign * v, content) for v in ints))


def is_normalized(f: BinaryForm) -> bool:
    return normalize(f) == f


def gcd_forms(f: BinaryForm, g: BinaryForm) -> BinaryForm:
    if f.is_zero and g.is_zero:
        raise DegenerateInput("gcd_forms: both forms are zero")
    if g.is_zero:
        return normalize(f)
    if f.is_zero:
        return normalize(g)
    pf, af = _dehomogenize(f)
    pg, ag = _dehomogenize(g)
    return normalize(_poly_to_form(pf.gcd(pg), min(af, ag)))


def gcd_all(forms: Iterable[BinaryForm]) -> BinaryForm:
    nonzero = [f for f in forms if not f.is_zero]
    if not nonzero:
        raise DegenerateInput("gcd_all: every form is zero")
    return reduce(gcd_forms, nonzero[1:], normalize(nonzero[0]))


def divide_exact(f: BinaryForm, g: BinaryForm) -> BinaryForm:
    """f / g keeping scalars; raises unless g divides f."""
    if g.is_zero:
        raise DegenerateInput("divide_exact: division by the zero form")
    if f.is_zero:
        return BinaryForm.zero(f.degree - g.degree)
    pf, af = _dehomogenize(f)
    pg, ag = _dehomogenize(g)
    q, r = pf.div(pg)
    if af < ag or not r.is_zero:
        raise DegenerateInput(f"divide_exact: {g} does not divide {f}")
    return _poly_to_form(q, af - ag)


def coprime_squarefree_basis(
    forms: Sequence[BinaryForm],
) -> Tuple[List[BinaryForm], List[List[int]]]:
    """
    Gcd-free basis of a list of nonzero forms.

    Returns
    -------
    basis : list[BinaryForm]
        Squarefree, pairwise coprime, normalized; canonical order by degree
        then coefficients. The form y stands for the point at infinity.
    exponents : list[list[int]]
        exponents[i][j] is the multiplicity of basis[j] in forms[i].
    """
    if any(f.is_zero for f in forms):
        raise DegenerateInput("coprime_squarefree_basis: zero form in input")
    parts = [_dehomogenize(f) for f in forms]
    polys = gcd_free_basis(p for p, _ in parts)

    columns: List[Tuple[BinaryForm, List[int]]] = []
    for b in polys:
        columns.append((normalize(_poly_to_form(b, 0)), [factor_multiplicity(p, b) for p, _ in parts]))
    if any(a > 0 for _, a in parts):
        columns.append((Y_FORM, [a for _, a in parts]))

    columns.sort(key=lambda col: col[0].sort_key())
    basis = [col[0] for col in columns]
    exponents = [[col[1][i] for col in columns] for i in range(len(forms))]
    return basis, exponents


def ord_at(f: BinaryForm, p: RationalPoint) -> int:
    if f.is_zero:
        raise DegenerateInput("ord_at: zero form")
    if p.is_infinity:
        return f.y_power
    poly, _ = _dehomogenize(f)
    return factor_multiplicity(poly, Poly([1, -to_sympy(p.a)], X, domain=QQ))


def rational_roots(f: BinaryForm) -> List[Tuple[RationalPoint, int]]:
    """Rational points where f vanishes, with multiplicities, in canonical order."""
    if f.is_zero:
        raise DegenerateInput("rational_roots: zero form")
    poly, a = _dehomogenize(f)
    roots = [(RationalPoint.affine(as_rat(r)), int(k)) for r, k in poly.ground_roots().items()] if poly.degree() > 0 else []
    if a > 0:
        roots.append((RationalPoint.infinity(), a))
    roots.sort(key=lambda rk: (rk[0].b == 0, rk[0].a))
    return roots


def lth_root(f: BinaryForm, l: int) -> Optional[BinaryForm]:
    if l < 2:
        raise PreconditionViolated(f"lth_root: level must be >= 2, got {l}")
    if f.is_zero:
        raise DegenerateInput("lth_root: zero form")
    if f.degree % l != 0:
        raise DegenerateInput(f"lth_root: {l} does not divide degree {f.degree}")
    if f.degree == 0:
        return BinaryForm.constant(1)
    basis, exps = coprime_squarefree_basis([f])
    if any(e % l for e in exps[0]):
        return None
    root = BinaryForm.constant(1)
    for b, e in zip(basis, exps[0]):
        root = root * b ** (e // l)
    root = normalize(root)
    if normalize(root**l) != normalize(f):
        return None
    return root


def substitute(f: BinaryForm, M: MobiusMatrix) -> BinaryForm:
    """f(a x + b y, c x + d y) with scalars kept."""
    first = BinaryForm.linear(M.a, M.b)
    second = BinaryForm.linear(M.c, M.d)
    m = f.degree
    out = BinaryForm.zero(m)
    first_pows = [BinaryForm.constant(1)]
    second_pows = [BinaryForm.constant(1)]
    for _ in range(m):
        first_pows.append(first_pows[-1] * first)
        second_pows.append(second_pows[-1] * second)
    for i, c in enumerate(f.coeffs):
        if c != 0:
            out = out + (first_pows[i] * second_pows[m - i]).scale(c)
    return out


def apply_mobius(f: BinaryForm, M: MobiusMatrix) -> BinaryForm:
    if M.det == 0:
        raise DegenerateInput("apply_mobius: singular matrix")
    return normalize(substitute(f, M))


def parse_generator(generator: Union[str, sympy.Expr], n_vars: int) -> Poly:
    """Homogeneous polynomial in z0..z{n_vars-1}."""
    zs = sympy.symbols(f"z0:{n_vars}")
    names = {str(z): z for z in zs}
    try:
        expr = sympy.sympify(generator, locals=names) if isinstance(generator, str) else generator
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise DegenerateInput(f"parse_generator: cannot parse {generator!r}") from exc
    extra = {str(s) for s in expr.free_symbols} - set(names)
    if extra:
        raise DegenerateInput(f"parse_generator: unknown variables {sorted(extra)} (ambient has z0..z{n_vars - 1})")
    poly = Poly(expr, *zs, domain=QQ)
    if not poly.is_zero and not poly.is_homogeneous:
        raise DegenerateInput(f"parse_generator: {generator} is not homogeneous")
    return poly


def evaluate_generator(poly: Poly, sections: Sequence[BinaryForm]) -> BinaryForm:
    m = sections[0].degree
    d = poly.total_degree() if not poly.is_zero else 0
    out = BinaryForm.zero(m * d)
    for monom, coeff in poly.terms():
        term = BinaryForm.constant(as_rat(coeff))
        for f, e in zip(sections, monom):
            if e:
                term = term * f**e
        out = out + term
    return out


def evaluate_ideal(
    generators: Sequence[Union[str, sympy.Expr, Poly]],
    sections: Sequence[BinaryForm],
) -> bool:
    if not sections:
        raise DegenerateInput("evaluate_ideal: no sections")
    degrees = {f.degree for f in sections}
    if len(degrees) != 1:
        raise DegenerateInput(f"evaluate_ideal: sections have mixed degrees {sorted(degrees)}")
    for g in generators:
        poly = g if isinstance(g, Poly) else parse_generator(g, len(sections))
        if poly.is_zero:
            continue
        if not evaluate_generator(poly, sections).is_zero:
            logger.debug("evaluate_ideal: generator %s does not vanish", poly.as_expr())
            return False
    return True


__all__ = [
    "RatLike",
    "as_rat",
    "to_sympy",
    "RationalPoint",
    "MobiusMatrix",
    "BinaryForm",
    "X_FORM",
    "Y_FORM",
    "X",
    "Y",
    "gcd_free_basis",
    "factor_multiplicity",
    "normalize",
    "is_normalized",
    "gcd_forms",
    "gcd_all",
    "divide_exact",
    "coprime_squarefree_basis",
    "ord_at",
    "rational_roots",
    "lth_root",
    "substitute",
    "apply_mobius",
    "parse_generator",
    "evaluate_generator",
    "evaluate_ideal",
]
