"""
Scalar backends for exact and high precision orbit computations.

Three kinds of scalars are used throughout the package:

* rationals, as :class:`fractions.Fraction`;
* elements of the cubic field Q[a], where ``a`` is the real root of
  ``t^3 + t^2 + t - 1``, as :class:`Cubic`;
* binary floats with a chosen precision, as ``mpmath`` numbers bound to a
  private context.

Orbits computed with the first two kinds are exact and reproducible bit for
bit. Rationals embed in Q[a]; no other mixing is allowed.

    >>> a = Cubic.generator()
    >>> a + a**2 + a**3
    Cubic(1, 0, 0)
    >>> reduce_mod1(1 + a) == a
    True
"""

import ast
import math
import operator
from fractions import Fraction
from functools import lru_cache

from mpmath.ctx_mp import MPContext
from mpmath.ctx_mp_python import _mpf as _mpf_type


class BackendError(TypeError):
    """Raised when scalars from incompatible backends are combined."""


# ---------------------------------------------------------------------------
# the Tribonacci root

def _tribonacci_poly_scaled(num, bits):
    # sign of f(num / 2^bits) with f(t) = t^3 + t^2 + t - 1, in integers
    d = 1 << bits
    return num**3 + num * num * d + num * d * d - d * d * d


@lru_cache(maxsize=None)
def tribonacci_root(precision_bits=64):
    """
    Return rationals ``(lo, hi)`` enclosing the real root of t^3+t^2+t-1.

    The width ``hi - lo`` is at most ``2^(1 - precision_bits)``. Newton's
    method gives the estimate; exact sign checks certify the enclosure.

        >>> lo, hi = tribonacci_root(64)
        >>> round(float(lo), 12), hi - lo <= Fraction(2, 2**64)
        (0.543689012692, True)
    """
    if precision_bits < 32:
        raise ValueError("precision_bits must be at least 32")
    bits = precision_bits
    x = Fraction(5436890626581, 10**13)
    scale = 1 << (bits + 8)
    for _ in range(2 * bits.bit_length() + 4):
        fx = x**3 + x**2 + x - 1
        dfx = 3 * x**2 + 2 * x + 1
        x = Fraction(math.floor((x - fx / dfx) * scale), scale)
    num = math.floor(x * (1 << bits))
    while _tribonacci_poly_scaled(num, bits) > 0:
        num -= 1
    while _tribonacci_poly_scaled(num + 1, bits) < 0:
        num += 1
    return Fraction(num, 1 << bits), Fraction(num + 1, 1 << bits)


_A_LO, _A_HI = tribonacci_root(64)
_A_FLOAT = float((_A_LO + _A_HI) / 2)
_A2_FLOAT = _A_FLOAT * _A_FLOAT


# ---------------------------------------------------------------------------
# the cubic field Q[a]

def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise BackendError(f"cannot use {type(x).__name__} as a cubic field coefficient")


class Cubic:
    """
    Element c0 + c1*a + c2*a^2 of Q[a] with rational coefficients.

    Products are reduced with a^3 = 1 - a - a^2. Comparison refines a
    rational enclosure of ``a`` until the sign of the difference is known.
    """

    __slots__ = ("c0", "c1", "c2", "_approx")

    def __init__(self, c0=0, c1=0, c2=0):
        self.c0 = _as_fraction(c0)
        self.c1 = _as_fraction(c1)
        self.c2 = _as_fraction(c2)
        self._approx = None

    @classmethod
    def generator(cls):
        return cls(0, 1, 0)

    @classmethod
    def _raw(cls, c0, c1, c2):
        obj = cls.__new__(cls)
        obj.c0, obj.c1, obj.c2 = c0, c1, c2
        obj._approx = None
        return obj

    @property
    def coefficients(self):
        return (self.c0, self.c1, self.c2)

    def is_rational(self):
        return not self.c1 and not self.c2

    def __repr__(self):
        parts = ", ".join(str(c) for c in self.coefficients)
        return f"Cubic({parts})"

    def __str__(self):
        terms = []
        for c, mono in zip(self.coefficients, ("", "a", "a^2")):
            if not c:
                continue
            if mono and c == 1:
                body = mono
            elif mono and c == -1:
                body = "-" + mono
            elif mono:
                body = f"({c})*{mono}" if c.denominator != 1 else f"{c}*{mono}"
            else:
                body = str(c)
            terms.append(body)
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")

    # arithmetic ------------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Cubic):
            return other
        if isinstance(other, (int, Fraction)):
            return Cubic._raw(Fraction(other), Fraction(0), Fraction(0))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cubic._raw(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cubic._raw(self.c0 - o.c0, self.c1 - o.c1, self.c2 - o.c2)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Cubic._raw(-self.c0, -self.c1, -self.c2)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        x0, x1, x2 = self.c0, self.c1, self.c2
        y0, y1, y2 = o.c0, o.c1, o.c2
        if not (y1 or y2):
            return Cubic._raw(x0 * y0, x1 * y0, x2 * y0)
        if not (x1 or x2):
            return Cubic._raw(x0 * y0, x0 * y1, x0 * y2)
        z3 = x1 * y2 + x2 * y1
        z4 = x2 * y2
        return Cubic._raw(
            x0 * y0 + z3 - z4,
            x0 * y1 + x1 * y0 - z3 + 2 * z4,
            x0 * y2 + x1 * y1 + x2 * y0 - z3,
        )

    __rmul__ = __mul__

    def inverse(self):
        if not (self.c0 or self.c1 or self.c2):
            raise ZeroDivisionError("inverse of zero in Q[a]")
        if self.is_rational():
            return Cubic._raw(1 / self.c0, Fraction(0), Fraction(0))
        # columns are self, self*a, self*a^2; solve M v = (1, 0, 0)
        a = Cubic.generator()
        cols = [self, self * a, self * a * a]
        m = [[cols[j].coefficients[i] for j in range(3)] for i in range(3)]
        return Cubic(*_solve3(m, [Fraction(1), Fraction(0), Fraction(0)]))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_rational():
            if not o.c0:
                raise ZeroDivisionError("division by zero in Q[a]")
            return Cubic._raw(self.c0 / o.c0, self.c1 / o.c0, self.c2 / o.c0)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = Cubic(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # order -----------------------------------------------------------------

    def __float__(self):
        if self._approx is None:
            self._approx = float(self.c0) + float(self.c1) * _A_FLOAT + float(self.c2) * _A2_FLOAT
        return self._approx

    def sign(self):
        """Return -1, 0 or 1 according to the real value."""
        c0, c1, c2 = self.c0, self.c1, self.c2
        if not (c1 or c2):
            return (c0 > 0) - (c0 < 0)
        v = float(self)
        bound = (abs(float(c0)) + abs(float(c1)) + abs(float(c2))) * 1e-14
        if v > bound:
            return 1
        if v < -bound:
            return -1
        bits = 96
        while True:
            lo, hi = tribonacci_root(bits)
            t1 = sorted((c1 * lo, c1 * hi))
            t2 = sorted((c2 * lo * lo, c2 * hi * hi))
            low = c0 + t1[0] + t2[0]
            high = c0 + t1[1] + t2[1]
            if low > 0:
                return 1
            if high < 0:
                return -1
            bits *= 2

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            return None
        return (self - o).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.c0 == o.c0 and self.c1 == o.c1 and self.c2 == o.c2

    def __hash__(self):
        if not (self.c1 or self.c2):
            return hash(self.c0)
        return hash((self.c0, self.c1, self.c2))

    def __lt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s < 0

    def __le__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s <= 0

    def __gt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s > 0

    def __ge__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s >= 0

    def __bool__(self):
        return bool(self.c0 or self.c1 or self.c2)

    def __floor__(self):
        n = math.floor(float(self))
        while self < n:
            n -= 1
        while self >= n + 1:
            n += 1
        return n

    def __abs__(self):
        return -self if self.sign() < 0 else self


def _solve3(m, rhs):
    # Gauss-Jordan elimination over the rationals
    rows = [list(r) + [v] for r, v in zip(m, rhs)]
    for col in range(3):
        piv = next(i for i in range(col, 3) if rows[i][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for i in range(3):
            if i != col and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[col])]
    return [rows[i][3] for i in range(3)]


# ---------------------------------------------------------------------------
# backends

class Backend:
    """Common interface: coercion, parsing, printing and tolerance."""

    name = "abstract"
    exact = True
    eps = 0

    def coerce(self, x):
        raise NotImplementedError

    def parse(self, text):
        return self.coerce(parse_expression(text, allow_a=False))

    def to_str(self, x):
        return str(x)

    def to_float(self, x):
        return float(x)

    def spec(self):
        return self.name

    def __repr__(self):
        return f"<backend {self.spec()}>"

    def __eq__(self, other):
        return isinstance(other, Backend) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.spec())


class RationalBackend(Backend):
    name = "rational"

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, Cubic) and x.is_rational():
            return x.c0
        raise BackendError(f"rational backend cannot hold {type(x).__name__} {x!r}")


class CubicBackend(Backend):
    name = "cubic"

    def coerce(self, x):
        if isinstance(x, Cubic):
            return x
        if isinstance(x, (int, Fraction)):
            return Cubic(x)
        if isinstance(x, str):
            return self.parse(x)
        raise BackendError(f"cubic backend cannot hold {type(x).__name__} {x!r}")

    def parse(self, text):
        return self.coerce(parse_expression(text, allow_a=True))

    def to_str(self, x):
        return "[" + ", ".join(str(c) for c in x.coefficients) + "]"


class FloatBackend(Backend):
    """Binary floats with ``bits`` of mantissa; predicates use eps = 2^(-bits/2)."""

    name = "float"
    exact = False

    def __init__(self, bits=53):
        if bits < 16:
            raise ValueError("float backend needs at least 16 bits")
        self.bits = bits
        self.ctx = MPContext()
        self.ctx.prec = bits
        self.eps = self.ctx.mpf(2) ** (-(bits // 2))

    def coerce(self, x):
        if isinstance(x, _mpf_type):
            return self.ctx.mpf(x)
        if isinstance(x, Fraction):
            return self.ctx.mpf(x.numerator) / x.denominator
        if isinstance(x, (int, float)):
            return self.ctx.mpf(x)
        if isinstance(x, Cubic):
            lo, hi = tribonacci_root(self.bits + 8)
            a = self.coerce((lo + hi) / 2)
            return self.coerce(x.c0) + self.coerce(x.c1) * a + self.coerce(x.c2) * a * a
        if isinstance(x, str):
            return self.parse(x)
        raise BackendError(f"float backend cannot hold {type(x).__name__}")

    def parse(self, text):
        try:
            return self.coerce(parse_expression(text, allow_a=True))
        except ValueError:
            return self.ctx.mpf(text)

    def to_str(self, x):
        return self.ctx.nstr(x, max(8, int(self.bits * 0.30103)))

    def spec(self):
        return f"float:{self.bits}"


RATIONAL = RationalBackend()
CUBIC = CubicBackend()


def parse_backend(text):
    """Parse ``rational``, ``cubic`` or ``float:BITS``."""
    text = text.strip().lower()
    if text == "rational":
        return RATIONAL
    if text == "cubic":
        return CUBIC
    if text == "float":
        return float_backend(53)
    if text.startswith("float:"):
        return float_backend(int(text.split(":", 1)[1]))
    raise ValueError(f"unknown backend {text!r}")


@lru_cache(maxsize=None)
def float_backend(bits):
    """Shared FloatBackend instance for a given precision."""
    return FloatBackend(bits)


def backend_of(x):
    if isinstance(x, (int, Fraction)):
        return RATIONAL
    if isinstance(x, Cubic):
        return CUBIC
    if isinstance(x, _mpf_type):
        return float_backend(x.context.prec)
    raise BackendError(f"{type(x).__name__} is not a scalar")


def like(x, value):
    """``value`` converted to the backend of ``x`` (rationals stay Fractions)."""
    if isinstance(x, _mpf_type):
        return float_backend(x.context.prec).coerce(value)
    if isinstance(value, int):
        return Fraction(value)
    return value


def common_backend(values):
    """Smallest backend holding every value; rationals promote to Q[a]."""
    kinds = {backend_of(v).name for v in values}
    if "float" in kinds:
        if kinds != {"float"}:
            raise BackendError("floats cannot be mixed with exact scalars")
        precs = {v.context.prec for v in values}
        return float_backend(max(precs))
    if "cubic" in kinds:
        return CUBIC
    return RATIONAL


# ---------------------------------------------------------------------------
# expression parsing: "1/2", "(1-a)/2", "3*a^2 - 1"

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def parse_expression(text, allow_a=True):
    """
    Evaluate a small arithmetic expression exactly.

    Integers, decimals, ``+ - * /``, integer powers and (optionally) the
    symbol ``a`` are allowed. Decimals are read as exact rationals.

        >>> parse_expression("3/4")
        Fraction(3, 4)
        >>> parse_expression("(1-a)/2")
        Cubic(1/2, -1/2, 0)
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, float):
                return Fraction(str(node.value))
            return Fraction(node.value)
        if isinstance(node, ast.Name) and node.id == "a" and allow_a:
            return Cubic.generator()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            exp = ev(node.right)
            if not (isinstance(exp, Fraction) and exp.denominator == 1):
                raise ValueError("only integer powers are supported")
            return ev(node.left) ** int(exp)
        raise ValueError(f"unsupported expression {text!r}")

    return ev(tree)


# ---------------------------------------------------------------------------
# scalar operations

_OPS = {"add": operator.add, "sub": operator.sub, "mul": operator.mul, "div": operator.truediv}


def scalar_arith(x, y=None, op="add"):
    """
    Apply ``op`` to scalars after checking backend compatibility.

    ``op`` is one of add, sub, mul, div, neg, cmp. ``cmp`` returns -1, 0, 1.
    """
    if op == "neg":
        backend_of(x)
        return -x
    backend = common_backend([x, y])
    if backend.name == "float":
        x, y = backend.coerce(x), backend.coerce(y)
    if op == "cmp":
        return (x > y) - (x < y)
    if op == "div" and not y:
        raise ZeroDivisionError("division by zero")
    try:
        return _OPS[op](x, y)
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None


def floor_scalar(x):
    if isinstance(x, _mpf_type):
        return int(x.context.floor(x))
    return math.floor(x)


def reduce_mod1(x):
    """Return ``x - floor(x)``, the representative of x in [0, 1)."""
    return x - floor_scalar(x)

