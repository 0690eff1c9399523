"""Non-commutative *-polynomials and Hermitian coefficient pencils.

Polynomials live in r self-adjoint generators ``x1 .. xr`` with complex
coefficients.  A polynomial is stored in canonical expanded form as a map
from words (tuples of generator indices, empty tuple = unit) to nonzero
coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

# Coefficients below this magnitude are dropped after arithmetic so that
# cancellation residue does not bloat the term map.
CANCEL_TOL = 1e-15

Word = tuple  # tuple of 1-based generator indices


class ParseError(ValueError):
    """Syntax or semantic error in polynomial text, with source position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (position {position})")
        self.position = position


class DimensionMismatchError(ValueError):
    pass


def _canonical(terms):
    return {w: complex(c) for w, c in terms.items() if abs(c) > CANCEL_TOL}


@dataclass(frozen=True)
class NCPolynomial:
    """A *-polynomial in ``num_generators`` non-commuting variables."""

    num_generators: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_generators < 0:
            raise ValueError("num_generators must be nonnegative")
        object.__setattr__(self, "terms", _canonical(self.terms))
        for w in self.terms:
            if any(not (1 <= g <= self.num_generators) for g in w):
                raise ValueError(f"word {w} uses a generator outside 1..{self.num_generators}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, num_generators):
        return cls(num_generators, {})

    @classmethod
    def constant(cls, c, num_generators):
        return cls(num_generators, {(): complex(c)})

    @classmethod
    def generator(cls, index, num_generators):
        if not 1 <= index <= num_generators:
            raise ValueError(f"generator index {index} out of range 1..{num_generators}")
        return cls(num_generators, {(index,): 1.0 + 0.0j})

    # -- basic queries -----------------------------------------------------

    @property
    def degree(self):
        """Length of the longest word (0 for constants and the zero polynomial)."""
        return max((len(w) for w in self.terms), default=0)

    def coefficient(self, word):
        return self.terms.get(tuple(word), 0.0 + 0.0j)

    def is_self_adjoint(self, tol=1e-12):
        scale = max((abs(c) for c in self.terms.values()), default=1.0)
        q = adjoint(self)
        words = set(self.terms) | set(q.terms)
        return all(abs(self.coefficient(w) - q.coefficient(w)) <= tol * scale for w in words)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0.0) + c
        return NCPolynomial(max(self.num_generators, other.num_generators), terms)

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial(self.num_generators, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                terms[w] = terms.get(w, 0.0) + c1 * c2
        return NCPolynomial(max(self.num_generators, other.num_generators), terms)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = NCPolynomial.constant(1.0, self.num_generators)
        for _ in range(k):
            out = out * self
        return out

    def _coerce(self, other):
        if isinstance(other, NCPolynomial):
            return other
        if isinstance(other, (int, float, complex)):
            return NCPolynomial.constant(other, self.num_generators)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self.num_generators == other.num_generators and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_generators, frozenset(self.terms.items())))

    def __repr__(self):
        return f"NCPolynomial({self.num_generators}, {render(self)!r})"


def adjoint(p: NCPolynomial) -> NCPolynomial:
    """Formal adjoint: reverse every word, conjugate every coefficient."""
    return NCPolynomial(p.num_generators, {w[::-1]: c.conjugate() for w, c in p.terms.items()})


def evaluate(p: NCPolynomial, X) -> np.ndarray:
    """Evaluate ``p`` on a tuple of equally sized square complex matrices.

    The empty word contributes ``coefficient * identity``.
    """
    X = [np.asarray(x, dtype=complex) for x in X]
    used = max((g for w in p.terms for g in w), default=0)
    if used > len(X):
        raise DimensionMismatchError(f"polynomial uses x{used} but only {len(X)} matrices given")
    if X:
        d = X[0].shape[0]
        for x in X:
            if x.shape != (d, d):
                raise DimensionMismatchError("all matrices must be square and of equal size")
    else:
        d = 1
    out = np.zeros((d, d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for w, c in p.terms.items():
        m = eye
        for g in w:
            m = m @ X[g - 1]
        out += c * m
    return out


# -- text form --------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?|i)"
    r"|(?P<gen>x\d+)"
    r"|(?P<op>[+\-*^()])"
    r")"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", pos)
        if m.group("num") is not None:
            s = m.group("num")
            if s == "i":
                tokens.append(("num", 1j, m.start("num")))
            elif s.endswith("i"):
                tokens.append(("num", complex(0.0, float(s[:-1])), m.start("num")))
            else:
                tokens.append(("num", complex(float(s)), m.start("num")))
        elif m.group("gen") is not None:
            tokens.append(("gen", int(m.group("gen")[1:]), m.start("gen")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, num_generators):
        self.tokens = tokens
        self.k = 0
        self.r = num_generators

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse_expr(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            node = self.parse_term()
            if val == "-":
                node = -node
        else:
            node = self.parse_term()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.parse_term()
                node = node + rhs if val == "+" else node - rhs
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.next()
                node = node * self.parse_factor()
            else:
                return node

    def parse_factor(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            node = self.parse_factor()
            return -node if val == "-" else node
        node = self.parse_atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.next()
            nkind, nval, npos = self.next()
            if nkind != "num" or nval.imag != 0 or nval.real != int(nval.real) or nval.real < 0:
                raise ParseError("exponent must be a nonnegative integer", npos)
            node = node ** int(nval.real)
        return node

    def parse_atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return NCPolynomial.constant(val, self.r)
        if kind == "gen":
            if not 1 <= val <= self.r:
                raise ParseError(f"generator index {val} out of range 1..{self.r}", pos)
            return NCPolynomial.generator(val, self.r)
        if kind == "op" and val == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ParseError("expected a number, generator or parenthesis", pos)


def parse(text: str, num_generators: int) -> NCPolynomial:
    """Parse polynomial text into canonical expanded form.

    Grammar: generators ``x1 .. xr``, complex literals (``2``, ``1.5i``,
    ``(3+2i)``), binary ``+ - *``, unary ``-``, integer powers ``^k`` and
    parentheses.  Whitespace is insignificant; multiplication is word
    concatenation (non-commutative).
    """
    if num_generators < 0:
        raise ValueError("num_generators must be nonnegative")
    parser = _Parser(_tokenize(text), num_generators)
    node = parser.parse_expr()
    kind, _, pos = parser.peek()
    if kind != "end":
        raise ParseError("unexpected trailing input", pos)
    return node


def _fmt_float(x: float) -> str:
    return repr(float(x))


def render(p: NCPolynomial) -> str:
    """Canonical text form: terms sorted by word length then word, `a+bi` coefficients."""
    if not p.terms:
        return "(0.0+0.0i)"
    parts = []
    for w in sorted(p.terms, key=lambda w: (len(w), w)):
        c = p.terms[w]
        sign = "+" if c.imag >= 0 else "-"
        coef = f"({_fmt_float(c.real)}{sign}{_fmt_float(abs(c.imag))}i)"
        if w:
            parts.append(coef + "*" + "*".join(f"x{g}" for g in w))
        else:
            parts.append(coef)
    return " + ".join(parts)


# -- Hermitian coefficient pencils ------------------------------------------

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class CoefficientPencil:
    """Hermitian coefficients (a0, ..., ar) of a block operator of size m.

    The pencil defines the operator ``a0 (x) 1 + sum_p a_p (x) x_p`` both for
    the limiting generators and for sampled matrices.
    """

    m: int
    coefficients: tuple  # (r + 1) complex m x m arrays, a0 first

    def __post_init__(self):
        coeffs = tuple(np.array(a, dtype=complex) for a in self.coefficients)
        if len(coeffs) < 1:
            raise ValueError("need at least the constant coefficient a0")
        for idx, a in enumerate(coeffs):
            if a.shape != (self.m, self.m):
                raise ValueError(f"coefficient {idx} has shape {a.shape}, expected ({self.m}, {self.m})")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"coefficient {idx} has non-finite entries")
            dev = np.linalg.norm(a - a.conj().T, 2)
            if dev > HERMITICITY_RTOL * max(np.linalg.norm(a, 2), 1.0):
                raise ValueError(f"coefficient {idx} is not Hermitian (deviation {dev:.3e})")
            a.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def r(self):
        return len(self.coefficients) - 1

    @property
    def a0(self):
        return self.coefficients[0]

    @property
    def a(self):
        """The random-part coefficients (a1, ..., ar)."""
        return self.coefficients[1:]

    def coefficient_norms(self):
        return [float(np.linalg.norm(a, 2)) for a in self.coefficients]

    @classmethod
    def scalar(cls, a0, a):
        """Convenience 1x1 pencil from scalars a0, a1, ..., ar."""
        return cls(1, tuple(np.array([[v]], dtype=complex) for v in (a0, *a)))
