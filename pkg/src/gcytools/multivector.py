"""
Complex exterior algebra over R^n with the spin representation of V + V*.

Forms are stored sparsely as a map from basis blades to complex coefficients.
A blade e^{i1} ^ ... ^ e^{ik} (i1 < ... < ik, 1-based) is keyed internally by
the bitmask sum(1 << (i - 1)); the public ``coeffs`` view uses ascending index
tuples. Every sign in the module comes from :func:`merge_sign`.

Conventions
-----------
* interior products contract the leftmost slot:
  i_X(e^{i1} ^ ... ^ e^{ik}) = sum_j (-1)^(j-1) X^{ij} e^{i1} ^ .. ^e^{ij}^ .. ^ e^{ik}
* a 2-form with antisymmetric matrix M is sum_{i<j} M[i, j] e^i ^ e^j
* Clifford action (X + a) . phi = i_X phi + a ^ phi
* metric (X + a, Y + b) = (b(X) + a(Y)) / 2
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import ContractError, ParseError

Number = Union[int, float, complex]


# ---------------------------------------------------------------------------
# blade bookkeeping


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << (i - 1)
    return m


@lru_cache(maxsize=None)
def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def merge_sign(a: int, b: int) -> int:
    """Sign of e^A ^ e^B relative to e^{A|B}; 0 when the blades overlap.

    The sign is (-1)^(number of pairs i in A, j in B with i > j).
    """
    if a & b:
        return 0
    swaps = 0
    for j in indices_of(b):
        swaps += grade_of(a >> j)
    return -1 if swaps & 1 else 1


def _reversal_sign(k: int) -> int:
    return -1 if (k * (k - 1) // 2) & 1 else 1


# ---------------------------------------------------------------------------
# value types


class ComplexForm:
    """An element of Lambda^* (R^n)^* tensor C.

    Parameters
    ----------
    dim : int
        Ambient dimension n (0 is allowed: the algebra is then just C).
    coeffs : mapping
        Blade -> coefficient. Blades may be given as index tuples (any order,
        the permutation sign is applied) or as bitmasks.
    """

    __slots__ = ("_dim", "_c")

    def __init__(self, dim: int, coeffs: Mapping | None = None):
        if dim < 0:
            raise ContractError("dimension must be non-negative")
        self._dim = int(dim)
        c: dict[int, complex] = {}
        for key, val in (coeffs or {}).items():
            if isinstance(key, (int, np.integer)):
                mask, sign = int(key), 1
            else:
                mask, sign = _blade(key, dim)
            if mask >> dim:
                raise ContractError(f"blade {key!r} outside dimension {dim}")
            if sign == 0:
                continue
            c[mask] = c.get(mask, 0j) + sign * complex(val)
        self._c = MappingProxyType({k: v for k, v in c.items() if v != 0})

    @classmethod
    def _raw(cls, dim: int, c: dict[int, complex]) -> "ComplexForm":
        obj = cls.__new__(cls)
        obj._dim = dim
        obj._c = MappingProxyType({k: v for k, v in c.items() if v != 0})
        return obj

    # constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "ComplexForm":
        return cls._raw(dim, {})

    @classmethod
    def scalar(cls, dim: int, value: Number = 1.0) -> "ComplexForm":
        return cls._raw(dim, {0: complex(value)})

    @classmethod
    def basis(cls, dim: int, *indices: int, coeff: Number = 1.0) -> "ComplexForm":
        """``basis(4, 1, 2)`` is e^1 ^ e^2 in dimension 4."""
        return cls(dim, {tuple(indices): coeff})

    @classmethod
    def one_form(cls, coeffs: Sequence[Number]) -> "ComplexForm":
        """The 1-form sum_i coeffs[i] e^{i+1}."""
        return cls._raw(len(coeffs), {1 << i: complex(v) for i, v in enumerate(coeffs)})

    @classmethod
    def from_array(cls, dim: int, arr: np.ndarray) -> "ComplexForm":
        """Inverse of :meth:`to_array` (index = blade bitmask)."""
        arr = np.asarray(arr)
        if arr.shape != (1 << dim,):
            raise ContractError(f"expected array of length {1 << dim}")
        nz = np.flatnonzero(arr)
        return cls._raw(dim, {int(k): complex(arr[k]) for k in nz})

    # accessors --------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def coeffs(self) -> dict[tuple[int, ...], complex]:
        return {indices_of(k): v for k, v in sorted(self._c.items(), key=_blade_order)}

    @property
    def masks(self) -> Mapping[int, complex]:
        return self._c

    def terms(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        for k, v in sorted(self._c.items(), key=_blade_order):
            yield indices_of(k), v

    def __getitem__(self, key) -> complex:
        if isinstance(key, (int, np.integer)):
            return self._c.get(int(key), 0j)
        mask, sign = _blade(key, self._dim)
        return sign * self._c.get(mask, 0j)

    def grades(self) -> list[int]:
        return sorted({grade_of(k) for k in self._c})

    def is_zero(self) -> bool:
        return not self._c

    def to_array(self) -> np.ndarray:
        arr = np.zeros(1 << self._dim, dtype=complex)
        for k, v in self._c.items():
            arr[k] = v
        return arr

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._c.values()))

    # arithmetic -------------------------------------------------------

    def _check(self, other: "ComplexForm") -> None:
        if not isinstance(other, ComplexForm):
            raise TypeError(f"expected ComplexForm, got {type(other).__name__}")
        if other._dim != self._dim:
            raise ContractError(f"dimension mismatch: {self._dim} vs {other._dim}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = ComplexForm.scalar(self._dim, other)
        self._check(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0j) + v
        return ComplexForm._raw(self._dim, c)

    __radd__ = __add__

    def __neg__(self):
        return ComplexForm._raw(self._dim, {k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if isinstance(s, ComplexForm):
            return NotImplemented
        s = complex(s)
        return ComplexForm._raw(self._dim, {k: s * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / complex(s))

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, ComplexForm):
            return NotImplemented
        return self._dim == other._dim and dict(self._c) == dict(other._c)

    def __hash__(self):
        return hash((self._dim, frozenset(self._c.items())))

    def allclose(self, other: "ComplexForm", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        self._check(other)
        diff = (self - other).norm()
        return diff <= atol + rtol * max(self.norm(), other.norm())

    # unary operations -------------------------------------------------

    def grade(self, s: int) -> "ComplexForm":
        return grade_project(self, s)

    def conjugate(self) -> "ComplexForm":
        return conjugate(self)

    def __str__(self) -> str:
        return format_form(self)

    def __repr__(self) -> str:
        return f"ComplexForm({self._dim}, {format_form(self)!r})"


def _blade_order(item):
    k = item[0]
    return (grade_of(k), indices_of(k))


def _blade(key, dim: int) -> tuple[int, int]:
    """Canonical mask and permutation sign of an index tuple (sign 0 on repeats)."""
    idx = tuple(int(i) for i in key)
    for i in idx:
        if i < 1 or i > dim:
            raise ContractError(f"basis index {i} outside 1..{dim}")
    if len(set(idx)) != len(idx):
        return 0, 0
    mask, sign = 0, 1
    for i in idx:
        b = 1 << (i - 1)
        sign *= merge_sign(mask, b)
        mask |= b
    return mask, sign


@dataclass(frozen=True)
class GVec:
    """X + alpha in (V + V*) tensor C."""

    vec: tuple
    covec: tuple

    def __post_init__(self):
        v = tuple(complex(x) for x in self.vec)
        a = tuple(complex(x) for x in self.covec)
        if len(v) != len(a):
            raise ContractError("vec and covec lengths differ")
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "covec", a)

    @property
    def dim(self) -> int:
        return len(self.vec)

    @classmethod
    def from_array(cls, arr) -> "GVec":
        arr = np.asarray(arr)
        n = arr.shape[0] // 2
        return cls(tuple(arr[:n]), tuple(arr[n:]))

    def to_array(self) -> np.ndarray:
        return np.array(self.vec + self.covec, dtype=complex)

    def __add__(self, other: "GVec") -> "GVec":
        return GVec.from_array(self.to_array() + other.to_array())

    def __mul__(self, s) -> "GVec":
        return GVec.from_array(complex(s) * self.to_array())

    __rmul__ = __mul__


class TwoForm:
    """A complex 2-form sum_{i<j} M[i, j] e^i ^ e^j with M antisymmetric."""

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError("2-form matrix must be square")
        if not np.array_equal(m, -m.T):
            raise ContractError("2-form matrix must be exactly antisymmetric")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def from_upper(cls, matrix) -> "TwoForm":
        """Build from the strict upper triangle of ``matrix``."""
        u = np.triu(np.asarray(matrix, dtype=complex), 1)
        return cls(u - u.T)

    @classmethod
    def from_form(cls, a: ComplexForm) -> "TwoForm":
        m = np.zeros((a.dim, a.dim), dtype=complex)
        for (i, j), v in a.grade(2).terms():
            m[i - 1, j - 1] = v
            m[j - 1, i - 1] = -v
        return cls(m)

    @classmethod
    def zero(cls, dim: int) -> "TwoForm":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def real(self) -> "TwoForm":
        return TwoForm(self._m.real)

    @property
    def imag(self) -> "TwoForm":
        return TwoForm(self._m.imag)

    def is_real(self) -> bool:
        return not np.any(self._m.imag)

    def contract(self, X) -> np.ndarray:
        """Coefficients of the 1-form i_X of this 2-form."""
        return np.asarray(X, dtype=complex) @ self._m

    def to_form(self) -> ComplexForm:
        n = self.dim
        c = {}
        for i in range(n):
            for j in range(i + 1, n):
                if self._m[i, j] != 0:
                    c[(1 << i) | (1 << j)] = complex(self._m[i, j])
        return ComplexForm._raw(n, c)

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self._m + other._m)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self._m - other._m)

    def __mul__(self, s) -> "TwoForm":
        return TwoForm(complex(s) * self._m)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TwoForm({self._m.tolist()!r})"


# ---------------------------------------------------------------------------
# operations


def _same_dim(*forms: ComplexForm) -> int:
    d = forms[0].dim
    for f in forms[1:]:
        if f.dim != d:
            raise ContractError(f"dimension mismatch: {d} vs {f.dim}")
    return d


def wedge(a: ComplexForm, b: ComplexForm) -> ComplexForm:
    n = _same_dim(a, b)
    out: dict[int, complex] = {}
    for ka, ca in a.masks.items():
        for kb, cb in b.masks.items():
            s = merge_sign(ka, kb)
            if s:
                k = ka | kb
                out[k] = out.get(k, 0j) + s * ca * cb
    return ComplexForm._raw(n, out)


def wedge_all(forms: Sequence[ComplexForm], dim: int | None = None) -> ComplexForm:
    """Ordered wedge product of a sequence (the empty product is 1)."""
    if not forms:
        if dim is None:
            raise ContractError("dimension required for an empty wedge product")
        return ComplexForm.scalar(dim, 1.0)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def _vector_part(X, n: int) -> np.ndarray:
    if isinstance(X, GVec):
        if any(X.covec):
            raise ContractError("interior product takes a pure vector (zero covector part)")
        X = X.vec
    X = np.asarray(X, dtype=complex)
    if X.shape != (n,):
        raise ContractError(f"vector of length {X.shape} does not match dimension {n}")
    return X


def interior(X, a: ComplexForm) -> ComplexForm:
    """Leftmost-slot contraction i_X a."""
    X = _vector_part(X, a.dim)
    out: dict[int, complex] = {}
    nz = [(i, complex(X[i])) for i in range(a.dim) if X[i] != 0]
    for k, c in a.masks.items():
        for i, x in nz:
            b = 1 << i
            if k & b:
                rest = k ^ b
                out[rest] = out.get(rest, 0j) + merge_sign(b, rest) * x * c
    return ComplexForm._raw(a.dim, out)


def covector_wedge(alpha, a: ComplexForm) -> ComplexForm:
    """alpha ^ a for a 1-form given by its coefficient vector."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (a.dim,):
        raise ContractError("covector length does not match dimension")
    out: dict[int, complex] = {}
    nz = [(i, complex(alpha[i])) for i in range(a.dim) if alpha[i] != 0]
    for k, c in a.masks.items():
        for i, x in nz:
            b = 1 << i
            if not k & b:
                kk = k | b
                out[kk] = out.get(kk, 0j) + merge_sign(b, k) * x * c
    return ComplexForm._raw(a.dim, out)


def clifford_act(v: GVec, a: ComplexForm) -> ComplexForm:
    """(X + alpha) . a = i_X a + alpha ^ a."""
    if v.dim != a.dim:
        raise ContractError(f"dimension mismatch: {v.dim} vs {a.dim}")
    out = dict(interior(v.vec, a).masks)
    for k, c in covector_wedge(v.covec, a).masks.items():
        out[k] = out.get(k, 0j) + c
    return ComplexForm._raw(a.dim, out)


def metric(v: GVec, w: GVec) -> complex:
    if v.dim != w.dim:
        raise ContractError(f"dimension mismatch: {v.dim} vs {w.dim}")
    X, a = np.array(v.vec), np.array(v.covec)
    Y, b = np.array(w.vec), np.array(w.covec)
    return complex(0.5 * (b @ X + a @ Y))


def reversal(a: ComplexForm) -> ComplexForm:
    return ComplexForm._raw(a.dim, {k: _reversal_sign(grade_of(k)) * c for k, c in a.masks.items()})


def mukai_pair(a: ComplexForm, b: ComplexForm) -> complex:
    """Top-degree coefficient of reversal(a) ^ b."""
    n = _same_dim(a, b)
    top = (1 << n) - 1
    total = 0j
    bm = b.masks
    for ka, ca in a.masks.items():
        kb = top ^ ka
        cb = bm.get(kb)
        if cb is not None:
            total += _reversal_sign(grade_of(ka)) * merge_sign(ka, kb) * ca * cb
    return total


def exp_two_form(B) -> ComplexForm:
    """exp(B) = 1 + B + B^2/2! + ..., exact and terminating."""
    Bf = B.to_form() if isinstance(B, TwoForm) else B.grade(2)
    n = Bf.dim
    out = ComplexForm.scalar(n, 1.0)
    term = out
    for j in range(1, n // 2 + 1):
        term = wedge(term, Bf) / j
        if term.is_zero():
            break
        out = out + term
    return out


def grade_project(a: ComplexForm, s: int) -> ComplexForm:
    return ComplexForm._raw(a.dim, {k: c for k, c in a.masks.items() if grade_of(k) == s})


def conjugate(a: ComplexForm) -> ComplexForm:
    return ComplexForm._raw(a.dim, {k: c.conjugate() for k, c in a.masks.items()})


def parity(a: ComplexForm) -> str:
    """'even', 'odd' or 'mixed' (the zero form counts as even)."""
    ps = {grade_of(k) & 1 for k in a.masks}
    if len(ps) > 1:
        return "mixed"
    return "odd" if ps == {1} else "even"


def embed(a: ComplexForm, dim: int, offset: int = 0) -> ComplexForm:
    """Pull a form back along the projection R^dim -> R^a.dim onto slots offset+1..offset+a.dim."""
    if offset < 0 or offset + a.dim > dim:
        raise ContractError("embedding does not fit")
    return ComplexForm._raw(dim, {k << offset: c for k, c in a.masks.items()})


def pullback(a: ComplexForm, A) -> ComplexForm:
    """Pull ``a`` back along the linear map R^r -> R^n whose columns are ``A[:, j]``.

    The coefficient on the new blade J is sum_I a_I det(A[I, J]).
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != a.dim:
        raise ContractError(f"pullback matrix must have {a.dim} rows")
    r = A.shape[1]
    by_grade: dict[int, list[tuple[tuple[int, ...], complex]]] = {}
    for k, c in a.masks.items():
        by_grade.setdefault(grade_of(k), []).append((tuple(i - 1 for i in indices_of(k)), c))
    out: dict[int, complex] = {}
    for s, items in by_grade.items():
        if s == 0:
            out[0] = out.get(0, 0j) + items[0][1]
            continue
        if s > r:
            continue
        cols = list(combinations(range(r), s))
        rows = np.array([I for I, _ in items])
        coef = np.array([c for _, c in items])
        colarr = np.array(cols)
        sub = A[rows[:, None, :, None], colarr[None, :, None, :]]
        dets = np.linalg.det(sub) if s > 1 else sub[..., 0, 0]
        vals = coef @ dets
        for J, v in zip(cols, vals):
            if v != 0:
                out[mask_of(j + 1 for j in J)] = complex(v)
    return ComplexForm._raw(r, out)


# ---------------------------------------------------------------------------
# literal syntax:  1 + (0,1)*e1^e2 - 2.5*e3


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<blade>e\d+(?:\s*\^\s*e\d+)*)"
    r"|(?P<op>[-+*(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", location=f"column {bad + 1}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


def parse_form(text: str, dim: int | None = None) -> ComplexForm:
    """Parse the literal syntax, e.g. ``1 + (0,1)*e1^e2`` = 1 + i e^1 ^ e^2.

    ``dim`` defaults to the largest index that appears.
    """
    toks = _tokenize(text)
    terms: list[tuple[complex, tuple[int, ...]]] = []
    i = 0

    def expect(kind, val=None):
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of input", location=f"column {len(text) + 1}")
        k, v, p = toks[i]
        if k != kind or (val is not None and v != val):
            raise ParseError(f"expected {val or kind}, found {v!r}", location=f"column {p + 1}")
        i += 1
        return v

    def peek():
        return toks[i] if i < len(toks) else (None, None, len(text))

    sign = 1.0
    first = True
    while True:
        k, v, p = peek()
        if k is None:
            if first:
                raise ParseError("empty form literal", location="column 1")
            raise ParseError("dangling operator", location=f"column {p + 1}")
        if k == "op" and v in "+-":
            sign = -1.0 if v == "-" else 1.0
            i += 1
            k, v, p = peek()
        coef = 1.0 + 0j
        have_coef = False
        if k == "num":
            coef = complex(float(expect("num")))
            have_coef = True
        elif k == "op" and v == "(":
            i += 1
            re_ = _signed_number(expect, peek)
            expect("op", ",")
            im_ = _signed_number(expect, peek)
            expect("op", ")")
            coef = complex(re_, im_)
            have_coef = True
        blade: tuple[int, ...] = ()
        k, v, p = peek()
        if have_coef and k == "op" and v == "*":
            i += 1
            blade = _blade_indices(expect("blade"))
        elif k == "blade":
            if have_coef:
                raise ParseError("missing '*' between coefficient and blade", location=f"column {p + 1}")
            blade = _blade_indices(expect("blade"))
        elif not have_coef:
            raise ParseError(f"expected a term, found {v!r}", location=f"column {p + 1}")
        terms.append((sign * coef, blade))
        first = False
        k, v, p = peek()
        if k is None:
            break
        if not (k == "op" and v in "+-"):
            raise ParseError(f"expected '+' or '-', found {v!r}", location=f"column {p + 1}")
        sign = 1.0
    if dim is None:
        dim = max((max(b) for _, b in terms if b), default=0)
    out = ComplexForm.zero(dim)
    for c, b in terms:
        out = out + ComplexForm(dim, {b: c})
    return out


def _signed_number(expect, peek) -> float:
    k, v, _ = peek()
    sign = 1.0
    if k == "op" and v in "+-":
        expect("op")
        sign = -1.0 if v == "-" else 1.0
    return sign * float(expect("num"))


def _blade_indices(tok: str) -> tuple[int, ...]:
    return tuple(int(part.strip()[1:]) for part in tok.split("^"))


def _fmt_real(x: float) -> str:
    return repr(float(x))


def format_form(a: ComplexForm) -> str:
    """Inverse of :func:`parse_form` (exact round trip for finite coefficients)."""
    if a.is_zero():
        return "0"
    parts = []
    for idx, c in a.terms():
        blade = "^".join(f"e{i}" for i in idx)
        if c.imag == 0:
            neg = math.copysign(1.0, c.real) < 0
            body = _fmt_real(abs(c.real))
        else:
            neg = False
            body = f"({_fmt_real(c.real)},{_fmt_real(c.imag)})"
        term = f"{body}*{blade}" if blade else body
        if not parts:
            parts.append(("-" if neg else "") + term)
        else:
            parts.append((" - " if neg else " + ") + term)
    return "".join(parts)
