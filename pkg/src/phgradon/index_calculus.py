"""Polyhomogeneous index sets and the index maps of R, R* and the normal operators.

An index set is a subset of C x N0 closed under lowering the log power and
raising the exponent by non-negative integers.  Sets here are always finitely
generated, so they are stored as a canonical list of generators and every
membership question is answered from the generators.

Exponents are kept exact where possible: integers, rationals and floats that
are within 1e-12 of a small-denominator rational become ``Fraction``; genuinely
complex or irrational exponents stay ``complex``.  Two exponents are identified
when they differ by at most ``EXPONENT_TOL``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

EXPONENT_TOL = 1e-9

Exponent = Union[Fraction, complex]
ExponentLike = Union[int, float, complex, Fraction, str]


class IndexSetError(ValueError):
    """Raised when an index-set operation's precondition fails."""


def as_exponent(value: ExponentLike) -> Exponent:
    """Normalise a number to the internal exponent representation."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        try:
            return Fraction(text)
        except ValueError:
            return as_exponent(complex(text.replace("i", "j")))
    z = complex(value)
    if abs(z.imag) <= 1e-12:
        q = Fraction(z.real).limit_denominator(1000)
        if abs(float(q) - z.real) <= 1e-12:
            return q
        return complex(z.real, 0.0)
    return z


def _cx(e: Exponent) -> complex:
    return complex(float(e.real), float(e.imag)) if isinstance(e, complex) else complex(float(e))


def exponents_equal(a: Exponent, b: Exponent) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(_cx(a) - _cx(b)) <= EXPONENT_TOL


def integer_gap(a: Exponent, b: Exponent) -> int | None:
    """Return a - b when it is an integer (within tolerance), else None."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        d = a - b
        return int(d) if d.denominator == 1 else None
    d = _cx(a) - _cx(b)
    r = round(d.real)
    if abs(d.imag) <= EXPONENT_TOL and abs(d.real - r) <= EXPONENT_TOL:
        return int(r)
    return None


def is_nonneg_integer(e: Exponent) -> bool:
    m = integer_gap(e, Fraction(0))
    return m is not None and m >= 0


def is_half_odd(e: Exponent) -> bool:
    """True when e lies in 1/2 + Z."""
    return integer_gap(e, Fraction(1, 2)) is not None


def _format_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.12g}"


@dataclass(frozen=True)
class Index:
    """A single (exponent, log power) pair."""

    gamma: Exponent
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_exponent(self.gamma))
        if not isinstance(self.k, int) or self.k < 0:
            raise IndexSetError(f"log power must be a non-negative integer, got {self.k!r}")

    def __eq__(self, other):
        if not isinstance(other, Index):
            return NotImplemented
        return self.k == other.k and exponents_equal(self.gamma, other.gamma)

    def __hash__(self):
        z = _cx(self.gamma)
        return hash((round(z.real, 8), round(z.imag, 8), self.k))

    @property
    def re(self) -> float:
        return _cx(self.gamma).real

    @property
    def im(self) -> float:
        return _cx(self.gamma).imag

    def sort_key(self):
        return (self.re, self.im, self.k)

    def to_text(self) -> str:
        im = self.im
        sign = "-" if im < 0 else "+"
        return f"({_format_real(self.re)}{sign}{_format_real(abs(im))}i, {self.k})"

    def __repr__(self):
        return f"Index{self.to_text()}"


def _covers(gen: Index, idx: Index) -> bool:
    gap = integer_gap(idx.gamma, gen.gamma)
    return gap is not None and gap >= 0 and idx.k <= gen.k


@dataclass(frozen=True)
class IndexSet:
    """Finitely generated index set held by canonical generators.

    ``note`` carries an optional human-readable remark (it is ignored by
    equality and hashing).
    """

    generators: tuple[Index, ...] = ()
    note: str = field(default="", compare=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def generate(cls, indices: Iterable[Index | tuple], note: str = "") -> "IndexSet":
        unique: list[Index] = []
        for item in indices:
            idx = item if isinstance(item, Index) else Index(*item)
            if idx not in unique:
                unique.append(idx)
        # distinct generators never cover each other mutually, so dropping
        # every covered one leaves exactly the non-redundant generators
        kept = [
            cand
            for i, cand in enumerate(unique)
            if not any(_covers(other, cand) for j, other in enumerate(unique) if j != i)
        ]
        kept.sort(key=Index.sort_key)
        return cls(tuple(kept), note)

    @classmethod
    def empty(cls) -> "IndexSet":
        return cls(())

    # -- queries -----------------------------------------------------------

    def __contains__(self, idx) -> bool:
        idx = idx if isinstance(idx, Index) else Index(*idx)
        return any(_covers(g, idx) for g in self.generators)

    def contains(self, idx) -> bool:
        return idx in self

    def is_empty(self) -> bool:
        return not self.generators

    def max_log(self, gamma: ExponentLike) -> int:
        """Largest log power carried at exponent ``gamma`` (-1 if none)."""
        g = as_exponent(gamma)
        best = -1
        for gen in self.generators:
            gap = integer_gap(g, gen.gamma)
            if gap is not None and gap >= 0:
                best = max(best, gen.k)
        return best

    def issubset(self, other: "IndexSet") -> bool:
        return all(g in other for g in self.generators)

    def __le__(self, other):
        return self.issubset(other)

    def __lt__(self, other):
        return self.issubset(other) and not other.issubset(self)

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.issubset(other) and other.issubset(self)

    def __hash__(self):
        return hash(self.generators)

    def members_below(self, t: float) -> list[Index]:
        """All members with real exponent strictly below ``t`` (finite)."""
        out = set()
        for gen in self.generators:
            m = 0
            while gen.re + m < t:
                for k in range(gen.k + 1):
                    out.add(Index(gen.gamma + m, k))
                m += 1
        return sorted(out, key=Index.sort_key)

    # -- serialisation -------------------------------------------------------

    def to_text(self) -> str:
        return "{" + "; ".join(g.to_text() for g in self.generators) + "}"

    def to_json(self) -> list[list]:
        return [[g.re, g.im, g.k] for g in self.generators]

    @classmethod
    def from_json(cls, data) -> "IndexSet":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.generate(Index(complex(re, im), int(k)) for re, im, k in data)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"IndexSet{self.to_text()}"


def generate(indices: Iterable[Index | tuple]) -> IndexSet:
    """Smallest index set containing ``indices``."""
    return IndexSet.generate(indices)


def contains(E: IndexSet, i: Index | tuple) -> bool:
    return i in E


def shift(E: IndexSet, delta: Index | ExponentLike) -> IndexSet:
    """Translate every generator's exponent by ``delta`` (which must carry k=0)."""
    if isinstance(delta, Index):
        if delta.k != 0:
            raise IndexSetError("shift requires an index with zero log power")
        d = delta.gamma
    else:
        d = as_exponent(delta)
    return IndexSet.generate(Index(_add(g.gamma, d), g.k) for g in E.generators)


def _add(a: Exponent, b: Exponent) -> Exponent:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return as_exponent(_cx(a) + _cx(b))


def union(E: IndexSet, F: IndexSet) -> IndexSet:
    return IndexSet.generate(E.generators + F.generators)


def extended_union(E: IndexSet, F: IndexSet) -> IndexSet:
    """Union plus (gamma, p+q+1) wherever both sets carry the exponent gamma.

    The log powers p, q are the largest ones carried at gamma.  They are step
    functions along each lattice gamma + N0 that only change at generator
    exponents, so it suffices to inspect those.
    """
    extra = []
    for cand in {g.gamma for g in E.generators + F.generators}:
        p, q = E.max_log(cand), F.max_log(cand)
        if p >= 0 and q >= 0:
            extra.append(Index(cand, p + q + 1))
    return IndexSet.generate(E.generators + F.generators + tuple(extra))


def inf_index(E: IndexSet) -> float:
    """Smallest real part of an exponent in E; ``math.inf`` for the empty set."""
    if E.is_empty():
        return math.inf
    return min(g.re for g in E.generators)


def radon_index(E: IndexSet, n: int) -> IndexSet:
    """Index set of R on a component with index set E: a shift by (n-1)/2."""
    _check_dim(n)
    if inf_index(E) <= -1:
        raise IndexSetError("non-integrable component: the most singular exponent must exceed -1")
    return shift(E, Fraction(n - 1, 2))


@dataclass(frozen=True)
class CaseTag:
    """Backprojection case of an input (gamma, ell) in dimension n.

    ``branch_nonneg`` is set for cases B and C and records whether
    (n-1)/2 + gamma >= 0; it is None for A and D.
    """

    case: str
    branch_nonneg: bool | None = None

    def __str__(self):
        if self.branch_nonneg is None:
            return self.case
        return f"{self.case}{'+' if self.branch_nonneg else '-'}"


def _check_dim(n: int):
    if not isinstance(n, int) or n < 2:
        raise IndexSetError(f"dimension must be an integer >= 2, got {n!r}")


def case_classify(gamma: ExponentLike, ell: int, n: int) -> CaseTag:
    _check_dim(n)
    g = as_exponent(gamma)
    shifted = _add(Fraction(n - 1, 2), g)
    nonneg = _cx(shifted).real >= -EXPONENT_TOL
    if n % 2 == 0:
        if is_nonneg_integer(g):
            return CaseTag("A")
        if is_half_odd(g):
            return CaseTag("B", nonneg)
        return CaseTag("D")
    m = integer_gap(g, Fraction(0))
    if m is not None and m < 0:
        return CaseTag("C", nonneg)
    return CaseTag("D")


def backprojection_index_forms(gamma: ExponentLike, ell: int, n: int):
    """Generators before closure, as (stated form, proof form).

    The two forms only differ in cases B/C when (n-1)/2 + gamma < 0; both
    close to the same index set.
    """
    tag = case_classify(gamma, ell, n)
    lead = _add(Fraction(n - 1, 2), as_exponent(gamma))
    if tag.case == "A":
        gens = [Index(0, 0)] + ([Index(lead, ell - 1)] if ell > 0 else [])
        return gens, gens
    if tag.case in ("B", "C"):
        eta = lead if tag.branch_nonneg else Fraction(0)
        stated = [Index(lead, ell), Index(0, 0), Index(eta, ell + 1)]
        if tag.branch_nonneg:
            proof = [Index(lead, ell + 1), Index(0, 0)]
        else:
            proof = [Index(lead, ell), Index(0, ell + 1)]
        return stated, proof
    gens = [Index(lead, ell), Index(0, 0)]
    return gens, gens


def backprojection_index(gamma: ExponentLike, ell: int, n: int) -> IndexSet:
    """Index set of R* applied to a simple cylinder component (gamma, ell)."""
    stated, proof = backprojection_index_forms(gamma, ell, n)
    note = ""
    if [i for i in stated] != [i for i in proof]:
        note = f"generators before closure: stated {stated}, proof {proof}"
    return IndexSet.generate(proof, note=note)


def backprojection_index_classical(Eplus: IndexSet, Eminus: IndexSet, n: int) -> IndexSet:
    """Classical pushforward estimate for R*: shifted faces extended-united with smooth."""
    _check_dim(n)
    half = Fraction(n - 1, 2)
    faces = union(shift(Eplus, half), shift(Eminus, half))
    return extended_union(faces, IndexSet.generate([Index(0, 0)]))


def normal_iterate(n: int, ell_iters: int) -> IndexSet:
    """Index set of (R*R)^ell applied to functions smooth up to the boundary."""
    _check_dim(n)
    if ell_iters < 1:
        raise IndexSetError("ell_iters must be at least 1")
    smooth = IndexSet.generate([Index(0, 0)])
    if n % 2 == 1:
        return IndexSet(smooth.generators, note="smooth: odd-dimensional normal operator")
    current = smooth
    for _ in range(ell_iters):
        step = IndexSet.empty()
        for gen in current.generators:
            image = radon_index(IndexSet.generate([gen]), n)
            for out in image.generators:
                # every R-output exponent is a half-integer (case B), and the
                # case-B index map is monotone along the lattice, so acting on
                # generators is enough
                step = union(step, backprojection_index(out.gamma, out.k, n))
        current = step
    return current


def weighted_normal_index(gamma: ExponentLike, n: int) -> IndexSet:
    """Index set of the weighted normal operator on smooth input."""
    _check_dim(n)
    g = as_exponent(gamma)
    if _cx(g).real < 0:
        raise IndexSetError("weighted normal operator requires Re gamma >= 0")
    E = shift(IndexSet.generate([Index(0, 0)]), g)
    E = radon_index(E, n)
    E = shift(E, _add(Fraction(-(n - 1), 2), _neg(g)))
    out = IndexSet.empty()
    for gen in E.generators:
        out = union(out, backprojection_index(gen.gamma, gen.k, n))
    smooth = IndexSet.generate([Index(0, 0)])
    if out != smooth:
        raise IndexSetError(f"weighted normal composite left the smooth index set: {out}")
    return out


def _neg(e: Exponent) -> Exponent:
    return -e if isinstance(e, Fraction) else as_exponent(-_cx(e))


FACES = ("dOmega", "dZ+", "dZ-", "G|dZ+", "G|dZ-", "SZ∩G")


class IndexFamily(Mapping):
    """Index sets attached to the named boundary faces."""

    def __init__(self, sets: Mapping[str, IndexSet] | None = None):
        sets = dict(sets or {})
        for key in sets:
            if key.replace("−", "-") not in FACES:
                raise IndexSetError(f"unknown boundary face {key!r}; expected one of {FACES}")
        self._sets = {k.replace("−", "-"): v for k, v in sets.items()}

    def __getitem__(self, key):
        return self._sets[key.replace("−", "-")]

    def __iter__(self):
        return iter(self._sets)

    def __len__(self):
        return len(self._sets)
