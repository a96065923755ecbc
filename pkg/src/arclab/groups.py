"""Ordered abelian groups as lexicographic words of typed components.

A group is a :class:`LexWord`: a finite sequence of components, index 0 most
significant.  Component kinds:

* ``Zed``            the integers
* ``Rat``            the rationals
* ``LocZ(q)``        rationals with denominator coprime to q
* ``FreeReal(gens)`` the subgroup of the reals generated by declared
                     Q-linearly independent constants (rationals and pi)
* ``OmegaTower(s)``  schematic infinite lexicographic sum of LocZ(p_k)
                     over k >= s+1, most significant summand first
* ``PolyModule``     schematic LocZ(q)-module generated by the powers of a
                     transcendental constant; archimedean (it sits inside
                     the reals), so it contributes no inner convex cuts

The first four kinds are *effective*: elements exist and arithmetic is exact.
The last two are analysis-only; words containing them expose the symbolic
interfaces (divisibility, quotient exponents) but no element arithmetic.

Elements of an effective word are nested tuples, one entry per component:
an ``int`` for Zed, a ``Fraction`` for Rat and LocZ, and a tuple of ints
over the generators for FreeReal.  ``flatten``/``unflatten`` convert to the
flat scalar-slot encoding used by the series and formula DSLs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Union

from .errors import DslSyntaxError, NonEffectiveError, ShapeError
from .primes import INF, PartitionMap, PrimeSet, first_primes, is_prime, prime_at, prime_index

# ---------------------------------------------------------------------------
# certified interval arithmetic for pi

_TEN = Fraction(10)


def _arctan_bounds(inv_x: int, eps: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on arctan(1/inv_x) with error below eps (alternating series)."""
    x2 = Fraction(1, inv_x * inv_x)
    term = Fraction(1, inv_x)
    total = Fraction(0)
    j = 0
    while True:
        total += term if j % 2 == 0 else -term
        j += 1
        term = term * x2 * (2 * j - 1) / (2 * j + 1)
        if term < eps:
            break
    # remainder of an alternating series is bounded by the first omitted term
    return total - term, total + term


@lru_cache(maxsize=None)
def pi_interval(digits: int) -> tuple[Fraction, Fraction]:
    """A rational interval containing pi, of width below 10^-digits.

    Machin's formula pi = 16 arctan(1/5) - 4 arctan(1/239) with exact
    Fraction partial sums and alternating-series truncation bounds.
    """
    eps = _TEN ** -(digits + 2)
    a5_lo, a5_hi = _arctan_bounds(5, eps)
    a239_lo, a239_hi = _arctan_bounds(239, eps)
    return 16 * a5_lo - 4 * a239_hi, 16 * a5_hi - 4 * a239_lo


@dataclass(frozen=True)
class RealGen:
    """A generator of a FreeReal component: a rational constant or pi."""

    kind: str  # "rat" | "pi"
    value: Fraction = Fraction(0)  # meaningful for kind == "rat"

    def __post_init__(self):
        if self.kind not in ("rat", "pi"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind == "rat" and self.value == 0:
            raise ValueError("rational generator must be nonzero")

    def describe(self) -> str:
        if self.kind == "pi":
            return "pi"
        return _format_rational(self.value)


PI_GEN = RealGen("pi")


def sign_of_real(gens: tuple[RealGen, ...], coords: tuple[int, ...]) -> int:
    """Exact sign of sum(coords[i] * gens[i]).

    The rational part is exact; a nonzero pi coefficient triggers interval
    refinement, which terminates because the declared linear independence
    makes the value nonzero whenever some coordinate is nonzero.
    """
    rat = Fraction(0)
    pi_coeff = 0
    for g, c in zip(gens, coords):
        if g.kind == "rat":
            rat += g.value * c
        else:
            pi_coeff += c
    if pi_coeff == 0:
        return (rat > 0) - (rat < 0)
    digits = 30
    while digits <= 3840:
        lo, hi = pi_interval(digits)
        val_lo = rat + pi_coeff * (lo if pi_coeff > 0 else hi)
        val_hi = rat + pi_coeff * (hi if pi_coeff > 0 else lo)
        if val_lo > 0:
            return 1
        if val_hi < 0:
            return -1
        digits *= 2
    raise ShapeError("interval refinement failed to separate a real constant from zero")


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class Zed:
    def divisible_primes(self) -> PrimeSet:
        return PrimeSet.empty()

    def exponent_map(self) -> PartitionMap:
        return PartitionMap.constant(1)

    def is_effective(self) -> bool:
        return True

    def n_slots(self) -> int:
        return 1

    def describe(self) -> str:
        return "Z"


@dataclass(frozen=True)
class Rat:
    def divisible_primes(self) -> PrimeSet:
        return PrimeSet.all_primes()

    def exponent_map(self) -> PartitionMap:
        return PartitionMap.constant(0)

    def is_effective(self) -> bool:
        return True

    def n_slots(self) -> int:
        return 1

    def describe(self) -> str:
        return "Q"


@dataclass(frozen=True)
class LocZ:
    q: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"localization prime expected, got {self.q}")

    def divisible_primes(self) -> PrimeSet:
        return PrimeSet.single(self.q).complement()

    def exponent_map(self) -> PartitionMap:
        return PartitionMap.from_pairs(
            [(PrimeSet.single(self.q), 1), (PrimeSet.single(self.q).complement(), 0)]
        )

    def is_effective(self) -> bool:
        return True

    def n_slots(self) -> int:
        return 1

    def describe(self) -> str:
        return f"Zloc({self.q})"


@dataclass(frozen=True)
class FreeReal:
    gens: tuple[RealGen, ...]

    def __post_init__(self):
        if not self.gens:
            raise ValueError("real component needs at least one generator")
        n_pi = sum(1 for g in self.gens if g.kind == "pi")
        n_rat = len(self.gens) - n_pi
        if n_pi > 1 or n_rat > 1:
            # two rationals (or two copies of pi) are linearly dependent over Q
            raise ValueError("real generators must be linearly independent over Q")

    @property
    def rank(self) -> int:
        return len(self.gens)

    def divisible_primes(self) -> PrimeSet:
        return PrimeSet.empty()

    def exponent_map(self) -> PartitionMap:
        return PartitionMap.constant(self.rank)

    def is_effective(self) -> bool:
        return True

    def n_slots(self) -> int:
        return self.rank

    def describe(self) -> str:
        return "real(" + ", ".join(g.describe() for g in self.gens) + ")"


@dataclass(frozen=True)
class OmegaTower:
    """Infinite lexicographic sum of LocZ(p_k) over k >= start+1.

    The summand at tower offset m >= 1 is LocZ(prime_at(start + m)); offset
    grows with depth (less significant).  The deep end is a limit: the
    intersection of the summand tails is trivial, approached but never
    reached by the inner cuts.
    """

    start: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("tower start must be a natural number")

    def summand_prime(self, offset: int) -> int:
        """Prime of the summand at tower offset (1-based)."""
        if offset < 1:
            raise ValueError("tower offsets are 1-based")
        return prime_at(self.start + offset)

    def offset_of_prime(self, p: int) -> int | None:
        """Inverse of summand_prime, or None when p has no summand."""
        k = prime_index(p)
        return k - self.start if k >= self.start + 1 else None

    def tail_excluded(self, from_offset: int) -> PrimeSet:
        """Primes of the summands in the tail starting at from_offset."""
        bound = self.start + from_offset
        return PrimeSet.cofinite_excluding(first_primes(bound))

    def tail_exponent_map(self, from_offset: int) -> PartitionMap:
        tail = self.tail_excluded(from_offset)
        return PartitionMap.from_pairs([(tail, 1), (tail.complement(), 0)])

    def divisible_primes(self) -> PrimeSet:
        return self.tail_excluded(1).complement()

    def exponent_map(self) -> PartitionMap:
        return self.tail_exponent_map(1)

    def is_effective(self) -> bool:
        return False

    def n_slots(self) -> int:
        return 0

    def describe(self) -> str:
        return f"omega_tower(start={self.start})"


@dataclass(frozen=True)
class PolyModule:
    """LocZ(q)-combinations of the powers of a transcendental constant.

    Sits inside the reals, hence archimedean: no proper nontrivial convex
    subgroups.  Divisible away from q; the quotient by q is infinite
    because the powers of the generator are independent over the base.
    """

    q: int
    gen: RealGen

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"localization prime expected, got {self.q}")
        if self.gen.kind != "pi":
            raise ValueError("poly_module generator must be transcendental")

    def divisible_primes(self) -> PrimeSet:
        return PrimeSet.single(self.q).complement()

    def exponent_map(self) -> PartitionMap:
        return PartitionMap.from_pairs(
            [(PrimeSet.single(self.q), INF), (PrimeSet.single(self.q).complement(), 0)]
        )

    def is_effective(self) -> bool:
        return False

    def n_slots(self) -> int:
        return 0

    def describe(self) -> str:
        return f"poly_module(Zloc({self.q}), {self.gen.describe()})"


Component = Union[Zed, Rat, LocZ, FreeReal, OmegaTower, PolyModule]


# ---------------------------------------------------------------------------
# words and elements


@dataclass(frozen=True)
class LexWord:
    """A lexicographic word of components, index 0 most significant."""

    components: tuple[Component, ...]
    name: str | None = None

    def __post_init__(self):
        if not self.components:
            raise ValueError("a group needs at least one component")

    def is_effective(self) -> bool:
        return all(c.is_effective() for c in self.components)

    def n_slots(self) -> int:
        return sum(c.n_slots() for c in self.components)

    def describe(self) -> str:
        return "lex(" + ", ".join(c.describe() for c in self.components) + ")"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LexWord<{self.describe()}>"


# An element is a tuple with one entry per component:
#   Zed -> int, Rat/LocZ -> Fraction, FreeReal -> tuple[int, ...]
GroupElement = tuple


def _require_effective(G: LexWord) -> None:
    if not G.is_effective():
        raise NonEffectiveError(
            f"{G.describe()} contains schematic components; element arithmetic is unavailable"
        )


def q_adic_val(x: Fraction, q: int) -> int:
    """The q-adic valuation of a nonzero rational."""
    if x == 0:
        raise ValueError("q-adic valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % q == 0:
        num //= q
        v += 1
    while den % q == 0:
        den //= q
        v -= 1
    return v


def _coerce_coord(comp: Component, value) -> object:
    if isinstance(comp, Zed):
        f = Fraction(value)
        if f.denominator != 1:
            raise ShapeError(f"integer coordinate expected, got {value}")
        return int(f)
    if isinstance(comp, Rat):
        return Fraction(value)
    if isinstance(comp, LocZ):
        f = Fraction(value)
        if f.denominator % comp.q == 0:
            raise ShapeError(
                f"coordinate {value} has denominator divisible by {comp.q}"
            )
        return f
    if isinstance(comp, FreeReal):
        vec = tuple(value)
        if len(vec) != comp.rank:
            raise ShapeError(f"expected {comp.rank} generator coordinates, got {len(vec)}")
        out = []
        for entry in vec:
            f = Fraction(entry)
            if f.denominator != 1:
                raise ShapeError("real-component coordinates are integer vectors")
            out.append(int(f))
        return tuple(out)
    raise NonEffectiveError(f"{comp.describe()} has no elements")


def element(G: LexWord, *coords) -> GroupElement:
    """Build a validated element from per-component coordinates."""
    _require_effective(G)
    if len(coords) != len(G.components):
        raise ShapeError(
            f"expected {len(G.components)} coordinates, got {len(coords)}"
        )
    return tuple(_coerce_coord(c, v) for c, v in zip(G.components, coords))


def zero_element(G: LexWord) -> GroupElement:
    _require_effective(G)
    out = []
    for comp in G.components:
        if isinstance(comp, Zed):
            out.append(0)
        elif isinstance(comp, FreeReal):
            out.append((0,) * comp.rank)
        else:
            out.append(Fraction(0))
    return tuple(out)


def flatten(G: LexWord, a: GroupElement) -> tuple:
    """Flat scalar-slot encoding: FreeReal coordinates are spliced in place."""
    out = []
    for comp, coord in zip(G.components, a):
        if isinstance(comp, FreeReal):
            out.extend(coord)
        else:
            out.append(coord)
    return tuple(out)


def unflatten(G: LexWord, flat) -> GroupElement:
    flat = tuple(flat)
    if len(flat) != G.n_slots():
        raise ShapeError(f"expected {G.n_slots()} slots, got {len(flat)}")
    out = []
    pos = 0
    for comp in G.components:
        k = comp.n_slots()
        chunk = flat[pos : pos + k]
        pos += k
        out.append(chunk if isinstance(comp, FreeReal) else chunk[0])
    return element(G, *out)


def _check_shape(G: LexWord, a: GroupElement) -> None:
    if not isinstance(a, tuple) or len(a) != len(G.components):
        raise ShapeError(f"element {a!r} does not fit {G.describe()}")


def elem_add(G: LexWord, a: GroupElement, b: GroupElement) -> GroupElement:
    _require_effective(G)
    _check_shape(G, a)
    _check_shape(G, b)
    out = []
    for comp, x, y in zip(G.components, a, b):
        if isinstance(comp, FreeReal):
            out.append(tuple(u + v for u, v in zip(x, y)))
        else:
            out.append(x + y)
    return element(G, *out)


def elem_neg(G: LexWord, a: GroupElement) -> GroupElement:
    return scalar_mul(G, -1, a)


def elem_sub(G: LexWord, a: GroupElement, b: GroupElement) -> GroupElement:
    return elem_add(G, a, elem_neg(G, b))


def scalar_mul(G: LexWord, k: int, a: GroupElement) -> GroupElement:
    _require_effective(G)
    _check_shape(G, a)
    out = []
    for comp, x in zip(G.components, a):
        if isinstance(comp, FreeReal):
            out.append(tuple(k * u for u in x))
        else:
            out.append(k * x)
    return element(G, *out)


def _coord_sign(comp: Component, x) -> int:
    if isinstance(comp, FreeReal):
        if all(u == 0 for u in x):
            return 0
        return sign_of_real(comp.gens, x)
    return (x > 0) - (x < 0)


def elem_cmp(G: LexWord, a: GroupElement, b: GroupElement) -> int:
    """Lexicographic comparison; returns -1, 0 or 1."""
    _require_effective(G)
    _check_shape(G, a)
    _check_shape(G, b)
    for comp, x, y in zip(G.components, a, b):
        if isinstance(comp, FreeReal):
            diff = tuple(u - v for u, v in zip(x, y))
        else:
            diff = x - y
        s = _coord_sign(comp, diff)
        if s != 0:
            return s
    return 0


def is_zero_elem(G: LexWord, a: GroupElement) -> bool:
    _check_shape(G, a)
    for comp, x in zip(G.components, a):
        if isinstance(comp, FreeReal):
            if any(u != 0 for u in x):
                return False
        elif x != 0:
            return False
    return True


def elem_p_divisible(G: LexWord, a: GroupElement, p: int) -> bool:
    """Membership of a in pG, decided coordinatewise."""
    _require_effective(G)
    _check_shape(G, a)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    for comp, x in zip(G.components, a):
        if isinstance(comp, Zed):
            if x % p != 0:
                return False
        elif isinstance(comp, Rat):
            continue
        elif isinstance(comp, LocZ):
            if p == comp.q and x != 0 and q_adic_val(x, comp.q) < 1:
                return False
        elif isinstance(comp, FreeReal):
            if any(u % p != 0 for u in x):
                return False
    return True


def elem_div_by_p(G: LexWord, a: GroupElement, p: int) -> GroupElement:
    """The b with p*b = a; requires elem_p_divisible(G, a, p)."""
    if not elem_p_divisible(G, a, p):
        raise ShapeError(f"element is not divisible by {p}")
    out = []
    for comp, x in zip(G.components, a):
        if isinstance(comp, Zed):
            out.append(x // p)
        elif isinstance(comp, FreeReal):
            out.append(tuple(u // p for u in x))
        else:
            out.append(x / p)
    return element(G, *out)


def format_element(G: LexWord, a: GroupElement) -> str:
    slots = flatten(G, a)
    return "(" + ", ".join(_format_rational(Fraction(s)) for s in slots) + ")"


def _format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# the group DSL

_TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<sym>[(),=/-]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise DslSyntaxError(f"unexpected character {text[at]!r}", at, text)
        for kind in ("ident", "int", "sym"):
            val = m.group(kind)
            if val is not None:
                tokens.append((kind, val, m.start(kind)))
                break
        pos = m.end()
    return tokens


class _GroupParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise DslSyntaxError("unexpected end of input", len(self.text), self.text)
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value:
            raise DslSyntaxError(f"expected {value!r}, got {val!r}", pos, self.text)

    def expect_int(self) -> int:
        kind, val, pos = self.next()
        if kind != "int":
            raise DslSyntaxError(f"expected a number, got {val!r}", pos, self.text)
        return int(val)

    def parse(self) -> LexWord:
        kind, val, pos = self.next()
        if val != "lex":
            raise DslSyntaxError("group must start with lex(", pos, self.text)
        self.expect("(")
        comps = [self.parse_component()]
        while True:
            tok = self.peek()
            if tok is None:
                raise DslSyntaxError("unterminated lex(...)", len(self.text), self.text)
            if tok[1] == ",":
                self.next()
                comps.append(self.parse_component())
            elif tok[1] == ")":
                self.next()
                break
            else:
                raise DslSyntaxError(f"expected , or ), got {tok[1]!r}", tok[2], self.text)
        if self.peek() is not None:
            tok = self.peek()
            raise DslSyntaxError(f"trailing input {tok[1]!r}", tok[2], self.text)
        return LexWord(tuple(comps))

    def parse_component(self) -> Component:
        kind, val, pos = self.next()
        if kind != "ident":
            raise DslSyntaxError(f"component expected, got {val!r}", pos, self.text)
        try:
            if val == "Z":
                return Zed()
            if val == "Q":
                return Rat()
            if val == "Zloc":
                self.expect("(")
                q = self.expect_int()
                self.expect(")")
                return LocZ(q)
            if val == "real":
                self.expect("(")
                gens = [self.parse_gen()]
                while self.peek() and self.peek()[1] == ",":
                    self.next()
                    gens.append(self.parse_gen())
                self.expect(")")
                return FreeReal(tuple(gens))
            if val == "omega_tower":
                self.expect("(")
                kw, kv, kp = self.next()
                if kv != "start":
                    raise DslSyntaxError("omega_tower takes start=<nat>", kp, self.text)
                self.expect("=")
                start = self.expect_int()
                self.expect(")")
                return OmegaTower(start)
            if val == "poly_module":
                self.expect("(")
                self.expect("Zloc")
                self.expect("(")
                q = self.expect_int()
                self.expect(")")
                self.expect(",")
                gen = self.parse_gen()
                self.expect(")")
                return PolyModule(q, gen)
        except ValueError as exc:
            raise DslSyntaxError(str(exc), pos, self.text) from exc
        raise DslSyntaxError(f"unknown component kind {val!r}", pos, self.text)

    def parse_gen(self) -> RealGen:
        tok = self.peek()
        if tok is not None and tok[0] == "ident" and tok[1] == "pi":
            self.next()
            return RealGen("pi")
        value = self.parse_rational()
        return RealGen("rat", value)

    def parse_rational(self) -> Fraction:
        sign = 1
        tok = self.peek()
        if tok is not None and tok[1] == "-":
            self.next()
            sign = -1
        num = self.expect_int()
        tok = self.peek()
        if tok is not None and tok[1] == "/":
            self.next()
            den = self.expect_int()
            if den == 0:
                raise DslSyntaxError("zero denominator", tok[2], self.text)
            return Fraction(sign * num, den)
        return Fraction(sign * num)


def parse_group(text: str) -> LexWord:
    """Parse the group DSL, e.g. "lex(Z, Q)" or "lex(omega_tower(start=0))"."""
    return _GroupParser(text).parse()


def print_group(G: LexWord) -> str:
    return G.describe()


def iter_slot_components(G: LexWord) -> Iterator[tuple[int, Component]]:
    """Yields (flat slot index, owning component) for each scalar slot."""
    slot = 0
    for comp in G.components:
        for _ in range(comp.n_slots()):
            yield slot, comp
            slot += 1
