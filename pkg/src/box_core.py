"""Exact boxes: construction, validation and linear manipulation.

A box is a table of conditional probabilities P(outputs|inputs) for one, two
or three parties with binary inputs and outputs. Entries are ExactScalar
values; tables are immutable and compared entrywise without tolerance.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, ClassVar, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .errors import InvalidBox, NegativeProbability, ParameterOutOfRange, SignalingMarginal, WeightError
from .exact_scalar import ONE, SQRT2, ZERO, ExactScalar, Number

logger = logging.getLogger(__name__)

BITS = (0, 1)
PARTY_NAMES = 'ABC'
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
EIGHTH = Fraction(1, 8)


def _pm(bit: int) -> int:
    """(-1)^bit"""
    return -1 if bit & 1 else 1


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Table:
    """Shared storage for n-party tables; index order is inputs then outputs."""

    p: Tuple[ExactScalar, ...]

    PARTIES: ClassVar[int] = 0
    OUTPUT_NAMES: ClassVar[str] = ''
    INPUT_NAMES: ClassVar[str] = ''

    def __post_init__(self):
        entries = tuple(ExactScalar.coerce(v) for v in self.p)
        expected = 4 ** self.PARTIES
        if len(entries) != expected:
            raise InvalidBox(f"{type(self).__name__} needs {expected} entries, got {len(entries)}")
        object.__setattr__(self, 'p', entries)

    @staticmethod
    def _index(bits: Sequence[int]) -> int:
        value = 0
        for bit in bits:
            value = (value << 1) | bit
        return value

    def __getitem__(self, key: Tuple[int, ...]) -> ExactScalar:
        n = self.PARTIES
        outs, ins = key[:n], key[n:]
        return self.p[self._index(tuple(ins) + tuple(outs))]

    @classmethod
    def build(cls, fn: Callable[..., Number]):
        """Tabulate ``fn(*outputs, *inputs)`` over all bit assignments."""
        n = cls.PARTIES
        table = []
        for ins in product(BITS, repeat=n):
            for outs in product(BITS, repeat=n):
                table.append(fn(*outs, *ins))
        return cls(tuple(table))

    @classmethod
    def keys(cls) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        n = cls.PARTIES
        for ins in product(BITS, repeat=n):
            for outs in product(BITS, repeat=n):
                yield outs, ins

    def value(self, outs: Tuple[int, ...], ins: Tuple[int, ...]) -> ExactScalar:
        return self.p[self._index(tuple(ins) + tuple(outs))]

    def entries(self) -> Dict[str, ExactScalar]:
        """Entries keyed ``"outputs|inputs"``, e.g. ``"010|110"``."""
        return {f"{''.join(map(str, o))}|{''.join(map(str, i))}": self.value(o, i)
                for o, i in self.keys()}

    def scaled(self, factor: Number):
        return type(self)(tuple(v * factor for v in self.p))

    def to_frame(self) -> pd.DataFrame:
        """Rows are input strings, columns outcome strings, values exact strings."""
        n = self.PARTIES
        rows = [''.join(map(str, ins)) for ins in product(BITS, repeat=n)]
        cols = [''.join(map(str, outs)) for outs in product(BITS, repeat=n)]
        data = [[str(self.value(outs, ins)) for outs in product(BITS, repeat=n)]
                for ins in product(BITS, repeat=n)]
        frame = pd.DataFrame(data, index=rows, columns=cols)
        frame.index.name = self.INPUT_NAMES
        frame.columns.name = self.OUTPUT_NAMES
        return frame

    def to_floats(self) -> List[float]:
        return [float(v) for v in self.p]


@dataclass(frozen=True)
class SingleBox(_Table):
    """P(a|x)."""

    PARTIES: ClassVar[int] = 1
    OUTPUT_NAMES: ClassVar[str] = 'a'
    INPUT_NAMES: ClassVar[str] = 'x'

    @property
    def is_deterministic(self) -> bool:
        return all(v == 0 or v == 1 for v in self.p)


@dataclass(frozen=True)
class BipartiteBox(_Table):
    """P(bc|yz); closed-form decomposition tables use rows yz and columns bc."""

    PARTIES: ClassVar[int] = 2
    OUTPUT_NAMES: ClassVar[str] = 'bc'
    INPUT_NAMES: ClassVar[str] = 'yz'

    def matrix(self) -> List[List[ExactScalar]]:
        return [[self[b, c, y, z] for b, c in product(BITS, BITS)] for y, z in product(BITS, BITS)]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Number]]) -> 'BipartiteBox':
        """Build from a 4x4 matrix with rows yz and columns bc."""
        return cls.build(lambda b, c, y, z: rows[2 * y + z][2 * b + c])


@dataclass(frozen=True)
class TripartiteBox(_Table):
    """P(abc|xyz)."""

    PARTIES: ClassVar[int] = 3
    OUTPUT_NAMES: ClassVar[str] = 'abc'
    INPUT_NAMES: ClassVar[str] = 'xyz'


AnyBox = Union[SingleBox, BipartiteBox, TripartiteBox]
_BY_PARTIES = {1: SingleBox, 2: BipartiteBox, 3: TripartiteBox}


# ---------------------------------------------------------------------------
# Cuts, pairings and vertex labels
# ---------------------------------------------------------------------------

class Cut(str, Enum):
    A_BC = 'A|BC'
    B_AC = 'B|AC'
    C_AB = 'C|AB'

    @property
    def single(self) -> int:
        return 'ABC'.index(self.value[0])

    @property
    def pair(self) -> Tuple[int, int]:
        return tuple('ABC'.index(ch) for ch in self.value[2:])


class Pairing(str, Enum):
    """Two-local pairings, ordered as in the 2-local form."""

    AB_C = 'AB|C'
    AC_B = 'AC|B'
    BC_A = 'BC|A'

    @property
    def pair(self) -> Tuple[int, int]:
        return tuple('ABC'.index(ch) for ch in self.value[:2])

    @property
    def lone(self) -> int:
        return 'ABC'.index(self.value[3])


class VertexKind(str, Enum):
    DETERMINISTIC = 'D'
    TWO_LOCAL = 'T'
    SVETLICHNY = 'S'
    MERMIN = 'M'


_LABEL_WIDTH = {VertexKind.DETERMINISTIC: 6, VertexKind.TWO_LOCAL: 5,
                VertexKind.SVETLICHNY: 4, VertexKind.MERMIN: 4}


@dataclass(frozen=True)
class VertexLabel:
    """Label of a named extremal box.

    Deterministic bits (α,β,γ,ε,ζ,η) give a=αx⊕β, b=γy⊕ε, c=ζz⊕η. Two-local
    bits (α,β,γ,ζ,η) give a PR box with o_p⊕o_q = i_p·i_q⊕α·i_p⊕β·i_q⊕γ on the
    pairing's pair and o_r = ζ·i_r⊕η for the lone party. Svetlichny bits
    (α,β,γ,ε) give a⊕b⊕c = xy⊕xz⊕yz⊕αx⊕βy⊕γz⊕ε. Mermin bits name the Mermin
    expression the box saturates.
    """

    kind: VertexKind
    bits: Tuple[int, ...]
    pairing: Optional[Pairing] = None

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != _LABEL_WIDTH[self.kind] or any(b not in BITS for b in bits):
            raise InvalidBox(f"bad {self.kind.name} label bits {self.bits}")
        if (self.kind == VertexKind.TWO_LOCAL) != (self.pairing is not None):
            raise InvalidBox("pairing is required exactly for two-local labels")
        object.__setattr__(self, 'bits', bits)

    @property
    def key(self) -> str:
        bits = ''.join(map(str, self.bits))
        if self.kind == VertexKind.TWO_LOCAL:
            return f"T:{self.pairing.value}:{bits}"
        return f"{self.kind.value}:{bits}"

    @classmethod
    def from_key(cls, key: str) -> 'VertexLabel':
        parts = key.split(':')
        try:
            kind = VertexKind(parts[0])
            if kind == VertexKind.TWO_LOCAL:
                return cls(kind, tuple(int(ch) for ch in parts[2]), Pairing(parts[1]))
            if len(parts) != 2:
                raise ValueError(key)
            return cls(kind, tuple(int(ch) for ch in parts[1]))
        except (ValueError, IndexError) as e:
            raise InvalidBox(f"bad vertex label {key!r}") from e

    def __str__(self):
        return self.key


def deterministic(*bits: int) -> VertexLabel:
    return VertexLabel(VertexKind.DETERMINISTIC, bits)


def two_local(pairing: Pairing, *bits: int) -> VertexLabel:
    return VertexLabel(VertexKind.TWO_LOCAL, bits, pairing)


def svetlichny(*bits: int) -> VertexLabel:
    return VertexLabel(VertexKind.SVETLICHNY, bits)


def mermin(*bits: int) -> VertexLabel:
    return VertexLabel(VertexKind.MERMIN, bits)


def deterministic_labels() -> List[VertexLabel]:
    return [deterministic(*bits) for bits in product(BITS, repeat=6)]


def two_local_labels() -> List[VertexLabel]:
    return [two_local(pairing, *bits) for pairing in Pairing for bits in product(BITS, repeat=5)]


def shared_constant_two_local_labels() -> List[VertexLabel]:
    """The 48 two-local vertices whose lone party uses the PR-box constant γ as its input coefficient."""
    return [two_local(pairing, al, be, ga, ga, ep)
            for pairing in Pairing for al, be, ga, ep in product(BITS, repeat=4)]


def svetlichny_labels() -> List[VertexLabel]:
    return [svetlichny(*bits) for bits in product(BITS, repeat=4)]


def mermin_labels() -> List[VertexLabel]:
    return [mermin(*bits) for bits in product(BITS, repeat=4)]


# ---------------------------------------------------------------------------
# Vertices and families
# ---------------------------------------------------------------------------

def _svetlichny_entry(bits, a, b, c, x, y, z) -> Fraction:
    al, be, ga, ep = bits
    parity = (x & y) ^ (x & z) ^ (y & z) ^ (al & x) ^ (be & y) ^ (ga & z) ^ ep
    return QUARTER if (a ^ b ^ c) == parity else Fraction(0)


def mermin_partner(bits: Tuple[int, ...]) -> Tuple[int, ...]:
    """Svetlichny label paired with ``bits`` in the Mermin box saturating ``bits``."""
    al, be, ga, ep = bits
    if al ^ be ^ ga == 0:
        return (1 - al, 1 - be, 1 - ga, 1 - ep)
    return (1 - al, 1 - be, 1 - ga, ep)


def make_vertex(label: VertexLabel) -> TripartiteBox:
    """Exact box of a named vertex (or Mermin box)."""
    bits = label.bits
    if label.kind == VertexKind.DETERMINISTIC:
        al, be, ga, ep, ze, et = bits
        return TripartiteBox.build(
            lambda a, b, c, x, y, z: int(a == (al & x) ^ be and b == (ga & y) ^ ep and c == (ze & z) ^ et))

    if label.kind == VertexKind.TWO_LOCAL:
        al, be, ga, ze, et = bits
        p, q = label.pairing.pair
        r = label.pairing.lone

        def entry(*args):
            outs, ins = args[:3], args[3:]
            pr = (outs[p] ^ outs[q]) == (ins[p] & ins[q]) ^ (al & ins[p]) ^ (be & ins[q]) ^ ga
            det = outs[r] == (ze & ins[r]) ^ et
            return HALF if pr and det else 0

        return TripartiteBox.build(entry)

    if label.kind == VertexKind.SVETLICHNY:
        return TripartiteBox.build(lambda *args: _svetlichny_entry(bits, *args))

    partner = mermin_partner(bits)
    return TripartiteBox.build(
        lambda *args: (_svetlichny_entry(bits, *args) + _svetlichny_entry(partner, *args)) / 2)


def white_noise() -> TripartiteBox:
    return TripartiteBox(tuple([EIGHTH] * 64))


def mermin_box() -> TripartiteBox:
    """½(Sv^0000 + Sv^1110), the Mermin box saturating label (1,1,1,0)."""
    return mix([make_vertex(svetlichny(0, 0, 0, 0)), make_vertex(svetlichny(1, 1, 1, 0))], [HALF, HALF])


def mermin_complement() -> TripartiteBox:
    """½(Sv^0001 + Sv^1111); mixes with ``mermin_box`` to white noise."""
    return mix([make_vertex(svetlichny(0, 0, 0, 1)), make_vertex(svetlichny(1, 1, 1, 1))], [HALF, HALF])


class Family(str, Enum):
    SVF = 'svf'
    MF = 'mf'
    WHITE_NOISE = 'noise'
    BB84 = 'bb84'
    CHSH = 'chsh'


def _check_param(param: Optional[Number], low_open=ZERO, high=ONE, name='param') -> ExactScalar:
    if param is None:
        raise ParameterOutOfRange(f"{name} is required")
    value = ExactScalar.coerce(param)
    if not (low_open < value <= high):
        raise ParameterOutOfRange(f"{name} must lie in ({low_open}, {high}], got {value}")
    return value


def make_family(kind: Family, param: Optional[Number] = None) -> Union[TripartiteBox, BipartiteBox]:
    """Closed-form family members.

    SvF(μ) = (2 + (−1)^{a⊕b⊕c⊕xy⊕xz⊕yz}·√2μ)/16
    MF(ν) = (1 + (−1)^{a⊕b⊕c⊕xy⊕xz⊕yz}·δ_{x⊕y⊕1,z}·ν)/8
    BB84(V) = (1 + (−1)^{b⊕c⊕yz}·δ_{y,z}·V)/4
    CHSHfam(V) = (2 + (−1)^{b⊕c⊕yz}·√2V)/8
    """
    kind = Family(kind)
    if kind == Family.WHITE_NOISE:
        return white_noise()

    t = _check_param(param)
    if kind == Family.SVF:
        term = SQRT2 * t
        return TripartiteBox.build(
            lambda a, b, c, x, y, z: (2 + _pm(a ^ b ^ c ^ (x & y) ^ (x & z) ^ (y & z)) * term) / 16)
    if kind == Family.MF:
        return TripartiteBox.build(
            lambda a, b, c, x, y, z: (1 + _pm(a ^ b ^ c ^ (x & y) ^ (x & z) ^ (y & z))
                                      * int((x ^ y ^ 1) == z) * t) / 8)
    if kind == Family.BB84:
        return BipartiteBox.build(lambda b, c, y, z: (1 + _pm(b ^ c ^ (y & z)) * int(y == z) * t) / 4)
    term = SQRT2 * t
    return BipartiteBox.build(lambda b, c, y, z: (2 + _pm(b ^ c ^ (y & z)) * term) / 8)


# ---------------------------------------------------------------------------
# Bipartite and single-party building blocks
# ---------------------------------------------------------------------------

def pr_box(al: int, be: int, ga: int) -> BipartiteBox:
    """P_PR^{αβγ}(bc|yz) = 1/2 iff b⊕c = yz⊕αy⊕βz⊕γ."""
    return BipartiteBox.build(lambda b, c, y, z: HALF if (b ^ c) == (y & z) ^ (al & y) ^ (be & z) ^ ga else 0)


def deterministic_pair(ga: int, ep: int, ze: int, et: int) -> BipartiteBox:
    return BipartiteBox.build(lambda b, c, y, z: int(b == (ga & y) ^ ep and c == (ze & z) ^ et))


def deterministic_single(al: int, be: int) -> SingleBox:
    """P_D^{αβ}(a|x): a = αx⊕β."""
    return SingleBox.build(lambda a, x: int(a == (al & x) ^ be))


def bipartite_white_noise() -> BipartiteBox:
    return BipartiteBox(tuple([QUARTER] * 16))


def product_pair(first: SingleBox, second: SingleBox) -> BipartiteBox:
    return BipartiteBox.build(lambda b, c, y, z: first[b, y] * second[c, z])


def tensor(single: SingleBox, pair: BipartiteBox, cut: Cut = Cut.A_BC) -> TripartiteBox:
    """Rebuild P(abc|xyz) = P(o_s|i_s)·P(o_p o_q|i_p i_q) for the cut's parties."""
    s = cut.single
    p, q = cut.pair

    def entry(*args):
        outs, ins = args[:3], args[3:]
        return single[outs[s], ins[s]] * pair[outs[p], outs[q], ins[p], ins[q]]

    return TripartiteBox.build(entry)


# 64 local reversible relabelings of a bipartite box:
# (r_b, s_b, t_b, r_c, s_c, t_c) with y -> y⊕r_b, b -> b⊕s_b·y⊕t_b and likewise for Charlie.
RELABELINGS: Tuple[Tuple[int, ...], ...] = tuple(product(BITS, repeat=6))


def relabel_pair(box: BipartiteBox, relabeling: Tuple[int, ...]) -> BipartiteBox:
    rb, sb, tb, rc, sc, tc = relabeling
    return BipartiteBox.build(
        lambda b, c, y, z: box[b ^ (sb & y) ^ tb, c ^ (sc & z) ^ tc, y ^ rb, z ^ rc])


def find_relabeling(source: BipartiteBox, target: BipartiteBox) -> Optional[Tuple[int, ...]]:
    """First of the 64 relabelings mapping ``source`` onto ``target``, if any."""
    for relabeling in RELABELINGS:
        if relabel_pair(source, relabeling) == target:
            return relabeling
    return None


# ---------------------------------------------------------------------------
# Validation, correlators, mixtures and marginals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    normalized: bool
    nonsignaling: bool
    nonnegative: bool

    @property
    def valid(self) -> bool:
        return self.normalized and self.nonsignaling


def _marginal_table(box: AnyBox, parties: Tuple[int, ...], ins: Tuple[int, ...]) -> Tuple[ExactScalar, ...]:
    """Marginal over ``parties`` (sorted) for one full input assignment."""
    n = box.PARTIES
    sums = {}
    for outs in product(BITS, repeat=n):
        key = tuple(outs[k] for k in parties)
        sums[key] = sums.get(key, ZERO) + box.value(outs, ins)
    return tuple(sums[key] for key in sorted(sums))


def _is_nonsignaling(box: AnyBox) -> bool:
    n = box.PARTIES
    subsets = [s for r in range(1, n) for s in combinations(range(n), r)]
    for parties in subsets:
        seen: Dict[Tuple[int, ...], Tuple[ExactScalar, ...]] = {}
        for ins in product(BITS, repeat=n):
            own = tuple(ins[k] for k in parties)
            table = _marginal_table(box, parties, ins)
            if seen.setdefault(own, table) != table:
                return False
    return True


def validate(box: AnyBox) -> ValidationReport:
    """Normalization (nonnegative entries summing to one per input) and NS flags."""
    nonnegative = all(v >= 0 for v in box.p)
    n = box.PARTIES
    sums_ok = all(sum((box.value(outs, ins) for outs in product(BITS, repeat=n)), ZERO) == 1
                  for ins in product(BITS, repeat=n))
    return ValidationReport(normalized=nonnegative and sums_ok,
                            nonsignaling=_is_nonsignaling(box) if n > 1 else True,
                            nonnegative=nonnegative)


@dataclass(frozen=True)
class Correlators:
    """Expectation values: singles (A0,A1,B0,B1,C0,C1), pairs AB(xy), AC(xz), BC(yz), triples (xyz)."""

    singles: Tuple[ExactScalar, ...]
    pairs: Tuple[ExactScalar, ...]
    triples: Tuple[ExactScalar, ...]

    def __post_init__(self):
        for name, size in (('singles', 6), ('pairs', 12), ('triples', 8)):
            values = tuple(ExactScalar.coerce(v) for v in getattr(self, name))
            if len(values) != size:
                raise InvalidBox(f"{name} needs {size} values, got {len(values)}")
            object.__setattr__(self, name, values)

    def triple(self, x: int, y: int, z: int) -> ExactScalar:
        return self.triples[4 * x + 2 * y + z]


def correlators_of(box: TripartiteBox) -> Correlators:
    def expect(sign: Callable[[int, int, int], int], x: int, y: int, z: int) -> ExactScalar:
        return sum((sign(a, b, c) * box[a, b, c, x, y, z] for a, b, c in product(BITS, repeat=3)), ZERO)

    singles = ([expect(lambda a, b, c: _pm(a), x, 0, 0) for x in BITS]
               + [expect(lambda a, b, c: _pm(b), 0, y, 0) for y in BITS]
               + [expect(lambda a, b, c: _pm(c), 0, 0, z) for z in BITS])
    pairs = ([expect(lambda a, b, c: _pm(a ^ b), x, y, 0) for x, y in product(BITS, BITS)]
             + [expect(lambda a, b, c: _pm(a ^ c), x, 0, z) for x, z in product(BITS, BITS)]
             + [expect(lambda a, b, c: _pm(b ^ c), 0, y, z) for y, z in product(BITS, BITS)])
    triples = [expect(lambda a, b, c: _pm(a ^ b ^ c), x, y, z) for x, y, z in product(BITS, repeat=3)]
    return Correlators(tuple(singles), tuple(pairs), tuple(triples))


def from_correlators(singles: Union[Correlators, Sequence[Number]],
                     pairs: Optional[Sequence[Number]] = None,
                     triples: Optional[Sequence[Number]] = None) -> TripartiteBox:
    """Inverse of ``correlators_of`` on nonsignaling boxes."""
    corr = singles if isinstance(singles, Correlators) else Correlators(tuple(singles), tuple(pairs), tuple(triples))
    s, pr, t = corr.singles, corr.pairs, corr.triples

    def entry(a, b, c, x, y, z):
        total = (1 + _pm(a) * s[x] + _pm(b) * s[2 + y] + _pm(c) * s[4 + z]
                 + _pm(a ^ b) * pr[2 * x + y] + _pm(a ^ c) * pr[4 + 2 * x + z] + _pm(b ^ c) * pr[8 + 2 * y + z]
                 + _pm(a ^ b ^ c) * t[4 * x + 2 * y + z])
        return total / 8

    box = TripartiteBox.build(entry)
    negative = [k for k, v in box.entries().items() if v < 0]
    if negative:
        raise NegativeProbability(f"correlators give negative entries at {', '.join(negative[:4])}")
    return box


def linear_combination(boxes: Sequence[AnyBox], coefficients: Sequence[Number]) -> AnyBox:
    """Entrywise Σ c_k·box_k with no convexity requirement."""
    if not boxes or len(boxes) != len(coefficients):
        raise WeightError("boxes and coefficients must be non-empty and of equal length")
    kind = type(boxes[0])
    if any(type(b) is not kind for b in boxes):
        raise WeightError("cannot combine boxes of different shapes")
    coeffs = [ExactScalar.coerce(c) for c in coefficients]
    table = [ZERO] * len(boxes[0].p)
    for box, c in zip(boxes, coeffs):
        if c:
            table = [acc + c * v for acc, v in zip(table, box.p)]
    return kind(tuple(table))


def mix(boxes: Sequence[AnyBox], weights: Sequence[Number]) -> AnyBox:
    """Convex combination; weights must be nonnegative and sum to one."""
    if len(boxes) != len(weights):
        raise WeightError(f"{len(boxes)} boxes but {len(weights)} weights")
    coeffs = [ExactScalar.coerce(w) for w in weights]
    if any(w < 0 for w in coeffs):
        raise WeightError("mixture weights must be nonnegative")
    if sum(coeffs, ZERO) != 1:
        raise WeightError(f"mixture weights sum to {sum(coeffs, ZERO)}, not 1")
    return linear_combination(boxes, coeffs)


def _party_index(name: str) -> int:
    index = PARTY_NAMES.find(str(name).upper())
    if len(str(name)) != 1 or index < 0:
        raise InvalidBox(f"unknown party {name!r}; expected one of {PARTY_NAMES}")
    return index


def _parties_of(spec: Union[str, Sequence[int]]) -> Tuple[int, ...]:
    kept = [_party_index(ch) for ch in spec] if isinstance(spec, str) else list(spec)
    if any(k not in range(3) for k in kept) or len(set(kept)) != len(kept):
        raise InvalidBox(f"bad party selection {spec!r}")
    return tuple(sorted(kept))


def marginal(box: TripartiteBox, parties: Union[str, Sequence[int]],
             conditioning: Optional[Dict[str, int]] = None) -> Union[SingleBox, BipartiteBox]:
    """Marginal distribution of one party or a pair.

    Without ``conditioning`` the marginal must not depend on the remaining
    parties' inputs (SignalingMarginal otherwise). With ``conditioning``
    (party name → input) the marginal at those inputs is returned.
    """
    kept = _parties_of(parties)
    if not 1 <= len(kept) <= 2:
        raise InvalidBox(f"marginal needs one or two parties, got {parties!r}")
    others = [k for k in range(3) if k not in kept]

    def table_for(other_inputs: Dict[int, int]):
        result = _BY_PARTIES[len(kept)]

        def entry(*args):
            m = len(kept)
            own_outs, own_ins = args[:m], args[m:]
            ins = [0, 0, 0]
            for k, i in zip(kept, own_ins):
                ins[k] = i
            for k, i in other_inputs.items():
                ins[k] = i
            total = ZERO
            for outs in product(BITS, repeat=3):
                if all(outs[k] == o for k, o in zip(kept, own_outs)):
                    total = total + box.value(outs, tuple(ins))
            return total

        return result.build(entry)

    if conditioning is not None:
        fixed = {_party_index(k): int(v) for k, v in conditioning.items()}
        return table_for({k: fixed.get(k, 0) for k in others})

    tables = [table_for(dict(zip(others, bits))) for bits in product(BITS, repeat=len(others))]
    if any(t != tables[0] for t in tables[1:]):
        raise SignalingMarginal(f"marginal of {''.join(PARTY_NAMES[k] for k in kept)} depends on other inputs")
    return tables[0]


def flatten_cut(box: TripartiteBox, cut: Cut) -> List[List[ExactScalar]]:
    """4x16 matrix: rows (x,a) of the single party, columns (yz, bc) of the pair."""
    s = cut.single
    p, q = cut.pair
    matrix = []
    for xs, as_ in product(BITS, BITS):
        row = []
        for ip, iq, op, oq in product(BITS, repeat=4):
            outs = [0, 0, 0]
            ins = [0, 0, 0]
            outs[s], ins[s] = as_, xs
            outs[p], outs[q], ins[p], ins[q] = op, oq, ip, iq
            row.append(box.value(tuple(outs), tuple(ins)))
        matrix.append(row)
    return matrix


def flatten_bipartite(box: BipartiteBox) -> List[List[ExactScalar]]:
    """4x4 matrix: rows (y,b), columns (z,c)."""
    return [[box[b, c, y, z] for z, c in product(BITS, BITS)] for y, b in product(BITS, BITS)]


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------

def box_to_json(box: AnyBox) -> Dict[str, object]:
    """``{"parties": n, "entries": {"abc|xyz": {"a": "p/q", "b": "r/s"}}}``; zero entries omitted."""
    return {'parties': box.PARTIES,
            'entries': {k: v.to_json() for k, v in sorted(box.entries().items()) if v}}


def box_from_json(data: Dict[str, object]) -> AnyBox:
    try:
        parties = int(data.get('parties', 3))
        kind = _BY_PARTIES[parties]
        entries = data.get('entries', {})
        if not isinstance(entries, dict):
            raise InvalidBox("entries must be an object")
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InvalidBox(f"malformed box JSON: {e}") from e

    table = {k: ZERO for k in kind(tuple([0] * 4 ** parties)).entries()}
    for key, raw in entries.items():
        if key not in table:
            raise InvalidBox(f"unknown entry key {key!r} for a {parties}-party box")
        table[key] = ExactScalar.from_json(raw)
    return kind.build(lambda *args: table[f"{''.join(map(str, args[:parties]))}|{''.join(map(str, args[parties:]))}"])
