"""Sublocal decompositions, rank certificates and superlocality verdicts.

A decomposition across a cut writes a box as Σ_k w_k · S_k ⊗ F_k where S_k is
a single-party box and F_k a box of the two remaining parties. The number of
terms is the hidden-variable dimension it uses; the rank of the box's
flattening across the cut lower-bounds that number for every decomposition.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, combinations_with_replacement, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .box_core import (BITS, HALF, QUARTER, BipartiteBox, Cut, Family, SingleBox, TripartiteBox, _pm,
                       bipartite_white_noise, box_from_json, box_to_json, deterministic_labels, deterministic_single,
                       flatten_bipartite, flatten_cut, make_family, make_vertex, marginal, pr_box, product_pair,
                       tensor, validate)
from .errors import InvalidBox, ParameterOutOfRange, SoundnessViolation, ToolkitError
from .exact_lp import ExactSimplex, matrix_rank
from .exact_scalar import ONE, ZERO, ExactScalar, Number
from .inequalities import chsh_values

logger = logging.getLogger(__name__)

# Deterministic single-party strategies a = αx⊕β, in the order D00, D01, D10, D11.
STRATEGY_NAMES = ('D00', 'D01', 'D10', 'D11')
STRATEGIES: Tuple[SingleBox, ...] = tuple(deterministic_single(al, be) for al, be in product(BITS, BITS))


class PairClass(str, Enum):
    LOCAL = 'local'
    NS = 'ns'
    UNCONSTRAINED = 'unconstrained'


class Status(str, Enum):
    SUBLOCAL = 'sublocal'
    SUPERLOCAL = 'superlocal'
    UNKNOWN = 'unknown'


class AppendixKind(str, Enum):
    SVF_A = 'svf_a'
    MF_C = 'mf_c'
    MF_D = 'mf_d'


Factor = Union[BipartiteBox, SingleBox]


@dataclass(frozen=True)
class Term:
    weight: ExactScalar
    single: SingleBox
    pair: Factor


@dataclass
class SublocalDecomposition:
    """Σ weight·single⊗pair across ``cut``; ``cut`` None means a bipartite box split B|C."""

    cut: Optional[Cut]
    terms: List[Term]
    pair_class: PairClass = PairClass.NS

    @property
    def d(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> Union[TripartiteBox, BipartiteBox]:
        table = None
        for term in self.terms:
            if self.cut is None:
                part = product_pair(term.single, term.pair)
            else:
                part = tensor(term.single, term.pair, self.cut)
            scaled = [term.weight * v for v in part.p]
            table = scaled if table is None else [a + b for a, b in zip(table, scaled)]
        kind = BipartiteBox if self.cut is None else TripartiteBox
        return kind(tuple(table))

    def to_json(self) -> Dict[str, object]:
        return {
            'type': 'decomposition',
            'cut': self.cut.value if self.cut is not None else 'B|C',
            'pair_class': self.pair_class.value,
            'terms': [{'weight': str(t.weight), 'single': box_to_json(t.single), 'pair': box_to_json(t.pair)}
                      for t in self.terms],
        }

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> 'SublocalDecomposition':
        try:
            cut = None if data['cut'] == 'B|C' else Cut(data['cut'])
            pair_class = PairClass(data.get('pair_class', PairClass.NS.value))
            terms = []
            for raw in data['terms']:
                single = box_from_json(raw['single'])
                pair = box_from_json(raw['pair'])
                terms.append(Term(ExactScalar.from_json(raw['weight']), single, pair))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidBox(f"malformed decomposition: {e}") from e
        return cls(cut, terms, pair_class)


@dataclass
class Verdict:
    cut: Optional[Cut]
    d: int
    status: Status
    witness: Optional[SublocalDecomposition] = None
    rank: Optional[int] = None

    def __post_init__(self):
        # A witness with at most d terms and a rank above d cannot coexist.
        if self.witness is not None and self.rank is not None and self.rank > self.d >= self.witness.d:
            raise SoundnessViolation(f"witness with {self.witness.d} terms against rank {self.rank}")

    @property
    def certificate(self) -> Optional[Dict[str, int]]:
        if self.status == Status.SUPERLOCAL:
            return {'rank': self.rank, 'd': self.d}
        return None

    def to_json(self) -> Dict[str, object]:
        data = {'cut': self.cut.value if self.cut is not None else 'B|C', 'status': self.status.value, 'd': self.d}
        if self.certificate:
            data['certificate'] = self.certificate
        if self.witness is not None:
            data['witness'] = self.witness.to_json()
        return data


# ---------------------------------------------------------------------------
# Rank certificates
# ---------------------------------------------------------------------------

def rank_lower_bound(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut] = Cut.A_BC,
                     by_columns: bool = False) -> int:
    """Exact rank of the flattening across ``cut`` (bipartite boxes ignore ``cut``)."""
    matrix = flatten_bipartite(box) if isinstance(box, BipartiteBox) else flatten_cut(box, cut)
    return matrix_rank(matrix, by_columns=by_columns)


def verify_rank_certificate(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut],
                            rank: int, d: int) -> bool:
    """Recompute the rank in column order and check it exceeds ``d``."""
    if (cut is None) != isinstance(box, BipartiteBox):
        logger.debug(f"Cut {cut} does not fit a {type(box).__name__}")
        return False
    recomputed = rank_lower_bound(box, cut, by_columns=True)
    return recomputed == rank and rank > d


# ---------------------------------------------------------------------------
# Factor fitting
# ---------------------------------------------------------------------------

def _layout(cut: Optional[Cut]) -> Tuple[int, Tuple[int, ...], int]:
    """(single party, factor parties, total parties)."""
    if cut is None:
        return 0, (1,), 2
    return cut.single, cut.pair, 3


def _chsh_signs() -> List[Dict[Tuple[int, int, int, int], int]]:
    signs = []
    for al, be, ga in product(BITS, repeat=3):
        signs.append({(b, c, y, z): _pm(b ^ c) * _pm((y & z) ^ (al & y) ^ (be & z) ^ ga)
                      for b, c, y, z in product(BITS, repeat=4)})
    return signs


CHSH_SIGNS = _chsh_signs()


def fit_factors(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut], singles: Sequence[SingleBox],
                pair_class: PairClass = PairClass.NS,
                weights: Optional[Sequence[Number]] = None) -> Optional[SublocalDecomposition]:
    """Solve for factors F_k with box = Σ_k w_k·S_k⊗F_k, the S_k given.

    The variables are the unnormalized factors Q_k = w_k·F_k, so the problem
    is linear. ``weights`` pins each w_k; otherwise they are free.
    """
    s, rest, n = _layout(cut)
    m = len(rest)
    size = 4 ** m
    keys = list(product(BITS, repeat=2 * m))  # (outs..., ins...)
    index = {key: i for i, key in enumerate(keys)}
    k_count = len(singles)
    n_vars = k_count * size
    local = pair_class == PairClass.LOCAL and m == 2
    slack_base = n_vars
    if local:
        n_vars += k_count * len(CHSH_SIGNS)
    lp = ExactSimplex(n_vars)

    def var(k: int, key: Tuple[int, ...]) -> int:
        return k * size + index[key]

    zero_ins = (0,) * m

    def weight_row(k: int, ins: Tuple[int, ...]) -> Dict[int, int]:
        return {var(k, outs + ins): 1 for outs in product(BITS, repeat=m)}

    # Reconstruction
    for ins in product(BITS, repeat=n):
        for outs in product(BITS, repeat=n):
            coeffs = {}
            f_key = tuple(outs[p] for p in rest) + tuple(ins[p] for p in rest)
            for k, single in enumerate(singles):
                c = single[outs[s], ins[s]]
                if c:
                    coeffs[var(k, f_key)] = c
            lp.add_equality(coeffs, box.value(outs, ins))

    for k in range(k_count):
        # Each factor is a box: the same total weight under every input.
        for ins in product(BITS, repeat=m):
            if ins != zero_ins:
                row = weight_row(k, ins)
                for j, v in weight_row(k, zero_ins).items():
                    row[j] = row.get(j, 0) - v
                lp.add_equality(row, 0)
        if weights is not None:
            lp.add_equality(weight_row(k, zero_ins), weights[k])

        if m == 2 and pair_class in (PairClass.NS, PairClass.LOCAL):
            for own in range(2):
                other = 1 - own
                for o, i in product(BITS, BITS):
                    rows = []
                    for j in BITS:
                        row = {}
                        for o2 in BITS:
                            outs = [0, 0]
                            ins = [0, 0]
                            outs[own], outs[other] = o, o2
                            ins[own], ins[other] = i, j
                            row[var(k, tuple(outs) + tuple(ins))] = 1
                        rows.append(row)
                    diff = dict(rows[0])
                    for j, v in rows[1].items():
                        diff[j] = diff.get(j, 0) - v
                    lp.add_equality(diff, 0)

        if local:
            # 2·w_k − CHSH_t(Q_k) − slack = 0
            for t, signs in enumerate(CHSH_SIGNS):
                row = {j: 2 for j in weight_row(k, zero_ins)}
                for key, sign in signs.items():
                    j = var(k, key)
                    row[j] = row.get(j, 0) - sign
                row[slack_base + k * len(CHSH_SIGNS) + t] = -1
                lp.add_equality(row, 0)

    result = lp.solve()
    if not result.feasible:
        return None

    terms = []
    factor_kind = BipartiteBox if m == 2 else SingleBox
    for k, single in enumerate(singles):
        q = [ExactScalar.coerce(result.values[var(k, key)]) for key in keys]
        w = sum((q[index[outs + zero_ins]] for outs in product(BITS, repeat=m)), ZERO)
        if not w:
            continue
        # keys enumerate outs then ins; tables index ins then outs
        table = {key: q[i] / w for i, key in enumerate(keys)}
        factor = factor_kind.build(lambda *args: table[tuple(args)])
        terms.append(Term(w, single, factor))
    decomposition = SublocalDecomposition(cut, terms, pair_class)
    if not verify_decomposition(box, decomposition):
        raise SoundnessViolation("fitted decomposition does not reconstruct the box")
    return decomposition


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def pair_in_class(pair: Factor, pair_class: PairClass) -> bool:
    check = validate(pair)
    if not check.normalized:
        return False
    if isinstance(pair, SingleBox) or pair_class == PairClass.UNCONSTRAINED:
        return True
    if not check.nonsignaling:
        return False
    return pair_class == PairClass.NS or all(v <= 2 for v in chsh_values(pair))


def verify_decomposition(box: Union[TripartiteBox, BipartiteBox], decomposition: SublocalDecomposition) -> bool:
    """Weights, factor classes and exact reconstruction."""
    if not decomposition.terms:
        return False
    weights = [t.weight for t in decomposition.terms]
    if any(w < 0 for w in weights) or sum(weights, ZERO) != 1:
        return False
    for term in decomposition.terms:
        if not validate(term.single).normalized:
            return False
        if not pair_in_class(term.pair, decomposition.pair_class):
            return False
    try:
        rebuilt = decomposition.reconstruct()
    except (InvalidBox, TypeError) as e:
        logger.debug(f"Decomposition does not fit the box shape: {e}")
        return False
    return type(rebuilt) is type(box) and rebuilt == box


def _product_witness(box: Union[TripartiteBox, BipartiteBox],
                     cut: Optional[Cut]) -> Optional[SublocalDecomposition]:
    """Single-term witness when the box factorizes across the cut."""
    s, rest, _ = _layout(cut)
    try:
        if cut is None:
            single = SingleBox.build(lambda b, y: sum((box[b, c, y, 0] for c in BITS), ZERO))
            pair = SingleBox.build(lambda c, z: sum((box[b, c, 0, z] for b in BITS), ZERO))
        else:
            names = 'ABC'
            single = marginal(box, names[s])
            pair = marginal(box, ''.join(names[p] for p in rest))
    except ToolkitError:
        return None
    decomposition = SublocalDecomposition(cut, [Term(ONE, single, pair)], PairClass.NS)
    return decomposition if verify_decomposition(box, decomposition) else None


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def _set_partitions(items: Sequence[int], blocks: int) -> Iterator[List[List[int]]]:
    """All partitions of ``items`` into at most ``blocks`` non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest, blocks):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        if len(partition) < blocks:
            yield [[first]] + partition


def merge_analysis(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut], d: int,
                   witness: SublocalDecomposition,
                   pair_class: PairClass = PairClass.NS) -> Optional[SublocalDecomposition]:
    """Group the terms of a deterministic witness into at most ``d`` merged strategies.

    Each block keeps the total weight of its terms; its single-party box is
    their weighted average and one shared factor is fitted by exact LP.
    """
    terms = witness.terms
    tried = 0
    for partition in _set_partitions(list(range(len(terms))), d):
        singles, weights = [], []
        for block in partition:
            total = sum((terms[k].weight for k in block), ZERO)
            table = [ZERO] * 4
            for k in block:
                table = [acc + terms[k].weight * v for acc, v in zip(table, terms[k].single.p)]
            singles.append(SingleBox(tuple(v / total for v in table)))
            weights.append(total)
        tried += 1
        found = fit_factors(box, cut, singles, pair_class, weights)
        if found is not None:
            logger.info(f"Merge analysis: grouping {partition} succeeds")
            return found
    logger.info(f"Merge analysis: none of {tried} groupings into {d} strategies succeeds")
    return None


def search_decomposition(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut], d: int,
                         pair_class: PairClass = PairClass.NS,
                         merge: bool = True) -> Optional[SublocalDecomposition]:
    """Exhaustive search over deterministic single-party strategies for a witness with at most d terms."""
    if d < 1:
        raise ParameterOutOfRange(f"d must be at least 1, got {d}")
    size = min(d, len(STRATEGIES))
    seen = set()
    for assignment in combinations_with_replacement(range(len(STRATEGIES)), size):
        support = tuple(sorted(set(assignment)))
        if support in seen:
            continue
        seen.add(support)
        found = fit_factors(box, cut, [STRATEGIES[k] for k in support], pair_class)
        if found is not None:
            logger.info(f"Witness found with strategies {[STRATEGY_NAMES[k] for k in support]}")
            return found

    if merge and d < len(STRATEGIES):
        full = fit_factors(box, cut, list(STRATEGIES), pair_class)
        if full is not None and full.d > d:
            return merge_analysis(box, cut, d, full, pair_class)
    return None


def search_product_decomposition(box: TripartiteBox, d: int) -> Optional[SublocalDecomposition]:
    """Mixtures of at most ``d`` ≤ 2 deterministic vertices, as product-form witnesses across A|BC."""
    if not 1 <= d <= 2:
        raise ParameterOutOfRange(f"product search supports d in {{1, 2}}, got {d}")
    labels = deterministic_labels()
    vertices = [make_vertex(label) for label in labels]

    def as_decomposition(pairs: List[Tuple[ExactScalar, int]]) -> SublocalDecomposition:
        terms = []
        for w, j in pairs:
            al, be, ga, ep, ze, et = labels[j].bits
            pair = product_pair(deterministic_single(ga, ep), deterministic_single(ze, et))
            terms.append(Term(w, deterministic_single(al, be), pair))
        return SublocalDecomposition(Cut.A_BC, terms, PairClass.LOCAL)

    for j, vertex in enumerate(vertices):
        if vertex == box:
            return as_decomposition([(ONE, j)])
    if d == 1:
        return None

    for i, j in combinations(range(len(vertices)), 2):
        u, v = vertices[i].p, vertices[j].p
        e = next(k for k in range(64) if u[k] != v[k])
        w = (box.p[e] - v[e]) / (u[e] - v[e])
        if not 0 < w < 1:
            continue
        if all(w * a + (1 - w) * b == c for a, b, c in zip(u, v, box.p)):
            return as_decomposition([(w, i), (1 - w, j)])
    return None


def two_term_alice_choices(box: Union[TripartiteBox, BipartiteBox], cut: Optional[Cut] = Cut.A_BC,
                           pair_class: PairClass = PairClass.LOCAL) -> Dict[str, Optional[SublocalDecomposition]]:
    """The two equal-weight deterministic pairs that reproduce uniform single-party marginals."""
    choices = {}
    for first, second in ((0, 1), (2, 3)):
        name = f"{STRATEGY_NAMES[first]}+{STRATEGY_NAMES[second]}"
        choices[name] = fit_factors(box, cut, [STRATEGIES[first], STRATEGIES[second]], pair_class,
                                    [HALF, HALF])
        logger.info(f"Two-term choice {name}: {'feasible' if choices[name] else 'infeasible'}")
    return choices


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

def superlocality_verdict(box: TripartiteBox, cut: Cut, d: int, pair_class: PairClass = PairClass.NS,
                          search: bool = True, merge: bool = True) -> Verdict:
    """Superlocal with a rank certificate, Sublocal with a witness, or Unknown."""
    cut = Cut(cut)
    rank = rank_lower_bound(box, cut)
    if rank > d:
        if not verify_rank_certificate(box, cut, rank, d):
            raise SoundnessViolation(f"rank {rank} across {cut.value} not reproduced by column elimination")
        logger.info(f"{cut.value}: superlocal (rank {rank} > d={d})")
        return Verdict(cut, d, Status.SUPERLOCAL, rank=rank)

    witness = _product_witness(box, cut) if rank == 1 else None
    if witness is None and search:
        witness = search_decomposition(box, cut, d, pair_class, merge)
    if witness is not None:
        logger.info(f"{cut.value}: sublocal with {witness.d} terms")
        return Verdict(cut, d, Status.SUBLOCAL, witness=witness, rank=rank)
    logger.info(f"{cut.value}: undecided (rank {rank} <= d={d}, no witness)")
    return Verdict(cut, d, Status.UNKNOWN, rank=rank)


@dataclass
class GenuineReport:
    d: int
    verdicts: Dict[Cut, Verdict] = field(default_factory=dict)

    @property
    def genuine(self) -> bool:
        return all(v.status == Status.SUPERLOCAL for v in self.verdicts.values())

    @property
    def absolute(self) -> bool:
        return any(v.status == Status.SUPERLOCAL for v in self.verdicts.values())

    def to_json(self) -> Dict[str, object]:
        return {
            'd': self.d,
            'cuts': [self.verdicts[c].to_json() for c in Cut if c in self.verdicts],
            'genuine': self.genuine,
            'absolute': self.absolute,
        }


def genuine_report(box: TripartiteBox, d: int, search: bool = True, merge: bool = True,
                   cuts: Sequence[Cut] = tuple(Cut)) -> GenuineReport:
    report = GenuineReport(d)
    for cut in cuts:
        report.verdicts[Cut(cut)] = superlocality_verdict(box, cut, d, search=search, merge=merge)
    return report


def bipartite_verdict(box: BipartiteBox, d: int, search: bool = True, merge: bool = True) -> Verdict:
    """Verdict for a bipartite box across B|C, with local (product) witnesses."""
    rank = rank_lower_bound(box, None)
    if rank > d:
        if not verify_rank_certificate(box, None, rank, d):
            raise SoundnessViolation(f"bipartite rank {rank} not reproduced by column elimination")
        return Verdict(None, d, Status.SUPERLOCAL, rank=rank)
    witness = _product_witness(box, None) if rank == 1 else None
    if witness is None and search:
        witness = search_decomposition(box, None, d, PairClass.UNCONSTRAINED, merge)
    if witness is not None:
        return Verdict(None, d, Status.SUBLOCAL, witness=witness, rank=rank)
    return Verdict(None, d, Status.UNKNOWN, rank=rank)


# ---------------------------------------------------------------------------
# Closed-form decompositions
# ---------------------------------------------------------------------------

def _rows(p: ExactScalar, q: ExactScalar) -> Tuple[ExactScalar, ...]:
    return (p, q, q, p)


def appendix_decomposition(kind: AppendixKind, param: Number) -> SublocalDecomposition:
    """Four-term decompositions across A|BC with Alice strategies D00, D01, D10, D11 at weight 1/4."""
    kind = AppendixKind(kind)
    t = ExactScalar.coerce(param)
    quarter = ExactScalar(QUARTER)
    if kind == AppendixKind.SVF_A:
        limit = ExactScalar(0, 1) / 2
        if not ZERO < t <= limit:
            raise ParameterOutOfRange(f"SvF decomposition needs 0 < μ <= 1/√2, got {t}")
        p = (1 + ExactScalar(0, 1) * t) / 4
        q = (1 - ExactScalar(0, 1) * t) / 4
        even, odd, flat = _rows(p, q), _rows(q, p), (quarter,) * 4
        tables = [
            [even, flat, flat, odd],
            [odd, flat, flat, even],
            [flat, even, even, flat],
            [flat, odd, odd, flat],
        ]
        pairs = [BipartiteBox.from_rows(rows) for rows in tables]
        pair_class = PairClass.LOCAL
    elif kind == AppendixKind.MF_C:
        if not ZERO < t <= HALF:
            raise ParameterOutOfRange(f"MF local decomposition needs 0 < ν <= 1/2, got {t}")
        s_, t_ = (1 + t) / 4, (1 - t) / 4
        even, odd = _rows(s_, t_), _rows(t_, s_)
        tables = [
            [even, even, even, odd],
            [odd, odd, odd, even],
            [odd, even, even, even],
            [even, odd, odd, odd],
        ]
        pairs = [BipartiteBox.from_rows(rows) for rows in tables]
        pair_class = PairClass.LOCAL
    else:
        if not ZERO < t <= 1:
            raise ParameterOutOfRange(f"MF nonsignaling decomposition needs 0 < ν <= 1, got {t}")
        noise = bipartite_white_noise()
        pairs = []
        for bits in ((0, 0, 0), (0, 0, 1), (1, 1, 1), (1, 1, 0)):
            pr = pr_box(*bits)
            pairs.append(BipartiteBox(tuple(t * a + (1 - t) * b for a, b in zip(pr.p, noise.p))))
        pair_class = PairClass.NS

    decomposition = SublocalDecomposition(Cut.A_BC, [Term(quarter, s, p) for s, p in zip(STRATEGIES, pairs)],
                                          pair_class)
    target = make_family(Family.SVF if kind == AppendixKind.SVF_A else Family.MF, t)
    if not verify_decomposition(target, decomposition):
        raise SoundnessViolation(f"{kind.value} decomposition does not reproduce its family box")
    return decomposition
