"""Exact membership of boxes in the local, 2-local and Svetlichny-box polytopes."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .box_core import (TripartiteBox, VertexLabel, deterministic_labels, make_vertex, shared_constant_two_local_labels,
                       svetlichny_labels, two_local_labels, validate)
from .errors import InvalidBox, SoundnessViolation
from .exact_lp import ExactSimplex
from .exact_scalar import ZERO, ExactScalar

logger = logging.getLogger(__name__)


class Polytope(str, Enum):
    L = 'L'
    L2 = 'L2'
    R = 'R'


def polytope_labels(polytope: Polytope) -> List[VertexLabel]:
    """Vertex labels in fixed order: deterministic, then two-local, then Svetlichny.

    L2 takes every PR box paired with every deterministic lone party (96).
    R takes the 48 of those whose lone party shares the PR constant, plus the
    16 Svetlichny boxes, so R has 128 vertices and does not contain all of L2.
    """
    polytope = Polytope(polytope)
    labels = deterministic_labels()
    if polytope == Polytope.L2:
        labels += two_local_labels()
    if polytope == Polytope.R:
        labels += shared_constant_two_local_labels() + svetlichny_labels()
    return labels


@lru_cache(maxsize=None)
def vertex_boxes(polytope: Polytope) -> Tuple[TripartiteBox, ...]:
    return tuple(make_vertex(label) for label in polytope_labels(polytope))


@dataclass
class MembershipWitness:
    """Result of one membership query.

    A feasible result carries the vertex weights; an infeasible one carries a
    Farkas vector ``f`` over the 64 probability rows plus the normalization
    row, with f·(V, 1) <= 0 for every vertex V and f·(box, 1) > 0.
    """

    polytope: Polytope
    feasible: bool
    weights: Dict[str, ExactScalar] = field(default_factory=dict)
    farkas: Optional[List[ExactScalar]] = None

    def to_json(self) -> Dict[str, object]:
        data = {'polytope': self.polytope.value, 'feasible': self.feasible}
        if self.feasible:
            data['weights'] = {k: str(v) for k, v in sorted(self.weights.items())}
        else:
            data['farkas'] = [str(v) for v in self.farkas or []]
        return data

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> 'MembershipWitness':
        try:
            polytope = Polytope(data['polytope'])
            feasible = bool(data['feasible'])
            weights = {str(k): ExactScalar.from_json(v) for k, v in dict(data.get('weights', {})).items()}
            farkas = data.get('farkas')
            if farkas is not None:
                farkas = [ExactScalar.from_json(v) for v in farkas]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidBox(f"malformed membership witness: {e}") from e
        return cls(polytope, feasible, weights, farkas)

    def is_certificate(self) -> bool:
        return not self.feasible and self.farkas is not None


def _build_lp(box: TripartiteBox, vertices: Sequence[TripartiteBox]) -> ExactSimplex:
    lp = ExactSimplex(len(vertices))
    for e in range(64):
        lp.add_equality({j: v.p[e] for j, v in enumerate(vertices) if v.p[e]}, box.p[e])
    lp.add_equality({j: 1 for j in range(len(vertices))}, 1)
    return lp


def lp_feasible(box: TripartiteBox, polytope: Polytope) -> MembershipWitness:
    """Decide whether ``box`` is a convex mixture of the polytope's vertices."""
    polytope = Polytope(polytope)
    labels = polytope_labels(polytope)
    vertices = vertex_boxes(polytope)
    logger.info(f"Membership LP over {polytope.value} ({len(vertices)} vertices)")
    result = _build_lp(box, vertices).solve()

    if not result.feasible:
        farkas = [ExactScalar.coerce(v) for v in result.farkas]
        witness = MembershipWitness(polytope, False, farkas=farkas)
        if not verify_certificate(box, witness):
            raise SoundnessViolation(f"Farkas vector for {polytope.value} fails verification")
        return witness

    weights = {labels[j].key: ExactScalar.coerce(w) for j, w in enumerate(result.values) if w}
    witness = MembershipWitness(polytope, True, weights)
    if not verify_witness(box, witness):
        raise SoundnessViolation(f"{polytope.value} witness does not reconstruct the box")
    logger.info(f"Box is in {polytope.value} with {len(weights)} active vertices")
    return witness


def verify_witness(box: TripartiteBox, witness: MembershipWitness) -> bool:
    """Exact mixture reconstruction, independent of the solver."""
    if not witness.feasible:
        return False
    allowed = {label.key for label in polytope_labels(witness.polytope)}
    if any(key not in allowed for key in witness.weights):
        return False
    if any(w < 0 for w in witness.weights.values()):
        return False
    if sum(witness.weights.values(), ZERO) != 1:
        return False
    table = [ZERO] * 64
    for key, w in witness.weights.items():
        vertex = make_vertex(VertexLabel.from_key(key))
        table = [acc + w * v for acc, v in zip(table, vertex.p)]
    return tuple(table) == box.p


def verify_certificate(box: TripartiteBox, witness: MembershipWitness) -> bool:
    """Check the Farkas separation against every vertex of the polytope."""
    if witness.feasible or witness.farkas is None or len(witness.farkas) != 65:
        return False
    f = [ExactScalar.coerce(v) for v in witness.farkas]
    normal, offset = f[:64], f[64]

    def pair(table) -> ExactScalar:
        return sum((fi * pi for fi, pi in zip(normal, table) if fi and pi), ZERO) + offset

    if pair(box.p) <= 0:
        return False
    return all(pair(v.p) <= 0 for v in vertex_boxes(witness.polytope))


@dataclass
class MembershipReport:
    in_ns: bool
    in_r: Optional[bool]
    in_l2: Optional[bool]
    in_l: Optional[bool]
    witnesses: Dict[Polytope, MembershipWitness] = field(default_factory=dict)

    def to_json(self) -> Dict[str, object]:
        return {
            'in_NS': self.in_ns,
            'in_R': self.in_r,
            'in_L2': self.in_l2,
            'in_L': self.in_l,
            'witnesses': {p.value: w.to_json() for p, w in sorted(self.witnesses.items())},
        }


def membership_report(box: TripartiteBox,
                      polytopes: Sequence[Polytope] = (Polytope.L, Polytope.L2, Polytope.R)) -> MembershipReport:
    """Membership flags for every requested polytope, checked against L ⊆ L2 ⊆ NS and L ⊆ R ⊆ NS."""
    check = validate(box)
    in_ns = check.valid and check.nonnegative
    witnesses: Dict[Polytope, MembershipWitness] = {}
    if in_ns:
        for polytope in polytopes:
            witnesses[Polytope(polytope)] = lp_feasible(box, polytope)
    else:
        logger.warning("Box is not a valid nonsignaling box; skipping polytope LPs")

    def flag(polytope: Polytope) -> Optional[bool]:
        w = witnesses.get(polytope)
        return w.feasible if w is not None else (False if not in_ns else None)

    in_l, in_l2, in_r = flag(Polytope.L), flag(Polytope.L2), flag(Polytope.R)
    # Unrequested polytopes take what the nesting implies, None when undecided.
    if in_l2 is None:
        in_l2 = True if in_l else None
    if in_r is None:
        in_r = True if in_l else None
    if in_l is None and (in_l2 is False or in_r is False):
        in_l = False

    if (in_l and not (in_l2 and in_r)) or ((in_l2 or in_r) and not in_ns):
        raise SoundnessViolation(f"membership flags break nesting: L={in_l} L2={in_l2} R={in_r} NS={in_ns}")
    logger.info(f"Membership: NS={in_ns} R={in_r} L2={in_l2} L={in_l}")
    return MembershipReport(in_ns, in_r, in_l2, in_l, witnesses)
