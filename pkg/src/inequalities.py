"""Svetlichny, Mermin and CHSH expressions evaluated exactly."""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Dict, List, Tuple

from .box_core import BITS, BipartiteBox, TripartiteBox, _pm, correlators_of
from .exact_scalar import ZERO, ExactScalar

logger = logging.getLogger(__name__)

Label = Tuple[int, ...]


class InequalityFamily(str, Enum):
    SVETLICHNY = 'svetlichny'
    MERMIN = 'mermin'
    CHSH = 'chsh'


LOCAL_BOUND = {
    InequalityFamily.SVETLICHNY: ExactScalar(4),
    InequalityFamily.MERMIN: ExactScalar(2),
    InequalityFamily.CHSH: ExactScalar(2),
}

ALGEBRAIC_MAX = {
    InequalityFamily.SVETLICHNY: ExactScalar(8),
    InequalityFamily.MERMIN: ExactScalar(4),
    InequalityFamily.CHSH: ExactScalar(4),
}

LABELS: Tuple[Label, ...] = tuple(product(BITS, repeat=4))


@dataclass(frozen=True)
class InequalityValue:
    family: InequalityFamily
    label: Label
    value: ExactScalar

    @property
    def bound(self) -> ExactScalar:
        return LOCAL_BOUND[self.family]

    @property
    def violated(self) -> bool:
        return self.value > self.bound

    @property
    def at_algebraic_max(self) -> bool:
        return self.value == ALGEBRAIC_MAX[self.family]

    def to_json(self) -> Dict[str, object]:
        return {
            'family': self.family.value,
            'label': ''.join(map(str, self.label)),
            'value': self.value.to_json(),
            'bound': str(self.bound),
            'violated': self.violated,
            'at_max': self.at_algebraic_max,
        }


def _svetlichny_from_triples(triples, al, be, ga, ep) -> ExactScalar:
    total = ZERO
    for x, y, z in product(BITS, repeat=3):
        sign = _pm((x & y) ^ (x & z) ^ (y & z) ^ (al & x) ^ (be & y) ^ (ga & z) ^ ep)
        total = total + sign * triples[4 * x + 2 * y + z]
    return total


def _mermin_from_triples(t, al, be, ga, ep) -> ExactScalar:
    if al ^ be ^ ga == 0:
        return (_pm(ga ^ ep) * t[0b001] + _pm(be ^ ep) * t[0b010] + _pm(al ^ ep) * t[0b100]
                + _pm(al ^ be ^ ga ^ ep ^ 1) * t[0b111])
    return (_pm(al ^ be ^ ep ^ 1) * t[0b110] + _pm(al ^ ga ^ ep ^ 1) * t[0b101]
            + _pm(be ^ ga ^ ep ^ 1) * t[0b011] + _pm(ep) * t[0b000])


def svetlichny_value(box: TripartiteBox, al: int, be: int, ga: int, ep: int) -> ExactScalar:
    """S_{αβγε} = Σ_xyz (−1)^{xy⊕xz⊕yz⊕αx⊕βy⊕γz⊕ε}⟨AxByCz⟩."""
    return _svetlichny_from_triples(correlators_of(box).triples, al, be, ga, ep)


def mermin_value(box: TripartiteBox, al: int, be: int, ga: int, ep: int) -> ExactScalar:
    """M_{αβγε}: the odd-parity form when α⊕β⊕γ = 0, the even-parity form otherwise."""
    return _mermin_from_triples(correlators_of(box).triples, al, be, ga, ep)


def svetlichny_values(box: TripartiteBox) -> Dict[Label, ExactScalar]:
    triples = correlators_of(box).triples
    return {label: _svetlichny_from_triples(triples, *label) for label in LABELS}


def mermin_values(box: TripartiteBox) -> Dict[Label, ExactScalar]:
    triples = correlators_of(box).triples
    return {label: _mermin_from_triples(triples, *label) for label in LABELS}


def chsh_values(box: BipartiteBox) -> List[ExactScalar]:
    """The 8 CHSH expressions Σ_yz (−1)^{yz⊕αy⊕βz⊕γ}⟨ByCz⟩, index 4α+2β+γ."""
    corr = {}
    for y, z in product(BITS, BITS):
        corr[y, z] = sum((_pm(b ^ c) * box[b, c, y, z] for b, c in product(BITS, BITS)), ZERO)
    values = []
    for al, be, ga in product(BITS, repeat=3):
        values.append(sum((_pm((y & z) ^ (al & y) ^ (be & z) ^ ga) * corr[y, z]
                           for y, z in product(BITS, BITS)), ZERO))
    return values


def chsh_local(box: BipartiteBox) -> bool:
    """True when every CHSH expression respects the local bound 2."""
    return all(v <= 2 for v in chsh_values(box))


def violation_report(box: TripartiteBox) -> List[InequalityValue]:
    """All 16 Svetlichny and 16 Mermin values with their flags."""
    triples = correlators_of(box).triples
    report = [InequalityValue(InequalityFamily.SVETLICHNY, label, _svetlichny_from_triples(triples, *label))
              for label in LABELS]
    report += [InequalityValue(InequalityFamily.MERMIN, label, _mermin_from_triples(triples, *label))
               for label in LABELS]
    violated = [v for v in report if v.violated]
    logger.info(f"Violation report: {len(violated)} of {len(report)} expressions above the local bound")
    return report
