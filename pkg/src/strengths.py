"""Svetlichny and Mermin strengths, the G and Q quantities and canonical decompositions."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from typing import Dict, Optional, Tuple

from .box_core import (TripartiteBox, VertexKind, VertexLabel, box_from_json, box_to_json, linear_combination,
                       make_vertex, mermin, svetlichny, validate, white_noise)
from .errors import InvalidBox, NotInR, SoundnessViolation
from .exact_lp import ExactSimplex
from .exact_scalar import ONE, ZERO, ExactScalar
from .inequalities import LABELS, mermin_values, svetlichny_values
from .membership import Polytope, lp_feasible, polytope_labels, vertex_boxes

logger = logging.getLogger(__name__)

# Nesting orders: which label position varies at the inner, middle and outer level.
GROUPINGS: Tuple[Tuple[int, int, int], ...] = tuple(permutations((2, 1, 0)))


class StrengthMethod(str, Enum):
    FORMULA = 'formula'
    LP = 'lp'


def _nested_gap(values: Dict[Tuple[int, ...], ExactScalar], order: Tuple[int, int, int]) -> ExactScalar:
    inner, middle, outer = order

    def at(bits: Dict[int, int]) -> ExactScalar:
        return values[(bits[0], bits[1], bits[2], 0)]

    def level_inner(fixed):
        return abs(at({**fixed, inner: 0}) - at({**fixed, inner: 1}))

    def level_middle(fixed):
        return abs(level_inner({**fixed, middle: 0}) - level_inner({**fixed, middle: 1}))

    return abs(level_middle({outer: 0}) - level_middle({outer: 1}))


def _grouped_minimum(values: Dict[Tuple[int, ...], ExactScalar]) -> ExactScalar:
    return min(_nested_gap(values, order) for order in GROUPINGS)


def g_quantity(box: TripartiteBox) -> ExactScalar:
    """Minimum over groupings of the nested absolute differences of the ε=0 Svetlichny values.

    The first grouping is ||S000−S001|−|S010−S011|| − ||S100−S101|−|S110−S111||
    in absolute value; the others permute which label position varies at each level.
    """
    return _grouped_minimum(svetlichny_values(box))


def q_quantity(box: TripartiteBox) -> ExactScalar:
    """As ``g_quantity`` over the ε=0 Mermin values."""
    return _grouped_minimum(mermin_values(box))


def _dominant(values: Dict[Tuple[int, ...], ExactScalar]) -> Tuple[Tuple[int, ...], ExactScalar]:
    """Label with the largest value and its gap over every other label (floored at 0)."""
    best = max(LABELS, key=lambda label: (values[label], tuple(1 - b for b in label)))
    others = [values[label] for label in LABELS if label != best]
    gap = values[best] - max(others + [ZERO])
    return best, gap


@dataclass
class StrengthReport:
    svetlichny_strength: ExactScalar
    mermin_strength: ExactScalar
    dominant_sv_label: VertexLabel
    dominant_mermin_variant: VertexLabel
    residual: TripartiteBox
    method: StrengthMethod
    canonical: bool = False
    lp_weights: Dict[str, ExactScalar] = field(default_factory=dict)

    def reconstruct(self) -> TripartiteBox:
        mu, nu = self.svetlichny_strength, self.mermin_strength
        return linear_combination(
            [make_vertex(self.dominant_sv_label), make_vertex(self.dominant_mermin_variant), self.residual],
            [mu, nu, ONE - mu - nu])

    def to_json(self) -> Dict[str, object]:
        return {
            'method': self.method.value,
            'mu': self.svetlichny_strength.to_json(),
            'nu': self.mermin_strength.to_json(),
            'sv_label': self.dominant_sv_label.key,
            'mermin_variant': self.dominant_mermin_variant.key,
            'canonical': self.canonical,
            'residual': box_to_json(self.residual),
            'lp_weights': {k: str(v) for k, v in sorted(self.lp_weights.items())},
        }

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> 'StrengthReport':
        try:
            mu, nu = ExactScalar.from_json(data['mu']), ExactScalar.from_json(data['nu'])
            sv = VertexLabel.from_key(data['sv_label'])
            mm = VertexLabel.from_key(data['mermin_variant'])
            residual = box_from_json(data['residual'])
            method = StrengthMethod(data.get('method', StrengthMethod.LP.value))
            canonical = data['canonical']
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidBox(f"malformed strength report: {e}") from e
        if not isinstance(canonical, bool):
            raise InvalidBox(f"canonical must be true or false, got {canonical!r}")
        return cls(mu, nu, sv, mm, residual, method, canonical)


def _residual(box: TripartiteBox, mu: ExactScalar, sv: VertexLabel,
              nu: ExactScalar, mm: VertexLabel) -> TripartiteBox:
    rest = ONE - mu - nu
    if not rest:
        return white_noise()
    remainder = linear_combination([box, make_vertex(sv), make_vertex(mm)], [ONE, -mu, -nu])
    return remainder.scaled(rest.inverse())


def strength_formula(box: TripartiteBox) -> StrengthReport:
    """μ = G/8 from the box and ν = Q/4 from the box with the Svetlichny part removed."""
    sv_bits, _ = _dominant(svetlichny_values(box))
    mu = g_quantity(box) / 8
    sv = svetlichny(*sv_bits)
    without_sv = linear_combination([box, make_vertex(sv)], [ONE, -mu])
    mm_bits, _ = _dominant(mermin_values(without_sv))
    nu = q_quantity(without_sv) / 4
    mm = mermin(*mm_bits)
    residual = _residual(box, mu, sv, nu, mm)
    report = StrengthReport(mu, nu, sv, mm, residual, StrengthMethod.FORMULA)
    report.canonical = not g_quantity(residual) and not q_quantity(residual)
    return report


def _max_weight(target: TripartiteBox, extra: TripartiteBox, mass: ExactScalar,
                cap: ExactScalar) -> Tuple[ExactScalar, Dict[str, ExactScalar]]:
    """Largest w <= cap with target − w·extra = Σ λ_v V_v over R, Σλ = mass − w, λ >= 0."""
    vertices = vertex_boxes(Polytope.R)
    labels = polytope_labels(Polytope.R)
    n = len(vertices)
    w_col, slack_col = n, n + 1
    lp = ExactSimplex(n + 2)
    for e in range(64):
        coeffs = {j: v.p[e] for j, v in enumerate(vertices) if v.p[e]}
        if extra.p[e]:
            coeffs[w_col] = extra.p[e]
        lp.add_equality(coeffs, target.p[e])
    norm = {j: 1 for j in range(n)}
    norm[w_col] = 1
    lp.add_equality(norm, mass)
    lp.add_equality({w_col: 1, slack_col: 1}, cap)
    lp.set_objective({w_col: 1})
    result = lp.solve()
    if not result.feasible:
        return ZERO, {}
    weight = ExactScalar.coerce(result.values[w_col])
    weights = {labels[j].key: ExactScalar.coerce(v) for j, v in enumerate(result.values[:n]) if v}
    logger.debug(f"Weight LP: w={weight} after {result.pivots} pivots")
    return weight, weights


def strength_lp(box: TripartiteBox) -> StrengthReport:
    """Maximal dominant Svetlichny weight, then maximal dominant Mermin weight, by exact LP.

    Each weight is bounded by the dominance gap of its label: one eighth of
    the Svetlichny gap and one quarter of the Mermin gap.
    """
    if not lp_feasible(box, Polytope.R).feasible:
        raise NotInR()

    sv_values = svetlichny_values(box)
    mu, sv_bits, weights = ZERO, _dominant(sv_values)[0], {}
    for label in LABELS:
        gap = sv_values[label] - max([sv_values[o] for o in LABELS if o != label] + [ZERO])
        if gap <= 0:
            continue
        weight, lp_weights = _max_weight(box, make_vertex(svetlichny(*label)), ONE, gap / 8)
        if weight > mu:
            mu, sv_bits, weights = weight, label, lp_weights
    sv = svetlichny(*sv_bits)
    logger.info(f"Svetlichny strength {mu} on label {sv.key}")

    remainder = linear_combination([box, make_vertex(sv)], [ONE, -mu])
    m_values = mermin_values(remainder)
    nu, mm_bits = ZERO, _dominant(m_values)[0]
    for label in LABELS:
        gap = m_values[label] - max([m_values[o] for o in LABELS if o != label] + [ZERO])
        if gap <= 0:
            continue
        weight, lp_weights = _max_weight(remainder, make_vertex(mermin(*label)), ONE - mu, gap / 4)
        if weight > nu:
            nu, mm_bits, weights = weight, label, lp_weights
    mm = mermin(*mm_bits)
    logger.info(f"Mermin strength {nu} on label {mm.key}")

    residual = _residual(box, mu, sv, nu, mm)
    report = StrengthReport(mu, nu, sv, mm, residual, StrengthMethod.LP, lp_weights=weights)
    report.canonical = not g_quantity(residual) and not q_quantity(residual)
    return report


def canonical_decomposition(box: TripartiteBox, method: Optional[StrengthMethod] = None) -> StrengthReport:
    """Strengths with the mixture identity μ·Sv + ν·M + (1−μ−ν)·residual = box checked exactly."""
    report = strength_formula(box) if method == StrengthMethod.FORMULA else strength_lp(box)
    if report.reconstruct() != box:
        raise SoundnessViolation("canonical decomposition does not reconstruct the box")
    return report


def verify_strength_report(box: TripartiteBox, report: StrengthReport) -> bool:
    """Weights, labels, residual validity, the canonical flag and exact reconstruction."""
    mu, nu = report.svetlichny_strength, report.mermin_strength
    if mu < 0 or nu < 0 or mu + nu > 1:
        logger.debug(f"Strengths out of range: μ={mu}, ν={nu}")
        return False
    if (report.dominant_sv_label.kind != VertexKind.SVETLICHNY
            or report.dominant_mermin_variant.kind != VertexKind.MERMIN):
        return False
    residual = report.residual
    if not isinstance(residual, TripartiteBox) or not isinstance(box, TripartiteBox):
        return False
    check = validate(residual)
    if not (check.normalized and check.nonsignaling):
        logger.debug("Residual is not a nonsignaling box")
        return False
    if report.canonical != (not g_quantity(residual) and not q_quantity(residual)):
        logger.debug("Canonical flag does not match G and Q of the residual")
        return False
    return report.reconstruct() == box


def strengths_agree(box: TripartiteBox) -> bool:
    """Formula and LP routes give the same μ and ν."""
    lp, formula = strength_lp(box), strength_formula(box)
    agree = (lp.svetlichny_strength == formula.svetlichny_strength
             and lp.mermin_strength == formula.mermin_strength)
    if not agree:
        logger.warning(f"Formula (μ={formula.svetlichny_strength}, ν={formula.mermin_strength}) and "
                       f"LP (μ={lp.svetlichny_strength}, ν={lp.mermin_strength}) disagree")
    return agree
