"""Tests for Svetlichny, Mermin and CHSH values."""

from fractions import Fraction

from src.box_core import (Family, bipartite_white_noise, deterministic_labels, make_family, make_vertex, mermin,
                          mermin_box, pr_box, svetlichny, svetlichny_labels, two_local_labels, white_noise)
from src.exact_scalar import SQRT2
from src.inequalities import (LABELS, InequalityFamily, chsh_local, chsh_values, mermin_value, mermin_values,
                              svetlichny_value, svetlichny_values, violation_report)


def test_svf_reaches_svetlichny_value():
    assert svetlichny_value(make_family(Family.SVF, 1), 0, 0, 0, 0) == 4 * SQRT2
    assert svetlichny_value(make_family(Family.SVF, Fraction(1, 2)), 0, 0, 0, 0) == 2 * SQRT2
    assert svetlichny_value(make_family(Family.SVF, 1), 0, 0, 0, 1) == -4 * SQRT2


def test_svetlichny_vertex_saturates_its_label():
    for label in svetlichny_labels():
        values = svetlichny_values(make_vertex(label))
        assert values[label.bits] == 8
        assert sum(1 for v in values.values() if v > 0) == 1


def test_mermin_vertex_saturates_its_label():
    for bits in LABELS:
        assert mermin_value(make_vertex(mermin(*bits)), *bits) == 4


def test_mf_family_mermin_value():
    assert mermin_value(make_family(Family.MF, Fraction(1, 2)), 0, 0, 0, 0) == 2
    assert mermin_values(mermin_box())[(1, 1, 1, 0)] == 4


def test_deterministic_vertices_respect_local_bounds():
    for label in deterministic_labels():
        box = make_vertex(label)
        assert max(svetlichny_values(box).values()) <= 4
        assert max(mermin_values(box).values()) <= 2


def test_two_local_vertices_respect_svetlichny_bound():
    for label in two_local_labels():
        assert max(svetlichny_values(make_vertex(label)).values()) <= 4


def test_white_noise_is_zero_everywhere():
    report = violation_report(white_noise())
    assert len(report) == 32
    assert all(v.value == 0 and not v.violated for v in report)


def test_violation_report_for_svf():
    report = violation_report(make_family(Family.SVF, 1))
    violated = {(v.family, v.label) for v in report if v.violated}
    assert violated == {
        (InequalityFamily.SVETLICHNY, (0, 0, 0, 0)),
        (InequalityFamily.MERMIN, (0, 0, 0, 0)),
        (InequalityFamily.MERMIN, (1, 1, 1, 0)),
    }
    top = next(v for v in report if v.family == InequalityFamily.MERMIN and v.label == (0, 0, 0, 0))
    assert top.value == 2 * SQRT2
    assert not top.at_algebraic_max


def test_inequality_value_json():
    value = violation_report(make_vertex(svetlichny(0, 0, 0, 0)))[0]
    data = value.to_json()
    assert data['family'] == 'svetlichny'
    assert data['label'] == '0000'
    assert data['value'] == {'a': '8', 'b': '0'}
    assert data['violated'] and data['at_max']


def test_chsh_of_pr_box():
    values = chsh_values(pr_box(0, 0, 0))
    assert len(values) == 8
    assert values[0] == 4
    assert values[1] == -4
    assert not chsh_local(pr_box(0, 0, 0))


def test_chsh_family_value_and_noise():
    assert chsh_values(make_family(Family.CHSH, 1))[0] == 2 * SQRT2
    assert chsh_local(bipartite_white_noise())
    assert chsh_local(make_family(Family.BB84, 1))
