"""Tests for exact polytope membership, witnesses and Farkas certificates."""

from fractions import Fraction

import pytest

from src.box_core import (HALF, Family, Pairing, TripartiteBox, make_family, make_vertex, mermin_box, mix,
                          shared_constant_two_local_labels, svetlichny, two_local, two_local_labels, white_noise)
from src.exact_scalar import ExactScalar, SQRT2
from src.membership import (MembershipWitness, Polytope, lp_feasible, membership_report, polytope_labels,
                            verify_certificate, verify_witness)

INV_SQRT2 = SQRT2 / 2
SVF_GRID = [Fraction(1, 8), Fraction(1, 4), Fraction(3, 8), Fraction(1, 2), Fraction(5, 8), INV_SQRT2,
            Fraction(3, 4), ExactScalar(1)]
MF_GRID = [Fraction(k, 8) for k in range(1, 9)]


def test_vertex_counts():
    assert len(polytope_labels(Polytope.L)) == 64
    assert len(polytope_labels(Polytope.L2)) == 160
    assert len(polytope_labels(Polytope.R)) == 128


def test_r_two_local_vertices_share_the_pr_constant():
    shared = shared_constant_two_local_labels()
    assert len(shared) == 48
    assert set(shared) <= set(two_local_labels())
    assert all(label.bits[2] == label.bits[3] for label in shared)


def test_two_local_vertex_outside_r():
    # PR box on AB with constant 0, Charlie outputs c = z
    box = make_vertex(two_local(Pairing.AB_C, 0, 0, 0, 1, 0))
    assert not lp_feasible(box, Polytope.R).feasible
    report = membership_report(box)
    assert report.in_l2 and report.in_r is False and report.in_l is False


def test_white_noise_is_local_with_uniform_weights():
    witness = lp_feasible(white_noise(), Polytope.L)
    assert witness.feasible
    uniform = MembershipWitness(Polytope.L, True, {label.key: ExactScalar(Fraction(1, 64))
                                                   for label in polytope_labels(Polytope.L)})
    assert verify_witness(white_noise(), uniform)


@pytest.mark.parametrize("mu", SVF_GRID)
def test_svf_local_threshold(mu):
    box = make_family(Family.SVF, mu)
    witness = lp_feasible(box, Polytope.L)
    assert witness.feasible == (mu <= INV_SQRT2)
    if witness.feasible:
        assert verify_witness(box, witness)
    else:
        assert verify_certificate(box, witness)


@pytest.mark.parametrize("nu", MF_GRID)
def test_mf_local_threshold_and_two_local(nu):
    box = make_family(Family.MF, nu)
    assert lp_feasible(box, Polytope.L).feasible == (nu <= HALF)
    witness = lp_feasible(box, Polytope.L2)
    assert witness.feasible
    assert verify_witness(box, witness)


def test_svf_one_is_outside_two_local_with_certificate():
    box = make_family(Family.SVF, 1)
    witness = lp_feasible(box, Polytope.L2)
    assert not witness.feasible
    assert witness.is_certificate()
    assert len(witness.farkas) == 65
    assert verify_certificate(box, witness)


def test_certificate_does_not_separate_a_member():
    box = make_family(Family.SVF, 1)
    certificate = lp_feasible(box, Polytope.L2)
    assert not verify_certificate(white_noise(), certificate)


def test_tampered_witness_is_rejected():
    box = make_family(Family.MF, Fraction(1, 4))
    witness = lp_feasible(box, Polytope.L)
    key = next(iter(witness.weights))
    witness.weights[key] = witness.weights[key] + Fraction(1, 64)
    assert not verify_witness(box, witness)


def test_witness_with_foreign_vertex_is_rejected():
    sv = make_vertex(svetlichny(0, 0, 0, 0))
    witness = MembershipWitness(Polytope.L2, True, {'S:0000': ExactScalar(1)})
    assert not verify_witness(sv, witness)
    assert verify_witness(sv, MembershipWitness(Polytope.R, True, {'S:0000': ExactScalar(1)}))


def test_witness_json_round_trip():
    box = make_family(Family.MF, Fraction(3, 4))
    for polytope in (Polytope.L, Polytope.L2):
        witness = lp_feasible(box, polytope)
        parsed = MembershipWitness.from_json(witness.to_json())
        if parsed.feasible:
            assert verify_witness(box, parsed)
        else:
            assert verify_certificate(box, parsed)


def test_report_for_svetlichny_vertex():
    report = membership_report(make_vertex(svetlichny(0, 0, 0, 0)))
    assert report.in_ns and report.in_r
    assert report.in_l2 is False and report.in_l is False


@pytest.mark.parametrize("box", [make_family(Family.SVF, HALF), make_family(Family.MF, Fraction(1, 4))])
def test_report_local_boxes(box):
    report = membership_report(box)
    assert report.in_l and report.in_l2 and report.in_r


def test_report_infers_unrequested_flags():
    report = membership_report(make_family(Family.MF, Fraction(1, 4)), [Polytope.L])
    assert report.in_l and report.in_l2 and report.in_r
    assert set(report.witnesses) == {Polytope.L}

    report = membership_report(make_family(Family.SVF, 1), [Polytope.R])
    assert report.in_r and report.in_l2 is None and report.in_l is None


def test_mermin_box_is_two_local_but_not_local():
    report = membership_report(mermin_box(), [Polytope.L, Polytope.L2, Polytope.R])
    assert report.in_r and report.in_l2 and report.in_l is False


def test_signaling_box_is_outside_every_polytope():
    box = TripartiteBox.build(lambda a, b, c, x, y, z: int(a == 0 and b == x and c == 0))
    report = membership_report(box)
    assert not report.in_ns
    assert report.in_r is False and report.in_l2 is False and report.in_l is False
    assert report.witnesses == {}


def test_report_json_keys():
    data = membership_report(mix([white_noise(), mermin_box()], [HALF, HALF]), [Polytope.L]).to_json()
    assert set(data) == {'in_NS', 'in_R', 'in_L2', 'in_L', 'witnesses'}
    assert data['witnesses']['L']['polytope'] == 'L'
