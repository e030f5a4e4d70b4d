"""Tests for rank certificates, decomposition search and superlocality verdicts."""

from fractions import Fraction

import pytest

from src.box_core import (HALF, BipartiteBox, Cut, Family, bipartite_white_noise, deterministic,
                          deterministic_labels, deterministic_single, make_family, make_vertex, mix, pr_box,
                          product_pair, white_noise)
from src.errors import ParameterOutOfRange, SoundnessViolation
from src.exact_scalar import SQRT2, ExactScalar
from src.inequalities import chsh_local
from src.superlocality import (STRATEGIES, AppendixKind, PairClass, Status, SublocalDecomposition, Term, Verdict,
                              appendix_decomposition, bipartite_verdict, fit_factors, genuine_report,
                              merge_analysis, pair_in_class, rank_lower_bound, search_decomposition,
                              search_product_decomposition, superlocality_verdict, two_term_alice_choices,
                              verify_decomposition, verify_rank_certificate)

INV_SQRT2 = SQRT2 / 2
SVF_GRID = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), INV_SQRT2]
MF_GRID = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]


@pytest.mark.parametrize("cut", list(Cut))
def test_rank_of_white_noise_is_one(cut):
    assert rank_lower_bound(white_noise(), cut) == 1


@pytest.mark.parametrize("cut", list(Cut))
@pytest.mark.parametrize("kind,param", [(Family.SVF, Fraction(1, 2)), (Family.SVF, 1),
                                        (Family.MF, Fraction(1, 4)), (Family.MF, 1)])
def test_family_rank_is_three_on_every_cut(kind, param, cut):
    box = make_family(kind, param)
    assert rank_lower_bound(box, cut) == 3
    assert rank_lower_bound(box, cut, by_columns=True) == 3


def test_rank_certificate_check():
    box = make_family(Family.MF, HALF)
    assert verify_rank_certificate(box, Cut.A_BC, 3, 2)
    assert not verify_rank_certificate(box, Cut.A_BC, 3, 3)
    assert not verify_rank_certificate(box, Cut.A_BC, 4, 2)


def test_rank_certificate_with_mismatched_cut():
    tripartite = make_family(Family.MF, HALF)
    assert not verify_rank_certificate(tripartite, None, 3, 2)
    bipartite = make_family(Family.CHSH, 1)
    assert not verify_rank_certificate(bipartite, Cut.A_BC, 3, 2)


@pytest.mark.parametrize("mu", SVF_GRID)
def test_svf_is_genuinely_superlocal(mu):
    report = genuine_report(make_family(Family.SVF, mu), 2, search=False)
    assert report.genuine and report.absolute
    for verdict in report.verdicts.values():
        assert verdict.status == Status.SUPERLOCAL
        assert verdict.certificate == {'rank': 3, 'd': 2}


@pytest.mark.parametrize("nu", MF_GRID)
def test_mf_is_genuinely_superlocal(nu):
    report = genuine_report(make_family(Family.MF, nu), 2, search=False)
    assert report.genuine


def test_white_noise_is_sublocal_with_product_witness():
    for cut in Cut:
        verdict = superlocality_verdict(white_noise(), cut, 1)
        assert verdict.status == Status.SUBLOCAL
        assert verdict.witness.d == 1
        assert verify_decomposition(white_noise(), verdict.witness)


def test_deterministic_vertices_are_sublocal_at_d1():
    for label in deterministic_labels()[::7]:
        box = make_vertex(label)
        for cut in Cut:
            assert superlocality_verdict(box, cut, 1, search=False).status == Status.SUBLOCAL


def test_unknown_without_search_then_sublocal_with_it():
    # a = b = c = shared random bit: rank 2 across A|BC, no product form
    box = mix([make_vertex(deterministic(0, 0, 0, 0, 0, 0)), make_vertex(deterministic(0, 1, 0, 1, 0, 1))],
              [HALF, HALF])
    assert rank_lower_bound(box, Cut.A_BC) == 2
    assert superlocality_verdict(box, Cut.A_BC, 2, search=False).status == Status.UNKNOWN
    verdict = superlocality_verdict(box, Cut.A_BC, 2, PairClass.LOCAL)
    assert verdict.status == Status.SUBLOCAL
    assert verdict.witness.d == 2
    assert verdict.certificate is None


def test_svf_local_search_finds_four_term_witness():
    box = make_family(Family.SVF, HALF)
    witness = search_decomposition(box, Cut.A_BC, 4, PairClass.LOCAL)
    assert witness is not None
    assert witness.d <= 4
    assert verify_decomposition(box, witness)
    assert all(chsh_local(term.pair) for term in witness.terms)


def test_mf_ns_search_finds_witness():
    box = make_family(Family.MF, 1)
    witness = search_decomposition(box, Cut.A_BC, 4, PairClass.NS)
    assert witness is not None and witness.d <= 4
    assert verify_decomposition(box, witness)


@pytest.mark.parametrize("box", [make_family(Family.SVF, HALF), make_family(Family.MF, HALF)])
def test_two_term_search_fails(box):
    assert search_decomposition(box, Cut.A_BC, 2, PairClass.LOCAL) is None
    choices = two_term_alice_choices(box)
    assert set(choices) == {'D00+D01', 'D10+D11'}
    assert all(choice is None for choice in choices.values())


def test_merge_analysis_reduces_a_redundant_witness():
    # white noise split into four deterministic Alice strategies merges into one term
    witness = fit_factors(white_noise(), Cut.A_BC, list(STRATEGIES), PairClass.LOCAL)
    assert witness is not None
    merged = merge_analysis(white_noise(), Cut.A_BC, 1, witness, PairClass.LOCAL)
    assert merged is not None and merged.d == 1


def test_fit_factors_with_pinned_weights():
    decomposition = appendix_decomposition(AppendixKind.SVF_A, HALF)
    box = decomposition.reconstruct()
    fitted = fit_factors(box, Cut.A_BC, list(STRATEGIES), PairClass.LOCAL, [Fraction(1, 4)] * 4)
    assert fitted is not None
    assert [t.weight for t in fitted.terms] == [Fraction(1, 4)] * 4


def test_product_search():
    vertex = make_vertex(deterministic(1, 0, 0, 1, 1, 1))
    found = search_product_decomposition(vertex, 1)
    assert found is not None and found.d == 1

    other = make_vertex(deterministic(0, 1, 1, 0, 0, 0))
    mixture = mix([vertex, other], [Fraction(1, 3), Fraction(2, 3)])
    found = search_product_decomposition(mixture, 2)
    assert found is not None and found.d == 2
    assert verify_decomposition(mixture, found)
    assert sorted(t.weight for t in found.terms) == [Fraction(1, 3), Fraction(2, 3)]

    assert search_product_decomposition(make_family(Family.SVF, HALF), 2) is None
    with pytest.raises(ParameterOutOfRange):
        search_product_decomposition(vertex, 3)


def test_search_rejects_nonpositive_d():
    with pytest.raises(ParameterOutOfRange):
        search_decomposition(white_noise(), Cut.A_BC, 0)


@pytest.mark.parametrize("mu", [Fraction(1, 4), HALF, INV_SQRT2])
def test_svf_appendix_decomposition(mu):
    decomposition = appendix_decomposition(AppendixKind.SVF_A, mu)
    assert decomposition.d == 4
    assert decomposition.pair_class == PairClass.LOCAL
    assert verify_decomposition(make_family(Family.SVF, mu), decomposition)
    assert all(pair_in_class(t.pair, PairClass.LOCAL) for t in decomposition.terms)


def test_svf_appendix_boundary_row():
    decomposition = appendix_decomposition(AppendixKind.SVF_A, INV_SQRT2)
    first = decomposition.terms[0].pair.matrix()
    assert first[0] == [HALF, 0, 0, HALF]


@pytest.mark.parametrize("nu", [Fraction(1, 8), Fraction(1, 4), HALF])
def test_mf_local_appendix_decomposition(nu):
    decomposition = appendix_decomposition(AppendixKind.MF_C, nu)
    assert verify_decomposition(make_family(Family.MF, nu), decomposition)
    assert all(chsh_local(t.pair) for t in decomposition.terms)


def test_mf_local_appendix_last_row():
    first = appendix_decomposition(AppendixKind.MF_C, HALF).terms[0].pair.matrix()
    assert first[3] == [Fraction(1, 8), Fraction(3, 8), Fraction(3, 8), Fraction(1, 8)]


@pytest.mark.parametrize("nu", [Fraction(1, 4), Fraction(3, 4), 1])
def test_mf_ns_appendix_decomposition(nu):
    decomposition = appendix_decomposition(AppendixKind.MF_D, nu)
    assert decomposition.pair_class == PairClass.NS
    assert verify_decomposition(make_family(Family.MF, nu), decomposition)


def test_mf_ns_appendix_uses_pr_boxes_at_full_strength():
    decomposition = appendix_decomposition(AppendixKind.MF_D, 1)
    assert decomposition.terms[0].pair == pr_box(0, 0, 0)
    assert not chsh_local(decomposition.terms[0].pair)


@pytest.mark.parametrize("kind,param", [(AppendixKind.SVF_A, Fraction(3, 4)), (AppendixKind.MF_C, Fraction(3, 4)),
                                        (AppendixKind.MF_D, Fraction(3, 2)), (AppendixKind.MF_D, 0)])
def test_appendix_parameter_range(kind, param):
    with pytest.raises(ParameterOutOfRange):
        appendix_decomposition(kind, param)


def test_tampered_decomposition_is_rejected():
    decomposition = appendix_decomposition(AppendixKind.SVF_A, HALF)
    box = make_family(Family.SVF, HALF)
    terms = list(decomposition.terms)
    terms[0] = Term(ExactScalar(Fraction(1, 3)), terms[0].single, terms[0].pair)
    assert not verify_decomposition(box, SublocalDecomposition(Cut.A_BC, terms, PairClass.LOCAL))


def test_decomposition_json_round_trip():
    decomposition = appendix_decomposition(AppendixKind.MF_C, Fraction(1, 4))
    parsed = SublocalDecomposition.from_json(decomposition.to_json())
    assert parsed.cut == Cut.A_BC and parsed.d == 4
    assert verify_decomposition(make_family(Family.MF, Fraction(1, 4)), parsed)


def test_verdict_refuses_witness_against_rank():
    witness = appendix_decomposition(AppendixKind.SVF_A, HALF)
    with pytest.raises(SoundnessViolation):
        Verdict(Cut.A_BC, 4, Status.SUBLOCAL, witness=witness, rank=5)


def test_verdict_json():
    verdict = superlocality_verdict(make_family(Family.SVF, HALF), Cut.A_BC, 2)
    assert verdict.to_json() == {'cut': 'A|BC', 'status': 'superlocal', 'd': 2,
                                 'certificate': {'rank': 3, 'd': 2}}


@pytest.mark.parametrize("v", [Fraction(1, 4), HALF, 1])
def test_bb84_is_superlocal(v):
    verdict = bipartite_verdict(make_family(Family.BB84, v), 2)
    assert verdict.status == Status.SUPERLOCAL
    assert verdict.cut is None and verdict.certificate == {'rank': 3, 'd': 2}


@pytest.mark.parametrize("v", [Fraction(1, 4), 1])
def test_chsh_family_is_superlocal(v):
    assert bipartite_verdict(make_family(Family.CHSH, v), 2).status == Status.SUPERLOCAL


def test_product_bipartite_box_is_sublocal():
    box = product_pair(deterministic_single(1, 0), deterministic_single(0, 1))
    verdict = bipartite_verdict(box, 1)
    assert verdict.status == Status.SUBLOCAL
    assert verdict.witness.d == 1
    assert bipartite_verdict(bipartite_white_noise(), 1).status == Status.SUBLOCAL


def test_pair_class_checks():
    assert pair_in_class(pr_box(0, 0, 0), PairClass.NS)
    assert not pair_in_class(pr_box(0, 0, 0), PairClass.LOCAL)
    signaling = BipartiteBox.build(lambda b, c, y, z: int(b == 0 and c == y))
    assert not pair_in_class(signaling, PairClass.NS)
    assert pair_in_class(signaling, PairClass.UNCONSTRAINED)
