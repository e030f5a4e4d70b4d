"""End-to-end tests for the command line, driven through main.main(argv)."""

import json
from fractions import Fraction

import pytest

import main
from src.box_core import (QUARTER, Family, TripartiteBox, box_to_json, linear_combination, make_family, make_vertex,
                          mermin, svetlichny)
from src.data_loader import dumps
from src.exact_scalar import ExactScalar
from src.strengths import StrengthMethod, StrengthReport


def write_json(path, data):
    path.write_text(dumps(data) + '\n', encoding='utf-8')
    return str(path)


def run(capsys, *argv):
    code = main.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def svf_half(tmp_path):
    return write_json(tmp_path / 'svf.json', box_to_json(make_family(Family.SVF, '1/2')))


@pytest.fixture
def mf_half(tmp_path):
    return write_json(tmp_path / 'mf.json', box_to_json(make_family(Family.MF, '1/2')))


def test_gen_family(capsys):
    code, out, _ = run(capsys, 'gen', '--family', 'svf', '--param', '1/2')
    assert code == 0
    assert json.loads(out) == json.loads(dumps(box_to_json(make_family(Family.SVF, '1/2'))))


def test_gen_vertex_and_irrational_param(capsys):
    code, out, _ = run(capsys, 'gen', '--vertex', 'S:0000')
    assert code == 0 and json.loads(out)['parties'] == 3
    code, out, _ = run(capsys, 'gen', '--family', 'svf', '--param', '0+1/2*sqrt2')
    assert code == 0


@pytest.mark.parametrize("argv", [
    ['gen', '--family', 'svf'],
    ['gen', '--family', 'svf', '--param', 'abc'],
    ['frobnicate'],
    ['superlocal', '--in', 'box.json'],
])
def test_usage_errors(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2
    assert out == ''


def test_out_of_range_param_is_domain_error(capsys):
    code, _, err = run(capsys, 'gen', '--family', 'mf', '--param', '3/2')
    assert code == 1
    assert 'error' in err


def test_missing_box_file(capsys, tmp_path):
    code, _, _ = run(capsys, 'eval', '--in', str(tmp_path / 'absent.json'))
    assert code == 2


def test_malformed_box_file(capsys, tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"parties": 3, "entries": {"000|000": "x"}}')
    code, _, _ = run(capsys, 'eval', '--in', str(path))
    assert code == 2


def test_eval_tripartite(capsys, svf_half):
    code, out, _ = run(capsys, 'eval', '--in', svf_half)
    data = json.loads(out)
    assert code == 0
    assert data['svetlichny']['0000'] == '2*sqrt2'
    assert data['G'] == '2*sqrt2'
    assert data['violations'] == []


def test_eval_bipartite(capsys, tmp_path):
    path = write_json(tmp_path / 'chsh.json', box_to_json(make_family(Family.CHSH, 1)))
    code, out, _ = run(capsys, 'eval', '--in', path, '--bipartite')
    data = json.loads(out)
    assert code == 0
    assert data['chsh'][0] == '2*sqrt2'
    assert data['chsh_local'] is False


def test_superlocal_genuine(capsys, svf_half):
    code, out, _ = run(capsys, 'superlocal', '--in', svf_half, '--d', '2')
    data = json.loads(out)
    assert code == 0
    assert data['genuine'] is True and data['absolute'] is True
    assert [c['cut'] for c in data['cuts']] == ['A|BC', 'B|AC', 'C|AB']


def test_superlocal_single_cut_with_search(capsys, tmp_path):
    path = write_json(tmp_path / 'noise.json', box_to_json(make_family(Family.WHITE_NOISE)))
    code, out, _ = run(capsys, 'superlocal', '--in', path, '--d', '1', '--cut', 'B|AC', '--search')
    data = json.loads(out)
    assert code == 0
    assert data['status'] == 'sublocal'
    assert len(data['witness']['terms']) == 1


def test_strength_outside_r(capsys, tmp_path):
    box = TripartiteBox.build(lambda a, b, c, x, y, z: QUARTER if a ^ b ^ c == x & y & z else 0)
    path = write_json(tmp_path / 'cubic.json', box_to_json(box))
    code, out, err = run(capsys, 'strength', '--in', path)
    assert code == 1
    assert out == ''
    assert 'not in Svetlichny-box polytope' in err


def test_strength_report_verifies(capsys, tmp_path, mf_half):
    code, out, _ = run(capsys, 'strength', '--in', mf_half)
    assert code == 0
    report = json.loads(out)
    assert report['nu'] == {'a': '1/2', 'b': '0'}
    witness = write_json(tmp_path / 'strength.json', report)
    code, out, _ = run(capsys, 'verify', '--witness', witness, '--in', mf_half)
    assert code == 0 and json.loads(out) == {'verified': True}


def test_appendix_witness_verifies(capsys, tmp_path, svf_half):
    code, out, _ = run(capsys, 'gen', '--appendix', 'svf_a', '--param', '1/2')
    assert code == 0
    witness = json.loads(out)
    path = write_json(tmp_path / 'appendix.json', witness)
    code, _, _ = run(capsys, 'verify', '--witness', path, '--in', svf_half)
    assert code == 0

    witness['terms'][0]['weight'] = '1/3'
    tampered = write_json(tmp_path / 'tampered.json', witness)
    code, out, _ = run(capsys, 'verify', '--witness', tampered, '--in', svf_half)
    assert code == 1
    assert json.loads(out) == {'verified': False}


def test_rank_certificate_verifies(capsys, tmp_path, mf_half):
    certificate = {'cut': 'A|BC', 'status': 'superlocal', 'd': 2, 'certificate': {'rank': 3, 'd': 2}}
    path = write_json(tmp_path / 'cert.json', certificate)
    code, _, _ = run(capsys, 'verify', '--witness', path, '--in', mf_half)
    assert code == 0

    certificate['certificate']['rank'] = 4
    path = write_json(tmp_path / 'bad_cert.json', certificate)
    code, _, _ = run(capsys, 'verify', '--witness', path, '--in', mf_half)
    assert code == 1


@pytest.mark.parametrize("verb", [['membership'], ['superlocal', '--d', '2'], ['eval']])
def test_every_report_passes_verify(capsys, tmp_path, mf_half, verb):
    code, out, _ = run(capsys, verb[0], '--in', mf_half, *verb[1:])
    assert code == 0
    path = write_json(tmp_path / 'report.json', json.loads(out))
    code, _, _ = run(capsys, 'verify', '--witness', path, '--in', mf_half)
    assert code == 0


def test_membership_flags(capsys, mf_half):
    code, out, _ = run(capsys, 'membership', '--in', mf_half, '--polytope', 'L')
    data = json.loads(out)
    assert code == 0
    assert data['in_L'] is True and data['in_L2'] is True and data['in_R'] is True


def test_quantum_snap(capsys):
    code, out, _ = run(capsys, 'quantum', '--theta', '0.7853981633974483', '--preset', 'svetlichny', '--snap')
    assert code == 0
    assert json.loads(out) == json.loads(dumps(box_to_json(make_family(Family.SVF, 1))))


def test_quantum_float_output(capsys):
    code, out, _ = run(capsys, 'quantum', '--theta', '0', '--preset', 'mermin')
    data = json.loads(out)
    assert code == 0
    assert len(data['float_entries']) == 64


def test_output_is_byte_stable(capsys, mf_half):
    first = run(capsys, 'superlocal', '--in', mf_half, '--d', '2')[1]
    second = run(capsys, 'superlocal', '--in', mf_half, '--d', '2')[1]
    assert first == second


def test_out_flag_and_verbose(capsys, tmp_path, svf_half):
    target = tmp_path / 'report.json'
    code, out, err = run(capsys, '--verbose', '--out', str(target), 'eval', '--in', svf_half)
    assert code == 0
    assert out == ''
    assert json.loads(target.read_text())['G'] == '2*sqrt2'
    assert 'Saved' in err


def test_quantum_cq_state_carries_witness(capsys, tmp_path):
    code, out, _ = run(capsys, 'quantum', '--state', 'cq', '--seed', '11')
    data = json.loads(out)
    assert code == 0
    assert data['witness']['cut'] == 'A|BC'
    assert 1 <= len(data['witness']['terms']) <= 2

    code, out, _ = run(capsys, 'quantum', '--state', 'cq', '--seed', '11', '--snap')
    snapped = write_json(tmp_path / 'cq.json', json.loads(out))
    code, out, _ = run(capsys, 'superlocal', '--in', snapped, '--d', '2')
    assert code == 0
    assert json.loads(out)['genuine'] is False


def test_quantum_gghz_needs_theta_and_preset(capsys):
    code, _, _ = run(capsys, 'quantum', '--preset', 'svetlichny')
    assert code == 2


def strength_document(box, mu, residual, canonical=False):
    report = StrengthReport(ExactScalar(mu), ExactScalar(0), svetlichny(0, 0, 0, 0), mermin(1, 1, 1, 0),
                            residual, StrengthMethod.LP, canonical)
    return report.to_json()


def test_strength_report_with_out_of_range_weight_is_rejected(capsys, tmp_path, svf_half):
    box = make_family(Family.SVF, '1/2')
    sv = make_vertex(svetlichny(0, 0, 0, 0))
    # 2·Sv − 1·(2·Sv − box) reconstructs the box exactly
    document = strength_document(box, 2, linear_combination([sv, box], [2, -1]))
    path = write_json(tmp_path / 'strength.json', document)
    code, out, _ = run(capsys, 'verify', '--witness', path, '--in', svf_half)
    assert code == 1
    assert json.loads(out) == {'verified': False}


def test_strength_report_with_negative_residual_is_rejected(capsys, tmp_path, mf_half):
    box = make_family(Family.MF, '1/2')
    sv = make_vertex(svetlichny(0, 0, 0, 0))
    residual = linear_combination([box, sv], [4, -3])
    document = strength_document(box, Fraction(3, 4), residual)
    path = write_json(tmp_path / 'strength.json', document)
    code, out, _ = run(capsys, 'verify', '--witness', path, '--in', mf_half)
    assert code == 1
    assert json.loads(out) == {'verified': False}


def test_strength_report_with_wrong_canonical_flag_is_rejected(capsys, tmp_path, mf_half):
    code, out, _ = run(capsys, 'strength', '--in', mf_half)
    report = json.loads(out)
    assert report['canonical'] is True
    report['canonical'] = False
    path = write_json(tmp_path / 'strength.json', report)
    code, out, _ = run(capsys, 'verify', '--witness', path, '--in', mf_half)
    assert code == 1
    assert json.loads(out) == {'verified': False}


def test_pair_cut_certificate_on_tripartite_box_is_rejected(capsys, tmp_path, svf_half):
    certificate = {'cut': 'B|C', 'status': 'superlocal', 'd': 2, 'certificate': {'rank': 3, 'd': 2}}
    path = write_json(tmp_path / 'cert.json', certificate)
    code, out, _ = run(capsys, 'verify', '--witness', path, '--in', svf_half)
    assert code == 1
    assert json.loads(out) == {'verified': False}
