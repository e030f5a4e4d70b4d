"""
Superlocality Toolkit command line.
Exact analysis of tripartite nonsignaling boxes: inequalities, polytope
membership, strengths, superlocality verdicts and quantum realizations.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

# Add src to Python path
src_path = Path(__file__).parent / "src"
sys.path.append(str(src_path))

from src.box_core import (BipartiteBox, Cut, Family, TripartiteBox, VertexLabel, box_from_json, box_to_json,
                          correlators_of, make_family, make_vertex)
from src.config import Config
from src.data_loader import DataLoader, dumps
from src.errors import InvalidBox, ScalarParseError, ToolkitError
from src.exact_scalar import ExactScalar
from src.inequalities import chsh_local, chsh_values, violation_report
from src.membership import MembershipWitness, Polytope, membership_report, verify_certificate, verify_witness
from src.quantum import (FloatBox, SettingsPreset, born_box, cq_box_with_witness, gghz_state, preset_settings,
                         random_cq_state, random_pauli_settings, snap_to_exact, three_tangle)
from src.strengths import (StrengthMethod, StrengthReport, canonical_decomposition, g_quantity, q_quantity,
                           verify_strength_report)
from src.superlocality import (AppendixKind, PairClass, Status, SublocalDecomposition, appendix_decomposition,
                              bipartite_verdict, genuine_report, superlocality_verdict, verify_decomposition,
                              verify_rank_certificate)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class MalformedInput(Exception):
    """An input file is missing, is not JSON, or does not describe what the verb needs."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='superlocality', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--verbose', action='store_true', help='human-readable summaries on stderr')
    parser.add_argument('--config', help='dotenv-style configuration file')
    parser.add_argument('--out', help='write JSON here instead of stdout')
    verbs = parser.add_subparsers(dest='verb', required=True)

    gen = verbs.add_parser('gen', help='construct a box or a closed-form decomposition')
    source = gen.add_mutually_exclusive_group(required=True)
    source.add_argument('--family', choices=[f.value for f in Family])
    source.add_argument('--vertex', help='vertex label such as S:0000 or T:AB|C:00000')
    source.add_argument('--appendix', choices=[k.value for k in AppendixKind])
    gen.add_argument('--param', help='exact parameter, e.g. 1/2 or 0+1/2*sqrt2')

    ev = verbs.add_parser('eval', help='Svetlichny, Mermin and CHSH values')
    ev.add_argument('--in', dest='infile', required=True)
    ev.add_argument('--bipartite', action='store_true', help='require a bipartite box')

    mem = verbs.add_parser('membership', help='membership in L, L2 and R')
    mem.add_argument('--in', dest='infile', required=True)
    mem.add_argument('--polytope', choices=['L', 'L2', 'R', 'all'], default='all')

    st = verbs.add_parser('strength', help='Svetlichny and Mermin strengths')
    st.add_argument('--in', dest='infile', required=True)
    st.add_argument('--formula', action='store_true', help='use the G/Q formulas instead of the LP')

    sl = verbs.add_parser('superlocal', help='superlocality verdicts')
    sl.add_argument('--in', dest='infile', required=True)
    sl.add_argument('--d', type=int, required=True, help='local dimension bound')
    sl.add_argument('--cut', choices=[c.value for c in Cut])
    sl.add_argument('--search', action='store_true', help='search for witnesses when the rank does not decide')
    sl.add_argument('--pair-class', choices=[p.value for p in PairClass], default=PairClass.NS.value)

    qu = verbs.add_parser('quantum', help='Born-rule box of a named state')
    qu.add_argument('--state', choices=['gghz', 'cq'], default='gghz')
    qu.add_argument('--theta', type=float, help='GGHZ angle in [0, π/2]')
    qu.add_argument('--preset', choices=[p.value for p in SettingsPreset])
    qu.add_argument('--seed', type=int, default=0, help='seed for a random classical-quantum state')
    qu.add_argument('--snap', action='store_true', help='snap to an exact box')
    qu.add_argument('--denominator', type=int)

    ver = verbs.add_parser('verify', help='check a witness or certificate against a box')
    ver.add_argument('--witness', required=True)
    ver.add_argument('--in', dest='infile', required=True)
    return parser


def parse_scalar(text: Optional[str]) -> Optional[ExactScalar]:
    if text is None:
        return None
    try:
        return ExactScalar.parse(text)
    except ScalarParseError as e:
        raise MalformedInput(f"--param: {e}") from e


def load_box(loader: DataLoader, path: str):
    try:
        return loader.load_box(path)
    except (OSError, json.JSONDecodeError, ToolkitError) as e:
        raise MalformedInput(f"{path}: {e}") from e


def load_document(loader: DataLoader, path: str) -> dict:
    try:
        data = loader.load_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise MalformedInput(f"{path}: expected a JSON object")
    return data


def say(args, message: str):
    if args.verbose:
        print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def cmd_gen(args, config, loader):
    if args.param is None and (args.appendix or (args.family and args.family != Family.WHITE_NOISE.value)):
        raise MalformedInput("--param is required for this generator")
    if args.family:
        box = make_family(Family(args.family), parse_scalar(args.param))
        say(args, f"📦 Generated {args.family} box")
        return box_to_json(box)
    if args.vertex:
        box = make_vertex(VertexLabel.from_key(args.vertex))
        say(args, f"📦 Generated vertex {args.vertex}")
        return box_to_json(box)
    decomposition = appendix_decomposition(AppendixKind(args.appendix), parse_scalar(args.param))
    say(args, f"🧩 {args.appendix} decomposition with {decomposition.d} terms")
    return decomposition.to_json()


def eval_report(box) -> dict:
    if isinstance(box, BipartiteBox):
        return {'chsh': [str(v) for v in chsh_values(box)], 'chsh_local': chsh_local(box)}
    report = violation_report(box)
    correlators = correlators_of(box)
    return {
        'svetlichny': {''.join(map(str, v.label)): str(v.value) for v in report if v.family.value == 'svetlichny'},
        'mermin': {''.join(map(str, v.label)): str(v.value) for v in report if v.family.value == 'mermin'},
        'violations': [v.to_json() for v in report if v.violated],
        'triples': [str(t) for t in correlators.triples],
        'G': str(g_quantity(box)),
        'Q': str(q_quantity(box)),
    }


def cmd_eval(args, config, loader):
    box = load_box(loader, args.infile)
    if args.bipartite and not isinstance(box, BipartiteBox):
        raise MalformedInput(f"{args.infile}: --bipartite needs a 2-party box")
    if not isinstance(box, (BipartiteBox, TripartiteBox)):
        raise MalformedInput(f"{args.infile}: eval needs a 2- or 3-party box")
    report = eval_report(box)
    if args.verbose and 'violations' in report:
        say(args, f"🔍 {len(report['violations'])} expressions above their local bound")
        say(args, loader.box_frame(box).to_string())
    return report


def _need_tripartite(box, path):
    if not isinstance(box, TripartiteBox):
        raise MalformedInput(f"{path}: a 3-party box is required")
    return box


def cmd_membership(args, config, loader):
    box = _need_tripartite(load_box(loader, args.infile), args.infile)
    polytopes = list(Polytope) if args.polytope == 'all' else [Polytope(args.polytope)]
    report = membership_report(box, polytopes)
    say(args, f"📐 NS={report.in_ns} R={report.in_r} L2={report.in_l2} L={report.in_l}")
    return report.to_json()


def cmd_strength(args, config, loader):
    box = _need_tripartite(load_box(loader, args.infile), args.infile)
    method = StrengthMethod.FORMULA if args.formula else StrengthMethod.LP
    report = canonical_decomposition(box, method)
    say(args, f"💪 μ={report.svetlichny_strength} ν={report.mermin_strength} canonical={report.canonical}")
    return report.to_json()


def cmd_superlocal(args, config, loader):
    box = load_box(loader, args.infile)
    pair_class = PairClass(args.pair_class)
    if isinstance(box, BipartiteBox):
        verdict = bipartite_verdict(box, args.d, search=args.search, merge=config.merge_analysis)
        say(args, f"🔗 B|C: {verdict.status.value}")
        return verdict.to_json()
    box = _need_tripartite(box, args.infile)
    if args.cut:
        verdict = superlocality_verdict(box, Cut(args.cut), args.d, pair_class, search=args.search,
                                        merge=config.merge_analysis)
        say(args, f"🔗 {args.cut}: {verdict.status.value}")
        return verdict.to_json()
    report = genuine_report(box, args.d, search=args.search, merge=config.merge_analysis)
    for cut, verdict in report.verdicts.items():
        say(args, f"🔗 {cut.value}: {verdict.status.value}")
    say(args, f"{'✅' if report.genuine else '➖'} genuine={report.genuine} absolute={report.absolute}")
    return report.to_json()


def cmd_quantum(args, config, loader):
    witness = None
    if args.state == 'cq':
        rng = np.random.default_rng(args.seed)
        p, bob, charlie = random_cq_state(rng)
        settings = random_pauli_settings(rng, alice_classical=True)
        fbox, witness = cq_box_with_witness(p, bob, charlie, settings, tolerance=config.witness_tolerance)
        say(args, f"⚛️  classical-quantum state, p = {p}, witness with {witness.d} terms")
    else:
        if args.theta is None or args.preset is None:
            raise MalformedInput("--theta and --preset are required for the gghz state")
        fbox = born_box(gghz_state(args.theta), preset_settings(SettingsPreset(args.preset)))
        say(args, f"⚛️  three-tangle {three_tangle(args.theta):.6f}")
    if not fbox.is_valid(config.float_tolerance):
        raise InvalidBox(f"Born-rule box fails the NS checks by {fbox.signaling_error():.2e}")
    if not args.snap:
        result = fbox.to_json()
        if witness is not None:
            result['witness'] = witness.to_json()
        return result
    denominator = args.denominator or config.snap_denominator
    return box_to_json(snap_to_exact(fbox, config.snap_tolerance, denominator))


def verify_document(witness: dict, box, tolerance: float = 1e-9) -> bool:
    """True iff the witness, certificate or report checks out against ``box``.

    Everything is checked exactly except Born-rule float boxes, which must lie
    within ``tolerance`` of the box.
    """
    if 'entries' in witness:
        return box_from_json(witness) == box
    if 'float_entries' in witness:
        return isinstance(box, TripartiteBox) and FloatBox(witness['float_entries']).distance(box) <= tolerance
    if 'polytope' in witness:
        if not isinstance(box, TripartiteBox):
            return False
        parsed = MembershipWitness.from_json(witness)
        return verify_witness(box, parsed) if parsed.feasible else verify_certificate(box, parsed)
    if 'witnesses' in witness:
        return all(verify_document(w, box, tolerance) for w in witness['witnesses'].values())
    if 'terms' in witness:
        return verify_decomposition(box, SublocalDecomposition.from_json(witness))
    if 'cuts' in witness:
        return all(verify_document(v, box, tolerance) for v in witness['cuts'])
    if 'status' in witness:
        cut = None if witness['cut'] == 'B|C' else Cut(witness['cut'])
        status = Status(witness['status'])
        if status == Status.SUPERLOCAL:
            cert = witness['certificate']
            return verify_rank_certificate(box, cut, int(cert['rank']), int(cert['d']))
        if status == Status.SUBLOCAL:
            decomposition = SublocalDecomposition.from_json(witness['witness'])
            return decomposition.d <= int(witness['d']) and verify_decomposition(box, decomposition)
        return True
    if 'mu' in witness:
        return verify_strength_report(box, StrengthReport.from_json(witness))
    if 'svetlichny' in witness or 'chsh' in witness:
        return json.loads(dumps(eval_report(box))) == witness
    raise InvalidBox("nothing to verify in this document")


def cmd_verify(args, config, loader):
    witness = load_document(loader, args.witness)
    box = load_box(loader, args.infile)
    try:
        ok = verify_document(witness, box, config.float_tolerance)
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInput(f"{args.witness}: {e}") from e
    say(args, "✅ Witness verified" if ok else "❌ Witness rejected")
    return {'verified': ok}


COMMANDS = {
    'gen': cmd_gen,
    'eval': cmd_eval,
    'membership': cmd_membership,
    'strength': cmd_strength,
    'superlocal': cmd_superlocal,
    'quantum': cmd_quantum,
    'verify': cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        config = Config(env_file=args.config)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else config.log_level,
                        format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr)
    loader = DataLoader(config)

    try:
        result = COMMANDS[args.verb](args, config, loader)
    except MalformedInput as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ToolkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN

    text = dumps(result)
    if args.out:
        Path(args.out).write_text(text + '\n', encoding='utf-8')
        say(args, f"💾 Saved {args.out}")
    else:
        print(text)

    if args.verb == 'verify' and not result['verified']:
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
