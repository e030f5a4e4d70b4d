"""Boxes from three-qubit states and projective qubit measurements.

This is the only module that works in floating point. Everything it hands
to the exact modules goes through ``snap_to_exact`` first.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .box_core import BITS, TripartiteBox, validate
from .errors import InvalidSettings, InvalidSnapped, InvalidState, ParameterOutOfRange, SnapFailure
from .exact_scalar import ExactScalar

logger = logging.getLogger(__name__)

STATE_TOLERANCE = 1e-12
FLOAT_TOLERANCE = 1e-10
DEFAULT_DENOMINATOR = 32
# Snapping only considers a + b√2 with |b| <= 1; the lattice is dense otherwise.
MAX_SQRT2_COEFF = 1

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _check_density(rho: np.ndarray, dim: int, tol: float = STATE_TOLERANCE) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise InvalidState(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise InvalidState(f"density matrix has trace {np.trace(rho).real}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidState("density matrix is not positive semidefinite")
    return rho


def _pairs_to_complex(data) -> np.ndarray:
    array = np.asarray(data, dtype=float)
    return array[..., 0] + 1j * array[..., 1]


def _complex_to_pairs(array: np.ndarray) -> List:
    return np.stack([array.real, array.imag], axis=-1).tolist()


@dataclass
class ThreeQubitState:
    """Three-qubit state stored as its 8x8 density matrix, qubit order A, B, C."""

    density: np.ndarray
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        self.density = _check_density(self.density, 8)

    @classmethod
    def pure(cls, amplitudes: Sequence[complex]) -> 'ThreeQubitState':
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.shape != (8,):
            raise InvalidState(f"need 8 amplitudes, got {psi.shape}")
        if abs(np.vdot(psi, psi).real - 1) > STATE_TOLERANCE:
            raise InvalidState(f"state norm is {np.linalg.norm(psi)}")
        return cls(np.outer(psi, psi.conj()), psi)

    @classmethod
    def mixed(cls, density: np.ndarray) -> 'ThreeQubitState':
        return cls(np.asarray(density, dtype=complex))

    def to_json(self) -> Dict[str, object]:
        if self.amplitudes is not None:
            return {'amplitudes': _complex_to_pairs(self.amplitudes)}
        return {'density': _complex_to_pairs(self.density)}

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> 'ThreeQubitState':
        try:
            if 'amplitudes' in data:
                return cls.pure(_pairs_to_complex(data['amplitudes']))
            return cls.mixed(_pairs_to_complex(data['density']))
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InvalidState(f"malformed state JSON: {e}") from e


@dataclass
class MeasurementSettings:
    """Unit Bloch vectors indexed [party][input]."""

    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.shape != (3, 2, 3):
            raise InvalidSettings(f"settings must have shape (3, 2, 3), got {self.vectors.shape}")
        norms = np.linalg.norm(self.vectors, axis=-1)
        if np.abs(norms - 1).max() > STATE_TOLERANCE:
            raise InvalidSettings(f"Bloch vectors must be unit length, got norms {norms.ravel().tolist()}")

    def projector(self, party: int, setting: int, outcome: int) -> np.ndarray:
        """Π = (I + (−1)^outcome n·σ)/2."""
        n = self.vectors[party, setting]
        sign = -1 if outcome else 1
        return (IDENTITY + sign * sum(c * s for c, s in zip(n, PAULIS))) / 2

    def to_json(self) -> Dict[str, object]:
        return {'vectors': self.vectors.tolist()}

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> 'MeasurementSettings':
        try:
            return cls(np.asarray(data['vectors'], dtype=float))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidSettings(f"malformed settings JSON: {e}") from e


@dataclass
class FloatBox:
    """64 probabilities in the exact boxes' order (inputs xyz, then outputs abc)."""

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).reshape(64)

    def value(self, outs: Tuple[int, int, int], ins: Tuple[int, int, int]) -> float:
        a, b, c = outs
        x, y, z = ins
        return float(self.p[(x << 5) | (y << 4) | (z << 3) | (a << 2) | (b << 1) | c])

    def table(self) -> np.ndarray:
        """Array indexed [x, y, z, a, b, c]."""
        return self.p.reshape((2,) * 6)

    def normalization_error(self) -> float:
        return float(np.abs(self.table().sum(axis=(3, 4, 5)) - 1).max())

    def signaling_error(self) -> float:
        t = self.table()
        errors = []
        # marginal over each single party and each pair must ignore the other inputs
        for keep in ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2)):
            drop = tuple(k for k in range(3) if k not in keep)
            marg = t.sum(axis=tuple(3 + k for k in drop))
            for k in drop:
                errors.append(np.abs(np.take(marg, 0, axis=k) - np.take(marg, 1, axis=k)).max())
        return float(max(errors))

    def is_valid(self, tolerance: float = FLOAT_TOLERANCE) -> bool:
        return (self.p.min() >= -tolerance and self.normalization_error() <= tolerance
                and self.signaling_error() <= tolerance)

    def distance(self, other) -> float:
        """Max entrywise distance to another FloatBox or an exact box."""
        values = other.p if isinstance(other, FloatBox) else np.array([float(v) for v in other.p])
        return float(np.abs(self.p - values).max())

    def to_json(self) -> Dict[str, object]:
        return {'parties': 3, 'float_entries': self.p.tolist()}


class SettingsPreset(str, Enum):
    SVETLICHNY = 'svetlichny'
    MERMIN = 'mermin'
    MERMIN_XY = 'mermin_xy'


X = (1.0, 0.0, 0.0)
Y = (0.0, 1.0, 0.0)
Z = (0.0, 0.0, 1.0)
R2 = 1 / math.sqrt(2)


def preset_settings(kind: SettingsPreset) -> MeasurementSettings:
    """Named settings.

    SVETLICHNY: A = σx, σy; B = (σx−σy)/√2, (σx+σy)/√2; C = σx, σy.
    MERMIN: A = −σy, σx; B = C = σx, σy (GGHZ at π/4 gives the odd-parity Mermin family).
    MERMIN_XY: every party measures σx, σy.
    """
    kind = SettingsPreset(kind)
    if kind == SettingsPreset.SVETLICHNY:
        vectors = [[X, Y], [(R2, -R2, 0.0), (R2, R2, 0.0)], [X, Y]]
    elif kind == SettingsPreset.MERMIN:
        vectors = [[(0.0, -1.0, 0.0), X], [X, Y], [X, Y]]
    else:
        vectors = [[X, Y], [X, Y], [X, Y]]
    return MeasurementSettings(np.array(vectors))


def gghz_state(theta: float) -> ThreeQubitState:
    """cos θ|000⟩ + sin θ|111⟩."""
    if not 0 <= theta <= math.pi / 2 + 1e-15:
        raise ParameterOutOfRange(f"theta must lie in [0, π/2], got {theta}")
    psi = np.zeros(8, dtype=complex)
    psi[0] = math.cos(theta)
    psi[7] = math.sin(theta)
    return ThreeQubitState.pure(psi)


def three_tangle(theta: float) -> float:
    """Three-tangle of the GGHZ state, sin²2θ."""
    return math.sin(2 * theta) ** 2


def born_box(state: ThreeQubitState, settings: MeasurementSettings) -> FloatBox:
    """P(abc|xyz) = Tr(ρ Π^a_x ⊗ Π^b_y ⊗ Π^c_z)."""
    rho = state.density
    p = np.zeros(64)
    for i, (x, y, z, a, b, c) in enumerate(product(BITS, repeat=6)):
        op = np.kron(np.kron(settings.projector(0, x, a), settings.projector(1, y, b)), settings.projector(2, z, c))
        p[i] = np.trace(rho @ op).real
    fbox = FloatBox(p)
    if not fbox.is_valid():
        logger.warning(f"Born-rule box deviates from NS by {fbox.signaling_error():.2e}")
    return fbox


# ---------------------------------------------------------------------------
# Classical-quantum states
# ---------------------------------------------------------------------------

@dataclass
class FloatTerm:
    weight: float
    single: np.ndarray  # [x, a]
    pair: np.ndarray    # [y, z, b, c]


@dataclass
class FloatWitness:
    """Float decomposition across A|BC."""

    terms: List[FloatTerm]

    @property
    def d(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> FloatBox:
        table = np.zeros((2,) * 6)
        for t in self.terms:
            # [x, y, z, a, b, c]
            table += t.weight * np.einsum('xa,yzbc->xyzabc', t.single, t.pair)
        return FloatBox(table.reshape(64))

    def error(self, fbox: FloatBox) -> float:
        return self.reconstruct().distance(fbox)

    def to_json(self) -> Dict[str, object]:
        return {'cut': 'A|BC', 'terms': [{'weight': t.weight, 'single': t.single.tolist(), 'pair': t.pair.tolist()}
                                         for t in self.terms]}


def cq_state(p: Sequence[float], bob_states: Sequence[np.ndarray],
             charlie_states: Sequence[np.ndarray]) -> ThreeQubitState:
    """Σ_i p_i |i⟩⟨i| ⊗ ρ^B_i ⊗ ρ^C_i."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or p.min() < 0 or abs(p.sum() - 1) > STATE_TOLERANCE:
        raise InvalidState(f"classical weights must be a 2-outcome distribution, got {p.tolist()}")
    rho = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        ket = np.zeros((2, 2), dtype=complex)
        ket[i, i] = 1
        rho += p[i] * np.kron(ket, np.kron(_check_density(bob_states[i], 2), _check_density(charlie_states[i], 2)))
    return ThreeQubitState.mixed(rho)


def _outcome_probability(rho: np.ndarray, settings: MeasurementSettings, party: int) -> np.ndarray:
    """[input, outcome] table of Tr(ρ Π)."""
    return np.array([[np.trace(rho @ settings.projector(party, i, o)).real for o in BITS] for i in BITS])


def cq_box_with_witness(p: Sequence[float], bob_states: Sequence[np.ndarray], charlie_states: Sequence[np.ndarray],
                        settings: MeasurementSettings, allow_randomized_alice: bool = False,
                        tolerance: float = STATE_TOLERANCE) -> Tuple[FloatBox, Optional[FloatWitness]]:
    """Born-rule box of a classical-quantum state and its two-term A|BC witness.

    The witness needs Alice to measure in her classical basis (Bloch vectors ±z)
    unless ``allow_randomized_alice`` is set, in which case each term carries
    Alice's outcome statistics on |i⟩.
    """
    state = cq_state(p, bob_states, charlie_states)
    fbox = born_box(state, settings)

    alice = settings.vectors[0]
    classical = np.allclose(np.abs(alice[:, 2]), 1, atol=tolerance)
    if not classical and not allow_randomized_alice:
        logger.warning("Alice does not measure in the classical basis; witness omitted")
        return fbox, None

    terms = []
    for i in range(2):
        if p[i] <= 0:
            continue
        ket = np.zeros((2, 2), dtype=complex)
        ket[i, i] = 1
        single = _outcome_probability(ket, settings, 0)
        bob = _outcome_probability(np.asarray(bob_states[i], dtype=complex), settings, 1)
        charlie = _outcome_probability(np.asarray(charlie_states[i], dtype=complex), settings, 2)
        pair = np.einsum('yb,zc->yzbc', bob, charlie)
        terms.append(FloatTerm(float(p[i]), single, pair))
    witness = FloatWitness(terms)
    err = witness.error(fbox)
    if err > tolerance:
        raise InvalidState(f"classical-quantum witness misses the box by {err:.2e}")
    return fbox, witness


PAULI_EIGENSTATES: Tuple[np.ndarray, ...] = tuple(
    (IDENTITY + sign * pauli) / 2 for pauli in PAULIS for sign in (1, -1))


def random_cq_state(rng: np.random.Generator) -> Tuple[List[float], List[np.ndarray], List[np.ndarray]]:
    """Classical-quantum state with dyadic weights and Pauli-eigenstate factors."""
    p0 = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
    bob = [PAULI_EIGENSTATES[k] for k in rng.integers(0, 6, size=2)]
    charlie = [PAULI_EIGENSTATES[k] for k in rng.integers(0, 6, size=2)]
    return [p0, 1.0 - p0], bob, charlie


def random_pauli_settings(rng: np.random.Generator, alice_classical: bool = True) -> MeasurementSettings:
    """Bloch vectors drawn from ±x, ±y, ±z; Alice uses ±z when ``alice_classical``."""
    axes = [np.array(v) for v in (X, Y, Z)]

    def draw():
        return float(rng.choice([1.0, -1.0])) * axes[int(rng.integers(0, 3))]

    alice = [float(rng.choice([1.0, -1.0])) * axes[2] for _ in BITS] if alice_classical else [draw(), draw()]
    return MeasurementSettings(np.array([alice, [draw(), draw()], [draw(), draw()]]))


# ---------------------------------------------------------------------------
# Snapping
# ---------------------------------------------------------------------------

def snap_scalar(value: float, tolerance: float, denominator: int = DEFAULT_DENOMINATOR) -> ExactScalar:
    """Nearest a + b√2 with a, b in (1/denominator)ℤ and |b| <= 1."""
    best = None
    limit = MAX_SQRT2_COEFF * denominator
    for j in range(-limit, limit + 1):
        i = round((value - j * math.sqrt(2) / denominator) * denominator)
        candidate = (i + j * math.sqrt(2)) / denominator
        key = (abs(candidate - value), abs(j))
        if best is None or key < best[0]:
            best = (key, i, j)
    (distance, _), i, j = best
    if distance > tolerance:
        raise SnapFailure(f"{value!r} is {distance:.2e} from the nearest lattice point")
    return ExactScalar(Fraction(i, denominator), Fraction(j, denominator))


def snap_to_exact(fbox: FloatBox, tolerance: float = 1e-9, denominator: int = DEFAULT_DENOMINATOR) -> TripartiteBox:
    """Round every entry to the exact lattice and check the result is a valid box."""
    if tolerance <= 0:
        raise ParameterOutOfRange(f"tolerance must be positive, got {tolerance}")
    box = TripartiteBox(tuple(snap_scalar(float(v), tolerance, denominator) for v in fbox.p))
    check = validate(box)
    if not (check.valid and check.nonnegative):
        raise InvalidSnapped(f"snapped box invalid: {check}")
    logger.debug(f"Snapped box onto denominator {denominator}")
    return box
