"""Source states, idler measurements and coincidence tables.

Every coincidence table is available two ways: a closed-form transcription
(``coincidence_table_analytic``) and a brute-force propagation of the
four-component idler/signal wave function through the optical elements
(``coincidence_table_circuit``).  The two are kept strictly independent so
that one checks the other.

Angles are radians throughout.  ``phi`` is the pump half-wave-plate angle
of the photon-pair source, ``theta`` the wave-plate angle of the USD
setup and ``alpha`` the interferometer phase.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import elements, qmath

PHI_MIN = 0.0
PHI_MAX = math.pi / 4
USD_PHI_MIN = math.pi / 8
# slack on domain endpoints so that degree->radian rounding is not rejected
EDGE_TOL = 1e-12

SIGNAL_DETECTORS = ("D1", "D2")
# Particle mode (NPBS removed): D1 sees path 2, D2 sees path 1.
PARTICLE_PATH_OF_DETECTOR = {"D1": 1, "D2": 0}
# Wave mode: D1/D2 are the first/second output port of the NPBS.
WAVE_PORT_OF_DETECTOR = {"D1": 0, "D2": 1}


class DomainError(ValueError):
    """A source or measurement parameter lies outside its physical range."""


class ConfigError(ValueError):
    """Inconsistent combination of source and measurement settings."""


class Mode(str, enum.Enum):
    PARTICLE = "particle"
    WAVE = "wave"


class MeasurementKind(str, enum.Enum):
    USD = "usd"
    MEM = "mem"
    ERASURE = "erasure"


@dataclass(frozen=True)
class UsdConfig:
    theta: float
    phi: float


@dataclass(frozen=True)
class Effect:
    """Rank-one measurement outcome: probability on ``psi`` is ``|<vector|psi>|^2``."""

    label: str
    vector: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class IdlerMeasurement:
    kind: MeasurementKind
    effects: Tuple[Effect, ...]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.effects)

    def effect(self, label: str) -> Effect:
        for e in self.effects:
            if e.label == label:
                return e
        raise KeyError(label)

    def completeness(self) -> np.ndarray:
        """Sum of ``b b^dagger`` over all effects; the identity for a valid POVM."""
        return sum(qmath.outer(e.vector) for e in self.effects)


@dataclass(frozen=True)
class CoincidenceTable:
    """Joint probabilities of (signal detector, idler outcome)."""

    mode: Mode
    alpha: float
    labels: Tuple[str, ...]
    probs: Dict[Tuple[str, str], float]

    def __post_init__(self):
        expected = {(d, k) for d in SIGNAL_DETECTORS for k in self.labels}
        if set(self.probs) != expected:
            raise ValueError("table cells do not match detectors x idler labels")
        for key, p in self.probs.items():
            if not (-EDGE_TOL <= p <= 1.0 + EDGE_TOL):
                raise ValueError(f"probability {p!r} for {key} outside [0, 1]")

    def __getitem__(self, key: Tuple[str, str]) -> float:
        return self.probs[key]

    @property
    def cells(self) -> List[Tuple[str, str]]:
        """Cells in canonical order: D1 row first, idler labels in measurement order."""
        return [(d, k) for d in SIGNAL_DETECTORS for k in self.labels]

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def column(self, label: str) -> float:
        return math.fsum(self.probs[(d, label)] for d in SIGNAL_DETECTORS)

    def row(self, detector: str) -> float:
        return math.fsum(self.probs[(detector, k)] for k in self.labels)

    def as_array(self) -> np.ndarray:
        return np.array([[self.probs[(d, k)] for k in self.labels] for d in SIGNAL_DETECTORS])

    def max_abs_diff(self, other: "CoincidenceTable") -> float:
        if self.labels != other.labels:
            raise ValueError("tables have different idler labels")
        return max(abs(self.probs[c] - other.probs[c]) for c in self.cells)


@dataclass(frozen=True)
class DualityReport:
    """Fringe visibility, path distinguishability and USD path knowledge.

    ``knowledge`` and ``guess_prob_usd`` are ``None`` outside the USD range.
    """

    phi: float
    visibility: float
    distinguishability: float
    knowledge: Optional[float]
    guess_prob_usd: Optional[float]
    guess_prob_mem: float


# ---------------------------------------------------------------------------
# domain checks
# ---------------------------------------------------------------------------

def check_phi(phi: float) -> float:
    if not math.isfinite(phi) or phi < PHI_MIN - EDGE_TOL or phi > PHI_MAX + EDGE_TOL:
        raise DomainError(
            f"phi = {math.degrees(phi):.6g} deg outside [0, 45] deg"
        )
    return phi


def check_usd_phi(phi: float) -> float:
    if not math.isfinite(phi) or phi < USD_PHI_MIN - EDGE_TOL or phi > PHI_MAX + EDGE_TOL:
        raise DomainError(
            f"phi = {math.degrees(phi):.6g} deg outside the USD range [22.5, 45] deg"
        )
    return phi


def in_usd_range(phi: float) -> bool:
    return USD_PHI_MIN - EDGE_TOL <= phi <= PHI_MAX + EDGE_TOL


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def source_state(phi: float) -> np.ndarray:
    """Polarization state ``sin2phi V⊗V + cos2phi H⊗H`` (idler first)."""
    check_phi(phi)
    v = qmath.ket(1, 0)
    h = qmath.ket(0, 1)
    return math.sin(2 * phi) * qmath.tensor(v, v) + math.cos(2 * phi) * qmath.tensor(h, h)


def joint_state(phi: float) -> np.ndarray:
    """Idler polarization ⊗ signal path state once the signal is in the MZI.

    Built by propagation: the signal passes a 22.5 degree HWP in the source
    and then the PBS/HWP polarization-to-path converter.
    """
    signal_map = elements.pol_to_path() @ elements.hwp(math.pi / 8)
    return qmath.apply(qmath.kron(qmath.identity(2), signal_map), source_state(phi))


def idler_states(phi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized idler states correlated with signal path 1 and path 2."""
    check_phi(phi)
    s, c = math.sin(2 * phi), math.cos(2 * phi)
    return qmath.ket(s, -c), qmath.ket(s, c)


# ---------------------------------------------------------------------------
# idler measurements
# ---------------------------------------------------------------------------

def usd_angle(phi: float) -> UsdConfig:
    """USD wave-plate setting with ``cos 2theta = -cot 2phi``, theta in [45, 90] deg."""
    check_usd_phi(phi)
    cos2theta = -math.cos(2 * phi) / math.sin(2 * phi)
    cos2theta = min(1.0, max(-1.0, cos2theta))
    return UsdConfig(theta=0.5 * math.acos(cos2theta), phi=phi)


def usd_measurement(cfg: UsdConfig) -> IdlerMeasurement:
    c2, s2 = math.cos(2 * cfg.theta), math.sin(2 * cfg.theta)
    r = 1 / math.sqrt(2)
    return IdlerMeasurement(
        MeasurementKind.USD,
        (
            Effect("D3", qmath.ket(r * c2, -r)),
            Effect("D4", qmath.ket(r * c2, r)),
            Effect("D5", qmath.ket(s2, 0)),
        ),
    )


def mem_measurement() -> IdlerMeasurement:
    """Helstrom measurement: projections on ``(1, ±1)/sqrt2``."""
    r = 1 / math.sqrt(2)
    return IdlerMeasurement(
        MeasurementKind.MEM,
        (Effect("D+", qmath.ket(r, r)), Effect("D-", qmath.ket(r, -r))),
    )


def erasure_measurement() -> IdlerMeasurement:
    """Projections on idler V and H, which carry no path information."""
    return IdlerMeasurement(
        MeasurementKind.ERASURE,
        (Effect("DV", qmath.ket(1, 0)), Effect("DH", qmath.ket(0, 1))),
    )


def measurement_for(kind, phi: float) -> IdlerMeasurement:
    kind = MeasurementKind(kind)
    if kind is MeasurementKind.USD:
        return usd_measurement(usd_angle(phi))
    if kind is MeasurementKind.MEM:
        return mem_measurement()
    return erasure_measurement()


def _check_unambiguous(phi: float, meas: IdlerMeasurement, tol: float = 1e-9) -> None:
    psi1, psi2 = idler_states(phi)
    leak = max(
        abs(qmath.inner(meas.effect("D3").vector, psi1)),
        abs(qmath.inner(meas.effect("D4").vector, psi2)),
    )
    if leak > tol:
        raise ConfigError(
            f"USD measurement was not built for phi = {math.degrees(phi):.6g} deg "
            f"(unambiguity violated by {leak:.3g})"
        )


# ---------------------------------------------------------------------------
# coincidence tables
# ---------------------------------------------------------------------------

def coincidence_table_circuit(
    phi: float,
    meas: IdlerMeasurement,
    mode,
    alpha: float = 0.0,
    beam_splitter: Optional[np.ndarray] = None,
) -> CoincidenceTable:
    """Coincidence table by propagating the joint wave function.

    ``beam_splitter`` replaces the NPBS matrix; it exists so that a
    deliberately broken element can be injected as a negative control.
    """
    mode = Mode(mode)
    check_phi(phi)
    if meas.kind is MeasurementKind.USD:
        check_usd_phi(phi)
        _check_unambiguous(phi, meas)
    psi = joint_state(phi)
    if mode is Mode.WAVE:
        bs = elements.npbs() if beam_splitter is None else beam_splitter
        signal_map = bs @ elements.phase_shifter(alpha)
        port = WAVE_PORT_OF_DETECTOR
    else:
        signal_map = qmath.identity(2)
        port = PARTICLE_PATH_OF_DETECTOR
    psi = qmath.apply(qmath.kron(qmath.identity(2), signal_map), psi)

    probs = {}
    for d in SIGNAL_DETECTORS:
        detector = np.zeros(2, dtype=np.complex128)
        detector[port[d]] = 1.0
        for e in meas.effects:
            amp = qmath.inner(qmath.tensor(e.vector, detector), psi)
            probs[(d, e.label)] = abs(amp) ** 2
    return CoincidenceTable(mode, alpha if mode is Mode.WAVE else 0.0, meas.labels, probs)


def coincidence_table_analytic(
    phi: float, mode, alpha: float = 0.0, measurement="usd"
) -> CoincidenceTable:
    """Closed-form coincidence table.

    For USD these are the six entries of the published table; MEM and
    erasure sortings use their own closed forms.
    """
    mode = Mode(mode)
    kind = MeasurementKind(measurement)
    if kind is MeasurementKind.USD:
        check_usd_phi(phi)
    else:
        check_phi(phi)
    c2sq = math.cos(2 * phi) ** 2
    s2sq = math.sin(2 * phi) ** 2
    c4 = math.cos(4 * phi)
    s4 = math.sin(4 * phi)
    ch = math.cos(alpha / 2) ** 2
    sh = math.sin(alpha / 2) ** 2
    wave = mode is Mode.WAVE

    if kind is MeasurementKind.USD:
        labels = ("D3", "D4", "D5")
        if wave:
            rows = {
                "D1": (0.5 * c2sq, 0.5 * c2sq, -c4 * ch),
                "D2": (0.5 * c2sq, 0.5 * c2sq, -c4 * sh),
            }
        else:
            rows = {
                "D1": (c2sq, 0.0, -0.5 * c4),
                "D2": (0.0, c2sq, -0.5 * c4),
            }
    elif kind is MeasurementKind.MEM:
        labels = ("D+", "D-")
        if wave:
            p = 0.25 * (1 - c4 * math.cos(alpha))
            q = 0.25 * (1 + c4 * math.cos(alpha))
            rows = {"D1": (p, p), "D2": (q, q)}
        else:
            rows = {
                "D1": (0.25 * (1 + s4), 0.25 * (1 - s4)),
                "D2": (0.25 * (1 - s4), 0.25 * (1 + s4)),
            }
    else:
        labels = ("DV", "DH")
        if wave:
            rows = {"D1": (s2sq * ch, c2sq * sh), "D2": (s2sq * sh, c2sq * ch)}
        else:
            rows = {"D1": (0.5 * s2sq, 0.5 * c2sq), "D2": (0.5 * s2sq, 0.5 * c2sq)}

    # -cos(4phi) is -6e-17 rather than 0 at phi = 22.5 deg
    probs = {
        (d, k): max(0.0, rows[d][i]) for d in SIGNAL_DETECTORS for i, k in enumerate(labels)
    }
    return CoincidenceTable(mode, alpha if wave else 0.0, labels, probs)


# ---------------------------------------------------------------------------
# signal density matrices and subensembles
# ---------------------------------------------------------------------------

def signal_rho(phi: float) -> np.ndarray:
    """Reduced signal state ``1/2 [[1, -cos4phi], [-cos4phi, 1]]`` on (path1, path2)."""
    check_phi(phi)
    k = math.cos(4 * phi)
    return 0.5 * np.array([[1, -k], [-k, 1]], dtype=np.complex128)


def subensembles_usd(phi: float) -> List[Tuple[float, np.ndarray]]:
    """Weights and states of the D4, D3 and D5 sortings, in that order."""
    check_usd_phi(phi)
    c2sq = math.cos(2 * phi) ** 2
    return [
        (c2sq, np.array([[1, 0], [0, 0]], dtype=np.complex128)),
        (c2sq, np.array([[0, 0], [0, 1]], dtype=np.complex128)),
        (-math.cos(4 * phi), 0.5 * np.ones((2, 2), dtype=np.complex128)),
    ]


def subensembles_mem(phi: float) -> List[Tuple[float, np.ndarray]]:
    """Equal-weight D+ and D- subensembles of the Helstrom sorting."""
    check_phi(phi)
    k, s = math.cos(4 * phi), math.sin(4 * phi)
    plus = 0.5 * np.array([[1 - s, -k], [-k, 1 + s]], dtype=np.complex128)
    minus = 0.5 * np.array([[1 + s, -k], [-k, 1 - s]], dtype=np.complex128)
    return [(0.5, plus), (0.5, minus)]


def outcome_probability(phi: float, meas: IdlerMeasurement, label: str) -> float:
    """Marginal probability of an idler outcome."""
    b = meas.effect(label).vector
    amps = _idler_projection(phi, b)
    return float(np.vdot(amps, amps).real)


def _idler_projection(phi: float, b: np.ndarray) -> np.ndarray:
    # (<b| ⊗ 1) Psi, an unnormalized signal ket
    psi = joint_state(phi).reshape(2, 2)
    return b.conj() @ psi


def conditional_signal_state(
    phi: float, meas: IdlerMeasurement, label: str, tol: float = 1e-15
) -> Optional[np.ndarray]:
    """Signal density matrix given an idler outcome, or ``None`` if that outcome never occurs."""
    amps = _idler_projection(phi, meas.effect(label).vector)
    weight = float(np.vdot(amps, amps).real)
    if weight <= tol:
        return None
    return qmath.outer(amps) / weight


def subensembles(phi: float, meas: IdlerMeasurement) -> List[Tuple[str, float, Optional[np.ndarray]]]:
    """Sort the signal ensemble by idler outcome, via Kraus conditioning."""
    return [
        (e.label, outcome_probability(phi, meas, e.label), conditional_signal_state(phi, meas, e.label))
        for e in meas.effects
    ]


def mzi_transform(rho, alpha: float) -> np.ndarray:
    """Conjugate a signal density matrix by the phase shifter and NPBS."""
    u = elements.mzi(alpha)
    return u @ np.asarray(rho, dtype=np.complex128) @ qmath.adjoint(u)


def detector_probabilities(rho, alpha: float) -> Tuple[float, float]:
    """``(prob(D1), prob(D2))`` for a signal state in wave mode."""
    out = mzi_transform(rho, alpha)
    return float(out[0, 0].real), float(out[1, 1].real)


def wave_probabilities_analytic(phi: float, alpha: float) -> Tuple[float, float]:
    k = math.cos(4 * phi)
    return 0.5 * (1 - k * math.cos(alpha)), 0.5 * (1 + k * math.cos(alpha))


def fringe_visibility(values) -> float:
    """``(max - min) / (max + min)`` of a fringe sampled over a phase scan."""
    values = np.asarray(values, dtype=float)
    hi, lo = float(values.max()), float(values.min())
    if hi + lo <= 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def duality_report(phi: float) -> DualityReport:
    check_phi(phi)
    v = abs(math.cos(4 * phi))
    d = abs(math.sin(4 * phi))
    knowledge = guess_usd = None
    if in_usd_range(phi):
        knowledge = 2 * math.cos(2 * phi) ** 2
        guess_usd = 0.5 * (1 + knowledge)
    return DualityReport(
        phi=phi,
        visibility=v,
        distinguishability=d,
        knowledge=knowledge,
        guess_prob_usd=guess_usd,
        guess_prob_mem=0.5 * (1 + d),
    )


def usd_guess_probability(phi: float) -> float:
    """Probability of guessing the path right from the USD outcome.

    D3/D4 name the path for sure; on D5 a coin toss is right half the time.
    """
    check_usd_phi(phi)
    return 2 * math.cos(2 * phi) ** 2 + 0.5 * (-math.cos(4 * phi))
