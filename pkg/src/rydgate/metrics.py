"""Phase extraction and fidelity measures for the two-atom gate.

Phase convention: a state that acquires exp(-i phi) relative to its
initial value has accumulated phase phi. The controlled phase is the
two-atom phase minus the two single-atom phases, wrapped into
(-2 pi, 0]; the gate target is a controlled phase of -pi on top of
whatever single-atom phases the schedule produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidParameterError, UndefinedPhaseError
from .model import COMPUTATIONAL_INDICES, COMPUTATIONAL_LABELS, DIMENSION

TWO_PI = 2.0 * math.pi

# Overlap magnitudes at or below this are treated as phase-free.
OVERLAP_TOL = 1e-6

LINEAR = "linear"
SQUARED = "squared"


def accumulated_phase(initial, final) -> float:
    """Phase acquired by final relative to initial.

    Returns phi such that the overlap <final|initial> has argument phi,
    i.e. final ~ exp(-i phi) initial for a cyclic evolution. Raises
    UndefinedPhaseError when the overlap magnitude is at or below 1e-6.

    Example: final = exp(-i pi/2) * initial gives pi/2.
    """
    overlap = np.vdot(np.asarray(final, dtype=complex), np.asarray(initial, dtype=complex))
    if abs(overlap) <= OVERLAP_TOL:
        raise UndefinedPhaseError(
            f"overlap magnitude {abs(overlap):.3e} leaves the phase undefined"
        )
    return float(np.angle(overlap))


def wrap_controlled_phase(value: float) -> float:
    """Wrap a phase into the branch (-2 pi, 0]."""
    remainder = value % TWO_PI
    return remainder - TWO_PI if remainder > 0.0 else 0.0


def controlled_phase(phases) -> float:
    """Two-atom phase in excess of the single-atom phases.

    phases maps the labels '01', '10', '11' to accumulated phases. The
    result phi_11 - phi_10 - phi_01 is wrapped into (-2 pi, 0].
    """
    try:
        raw = phases["11"] - phases["10"] - phases["01"]
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidParameterError(
            "phases must map '01', '10' and '11' to floats"
        ) from exc
    return wrap_controlled_phase(float(raw))


def ideal_controlled_phase(
    delta_gamma: float, phi_01: float = 0.0, phi_10: float = 0.0
) -> np.ndarray:
    """Diagonal 4x4 target with the given controlled phase.

    The diagonal is (1, exp(-i phi_01), exp(-i phi_10), exp(-i phi_11))
    with phi_11 = phi_01 + phi_10 + delta_gamma, matching the
    acquired-phase convention of accumulated_phase.
    """
    phi_11 = phi_01 + phi_10 + delta_gamma
    return np.diag(np.exp(-1j * np.array([0.0, phi_01, phi_10, phi_11])))


def compensated_cz_target(phi_01: float, phi_10: float) -> np.ndarray:
    """Controlled-phase target of -pi on top of given single-atom phases."""
    return ideal_controlled_phase(-math.pi, phi_01, phi_10)


def _computational_block(matrix: np.ndarray) -> np.ndarray:
    if matrix.shape == (DIMENSION, DIMENSION):
        return matrix[np.ix_(COMPUTATIONAL_INDICES, COMPUTATIONAL_INDICES)]
    if matrix.shape == (4, 4):
        return matrix
    raise InvalidParameterError(
        f"expected a 9x9 or 4x4 operator, got shape {matrix.shape}"
    )


def gate_fidelity(actual, target, mode: str = LINEAR) -> float:
    """Trace overlap of the computational block with a 4x4 unitary target.

    linear mode returns |tr(M T^dagger)| / 4, squared mode its square over
    16. A 9x9 actual is restricted to the computational block first.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (4, 4):
        raise InvalidParameterError(f"target must be 4x4, got shape {target.shape}")
    defect = np.max(np.abs(target.conj().T @ target - np.eye(4)))
    if defect > 1e-6:
        raise InvalidParameterError(f"target is not unitary (defect {defect:.3e})")
    block = _computational_block(np.asarray(actual, dtype=complex))
    overlap = abs(np.trace(block @ target.conj().T))
    if mode == LINEAR:
        return float(min(1.0, overlap / 4.0))
    if mode == SQUARED:
        return float(min(1.0, overlap**2 / 16.0))
    raise ConfigError(f"unknown fidelity mode {mode!r}")


def state_fidelity(rho_final, rho_target) -> float:
    """Trace overlap |tr(rho_final rho_target)| of two density matrices."""
    rho_final = np.asarray(rho_final, dtype=complex)
    rho_target = np.asarray(rho_target, dtype=complex)
    if rho_final.shape != rho_target.shape or rho_final.ndim != 2:
        raise InvalidParameterError(
            f"shape mismatch: {rho_final.shape} vs {rho_target.shape}"
        )
    return float(abs(np.trace(rho_final @ rho_target)))


def conditional_state_fidelity(rho_final, rho_target) -> float:
    """Trace overlap renormalized by the surviving population.

    For dissipative runs this scores the state conditioned on no decay
    event, so a decay-free run against its own final state gives 1.
    """
    rho_final = np.asarray(rho_final, dtype=complex)
    survival = float(np.trace(rho_final).real)
    if survival <= 0.0:
        raise InvalidParameterError(f"surviving population {survival} is not positive")
    return state_fidelity(rho_final, rho_target) / survival


@dataclass(frozen=True)
class GateOutcome:
    """Phases, controlled phase, return probabilities, fidelity, leakage."""

    phases: dict
    delta_gamma: float
    return_probabilities: dict
    fidelity: float
    leakage: float

    def to_json_dict(self) -> dict:
        return {
            "phases": {k: float(v) for k, v in self.phases.items()},
            "delta_gamma": float(self.delta_gamma),
            "return_probabilities": {
                k: float(v) for k, v in self.return_probabilities.items()
            },
            "fidelity": float(self.fidelity),
            "leakage": float(self.leakage),
        }


def gate_outcome(operator, target=None, mode: str = LINEAR) -> GateOutcome:
    """Summarize a 9x9 evolution operator as a gate.

    Phases come from the diagonal amplitudes of the computational
    states; raises UndefinedPhaseError when any of them is non-cyclic
    (diagonal magnitude at or below 1e-6). When no target is given the
    operator is scored against a controlled phase of -pi compensated by
    its own single-atom phases. Leakage is one minus the mean
    computational-subspace population over the four computational
    columns.
    """
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (DIMENSION, DIMENSION):
        raise InvalidParameterError(
            f"expected a 9x9 operator, got shape {operator.shape}"
        )
    phases = {}
    returns = {}
    for label, index in zip(COMPUTATIONAL_LABELS, COMPUTATIONAL_INDICES):
        amplitude = operator[index, index]
        if abs(amplitude) <= OVERLAP_TOL:
            raise UndefinedPhaseError(
                f"state |{label}> does not return (amplitude {abs(amplitude):.3e})"
            )
        phases[label] = float(np.angle(np.conj(amplitude)))
        returns[label] = float(min(1.0, abs(amplitude) ** 2))
    delta_gamma = controlled_phase(phases)
    if target is None:
        target = compensated_cz_target(phases["01"], phases["10"])
    fidelity = gate_fidelity(operator, target, mode)
    block = operator[np.ix_(COMPUTATIONAL_INDICES, COMPUTATIONAL_INDICES)]
    retained = np.sum(np.abs(block) ** 2, axis=0)
    leakage = float(max(0.0, 1.0 - float(np.mean(retained))))
    return GateOutcome(
        phases=phases,
        delta_gamma=delta_gamma,
        return_probabilities=returns,
        fidelity=fidelity,
        leakage=leakage,
    )
