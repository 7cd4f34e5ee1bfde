"""Time-evolution engines for pulse schedules.

Plain schedules (no modulations) propagate exactly: each segment's
constant Hermitian operator is exponentiated through its
eigendecomposition. Modulated schedules (noise, thermal vibration,
phase drive) use midpoint-exponential substeps: the Hamiltonian is
evaluated at each substep midpoint and exponentiated exactly over the
substep. Noise is piecewise constant per substep, so with the substep
count pinned to the noise trace the substepped result is itself exact.

Dissipative evolution propagates a density matrix under the effective
non-Hermitian operator, rho -> M rho M^dagger with
M = exp(-i H_eff dt); lost trace is reported, never renormalized.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .errors import IntegratorFailureError, InvalidParameterError, ModeError
from .hamiltonian import apply_decay, build_full, thermal_interaction
from .model import (
    BASIS_LABELS,
    DIMENSION,
    DecaySpec,
    PulseSegment,
    Schedule,
    check_density,
    check_state,
)

EXACT = "exact-segment"
SUBSTEPPED = "substepped"

MAX_SUBSTEPS = 2**20

# Trace growth beyond this bound marks a failed dissipative integration.
TRACE_GROWTH_TOL = 1e-7


@dataclass(frozen=True)
class IntegratorConfig:
    """Propagation mode and resolution settings.

    exact-segment mode is only legal for schedules without
    time-dependent modulation. samples_per_segment controls how densely
    population histories are recorded.
    """

    mode: str = EXACT
    substeps_per_segment: int = 1000
    convergence_tolerance: float = 1e-8
    samples_per_segment: int = 100

    def __post_init__(self):
        if self.mode not in (EXACT, SUBSTEPPED):
            raise ModeError(f"unknown integrator mode {self.mode!r}")
        if int(self.substeps_per_segment) < 1:
            raise InvalidParameterError(
                f"substeps per segment must be >= 1, got {self.substeps_per_segment}"
            )
        if int(self.samples_per_segment) < 1:
            raise InvalidParameterError(
                f"samples per segment must be >= 1, got {self.samples_per_segment}"
            )


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of a substep-doubling convergence check."""

    converged_substeps: int
    distance: float
    initial_substeps: int


@dataclass(frozen=True)
class PropagationResult:
    """Final state plus sampled trajectories.

    populations holds per-basis occupation (amplitude magnitudes squared
    for states, real diagonal for densities); norms holds the state norm
    (or density trace) at the same timestamps.
    """

    final_state: np.ndarray
    evolution_operator: np.ndarray | None
    times: np.ndarray
    populations: np.ndarray
    norms: np.ndarray


def write_population_csv(result: PropagationResult, path) -> None:
    """Write the sampled trajectory as CSV: t, P00..Prr, norm."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t"] + [f"P{label}" for label in BASIS_LABELS] + ["norm"])
        for t, row, norm in zip(result.times, result.populations, result.norms):
            writer.writerow(
                [format(float(t), ".12g")]
                + [format(float(p), ".12g") for p in row]
                + [format(float(norm), ".12g")]
            )


def resolve_config(schedule: Schedule, config: IntegratorConfig | None) -> IntegratorConfig:
    """Default to the exact engine for plain schedules, substepped otherwise."""
    if config is None:
        mode = SUBSTEPPED if schedule.has_modulations else EXACT
        return IntegratorConfig(mode=mode)
    if config.mode == EXACT and schedule.has_modulations:
        raise ModeError("exact-segment mode requires a schedule without modulations")
    return config


def _noise_multipliers(schedule: Schedule):
    if schedule.noise is None:
        return None
    from .stochastic import sample_noise_trace

    return sample_noise_trace(schedule.noise, len(schedule.segments))


def _segment_substeps(schedule: Schedule, config: IntegratorConfig) -> int:
    # Noise is piecewise constant per noise substep; pinning the
    # integration grid to it keeps the substepped evolution exact.
    if schedule.noise is not None:
        return int(schedule.noise.substeps)
    return int(config.substeps_per_segment)


def _modulated_hamiltonian(
    schedule: Schedule,
    segment: PulseSegment,
    seg_index: int,
    sub_index: int,
    t_mid: float,
    noise_mult,
) -> np.ndarray:
    rabi = segment.rabi
    detuning = segment.detuning
    phase = segment.phase
    interaction = schedule.interaction
    if noise_mult is not None:
        rabi = rabi * noise_mult[0][seg_index, sub_index]
        detuning = detuning * noise_mult[1][seg_index, sub_index]
    if schedule.phase_drive is not None:
        phase = schedule.phase_drive.phase_at(t_mid)
    if schedule.thermal is not None:
        interaction = thermal_interaction(t_mid, schedule.interaction, schedule.thermal)
    probe = PulseSegment(rabi=rabi, detuning=detuning, phase=phase, duration=segment.duration)
    return build_full(probe, interaction)


def _exact_step(h: np.ndarray, dt: float) -> np.ndarray:
    values, vectors = np.linalg.eigh(h)
    return (vectors * np.exp(-1j * values * dt)) @ vectors.conj().T


def propagate_state(
    schedule: Schedule, initial, config: IntegratorConfig | None = None
) -> PropagationResult:
    """Evolve a pure state through the schedule, recording populations."""
    config = resolve_config(schedule, config)
    psi = check_state(initial)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-9:
        raise InvalidParameterError(f"initial state must be normalized, norm = {norm}")

    times = [0.0]
    populations = [np.abs(psi) ** 2]
    norms = [norm]
    noise_mult = _noise_multipliers(schedule)
    t_start = 0.0

    for seg_index, segment in enumerate(schedule.segments):
        if config.mode == EXACT:
            h = build_full(segment, schedule.interaction)
            values, vectors = np.linalg.eigh(h)
            coefficients = vectors.conj().T @ psi
            taus = np.linspace(
                segment.duration / config.samples_per_segment,
                segment.duration,
                config.samples_per_segment,
            )
            evolved = vectors @ (
                np.exp(-1j * np.outer(values, taus)) * coefficients[:, None]
            )
            for j, tau in enumerate(taus):
                state = evolved[:, j]
                times.append(t_start + tau)
                populations.append(np.abs(state) ** 2)
                norms.append(float(np.linalg.norm(state)))
            psi = evolved[:, -1]
        else:
            substeps = _segment_substeps(schedule, config)
            dt = segment.duration / substeps
            stride = max(1, substeps // config.samples_per_segment)
            for k in range(substeps):
                h = _modulated_hamiltonian(
                    schedule, segment, seg_index, k, t_start + (k + 0.5) * dt, noise_mult
                )
                psi = _exact_step(h, dt) @ psi
                if (k + 1) % stride == 0 or k == substeps - 1:
                    times.append(t_start + (k + 1) * dt)
                    populations.append(np.abs(psi) ** 2)
                    norms.append(float(np.linalg.norm(psi)))
        t_start += segment.duration

    return PropagationResult(
        final_state=psi,
        evolution_operator=None,
        times=np.array(times),
        populations=np.array(populations),
        norms=np.array(norms),
    )


def evolution_operator(
    schedule: Schedule, config: IntegratorConfig | None = None
) -> np.ndarray:
    """Full 9x9 evolution operator of the schedule."""
    config = resolve_config(schedule, config)
    operator = np.eye(DIMENSION, dtype=complex)
    noise_mult = _noise_multipliers(schedule)
    t_start = 0.0
    for seg_index, segment in enumerate(schedule.segments):
        if config.mode == EXACT:
            h = build_full(segment, schedule.interaction)
            operator = _exact_step(h, segment.duration) @ operator
        else:
            substeps = _segment_substeps(schedule, config)
            dt = segment.duration / substeps
            for k in range(substeps):
                h = _modulated_hamiltonian(
                    schedule, segment, seg_index, k, t_start + (k + 0.5) * dt, noise_mult
                )
                operator = _exact_step(h, dt) @ operator
        t_start += segment.duration
    return operator


def propagate_density(
    schedule: Schedule,
    initial,
    decay: DecaySpec,
    config: IntegratorConfig | None = None,
) -> PropagationResult:
    """Evolve a density matrix under the decay-modified schedule.

    Uses rho -> M rho M^dagger with M = exp(-i H_eff dt); the trace is
    monitored and a growth beyond 1e-7 aborts the integration.
    """
    config = resolve_config(schedule, config)
    rho = check_density(initial)

    times = [0.0]
    populations = [np.real(np.diag(rho)).copy()]
    traces = [float(rho.trace().real)]
    noise_mult = _noise_multipliers(schedule)
    t_start = 0.0

    def step_operator(h: np.ndarray, dt: float) -> np.ndarray:
        if decay.gamma == 0.0:
            return _exact_step(h, dt)
        return expm(-1j * apply_decay(h, decay) * dt)

    def record(t: float):
        trace = float(rho.trace().real)
        if trace > traces[-1] + TRACE_GROWTH_TOL:
            raise IntegratorFailureError(
                f"density trace grew from {traces[-1]} to {trace} at t = {t}"
            )
        times.append(t)
        populations.append(np.real(np.diag(rho)).copy())
        traces.append(trace)

    for seg_index, segment in enumerate(schedule.segments):
        if config.mode == EXACT:
            # Constant generator: one exponential per sampling interval,
            # reapplied, stays exact.
            steps = config.samples_per_segment
            dt = segment.duration / steps
            h = build_full(segment, schedule.interaction)
            m = step_operator(h, dt)
            for k in range(steps):
                rho = m @ rho @ m.conj().T
                record(t_start + (k + 1) * dt)
        else:
            substeps = _segment_substeps(schedule, config)
            dt = segment.duration / substeps
            stride = max(1, substeps // config.samples_per_segment)
            for k in range(substeps):
                h = _modulated_hamiltonian(
                    schedule, segment, seg_index, k, t_start + (k + 0.5) * dt, noise_mult
                )
                m = step_operator(h, dt)
                rho = m @ rho @ m.conj().T
                if (k + 1) % stride == 0 or k == substeps - 1:
                    record(t_start + (k + 1) * dt)
        t_start += segment.duration

    return PropagationResult(
        final_state=rho,
        evolution_operator=None,
        times=np.array(times),
        populations=np.array(populations),
        norms=np.array(traces),
    )


def convergence_check(
    schedule: Schedule, initial, config: IntegratorConfig
) -> ConvergenceReport:
    """Double substeps until successive final states agree within tolerance."""
    if config.mode != SUBSTEPPED:
        raise ModeError("convergence check requires substepped mode")
    quiet = replace(config, samples_per_segment=1)
    substeps = int(config.substeps_per_segment)
    previous = propagate_state(schedule, initial, quiet).final_state
    while substeps <= MAX_SUBSTEPS // 2:
        substeps *= 2
        refined = propagate_state(
            schedule, initial, replace(quiet, substeps_per_segment=substeps)
        ).final_state
        distance = float(np.linalg.norm(refined - previous))
        if distance < config.convergence_tolerance:
            return ConvergenceReport(
                converged_substeps=substeps,
                distance=distance,
                initial_substeps=int(config.substeps_per_segment),
            )
        previous = refined
    raise IntegratorFailureError(
        f"no convergence within {MAX_SUBSTEPS} substeps per segment"
    )
