"""Reproducible experiment pipelines built on the core modules.

Each runner returns a ScanResult: a list of flat row dicts plus the
axes that generated them and metadata sufficient to rerun the scan.
ScanResult.to_csv writes the rows and drops the metadata next to the
CSV as a sibling .meta.json file.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import InvalidParameterError
from .geometry import chi
from .hamiltonian import build_full
from .metrics import conditional_state_fidelity, gate_outcome
from .model import (
    BASE_DECAY_RATE,
    BASIS_LABELS,
    COMPUTATIONAL_INDICES,
    COMPUTATIONAL_LABELS,
    DecaySpec,
    NoiseSpec,
    PulseSegment,
    Schedule,
    ThermalSpec,
    basis_state,
    cyclic_segment_duration,
    standard_schedule,
    time_optimal_schedule,
)
from .propagate import (
    SUBSTEPPED,
    IntegratorConfig,
    evolution_operator,
    propagate_density,
    propagate_state,
)
from .stochastic import monte_carlo_gate_fidelity, thermal_gate_fidelity

V0 = 2.0 * math.pi

REFERENCE_KAPPA = 1.65


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


@dataclass(frozen=True)
class ScanResult:
    """Rows of a scan plus the axes and metadata that produced them."""

    axes: dict
    rows: list
    metadata: dict = field(default_factory=dict)

    def columns(self) -> list:
        stored = self.metadata.get("columns")
        if stored:
            return list(stored)
        return list(self.rows[0]) if self.rows else []

    def write_rows(self, stream) -> None:
        """Write the header and rows as CSV text to an open stream."""
        writer = csv.writer(stream)
        names = self.columns()
        writer.writerow(names)
        for row in self.rows:
            writer.writerow([_format_cell(row[name]) for name in names])

    def to_csv(self, path) -> Path:
        """Write rows as CSV and the metadata as a sibling .meta.json."""
        path = Path(path)
        with open(path, "w", newline="") as handle:
            self.write_rows(handle)
        meta_path = path.with_suffix(".meta.json")
        with open(meta_path, "w") as handle:
            json.dump(self.metadata, handle, indent=2, sort_keys=True)
            handle.write("\n")
        return meta_path


def _metadata(**extra) -> dict:
    base = {"tool": "rydgate", "version": __version__}
    base.update(extra)
    return base


def superposition_state() -> np.ndarray:
    """Equal superposition of the four computational basis states."""
    psi = np.zeros(9, dtype=complex)
    psi[list(COMPUTATIONAL_INDICES)] = 0.5
    return psi


def interior_extrema(values) -> int:
    """Count interior local extrema of a sampled curve.

    Uses sign changes of consecutive differences; flat runs collapse to
    their surrounding trend.
    """
    diffs = np.diff(np.asarray(values, dtype=float))
    signs = np.sign(diffs)
    signs = signs[signs != 0.0]
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] * signs[:-1] < 0.0))


def run_dynamics(
    kappa: float, v: float = V0, samples_per_segment: int = 100
) -> ScanResult:
    """Populations over time for each computational initial state."""
    schedule = standard_schedule(kappa, v)
    config = IntegratorConfig(samples_per_segment=samples_per_segment)
    columns = ["initial", "t"] + [f"P{label}" for label in BASIS_LABELS] + ["norm"]
    rows = []
    times = None
    for label in COMPUTATIONAL_LABELS:
        result = propagate_state(schedule, basis_state(label), config)
        times = result.times
        for t, pops, norm in zip(result.times, result.populations, result.norms):
            row = {"initial": label, "t": float(t)}
            row.update(
                {f"P{name}": float(p) for name, p in zip(BASIS_LABELS, pops)}
            )
            row["norm"] = float(norm)
            rows.append(row)
    axes = {
        "initial": list(COMPUTATIONAL_LABELS),
        "t": [float(t) for t in times],
    }
    metadata = _metadata(
        columns=columns,
        schedule=schedule.to_json_dict(),
        grids={"samples_per_segment": int(samples_per_segment)},
    )
    return ScanResult(axes=axes, rows=rows, metadata=metadata)


def scan_kappa(kappa_grid, v: float = V0) -> ScanResult:
    """Gate summary for each drive-to-interaction ratio on the grid."""
    grid = [float(k) for k in np.atleast_1d(np.asarray(kappa_grid, dtype=float))]
    if not grid:
        raise InvalidParameterError("kappa grid must not be empty")
    columns = [
        "kappa",
        "delta_gamma",
        "return_00",
        "return_01",
        "return_10",
        "return_11",
        "fidelity",
        "leakage",
    ]
    rows = []
    for kappa in grid:
        outcome = gate_outcome(evolution_operator(standard_schedule(kappa, v)))
        row = {"kappa": kappa, "delta_gamma": outcome.delta_gamma}
        for label in COMPUTATIONAL_LABELS:
            row[f"return_{label}"] = outcome.return_probabilities[label]
        row["fidelity"] = outcome.fidelity
        row["leakage"] = outcome.leakage
        rows.append(row)
    metadata = _metadata(columns=columns, grids={"kappa": grid, "v": float(v)})
    return ScanResult(axes={"kappa": grid}, rows=rows, metadata=metadata)


def run_noise_map(
    eta_omega_grid=None,
    eta_delta_grid=None,
    trials: int = 100,
    seed: int = 12345,
    substeps: int = 100,
    kappa: float = REFERENCE_KAPPA,
    v: float = V0,
) -> ScanResult:
    """Mean Monte-Carlo fidelity on a grid of noise amplitudes.

    Each cell derives an independent seed from the top-level seed and
    its grid position, so single cells can be recomputed in isolation.
    """
    if eta_omega_grid is None:
        eta_omega_grid = np.linspace(0.0, 0.05, 6)
    if eta_delta_grid is None:
        eta_delta_grid = np.linspace(0.0, 0.05, 6)
    omega_axis = [float(e) for e in np.atleast_1d(eta_omega_grid)]
    delta_axis = [float(e) for e in np.atleast_1d(eta_delta_grid)]
    columns = ["eta_omega", "eta_delta", "mean_fidelity", "std_fidelity", "trials"]
    rows = []
    for i, eta_omega in enumerate(omega_axis):
        for j, eta_delta in enumerate(delta_axis):
            cell_seed = int(
                np.random.SeedSequence([int(seed), i, j]).generate_state(
                    1, dtype=np.uint64
                )[0]
            )
            spec = NoiseSpec(
                eta_omega=eta_omega,
                eta_delta=eta_delta,
                substeps=int(substeps),
                seed=cell_seed,
            )
            result = monte_carlo_gate_fidelity(kappa, v, spec, trials)
            rows.append(
                {
                    "eta_omega": eta_omega,
                    "eta_delta": eta_delta,
                    "mean_fidelity": result.mean_fidelity,
                    "std_fidelity": result.std_fidelity,
                    "trials": result.trials,
                }
            )
    metadata = _metadata(
        columns=columns,
        seed=int(seed),
        grids={
            "eta_omega": omega_axis,
            "eta_delta": delta_axis,
            "kappa": float(kappa),
            "v": float(v),
            "trials": int(trials),
            "substeps": int(substeps),
        },
    )
    return ScanResult(
        axes={"eta_omega": omega_axis, "eta_delta": delta_axis},
        rows=rows,
        metadata=metadata,
    )


def run_thermal_map(
    distance_grid=None,
    temperature_grid=None,
    exponent_mode: str = "literal",
    kappa: float = REFERENCE_KAPPA,
    v: float = V0,
    substeps: int = 1000,
) -> ScanResult:
    """Gate fidelity versus trap distance and temperature."""
    if distance_grid is None:
        distance_grid = np.linspace(4.0, 8.0, 5)
    if temperature_grid is None:
        temperature_grid = np.linspace(1.0, 20.0, 5)
    distances = [float(d) for d in np.atleast_1d(distance_grid)]
    temperatures = [float(t) for t in np.atleast_1d(temperature_grid)]
    columns = ["distance", "temperature", "fidelity"]
    rows = []
    for distance in distances:
        for temperature in temperatures:
            spec = ThermalSpec(
                equilibrium_distance=distance,
                temperature=temperature,
                exponent_mode=exponent_mode,
            )
            fidelity = thermal_gate_fidelity(kappa, v, spec, substeps=substeps)
            rows.append(
                {
                    "distance": distance,
                    "temperature": temperature,
                    "fidelity": fidelity,
                }
            )
    metadata = _metadata(
        columns=columns,
        grids={
            "distance": distances,
            "temperature": temperatures,
            "kappa": float(kappa),
            "v": float(v),
            "substeps": int(substeps),
            "exponent_mode": exponent_mode,
        },
    )
    return ScanResult(
        axes={"distance": distances, "temperature": temperatures},
        rows=rows,
        metadata=metadata,
    )


def preparation_rotation() -> np.ndarray:
    """Half-turn beamsplitter on one atom's qubit manifold.

    Maps |0> to (|0> + |1>) / sqrt(2) and |1> to (|1> - |0>) / sqrt(2)
    while leaving the excited level alone. Applying it twice swaps the
    qubit states up to sign.
    """
    root_half = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [root_half, -root_half, 0.0],
            [root_half, root_half, 0.0],
            [0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )


def preparation_operator() -> np.ndarray:
    """Beamsplitter on the second atom, identity on the first."""
    return np.kron(np.eye(3, dtype=complex), preparation_rotation())


@dataclass(frozen=True)
class InterferometerSpec:
    """Single-segment interferometer sweep settings.

    The segment duration is frozen at the cyclic period of the
    reference ratio so that sweeping kappa detunes the interferometer
    instead of retuning it.
    """

    kappa_grid: tuple
    v: float = V0
    reference_kappa: float = REFERENCE_KAPPA

    def __post_init__(self):
        grid = tuple(float(k) for k in np.atleast_1d(np.asarray(self.kappa_grid)))
        if not grid:
            raise InvalidParameterError("kappa grid must not be empty")
        if any(k <= 0.0 for k in grid):
            raise InvalidParameterError("kappa values must be positive")
        object.__setattr__(self, "kappa_grid", grid)
        if self.v <= 0.0:
            raise InvalidParameterError(f"interaction must be positive, got {self.v}")
        if self.reference_kappa <= 0.0:
            raise InvalidParameterError(
                f"reference kappa must be positive, got {self.reference_kappa}"
            )


def run_interferometer(spec: InterferometerSpec) -> ScanResult:
    """Output populations of the beamsplitter-interaction-beamsplitter loop.

    Starts in |10>, applies the beamsplitter to the second atom, one
    interaction segment of fixed duration, and the beamsplitter again,
    then reads out the |10> and |11> populations.
    """
    duration = cyclic_segment_duration(spec.reference_kappa, spec.v)
    splitter = preparation_operator()
    initial = basis_state("10")
    columns = ["kappa", "p10", "p11"]
    rows = []
    for kappa in spec.kappa_grid:
        segment = PulseSegment(
            rabi=kappa * spec.v,
            detuning=-spec.v / 2.0,
            phase=0.0,
            duration=duration,
        )
        schedule = Schedule(segments=(segment,), interaction=spec.v)
        operator = evolution_operator(schedule)
        final = splitter @ (operator @ (splitter @ initial))
        rows.append(
            {
                "kappa": float(kappa),
                "p10": float(abs(final[3]) ** 2),
                "p11": float(abs(final[4]) ** 2),
            }
        )
    metadata = _metadata(
        columns=columns,
        grids={
            "kappa": list(spec.kappa_grid),
            "v": float(spec.v),
            "reference_kappa": float(spec.reference_kappa),
            "duration": float(duration),
        },
    )
    return ScanResult(axes={"kappa": list(spec.kappa_grid)}, rows=rows, metadata=metadata)


def run_decay_curves(
    rabi_frequencies=None,
    multiplier_grid=None,
    kappa: float = REFERENCE_KAPPA,
    compare_time_optimal: bool = True,
    time_optimal_substeps: int = 1500,
) -> ScanResult:
    """Conditional state fidelity versus excited-level decay rate.

    Each curve propagates the equal superposition of the computational
    states as a density matrix and scores the surviving state against
    the decay-free final state of the same schedule. The optional
    comparison curve uses the single-segment phase-driven schedule.
    """
    if rabi_frequencies is None:
        rabi_frequencies = tuple(2.0 * math.pi * f for f in (5.0, 10.0, 20.0))
    if multiplier_grid is None:
        multiplier_grid = np.linspace(0.0, 10.0, 21)
    multipliers = [float(r) for r in np.atleast_1d(multiplier_grid)]
    initial = superposition_state()
    rho_initial = np.outer(initial, initial.conj())

    curves = []
    for rabi in rabi_frequencies:
        name = f"geo-{rabi / (2.0 * math.pi):g}mhz"
        schedule = standard_schedule(kappa, rabi / kappa, units="mhz")
        config = IntegratorConfig(samples_per_segment=1)
        curves.append((name, schedule, config))
    if compare_time_optimal:
        config = IntegratorConfig(
            mode=SUBSTEPPED,
            substeps_per_segment=int(time_optimal_substeps),
            samples_per_segment=1,
        )
        curves.append(("time-optimal", time_optimal_schedule(), config))

    columns = ["curve", "gamma_multiplier", "gamma", "fidelity"]
    rows = []
    for name, schedule, config in curves:
        reference = propagate_density(
            schedule, rho_initial, DecaySpec(gamma=0.0), config
        ).final_state
        for multiplier in multipliers:
            decayed = propagate_density(
                schedule, rho_initial, DecaySpec.from_multiplier(multiplier), config
            ).final_state
            rows.append(
                {
                    "curve": name,
                    "gamma_multiplier": multiplier,
                    "gamma": multiplier * BASE_DECAY_RATE,
                    "fidelity": conditional_state_fidelity(decayed, reference),
                }
            )
    metadata = _metadata(
        columns=columns,
        grids={
            "gamma_multiplier": multipliers,
            "rabi_frequencies": [float(r) for r in rabi_frequencies],
            "kappa": float(kappa),
            "compare_time_optimal": bool(compare_time_optimal),
            "time_optimal_substeps": int(time_optimal_substeps),
        },
    )
    return ScanResult(
        axes={
            "curve": [name for name, _, _ in curves],
            "gamma_multiplier": multipliers,
        },
        rows=rows,
        metadata=metadata,
    )


def _cell_fidelity(operator: np.ndarray) -> float:
    """Fidelity of a composite cell against its own compensated target.

    Equal to gate_fidelity(operator, compensated target) but avoids
    building the target: the compensated trace collapses to
    1 + |a01| + |a10| + |a11| e^{i (delta_gamma + pi)}. Cells where any
    computational state fails to return carry no usable phase and score
    zero so they can never qualify.
    """
    a01 = operator[1, 1]
    a10 = operator[3, 3]
    a11 = operator[4, 4]
    magnitudes = (abs(a01), abs(a10), abs(a11))
    if min(magnitudes) <= 1e-6:
        return 0.0
    delta_gamma = (
        float(np.angle(np.conj(a11)))
        - float(np.angle(np.conj(a10)))
        - float(np.angle(np.conj(a01)))
    )
    total = (
        1.0
        + magnitudes[0]
        + magnitudes[1]
        + magnitudes[2] * np.exp(1j * (delta_gamma + math.pi))
    )
    return float(abs(total) / 4.0)


def run_actuating_scan(
    eta_list=(0.5, 1.0, 2.0, 3.0, 4.0),
    threshold: float = 0.96,
    mode: str = "fixed-omega",
    phase_count: int = 48,
    duration_count: int = 300,
    duration_range=(0.02, 3.0),
    independent_phases: bool = False,
    v0: float = V0,
) -> ScanResult:
    """Mean actuating area of high-fidelity composite cells versus interaction.

    For each interaction strength v = eta * v0, sweeps the second-pulse
    phase and the common segment duration, builds the composite
    U(phi) U(0) U(phi) U(0), and collects the durations whose cells beat
    the fidelity threshold. The row reports their mean duration and the
    actuating area v * 4 * mean duration. In fixed-omega mode the drive
    stays at the reference ratio times v0 while v varies; fixed-kappa
    mode rescales the drive with v. A quadratic fit of area against v
    lands in the metadata.
    """
    if mode not in ("fixed-omega", "fixed-kappa"):
        raise InvalidParameterError(f"unknown scan mode {mode!r}")
    if not (0.0 < threshold < 1.0):
        raise InvalidParameterError(f"threshold must be in (0, 1), got {threshold}")
    etas = [float(e) for e in eta_list]
    if not etas or any(e <= 0.0 for e in etas):
        raise InvalidParameterError("eta list must be non-empty and positive")
    phases = np.linspace(-math.pi, math.pi, int(phase_count), endpoint=False)
    lo, hi = float(duration_range[0]), float(duration_range[1])
    if not (0.0 < lo < hi):
        raise InvalidParameterError(f"bad duration range {duration_range}")
    durations = np.linspace(lo, hi, int(duration_count))

    columns = ["eta", "v", "qualifying_cells", "mean_duration", "actuating"]
    rows = []
    for eta in etas:
        v = eta * v0
        rabi = REFERENCE_KAPPA * (v0 if mode == "fixed-omega" else v)
        detuning = -v / 2.0

        def eigensystem(phase):
            segment = PulseSegment(rabi=rabi, detuning=detuning, phase=phase, duration=1.0)
            return np.linalg.eigh(build_full(segment, v))

        base_values, base_vectors = eigensystem(0.0)
        cache = {float(phi): eigensystem(float(phi)) for phi in phases}

        qualifying = []
        for t in durations:
            u_base = (base_vectors * np.exp(-1j * base_values * t)) @ base_vectors.conj().T
            if independent_phases:
                unitaries = [
                    (vec * np.exp(-1j * val * t)) @ vec.conj().T
                    for val, vec in cache.values()
                ]
                for u_a in unitaries:
                    left = u_a @ u_base
                    for u_b in unitaries:
                        if _cell_fidelity(u_b @ u_base @ left) > threshold:
                            qualifying.append(float(t))
            else:
                for phi, (values, vectors) in cache.items():
                    u_phi = (vectors * np.exp(-1j * values * t)) @ vectors.conj().T
                    pair = u_phi @ u_base
                    if _cell_fidelity(pair @ pair) > threshold:
                        qualifying.append(float(t))
        count = len(qualifying)
        mean_duration = float(np.mean(qualifying)) if count else float("nan")
        actuating = v * 4.0 * mean_duration if count else float("nan")
        rows.append(
            {
                "eta": eta,
                "v": float(v),
                "qualifying_cells": count,
                "mean_duration": mean_duration,
                "actuating": actuating,
            }
        )

    valid = [(row["v"], row["actuating"]) for row in rows if row["qualifying_cells"] > 0]
    fit_coefficients = None
    relative_residual = None
    if len(valid) >= 3:
        v_values = np.array([v for v, _ in valid])
        areas = np.array([a for _, a in valid])
        coefficients = np.polyfit(v_values, areas, 2)
        predicted = np.polyval(coefficients, v_values)
        relative_residual = float(
            np.linalg.norm(areas - predicted) / np.linalg.norm(areas)
        )
        fit_coefficients = [float(c) for c in coefficients]
    metadata = _metadata(
        columns=columns,
        grids={
            "eta": etas,
            "v0": float(v0),
            "phase_count": int(phase_count),
            "duration_count": int(duration_count),
            "duration_range": [lo, hi],
            "threshold": float(threshold),
            "mode": mode,
            "independent_phases": bool(independent_phases),
        },
        fit_coefficients=fit_coefficients,
        relative_residual=relative_residual,
    )
    return ScanResult(axes={"eta": etas}, rows=rows, metadata=metadata)


def run_gate(kappa: float, v: float = V0, units: str = "natural") -> dict:
    """Gate summary of the four-segment schedule as a JSON-ready dict."""
    schedule = standard_schedule(kappa, v, units=units)
    outcome = gate_outcome(evolution_operator(schedule))
    payload = outcome.to_json_dict()
    payload["metadata"] = _metadata(
        schedule=schedule.to_json_dict(),
        sector_half_phase=float(chi(kappa)),
    )
    return payload
