"""Incremental interaction ramping with short Lanczos refreshes.

Protocol: start from a solved base chain (the flip-flop part), append the
Ising couplings one bond at a time, optionally in equal fractional slices,
and after every slice rerun a fixed small number of Lanczos expansions
seeded by the previous step's reconstructed ground state. The recorded
trajectory tracks the energy against the exact ground energy of each
partial Hamiltonian.

Three stock scenarios are provided: "small" (equal couplings, one expansion
per added term), "large" (dominant Ising coupling, more expansions needed),
and "random-start" (the same ramp but seeded from an explicit product state
instead of the solved base ground state).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from blocklanczos import scalar, spinchain
from blocklanczos.spinchain import (
    CouplingTerm,
    HamiltonianSpec,
    ProductState,
    StateVector,
    ZZ_KIND,
)

SCENARIOS = ("small", "large", "random-start")
CSV_HEADER = ("terms_added", "lambda_fraction", "energy", "delta_vs_exact",
              "lanczos_iters")

ALTERNATING_PATTERN = "uudddudduu"


def alternating_spin_start() -> ProductState:
    """The fixed 10-site product pattern up,up,down,down,down,up,down,down,up,up."""
    return ProductState.from_string(ALTERNATING_PATTERN)


@dataclass(frozen=True)
class RampSchedule:
    """A base Hamiltonian plus ordered term additions in equal slices."""

    base: HamiltonianSpec
    additions: tuple[tuple[CouplingTerm, int], ...]

    def __post_init__(self) -> None:
        additions = tuple((term, int(count)) for term, count in self.additions)
        for term, count in additions:
            if count < 1:
                raise ValueError(f"fraction count must be >= 1, got {count}")
            if not isinstance(term, CouplingTerm):
                raise ValueError("additions must pair CouplingTerm with a count")
        object.__setattr__(self, "additions", additions)

    def full_target(self) -> HamiltonianSpec:
        """The base spec with every scheduled term appended at full strength."""
        spec = self.base
        for term, _ in self.additions:
            spec = spec.add_term(term)
        return spec

    def partial(self, terms_done: int, slices_done: int = 0) -> HamiltonianSpec:
        """Spec after ``terms_done`` complete terms plus ``slices_done`` slices
        of the next one."""
        if not 0 <= terms_done <= len(self.additions):
            raise ValueError(f"terms_done must be in [0, {len(self.additions)}]")
        spec = self.base
        for term, _ in self.additions[:terms_done]:
            spec = spec.add_term(term)
        if slices_done:
            if terms_done >= len(self.additions):
                raise ValueError("no next term to slice")
            term, count = self.additions[terms_done]
            if not 0 < slices_done < count:
                raise ValueError(f"slices_done must be in (0, {count})")
            fraction = slices_done / count
            spec = spec.add_term(
                CouplingTerm(term.kind, term.site, term.coefficient * fraction)
            )
        return spec


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for one ramping experiment."""

    scenario: str
    length: int = 10
    j_xy: float = 1.0
    j_z: float = 1.0
    lanczos_per_step: int = 1
    dlambda_fractions: int = 1
    start_state: ProductState | None = None
    descending_order: bool = False

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"scenario must be one of {SCENARIOS}, got {self.scenario!r}"
            )
        if self.length < 2:
            raise ValueError(f"need at least 2 sites, got {self.length}")
        if self.lanczos_per_step < 1:
            raise ValueError("lanczos_per_step must be >= 1")
        if self.dlambda_fractions < 1:
            raise ValueError("dlambda_fractions must be >= 1")
        if self.scenario == "random-start" and self.start_state is None:
            raise ValueError("random-start scenario requires an explicit start state")
        if self.start_state is not None and self.start_state.length != self.length:
            raise ValueError(
                f"start state has {self.start_state.length} sites, expected "
                f"{self.length}"
            )


def default_config(scenario: str) -> ScenarioConfig:
    """Stock settings for the three scenarios."""
    if scenario == "small":
        return ScenarioConfig("small", j_z=1.0, lanczos_per_step=1)
    if scenario == "large":
        return ScenarioConfig("large", j_z=100.0, lanczos_per_step=2)
    if scenario == "random-start":
        return ScenarioConfig(
            "random-start", j_z=1.0, lanczos_per_step=1,
            start_state=alternating_spin_start(),
        )
    raise ValueError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")


def build_ramp(config: ScenarioConfig) -> RampSchedule:
    """Base flip-flop chain plus one Ising bond per chain link, in order."""
    base = spinchain.build_xxz(config.length, j_xy=config.j_xy, j_z=0.0)
    sites = range(config.length - 1)
    if config.descending_order:
        sites = reversed(sites)
    additions = tuple(
        (CouplingTerm(ZZ_KIND, site, config.j_z), config.dlambda_fractions)
        for site in sites
    )
    return RampSchedule(base, additions)


@dataclass(frozen=True)
class ConvergenceRow:
    terms_added: int
    lambda_fraction: float
    energy: float
    delta_vs_exact: float
    lanczos_iters: int


@dataclass(frozen=True)
class ConvergenceRecord:
    """Per-slice trajectory of the ramping protocol."""

    rows: tuple[ConvergenceRow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        rows = tuple(self.rows)
        for prev, cur in zip(rows, rows[1:]):
            if cur.terms_added < prev.terms_added:
                raise ValueError("terms_added must be non-decreasing across rows")
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def final_energy(self) -> float:
        if not self.rows:
            raise ValueError("record has no rows")
        return self.rows[-1].energy

    @property
    def final_delta(self) -> float:
        if not self.rows:
            raise ValueError("record has no rows")
        return self.rows[-1].delta_vs_exact

    def deltas(self) -> np.ndarray:
        return np.array([row.delta_vs_exact for row in self.rows])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="\n") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in self.rows:
                writer.writerow([
                    row.terms_added,
                    repr(float(row.lambda_fraction)),
                    repr(float(row.energy)),
                    repr(float(row.delta_vs_exact)),
                    row.lanczos_iters,
                ])

    @classmethod
    def from_csv(cls, path: str | Path) -> ConvergenceRecord:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != list(CSV_HEADER):
                raise ValueError(f"{path}: unexpected header {header}")
            rows = []
            for raw in reader:
                if len(raw) != 5:
                    raise ValueError(f"{path}: malformed row {raw}")
                rows.append(ConvergenceRow(
                    int(raw[0]), float(raw[1]), float(raw[2]), float(raw[3]),
                    int(raw[4]),
                ))
        return cls(tuple(rows))


def _initial_state(config: ScenarioConfig, base: HamiltonianSpec) -> StateVector:
    if config.start_state is not None:
        return config.start_state.to_state_vector()
    _, ground = spinchain.ground_state(base)
    return ground


def run_incremental(config: ScenarioConfig) -> ConvergenceRecord:
    """Ramp the Ising couplings per ``config`` and record the trajectory.

    Each slice runs ``lanczos_per_step`` Krylov expansions seeded with the
    previous step's reconstructed ground state; delta_vs_exact compares
    against exact diagonalization of the current partial Hamiltonian.
    """
    if config.length > spinchain.DENSE_SITE_CAP:
        raise ValueError(
            f"exact reference capped at {spinchain.DENSE_SITE_CAP} sites, "
            f"got {config.length}"
        )
    ramp = build_ramp(config)
    current = _initial_state(config, ramp.base).normalized()
    rows: list[ConvergenceRow] = []
    count = config.dlambda_fractions
    for term_index in range(len(ramp.additions)):
        for slice_index in range(1, count + 1):
            if slice_index == count:
                working = ramp.partial(term_index + 1)
                terms_added, fraction = term_index + 1, 1.0
            else:
                working = ramp.partial(term_index, slice_index)
                terms_added, fraction = term_index, slice_index / count
            coeffs, basis = scalar.lanczos_run(
                working, current, max_iter=config.lanczos_per_step
            )
            ground = scalar.tridiagonal_eigensolve(coeffs)[0]
            current = scalar.reconstruct_state(basis, ground)
            exact = spinchain.ground_energy(working)
            rows.append(ConvergenceRow(
                terms_added=terms_added,
                lambda_fraction=fraction,
                energy=ground.energy,
                delta_vs_exact=ground.energy - exact,
                lanczos_iters=len(coeffs.betas),
            ))
    return ConvergenceRecord(tuple(rows))
