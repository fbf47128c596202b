"""Coefficient-noise error propagation and sampling-cost models.

Synthetic block tridiagonal problems (entries uniform on [0, 1], diagonal
blocks symmetrized) stand in for recursion output; Gaussian noise of width
eta perturbs every stored coefficient entry, and the mean absolute error
between the sorted clean and perturbed spectra measures the damage. A
bernoulli shot-count sampler models estimating a coefficient as a success
probability, and a small cost formula scores grouped operator application
by auxiliary-register count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from blocklanczos import block

SWEEP_HEADER = ("block_size", "block_count", "eta", "seed", "mae")
SUMMARY_HEADER = ("block_size", "block_count", "eta", "mean_mae")


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian perturbation width and its reproducibility seed."""

    eta: float
    seed: int

    def __post_init__(self) -> None:
        if not self.eta >= 0.0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")


@dataclass(frozen=True, eq=False)
class SyntheticBlockProblem:
    """Random block tridiagonal coefficients mimicking recursion output.

    block_size 1 is the scalar case; diagonal blocks are symmetrized so the
    assembly stays Hermitian with a real spectrum.
    """

    block_size: int
    block_count: int
    a_blocks: tuple[np.ndarray, ...]
    b_blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if self.block_size < 1 or self.block_count < 1:
            raise ValueError("block_size and block_count must be >= 1")
        a = tuple(np.atleast_2d(np.asarray(m, dtype=np.float64))
                  for m in self.a_blocks)
        b = tuple(np.atleast_2d(np.asarray(m, dtype=np.float64))
                  for m in self.b_blocks)
        if len(a) != self.block_count or len(b) != self.block_count - 1:
            raise ValueError(
                f"expected {self.block_count} diagonal and "
                f"{self.block_count - 1} coupling blocks, got {len(a)}, {len(b)}"
            )
        d = self.block_size
        for m in (*a, *b):
            if m.shape != (d, d):
                raise ValueError(f"blocks must be {d}x{d}, got {m.shape}")
        for n, m in enumerate(a):
            if np.max(np.abs(m - m.T)) > 1e-12:
                raise ValueError(f"diagonal block {n} is not symmetric")
        object.__setattr__(self, "a_blocks", a)
        object.__setattr__(self, "b_blocks", b)

    @property
    def dimension(self) -> int:
        return self.block_size * self.block_count

    @classmethod
    def generate(cls, block_size: int, block_count: int,
                 seed: int) -> SyntheticBlockProblem:
        """Draw entries uniformly from [0, 1]; symmetrize the diagonal blocks."""
        rng = np.random.default_rng(seed)
        d = block_size
        a_blocks = []
        for _ in range(block_count):
            raw = rng.uniform(0.0, 1.0, size=(d, d))
            a_blocks.append((raw + raw.T) / 2.0)
        b_blocks = [rng.uniform(0.0, 1.0, size=(d, d))
                    for _ in range(block_count - 1)]
        return cls(block_size, block_count, tuple(a_blocks), tuple(b_blocks))


def clean_assembly(problem: SyntheticBlockProblem) -> np.ndarray:
    coeffs = block.BlockCoefficients(problem.a_blocks, problem.b_blocks)
    return block.assemble_block_tridiagonal(coeffs).matrix


def perturb_coefficients(
    problem: SyntheticBlockProblem, noise: NoiseModel
) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Add Gaussian(0, eta) noise entrywise; diagonal-block noise is
    symmetrized so the perturbed assembly stays Hermitian. eta = 0 returns
    the coefficients unchanged, bit for bit."""
    if noise.eta == 0.0:
        return problem.a_blocks, problem.b_blocks
    rng = np.random.default_rng(noise.seed)
    d = problem.block_size
    a_noisy = []
    for a in problem.a_blocks:
        g = noise.eta * rng.standard_normal((d, d))
        a_noisy.append(a + (g + g.T) / 2.0)
    b_noisy = [b + noise.eta * rng.standard_normal((d, d))
               for b in problem.b_blocks]
    return tuple(a_noisy), tuple(b_noisy)


def perturbed_assemblies(
    problem: SyntheticBlockProblem, noise: NoiseModel
) -> tuple[np.ndarray, np.ndarray]:
    """(clean, noisy) Hermitian assemblies for the same problem."""
    clean = clean_assembly(problem)
    a_noisy, b_noisy = perturb_coefficients(problem, noise)
    noisy = block.assemble_block_tridiagonal(
        block.BlockCoefficients(a_noisy, b_noisy)
    ).matrix
    return clean, noisy


def perturb_and_mae(problem: SyntheticBlockProblem, noise: NoiseModel) -> float:
    """Mean absolute eigenvalue error between clean and perturbed spectra,
    paired in sorted order."""
    clean, noisy = perturbed_assemblies(problem, noise)
    reference = np.linalg.eigvalsh(clean)
    perturbed = np.linalg.eigvalsh(noisy)
    return float(np.mean(np.abs(perturbed - reference)))


@dataclass(frozen=True)
class CountingSampler:
    """Bernoulli estimation of a success probability from a shot budget."""

    true_p: float
    shots: int
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.true_p <= 1.0:
            raise ValueError(f"true_p must be in [0, 1], got {self.true_p}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


def sample_expectation(sampler: CountingSampler) -> float:
    """Fraction of successes over ``shots`` seeded Bernoulli trials."""
    rng = np.random.default_rng(sampler.seed)
    successes = rng.binomial(sampler.shots, sampler.true_p)
    return float(successes) / float(sampler.shots)


@dataclass(frozen=True)
class CostModel:
    """Auxiliary-register count q and application group size D."""

    q: int
    d_group: int

    def __post_init__(self) -> None:
        if not 1 <= self.d_group <= self.q:
            raise ValueError(
                f"group size must be in [1, q={self.q}], got {self.d_group}"
            )


def oaa_cost(model: CostModel) -> float:
    """Search-cost score D * 2^(ceil(q/D)/2) for grouped application."""
    groups = math.ceil(model.q / model.d_group)
    return model.d_group * 2.0 ** (groups / 2.0)


def cost_sweep(q: int) -> list[tuple[int, float]]:
    """oaa_cost for every group size 1..q."""
    return [(d, oaa_cost(CostModel(q, d))) for d in range(1, q + 1)]


@dataclass(frozen=True)
class SweepRow:
    block_size: int
    block_count: int
    eta: float
    seed: int
    mae: float


def trial_seed(base_seed: int, block_size: int, block_count: int,
               trial: int) -> int:
    """Deterministic per-trial seed, decorrelated across grid points."""
    ss = np.random.SeedSequence((base_seed, block_size, block_count, trial))
    return int(ss.generate_state(1)[0])


def noise_seed(trial: int, eta_index: int) -> int:
    ss = np.random.SeedSequence((trial, eta_index))
    return int(ss.generate_state(1)[0])


def mae_sweep(
    block_size: int,
    block_counts: list[int],
    etas: list[float],
    trials: int = 32,
    base_seed: int = 0,
) -> list[SweepRow]:
    """MAE of every (block_count, eta, trial) grid point.

    One synthetic problem is drawn per (block_count, trial); every eta
    perturbs that same problem with its own noise stream, so the eta trend
    is measured on common ground.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for count in block_counts:
        for trial in range(trials):
            seed = trial_seed(base_seed, block_size, count, trial)
            problem = SyntheticBlockProblem.generate(block_size, count, seed)
            for eta_index, eta in enumerate(etas):
                noise = NoiseModel(eta, noise_seed(seed, eta_index))
                rows.append(SweepRow(
                    block_size, count, float(eta), seed,
                    perturb_and_mae(problem, noise),
                ))
    return rows


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([
                row.block_size, row.block_count, repr(float(row.eta)),
                row.seed, repr(float(row.mae)),
            ])


def load_sweep_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(SWEEP_HEADER):
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            SweepRow(int(r[0]), int(r[1]), float(r[2]), int(r[3]), float(r[4]))
            for r in reader
        ]


@dataclass(frozen=True)
class SummaryRow:
    block_size: int
    block_count: int
    eta: float
    mean_mae: float


def summarize_sweep(rows: list[SweepRow]) -> list[SummaryRow]:
    """Per (block_size, block_count, eta) mean MAE, in first-seen order."""
    totals: dict[tuple[int, int, float], list[float]] = {}
    order: list[tuple[int, int, float]] = []
    for row in rows:
        key = (row.block_size, row.block_count, row.eta)
        if key not in totals:
            totals[key] = []
            order.append(key)
        totals[key].append(row.mae)
    return [
        SummaryRow(key[0], key[1], key[2], float(np.mean(totals[key])))
        for key in order
    ]


def write_summary_csv(rows: list[SummaryRow], path: str | Path) -> None:
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow([
                row.block_size, row.block_count, repr(float(row.eta)),
                repr(float(row.mean_mae)),
            ])


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def fit_loglog_slope(etas: np.ndarray, maes: np.ndarray) -> FitResult:
    """Least-squares slope of log10(mae) against log10(eta).

    Zero etas (exact points) carry no scaling information and are excluded.
    """
    etas = np.asarray(etas, dtype=np.float64)
    maes = np.asarray(maes, dtype=np.float64)
    keep = etas > 0.0
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two positive-eta points to fit")
    if np.any(maes[keep] <= 0.0):
        raise ValueError("positive-eta points must have positive mae")
    fit = stats.linregress(np.log10(etas[keep]), np.log10(maes[keep]))
    return FitResult(float(fit.slope), float(fit.intercept),
                     float(fit.rvalue) ** 2)


def fit_summary(rows: list[SummaryRow]) -> dict[tuple[int, int], FitResult]:
    """One log-log fit per (block_size, block_count) group of summary rows."""
    grouped: dict[tuple[int, int], list[SummaryRow]] = {}
    for row in rows:
        grouped.setdefault((row.block_size, row.block_count), []).append(row)
    return {
        key: fit_loglog_slope(
            np.array([r.eta for r in group]),
            np.array([r.mean_mae for r in group]),
        )
        for key, group in grouped.items()
    }


def slope_report(fits: dict[tuple[int, int], FitResult]) -> str:
    """Human-readable per-group fit table."""
    lines = ["block_size block_count slope intercept r_squared"]
    for (size, count), fit in sorted(fits.items()):
        lines.append(
            f"{size} {count} {fit.slope!r} {fit.intercept!r} {fit.r_squared!r}"
        )
    return "\n".join(lines) + "\n"


def sampled_energy_errors(
    shots_list: list[int],
    trials: int = 16,
    block_count: int = 8,
    base_seed: int = 0,
) -> list[tuple[int, float]]:
    """Ground-energy error when every scalar coefficient is shot-sampled.

    Each trial draws a scalar (block_size 1) synthetic problem whose
    coefficients lie in [0, 1] and therefore double as success
    probabilities; every coefficient is replaced by a Bernoulli estimate at
    the given shot count and the tridiagonal ground value is compared with
    the exact one. Returns (shots, mean absolute error) pairs.
    """
    results = []
    for shots_index, shots in enumerate(shots_list):
        errors = []
        for trial in range(trials):
            seed = trial_seed(base_seed, 1, block_count, trial)
            problem = SyntheticBlockProblem.generate(1, block_count, seed)
            clean = clean_assembly(problem)
            exact = float(np.linalg.eigvalsh(clean)[0])
            sample_rng_seed = noise_seed(seed, shots_index)
            rng = np.random.default_rng(sample_rng_seed)
            sampled = clean.copy()
            for i in range(block_count):
                sampled[i, i] = rng.binomial(shots, clean[i, i]) / shots
            for i in range(block_count - 1):
                est = rng.binomial(shots, clean[i, i + 1]) / shots
                sampled[i, i + 1] = est
                sampled[i + 1, i] = est
            energy = float(np.linalg.eigvalsh(sampled)[0])
            errors.append(abs(energy - exact))
        results.append((int(shots), float(np.mean(errors))))
    return results
