"""Single-vector Lanczos recursion in exact-arithmetic emulation.

Builds an orthonormal Krylov basis of a Hermitian chain Hamiltonian with the
three-term recurrence, re-orthogonalizing every new vector against the whole
basis so that the classical floating-point loss of orthogonality cannot
contaminate the coefficients. The projected operator is tridiagonal; its
eigenpairs give Ritz energies and reconstruction weights for excited states.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from blocklanczos import spinchain
from blocklanczos.spinchain import HamiltonianSpec, StateVector

DEFAULT_BREAKDOWN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TridiagonalCoefficients:
    """Diagonal (alphas) and off-diagonal (betas) projected-operator entries.

    Gauge: every beta is real and non-negative (each Krylov vector is
    normalized and the residual norm is taken as the coupling).
    ``len(betas) == len(alphas) - 1`` always holds.
    """

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self) -> None:
        alphas = np.atleast_1d(np.asarray(self.alphas, dtype=np.float64))
        betas = np.asarray(self.betas, dtype=np.float64).reshape(-1)
        if alphas.size == 0:
            raise ValueError("coefficients need at least one diagonal entry")
        if betas.size != alphas.size - 1:
            raise ValueError(
                f"expected {alphas.size - 1} off-diagonal entries, got {betas.size}"
            )
        if betas.size and betas.min() < 0.0:
            raise ValueError("off-diagonal coefficients must be non-negative")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)

    @property
    def size(self) -> int:
        return self.alphas.size

    @property
    def iterations(self) -> int:
        """Number of Krylov expansions actually performed."""
        return self.betas.size

    def prefix(self, iterations: int) -> TridiagonalCoefficients:
        """Coefficients after only ``iterations`` expansions.

        The recursion is deterministic, so this equals the output of a run
        with a smaller ``max_iter``.
        """
        if not 0 <= iterations <= self.iterations:
            raise ValueError(f"iterations must be in [0, {self.iterations}]")
        return TridiagonalCoefficients(
            self.alphas[: iterations + 1], self.betas[:iterations]
        )

    def matrix(self) -> np.ndarray:
        """Dense symmetric tridiagonal assembly."""
        mat = np.diag(self.alphas)
        if self.betas.size:
            mat += np.diag(self.betas, 1) + np.diag(self.betas, -1)
        return mat

    def save(self, path: str | Path) -> None:
        """Two-column text table: ``alpha_i beta_{i+1}``, last row alpha only."""
        lines = ["# lanczos coefficients: alpha [beta]"]
        for i, alpha in enumerate(self.alphas):
            if i < self.betas.size:
                lines.append(f"{float(alpha)!r} {float(self.betas[i])!r}")
            else:
                lines.append(f"{float(alpha)!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> TridiagonalCoefficients:
        alphas: list[float] = []
        betas: list[float] = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) not in (1, 2):
                raise ValueError(f"{path}:{lineno}: expected 1 or 2 columns")
            alphas.append(float(fields[0]))
            if len(fields) == 2:
                betas.append(float(fields[1]))
        return cls(np.array(alphas), np.array(betas))


@dataclass(frozen=True, eq=False)
class KrylovBasis:
    """Ordered orthonormal Krylov vectors produced by a Lanczos run."""

    vectors: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vectors", tuple(self.vectors))

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix(self) -> np.ndarray:
        """Stacked column matrix (dimension x basis size)."""
        return np.column_stack([v.amplitudes for v in self.vectors])

    def orthonormality_defect(self) -> float:
        q = self.matrix()
        gram = q.conj().T @ q
        return float(np.max(np.abs(gram - np.eye(len(self.vectors)))))


@dataclass(frozen=True, eq=False)
class EigenpairReconstruction:
    """One Ritz pair: energy plus the weights of the Krylov vectors.

    ``excitation_index`` is the position in ascending energy order
    (0 = ground). The weight vector is normalized.
    """

    excitation_index: int
    gammas: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        gammas = np.atleast_1d(np.asarray(self.gammas))
        if abs(np.sum(np.abs(gammas) ** 2) - 1.0) > 1e-10:
            raise ValueError("reconstruction weights must have unit norm")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "energy", float(self.energy))


def _working_array(v: StateVector) -> np.ndarray:
    """Copy of the amplitudes, demoted to float64 when purely real."""
    amps = v.amplitudes
    if np.all(amps.imag == 0.0):
        return amps.real.copy()
    return amps.copy()


def lanczos_run(
    spec: HamiltonianSpec,
    start: StateVector,
    max_iter: int,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> tuple[TridiagonalCoefficients, KrylovBasis]:
    """Run the three-term recursion from ``start`` for up to ``max_iter`` expansions.

    Each expansion applies H once, subtracts the projections onto the two
    previous vectors, then re-orthogonalizes against the entire basis (two
    passes) before normalizing. Stops early when the residual norm falls
    below ``breakdown_tol``: the Krylov space has become invariant. The
    realized expansion count is ``len(coeffs.betas)``.

    Returns the coefficient table and the orthonormal basis, with
    ``len(basis) == len(coeffs.alphas)``.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if spec.length != start.length:
        raise ValueError(f"start has {start.length} sites but spec has {spec.length}")
    start.require_normalized(1e-10)

    dim = spec.dim
    v0 = _working_array(start)
    cap = min(max_iter + 1, dim)
    # rows are Krylov vectors: keeps the reorthogonalization BLAS-contiguous
    basis = np.empty((cap, dim), dtype=v0.dtype)
    basis[0] = v0
    alphas: list[float] = []
    betas: list[float] = []

    for n in range(cap):
        hv = spinchain.apply_to_array(spec, basis[n])
        alphas.append(float(np.real(np.vdot(basis[n], hv))))
        if n == max_iter or n + 1 == dim:
            break
        w = hv - alphas[n] * basis[n]
        if n > 0:
            w -= betas[n - 1] * basis[n - 1]
        for _ in range(2):
            w -= basis[: n + 1].T @ (basis[: n + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        if beta < breakdown_tol:
            break
        betas.append(beta)
        basis[n + 1] = w / beta

    kept = len(alphas)
    coeffs = TridiagonalCoefficients(np.array(alphas), np.array(betas))
    vectors = tuple(StateVector(spec.length, basis[k]) for k in range(kept))
    return coeffs, KrylovBasis(vectors)


def ritz_values(coeffs: TridiagonalCoefficients) -> np.ndarray:
    """Ascending eigenvalues of the projected tridiagonal operator."""
    if coeffs.size == 1:
        return coeffs.alphas.copy()
    return sla.eigh_tridiagonal(coeffs.alphas, coeffs.betas, eigvals_only=True)


def tridiagonal_eigensolve(
    coeffs: TridiagonalCoefficients,
) -> list[EigenpairReconstruction]:
    """All Ritz pairs in ascending energy order.

    The weight vectors are the orthonormal eigenvectors of the tridiagonal
    matrix expressed in the Krylov basis.
    """
    if coeffs.size == 0:  # unreachable through the type, kept as a guard
        raise ValueError("no coefficients to diagonalize")
    if coeffs.size == 1:
        values = coeffs.alphas.copy()
        vectors = np.ones((1, 1))
    else:
        values, vectors = sla.eigh_tridiagonal(coeffs.alphas, coeffs.betas)
    return [
        EigenpairReconstruction(g, vectors[:, g], float(values[g]))
        for g in range(values.size)
    ]


def reconstruct_state(basis: KrylovBasis, rec: EigenpairReconstruction) -> StateVector:
    """Combine Krylov vectors with the Ritz weights; returns a normalized state."""
    if len(rec.gammas) > len(basis):
        raise ValueError(
            f"{len(rec.gammas)} weights exceed the {len(basis)}-vector basis"
        )
    length = basis.vectors[0].length
    amps = np.zeros(basis.vectors[0].dim, dtype=np.complex128)
    for gamma, vec in zip(rec.gammas, basis.vectors):
        amps += gamma * vec.amplitudes
    return StateVector(length, amps).normalized()


def residual_norm(spec: HamiltonianSpec, v: StateVector, energy: float) -> float:
    """|| H v - energy * v ||, the Ritz-quality diagnostic (v normalized)."""
    hv = spinchain.apply_to_array(spec, v.amplitudes)
    return float(np.linalg.norm(hv - energy * v.amplitudes))
