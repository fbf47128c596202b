"""Two-sided (biorthogonal) block Lanczos for general square operators.

Left and right block Krylov bases advance together under the plain-transpose
pairing convention: every left-side product uses ``M.T`` / ``psi.T`` rather
than the conjugate transpose, also for complex entries. The projected
operator is block tridiagonal but no longer Hermitian; its diagonal blocks
are A_n with couplings B_n below and C_n above the diagonal.

Residual factorization gauge: after re-biorthogonalizing both residual
blocks against all stored pairs, their pair Gram matrix W = S^T R is split
through its SVD, W = U diag(s) Vh, as C = U diag(sqrt(s)) and
B = diag(sqrt(s)) Vh, with the new basis pair scaled accordingly. On a real
symmetric operator with identical starts this reduces to C = B^T and
reproduces the Hermitian block recursion.

Serious breakdown (W singular relative to the residual magnitudes while both
residuals are still nonzero) raises :class:`SeriousBreakdownError` carrying
the iteration index; no look-ahead cure is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from blocklanczos.block import read_matrix_sections, write_matrix_sections
from blocklanczos.spinchain import HamiltonianSpec, apply_to_array

DENSE_DIMENSION_CAP = 512
DEFAULT_BREAKDOWN_TOL = 1e-10


class SeriousBreakdownError(RuntimeError):
    """The two-sided recursion hit a singular residual pairing.

    Attributes
    ----------
    iteration : int
        The expansion index at which the pairing collapsed.
    """

    def __init__(self, iteration: int, detail: str):
        super().__init__(f"serious breakdown at iteration {iteration}: {detail}")
        self.iteration = iteration


@dataclass(frozen=True, eq=False)
class GeneralOperator:
    """A square operator given by its action and its transpose action.

    The two actions must be mutually consistent under the plain (non
    conjugating) pairing: u . (M v) == (M^T u) . v.
    """

    dimension: int
    action: Callable[[np.ndarray], np.ndarray]
    transpose_action: Callable[[np.ndarray], np.ndarray]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.action(v)

    def apply_transpose(self, v: np.ndarray) -> np.ndarray:
        return self.transpose_action(v)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> GeneralOperator:
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got {mat.shape}")
        if mat.shape[0] > DENSE_DIMENSION_CAP:
            raise ValueError(
                f"dense backing capped at {DENSE_DIMENSION_CAP}, got {mat.shape[0]}"
            )
        mat_t = np.ascontiguousarray(mat.T)
        return cls(mat.shape[0], lambda v: mat @ v, lambda v: mat_t @ v)

    @classmethod
    def from_hamiltonian(cls, spec: HamiltonianSpec) -> GeneralOperator:
        """Matrix-free chain Hamiltonian as a (symmetric) general operator."""
        apply = lambda v: apply_to_array(spec, v)  # noqa: E731 - trivial adapters
        return cls(spec.dim, apply, apply)

    def transpose_consistency_defect(
        self, rng: np.random.Generator, samples: int = 4
    ) -> float:
        """max |u.(Mv) - (M^T u).v| over random real sample pairs."""
        worst = 0.0
        for _ in range(samples):
            u = rng.standard_normal(self.dimension)
            v = rng.standard_normal(self.dimension)
            worst = max(worst, abs(u @ self.apply(v) - self.apply_transpose(u) @ v))
        return worst


@dataclass(frozen=True, eq=False)
class BiorthogonalBlockPair:
    """Matched left/right block sequences with pairwise identity Grams."""

    left_blocks: tuple[np.ndarray, ...]
    right_blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        left = tuple(np.atleast_2d(np.asarray(m)) for m in self.left_blocks)
        right = tuple(np.atleast_2d(np.asarray(m)) for m in self.right_blocks)
        if len(left) != len(right):
            raise ValueError("left and right block lists differ in length")
        for n, (l, r) in enumerate(zip(left, right)):
            if l.shape != r.shape:
                raise ValueError(f"pair {n}: left {l.shape} vs right {r.shape}")
        object.__setattr__(self, "left_blocks", left)
        object.__setattr__(self, "right_blocks", right)

    def __len__(self) -> int:
        return len(self.left_blocks)


def biorthogonality_check(pair: BiorthogonalBlockPair) -> float:
    """max over (i, j) of the max-abs entry of L_i^T R_j - delta_ij I."""
    worst = 0.0
    for i, left in enumerate(pair.left_blocks):
        for j, right in enumerate(pair.right_blocks):
            gram = left.T @ right
            if i == j:
                gram = gram - np.eye(gram.shape[0])
            worst = max(worst, float(np.max(np.abs(gram))))
    return worst


@dataclass(frozen=True, eq=False)
class NonHermitianBlockTridiagonal:
    """Projected-operator blocks: diagonal A, subdiagonal B, superdiagonal C."""

    a_blocks: tuple[np.ndarray, ...]
    b_blocks: tuple[np.ndarray, ...]
    c_blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        a = tuple(np.atleast_2d(np.asarray(m)) for m in self.a_blocks)
        b = tuple(np.atleast_2d(np.asarray(m)) for m in self.b_blocks)
        c = tuple(np.atleast_2d(np.asarray(m)) for m in self.c_blocks)
        if not a:
            raise ValueError("need at least one diagonal block")
        if len(b) != len(a) - 1 or len(c) != len(a) - 1:
            raise ValueError(
                f"expected {len(a) - 1} sub- and superdiagonal blocks, "
                f"got {len(b)} and {len(c)}"
            )
        for n, m in enumerate(a):
            if m.shape[0] != m.shape[1]:
                raise ValueError(f"diagonal block {n} is not square: {m.shape}")
        for n in range(len(b)):
            wn, wn1 = a[n].shape[0], a[n + 1].shape[0]
            if b[n].shape != (wn1, wn):
                raise ValueError(f"subdiagonal block {n} has shape {b[n].shape}")
            if c[n].shape != (wn, wn1):
                raise ValueError(f"superdiagonal block {n} has shape {c[n].shape}")
        object.__setattr__(self, "a_blocks", a)
        object.__setattr__(self, "b_blocks", b)
        object.__setattr__(self, "c_blocks", c)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.a_blocks)

    @property
    def dimension(self) -> int:
        return sum(self.widths)

    @property
    def iterations(self) -> int:
        return len(self.b_blocks)

    def prefix(self, iterations: int) -> NonHermitianBlockTridiagonal:
        if not 0 <= iterations <= self.iterations:
            raise ValueError(f"iterations must be in [0, {self.iterations}]")
        k = iterations
        return NonHermitianBlockTridiagonal(
            self.a_blocks[: k + 1], self.b_blocks[:k], self.c_blocks[:k]
        )

    def save(self, path: str | Path) -> None:
        sections = [("A", 0, self.a_blocks[0])]
        for n in range(1, len(self.a_blocks)):
            sections.append(("B", n, self.b_blocks[n - 1]))
            sections.append(("C", n, self.c_blocks[n - 1]))
            sections.append(("A", n, self.a_blocks[n]))
        write_matrix_sections(Path(path), sections, "two-sided block coefficients")

    @classmethod
    def load(cls, path: str | Path) -> NonHermitianBlockTridiagonal:
        by_name: dict[str, dict[int, np.ndarray]] = {"A": {}, "B": {}, "C": {}}
        for name, index, mat in read_matrix_sections(Path(path)):
            if name not in by_name:
                raise ValueError(f"{path}: unexpected section {name!r}")
            by_name[name][index] = mat
        return cls(
            tuple(by_name["A"][k] for k in sorted(by_name["A"])),
            tuple(by_name["B"][k] for k in sorted(by_name["B"])),
            tuple(by_name["C"][k] for k in sorted(by_name["C"])),
        )


def assemble_t(coeffs: NonHermitianBlockTridiagonal) -> np.ndarray:
    """Dense general block tridiagonal: B below, C above the diagonal."""
    widths = coeffs.widths
    offsets = np.concatenate([[0], np.cumsum(widths)])
    total = int(offsets[-1])
    any_complex = any(
        np.iscomplexobj(m) and np.any(m.imag != 0.0)
        for m in (*coeffs.a_blocks, *coeffs.b_blocks, *coeffs.c_blocks)
    )
    dtype = np.complex128 if any_complex else np.float64
    cast = (lambda m: m.astype(dtype, copy=False)) if dtype == np.complex128 else (
        lambda m: m.real.astype(dtype, copy=False)
    )
    mat = np.zeros((total, total), dtype=dtype)
    for n, a in enumerate(coeffs.a_blocks):
        i = offsets[n]
        mat[i : i + widths[n], i : i + widths[n]] = cast(a)
    for n in range(coeffs.iterations):
        i, j = offsets[n + 1], offsets[n]
        mat[i : i + widths[n + 1], j : j + widths[n]] = cast(coeffs.b_blocks[n])
        mat[j : j + widths[n], i : i + widths[n + 1]] = cast(coeffs.c_blocks[n])
    return mat


def t_eigenvalues(coeffs: NonHermitianBlockTridiagonal) -> np.ndarray:
    """Eigenvalues (generally complex) of the assembled projected operator."""
    return np.linalg.eigvals(assemble_t(coeffs))


def paired_random_start(
    dimension: int,
    width: int,
    rng: np.random.Generator,
    distinct_left: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """A (right, left) start pair with left^T right = I.

    By default the left block equals the (orthonormal) right block; with
    ``distinct_left`` an independent random left block is drawn and rescaled
    against the right one.
    """
    if not 1 <= width <= dimension:
        raise ValueError(f"width must be in [1, {dimension}], got {width}")
    right, _ = np.linalg.qr(rng.standard_normal((dimension, width)))
    if not distinct_left:
        return right, right.copy()
    raw = rng.standard_normal((dimension, width))
    mix = raw.T @ right
    left = raw @ np.linalg.inv(mix).T
    return right, left


def two_sided_block_run(
    op: GeneralOperator,
    right_start: np.ndarray,
    left_start: np.ndarray,
    max_iter: int,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> tuple[NonHermitianBlockTridiagonal, BiorthogonalBlockPair]:
    """Advance the coupled left/right recursions for up to ``max_iter`` expansions.

    Both residual blocks are re-biorthogonalized against every stored pair
    (two passes). Termination: saturation, when either residual block norm
    falls below ``breakdown_tol`` (the reachable subspace on that side is
    exhausted); or serious breakdown, when both residuals are still nonzero
    but their pair Gram matrix is singular relative to their magnitudes, in
    which case :class:`SeriousBreakdownError` is raised.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    right = np.atleast_2d(np.asarray(right_start, dtype=np.float64)
                          if not np.iscomplexobj(right_start) else np.asarray(right_start))
    left = np.atleast_2d(np.asarray(left_start, dtype=np.float64)
                         if not np.iscomplexobj(left_start) else np.asarray(left_start))
    if right.ndim != 2 or right.shape != left.shape:
        raise ValueError("start blocks must be equal-shape (dimension x width) arrays")
    if right.shape[0] != op.dimension:
        raise ValueError(
            f"start blocks have dimension {right.shape[0]}, operator {op.dimension}"
        )
    width = right.shape[1]
    pairing = left.T @ right
    if np.max(np.abs(pairing - np.eye(width))) > 1e-10:
        raise ValueError("start pair is not biorthonormal: left^T right != I")

    dim = op.dimension
    rights = [right]
    lefts = [left]
    right_stack, left_stack = right, left
    a_list: list[np.ndarray] = []
    b_list: list[np.ndarray] = []
    c_list: list[np.ndarray] = []

    for n in range(max_iter + 1):
        h_right = op.apply(rights[n])
        a = lefts[n].T @ h_right
        a_list.append(a)
        if n == max_iter or right_stack.shape[1] >= dim:
            break
        ht_left = op.apply_transpose(lefts[n])
        r_res = h_right - rights[n] @ a
        s_res = ht_left - lefts[n] @ a.T
        if n > 0:
            r_res -= rights[n - 1] @ c_list[n - 1]
            s_res -= lefts[n - 1] @ b_list[n - 1].T
        for _ in range(2):
            r_res -= right_stack @ (left_stack.T @ r_res)
            s_res -= left_stack @ (right_stack.T @ s_res)
        r_norm = float(np.linalg.norm(r_res))
        s_norm = float(np.linalg.norm(s_res))
        if min(r_norm, s_norm) < breakdown_tol:
            break  # one side saturated: clean invariant-subspace termination
        w = s_res.T @ r_res
        u, sing, vh = np.linalg.svd(w)
        if sing[-1] <= breakdown_tol * r_norm * s_norm:
            raise SeriousBreakdownError(
                n + 1,
                f"pair Gram smallest singular value {sing[-1]:.3e} with "
                f"residual norms {r_norm:.3e}, {s_norm:.3e}",
            )
        root = np.sqrt(sing)
        b_next = root[:, None] * vh
        c_next = u * root[None, :]
        right_next = (r_res @ vh.conj().T) / root[None, :]
        left_next = (s_res @ u.conj()) / root[None, :]
        b_list.append(b_next)
        c_list.append(c_next)
        rights.append(right_next)
        lefts.append(left_next)
        right_stack = np.concatenate([right_stack, right_next], axis=1)
        left_stack = np.concatenate([left_stack, left_next], axis=1)

    coeffs = NonHermitianBlockTridiagonal(tuple(a_list), tuple(b_list), tuple(c_list))
    pair = BiorthogonalBlockPair(tuple(lefts), tuple(rights))
    return coeffs, pair


def match_spectra(computed: np.ndarray, reference: np.ndarray) -> float:
    """Greedy nearest pairing of two complex multisets; returns the largest
    paired distance. Lengths must agree."""
    computed = np.asarray(computed, dtype=np.complex128).ravel()
    reference = np.asarray(reference, dtype=np.complex128).ravel()
    if computed.size != reference.size:
        raise ValueError(
            f"spectra differ in size: {computed.size} vs {reference.size}"
        )
    order = np.lexsort((computed.imag, computed.real))
    remaining = reference.copy()
    alive = np.ones(remaining.size, dtype=bool)
    worst = 0.0
    for idx in order:
        dists = np.abs(remaining - computed[idx])
        dists[~alive] = np.inf
        j = int(np.argmin(dists))
        worst = max(worst, float(dists[j]))
        alive[j] = False
    return worst
