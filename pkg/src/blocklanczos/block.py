"""Block Lanczos recursion: d vectors advance per step.

The projected operator becomes block tridiagonal with d x d diagonal blocks
(Hermitian) and coupling blocks taken upper-triangular with non-negative
real diagonal. The triangular gauge makes the coupling block invertible
whenever no deflation occurs, so the recursion step amounts to a stable
triangular solve. Residual columns whose norm drops below the deflation
tolerance are removed and the block narrows; coupling blocks then become
rectangular and the assembly handles ragged widths.

A run with d equal starting eigenvectors of the operator terminates after a
single block; a run with d = 1 reproduces the scalar recursion exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from blocklanczos import spinchain
from blocklanczos.scalar import EigenpairReconstruction
from blocklanczos.spinchain import HamiltonianSpec, StateVector

DEFAULT_DEFLATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BlockVector:
    """An ordered group of same-length chain states advanced together."""

    columns: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        columns = tuple(self.columns)
        if not columns:
            raise ValueError("a block needs at least one column")
        if len({c.length for c in columns}) != 1:
            raise ValueError("all columns must share the same site count")
        object.__setattr__(self, "columns", columns)

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def length(self) -> int:
        return self.columns[0].length

    def matrix(self) -> np.ndarray:
        """Stacked (dimension x width) column matrix."""
        return np.column_stack([c.amplitudes for c in self.columns])

    def orthonormality_defect(self) -> float:
        q = self.matrix()
        return float(np.max(np.abs(q.conj().T @ q - np.eye(self.width))))

    def require_orthonormal(self, tol: float = 1e-8) -> None:
        defect = self.orthonormality_defect()
        if defect > tol:
            raise ValueError(f"block not orthonormal: Gram defect {defect:.3e}")

    @classmethod
    def from_matrix(cls, length: int, mat: np.ndarray) -> BlockVector:
        mat = np.atleast_2d(mat)
        return cls(tuple(StateVector(length, mat[:, j]) for j in range(mat.shape[1])))


def random_orthonormal_block(
    length: int, width: int, rng: np.random.Generator, complex_amplitudes: bool = False
) -> BlockVector:
    """Orthonormal random block from a QR factorization."""
    dim = 2**length
    if not 1 <= width <= dim:
        raise ValueError(f"width must be in [1, {dim}], got {width}")
    raw = rng.standard_normal((dim, width))
    if complex_amplitudes:
        raw = raw + 1j * rng.standard_normal((dim, width))
    q, _ = np.linalg.qr(raw)
    return BlockVector.from_matrix(length, q)


def eigenvector_start(spec: HamiltonianSpec, width: int) -> BlockVector:
    """The ``width`` lowest exact eigenvectors, the default starting block."""
    _, vecs = spinchain.exact_diagonalize(spec)
    if width > len(vecs):
        raise ValueError(f"width {width} exceeds Hilbert-space dimension {len(vecs)}")
    return BlockVector(tuple(vecs[:width]))


def _format_scalar(x) -> str:
    if isinstance(x, complex):
        return repr(x)
    return repr(float(x))


def _parse_scalar(token: str):
    try:
        return float(token)
    except ValueError:
        return complex(token)


def write_matrix_sections(path: Path, sections: list[tuple[str, int, np.ndarray]],
                          header: str) -> None:
    """Text serialization: one `<name> <index> <rows> <cols>` stanza per matrix,
    dense row-major entries, repr-exact scalars."""
    lines = [f"# {header}"]
    for name, index, mat in sections:
        mat = np.atleast_2d(mat)
        complex_out = bool(np.iscomplexobj(mat) and np.any(mat.imag != 0.0))
        rows, cols = mat.shape
        lines.append(f"{name} {index} {rows} {cols}")
        for r in range(rows):
            entries = (
                complex(mat[r, c]) if complex_out else float(np.real(mat[r, c]))
                for c in range(cols)
            )
            lines.append(" ".join(_format_scalar(e) for e in entries))
    path.write_text("\n".join(lines) + "\n")


def read_matrix_sections(path: Path) -> list[tuple[str, int, np.ndarray]]:
    sections: list[tuple[str, int, np.ndarray]] = []
    lines = [
        ln.strip()
        for ln in path.read_text().splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    pos = 0
    while pos < len(lines):
        head = lines[pos].split()
        if len(head) != 4:
            raise ValueError(f"{path}: malformed section header {lines[pos]!r}")
        name, index, rows, cols = head[0], int(head[1]), int(head[2]), int(head[3])
        pos += 1
        values = []
        for r in range(rows):
            if pos >= len(lines):
                raise ValueError(f"{path}: truncated section {name} {index}")
            row = [_parse_scalar(tok) for tok in lines[pos].split()]
            if len(row) != cols:
                raise ValueError(
                    f"{path}: section {name} {index} row {r} has {len(row)} of {cols} entries"
                )
            values.append(row)
            pos += 1
        mat = np.array(values)
        sections.append((name, index, mat))
    return sections


@dataclass(frozen=True, eq=False)
class BlockCoefficients:
    """Per-iteration projected-operator blocks.

    ``a_blocks[n]`` is the Hermitian diagonal block of iteration n;
    ``b_blocks[n]`` couples iteration n to n+1 and, in the gauge produced by
    :func:`block_lanczos_run`, is upper-triangular (upper-trapezoidal after
    deflation) with non-negative real diagonal. Only Hermiticity and length
    consistency are validated so that externally perturbed coefficient sets
    remain representable.
    """

    a_blocks: tuple[np.ndarray, ...]
    b_blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        a_blocks = tuple(np.atleast_2d(np.asarray(a)) for a in self.a_blocks)
        b_blocks = tuple(np.atleast_2d(np.asarray(b)) for b in self.b_blocks)
        if not a_blocks:
            raise ValueError("need at least one diagonal block")
        if len(b_blocks) != len(a_blocks) - 1:
            raise ValueError(
                f"expected {len(a_blocks) - 1} coupling blocks, got {len(b_blocks)}"
            )
        for n, a in enumerate(a_blocks):
            if a.shape[0] != a.shape[1]:
                raise ValueError(f"diagonal block {n} is not square: {a.shape}")
            if np.max(np.abs(a - a.conj().T)) > 1e-10:
                raise ValueError(f"diagonal block {n} is not Hermitian within 1e-10")
        for n, b in enumerate(b_blocks):
            expected = (a_blocks[n + 1].shape[0], a_blocks[n].shape[0])
            if b.shape != expected:
                raise ValueError(
                    f"coupling block {n} has shape {b.shape}, expected {expected}"
                )
        object.__setattr__(self, "a_blocks", a_blocks)
        object.__setattr__(self, "b_blocks", b_blocks)

    @property
    def iterations(self) -> int:
        return len(self.b_blocks)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(a.shape[0] for a in self.a_blocks)

    @property
    def dimension(self) -> int:
        return sum(self.widths)

    def prefix(self, iterations: int) -> BlockCoefficients:
        """Coefficients after only ``iterations`` expansions (deterministic)."""
        if not 0 <= iterations <= self.iterations:
            raise ValueError(f"iterations must be in [0, {self.iterations}]")
        return BlockCoefficients(
            self.a_blocks[: iterations + 1], self.b_blocks[:iterations]
        )

    def save(self, path: str | Path) -> None:
        sections = [("A", 0, self.a_blocks[0])]
        for n, b in enumerate(self.b_blocks, start=1):
            sections.append(("B", n, b))
            sections.append(("A", n, self.a_blocks[n]))
        write_matrix_sections(Path(path), sections, "block lanczos coefficients")

    @classmethod
    def load(cls, path: str | Path) -> BlockCoefficients:
        a_by_index: dict[int, np.ndarray] = {}
        b_by_index: dict[int, np.ndarray] = {}
        for name, index, mat in read_matrix_sections(Path(path)):
            if name == "A":
                a_by_index[index] = mat
            elif name == "B":
                b_by_index[index] = mat
            else:
                raise ValueError(f"{path}: unexpected section {name!r}")
        a_blocks = tuple(a_by_index[k] for k in sorted(a_by_index))
        b_blocks = tuple(b_by_index[k] for k in sorted(b_by_index))
        return cls(a_blocks, b_blocks)


@dataclass(frozen=True, eq=False)
class BlockTridiagonalMatrix:
    """Dense Hermitian assembly of the projected operator."""

    matrix: np.ndarray
    widths: tuple[int, ...]

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"assembly must be square, got {mat.shape}")
        if sum(self.widths) != mat.shape[0]:
            raise ValueError("block widths do not sum to the matrix dimension")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("assembly is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "widths", tuple(self.widths))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class ExtractionCounter:
    """Counts scalar coefficient extractions, one per block-matrix entry."""

    events: list[tuple[str, int]] = field(default_factory=list)

    def record(self, label: str, rows: int, cols: int) -> None:
        self.events.append((label, rows * cols))

    @property
    def counts(self) -> list[int]:
        return [count for _, count in self.events]

    @property
    def total(self) -> int:
        return sum(self.counts)


def _gram_schmidt_factor(
    residual: np.ndarray, deflation_tol: float
) -> tuple[np.ndarray | None, np.ndarray]:
    """Factor residual = Q_new @ B with orthonormal Q_new, echelon B.

    Columns are orthogonalized left to right (two passes); a column whose
    remainder falls below ``deflation_tol`` is deflated: its projection
    coefficients stay in B but it contributes no new basis column. Returns
    (Q_new or None when fully deflated, B of shape (kept, cols)).
    """
    dim, cols = residual.shape
    kept: list[np.ndarray] = []
    b_cols: list[np.ndarray] = []
    for j in range(cols):
        r = residual[:, j].copy()
        proj = np.zeros(cols, dtype=residual.dtype)
        for _ in range(2):
            for i, q in enumerate(kept):
                c = np.vdot(q, r)
                r -= c * q
                proj[i] += c
        nrm = float(np.linalg.norm(r))
        col = proj.copy()
        if nrm < deflation_tol:
            b_cols.append(col)  # dependent direction: keep projections only
            continue
        col[len(kept)] = nrm
        b_cols.append(col)
        kept.append(r / nrm)
    b = np.column_stack(b_cols)[: len(kept), :] if kept else np.empty((0, cols))
    if not kept:
        return None, b
    return np.column_stack(kept), b


def block_lanczos_run(
    spec: HamiltonianSpec,
    start: BlockVector,
    max_iter: int,
    deflation_tol: float = DEFAULT_DEFLATION_TOL,
    counter: ExtractionCounter | None = None,
) -> tuple[BlockCoefficients, list[BlockVector]]:
    """Advance the block recursion from ``start`` for up to ``max_iter`` expansions.

    Each expansion applies H to the whole block, subtracts the diagonal and
    previous-coupling projections, re-orthogonalizes against every stored
    column (two passes), then factors the remainder into an orthonormal
    block times an upper-triangular coupling block. Fully deflated
    remainders terminate the run cleanly: the Krylov space has become
    invariant.

    ``counter``, when given, records one scalar extraction per coefficient
    entry (width**2 per block when nothing deflates).
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if start.length != spec.length:
        raise ValueError(f"start has {start.length} sites but spec has {spec.length}")
    start.require_orthonormal(1e-8)

    dim = spec.dim
    first = start.matrix()
    if np.all(first.imag == 0.0):
        first = np.ascontiguousarray(first.real)
    blocks: list[np.ndarray] = [first]
    stacked = first
    a_blocks: list[np.ndarray] = []
    b_blocks: list[np.ndarray] = []

    for n in range(max_iter + 1):
        psi = blocks[n]
        h_psi = spinchain.apply_to_array(spec, psi)
        a = psi.conj().T @ h_psi
        a = 0.5 * (a + a.conj().T)  # exact Hermiticity, kills roundoff skew
        a_blocks.append(a)
        if counter is not None:
            counter.record(f"A{n}", a.shape[0], a.shape[1])
        if n == max_iter or stacked.shape[1] >= dim:
            break
        residual = h_psi - psi @ a
        if n > 0:
            residual -= blocks[n - 1] @ b_blocks[n - 1].conj().T
        for _ in range(2):
            residual -= stacked @ (stacked.conj().T @ residual)
        q_new, b = _gram_schmidt_factor(residual, deflation_tol)
        if q_new is None:
            break  # invariant subspace: clean termination
        if counter is not None:
            counter.record(f"B{n + 1}", b.shape[0], b.shape[1])
        b_blocks.append(b)
        blocks.append(q_new)
        stacked = np.concatenate([stacked, q_new], axis=1)

    coeffs = BlockCoefficients(tuple(a_blocks), tuple(b_blocks))
    wrapped = [
        BlockVector.from_matrix(spec.length, blocks[k]) for k in range(len(a_blocks))
    ]
    return coeffs, wrapped


def assemble_block_tridiagonal(coeffs: BlockCoefficients) -> BlockTridiagonalMatrix:
    """Dense assembly: diagonal blocks on the diagonal, couplings below,
    conjugate-transposed couplings above, exact zeros elsewhere."""
    widths = coeffs.widths
    offsets = np.concatenate([[0], np.cumsum(widths)])
    total = int(offsets[-1])
    any_complex = any(
        np.iscomplexobj(m) and np.any(m.imag != 0.0)
        for m in (*coeffs.a_blocks, *coeffs.b_blocks)
    )
    dtype = np.complex128 if any_complex else np.float64
    mat = np.zeros((total, total), dtype=dtype)
    for n, a in enumerate(coeffs.a_blocks):
        i = offsets[n]
        mat[i : i + widths[n], i : i + widths[n]] = a.real if dtype == np.float64 else a
    for n, b in enumerate(coeffs.b_blocks):
        i, j = offsets[n + 1], offsets[n]
        bb = b.real if dtype == np.float64 else b
        mat[i : i + widths[n + 1], j : j + widths[n]] = bb
        mat[j : j + widths[n], i : i + widths[n + 1]] = bb.conj().T
    return BlockTridiagonalMatrix(mat, widths)


def block_ritz_values(coeffs: BlockCoefficients) -> np.ndarray:
    """Ascending eigenvalues of the assembled projected operator."""
    return np.linalg.eigvalsh(assemble_block_tridiagonal(coeffs).matrix)


def block_eigensolve(mat: BlockTridiagonalMatrix) -> list[EigenpairReconstruction]:
    """All eigenpairs of the assembly, ascending; weights indexed in
    (block, column) flattened assembly order."""
    values, vectors = np.linalg.eigh(mat.matrix)
    return [
        EigenpairReconstruction(g, vectors[:, g], float(values[g]))
        for g in range(values.size)
    ]


def reconstruct_excitations(
    blocks: list[BlockVector],
    recs: list[EigenpairReconstruction],
    count: int,
) -> list[StateVector]:
    """The ``count`` lowest reconstructed states, each normalized."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if count > len(recs):
        raise ValueError(f"requested {count} states but only {len(recs)} pairs exist")
    ordered = sorted(recs, key=lambda r: r.energy)[:count]
    q = np.concatenate([b.matrix() for b in blocks], axis=1)
    length = blocks[0].length
    states = []
    for rec in ordered:
        k = len(rec.gammas)
        if k > q.shape[1]:
            raise ValueError(
                f"weight vector of size {k} exceeds the {q.shape[1]} stored columns"
            )
        states.append(StateVector(length, q[:, :k] @ rec.gammas).normalized())
    return states
