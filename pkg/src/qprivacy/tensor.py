"""Dense linear algebra over tensor-product spaces.

Matrices are plain ``numpy`` arrays in row-major order. A *signature* is a
tuple of local dimensions; the product of its entries must equal the side
length of any square matrix it describes. Subsystems are never reordered
implicitly -- use :func:`permute_subsystems` when a different order is
needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DimensionError, DimensionLimitError, NumericError, ValidationError


def as_signature(dims: Iterable[int]) -> tuple[int, ...]:
    sig = tuple(int(d) for d in dims)
    if not sig:
        raise DimensionError("signature must contain at least one subsystem")
    if any(d < 1 for d in sig):
        raise DimensionError(f"subsystem dimensions must be >= 1, got {sig}")
    return sig


def total_dim(dims: Sequence[int]) -> int:
    return int(np.prod(dims, dtype=np.int64))


def check_square(m: np.ndarray, dims: Sequence[int]) -> None:
    d = total_dim(dims)
    if m.ndim != 2 or m.shape != (d, d):
        raise DimensionError(f"matrix of shape {m.shape} does not match signature {tuple(dims)}")


def _check_indices(indices, n: int) -> list[int]:
    idx = [int(i) for i in indices]
    if not idx:
        raise DimensionError("subsystem index set must be non-empty")
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"subsystem index {i} out of range for {n} subsystems")
    if len(set(idx)) != len(idx):
        raise DimensionError(f"repeated subsystem index in {idx}")
    return idx


def kron(a: np.ndarray, b: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Kronecker product ``a (x) b``; raises if a side exceeds ``tol.max_dim``."""
    a = np.asarray(a)
    b = np.asarray(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > tol.max_dim:
        raise DimensionLimitError(
            f"kron result {rows}x{cols} exceeds the dimension cap {tol.max_dim}"
        )
    return np.kron(a, b)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``.

    The kept subsystems stay in their original order regardless of the order
    of ``keep``.
    """
    dims = as_signature(dims)
    m = np.asarray(m)
    check_square(m, dims)
    n = len(dims)
    keep = sorted(_check_indices(keep, n))
    if len(keep) == n:
        return m.copy()
    t = m.reshape(dims + dims)
    # einsum labels: row axes 0..n-1, column axes n..2n-1; traced axes share labels
    row = list(range(n))
    col = [i if i not in keep else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    d = total_dim([dims[i] for i in keep])
    return np.einsum(t, row + col, out).reshape(d, d)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], order: Sequence[int]):
    """Reorder subsystems of a square matrix or a state vector.

    Returns ``(permuted, new_dims)`` with ``new_dims[k] == dims[order[k]]``.
    """
    dims = as_signature(dims)
    order = _check_indices(order, len(dims))
    if len(order) != len(dims):
        raise DimensionError("order must be a permutation of all subsystems")
    m = np.asarray(m)
    new_dims = tuple(dims[i] for i in order)
    d = total_dim(dims)
    if m.ndim == 1:
        if m.shape != (d,):
            raise DimensionError(f"vector of length {m.shape[0]} does not match {dims}")
        return m.reshape(dims).transpose(order).reshape(d), new_dims
    check_square(m, dims)
    n = len(dims)
    axes = list(order) + [n + i for i in order]
    return m.reshape(dims + dims).transpose(axes).reshape(d, d), new_dims


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermiticity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigensystem(m: np.ndarray, tol: Tolerances = DEFAULT) -> HermitianSpectrum:
    """Full eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol.hermiticity:
        raise ValidationError(f"matrix is not Hermitian (max |M - M^dag| = {defect:.3e})")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    h = 0.5 * (m + m.conj().T)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(f"eigensolver did not converge: {exc}", residual=float(np.linalg.norm(h))) from exc
    order = np.argsort(w)[::-1]
    return HermitianSpectrum(w[order], v[:, order])


def is_unitary(u: np.ndarray, tol: float) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def apply_local(op: np.ndarray, vec_or_mat: np.ndarray, dims: Sequence[int],
                acting_on: Sequence[int], out_dims: Sequence[int] | None = None):
    """Apply ``op`` to the subsystems ``acting_on`` of a vector or (as a
    conjugation) of a square matrix.

    ``op`` maps the product of the acted-on dimensions (taken in the order
    given by ``acting_on``) to ``prod(out_dims)``; ``out_dims`` defaults to
    the input dimensions. For a single acted-on subsystem several output
    factors may be given (e.g. system (x) environment for an isometry); they
    replace that subsystem in place. Returns ``(result, new_dims)``.
    """
    dims = as_signature(dims)
    n = len(dims)
    acting_on = _check_indices(acting_on, n)
    in_local = [dims[i] for i in acting_on]
    if out_dims is None:
        out_dims = in_local
    out_dims = [int(d) for d in out_dims]
    if len(acting_on) > 1 and len(out_dims) != len(acting_on):
        raise DimensionError("multi-subsystem operators must keep the number of subsystems")
    op = np.asarray(op)
    if op.shape != (total_dim(out_dims), total_dim(in_local)):
        raise DimensionError(
            f"operator shape {op.shape} does not match {in_local} -> {out_dims}"
        )
    if len(acting_on) == 1:
        pos = acting_on[0]
        new_dims = dims[:pos] + tuple(out_dims) + dims[pos + 1:]
    else:
        new_list = list(dims)
        for i, d in zip(acting_on, out_dims):
            new_list[i] = d
        new_dims = tuple(new_list)
    v = np.asarray(vec_or_mat)
    d_in = total_dim(dims)
    d_out = total_dim(new_dims)
    if d_out > DEFAULT.max_dim:
        raise DimensionLimitError(f"result dimension {d_out} exceeds the cap {DEFAULT.max_dim}")
    if v.ndim == 1:
        if v.shape != (d_in,):
            raise DimensionError(f"vector length {v.shape[0]} does not match {dims}")
        return _act(v.reshape(dims), acting_on, op, out_dims).reshape(d_out), new_dims
    check_square(v, dims)
    t = _act(v.reshape(dims + dims), acting_on, op, out_dims)
    cols = [len(new_dims) + i for i in acting_on]
    t = _act(t, cols, op.conj(), out_dims)
    return t.reshape(d_out, d_out), new_dims


def _act(t: np.ndarray, axes: list[int], op: np.ndarray, out_dims: list[int]) -> np.ndarray:
    k = len(axes)
    moved = np.moveaxis(t, axes, list(range(k)))
    rest = moved.shape[k:]
    r = (op @ moved.reshape(op.shape[1], -1)).reshape(tuple(out_dims) + rest)
    if k == 1:
        n_out = len(out_dims)
        return np.moveaxis(r, list(range(n_out)), list(range(axes[0], axes[0] + n_out)))
    return np.moveaxis(r, list(range(k)), axes)


def apply_unitary(state: np.ndarray, u: np.ndarray, dims: Sequence[int],
                  acting_on: Sequence[int], tol: Tolerances = DEFAULT) -> np.ndarray:
    """Conjugate ``state`` by ``u`` embedded on ``acting_on`` (identity elsewhere)."""
    u = np.asarray(u)
    if not is_unitary(u, tol.unitarity):
        raise ValidationError("operator is not unitary within tolerance")
    out, _ = apply_local(u, state, dims, acting_on)
    return out


def embed_operator(op: np.ndarray, dims: Sequence[int], acting_on: int) -> np.ndarray:
    """Full matrix ``I (x) op (x) I`` for a square operator on one subsystem."""
    dims = as_signature(dims)
    left = total_dim(dims[:acting_on]) if acting_on else 1
    right = total_dim(dims[acting_on + 1:])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))
