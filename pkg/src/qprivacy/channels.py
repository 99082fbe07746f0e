"""CPTP maps in Kraus form, their Stinespring dilations and complements.

The environment of a channel is the register indexed by its Kraus
operators: the minimal dilation ``V|psi> = sum_k K_k|psi> (x) |k>_E``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DimensionError, NumericError, ParseError, ValidationError
from .states import DensityMatrix, haar_unitary, parse_matrix, encode_matrix
from .tensor import apply_local, total_dim

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class StinespringDilation:
    """Unitary on system (x) environment realising a channel.

    The environment starts in basis state ``env_initial`` of an
    ``env_in_dim``-dimensional register; the output is ordered
    system' (x) environment' with ``env_out_dim`` levels.
    """

    unitary: np.ndarray
    input_dim: int
    output_dim: int
    env_in_dim: int
    env_out_dim: int
    env_initial: int = 0

    @property
    def isometry(self) -> np.ndarray:
        cols = np.arange(self.input_dim) * self.env_in_dim + self.env_initial
        return self.unitary[:, cols]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``Tr_E[U (rho (x) |E><E|) U^dag]``."""
        e0 = np.zeros((self.env_in_dim, self.env_in_dim))
        e0[self.env_initial, self.env_initial] = 1
        big = self.unitary @ np.kron(rho, e0) @ self.unitary.conj().T
        t = big.reshape(self.output_dim, self.env_out_dim, self.output_dim, self.env_out_dim)
        return np.einsum("aebe->ab", t)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple
    name: str = "kraus"
    params: dict = field(default_factory=dict)
    tol: Tolerances = field(default=DEFAULT, repr=False)

    def __post_init__(self):
        ops = [np.array(k, dtype=complex) for k in self.kraus_ops]
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise DimensionError("Kraus operators must be matrices of one common shape")
        for k in ops:
            k.setflags(write=False)
        gram = sum(k.conj().T @ k for k in ops)
        defect = float(np.max(np.abs(gram - np.eye(shape[1]))))
        if defect > self.tol.completeness:
            raise ValidationError(f"Kraus operators are not complete (defect {defect:.3e})")
        object.__setattr__(self, "kraus_ops", tuple(ops))

    @property
    def input_dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def env_dim(self) -> int:
        return len(self.kraus_ops)

    @property
    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus_ops)

    @functools.cached_property
    def isometry(self) -> np.ndarray:
        """``V`` with rows ordered (output, environment)."""
        k = self.stacked  # (env, out, in)
        return k.transpose(1, 0, 2).reshape(self.output_dim * self.env_dim, self.input_dim)

    @functools.cached_property
    def dilation(self) -> StinespringDilation:
        # compute-once per instance; a racing recompute yields the same value
        return dilate(self)

    def describe(self) -> dict:
        return {"kind": self.name, "params": dict(self.params)}


def _kraus_sum(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kij,jl,kml->im", ops, rho, ops.conj())


def apply(ch: KrausChannel, rho: DensityMatrix, acting_on: int = 0) -> DensityMatrix:
    """Act with ``ch`` on subsystem ``acting_on`` of ``rho``."""
    if not 0 <= acting_on < len(rho.dims):
        raise IndexError(f"subsystem {acting_on} out of range")
    if rho.dims[acting_on] != ch.input_dim:
        raise DimensionError(
            f"channel input dimension {ch.input_dim} != subsystem dimension {rho.dims[acting_on]}"
        )
    if len(rho.dims) == 1:
        out = _kraus_sum(ch.stacked, rho.matrix)
        dims = (ch.output_dim,)
    else:
        # the isometry followed by tracing the new environment factor
        m, dims = apply_local(ch.isometry, rho.matrix, rho.dims, [acting_on],
                              [ch.output_dim, ch.env_dim])
        t = m.reshape(dims + dims)
        n = len(dims)
        env = acting_on + 1
        row = list(range(n))
        col = [n + i if i != env else env for i in range(n)]
        out_axes = [i for i in range(n) if i != env] + [n + i for i in range(n) if i != env]
        dims = dims[:env] + dims[env + 1:]
        d = total_dim(dims)
        out = np.einsum(t, row + col, out_axes).reshape(d, d)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, dims, rho.tol)


def complementary(ch: KrausChannel, rho: DensityMatrix, acting_on: int = 0) -> DensityMatrix:
    """Environment output: ``<k|rho_E|l> = Tr(K_k rho K_l^dag)``.

    Only the marginal of ``rho`` on ``acting_on`` matters.
    """
    local = rho if len(rho.dims) == 1 else rho.ptrace([acting_on])
    if local.dim != ch.input_dim:
        raise DimensionError(f"channel input dimension {ch.input_dim} != {local.dim}")
    k = ch.stacked
    m = np.einsum("kij,jm,lim->kl", k, local.matrix, k.conj())
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m, (ch.env_dim,), rho.tol)


def _complete_unitary(cols: np.ndarray, positions: np.ndarray, size: int, tol: float) -> np.ndarray:
    """Place orthonormal ``cols`` at ``positions`` and fill the rest with an
    orthonormal basis of their orthogonal complement."""
    gram = cols.conj().T @ cols
    defect = float(np.max(np.abs(gram - np.eye(cols.shape[1]))))
    if defect > tol:
        raise NumericError("isometry columns are not orthonormal", residual=defect)
    # complement via full SVD of the projector onto the span
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(s > 0.5))
    if rank != cols.shape[1]:
        raise NumericError("rank-deficient isometry", residual=float(s.min(initial=0.0)))
    complement = u[:, rank:]
    out = np.zeros((size, size), dtype=complex)
    out[:, positions] = cols
    rest = np.setdiff1d(np.arange(size), positions)
    out[:, rest] = complement
    return out


def dilate(ch: KrausChannel) -> StinespringDilation:
    """Unitary completion of the minimal Stinespring isometry.

    The environment output register has ``env_dim`` levels, padded upward
    until ``output_dim * env_out`` is a multiple of ``input_dim``.
    """
    d_in, d_out, k = ch.input_dim, ch.output_dim, ch.env_dim
    e_out = k
    while (d_out * e_out) % d_in:
        e_out += 1
    e_in = d_out * e_out // d_in
    v = ch.stacked.transpose(1, 0, 2)  # (out, env, in)
    if e_out > k:
        v = np.concatenate([v, np.zeros((d_out, e_out - k, d_in), dtype=complex)], axis=1)
    v = v.reshape(d_out * e_out, d_in)
    size = d_in * e_in
    positions = np.arange(d_in) * e_in
    u = _complete_unitary(v, positions, size, ch.tol.unitarity)
    return StinespringDilation(u, d_in, d_out, e_in, e_out, 0)


# -- constructors ----------------------------------------------------------

def _param(params: dict, key: str) -> float:
    if key not in params:
        raise ValueError(f"missing channel parameter {key!r}")
    value = float(params[key])
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"channel parameter {key}={value} outside [0, 1]")
    return value


def named_channel(name: str, **params) -> KrausChannel:
    """Textbook channels: identity, depolarizing(p), amplitude-damping(gamma),
    phase-damping(lam), bit-flip(p), erasure(p)."""
    key = name.lower().replace("_", "-")
    I, X, Y, Z = (_PAULI[c] for c in "IXYZ")
    if key == "identity":
        dim = int(params.get("dim", 2))
        return KrausChannel((np.eye(dim),), "identity", {"dim": dim} if dim != 2 else {})
    if key == "depolarizing":
        p = _param(params, "p")
        ops = (np.sqrt(1 - 3 * p / 4) * I, np.sqrt(p / 4) * X, np.sqrt(p / 4) * Y, np.sqrt(p / 4) * Z)
        return KrausChannel(ops, "depolarizing", {"p": p})
    if key == "amplitude-damping":
        g = _param(params, "gamma")
        ops = (np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]]))
        return KrausChannel(ops, "amplitude-damping", {"gamma": g})
    if key == "phase-damping":
        lam = _param(params, "lam")
        ops = (np.array([[1, 0], [0, np.sqrt(1 - lam)]]), np.array([[0, 0], [0, np.sqrt(lam)]]))
        return KrausChannel(ops, "phase-damping", {"lam": lam})
    if key == "bit-flip":
        p = _param(params, "p")
        return KrausChannel((np.sqrt(1 - p) * I, np.sqrt(p) * X), "bit-flip", {"p": p})
    if key == "erasure":
        p = _param(params, "p")
        dim = int(params.get("dim", 2))
        keep = np.zeros((dim + 1, dim))
        keep[:dim, :dim] = np.sqrt(1 - p) * np.eye(dim)
        ops = [keep]
        for j in range(dim):
            k = np.zeros((dim + 1, dim))
            k[dim, j] = np.sqrt(p)
            ops.append(k)
        return KrausChannel(tuple(ops), "erasure", {"p": p} | ({"dim": dim} if dim != 2 else {}))
    raise ValueError(f"unknown channel {name!r}")


# scalar parameter name per sweepable channel
SWEEP_PARAMETER = {
    "depolarizing": "p",
    "amplitude-damping": "gamma",
    "phase-damping": "lam",
    "bit-flip": "p",
    "erasure": "p",
}


def random_channel(input_dim: int, env_dim: int, seed) -> KrausChannel:
    """Haar-random unitary on system (x) environment, sliced into Kraus operators."""
    if env_dim < 1:
        raise ValueError("env_dim must be >= 1")
    u = haar_unitary(input_dim * env_dim, seed).reshape(input_dim, env_dim, input_dim, env_dim)
    ops = tuple(u[:, k, :, 0] for k in range(env_dim))
    return KrausChannel(ops, "random", {"input_dim": input_dim, "env_dim": env_dim})


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """``second o first`` with Kraus operators ``B_j A_i``."""
    if second.input_dim != first.output_dim:
        raise DimensionError("composition dimension mismatch")
    ops = tuple(b @ a for b in second.kraus_ops for a in first.kraus_ops)
    return KrausChannel(ops, f"{second.name}*{first.name}",
                        {"first": first.describe(), "second": second.describe()})


# -- literal format --------------------------------------------------------

def parse_channel(obj, where: str = "channel") -> KrausChannel:
    """``{kind: <name>, params: {...}}`` or ``{kraus: [matrix, ...]}``."""
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a mapping")
    if ("kind" in obj) == ("kraus" in obj):
        raise ParseError(f"{where}: exactly one of kind/kraus is required")
    try:
        if "kind" in obj:
            params = obj.get("params") or {}
            if not isinstance(params, dict):
                raise ParseError(f"{where}.params: expected a mapping")
            return named_channel(str(obj["kind"]), **params)
        ops = obj["kraus"]
        if not isinstance(ops, list) or not ops:
            raise ParseError(f"{where}.kraus: expected a non-empty list of matrices")
        mats = [parse_matrix(m, f"{where}.kraus[{i}]") for i, m in enumerate(ops)]
        return KrausChannel(tuple(mats))
    except ParseError:
        raise
    except (ValidationError, DimensionError, ValueError, TypeError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def encode_channel(ch: KrausChannel) -> dict:
    if ch.name in SWEEP_PARAMETER or ch.name == "identity":
        return ch.describe()
    return {"kraus": [encode_matrix(k) for k in ch.kraus_ops]}
