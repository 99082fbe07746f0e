"""Quantum states, signal ensembles, purification and seeded sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DimensionError, InfeasibleError, ParseError, ValidationError
from .tensor import (
    as_signature,
    check_square,
    hermitian_eigensystem,
    hermiticity_defect,
    partial_trace,
    total_dim,
)

RANK_CUTOFF = 1e-12


# -- random sources --------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def trial_seed(master_seed: int, index: int) -> int:
    """Deterministic 64-bit seed for trial ``index`` of a run seeded by ``master_seed``."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(seed_or_rng)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, seed) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with the phase fix."""
    rng = _rng(seed)
    q, r = np.linalg.qr(ginibre(dim, dim, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# -- state types -----------------------------------------------------------

def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite operator with a subsystem signature."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    tol: Tolerances = field(default=DEFAULT, repr=False)

    def __post_init__(self):
        dims = as_signature(self.dims)
        m = _frozen(self.matrix)
        check_square(m, dims)
        if not np.all(np.isfinite(m)):
            raise ValidationError("density matrix has non-finite entries")
        defect = hermiticity_defect(m)
        if defect > self.tol.hermiticity:
            raise ValidationError(f"density matrix not Hermitian (defect {defect:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > self.tol.trace:
            raise ValidationError(f"density matrix trace is {tr.real:.12g}, expected 1")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w[0] < -self.tol.psd_clip:
            raise ValidationError(f"density matrix not positive semidefinite (min eigenvalue {w[0]:.3e})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order (not clipped)."""
        return np.linalg.eigvalsh(self.matrix)[::-1]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def rank(self, cutoff: float = RANK_CUTOFF) -> int:
        return int(np.sum(self.eigenvalues() > cutoff))

    def ptrace(self, keep: Iterable[int]) -> "DensityMatrix":
        keep = sorted(set(int(k) for k in keep))
        m = partial_trace(self.matrix, self.dims, keep)
        return DensityMatrix(m, tuple(self.dims[k] for k in keep), self.tol)

    def allclose(self, other: "DensityMatrix", atol: float = 1e-9) -> bool:
        return self.dims == other.dims and np.allclose(self.matrix, other.matrix, atol=atol, rtol=0)

    @classmethod
    def from_pure(cls, vector: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        return cls(np.outer(v, v.conj()), tuple(dims))


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector with a subsystem signature."""

    vector: np.ndarray
    dims: tuple[int, ...]
    tol: Tolerances = field(default=DEFAULT, repr=False)

    def __post_init__(self):
        dims = as_signature(self.dims)
        v = _frozen(np.asarray(self.vector).reshape(-1))
        if v.shape != (total_dim(dims),):
            raise DimensionError(f"vector of length {v.shape[0]} does not match signature {dims}")
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or abs(norm - 1) > self.tol.trace:
            raise ValidationError(f"state vector norm is {norm:.12g}, expected 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self.vector, self.dims)

    def reduced(self, keep: Iterable[int]) -> DensityMatrix:
        """Marginal on ``keep`` without forming the full projector."""
        keep = sorted(set(int(k) for k in keep))
        n = len(self.dims)
        if not keep or any(not 0 <= k < n for k in keep):
            raise IndexError(f"invalid subsystem selection {keep} for {n} subsystems")
        rest = [i for i in range(n) if i not in keep]
        t = self.vector.reshape(self.dims).transpose(keep + rest)
        dk = total_dim([self.dims[k] for k in keep])
        a = t.reshape(dk, -1)
        m = a @ a.conj().T
        m = 0.5 * (m + m.conj().T)
        return DensityMatrix(m / np.trace(m).real, tuple(self.dims[k] for k in keep), self.tol)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Signal states with a-priori probabilities; probabilities must sum to one."""

    members: tuple[tuple[float, DensityMatrix], ...]
    tol: Tolerances = field(default=DEFAULT, repr=False)

    def __post_init__(self):
        members = tuple((float(p), s) for p, s in self.members)
        if not members:
            raise ValidationError("ensemble must contain at least one member")
        probs = np.array([p for p, _ in members])
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValidationError("ensemble probabilities must be finite and non-negative")
        if abs(probs.sum() - 1) > self.tol.trace:
            raise ValidationError(f"ensemble probabilities sum to {probs.sum():.12g}, expected 1")
        dims = members[0][1].dims
        if any(s.dims != dims for _, s in members):
            raise DimensionError("ensemble members must share one signature")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_weights(cls, weights: Sequence[float], states: Sequence[DensityMatrix]) -> "Ensemble":
        """Build an ensemble from non-negative weights, normalising them."""
        w = np.asarray(weights, dtype=float)
        if len(w) != len(states):
            raise DimensionError("one weight per state is required")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValidationError("weights must be non-negative with a positive sum")
        return cls(tuple(zip((w / w.sum()).tolist(), states)))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.members[0][1].dims

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    def states(self) -> list[DensityMatrix]:
        return [s for _, s in self.members]

    def __len__(self):
        return len(self.members)


def ensemble_average(e: Ensemble) -> DensityMatrix:
    m = sum(p * s.matrix for p, s in e.members)
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m, e.dims, e.tol)


# -- constructions ---------------------------------------------------------

def purify(rho: DensityMatrix) -> PureState:
    """Purification with the reference placed first.

    The reference dimension equals the number of eigenvalues above 1e-12.
    """
    eig = hermitian_eigensystem(rho.matrix)
    lam = eig.eigenvalues
    r = max(int(np.sum(lam > RANK_CUTOFF)), 1)
    lam = np.clip(lam[:r], 0, None)
    lam = lam / lam.sum()
    vecs = eig.eigenvectors[:, :r]
    # |psi> = sum_i sqrt(lam_i) |i>_R |e_i>
    psi = (np.sqrt(lam)[:, None] * vecs.T).reshape(-1)
    return PureState(psi / np.linalg.norm(psi), (r,) + rho.dims, rho.tol)


def eigen_ensemble(rho: DensityMatrix) -> Ensemble:
    """Spectral decomposition of ``rho`` as an ensemble of pure states."""
    eig = hermitian_eigensystem(rho.matrix)
    lam = np.clip(eig.eigenvalues, 0, None)
    keep = lam > RANK_CUTOFF
    if not np.any(keep):
        keep[0] = True
    states = [DensityMatrix.from_pure(eig.eigenvectors[:, i], rho.dims) for i in np.flatnonzero(keep)]
    return Ensemble.from_weights(lam[keep], states)


def pure_decomposition(rho: DensityMatrix, count: int, seed: int) -> Ensemble:
    """Ensemble of ``count`` pure states averaging to ``rho``.

    The square-root factor of ``rho`` is mixed with the first ``rank``
    columns of a Haar-random ``count x count`` unitary.
    """
    eig = hermitian_eigensystem(rho.matrix)
    lam = np.clip(eig.eigenvalues, 0, None)
    r = max(int(np.sum(lam > RANK_CUTOFF)), 1)
    if count < r:
        raise InfeasibleError(f"a rank-{r} state needs at least {r} pure members, got count={count}")
    a = eig.eigenvectors[:, :r] * np.sqrt(lam[:r])
    if count == 1:
        u = np.ones((1, 1), dtype=complex)
    else:
        u = haar_unitary(count, seed)[:, :r]
    vecs = a @ u.T  # column k is sum_i u[k, i] sqrt(lam_i) e_i
    weights = np.sum(np.abs(vecs) ** 2, axis=0)
    states = []
    for k in range(count):
        v = vecs[:, k]
        nrm = np.linalg.norm(v)
        v = v / nrm if nrm > 0 else eig.eigenvectors[:, 0]
        states.append(DensityMatrix.from_pure(v, rho.dims))
    return Ensemble.from_weights(weights, states)


def random_pure(dims: Sequence[int], seed) -> PureState:
    dims = as_signature(dims)
    rng = _rng(seed)
    v = ginibre(total_dim(dims), 1, rng)[:, 0]
    return PureState(v / np.linalg.norm(v), dims)


def random_density(dims: Sequence[int], rank: int, seed) -> DensityMatrix:
    """Induced-measure state: trace of a Haar pure state over a rank-sized ancilla."""
    dims = as_signature(dims)
    d = total_dim(dims)
    if not 1 <= rank <= d:
        raise ValidationError(f"rank must lie in [1, {d}], got {rank}")
    rng = _rng(seed)
    g = ginibre(d, rank, rng)
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real, dims)


def basis_state(index: int, dims: Sequence[int]) -> PureState:
    dims = as_signature(dims)
    v = np.zeros(total_dim(dims), dtype=complex)
    v[index] = 1
    return PureState(v, dims)


def named_state(name: str, dims: Sequence[int]) -> PureState:
    """Bell, GHZ, W or all-zero product state on the given signature."""
    dims = as_signature(dims)
    key = name.lower().replace("_", "-")
    d = total_dim(dims)
    v = np.zeros(d, dtype=complex)
    if key == "product-zero":
        v[0] = 1
        return PureState(v, dims)
    if any(x != 2 for x in dims):
        raise DimensionError(f"{name!r} is defined on qubits only, got {dims}")
    n = len(dims)
    if key == "bell":
        if n != 2:
            raise DimensionError("bell needs exactly two qubits")
        v[0] = v[3] = 1 / np.sqrt(2)
    elif key == "ghz":
        if n < 2:
            raise DimensionError("ghz needs at least two qubits")
        v[0] = v[-1] = 1 / np.sqrt(2)
    elif key == "w":
        if n < 2:
            raise DimensionError("w needs at least two qubits")
        for k in range(n):
            v[1 << k] = 1 / np.sqrt(n)
    else:
        raise ValueError(f"unknown named state {name!r}")
    return PureState(v, dims)


# -- literal format --------------------------------------------------------

def _complex_entry(x, where: str) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(c, (int, float)) for c in x):
        return complex(x[0], x[1])
    raise ParseError(f"{where}: expected [re, im] pair, got {x!r}")


def parse_matrix(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)):
            raise ParseError(f"{where}[{i}]: expected a list of entries")
        out.append([_complex_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    if len({len(r) for r in out}) != 1:
        raise ParseError(f"{where}: rows have unequal lengths")
    return np.array(out, dtype=complex)


def encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def parse_state(obj, where: str = "state") -> PureState | DensityMatrix:
    """Read a state literal: ``{dims: [...], vector: [[re,im],...]}`` or
    ``{dims: [...], density: [[[re,im],...],...]}``. ``{named: ghz, dims: ...}``
    is accepted as a shorthand for the textbook fixtures."""
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a mapping")
    if "dims" not in obj:
        raise ParseError(f"{where}.dims: missing")
    dims = obj["dims"]
    if (not isinstance(dims, (list, tuple)) or not dims
            or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
        raise ParseError(f"{where}.dims: expected a list of positive integers, got {dims!r}")
    keys = {"vector", "density", "named"} & set(obj)
    if len(keys) != 1:
        raise ParseError(f"{where}: exactly one of vector/density/named is required")
    try:
        if "named" in obj:
            return named_state(str(obj["named"]), dims)
        if "vector" in obj:
            vec = obj["vector"]
            if not isinstance(vec, (list, tuple)):
                raise ParseError(f"{where}.vector: expected a list")
            v = np.array([_complex_entry(x, f"{where}.vector[{i}]") for i, x in enumerate(vec)])
            return PureState(v, tuple(dims))
        return DensityMatrix(parse_matrix(obj["density"], f"{where}.density"), tuple(dims))
    except ParseError:
        raise
    except (ValidationError, DimensionError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def encode_state(state: PureState | DensityMatrix) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims),
                "vector": [[float(z.real), float(z.imag)] for z in state.vector]}
    return {"dims": list(state.dims), "density": encode_matrix(state.matrix)}
