"""Entropic and entanglement quantities, all in bits.

Subsystem selections are index collections into the state's signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channels import KrausChannel, apply, complementary
from .config import DEFAULT, Tolerances
from .errors import DimensionError, UnsupportedDimensionError, ValidationError
from .states import DensityMatrix, Ensemble, purify

GRID_SIZE = 64
REFINE_STEP = 1e-4


def _entropy_of_eigenvalues(w: np.ndarray, psd_clip: float) -> float:
    if w.size and w.min() < -psd_clip:
        raise ValidationError(f"negative eigenvalue {w.min():.3e} beyond clipping tolerance")
    w = np.clip(w, 0.0, 1.0)
    w = w[w > 0]
    return 0.0 - float(np.sum(w * np.log2(w)))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    return _entropy_of_eigenvalues(np.linalg.eigvalsh(rho.matrix), rho.tol.psd_clip)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def _subset(indices: Iterable[int]) -> list[int]:
    return sorted({int(i) for i in indices})


def _marginal_entropy(rho: DensityMatrix, keep) -> float:
    keep = _subset(keep)
    if len(keep) == len(rho.dims):
        return entropy(rho)
    return entropy(rho.ptrace(keep))


def _disjoint(a, b, what: str):
    a, b = _subset(a), _subset(b)
    if set(a) & set(b):
        raise ValueError(f"{what}: subsystem sets overlap ({a} vs {b})")
    if not a or not b:
        raise ValueError(f"{what}: subsystem sets must be non-empty")
    return a, b


def coherent_information(joint: DensityMatrix, reference, output) -> float:
    """``S(output) - S(reference + output)``."""
    reference, output = _disjoint(reference, output, "coherent_information")
    return _marginal_entropy(joint, output) - _marginal_entropy(joint, reference + output)


def conditional_entropy(joint: DensityMatrix, target, given) -> float:
    """``S(target | given) = S(target + given) - S(given)``."""
    target, given = _disjoint(target, given, "conditional_entropy")
    return _marginal_entropy(joint, target + given) - _marginal_entropy(joint, given)


def mutual_information(joint: DensityMatrix, a, b) -> float:
    a, b = _disjoint(a, b, "mutual_information")
    return _marginal_entropy(joint, a) + _marginal_entropy(joint, b) - _marginal_entropy(joint, a + b)


def entropy_exchange(ch: KrausChannel, rho: DensityMatrix) -> float:
    return entropy(complementary(ch, rho))


def holevo(e: Ensemble) -> float:
    """Entropy of the average state minus the average member entropy."""
    avg = sum(p * s.matrix for p, s in e.members)
    avg = 0.5 * (avg + avg.conj().T)
    s_avg = _entropy_of_eigenvalues(np.linalg.eigvalsh(avg), e.tol.psd_clip)
    return s_avg - sum(p * entropy(s) for p, s in e.members if p > 0)


def disturbance(ch: KrausChannel, rho: DensityMatrix) -> float:
    """``S(rho) - I_c(R > Q')`` evaluated through a purification of ``rho``."""
    if len(rho.dims) != 1:
        raise DimensionError("disturbance expects a single-system input state")
    psi = purify(rho)
    out = apply(ch, psi.density(), acting_on=1)
    return entropy(rho) - coherent_information(out, [0], [1])


def carlen_lieb_bound(rho: DensityMatrix) -> float:
    """``max{S(A) - S(AB), S(B) - S(AB), 0}`` for a bipartite state."""
    if len(rho.dims) != 2:
        raise DimensionError("carlen_lieb_bound expects a bipartite signature")
    s_ab = entropy(rho)
    return max(_marginal_entropy(rho, [0]) - s_ab, _marginal_entropy(rho, [1]) - s_ab, 0.0)


# -- two-qubit entanglement ------------------------------------------------

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state."""
    if rho.dims != (2, 2):
        raise UnsupportedDimensionError(f"concurrence needs a 2x2 signature, got {rho.dims}")
    m = rho.matrix
    flipped = _YY @ m.conj() @ _YY
    root = _psd_sqrt(m)
    r = root @ flipped @ root
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (r + r.conj().T)), 0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _is_pure(rho: DensityMatrix) -> bool:
    return rho.eigenvalues()[0] >= 1 - 1e-9


def eof(rho: DensityMatrix) -> float:
    """Entanglement of formation.

    Pure bipartite states of any dimension use the marginal entropy; mixed
    states need a 2x2 signature (Wootters' closed form).
    """
    if len(rho.dims) != 2:
        raise DimensionError("eof expects a bipartite signature")
    if _is_pure(rho):
        return _marginal_entropy(rho, [0])
    if rho.dims != (2, 2):
        raise UnsupportedDimensionError(
            f"entanglement of formation for mixed states is only available on 2x2, got {rho.dims}"
        )
    c = concurrence(rho)
    return binary_entropy((1 + np.sqrt(max(0.0, 1 - c * c))) / 2)


# -- classical correlation and discord ---------------------------------------

@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-one projective measurement on a qubit, Bloch angles (theta, phi)."""

    theta: float
    phi: float

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = np.cos(self.theta / 2), np.sin(self.theta / 2)
        e = np.exp(1j * self.phi)
        return np.array([c, e * s]), np.array([-np.conj(e) * s, c])

    @property
    def projectors(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors]


def _conditional_cost(blocks: np.ndarray, theta: np.ndarray, phi: np.ndarray, psd_clip: float) -> np.ndarray:
    """``sum_i p_i S(rho_{A|i})`` for every (theta, phi) pair.

    ``blocks[i, j]`` is the A-operator ``<i|_B rho |j>_B``.
    """
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    e = np.exp(1j * phi)
    total = np.zeros(theta.shape)
    for n in (np.stack([c + 0j, e * s]), np.stack([-np.conj(e) * s, c + 0j])):
        # sigma = sum_ij conj(n_i) n_j blocks[i, j]
        w = np.conj(n)[:, None] * n[None, :]  # (2, 2, G)
        sigma = np.einsum("ijg,ijab->gab", w, blocks)
        sigma = 0.5 * (sigma + np.conj(np.swapaxes(sigma, -1, -2)))
        lam = np.linalg.eigvalsh(sigma)
        if lam.size and lam.min() < -psd_clip:
            raise ValidationError("conditional state is not positive semidefinite")
        lam = np.clip(lam, 0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(lam > 0, -lam * np.log2(np.where(lam > 0, lam, 1)), 0.0)
        # p S(sigma/p) = -sum lam log lam + p log p
        p = lam.sum(axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0)
        total = total + terms.sum(axis=-1) + plogp
    return total


def _blocks(rho: DensityMatrix) -> np.ndarray:
    if len(rho.dims) != 2:
        raise DimensionError("expected a bipartite state on A (x) B")
    da, db = rho.dims
    if db != 2:
        raise UnsupportedDimensionError(f"measured subsystem must be a qubit, got dimension {db}")
    t = rho.matrix.reshape(da, db, da, db)
    return np.transpose(t, (1, 3, 0, 2))  # (i, j, a, b)


def measured_conditional_entropy(rho: DensityMatrix, basis: MeasurementBasis) -> float:
    """``sum_i p_i S(rho_{A|i})`` for a given measurement on B."""
    val = _conditional_cost(_blocks(rho), np.array([basis.theta]), np.array([basis.phi]), rho.tol.psd_clip)
    return float(val[0])


def classical_correlation(rho: DensityMatrix) -> tuple[float, MeasurementBasis]:
    """Maximal ``S(A) - sum_i p_i S(rho_{A|i})`` over projective measurements on
    the qubit B.

    A 64 x 64 Bloch grid is scanned (ties resolved to the lexicographically
    smallest angle pair), then refined by coordinate descent until the step
    drops below 1e-4 rad.
    """
    blocks = _blocks(rho)
    clip = rho.tol.psd_clip
    thetas = np.linspace(0.0, np.pi, GRID_SIZE)
    phis = np.linspace(0.0, 2 * np.pi, GRID_SIZE, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    cost = _conditional_cost(blocks, tt.ravel(), pp.ravel(), clip)
    best = int(np.argmin(cost))
    theta, phi, value = float(tt.ravel()[best]), float(pp.ravel()[best]), float(cost[best])

    def f(t, p):
        return float(_conditional_cost(blocks, np.array([t]), np.array([p]), clip)[0])

    step = np.pi / (GRID_SIZE - 1)
    while step >= REFINE_STEP:
        moved = False
        for dt, dp in ((-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step)):
            t = theta + dt
            p = phi + dp
            v = f(t, p)
            if v < value - 1e-15:
                theta, phi, value = t, p, v
                moved = True
                break
        if not moved:
            step /= 2
    s_a = _marginal_entropy(rho, [0])
    j = max(0.0, s_a - value)
    return j, MeasurementBasis(theta, phi)


def discord(rho: DensityMatrix) -> float:
    """Mutual information minus classical correlation (measurement on B)."""
    j, _ = classical_correlation(rho)
    return mutual_information(rho, [0], [1]) - j
