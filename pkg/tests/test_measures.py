import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qprivacy.channels import apply, named_channel, random_channel, compose
from qprivacy.errors import DimensionError, UnsupportedDimensionError, ValidationError
from qprivacy.measures import (
    MeasurementBasis,
    binary_entropy,
    carlen_lieb_bound,
    classical_correlation,
    coherent_information,
    concurrence,
    conditional_entropy,
    discord,
    disturbance,
    entropy,
    eof,
    holevo,
    measured_conditional_entropy,
    mutual_information,
)
from qprivacy.states import (
    DensityMatrix,
    Ensemble,
    named_state,
    pure_decomposition,
    purify,
    random_density,
    random_pure,
)

BELL = named_state("bell", (2, 2)).density()


def werner(p):
    return DensityMatrix(p * BELL.matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def werner_j(p):
    # analytic classical correlation of a Bell-diagonal state with |c_i| = p
    f = lambda x: x * np.log2(x) if x > 0 else 0.0
    return 0.5 * (f(1 - p) + f(1 + p))


def test_entropy_examples():
    assert entropy(random_pure((3,), 0).density()) == pytest.approx(0, abs=1e-12)
    for d in (2, 3, 5):
        assert entropy(DensityMatrix(np.eye(d) / d, (d,))) == pytest.approx(np.log2(d))
    # binary entropy oracle: -3/4 log 3/4 - 1/4 log 1/4
    oracle = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
    assert entropy(DensityMatrix(np.diag([0.75, 0.25]), (2,))) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(0.811278, abs=1e-6)


def test_entropy_clips_dust_and_rejects_real_negatives():
    assert entropy(DensityMatrix(np.diag([1 + 1e-10, -1e-10]), (2,))) == pytest.approx(0, abs=1e-9)
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.01, -0.01]), (2,))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_entropy_bounds(seed):
    rho = random_density((2, 3), 1 + seed % 6, seed)
    s = entropy(rho)
    assert -1e-12 <= s <= np.log2(6) + 1e-12


def test_coherent_information_fixtures():
    assert coherent_information(BELL, [0], [1]) == pytest.approx(1)
    out = apply(named_channel("depolarizing", p=1.0), BELL, acting_on=1)
    assert coherent_information(out, [0], [1]) == pytest.approx(-1, abs=1e-9)
    with pytest.raises(ValueError):
        coherent_information(BELL, [0], [0])


def test_conditional_entropy_fixtures():
    prod = DensityMatrix(np.kron(np.diag([0.75, 0.25]), np.diag([1.0, 0.0])), (2, 2))
    assert conditional_entropy(prod, [0], [1]) == pytest.approx(binary_entropy(0.25))
    assert conditional_entropy(BELL, [0], [1]) == pytest.approx(-1)
    assert conditional_entropy(BELL, [1], [0]) == pytest.approx(-1)
    ghz = named_state("ghz", (2, 2, 2)).density()
    # S(AB) = S(B) = 1 for GHZ
    assert conditional_entropy(ghz, [0], [1]) == pytest.approx(0, abs=1e-12)


def test_holevo_examples():
    z, o = DensityMatrix.from_pure([1, 0], (2,)), DensityMatrix.from_pure([0, 1], (2,))
    assert holevo(Ensemble(((0.3, z), (0.7, z)))) == pytest.approx(0, abs=1e-12)
    assert holevo(Ensemble(((0.5, z), (0.5, o)))) == pytest.approx(1)


def test_holevo_pure_signals_equals_average_entropy():
    rho = random_density((3,), 3, 4)
    e = pure_decomposition(rho, 5, 6)
    assert holevo(e) == pytest.approx(entropy(rho), abs=1e-10)


def test_disturbance_examples():
    mixed = DensityMatrix(np.eye(2) / 2, (2,))
    u = random_channel(2, 1, 3)
    assert disturbance(u, random_density((2,), 2, 1)) == pytest.approx(0, abs=1e-10)
    assert disturbance(named_channel("depolarizing", p=1.0), mixed) == pytest.approx(2, abs=1e-10)
    with pytest.raises(DimensionError):
        disturbance(u, BELL)


def test_data_processing_for_coherent_information():
    for s in range(30):
        rho = random_density((2,), 2, s)
        ch1, ch2 = random_channel(2, 2, 100 + s), random_channel(2, 2, 200 + s)
        psi = purify(rho).density()
        one = coherent_information(apply(ch1, psi, 1), [0], [1])
        two = coherent_information(apply(compose(ch1, ch2), psi, 1), [0], [1])
        assert two <= one + 1e-10


def test_concurrence_and_eof_fixtures():
    assert concurrence(BELL) == pytest.approx(1)
    assert eof(BELL) == pytest.approx(1)
    prod = named_state("product-zero", (2, 2)).density()
    assert concurrence(prod) == pytest.approx(0, abs=1e-12)
    assert eof(prod) == pytest.approx(0, abs=1e-12)
    w_ab = named_state("w", (2, 2, 2)).reduced([0, 1])
    assert concurrence(w_ab) == pytest.approx(2 / 3, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_concurrence_pure_state_oracle(seed):
    v = random_pure((2, 2), seed).vector
    a, b, c, d = v
    assert concurrence(DensityMatrix.from_pure(v, (2, 2))) == pytest.approx(2 * abs(a * d - b * c), abs=1e-7)


def test_eof_dimension_rules():
    # pure states of any size use the marginal entropy
    psi = random_pure((3, 2), 1)
    assert eof(psi.density()) == pytest.approx(entropy(psi.reduced([0])), abs=1e-10)
    with pytest.raises(UnsupportedDimensionError):
        eof(random_density((3, 2), 3, 2))
    with pytest.raises(UnsupportedDimensionError):
        concurrence(random_density((3, 2), 3, 2))


def test_carlen_lieb_examples():
    psi = random_pure((2, 3), 5)
    assert carlen_lieb_bound(psi.density()) == pytest.approx(entropy(psi.reduced([0])), abs=1e-10)
    sep = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    assert carlen_lieb_bound(sep) == 0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(1, 4))
def test_eof_dominates_carlen_lieb(seed, rank):
    rho = random_density((2, 2), rank, seed)
    assert eof(rho) >= carlen_lieb_bound(rho) - 1e-9


def test_classical_correlation_fixtures():
    prod = DensityMatrix(np.kron(random_density((2,), 2, 1).matrix, random_density((2,), 2, 2).matrix), (2, 2))
    assert classical_correlation(prod)[0] == pytest.approx(0, abs=1e-9)
    j, basis = classical_correlation(BELL)
    assert j == pytest.approx(1, abs=1e-6)
    cc = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    j, basis = classical_correlation(cc)
    assert j == pytest.approx(1, abs=1e-9)
    # exhaustive grid oracle: the computational basis is optimal and first on the grid
    assert basis.theta == pytest.approx(0, abs=1e-12) and basis.phi == pytest.approx(0, abs=1e-12)


def test_discord_fixtures():
    cc = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    assert discord(cc) == pytest.approx(0, abs=1e-9)
    assert discord(BELL) == pytest.approx(1, abs=1e-4)


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_werner_classical_correlation_oracle(p):
    assert classical_correlation(werner(p))[0] == pytest.approx(werner_j(p), abs=1e-7)


def test_werner_discord_is_smooth_and_monotone():
    ps = np.linspace(0, 1, 41)
    d = np.array([discord(werner(p)) for p in ps])
    assert np.all(np.diff(d) >= -1e-9)
    assert np.max(np.abs(np.diff(d, 2))) < 0.02


def test_optimizer_beats_random_measurements(rng):
    for s in range(10):
        rho = random_density((2, 2), 1 + s % 4, s)
        j, best = classical_correlation(rho)
        s_a = entropy(rho.ptrace([0]))
        assert s_a - measured_conditional_entropy(rho, best) == pytest.approx(j, abs=1e-12)
        for _ in range(50):
            b = MeasurementBasis(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            assert s_a - measured_conditional_entropy(rho, b) <= j + 1e-9


def test_measurement_basis_orthonormal():
    b = MeasurementBasis(0.7, 2.1)
    p, q = b.projectors
    assert np.allclose(p + q, np.eye(2))
    assert np.allclose(p @ q, 0)


def test_discord_properties_random():
    for s in range(20):
        rho = random_density((2, 2), 1 + s % 4, 1000 + s)
        d = discord(rho)
        assert d >= -1e-9
        assert classical_correlation(rho)[0] <= mutual_information(rho, [0], [1]) + 1e-9


def test_discord_needs_qubit_measurement():
    with pytest.raises(UnsupportedDimensionError):
        discord(random_density((2, 3), 3, 0))
