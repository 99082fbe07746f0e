"""Privacy of a single sender sharing a pure state with receivers over noisy
channels, and the trade-off / monogamy checks built on it.

Subsystem layout
----------------
A :class:`Scenario` holds a pure state on ``R (x) Q_1 (x) ... (x) Q_n``; the
sender keeps ``R`` and sends ``Q_i`` through channel ``i``. After
:func:`evolve` the global state lives on
``R, Q_1', E_1', ..., Q_n', E_n'`` and is still pure.

Per-leg privacy
---------------
Leg ``i`` is treated as one channel from everything the sender ships
(``X = Q_1 ... Q_n``) to the receiver ``Q_i'``; its environment -- what the
eavesdropper is credited with -- is everything else outside ``R``:
``E_i'`` together with the other receivers' outputs and environments. With
one leg this is the ordinary channel and its complementary channel. Signal
ensembles live on ``X`` and must average to the marginal ``rho^X``; the
default is its spectral decomposition. The receiver's and the
eavesdropper's accessible information are replaced by their Holevo bounds
(``chi_receiver``, ``chi_eve``) and every report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channels import KrausChannel, complementary
from .config import DEFAULT, Tolerances
from .errors import DimensionError, UnsupportedDimensionError, ValidationError
from .measures import (
    carlen_lieb_bound,
    classical_correlation,
    conditional_entropy,
    entropy,
    eof,
    holevo,
    mutual_information,
)
from .states import DensityMatrix, Ensemble, PureState, eigen_ensemble, ensemble_average
from .tensor import apply_local, total_dim

PROXY_NOTE = "H_Bob and H_Eve replaced by Holevo proxies chi_receiver and chi_eve"
CLAMP_NOTE = "negative minimal privacies clamped at 0 before squaring"


@dataclass(frozen=True)
class Leg:
    name: str
    channel: KrausChannel


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: PureState
    legs: tuple[Leg, ...]
    ensembles: tuple = ()  # optional Ensemble (or None) per leg, on the sent system X
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        legs = tuple(self.legs)
        object.__setattr__(self, "legs", legs)
        n_sub = len(self.initial.dims)
        if len(legs) != n_sub - 1:
            raise ValidationError(
                f"scenario has {len(legs)} legs but the initial state has {n_sub} subsystems "
                f"(expected {n_sub - 1} legs)"
            )
        for i, leg in enumerate(legs):
            if leg.channel.input_dim != self.initial.dims[i + 1]:
                raise DimensionError(
                    f"leg {leg.name!r}: channel input dimension {leg.channel.input_dim} "
                    f"!= subsystem dimension {self.initial.dims[i + 1]}"
                )
        names = [leg.name for leg in legs]
        if len(set(names)) != len(names):
            raise ValidationError(f"leg names must be unique, got {names}")
        ens = tuple(self.ensembles) if self.ensembles else (None,) * len(legs)
        if len(ens) != len(legs):
            raise ValidationError("give one ensemble (or null) per leg")
        object.__setattr__(self, "ensembles", ens)

    @property
    def sent_dims(self) -> tuple[int, ...]:
        return self.initial.dims[1:]

    def sent_marginal(self) -> DensityMatrix:
        return self.initial.reduced(range(1, len(self.initial.dims)))


@dataclass(frozen=True, eq=False)
class EvolvedScenario:
    scenario: Scenario
    state: PureState  # on R, Q1', E1', ..., Qn', En'
    names: tuple[str, ...]

    def __post_init__(self):
        norm = np.linalg.norm(self.state.vector)
        if abs(norm - 1) > 1e-8:
            raise ValidationError(f"evolved state lost purity/normalisation (norm {norm})")

    @property
    def n_legs(self) -> int:
        return len(self.scenario.legs)

    def receiver(self, leg: int) -> int:
        return 1 + 2 * leg

    def environment(self, leg: int) -> int:
        return 2 + 2 * leg

    def marginal(self, indices: Iterable[int]) -> DensityMatrix:
        return self.state.reduced(indices)

    @property
    def joint(self) -> DensityMatrix:
        return self.state.density()

    def S(self, indices: Iterable[int]) -> float:
        return entropy(self.marginal(indices))

    def leg_index(self, leg) -> int:
        if isinstance(leg, str):
            for i, l in enumerate(self.scenario.legs):
                if l.name == leg:
                    return i
            raise KeyError(f"no leg named {leg!r}")
        leg = int(leg)
        if not 0 <= leg < self.n_legs:
            raise IndexError(f"leg {leg} out of range")
        return leg


def evolve(s: Scenario, order: Sequence[int] | None = None) -> EvolvedScenario:
    """Apply each leg's Stinespring isometry in turn (default order 0..n-1).

    Outputs are placed by leg index, so the result does not depend on
    ``order``.
    """
    n = len(s.legs)
    order = list(range(n)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the leg indices")
    # axis bookkeeping: after leg i is applied its subsystem splits into two
    vec = s.initial.vector
    dims = list(s.initial.dims)
    applied: set[int] = set()
    for i in order:
        pos = 1 + i + sum(1 for j in applied if j < i)
        ch = s.legs[i].channel
        vec, new = apply_local(ch.isometry, vec, dims, [pos], [ch.output_dim, ch.env_dim])
        dims = list(new)
        applied.add(i)
    names = ["R"]
    for leg in s.legs:
        names += [f"{leg.name}'", f"E_{leg.name}'"]
    vec = vec / np.linalg.norm(vec)
    return EvolvedScenario(s, PureState(vec, tuple(dims)), tuple(names))


def leg_channel(s: Scenario, leg: int) -> KrausChannel:
    """Channel from the whole sent system ``X`` to receiver ``leg``.

    Its Kraus index runs over everything the receiver does not hold
    besides ``R``; for a one-leg scenario it is the leg's own channel.
    """
    if len(s.legs) == 1:
        return s.legs[0].channel
    w = np.ones((1, 1), dtype=complex)
    out_dims: list[int] = []
    for l in s.legs:
        w = np.kron(w, l.channel.isometry)
        out_dims += [l.channel.output_dim, l.channel.env_dim]
    d_x = total_dim(s.sent_dims)
    t = w.reshape(tuple(out_dims) + (d_x,))
    keep = 2 * leg
    rest = [a for a in range(len(out_dims)) if a != keep]
    t = np.transpose(t, [keep] + rest + [len(out_dims)])
    d_b = out_dims[keep]
    t = t.reshape(d_b, -1, d_x)
    ops = tuple(t[:, m, :] for m in range(t.shape[1]))
    return KrausChannel(ops, f"leg:{s.legs[leg].name}", {"legs": [l.channel.describe() for l in s.legs]})


@dataclass(frozen=True)
class LegPrivacy:
    leg: str
    chi_receiver: float
    chi_eve: float
    h_bob_proxy: float
    h_eve_proxy: float
    p_min: float
    ic: float
    privacy_lower_bound: float
    ic_extended_reference: float
    input_entropy: float
    input_dim: int
    note: str = PROXY_NOTE

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _push(ch: KrausChannel, rho: DensityMatrix) -> np.ndarray:
    k = ch.stacked
    return np.einsum("kij,jl,kml->im", k, rho.matrix, k.conj())


def _channel_ensemble(ch: KrausChannel, e: Ensemble, env: bool) -> Ensemble:
    members = []
    for p, s in e.members:
        if env:
            out = complementary(ch, s)
        else:
            m = _push(ch, s)
            out = DensityMatrix(0.5 * (m + m.conj().T), (ch.output_dim,))
        members.append((p, out))
    return Ensemble(tuple(members))


def default_ensemble(s: Scenario, leg: int) -> Ensemble:
    e = s.ensembles[leg]
    return e if e is not None else eigen_ensemble(s.sent_marginal())


def leg_privacy(ev: EvolvedScenario, leg, ensemble: Ensemble | None = None,
                tol: Tolerances = DEFAULT) -> LegPrivacy:
    """Holevo quantities, minimal guaranteed privacy and coherent information
    for one leg."""
    i = ev.leg_index(leg)
    s = ev.scenario
    if ensemble is None:
        ensemble = default_ensemble(s, i)
    rho_x = s.sent_marginal()
    if ensemble.dims != rho_x.dims and ensemble.dims != (rho_x.dim,):
        raise DimensionError(
            f"ensemble signature {ensemble.dims} does not match the sent system {rho_x.dims}"
        )
    avg = ensemble_average(ensemble)
    gap = float(np.max(np.abs(avg.matrix - rho_x.matrix)))
    if gap > tol.inequality:
        raise ValidationError(
            f"ensemble average differs from the sent marginal by {gap:.3e} (leg {s.legs[i].name!r})"
        )
    flat = Ensemble(tuple((p, DensityMatrix(m.matrix, (m.dim,))) for p, m in ensemble.members))
    ch = leg_channel(s, i)
    chi_b = holevo(_channel_ensemble(ch, flat, env=False))
    chi_e = holevo(_channel_ensemble(ch, flat, env=True))
    b, e = ev.receiver(i), ev.environment(i)
    s_b = ev.S([b])
    ic = s_b - ev.S([0, b])
    ic_ext = s_b - ev.S([e])
    return LegPrivacy(
        leg=s.legs[i].name,
        chi_receiver=chi_b,
        chi_eve=chi_e,
        h_bob_proxy=chi_b,
        h_eve_proxy=chi_e,
        p_min=chi_b - chi_e,
        ic=ic,
        privacy_lower_bound=ic,
        ic_extended_reference=ic_ext,
        input_entropy=entropy(rho_x),
        input_dim=rho_x.dim,
    )


@dataclass(frozen=True)
class PrivacyReport:
    legs: tuple[LegPrivacy, ...]

    def __getitem__(self, key):
        if isinstance(key, str):
            for r in self.legs:
                if r.leg == key:
                    return r
            raise KeyError(key)
        return self.legs[key]

    def as_dicts(self) -> list[dict]:
        return [r.as_dict() for r in self.legs]


def privacy_report(ev: EvolvedScenario, ensembles: Sequence | None = None,
                   tol: Tolerances = DEFAULT) -> PrivacyReport:
    ensembles = _ensembles(ev, ensembles)
    return PrivacyReport(tuple(leg_privacy(ev, i, ensembles[i], tol) for i in range(ev.n_legs)))


def _ensembles(ev: EvolvedScenario, ensembles) -> list:
    if ensembles is None:
        return [None] * ev.n_legs
    if isinstance(ensembles, Ensemble):
        return [ensembles] * ev.n_legs
    ensembles = list(ensembles)
    if len(ensembles) != ev.n_legs:
        raise ValidationError("one ensemble per leg is required")
    return ensembles


# -- inequality reports ----------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    """``left <= right`` checked with ``slack = right - left >= -tolerance``."""

    check: str
    left: float
    right: float
    tolerance: float
    provenance: dict = field(default_factory=dict)
    note: str = ""

    @property
    def slack(self) -> float:
        return self.right - self.left

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        d = {
            "check": self.check,
            "left": self.left,
            "right": self.right,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "seed": self.provenance.get("seed"),
            "provenance": {k: v for k, v in self.provenance.items() if k != "seed"},
        }
        if self.note:
            d["note"] = self.note
        return d


def _prov(ev: EvolvedScenario, **extra) -> dict:
    p = dict(ev.scenario.provenance)
    p.update(extra)
    return p


def _is_qubit_pair(ev: EvolvedScenario, a: int, b: int) -> bool:
    return ev.state.dims[a] == 2 and ev.state.dims[b] == 2


def tradeoff_checks(ev: EvolvedScenario, leg, ensemble: Ensemble | None = None,
                    tol: Tolerances = DEFAULT, record: LegPrivacy | None = None) -> list[InequalityReport]:
    """Information-gain, privacy and disturbance trade-offs for one leg."""
    i = ev.leg_index(leg)
    r = record if record is not None else leg_privacy(ev, i, ensemble, tol)
    log_d = math.log2(r.input_dim)
    prov = _prov(ev, leg=r.leg)
    t = tol.inequality
    reports = [
        InequalityReport("pmin_le_ic", r.p_min, r.ic, t, prov, PROXY_NOTE),
        InequalityReport("ic_plus_heve_le_logd", r.ic + r.h_eve_proxy, log_d, t, prov, PROXY_NOTE),
        InequalityReport("privacy_plus_heve_le_logd",
                         (r.h_bob_proxy - r.h_eve_proxy) + r.h_eve_proxy, log_d, t, prov, PROXY_NOTE),
        InequalityReport("disturbance_plus_pmin_le_entropy",
                         (r.input_entropy - r.ic) + r.p_min, r.input_entropy, t, prov, PROXY_NOTE),
    ]
    b = ev.receiver(i)
    if _is_qubit_pair(ev, 0, b):
        rho_rb = ev.marginal([0, b])
        reports.append(InequalityReport("pmin_le_eof", r.p_min, eof(rho_rb), t, prov, PROXY_NOTE))
        reports.append(InequalityReport("carlen_lieb_le_eof", carlen_lieb_bound(rho_rb), eof(rho_rb), t, prov))
    return reports


def _records(ev, ensembles, tol):
    ensembles = _ensembles(ev, ensembles)
    return [leg_privacy(ev, i, ensembles[i], tol) for i in range(ev.n_legs)]


def _need_legs(ev: EvolvedScenario, n: int | None = None, minimum: int | None = None):
    if n is not None and ev.n_legs != n:
        raise ValidationError(f"check needs exactly {n} receiver legs, scenario has {ev.n_legs}")
    if minimum is not None and ev.n_legs < minimum:
        raise ValidationError(f"check needs at least {minimum} receiver legs, scenario has {ev.n_legs}")


def theorem1_check(ev: EvolvedScenario, ensembles=None, tol: Tolerances = DEFAULT,
                   records: Sequence[LegPrivacy] | None = None) -> list[InequalityReport]:
    """Mutual exclusiveness of minimal privacy for two receivers.

    Returns the main report followed by the coherent-information sum.
    """
    _need_legs(ev, n=2)
    r = list(records) if records is not None else _records(ev, ensembles, tol)
    prov = _prov(ev)
    return [
        InequalityReport("theorem1_pmin_sum_le_0", r[0].p_min + r[1].p_min, 0.0, tol.inequality, prov, PROXY_NOTE),
        InequalityReport("theorem1_ic_sum_le_0", r[0].ic + r[1].ic, 0.0, tol.inequality, prov),
    ]


def multiparty_check(ev: EvolvedScenario, ensembles=None, tol: Tolerances = DEFAULT,
                     records: Sequence[LegPrivacy] | None = None) -> list[InequalityReport]:
    """Summed minimal privacy over all receivers, with the conditional-entropy sum."""
    _need_legs(ev, minimum=2)
    r = list(records) if records is not None else _records(ev, ensembles, tol)
    cond_sum = 0.0
    for i in range(ev.n_legs):
        b = ev.receiver(i)
        cond_sum += ev.S([0, b]) - ev.S([b])
    prov = _prov(ev)
    return [
        InequalityReport("multiparty_pmin_sum_le_0", sum(x.p_min for x in r), 0.0, tol.inequality, prov, PROXY_NOTE),
        InequalityReport("multiparty_conditional_entropy_sum_ge_0", 0.0, cond_sum, tol.inequality, prov),
    ]


def theorem2_check(ev: EvolvedScenario, ensembles=None, tol: Tolerances = DEFAULT,
                   records: Sequence[LegPrivacy] | None = None) -> list[InequalityReport]:
    """Minimal privacies bounded by ``I_c(A > BC)`` (a lower bound on the joint
    optimal privacy), plus the coherent-information form."""
    _need_legs(ev, n=2)
    r = list(records) if records is not None else _records(ev, ensembles, tol)
    b, c = ev.receiver(0), ev.receiver(1)
    ic_joint = ev.S([b, c]) - ev.S([0, b, c])
    prov = _prov(ev)
    note = "right side is I_c(A>BC), a lower bound on the joint optimal privacy"
    return [
        InequalityReport("theorem2_pmin_sum_le_ic_joint", r[0].p_min + r[1].p_min, ic_joint,
                         tol.inequality, prov, f"{note}; {PROXY_NOTE}"),
        InequalityReport("theorem2_ic_sum_le_ic_joint", r[0].ic + r[1].ic, ic_joint, tol.inequality, prov, note),
    ]


def theorem3_check(ev: EvolvedScenario, ensemble_c: Ensemble | None = None,
                   tol: Tolerances = DEFAULT, record_c: LegPrivacy | None = None) -> list[InequalityReport]:
    """Entanglement of formation on (R, B') against minimal privacy on (R, C').

    Returns the theorem followed by the three proof-chain links.
    """
    _need_legs(ev, n=2)
    b, c = ev.receiver(0), ev.receiver(1)
    if not (_is_qubit_pair(ev, 0, b) and ev.state.dims[c] == 2):
        raise UnsupportedDimensionError(
            "the formation-vs-privacy check needs qubit R and B' (Wootters) and a qubit C' (measured side)"
        )
    r_c = record_c if record_c is not None else leg_privacy(ev, 1, ensemble_c, tol)
    e_f = eof(ev.marginal([0, b]))
    rho_rc = ev.marginal([0, c])
    j, basis = classical_correlation(rho_rc)
    mi = mutual_information(rho_rc, [0], [1])
    d = mi - j
    s_a = ev.S([0])
    t = tol.discord_inequality
    prov = _prov(ev, basis=[basis.theta, basis.phi])
    return [
        InequalityReport("theorem3_eof_plus_pmin_le_entropy", e_f + r_c.p_min, s_a, t, prov, PROXY_NOTE),
        InequalityReport("theorem3_koashi_winter", e_f + j, s_a, t, prov),
        InequalityReport("theorem3_eof_plus_ic_le_discord", e_f + r_c.ic, d, t, prov),
        InequalityReport("theorem3_discord_le_entropy", d, s_a, t, prov),
    ]


def squared_monogamy_check(state: PureState, channels: Sequence[KrausChannel] | None = None,
                           ensembles=None, tol: Tolerances = DEFAULT,
                           provenance: dict | None = None) -> InequalityReport:
    """Sum of squared (clamped) minimal privacies against ``S(A)^2``.

    Subsystem 0 is the sender; every other qubit is a receiver leg
    (identity channels by default).
    """
    if any(d != 2 for d in state.dims):
        raise UnsupportedDimensionError(f"squared monogamy needs qubits only, got {state.dims}")
    n = len(state.dims) - 1
    if channels is None:
        from .channels import named_channel
        channels = [named_channel("identity")] * n
    legs = tuple(Leg(f"B{i + 1}", ch) for i, ch in enumerate(channels))
    ev = evolve(Scenario(state, legs, provenance=dict(provenance or {})))
    recs = _records(ev, ensembles, tol)
    raw = [r.p_min for r in recs]
    left = sum(max(p, 0.0) ** 2 for p in raw)
    s_a = ev.S([0])
    return InequalityReport("squared_monogamy", left, s_a ** 2, tol.inequality,
                            _prov(ev, raw_p_min=raw), CLAMP_NOTE)


# -- entropy inequalities (used by the verification harness) ---------------

def strong_subadditivity(rho: DensityMatrix, tol: Tolerances = DEFAULT, provenance=None) -> InequalityReport:
    """``S(ABC) + S(B) <= S(AB) + S(BC)`` on a tripartite state."""
    if len(rho.dims) != 3:
        raise DimensionError("strong subadditivity needs a tripartite state")
    left = entropy(rho) + entropy(rho.ptrace([1]))
    right = entropy(rho.ptrace([0, 1])) + entropy(rho.ptrace([1, 2]))
    return InequalityReport("strong_subadditivity", left, right, tol.inequality, dict(provenance or {}))


def weak_monotonicity(rho: DensityMatrix, tol: Tolerances = DEFAULT, provenance=None) -> InequalityReport:
    """``S(A) + S(B) <= S(AC) + S(BC)`` on a tripartite state."""
    if len(rho.dims) != 3:
        raise DimensionError("weak monotonicity needs a tripartite state")
    left = entropy(rho.ptrace([0])) + entropy(rho.ptrace([1]))
    right = entropy(rho.ptrace([0, 2])) + entropy(rho.ptrace([1, 2]))
    return InequalityReport("weak_monotonicity", left, right, tol.inequality, dict(provenance or {}))


def conditional_entropy_sum(ev: EvolvedScenario) -> float:
    return sum(conditional_entropy(ev.marginal([0, ev.receiver(i)]), [0], [1]) for i in range(ev.n_legs))
