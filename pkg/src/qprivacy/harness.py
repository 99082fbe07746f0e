"""Batch computations and Monte Carlo verification sweeps.

Three commands share one :class:`RunConfig`:

* ``compute`` -- evaluate a scenario file (privacy per leg, trade-offs and
  every monogamy check that applies to its shape);
* ``verify`` -- draw ``trials`` random scenarios and run every check family;
* ``sweep`` -- vary one scalar channel parameter on a leg.

Reports are deterministic functions of the config; only the ``created``
timestamp in the metadata differs between identical runs.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .channels import SWEEP_PARAMETER, named_channel, random_channel
from .config import DEFAULT, Tolerances
from .errors import ConfigError
from .privacy import (
    EvolvedScenario,
    InequalityReport,
    Leg,
    Scenario,
    evolve,
    leg_privacy,
    multiparty_check,
    squared_monogamy_check,
    strong_subadditivity,
    theorem1_check,
    theorem2_check,
    theorem3_check,
    tradeoff_checks,
    weak_monotonicity,
)
from .scenario_io import load_scenario
from .states import make_rng, named_state, random_pure, trial_seed

log = logging.getLogger(__name__)

CHECK_FAMILIES = (
    "ssa",
    "weak_monotonicity",
    "tradeoffs",
    "theorem1",
    "multiparty",
    "theorem2",
    "theorem3",
    "squared",
)
FORMATS = ("text", "records", "table")
SIG_DIGITS = 12


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: str | None = None
    trials: int = 100
    seed: int = 0
    dims: tuple[int, ...] = (2, 2, 2)
    env_dim: int = 2
    tolerances: Tolerances = DEFAULT
    out: str | None = None
    fmt: str = "text"
    checks: tuple[str, ...] | None = None
    channel: str | None = None
    range: str | None = None
    leg: int = 0

    def __post_init__(self):
        if self.command not in ("compute", "verify", "sweep"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if len(self.dims) < 2 or any(d < 1 for d in self.dims):
            raise ConfigError(f"dims must list the sender plus at least one receiver, got {self.dims}")
        if self.env_dim < 1:
            raise ConfigError("env-dim must be >= 1")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.checks is not None:
            bad = set(self.checks) - set(CHECK_FAMILIES)
            if bad:
                raise ConfigError(f"unknown check families {sorted(bad)}; choose from {CHECK_FAMILIES}")
        if self.command == "compute" and not self.scenario:
            raise ConfigError("compute needs --scenario")
        if self.command == "sweep":
            if not self.channel or not self.range:
                raise ConfigError("sweep needs --channel and --range")
            key = self.channel.lower().replace("_", "-")
            if key not in SWEEP_PARAMETER:
                raise ConfigError(f"channel {self.channel!r} has no scalar parameter to sweep")

    def enabled(self, family: str) -> bool:
        return self.checks is None or family in self.checks

    def fingerprint(self) -> dict:
        d = {
            "command": self.command,
            "trials": self.trials,
            "seed": self.seed,
            "dims": list(self.dims),
            "env_dim": self.env_dim,
            "tolerances": self.tolerances.as_dict(),
            "checks": list(self.checks) if self.checks else None,
            "channel": self.channel,
            "range": self.range,
            "leg": self.leg,
        }
        if self.scenario:
            d["scenario"] = str(self.scenario)
            try:
                d["scenario_sha256"] = hashlib.sha256(Path(self.scenario).read_bytes()).hexdigest()
            except OSError:
                pass
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.fingerprint(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def num(x):
    """Round to 12 significant digits (and drop negative zero)."""
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return float(x)
        v = float(f"{float(x):.{SIG_DIGITS}g}")
        return v + 0.0
    if isinstance(x, dict):
        return {k: num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [num(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class ReportFile:
    metadata: dict
    records: list[dict] = field(default_factory=list)
    privacy: list[dict] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    skipped: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.records if r["verdict"] != "pass")

    def summary(self) -> dict:
        min_slack: dict[str, float] = {}
        counts: dict[str, int] = {}
        for r in self.records:
            c = r["check"]
            counts[c] = counts.get(c, 0) + 1
            min_slack[c] = min(min_slack.get(c, math.inf), r["slack"])
        return {
            "checks_run": len(self.records),
            "failures": self.failures,
            "per_check": {c: {"count": counts[c], "min_slack": num(min_slack[c])} for c in sorted(counts)},
            "skipped": dict(sorted(self.skipped.items())),
        }

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    # -- rendering ---------------------------------------------------------

    def body_lines(self) -> list[str]:
        """Records format without the metadata line (the timestamp lives there)."""
        out = [json.dumps({"type": "privacy", **p}, sort_keys=True) for p in self.privacy]
        out += [json.dumps({"type": "row", **r}, sort_keys=True) for r in self.rows]
        out += [json.dumps({"type": "check", **r}, sort_keys=True) for r in self.records]
        out.append(json.dumps({"type": "summary", **self.summary()}, sort_keys=True))
        return out

    def render(self, fmt: str) -> str:
        if fmt == "records":
            meta = json.dumps({"type": "meta", **self.metadata}, sort_keys=True)
            return "\n".join([meta] + self.body_lines()) + "\n"
        if fmt == "table":
            return self._table()
        return self._text()

    def _table(self) -> str:
        buf = io.StringIO()
        if self.rows:
            cols = list(self.rows[0])
            w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(v) for k, v in r.items()})
            return buf.getvalue()
        cols = ["trial", "check", "left", "right", "slack", "tolerance", "verdict", "seed"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in self.records:
            row = {k: _fmt(r.get(k)) for k in cols}
            row["trial"] = r.get("provenance", {}).get("trial", "")
            w.writerow(row)
        return buf.getvalue()

    def _text(self) -> str:
        m = self.metadata
        lines = [
            f"qprivacy {m['version']} :: {m['command']}  seed={m['seed']}  config={m['config_hash']}",
        ]
        for p in self.privacy:
            lines.append(
                f"  leg {p['leg']}: I_c={_fmt(p['ic'])}  chi_receiver={_fmt(p['chi_receiver'])}  "
                f"chi_eve={_fmt(p['chi_eve'])}  P_min={_fmt(p['p_min'])}  (Holevo proxies)"
            )
        if self.rows:
            cols = list(self.rows[0])
            lines.append("  " + "  ".join(f"{c:>14}" for c in cols))
            for r in self.rows:
                lines.append("  " + "  ".join(f"{_fmt(r[c]):>14}" for c in cols))
        s = self.summary()
        lines.append(f"  checks run: {s['checks_run']}   failures: {s['failures']}")
        for c, info in s["per_check"].items():
            lines.append(f"    {c:<40} n={info['count']:<6} min slack={_fmt(info['min_slack'])}")
        for c, why in s["skipped"].items():
            lines.append(f"    {c:<40} skipped: {why}")
        for r in self.records:
            if r["verdict"] != "pass":
                lines.append(f"  FAIL {r['check']}: left={_fmt(r['left'])} right={_fmt(r['right'])} "
                             f"slack={_fmt(r['slack'])} seed={r['seed']}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return "" if v is None else str(v)


def _meta(config: RunConfig) -> dict:
    return {
        "version": __version__,
        "command": config.command,
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _add(report: ReportFile, reports: list[InequalityReport], **prov):
    for r in reports:
        d = r.as_dict()
        d["provenance"].update(prov)
        if d["seed"] is None and "seed" in prov:
            d["seed"] = prov["seed"]
        report.records.append(num(d))


def _scenario_checks(report: ReportFile, ev: EvolvedScenario, config: RunConfig, **prov):
    """Every applicable check family on one evolved scenario."""
    tol = config.tolerances
    records = [leg_privacy(ev, i, tol=tol) for i in range(ev.n_legs)]
    n = ev.n_legs
    dims = ev.state.dims

    def run(family: str, fn: Callable[[], list[InequalityReport]], applicable: bool, why: str):
        if not config.enabled(family):
            return
        if not applicable:
            report.skipped.setdefault(family, why)
            return
        _add(report, fn(), **prov)

    if n >= 2:
        tri = ev.marginal([0, ev.receiver(0), ev.receiver(1)])
    else:
        tri = ev.marginal([0, ev.receiver(0), ev.environment(0)])
    run("ssa", lambda: [strong_subadditivity(tri, tol)], True, "")
    run("weak_monotonicity", lambda: [weak_monotonicity(tri, tol)], True, "")
    run("tradeoffs",
        lambda: [r for i in range(n) for r in tradeoff_checks(ev, i, tol=tol, record=records[i])],
        True, "")
    run("theorem1", lambda: theorem1_check(ev, tol=tol, records=records), n == 2, "needs exactly two receivers")
    run("multiparty", lambda: multiparty_check(ev, tol=tol, records=records), n >= 2,
        "needs at least two receivers")
    run("theorem2", lambda: theorem2_check(ev, tol=tol, records=records), n == 2, "needs exactly two receivers")
    qubit_t3 = n == 2 and dims[0] == 2 and dims[ev.receiver(0)] == 2 and dims[ev.receiver(1)] == 2
    run("theorem3", lambda: theorem3_check(ev, tol=tol, record_c=records[1]), qubit_t3,
        "needs qubit R, B' and C'")
    all_qubits = all(d == 2 for d in ev.scenario.initial.dims) and all(
        dims[ev.receiver(i)] == 2 for i in range(n))
    run("squared",
        lambda: [squared_monogamy_check(ev.scenario.initial, [l.channel for l in ev.scenario.legs],
                                        ensembles=list(ev.scenario.ensembles), tol=tol, provenance=ev.scenario.provenance)],
        all_qubits, "needs qubits throughout")
    return records


def cmd_compute(config: RunConfig) -> ReportFile:
    scenario = load_scenario(config.scenario, provenance={"scenario": str(config.scenario)})
    ev = evolve(scenario)
    report = ReportFile(_meta(config))
    records = _scenario_checks(report, ev, config)
    report.privacy = [num(r.as_dict()) for r in records]
    return report


def random_scenario(dims, env_dim: int, seed: int) -> Scenario:
    """Random pure state on ``dims`` with one random channel per receiver."""
    rng = make_rng(seed)
    state = random_pure(dims, rng)
    legs = []
    env_dims = []
    for i, d in enumerate(dims[1:]):
        k = int(rng.integers(1, env_dim + 1))
        env_dims.append(k)
        legs.append(Leg(f"B{i + 1}", random_channel(d, k, rng)))
    return Scenario(state, tuple(legs), provenance={"seed": seed, "env_dims": env_dims})


def cmd_verify(config: RunConfig, progress: Callable[[int], None] | None = None) -> ReportFile:
    report = ReportFile(_meta(config))
    # trials run in index order; each owns its generator, so results are order-independent
    for t in range(config.trials):
        seed = trial_seed(config.seed, t)
        ev = evolve(random_scenario(config.dims, config.env_dim, seed))
        _scenario_checks(report, ev, config, trial=t, seed=seed)
        if progress:
            progress(t)
    return report


def parse_range(spec: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"range must be start:stop:step, got {spec!r}") from exc
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)):
        raise ConfigError("range values must be finite")
    if step <= 0 or stop < start:
        raise ConfigError(f"empty range {spec!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, SIG_DIGITS) for k in range(count)]


def cmd_sweep(config: RunConfig) -> ReportFile:
    name = config.channel.lower().replace("_", "-")
    param = SWEEP_PARAMETER[name]
    values = parse_range(config.range)
    if config.scenario:
        base = load_scenario(config.scenario)
    else:
        base = Scenario(named_state("bell", (2, 2)), (Leg("B", named_channel("identity")),))
    if not 0 <= config.leg < len(base.legs):
        raise ConfigError(f"leg {config.leg} out of range")
    report = ReportFile(_meta(config))
    tol = config.tolerances
    for v in values:
        try:
            ch = named_channel(name, **{param: v})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        legs = list(base.legs)
        legs[config.leg] = Leg(legs[config.leg].name, ch)
        scenario = Scenario(base.initial, tuple(legs), base.ensembles)
        ev = evolve(scenario)
        rec = leg_privacy(ev, config.leg, tol=tol)
        report.rows.append(num({
            param: v,
            "ic": rec.ic,
            "chi_receiver": rec.chi_receiver,
            "chi_eve": rec.chi_eve,
            "p_min": rec.p_min,
            "disturbance": rec.input_entropy - rec.ic,
        }))
        if config.enabled("tradeoffs"):
            _add(report, tradeoff_checks(ev, config.leg, tol=tol, record=rec), **{param: v})
    return report


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep}


def run(config: RunConfig) -> ReportFile:
    return COMMANDS[config.command](config)


def write_report(report: ReportFile, config: RunConfig) -> str:
    text = report.render(config.fmt)
    if config.out:
        target = Path(config.out)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return text
