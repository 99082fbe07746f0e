"""Scenario files.

A scenario is one YAML (or JSON) document::

    initial: <state literal>          # pure; a density literal is purified
    legs:
      - {name: B, channel: <channel literal>}
    ensembles: [<ensemble entry>, ...] # optional, one per leg

An ensemble entry is ``null``/``eigen`` (spectral decomposition of the sent
marginal), ``{random: <count>, seed: <int>}`` (random pure decomposition)
or ``{members: [{p: <weight>, state: <state literal>}, ...]}``.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .channels import parse_channel
from .errors import DimensionError, ParseError, ValidationError
from .privacy import Leg, Scenario
from .states import DensityMatrix, Ensemble, PureState, parse_state, pure_decomposition, purify


def _ensemble(spec, sent: DensityMatrix, where: str):
    if spec is None or spec == "eigen":
        return None
    if not isinstance(spec, dict):
        raise ParseError(f"{where}: expected null, 'eigen' or a mapping")
    if "random" in spec:
        count, seed = spec["random"], spec.get("seed", 0)
        if not isinstance(count, int) or not isinstance(seed, int):
            raise ParseError(f"{where}: random/seed must be integers")
        flat = DensityMatrix(sent.matrix, (sent.dim,))
        try:
            e = pure_decomposition(flat, count, seed)
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        return Ensemble(tuple((p, DensityMatrix(s.matrix, sent.dims)) for p, s in e.members))
    members = spec.get("members")
    if not isinstance(members, list) or not members:
        raise ParseError(f"{where}.members: expected a non-empty list")
    weights, states = [], []
    for k, m in enumerate(members):
        if not isinstance(m, dict) or "p" not in m or "state" not in m:
            raise ParseError(f"{where}.members[{k}]: expected {{p, state}}")
        st = parse_state(m["state"], f"{where}.members[{k}].state")
        if isinstance(st, PureState):
            st = st.density()
        weights.append(m["p"])
        states.append(st)
    try:
        return Ensemble.from_weights(weights, states)
    except (ValidationError, DimensionError, TypeError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def parse_scenario(doc, provenance: dict | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario: expected a mapping at top level")
    unknown = set(doc) - {"initial", "legs", "ensembles"}
    if unknown:
        raise ParseError(f"scenario: unknown field(s) {sorted(unknown)}")
    if "initial" not in doc:
        raise ParseError("scenario.initial: missing")
    initial = parse_state(doc["initial"], "initial")
    if isinstance(initial, DensityMatrix):
        initial = purify(initial)
    legs_doc = doc.get("legs")
    if not isinstance(legs_doc, list) or not legs_doc:
        raise ParseError("scenario.legs: expected a non-empty list")
    legs = []
    for i, leg in enumerate(legs_doc):
        if not isinstance(leg, dict) or "channel" not in leg:
            raise ParseError(f"legs[{i}]: expected {{name, channel}}")
        name = str(leg.get("name", f"B{i + 1}"))
        legs.append(Leg(name, parse_channel(leg["channel"], f"legs[{i}].channel")))
    sent = initial.reduced(range(1, len(initial.dims))) if len(initial.dims) > 1 else None
    ens_doc = doc.get("ensembles")
    ensembles = ()
    if ens_doc is not None:
        if not isinstance(ens_doc, list) or len(ens_doc) != len(legs):
            raise ParseError("scenario.ensembles: expected one entry per leg")
        if sent is None:
            raise ParseError("scenario.initial: needs at least two subsystems")
        ensembles = tuple(_ensemble(e, sent, f"ensembles[{i}]") for i, e in enumerate(ens_doc))
    try:
        return Scenario(initial, tuple(legs), ensembles, dict(provenance or {}))
    except (ValidationError, DimensionError) as exc:
        raise ParseError(f"scenario: {exc}") from exc


def load_scenario(path, provenance: dict | None = None) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ParseError(f"{path}: not valid YAML{where}: {exc}") from exc
    return parse_scenario(doc, provenance)
