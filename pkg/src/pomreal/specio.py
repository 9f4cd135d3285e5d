"""JSON specification documents.

A document looks like::

    {
      "participants": ["A", "B"],
      "messages": ["x"],
      "pomsets": {
        "r": {"events": [{"id": "a1", "from": "A", "to": "B", "dir": "!", "msg": "x"},
                         {"id": "b1", "from": "A", "to": "B", "dir": "?", "msg": "x"}],
              "order": [["a1", "b1"]]}
      },
      "references": {...},          # optional named pomsets outside the family
      "profiles": {"default": {...}} # optional check profiles
    }

``participants`` and ``messages`` may be omitted, in which case they are
inferred from the events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import (CycleError, DanglingEdge, DuplicateId, IntegrityError, LabelError,
                     ParseError, ValidationError)
from .pomset import CommLabel, Direction, Pomset, PomsetFamily, validate_pomset

PROFILE_KEYS = {
    "well_formed": bool, "msc": bool, "ccp2": bool, "ccp3": bool,
    "terminating": list, "oracle_cc2": bool, "oracle_cc3": bool,
    "oracle_terminating": list, "synthesize": bool, "deadlocks": bool,
    "system_terminating": list, "bound": int,
}


@dataclass(frozen=True)
class SpecDocument:
    family: PomsetFamily
    references: Mapping[str, Pomset] = field(default_factory=dict)
    profiles: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    description: str = ""
    path: Path | None = None

    @property
    def participants(self) -> tuple[str, ...]:
        return self.family.participants

    @property
    def messages(self) -> tuple[str, ...]:
        return self.family.messages

    def pomset(self, name: str) -> Pomset:
        if name in self.family.names:
            return self.family[name]
        if name in self.references:
            return self.references[name]
        raise KeyError(name)


def _label_of(raw: Mapping, where: str) -> CommLabel:
    try:
        sender, receiver, direction, msg = raw["from"], raw["to"], raw["dir"], raw["msg"]
    except KeyError as exc:
        raise IntegrityError(f"{where}: event lacks field {exc.args[0]!r}", reference=where) from None
    try:
        return CommLabel(str(sender), str(receiver), Direction(direction), str(msg))
    except ValueError as exc:
        raise IntegrityError(f"{where}: {exc}", reference=where) from None


def _pomset_of(name: str, raw: Any) -> Pomset:
    if not isinstance(raw, Mapping):
        raise IntegrityError(f"pomset {name!r} must be an object", reference=name)
    events = raw.get("events", [])
    order = raw.get("order", [])
    if not isinstance(events, list) or not isinstance(order, list):
        raise IntegrityError(f"pomset {name!r}: 'events' and 'order' must be lists", reference=name)
    pairs = []
    for k, e in enumerate(events):
        if not isinstance(e, Mapping) or "id" not in e:
            raise IntegrityError(f"pomset {name!r}: event #{k} needs an 'id'", reference=name)
        pairs.append((str(e["id"]), _label_of(e, f"{name}.{e['id']}")))
    edges = []
    for pair in order:
        if not isinstance(pair, list) or len(pair) != 2:
            raise IntegrityError(f"pomset {name!r}: order entries must be [before, after] pairs", reference=name)
        edges.append((str(pair[0]), str(pair[1])))
    try:
        return validate_pomset(pairs, edges)
    except DanglingEdge as exc:
        raise IntegrityError(f"pomset {name!r}: {exc}", reference=f"{name}.{exc.missing}") from exc
    except DuplicateId as exc:
        raise IntegrityError(f"pomset {name!r}: {exc}", reference=f"{name}.{exc.event_id}") from exc
    except CycleError as exc:
        raise IntegrityError(f"pomset {name!r}: {exc}", reference=name) from exc


def _named_pomsets(doc: Mapping, key: str) -> dict[str, Pomset]:
    raw = doc.get(key, {})
    if not isinstance(raw, Mapping):
        raise IntegrityError(f"'{key}' must map names to pomsets", reference=key)
    return {str(name): _pomset_of(str(name), body) for name, body in raw.items()}


def _profiles(doc: Mapping) -> dict[str, dict]:
    raw = doc.get("profiles", {})
    if not isinstance(raw, Mapping):
        raise IntegrityError("'profiles' must be an object", reference="profiles")
    out = {}
    for name, body in raw.items():
        if not isinstance(body, Mapping):
            raise IntegrityError(f"profile {name!r} must be an object", reference=f"profiles.{name}")
        for k, v in body.items():
            expected = PROFILE_KEYS.get(k)
            if expected is None:
                raise IntegrityError(f"profile {name!r}: unknown key {k!r}", reference=f"profiles.{name}.{k}")
            if not isinstance(v, expected) or (expected is int and isinstance(v, bool)):
                raise IntegrityError(f"profile {name!r}: {k!r} must be {expected.__name__}",
                                     reference=f"profiles.{name}.{k}")
        out[str(name)] = dict(body)
    return out


def document_from_dict(doc: Any, path: Path | None = None) -> SpecDocument:
    if not isinstance(doc, Mapping):
        raise IntegrityError("top level must be an object")
    family_members = _named_pomsets(doc, "pomsets")
    references = _named_pomsets(doc, "references")
    participants = doc.get("participants")
    messages = doc.get("messages")
    try:
        family = PomsetFamily.of(family_members, participants=participants, messages=messages)
        if references:
            PomsetFamily.of(references, participants=family.participants, messages=family.messages)
    except (LabelError, ValidationError) as exc:
        raise IntegrityError(str(exc)) from exc
    return SpecDocument(family, references, _profiles(doc), str(doc.get("description", "")), path)


def loads(text: str, path: Path | None = None) -> SpecDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, path) from None
    return document_from_dict(raw, path)


def parse_spec(path) -> SpecDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text ({exc.reason})", path=path) from None
    return loads(text, path)


def pomset_to_dict(r: Pomset) -> dict:
    return {
        "events": [
            {"id": i, "from": l.sender, "to": l.receiver, "dir": l.direction.value, "msg": l.message}
            for i, l in zip(r.ids, r.labels)
        ],
        "order": [list(p) for p in sorted(r.hasse_pairs())],
    }


def document_to_dict(doc: SpecDocument) -> dict:
    out: dict = {}
    if doc.description:
        out["description"] = doc.description
    out["participants"] = list(doc.participants)
    out["messages"] = list(doc.messages)
    out["pomsets"] = {name: pomset_to_dict(r) for name, r in doc.family.members}
    if doc.references:
        out["references"] = {name: pomset_to_dict(r) for name, r in doc.references.items()}
    if doc.profiles:
        out["profiles"] = {name: dict(p) for name, p in doc.profiles.items()}
    return out


def dumps(doc: SpecDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2) + "\n"


def serialize_spec(doc: SpecDocument, path) -> Path:
    path = Path(path)
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def fixture_names() -> list[str]:
    root = resources.files("pomreal") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> SpecDocument:
    res = resources.files("pomreal") / "fixtures" / f"{name}.json"
    if not res.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return loads(res.read_text(encoding="utf-8"), Path(f"<fixture {name}>"))
