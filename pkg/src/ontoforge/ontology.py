"""In-memory ontology graph: classes, properties, instances, assertions.

The graph is deliberately restricted: every node is a named IRI under one
base namespace, so there are no anonymous individuals and graph equality is
plain component-set equality.
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from ontoforge.errors import OntologyError

LITERAL_KINDS = ("boolean", "string", "anyURI")

XSD_LITERAL_IRIS = {
    "boolean": "http://www.w3.org/2001/XMLSchema#boolean",
    "string": "http://www.w3.org/2001/XMLSchema#string",
    "anyURI": "http://www.w3.org/2001/XMLSchema#anyURI",
}


class IriKind(Enum):
    CLASS = "class"
    PROPERTY = "property"
    INSTANCE = "instance"


def mint_iri(base: str, local: str, kind: IriKind = IriKind.CLASS) -> str:
    """Deterministic IRI under ``base``: spaces become underscores, everything
    unsafe is percent-encoded. Instance-name collisions between distinct
    fingerprints are disambiguated by the caller with an ``_<k>`` suffix.
    """
    stripped = local.strip()
    if not stripped:
        raise OntologyError(f"cannot mint an IRI from blank local name {local!r}")
    token = urllib.parse.quote(stripped.replace(" ", "_"), safe="-._~")
    # Keep the local part a valid Turtle PN_LOCAL: no leading '-'/'.' and no
    # trailing '.'.
    if token[0] in "-.":
        token = f"%{ord(token[0]):02X}{token[1:]}"
    if token.endswith("."):
        token = f"{token[:-1]}%2E"
    return f"{base}#{token}"


def local_name(iri: str) -> str:
    return iri.rsplit("#", 1)[-1]


def decoded_local(iri: str) -> str:
    """Best-effort human name for an IRI: percent-decoded, underscores to spaces."""
    return urllib.parse.unquote(local_name(iri)).replace("_", " ")


@dataclass
class ObjectProperty:
    name: str
    iri: str
    domains: set[str] = field(default_factory=set)
    ranges: set[str] = field(default_factory=set)


@dataclass
class DataProperty:
    name: str
    iri: str
    domains: set[str] = field(default_factory=set)
    literal_kind: str = "string"


@dataclass
class OntologyGraph:
    base_iri: str
    classes: set[str] = field(default_factory=set)
    subclass_axioms: set[tuple[str, str]] = field(default_factory=set)
    object_properties: dict[str, ObjectProperty] = field(default_factory=dict)
    data_properties: dict[str, DataProperty] = field(default_factory=dict)
    instances: dict[str, str] = field(default_factory=dict)
    object_assertions: set[tuple[str, str, str]] = field(default_factory=set)
    data_assertions: set[tuple[str, str, str, str]] = field(default_factory=set)
    # Provenance of applied merges: retired instance IRI -> representative.
    merged_into: dict[str, str] = field(default_factory=dict)
    # Structural-dedup registry (digest -> instance IRI). Derived state:
    # not serialized and not part of graph equality.
    fingerprints: dict[str, str] = field(default_factory=dict, compare=False, repr=False)

    def clone(self) -> "OntologyGraph":
        return replace(
            self,
            classes=set(self.classes),
            subclass_axioms=set(self.subclass_axioms),
            object_properties={
                name: ObjectProperty(p.name, p.iri, set(p.domains), set(p.ranges))
                for name, p in self.object_properties.items()
            },
            data_properties={
                name: DataProperty(p.name, p.iri, set(p.domains), p.literal_kind)
                for name, p in self.data_properties.items()
            },
            instances=dict(self.instances),
            object_assertions=set(self.object_assertions),
            data_assertions=set(self.data_assertions),
            merged_into=dict(self.merged_into),
            fingerprints=dict(self.fingerprints),
        )

    def mint(self, local: str, kind: IriKind) -> str:
        return mint_iri(self.base_iri, local, kind)

    def property_iris(self) -> dict[str, str]:
        iris = {p.iri: p.name for p in self.object_properties.values()}
        iris.update({p.iri: p.name for p in self.data_properties.values()})
        return iris

    def assertion_degree(self, iri: str) -> int:
        """Occurrences of ``iri`` as assertion subject or object."""
        degree = 0
        for s, _, o in self.object_assertions:
            if s == iri:
                degree += 1
            if o == iri:
                degree += 1
        for s, _, _, _ in self.data_assertions:
            if s == iri:
                degree += 1
        return degree

    def display_name(self, iri: str) -> str:
        """The instance's ``name`` data value when unique, else the IRI local."""
        name_prop = self.data_properties.get("name")
        if name_prop is not None:
            values = sorted(
                lex
                for s, p, lex, _ in self.data_assertions
                if s == iri and p == name_prop.iri
            )
            if values:
                return values[0]
        return decoded_local(iri)

    def validate(self) -> list[str]:
        """Invariant check; an empty list means the graph is serializable."""
        problems: list[str] = []
        prefix = self.base_iri + "#"

        def owned(iri: str) -> bool:
            return iri.startswith(prefix) and len(iri) > len(prefix)

        for iri in sorted(self.classes):
            if not owned(iri):
                problems.append(f"class {iri} outside base namespace")
        for sub, sup in sorted(self.subclass_axioms):
            if sub not in self.classes or sup not in self.classes:
                problems.append(f"subclass axiom ({sub}, {sup}) references unknown class")
        for prop in self.object_properties.values():
            if not owned(prop.iri):
                problems.append(f"object property {prop.iri} outside base namespace")
            for c in prop.domains | prop.ranges:
                if c not in self.classes:
                    problems.append(f"property {prop.name} references unknown class {c}")
        for dprop in self.data_properties.values():
            if not owned(dprop.iri):
                problems.append(f"data property {dprop.iri} outside base namespace")
            if dprop.literal_kind not in LITERAL_KINDS:
                problems.append(f"data property {dprop.name} has unknown literal kind")
            for c in dprop.domains:
                if c not in self.classes:
                    problems.append(f"property {dprop.name} references unknown class {c}")
        for iri, cls in self.instances.items():
            if not owned(iri):
                problems.append(f"instance {iri} outside base namespace")
            if cls not in self.classes:
                problems.append(f"instance {iri} has unknown class {cls}")
        object_prop_iris = {p.iri for p in self.object_properties.values()}
        data_prop_iris = {p.iri: p.literal_kind for p in self.data_properties.values()}
        for s, p, o in sorted(self.object_assertions):
            if s not in self.instances:
                problems.append(f"assertion subject {s} is not an instance")
            if p not in object_prop_iris:
                problems.append(f"assertion property {p} is not declared")
            if o not in self.instances:
                problems.append(f"assertion object {o} is not an instance")
        for s, p, lex, kind in sorted(self.data_assertions):
            if s not in self.instances:
                problems.append(f"data assertion subject {s} is not an instance")
            if p not in data_prop_iris:
                problems.append(f"data assertion property {p} is not declared")
            elif data_prop_iris[p] != kind:
                problems.append(
                    f"data assertion {s} {p} {lex!r} kind {kind} does not match declaration"
                )
            if kind not in LITERAL_KINDS:
                problems.append(f"data assertion literal kind {kind} unknown")
        for retired, representative in self.merged_into.items():
            if not owned(retired) or not owned(representative):
                problems.append("merge provenance outside base namespace")
            if retired in self.instances:
                problems.append(f"retired instance {retired} still active")
            if representative not in self.instances and representative not in self.merged_into:
                problems.append(f"merge representative {representative} unknown")
        return problems

    def require_valid(self) -> None:
        problems = self.validate()
        if problems:
            raise OntologyError(
                "ontology invariants violated: " + "; ".join(problems[:5])
                + (f" (+{len(problems) - 5} more)" if len(problems) > 5 else "")
            )


def summary(graph: OntologyGraph) -> dict:
    return {
        "base_iri": graph.base_iri,
        "classes": len(graph.classes),
        "subclass_axioms": len(graph.subclass_axioms),
        "object_properties": len(graph.object_properties),
        "data_properties": len(graph.data_properties),
        "instances": len(graph.instances),
        "object_assertions": len(graph.object_assertions),
        "data_assertions": len(graph.data_assertions),
        "retired_instances": len(graph.merged_into),
    }
