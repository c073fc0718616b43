"""Populate the class ontology with instances from a schema-valid XML document.

The walk is schema-aware: each element's governing type comes from the XSD,
never from the XML alone, so "recipient" under a communication and under a
document both land in the actor class. Structurally identical elements
collapse into one instance: an element whose fingerprint is already
registered becomes a reference to the existing instance and its subtree is
not traversed again.

Validation is performed here (unknown elements, occurrence bounds, choice
arity, boolean lexicals, declared attributes); sibling order inside a
sequence is deliberately not enforced.
"""

from __future__ import annotations

import hashlib
import json
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

from ontoforge.errors import DocumentError
from ontoforge.ontology import IriKind, OntologyGraph, mint_iri
from ontoforge.schema import (
    ChoiceGroup,
    ElementDecl,
    SchemaModel,
    SequenceGroup,
    builtin_kind,
    is_builtin,
    resolve_element_type,
)


@dataclass(frozen=True)
class Fingerprint:
    digest: str


@dataclass
class BuildReport:
    elements_seen: int = 0
    instances_created: int = 0
    duplicates_referenced: int = 0
    name_collisions: list[dict] = field(default_factory=list)
    wall_time: float = 0.0
    per_stage_times: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "elements_seen": self.elements_seen,
            "instances_created": self.instances_created,
            "duplicates_referenced": self.duplicates_referenced,
            "name_collisions": self.name_collisions,
            "wall_time": self.wall_time,
            "per_stage_times": self.per_stage_times,
        }


def _local(tag: str, namespace: str, path: str) -> str:
    if tag.startswith("{"):
        ns, _, local = tag[1:].partition("}")
        if ns != namespace:
            raise DocumentError(f"element namespace {ns!r} does not match schema", path)
        return local
    return tag


def _attr_items(elem: ET.Element) -> list[tuple[str, str]]:
    items = []
    for key, value in elem.attrib.items():
        if key.startswith("{"):
            ns, _, local = key[1:].partition("}")
            if ns == "http://www.w3.org/2000/xmlns/":
                continue
            key = local
        items.append((key, value))
    return sorted(items)


def _canonical_bool(value: str, path: str) -> str:
    v = value.strip()
    if v in ("true", "1"):
        return "true"
    if v in ("false", "0"):
        return "false"
    raise DocumentError(f"invalid boolean literal {value!r}", path)


def _canonical_simple(value: Optional[str], type_name: str, path: str) -> str:
    text = (value or "").strip()
    if type_name == "xs:boolean":
        return _canonical_bool(text, path)
    return text


@dataclass
class _DeclContext:
    decl: ElementDecl
    choice: Optional[ChoiceGroup]  # set when the element is a choice alternative


def _decl_contexts(model: SchemaModel, type_name: str) -> dict[str, _DeclContext]:
    """Element name -> declaration context, most-derived declaration winning."""
    contexts: dict[str, _DeclContext] = {}
    for tdef in reversed(model.extension_chain(type_name)):
        _collect_contexts(tdef.particles, contexts)
    return contexts


def _collect_contexts(particles, contexts: dict[str, _DeclContext]) -> None:
    for particle in particles:
        if isinstance(particle, SequenceGroup):
            _collect_contexts(particle.particles, contexts)
        elif isinstance(particle, ChoiceGroup):
            for alt in particle.alternatives:
                contexts[alt.name] = _DeclContext(decl=alt, choice=particle)
        elif isinstance(particle, ElementDecl):
            contexts[particle.name] = _DeclContext(decl=particle, choice=None)


class _Walker:
    def __init__(self, model: SchemaModel):
        self.model = model
        self.namespace = model.target_namespace
        self._context_cache: dict[str, dict[str, _DeclContext]] = {}

    def contexts(self, type_name: str) -> dict[str, _DeclContext]:
        found = self._context_cache.get(type_name)
        if found is None:
            found = _decl_contexts(self.model, type_name)
            self._context_cache[type_name] = found
        return found

    def local(self, elem: ET.Element, path: str) -> str:
        return _local(elem.tag, self.namespace, path)

    def validate(self, root: ET.Element) -> None:
        root_decl = self.model.root_element
        root_name = self.local(root, "/")
        if root_name != root_decl.name:
            raise DocumentError(
                f"root element <{root_name}> does not match schema root "
                f"<{root_decl.name}>",
                "/",
            )
        self._validate_children(root, root_decl.type_name, f"/{root_name}")

    def _validate_children(self, elem: ET.Element, type_name: str, path: str) -> None:
        contexts = self.contexts(type_name)
        counts: dict[str, int] = {}
        positions: dict[str, int] = {}
        for child in elem:
            child_name = self.local(child, path)
            positions[child_name] = positions.get(child_name, 0) + 1
            child_path = f"{path}/{child_name}[{positions[child_name]}]"
            ctx = contexts.get(child_name)
            if ctx is None:
                declared = ", ".join(sorted(contexts)) or "none"
                raise DocumentError(
                    f"element <{child_name}> is not declared in type "
                    f"{type_name!r} (declared: {declared})",
                    child_path,
                )
            counts[child_name] = counts.get(child_name, 0) + 1
            if is_builtin(ctx.decl.type_name):
                if len(child) > 0:
                    raise DocumentError(
                        f"simple-typed element <{child_name}> has child elements",
                        child_path,
                    )
                _canonical_simple(child.text, ctx.decl.type_name, child_path)
            else:
                if child.text and child.text.strip():
                    raise DocumentError(
                        f"complex-typed element <{child_name}> has text content",
                        child_path,
                    )
                self._validate_attributes(child, ctx.decl.type_name, child_path)
                self._validate_children(child, ctx.decl.type_name, child_path)

        self._check_occurrences(type_name, counts, path)

    def _validate_attributes(self, elem: ET.Element, type_name: str, path: str) -> None:
        declared = {a.name: a for a in self.model.effective_attributes(type_name)}
        present = dict(_attr_items(elem))
        for key, value in present.items():
            attr = declared.get(key)
            if attr is None:
                raise DocumentError(
                    f"attribute {key!r} is not declared for type {type_name!r}", path
                )
            _canonical_simple(value, attr.type_name, path)
        for name, attr in declared.items():
            if attr.required and name not in present:
                raise DocumentError(f"required attribute {name!r} missing", path)

    def _check_occurrences(self, type_name: str, counts: dict[str, int], path: str) -> None:
        consumed: set[str] = set()
        for tdef in reversed(self.model.extension_chain(type_name)):
            for particle in _flatten(tdef.particles):
                if isinstance(particle, ElementDecl):
                    if particle.name in consumed:
                        continue
                    # Shadowed declarations: the most-derived decl governs, so
                    # skip bounds for names redeclared later in the chain.
                    if self._shadowed(type_name, tdef.name, particle.name):
                        continue
                    consumed.add(particle.name)
                    seen = counts.get(particle.name, 0)
                    self._check_bounds(
                        seen, particle.min_occurs, particle.max_occurs,
                        f"element <{particle.name}>", path,
                    )
                else:
                    total = sum(counts.get(alt.name, 0) for alt in particle.alternatives)
                    label = particle.annotation_name or "choice"
                    self._check_bounds(
                        total, particle.min_occurs, particle.max_occurs,
                        f"choice '{label}'", path,
                    )
                    consumed.update(alt.name for alt in particle.alternatives)

    def _shadowed(self, governing: str, declaring: str, element_name: str) -> bool:
        for tdef in self.model.extension_chain(governing):
            if tdef.name == declaring:
                return False
            for particle in _flatten(tdef.particles):
                if isinstance(particle, ElementDecl) and particle.name == element_name:
                    return True
                if isinstance(particle, ChoiceGroup) and any(
                    alt.name == element_name for alt in particle.alternatives
                ):
                    return True
        return False

    def _check_bounds(self, seen: int, lo: int, hi: Optional[int], what: str, path: str) -> None:
        if seen < lo:
            raise DocumentError(f"{what} occurs {seen} times, minimum is {lo}", path)
        if hi is not None and seen > hi:
            raise DocumentError(f"{what} occurs {seen} times, maximum is {hi}", path)


def _flatten(particles):
    for particle in particles:
        if isinstance(particle, SequenceGroup):
            yield from _flatten(particle.particles)
        else:
            yield particle


def _canonical_structure(walker: _Walker, elem: ET.Element, type_name: str, path: str):
    attrs = [
        [k, _canonical_simple(v, _attr_type(walker, type_name, k), path)]
        for k, v in _attr_items(elem)
    ]
    simple: list[list[str]] = []
    nested: list[str] = []
    contexts = walker.contexts(type_name)
    for child in elem:
        child_name = walker.local(child, path)
        ctx = contexts.get(child_name)
        child_path = f"{path}/{child_name}"
        if ctx is None:
            raise DocumentError(
                f"element <{child_name}> is not declared in type {type_name!r}",
                child_path,
            )
        if is_builtin(ctx.decl.type_name):
            simple.append(
                [child_name, _canonical_simple(child.text, ctx.decl.type_name, child_path)]
            )
        else:
            nested.append(
                _canonical_json(walker, child, ctx.decl.type_name, child_path)
            )
    simple.sort()
    nested.sort()
    return [type_name, attrs, simple, nested]


def _attr_type(walker: _Walker, type_name: str, attr_name: str) -> str:
    for attr in walker.model.effective_attributes(type_name):
        if attr.name == attr_name:
            return attr.type_name
    return "xs:string"


def _canonical_json(walker: _Walker, elem: ET.Element, type_name: str, path: str) -> str:
    structure = _canonical_structure(walker, elem, type_name, path)
    return json.dumps(structure, separators=(",", ":"), ensure_ascii=False)


def fingerprint(
    model: SchemaModel, elem: ET.Element, enclosing_type: Optional[str] = None
) -> Fingerprint:
    """Structural fingerprint of an element occurrence.

    Canonical form: resolved type name, sorted attributes, simple children
    sorted by name, complex children's fingerprints sorted -- so authoring
    order never splits semantically identical concepts.
    """
    walker = _Walker(model)
    enclosing = enclosing_type or model.root_element.type_name
    name = walker.local(elem, "/")
    type_name = resolve_element_type(model, name, enclosing)
    canonical = _canonical_json(walker, elem, type_name, f"/{name}")
    return Fingerprint(digest=hashlib.sha256(canonical.encode("utf-8")).hexdigest())


class _Populator:
    def __init__(self, graph: OntologyGraph, walker: _Walker, report: BuildReport):
        self.graph = graph
        self.walker = walker
        self.report = report
        self.type_counters: dict[str, int] = {}
        self.iri_digest: dict[str, str] = {
            iri: digest for digest, iri in graph.fingerprints.items()
        }

    def class_iri(self, type_name: str) -> str:
        return mint_iri(self.graph.base_iri, type_name, IriKind.CLASS)

    def build(self, elem: ET.Element, type_name: str, path: str) -> str:
        """Create or reuse the instance for one complex element occurrence."""
        self.report.elements_seen += 1
        digest = _canonical_json(self.walker, elem, type_name, path)
        digest = hashlib.sha256(digest.encode("utf-8")).hexdigest()
        existing = self.graph.fingerprints.get(digest)
        if existing is not None:
            self.report.duplicates_referenced += 1
            return existing

        iri = self._mint_instance(elem, type_name, digest, path)
        self.graph.fingerprints[digest] = iri
        self.iri_digest[iri] = digest
        self.graph.instances[iri] = self.class_iri(type_name)
        self.report.instances_created += 1

        contexts = self.walker.contexts(type_name)
        for key, value in _attr_items(elem):
            self._assert_simple(iri, key, value, _attr_default(self.walker, type_name, key),
                                _attr_type(self.walker, type_name, key), path)
        for child in elem:
            child_name = self.walker.local(child, path)
            ctx = contexts[child_name]
            child_path = f"{path}/{child_name}"
            if is_builtin(ctx.decl.type_name):
                self._assert_simple(
                    iri, child_name, child.text, ctx.decl.default,
                    ctx.decl.type_name, child_path,
                )
            else:
                child_iri = self.build(child, ctx.decl.type_name, child_path)
                prop_name = (
                    ctx.choice.annotation_name if ctx.choice is not None else child_name
                )
                prop = self.graph.object_properties.get(prop_name)
                if prop is None:
                    raise DocumentError(
                        f"object property {prop_name!r} is not declared in the ontology",
                        child_path,
                    )
                self.graph.object_assertions.add((iri, prop.iri, child_iri))
        return iri

    def _assert_simple(
        self,
        subject: str,
        name: str,
        raw: Optional[str],
        default: Optional[str],
        type_name: str,
        path: str,
    ) -> None:
        value = _canonical_simple(raw, type_name, path)
        if default is not None and value == _canonical_simple(default, type_name, path):
            return  # schema-default values stay implicit
        prop = self.graph.data_properties.get(name)
        if prop is None:
            raise DocumentError(
                f"data property {name!r} is not declared in the ontology", path
            )
        self.graph.data_assertions.add((subject, prop.iri, value, builtin_kind(type_name)))

    def _mint_instance(self, elem: ET.Element, type_name: str, digest: str, path: str) -> str:
        name_value: Optional[str] = None
        contexts = self.walker.contexts(type_name)
        for child in elem:
            child_name = self.walker.local(child, path)
            ctx = contexts[child_name]
            if child_name == "name" and is_builtin(ctx.decl.type_name):
                text = (child.text or "").strip()
                if text:
                    name_value = text
                    break
        if name_value is None:
            ordinal = self.type_counters.get(type_name, 0) + 1
            self.type_counters[type_name] = ordinal
            name_value = f"{type_name}_{ordinal}"

        iri = mint_iri(self.graph.base_iri, name_value, IriKind.INSTANCE)
        if iri in self.iri_digest:
            base = iri
            k = 2
            while f"{base}_{k}" in self.iri_digest:
                k += 1
            iri = f"{base}_{k}"
            self.report.name_collisions.append({"name": name_value, "iri": iri})
        return iri


def populate_instances(
    ontology: OntologyGraph, document: bytes, model: SchemaModel
) -> tuple[OntologyGraph, BuildReport]:
    """Second translation step: instances and assertions from the XML file.

    Returns a new graph; the input ontology is left untouched. Populating the
    same document into the returned graph again creates nothing new.
    """
    report = BuildReport()
    started = time.perf_counter()

    t0 = time.perf_counter()
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise DocumentError(f"ill-formed XML at line {line}, column {column}: {exc.msg}")
    report.per_stage_times["parse"] = time.perf_counter() - t0

    walker = _Walker(model)
    t0 = time.perf_counter()
    walker.validate(root)
    report.per_stage_times["validate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    graph = ontology.clone()
    populator = _Populator(graph, walker, report)
    root_type = model.root_element.type_name
    root_contexts = walker.contexts(root_type)
    root_path = f"/{model.root_element.name}"
    for child in root:
        child_name = walker.local(child, root_path)
        ctx = root_contexts[child_name]
        populator.build(child, ctx.decl.type_name, f"{root_path}/{child_name}")
    report.per_stage_times["populate"] = time.perf_counter() - t0
    report.wall_time = time.perf_counter() - started
    return graph, report


def _attr_default(walker: _Walker, type_name: str, attr_name: str) -> Optional[str]:
    for attr in walker.model.effective_attributes(type_name):
        if attr.name == attr_name:
            return attr.default
    return None
