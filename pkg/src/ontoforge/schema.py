"""Constrained XSD subset: parsing, authoring rules, element type resolution.

The supported subset is exactly what the requirement schemas use: named
complex types, single inheritance via complexContent/extension, sequences,
annotated choices, element declarations with builtin simple types
(boolean / string / anyURI), simple-typed attributes, minOccurs/maxOccurs
and defaults. Anything else is rejected loudly rather than half-translated.
"""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from ontoforge.errors import SchemaError

XSD_NS = "http://www.w3.org/2001/XMLSchema"

_BUILTIN_LOCAL = {"boolean": "xs:boolean", "string": "xs:string", "anyURI": "xs:anyURI"}

_SUPPORTED_SCHEMA_CHILDREN = {"element", "complexType", "annotation"}
_SUPPORTED_PARTICLES = {"element", "choice", "sequence", "annotation"}


def is_builtin(type_name: str) -> bool:
    return type_name.startswith("xs:")


def builtin_kind(type_name: str) -> str:
    """'boolean' | 'string' | 'anyURI' for a builtin type name."""
    return type_name[3:]


class RuleKind(Enum):
    NAMELESS_TYPE = "NamelessType"
    UNNAMED_CHOICE = "UnnamedChoice"
    ROOT_NOT_LIST = "RootNotList"


@dataclass(frozen=True)
class RuleViolation:
    rule: RuleKind
    location: str
    message: str

    def describe(self) -> str:
        return f"{self.rule.value} at {self.location}: {self.message}"

    def to_dict(self) -> dict:
        return {"rule": self.rule.value, "location": self.location, "message": self.message}


@dataclass
class ElementDecl:
    name: str
    type_name: str
    min_occurs: int = 1
    max_occurs: Optional[int] = 1  # None = unbounded
    default: Optional[str] = None


@dataclass
class ChoiceGroup:
    annotation_name: Optional[str]
    alternatives: list[ElementDecl]
    min_occurs: int = 1
    max_occurs: Optional[int] = 1


@dataclass
class SequenceGroup:
    particles: list["Particle"]


Particle = Union[ElementDecl, ChoiceGroup, SequenceGroup]


@dataclass
class AttributeDecl:
    name: str
    type_name: str  # builtin simple only
    default: Optional[str] = None
    required: bool = False


class TypeKind(Enum):
    COMPLEX = "complex"
    BUILTIN_SIMPLE = "builtin-simple"


@dataclass
class TypeDef:
    name: str
    base: Optional[str]
    particles: list[Particle] = field(default_factory=list)
    attributes: list[AttributeDecl] = field(default_factory=list)
    kind: TypeKind = TypeKind.COMPLEX

    @property
    def boolean_flags(self) -> list[tuple[str, Optional[bool]]]:
        """(name, declared default) of this type's own boolean elements."""
        flags = []
        for decl in iter_element_decls(self.particles):
            if decl.type_name == "xs:boolean":
                default = None
                if decl.default is not None:
                    default = decl.default in ("true", "1")
                flags.append((decl.name, default))
        return flags


def iter_element_decls(particles: list[Particle], include_choices: bool = True):
    """Element declarations in document order, descending into groups."""
    for particle in particles:
        if isinstance(particle, ElementDecl):
            yield particle
        elif isinstance(particle, SequenceGroup):
            yield from iter_element_decls(particle.particles, include_choices)
        elif isinstance(particle, ChoiceGroup) and include_choices:
            yield from particle.alternatives


def iter_choices(particles: list[Particle]):
    for particle in particles:
        if isinstance(particle, ChoiceGroup):
            yield particle
        elif isinstance(particle, SequenceGroup):
            yield from iter_choices(particle.particles)


@dataclass
class SchemaModel:
    target_namespace: str
    root_element: ElementDecl
    types: dict[str, TypeDef] = field(default_factory=dict)
    anonymous_type_locations: list[str] = field(default_factory=list)
    unnamed_choice_locations: list[str] = field(default_factory=list)

    def extension_chain(self, type_name: str) -> list[TypeDef]:
        """Most-derived first, root base last."""
        chain = []
        current: Optional[str] = type_name
        while current is not None:
            tdef = self.types.get(current)
            if tdef is None:
                raise SchemaError(f"unknown complex type {current!r}")
            chain.append(tdef)
            current = tdef.base
        return chain

    def effective_particles(self, type_name: str) -> list[Particle]:
        """Content model in instance order: base particles first."""
        particles: list[Particle] = []
        for tdef in reversed(self.extension_chain(type_name)):
            particles.extend(tdef.particles)
        return particles

    def effective_attributes(self, type_name: str) -> list[AttributeDecl]:
        attrs: list[AttributeDecl] = []
        for tdef in reversed(self.extension_chain(type_name)):
            attrs.extend(tdef.attributes)
        return attrs


def _tag(elem: ET.Element) -> str:
    if elem.tag.startswith("{"):
        ns, _, local = elem.tag[1:].partition("}")
        if ns != XSD_NS:
            raise SchemaError(f"unexpected namespace {ns!r} for element <{local}>")
        return local
    return elem.tag


def _parse_prefixes(document: bytes) -> dict[str, str]:
    prefixes: dict[str, str] = {}
    for event, payload in ET.iterparse(io.BytesIO(document), events=("start-ns",)):
        prefix, uri = payload
        prefixes[prefix] = uri
    return prefixes


class _Parser:
    def __init__(self, document: bytes):
        self.document = document
        self.anonymous: list[str] = []
        self.unnamed_choices: list[str] = []
        self.target_namespace = ""
        self.prefixes: dict[str, str] = {}

    def parse(self) -> SchemaModel:
        try:
            root = ET.fromstring(self.document)
        except ET.ParseError as exc:
            line, column = exc.position
            raise SchemaError(f"ill-formed XML at line {line}, column {column}: {exc.msg}")
        self.prefixes = _parse_prefixes(self.document)
        if _tag(root) != "schema":
            raise SchemaError(f"expected xs:schema root, found <{_tag(root)}>")
        self.target_namespace = root.get("targetNamespace", "")

        types: dict[str, TypeDef] = {}
        root_elements: list[ElementDecl] = []
        for child in root:
            local = _tag(child)
            if local not in _SUPPORTED_SCHEMA_CHILDREN:
                raise SchemaError(f"unsupported XSD construct <xs:{local}> at schema level")
            if local == "annotation":
                continue
            if local == "element":
                root_elements.append(self._parse_element(child, "schema"))
            else:
                tdef = self._parse_complex_type(child, "schema")
                if tdef is not None:
                    if tdef.name in types:
                        raise SchemaError(f"duplicate complex type name {tdef.name!r}")
                    types[tdef.name] = tdef

        if len(root_elements) != 1:
            raise SchemaError(
                f"expected exactly one top-level element, found {len(root_elements)}"
            )
        root_element = root_elements[0]

        model = SchemaModel(
            target_namespace=self.target_namespace,
            root_element=root_element,
            types=types,
            anonymous_type_locations=self.anonymous,
            unnamed_choice_locations=self.unnamed_choices,
        )
        self._check_bases(model)
        if not model.anonymous_type_locations:
            if not is_builtin(root_element.type_name) and root_element.type_name not in types:
                raise SchemaError(
                    f"root element type {root_element.type_name!r} is not defined"
                )
        return model

    def _check_bases(self, model: SchemaModel) -> None:
        for tdef in model.types.values():
            if tdef.base is not None and tdef.base not in model.types:
                raise SchemaError(
                    f"extension base {tdef.base!r} of type {tdef.name!r} is not defined"
                )
        # Cycle check over the extension graph.
        for name in model.types:
            seen = set()
            current: Optional[str] = name
            while current is not None:
                if current in seen:
                    raise SchemaError(f"extension cycle involving type {current!r}")
                seen.add(current)
                current = model.types[current].base

    def _resolve_type_ref(self, ref: str, location: str) -> str:
        prefix, sep, local = ref.partition(":")
        if not sep:
            prefix, local = "", ref
        uri = self.prefixes.get(prefix)
        if uri == XSD_NS:
            canonical = _BUILTIN_LOCAL.get(local)
            if canonical is None:
                raise SchemaError(
                    f"unsupported builtin type xs:{local} at {location} "
                    "(supported: boolean, string, anyURI)"
                )
            return canonical
        if uri is None and prefix:
            raise SchemaError(f"undeclared namespace prefix {prefix!r} at {location}")
        if uri not in (None, "", self.target_namespace):
            raise SchemaError(
                f"type reference {ref!r} at {location} targets foreign namespace {uri!r}"
            )
        return local

    def _parse_element(self, elem: ET.Element, location: str) -> ElementDecl:
        name = elem.get("name")
        if name is None:
            raise SchemaError(f"element without name at {location} (element references unsupported)")
        here = f"{location} > element '{name}'"
        type_ref = elem.get("type")
        inline = [c for c in elem if _tag(c) == "complexType"]
        if type_ref is None:
            # In-situ type definition: tolerated by the parser so the rule
            # checker can report it, but never registered as a named type.
            self.anonymous.append(here)
            type_name = f"<anonymous:{name}>"
            for child in inline:
                self._parse_complex_type(child, here)
        else:
            if inline:
                raise SchemaError(f"element with both type= and inline type at {here}")
            type_name = self._resolve_type_ref(type_ref, here)
        return ElementDecl(
            name=name,
            type_name=type_name,
            min_occurs=self._occurs(elem.get("minOccurs"), 1, here),
            max_occurs=self._max_occurs(elem.get("maxOccurs"), here),
            default=elem.get("default"),
        )

    def _occurs(self, raw: Optional[str], default: int, location: str) -> int:
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise SchemaError(f"invalid occurs value {raw!r} at {location}")
        if value < 0:
            raise SchemaError(f"negative occurs value {raw!r} at {location}")
        return value

    def _max_occurs(self, raw: Optional[str], location: str) -> Optional[int]:
        if raw == "unbounded":
            return None
        return self._occurs(raw, 1, location)

    def _parse_complex_type(self, elem: ET.Element, location: str) -> Optional[TypeDef]:
        name = elem.get("name")
        if name is None:
            here = f"{location} > complexType"
            if location == "schema":
                self.anonymous.append(here)
        else:
            here = f"complexType '{name}'"

        base: Optional[str] = None
        body = elem
        children = [c for c in elem if _tag(c) != "annotation"]
        if len(children) == 1 and _tag(children[0]) == "complexContent":
            content = children[0]
            inner = [c for c in content if _tag(c) != "annotation"]
            if len(inner) != 1 or _tag(inner[0]) != "extension":
                raise SchemaError(
                    f"complexContent must hold a single xs:extension at {here}"
                )
            extension = inner[0]
            base_ref = extension.get("base")
            if base_ref is None:
                raise SchemaError(f"extension without base at {here}")
            base = self._resolve_type_ref(base_ref, here)
            if is_builtin(base):
                raise SchemaError(f"extension of builtin type {base!r} at {here}")
            body = extension

        particles: list[Particle] = []
        attributes: list[AttributeDecl] = []
        for child in body:
            local = _tag(child)
            if local == "annotation":
                continue
            if local == "sequence":
                particles.extend(self._parse_sequence(child, here).particles)
            elif local == "choice":
                particles.append(self._parse_choice(child, here))
            elif local == "attribute":
                attributes.append(self._parse_attribute(child, here))
            elif local == "complexContent":
                raise SchemaError(f"complexContent mixed with other content at {here}")
            else:
                raise SchemaError(f"unsupported XSD construct <xs:{local}> at {here}")

        if name is None:
            return None
        return TypeDef(name=name, base=base, particles=particles, attributes=attributes)

    def _parse_sequence(self, elem: ET.Element, location: str) -> SequenceGroup:
        here = f"{location} > sequence"
        particles: list[Particle] = []
        for child in elem:
            local = _tag(child)
            if local not in _SUPPORTED_PARTICLES:
                raise SchemaError(f"unsupported XSD construct <xs:{local}> at {here}")
            if local == "annotation":
                continue
            if local == "element":
                particles.append(self._parse_element(child, here))
            elif local == "choice":
                particles.append(self._parse_choice(child, here))
            else:
                particles.append(self._parse_sequence(child, here))
        return SequenceGroup(particles=particles)

    def _parse_choice(self, elem: ET.Element, location: str) -> ChoiceGroup:
        here = f"{location} > choice"
        annotation_name: Optional[str] = None
        alternatives: list[ElementDecl] = []
        for child in elem:
            local = _tag(child)
            if local == "annotation":
                for appinfo in child:
                    if _tag(appinfo) == "appinfo" and appinfo.text and appinfo.text.strip():
                        annotation_name = appinfo.text.strip()
            elif local == "element":
                alternatives.append(self._parse_element(child, here))
            else:
                raise SchemaError(f"unsupported XSD construct <xs:{local}> at {here}")
        if not alternatives:
            raise SchemaError(f"choice without alternatives at {here}")
        if annotation_name is None:
            self.unnamed_choices.append(here)
        return ChoiceGroup(
            annotation_name=annotation_name,
            alternatives=alternatives,
            min_occurs=self._occurs(elem.get("minOccurs"), 1, here),
            max_occurs=self._max_occurs(elem.get("maxOccurs"), here),
        )

    def _parse_attribute(self, elem: ET.Element, location: str) -> AttributeDecl:
        name = elem.get("name")
        if name is None:
            raise SchemaError(f"attribute without name at {location}")
        here = f"{location} > attribute '{name}'"
        type_ref = elem.get("type")
        if type_ref is None:
            raise SchemaError(f"attribute without type at {here}")
        type_name = self._resolve_type_ref(type_ref, here)
        if not is_builtin(type_name):
            raise SchemaError(f"attribute of complex type {type_name!r} at {here}")
        return AttributeDecl(
            name=name,
            type_name=type_name,
            default=elem.get("default"),
            required=elem.get("use") == "required",
        )


def parse_schema(document: bytes) -> SchemaModel:
    """Parse the XSD subset into a SchemaModel.

    Ill-formed XML and unsupported constructs raise SchemaError; authoring
    rule breaches (nameless types, unnamed choices, a non-list root) are kept
    as data for validate_authoring_rules.
    """
    return _Parser(document).parse()


def validate_authoring_rules(model: SchemaModel) -> list[RuleViolation]:
    """Check the three schema authoring rules; violations are data, not errors."""
    violations: list[RuleViolation] = []
    for location in model.anonymous_type_locations:
        violations.append(
            RuleViolation(
                RuleKind.NAMELESS_TYPE,
                location,
                "complex types must be named so ontology classes can be named",
            )
        )
    for location in model.unnamed_choice_locations:
        violations.append(
            RuleViolation(
                RuleKind.UNNAMED_CHOICE,
                location,
                "choices must carry an xs:annotation/xs:appinfo name",
            )
        )

    root = model.root_element
    root_loc = f"root element '{root.name}'"
    if is_builtin(root.type_name):
        violations.append(
            RuleViolation(RuleKind.ROOT_NOT_LIST, root_loc, "root type is a simple type")
        )
    else:
        root_type = model.types.get(root.type_name)
        if root_type is not None:
            problems = []
            if not root_type.particles:
                problems.append("root type declares no child elements")
            for particle in root_type.particles:
                if isinstance(particle, ChoiceGroup):
                    problems.append("root type contains a choice")
                elif isinstance(particle, SequenceGroup):
                    problems.append("root type contains a nested group")
                elif is_builtin(particle.type_name):
                    problems.append(f"root list element '{particle.name}' has a simple type")
            if root_type.base is not None:
                problems.append("root type must not extend another type")
            for problem in problems:
                violations.append(RuleViolation(RuleKind.ROOT_NOT_LIST, root_loc, problem))
    return violations


def resolve_element_type(model: SchemaModel, element_name: str, enclosing_type: str) -> str:
    """Type governing ``element_name`` inside ``enclosing_type``.

    Walks the extension chain most-derived first, so a redeclared element
    shadows its base declaration. Raises SchemaError listing the declared
    candidates when the element is unknown in that context.
    """
    for tdef in model.extension_chain(enclosing_type):
        for decl in iter_element_decls(tdef.particles):
            if decl.name == element_name:
                return decl.type_name
    candidates = sorted(
        {
            decl.name
            for tdef in model.extension_chain(enclosing_type)
            for decl in iter_element_decls(tdef.particles)
        }
    )
    raise SchemaError(
        f"element {element_name!r} is not declared in type {enclosing_type!r} "
        f"or its ancestors (declared: {', '.join(candidates) if candidates else 'none'})"
    )
