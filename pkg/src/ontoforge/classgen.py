"""Schema-to-ontology translation: classes and property declarations only.

Instances are added separately by ontoforge.instancegen, mirroring the
two-step build: one class per named complex type, one subclass axiom per
extension, element-named object properties for complex-typed children,
choice-named object properties spanning the alternatives, and data
properties for simple-typed children and attributes.
"""

from __future__ import annotations

from ontoforge.errors import AuthoringRuleError, OntologyError, SchemaError
from ontoforge.ontology import (
    DataProperty,
    IriKind,
    ObjectProperty,
    OntologyGraph,
    mint_iri,
)
from ontoforge.schema import (
    ChoiceGroup,
    ElementDecl,
    SchemaModel,
    SequenceGroup,
    builtin_kind,
    is_builtin,
    validate_authoring_rules,
)


def generate_schema_ontology(model: SchemaModel, base_iri: str) -> OntologyGraph:
    """Translate a rule-clean SchemaModel into a class-only ontology."""
    violations = validate_authoring_rules(model)
    if violations:
        raise AuthoringRuleError(violations)

    graph = OntologyGraph(base_iri=base_iri)
    class_iri = {
        name: mint_iri(base_iri, name, IriKind.CLASS) for name in model.types
    }
    graph.classes = set(class_iri.values())

    for name in sorted(model.types):
        tdef = model.types[name]
        if tdef.base is not None:
            graph.subclass_axioms.add((class_iri[name], class_iri[tdef.base]))

    for name in sorted(model.types):
        tdef = model.types[name]
        declaring = class_iri[name]
        _collect_particles(graph, model, tdef.particles, declaring, class_iri)
        for attr in tdef.attributes:
            _add_data_property(graph, attr.name, declaring, builtin_kind(attr.type_name))
    return graph


def _collect_particles(graph, model, particles, declaring, class_iri) -> None:
    for particle in particles:
        if isinstance(particle, SequenceGroup):
            _collect_particles(graph, model, particle.particles, declaring, class_iri)
        elif isinstance(particle, ChoiceGroup):
            ranges = set()
            for alt in particle.alternatives:
                if is_builtin(alt.type_name):
                    raise SchemaError(
                        f"choice alternative '{alt.name}' has simple type "
                        f"{alt.type_name}; choices must range over complex types"
                    )
                ranges.add(_range_class(alt, class_iri))
            _add_object_property(graph, particle.annotation_name, declaring, ranges)
        elif isinstance(particle, ElementDecl):
            if is_builtin(particle.type_name):
                _add_data_property(
                    graph, particle.name, declaring, builtin_kind(particle.type_name)
                )
            else:
                _add_object_property(
                    graph, particle.name, declaring, {_range_class(particle, class_iri)}
                )


def _range_class(decl: ElementDecl, class_iri: dict[str, str]) -> str:
    iri = class_iri.get(decl.type_name)
    if iri is None:
        raise SchemaError(
            f"element '{decl.name}' references undefined type {decl.type_name!r}"
        )
    return iri


def _add_object_property(graph: OntologyGraph, name: str, domain: str, ranges: set[str]) -> None:
    prop = graph.object_properties.get(name)
    if prop is None:
        if name in graph.data_properties:
            raise OntologyError(
                f"property name {name!r} used for both object and data values"
            )
        prop = ObjectProperty(
            name=name, iri=mint_iri(graph.base_iri, name, IriKind.PROPERTY)
        )
        graph.object_properties[name] = prop
    prop.domains.add(domain)
    prop.ranges.update(ranges)


def _add_data_property(graph: OntologyGraph, name: str, domain: str, kind: str) -> None:
    prop = graph.data_properties.get(name)
    if prop is None:
        if name in graph.object_properties:
            raise OntologyError(
                f"property name {name!r} used for both object and data values"
            )
        prop = DataProperty(
            name=name,
            iri=mint_iri(graph.base_iri, name, IriKind.PROPERTY),
            literal_kind=kind,
        )
        graph.data_properties[name] = prop
    elif prop.literal_kind != kind:
        raise OntologyError(
            f"data property {name!r} declared with conflicting literal types "
            f"{prop.literal_kind} and {kind}"
        )
    prop.domains.add(domain)
