"""Schema-to-classes translation and IRI minting."""

import pytest

from ontoforge.classgen import generate_schema_ontology
from ontoforge.errors import AuthoringRuleError, OntologyError
from ontoforge.ontology import IriKind, mint_iri
from ontoforge.rdfio import serialize
from ontoforge.schema import ElementDecl, SchemaModel, parse_schema
from test_schema import ENSURING_SNIPPET, RISK_SNIPPET, SUPPORT_TYPES, wrap_schema

B = "http://example.org/secreq"


# --------------------------------------------------------------------------
# mint_iri


def test_mint_class_iri():
    assert mint_iri(B, "Risk", IriKind.CLASS) == f"{B}#Risk"


def test_mint_instance_with_spaces():
    assert (
        mint_iri(B, "benefit-risk tradeoff analysis", IriKind.INSTANCE)
        == f"{B}#benefit-risk_tradeoff_analysis"
    )


def test_mint_blank_local_rejected():
    with pytest.raises(OntologyError):
        mint_iri(B, "  ", IriKind.CLASS)


def test_mint_percent_encodes_reserved():
    assert mint_iri(B, "ISO 14971:2019", IriKind.INSTANCE) == f"{B}#ISO_14971%3A2019"
    assert mint_iri(B, "a#b", IriKind.INSTANCE) == f"{B}#a%23b"


def test_mint_keeps_turtle_local_names_valid():
    # No leading '-'/'.' and no trailing '.' survive in the local part.
    assert mint_iri(B, "-x", IriKind.INSTANCE).endswith("#%2Dx")
    assert mint_iri(B, "x.", IriKind.INSTANCE).endswith("#x%2E")
    assert mint_iri(B, "v1.2", IriKind.INSTANCE).endswith("#v1.2")


def test_mint_is_deterministic():
    for local in ("Risk", "data breach", "héllo wörld"):
        assert mint_iri(B, local, IriKind.CLASS) == mint_iri(B, local, IriKind.CLASS)


# --------------------------------------------------------------------------
# generate_schema_ontology


def test_risk_type_maps_to_class_and_boolean_properties():
    model = parse_schema(wrap_schema(RISK_SNIPPET))
    graph = generate_schema_ontology(model, B)
    assert f"{B}#Risk" in graph.classes
    assert (f"{B}#Risk", f"{B}#AbstractContent") in graph.subclass_axioms
    for flag in ("residual", "accepted", "unacceptable", "identified"):
        prop = graph.data_properties[flag]
        assert prop.literal_kind == "boolean"
        assert prop.domains == {f"{B}#Risk"}


def test_choice_becomes_multi_range_property():
    model = parse_schema(wrap_schema(SUPPORT_TYPES + ENSURING_SNIPPET))
    graph = generate_schema_ontology(model, B)
    assert (f"{B}#EnsuringRequirement", f"{B}#Requirement") in graph.subclass_axioms
    choice = graph.object_properties["EnsuringRequirement_choice"]
    assert choice.domains == {f"{B}#EnsuringRequirement"}
    assert choice.ranges == {
        f"{B}#Content",
        f"{B}#action",
        f"{B}#Standard",
        f"{B}#ContentProperty",
    }
    # Choice members do not get element-named properties of their own.
    assert "ensured_concept" not in graph.object_properties


def test_empty_model_yields_empty_ontology():
    model = SchemaModel(
        target_namespace="urn:x",
        root_element=ElementDecl(name="root", type_name="Missing"),
    )
    graph = generate_schema_ontology(model, B)
    assert graph.classes == set()
    assert graph.instances == {}


def test_class_count_matches_named_types(corpus_model, corpus_class_graph):
    assert len(corpus_class_graph.classes) == len(corpus_model.types) == 20
    assert corpus_class_graph.instances == {}


def test_subclass_axioms_mirror_extension_graph(corpus_model, corpus_class_graph):
    expected = {
        (mint_iri(B, name, IriKind.CLASS), mint_iri(B, tdef.base, IriKind.CLASS))
        for name, tdef in corpus_model.types.items()
        if tdef.base is not None
    }
    assert corpus_class_graph.subclass_axioms == expected


def test_generation_is_deterministic(corpus_schema_bytes):
    first = generate_schema_ontology(parse_schema(corpus_schema_bytes), B)
    second = generate_schema_ontology(parse_schema(corpus_schema_bytes), B)
    assert serialize(first) == serialize(second)


def test_refuses_on_rule_violations():
    model = parse_schema(
        wrap_schema(
            """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence>
      <xs:element name="item">
        <xs:complexType>
          <xs:sequence><xs:element name="name" type="xs:string"/></xs:sequence>
        </xs:complexType>
      </xs:element>
    </xs:sequence>
  </xs:complexType>
"""
        )
    )
    with pytest.raises(AuthoringRuleError) as exc_info:
        generate_schema_ontology(model, B)
    assert exc_info.value.violations


def test_shared_element_name_merges_domains(corpus_class_graph):
    # "input"/"output" appear on Action only, but "name" is declared once on
    # the shared base type, giving one property with one domain.
    name_prop = corpus_class_graph.data_properties["name"]
    assert name_prop.domains == {f"{B}#AbstractContent"}
    assert name_prop.literal_kind == "string"


def test_data_and_object_properties_disjoint(corpus_class_graph):
    overlap = set(corpus_class_graph.object_properties) & set(
        corpus_class_graph.data_properties
    )
    assert overlap == set()
