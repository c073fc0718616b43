"""Constrained XSD parsing, the three authoring rules, type resolution."""

from pathlib import Path

import pytest

from ontoforge.errors import SchemaError
from ontoforge.schema import (
    ChoiceGroup,
    ElementDecl,
    RuleKind,
    SchemaModel,
    TypeDef,
    parse_schema,
    resolve_element_type,
    validate_authoring_rules,
)

BAD_SCHEMAS = Path(__file__).resolve().parent.parent / "fixtures" / "bad_schemas"


def wrap_schema(body: str) -> bytes:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"\n'
        '           xmlns:ns="http://example.org/secreq"\n'
        '           targetNamespace="http://example.org/secreq"\n'
        '           elementFormDefault="qualified">\n'
        f"{body}\n"
        "</xs:schema>\n"
    ).encode("utf-8")


SUPPORT_TYPES = """
  <xs:element name="requirements" type="ns:RequirementsList"/>
  <xs:complexType name="RequirementsList">
    <xs:sequence>
      <xs:element name="ensuring_requirement" type="ns:EnsuringRequirement"
                  minOccurs="0" maxOccurs="unbounded"/>
    </xs:sequence>
  </xs:complexType>
  <xs:complexType name="AbstractContent">
    <xs:sequence>
      <xs:element name="name" type="xs:string"/>
    </xs:sequence>
  </xs:complexType>
  <xs:complexType name="Content">
    <xs:complexContent><xs:extension base="ns:AbstractContent"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="action">
    <xs:complexContent><xs:extension base="ns:AbstractContent"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="Standard">
    <xs:complexContent><xs:extension base="ns:AbstractContent"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="ContentProperty">
    <xs:complexContent><xs:extension base="ns:AbstractContent"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="Actor">
    <xs:complexContent><xs:extension base="ns:AbstractContent"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="Requirement">
    <xs:complexContent>
      <xs:extension base="ns:AbstractContent">
        <xs:sequence>
          <xs:element name="actor_in_charge" type="ns:Actor"/>
        </xs:sequence>
      </xs:extension>
    </xs:complexContent>
  </xs:complexType>
"""

ENSURING_SNIPPET = """
  <xs:complexType name="EnsuringRequirement">
    <xs:complexContent>
      <xs:extension base="ns:Requirement">
        <xs:choice>
          <xs:annotation>
            <xs:appinfo>EnsuringRequirement_choice</xs:appinfo>
          </xs:annotation>
          <xs:element name="ensured_concept" type="ns:Content"/>
          <xs:element name="ensured_action" type="ns:action"/>
          <xs:element name="compliance_with_standard" type="ns:Standard"/>
          <xs:element name="ensured_property" type="ns:ContentProperty"/>
        </xs:choice>
      </xs:extension>
    </xs:complexContent>
  </xs:complexType>
"""

RISK_SNIPPET = """
  <xs:element name="risks" type="ns:RiskList"/>
  <xs:complexType name="RiskList">
    <xs:sequence>
      <xs:element name="risk" type="ns:Risk" minOccurs="0" maxOccurs="unbounded"/>
    </xs:sequence>
  </xs:complexType>
  <xs:complexType name="AbstractContent">
    <xs:sequence>
      <xs:element name="name" type="xs:string"/>
    </xs:sequence>
  </xs:complexType>
  <xs:complexType name="Risk">
    <xs:complexContent>
      <xs:extension base="ns:AbstractContent">
        <xs:sequence>
          <xs:element name="residual" type="xs:boolean" minOccurs="0" default="false"/>
          <xs:element name="accepted" type="xs:boolean" minOccurs="0" default="false"/>
          <xs:element name="unacceptable" type="xs:boolean" minOccurs="0" default="false"/>
          <xs:element name="identified" type="xs:boolean" minOccurs="0" default="false"/>
        </xs:sequence>
      </xs:extension>
    </xs:complexContent>
  </xs:complexType>
"""


def ensuring_model() -> SchemaModel:
    return parse_schema(wrap_schema(SUPPORT_TYPES + ENSURING_SNIPPET))


# --------------------------------------------------------------------------
# parse_schema


def test_ensuring_requirement_snippet():
    model = ensuring_model()
    tdef = model.types["EnsuringRequirement"]
    assert tdef.base == "Requirement"
    choices = [p for p in tdef.particles if isinstance(p, ChoiceGroup)]
    assert len(choices) == 1
    choice = choices[0]
    assert choice.annotation_name == "EnsuringRequirement_choice"
    assert [(alt.name, alt.type_name) for alt in choice.alternatives] == [
        ("ensured_concept", "Content"),
        ("ensured_action", "action"),
        ("compliance_with_standard", "Standard"),
        ("ensured_property", "ContentProperty"),
    ]


def test_risk_boolean_flags_default_false():
    model = parse_schema(wrap_schema(RISK_SNIPPET))
    risk = model.types["Risk"]
    assert risk.base == "AbstractContent"
    assert risk.boolean_flags == [
        ("residual", False),
        ("accepted", False),
        ("unacceptable", False),
        ("identified", False),
    ]


def test_minimal_schema_single_type():
    model = parse_schema(
        wrap_schema(
            """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence>
      <xs:element name="note" type="ns:ItemList" minOccurs="0"/>
    </xs:sequence>
  </xs:complexType>
"""
        )
    )
    assert len(model.types) == 1
    assert model.root_element == ElementDecl(
        name="items", type_name="ItemList", min_occurs=1, max_occurs=1, default=None
    )


def test_parse_is_stable():
    document = wrap_schema(SUPPORT_TYPES + ENSURING_SNIPPET)
    assert parse_schema(document) == parse_schema(document)


def test_target_namespace_and_occurs():
    model = ensuring_model()
    assert model.target_namespace == "http://example.org/secreq"
    listing = model.types["RequirementsList"].particles[0]
    assert listing.min_occurs == 0
    assert listing.max_occurs is None  # unbounded


def test_ill_formed_xml_reports_position():
    with pytest.raises(SchemaError, match=r"line \d+"):
        parse_schema(b"<xs:schema xmlns:xs='http://www.w3.org/2001/XMLSchema'><oops>")


def test_unsupported_construct_named():
    with pytest.raises(SchemaError, match="simpleType"):
        parse_schema(
            wrap_schema(
                """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="x" type="ns:ItemList"/></xs:sequence>
  </xs:complexType>
  <xs:simpleType name="Level"/>
"""
            )
        )


def test_missing_extension_base_rejected():
    with pytest.raises(SchemaError, match="Ghost"):
        parse_schema(
            wrap_schema(
                """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="x" type="ns:Thing"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="Thing">
    <xs:complexContent><xs:extension base="ns:Ghost"/></xs:complexContent>
  </xs:complexType>
"""
            )
        )


def test_extension_cycle_rejected():
    with pytest.raises(SchemaError, match="cycle"):
        parse_schema(
            wrap_schema(
                """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="x" type="ns:A"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="A">
    <xs:complexContent><xs:extension base="ns:B"/></xs:complexContent>
  </xs:complexType>
  <xs:complexType name="B">
    <xs:complexContent><xs:extension base="ns:A"/></xs:complexContent>
  </xs:complexType>
"""
            )
        )


def test_unknown_builtin_rejected():
    with pytest.raises(SchemaError, match="xs:decimal"):
        parse_schema(
            wrap_schema(
                """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="x" type="xs:decimal"/></xs:sequence>
  </xs:complexType>
"""
            )
        )


def test_attribute_declarations_parse():
    model = parse_schema(
        wrap_schema(
            """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="item" type="ns:Item" minOccurs="0" maxOccurs="unbounded"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="Item">
    <xs:sequence><xs:element name="name" type="xs:string"/></xs:sequence>
    <xs:attribute name="version" type="xs:string" default="1"/>
    <xs:attribute name="critical" type="xs:boolean" use="required"/>
  </xs:complexType>
"""
        )
    )
    attrs = model.types["Item"].attributes
    assert [(a.name, a.type_name, a.default, a.required) for a in attrs] == [
        ("version", "xs:string", "1", False),
        ("critical", "xs:boolean", None, True),
    ]


# --------------------------------------------------------------------------
# authoring rules


def test_corpus_schema_passes_rules(corpus_model):
    assert validate_authoring_rules(corpus_model) == []


@pytest.mark.parametrize(
    "fixture, expected",
    [
        ("nameless_type.xsd", RuleKind.NAMELESS_TYPE),
        ("unnamed_choice.xsd", RuleKind.UNNAMED_CHOICE),
        ("root_not_list.xsd", RuleKind.ROOT_NOT_LIST),
    ],
)
def test_each_bad_fixture_violates_exactly_one_rule(fixture, expected):
    model = parse_schema((BAD_SCHEMAS / fixture).read_bytes())
    violations = validate_authoring_rules(model)
    assert [v.rule for v in violations] == [expected]
    assert violations[0].location


def test_rules_pass_vacuously_on_synthetic_empty_model():
    model = SchemaModel(
        target_namespace="urn:x",
        root_element=ElementDecl(name="root", type_name="Missing"),
    )
    assert validate_authoring_rules(model) == []


# --------------------------------------------------------------------------
# resolve_element_type


def test_resolve_choice_member():
    model = ensuring_model()
    assert resolve_element_type(model, "ensured_concept", "EnsuringRequirement") == "Content"


def test_resolve_via_extension_chain():
    model = ensuring_model()
    assert resolve_element_type(model, "actor_in_charge", "EnsuringRequirement") == "Actor"
    assert resolve_element_type(model, "name", "EnsuringRequirement") == "xs:string"


def test_resolve_unknown_element_lists_candidates():
    model = ensuring_model()
    with pytest.raises(SchemaError, match="actor_in_charge"):
        resolve_element_type(model, "nonexistent", "EnsuringRequirement")


def test_resolve_shadowing_most_derived_wins():
    model = parse_schema(
        wrap_schema(
            """
  <xs:element name="items" type="ns:ItemList"/>
  <xs:complexType name="ItemList">
    <xs:sequence><xs:element name="item" type="ns:Derived" minOccurs="0"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="Payload">
    <xs:sequence><xs:element name="name" type="xs:string"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="Base">
    <xs:sequence><xs:element name="slot" type="ns:Base" minOccurs="0"/></xs:sequence>
  </xs:complexType>
  <xs:complexType name="Derived">
    <xs:complexContent>
      <xs:extension base="ns:Base">
        <xs:sequence><xs:element name="slot" type="ns:Payload" minOccurs="0"/></xs:sequence>
      </xs:extension>
    </xs:complexContent>
  </xs:complexType>
"""
        )
    )
    assert resolve_element_type(model, "slot", "Derived") == "Payload"
    assert resolve_element_type(model, "slot", "Base") == "Base"


def test_resolution_total_over_declared_closure(corpus_model):
    from ontoforge.schema import iter_element_decls

    for type_name, tdef in corpus_model.types.items():
        for chained in corpus_model.extension_chain(type_name):
            for decl in iter_element_decls(chained.particles):
                assert resolve_element_type(corpus_model, decl.name, type_name)
