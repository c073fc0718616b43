"""RDF serialization of OntologyGraph: Turtle and RDF/XML, both directions.

Output is deterministic (stable ordering, one assertion per line in Turtle,
Protege-style RDF/XML) and restricted to the pipeline vocabulary: named
classes, subclass axioms, object/data properties with domains and ranges,
named individuals, assertions, and the merge-provenance annotation. Blank
nodes are rejected on input; they never occur on output, which is what makes
graph equality a plain set comparison.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Iterable, Optional, Union
from urllib.parse import unquote
from xml.sax.saxutils import escape, quoteattr

from ontoforge.errors import SerializationError
from ontoforge.ontology import (
    XSD_LITERAL_IRIS,
    DataProperty,
    ObjectProperty,
    OntologyGraph,
    local_name,
)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = RDF_NS + "type"
RDFS_SUBCLASS = RDFS_NS + "subClassOf"
RDFS_DOMAIN = RDFS_NS + "domain"
RDFS_RANGE = RDFS_NS + "range"
OWL_CLASS = OWL_NS + "Class"
OWL_OBJECT_PROPERTY = OWL_NS + "ObjectProperty"
OWL_DATA_PROPERTY = OWL_NS + "DatatypeProperty"
OWL_ANNOTATION_PROPERTY = OWL_NS + "AnnotationProperty"
OWL_NAMED_INDIVIDUAL = OWL_NS + "NamedIndividual"
OWL_ONTOLOGY = OWL_NS + "Ontology"

MERGE_PROVENANCE_NAME = "merged_into"

_KIND_BY_XSD = {iri: kind for kind, iri in XSD_LITERAL_IRIS.items()}

TURTLE = "turtle"
RDFXML = "rdfxml"

# A parsed RDF term: ("iri", value) or ("literal", lexical, datatype-or-None).
Term = Union[tuple[str, str], tuple[str, str, Optional[str]]]


def _provenance_iri(graph: OntologyGraph) -> str:
    return f"{graph.base_iri}#{MERGE_PROVENANCE_NAME}"


def _check_serializable(graph: OntologyGraph) -> None:
    graph.require_valid()
    if graph.merged_into and (
        MERGE_PROVENANCE_NAME in graph.object_properties
        or MERGE_PROVENANCE_NAME in graph.data_properties
    ):
        raise SerializationError(
            f"property name {MERGE_PROVENANCE_NAME!r} clashes with the merge "
            "provenance annotation"
        )


def serialize(graph: OntologyGraph, format: str = TURTLE) -> bytes:
    """Deterministic serialization; invariants are checked before any output."""
    _check_serializable(graph)
    if format == TURTLE:
        return _to_turtle(graph)
    if format == RDFXML:
        return _to_rdfxml(graph)
    raise SerializationError(f"unknown format {format!r} (use 'turtle' or 'rdfxml')")


def parse(data: bytes, format: str = TURTLE) -> OntologyGraph:
    """Inverse of serialize for documents in the supported vocabulary."""
    if format == TURTLE:
        triples = _triples_from_turtle(data)
    elif format == RDFXML:
        triples = _triples_from_rdfxml(data)
    else:
        raise SerializationError(f"unknown format {format!r} (use 'turtle' or 'rdfxml')")
    return _graph_from_triples(triples)


def equal(a: OntologyGraph, b: OntologyGraph) -> bool:
    """Component-set equality; sound because no anonymous nodes exist."""
    return (
        a.base_iri == b.base_iri
        and a.classes == b.classes
        and a.subclass_axioms == b.subclass_axioms
        and a.object_properties == b.object_properties
        and a.data_properties == b.data_properties
        and a.instances == b.instances
        and a.object_assertions == b.object_assertions
        and a.data_assertions == b.data_assertions
        and a.merged_into == b.merged_into
    )


def format_for_path(path) -> str:
    suffix = str(path).rsplit(".", 1)[-1].lower()
    if suffix == "ttl":
        return TURTLE
    if suffix in ("owl", "rdf", "xml"):
        return RDFXML
    raise SerializationError(f"cannot infer RDF format from file name {path!r}")


# --------------------------------------------------------------------------
# Turtle


def _turtle_escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _to_turtle(graph: OntologyGraph) -> bytes:
    base = graph.base_iri
    prefix_len = len(base) + 1

    def pn(iri: str) -> str:
        return ":" + iri[prefix_len:]

    def literal(lex: str, kind: str) -> str:
        quoted = f'"{_turtle_escape(lex)}"'
        if kind == "string":
            return quoted
        return f"{quoted}^^xsd:{kind}"

    lines = [
        f"@prefix : <{base}#> .",
        f"@prefix owl: <{OWL_NS}> .",
        f"@prefix rdf: <{RDF_NS}> .",
        f"@prefix rdfs: <{RDFS_NS}> .",
        f"@prefix xsd: <{XSD_NS}> .",
        "",
        f"<{base}> rdf:type owl:Ontology .",
        "",
    ]
    for cls in sorted(graph.classes):
        lines.append(f"{pn(cls)} rdf:type owl:Class .")
    for sub, sup in sorted(graph.subclass_axioms):
        lines.append(f"{pn(sub)} rdfs:subClassOf {pn(sup)} .")
    for name in sorted(graph.object_properties):
        prop = graph.object_properties[name]
        lines.append(f"{pn(prop.iri)} rdf:type owl:ObjectProperty .")
        for domain in sorted(prop.domains):
            lines.append(f"{pn(prop.iri)} rdfs:domain {pn(domain)} .")
        for rng in sorted(prop.ranges):
            lines.append(f"{pn(prop.iri)} rdfs:range {pn(rng)} .")
    for name in sorted(graph.data_properties):
        prop = graph.data_properties[name]
        lines.append(f"{pn(prop.iri)} rdf:type owl:DatatypeProperty .")
        for domain in sorted(prop.domains):
            lines.append(f"{pn(prop.iri)} rdfs:domain {pn(domain)} .")
        lines.append(f"{pn(prop.iri)} rdfs:range xsd:{prop.literal_kind} .")
    if graph.merged_into:
        lines.append(f":{MERGE_PROVENANCE_NAME} rdf:type owl:AnnotationProperty .")
    for iri in sorted(graph.instances):
        lines.append(f"{pn(iri)} rdf:type owl:NamedIndividual .")
        lines.append(f"{pn(iri)} rdf:type {pn(graph.instances[iri])} .")
    for s, p, o in sorted(graph.object_assertions):
        lines.append(f"{pn(s)} {pn(p)} {pn(o)} .")
    for s, p, lex, kind in sorted(graph.data_assertions):
        lines.append(f"{pn(s)} {pn(p)} {literal(lex, kind)} .")
    for retired in sorted(graph.merged_into):
        lines.append(f"{pn(retired)} :{MERGE_PROVENANCE_NAME} {pn(graph.merged_into[retired])} .")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _tokenize_turtle(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == "#":
            j = text.find("\n", i)
            i = n if j == -1 else j + 1
        elif c == "<":
            j = text.find(">", i)
            if j == -1:
                raise SerializationError("unterminated IRI reference")
            tokens.append(("iri", text[i + 1 : j]))
            i = j + 1
        elif c == '"':
            buf = []
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    if j + 1 >= n:
                        raise SerializationError("unterminated string escape")
                    esc = text[j + 1]
                    mapped = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise SerializationError(f"unsupported string escape \\{esc}")
                    buf.append(mapped)
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise SerializationError("unterminated string literal")
            tokens.append(("string", "".join(buf)))
            i = j + 1
        elif text.startswith("^^", i):
            tokens.append(("datatype", ""))
            i += 2
        elif c in ".;,":
            tokens.append((c, c))
            i += 1
        elif c == "@":
            j = i + 1
            while j < n and text[j].isalpha():
                j += 1
            tokens.append(("keyword", text[i + 1 : j]))
            i = j
        elif c == "[" or text.startswith("_:", i):
            raise SerializationError(
                "anonymous individuals (blank nodes) are not supported"
            )
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in ";,<\"":
                j += 1
            word = text[i:j]
            if word.endswith(".") and len(word) > 1:
                word = word[:-1]
                j -= 1
            if "\\" in word:
                raise SerializationError(f"unsupported escaped name {word!r}")
            tokens.append(("pname", word))
            i = j
    return tokens


def _triples_from_turtle(data: bytes) -> list[tuple[str, str, Term]]:
    try:
        return _parse_turtle_tokens(_tokenize_turtle(data.decode("utf-8")))
    except IndexError:
        raise SerializationError("truncated Turtle document")


def _parse_turtle_tokens(tokens: list[tuple[str, str]]) -> list[tuple[str, str, Term]]:
    prefixes: dict[str, str] = {}
    triples: list[tuple[str, str, Term]] = []
    k = 0

    def resolve(word: str) -> str:
        if word == "a":
            return RDF_TYPE
        prefix, sep, local = word.partition(":")
        if not sep:
            raise SerializationError(f"unsupported bare token {word!r}")
        ns = prefixes.get(prefix)
        if ns is None:
            raise SerializationError(f"undeclared prefix {prefix!r}")
        return ns + local

    def term(kind: str, value: str) -> Term:
        if kind == "iri":
            return ("iri", value)
        if kind == "pname":
            return ("iri", resolve(value))
        raise SerializationError(f"unexpected token {value!r}")

    while k < len(tokens):
        kind, value = tokens[k]
        if kind == "keyword":
            if value != "prefix":
                raise SerializationError(f"unsupported directive @{value}")
            if k + 3 >= len(tokens):
                raise SerializationError("truncated @prefix directive")
            pkind, pvalue = tokens[k + 1]
            ikind, ivalue = tokens[k + 2]
            dot, _ = tokens[k + 3]
            if pkind != "pname" or not pvalue.endswith(":") or ikind != "iri" or dot != ".":
                raise SerializationError("malformed @prefix directive")
            prefixes[pvalue[:-1]] = ivalue
            k += 4
            continue

        subject = term(kind, value)
        k += 1
        while True:
            if k >= len(tokens):
                raise SerializationError("truncated statement")
            pkind, pvalue = tokens[k]
            if pkind not in ("iri", "pname"):
                raise SerializationError(f"expected predicate, found {pvalue!r}")
            predicate = resolve(pvalue) if pkind == "pname" else pvalue
            k += 1
            while True:
                okind, ovalue = tokens[k]
                if okind == "string":
                    datatype = None
                    if k + 1 < len(tokens) and tokens[k + 1][0] == "datatype":
                        dkind, dvalue = tokens[k + 2]
                        datatype = resolve(dvalue) if dkind == "pname" else dvalue
                        k += 2
                    obj: Term = ("literal", ovalue, datatype)
                else:
                    obj = term(okind, ovalue)
                triples.append((subject[1], predicate, obj))
                k += 1
                if tokens[k][0] == ",":
                    k += 1
                    continue
                break
            if tokens[k][0] == ";":
                k += 1
                continue
            if tokens[k][0] == ".":
                k += 1
                break
            raise SerializationError(f"expected '.', ';' or ',', found {tokens[k][1]!r}")
    return triples


# --------------------------------------------------------------------------
# RDF/XML


def _to_rdfxml(graph: OntologyGraph) -> bytes:
    base = graph.base_iri
    prefix_len = len(base) + 1

    def check_xml_name(iri: str) -> str:
        local = iri[prefix_len:]
        decoded = unquote(local)
        if decoded != local:
            raise SerializationError(
                f"property local name {local!r} is not expressible as an RDF/XML element"
            )
        return local

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<rdf:RDF xmlns={quoteattr(base + "#")}',
        f"     xml:base={quoteattr(base)}",
        f'     xmlns:owl="{OWL_NS}"',
        f'     xmlns:rdf="{RDF_NS}"',
        f'     xmlns:rdfs="{RDFS_NS}"',
        f'     xmlns:xsd="{XSD_NS}">',
        f"    <owl:Ontology rdf:about={quoteattr(base)}/>",
    ]

    def resource_line(indent: str, tag: str, target: str) -> str:
        return f"{indent}<{tag} rdf:resource={quoteattr(target)}/>"

    for cls in sorted(graph.classes):
        subs = sorted(sup for sub, sup in graph.subclass_axioms if sub == cls)
        if subs:
            out.append(f"    <owl:Class rdf:about={quoteattr(cls)}>")
            for sup in subs:
                out.append(resource_line("        ", "rdfs:subClassOf", sup))
            out.append("    </owl:Class>")
        else:
            out.append(f"    <owl:Class rdf:about={quoteattr(cls)}/>")

    for name in sorted(graph.object_properties):
        prop = graph.object_properties[name]
        out.append(f"    <owl:ObjectProperty rdf:about={quoteattr(prop.iri)}>")
        for domain in sorted(prop.domains):
            out.append(resource_line("        ", "rdfs:domain", domain))
        for rng in sorted(prop.ranges):
            out.append(resource_line("        ", "rdfs:range", rng))
        out.append("    </owl:ObjectProperty>")

    for name in sorted(graph.data_properties):
        prop = graph.data_properties[name]
        out.append(f"    <owl:DatatypeProperty rdf:about={quoteattr(prop.iri)}>")
        for domain in sorted(prop.domains):
            out.append(resource_line("        ", "rdfs:domain", domain))
        out.append(resource_line("        ", "rdfs:range", XSD_LITERAL_IRIS[prop.literal_kind]))
        out.append("    </owl:DatatypeProperty>")

    if graph.merged_into:
        out.append(
            f"    <owl:AnnotationProperty rdf:about={quoteattr(_provenance_iri(graph))}/>"
        )

    data_by_subject: dict[str, list[tuple[str, str, str]]] = {}
    for s, p, lex, kind in graph.data_assertions:
        data_by_subject.setdefault(s, []).append((check_xml_name(p), lex, kind))
    objects_by_subject: dict[str, list[tuple[str, str]]] = {}
    for s, p, o in graph.object_assertions:
        objects_by_subject.setdefault(s, []).append((check_xml_name(p), o))

    for iri in sorted(graph.instances):
        out.append(f"    <owl:NamedIndividual rdf:about={quoteattr(iri)}>")
        out.append(resource_line("        ", "rdf:type", graph.instances[iri]))
        for local, lex, kind in sorted(data_by_subject.get(iri, [])):
            if kind == "string":
                out.append(f"        <{local}>{escape(lex)}</{local}>")
            else:
                datatype = quoteattr(XSD_LITERAL_IRIS[kind])
                out.append(
                    f"        <{local} rdf:datatype={datatype}>{escape(lex)}</{local}>"
                )
        for local, target in sorted(objects_by_subject.get(iri, [])):
            out.append(resource_line("        ", local, target))
        out.append("    </owl:NamedIndividual>")

    for retired in sorted(graph.merged_into):
        out.append(f"    <rdf:Description rdf:about={quoteattr(retired)}>")
        out.append(
            resource_line("        ", MERGE_PROVENANCE_NAME, graph.merged_into[retired])
        )
        out.append("    </rdf:Description>")

    out.append("</rdf:RDF>")
    return ("\n".join(out) + "\n").encode("utf-8")


_RDFXML_NODE_TAGS = {
    f"{{{OWL_NS}}}Ontology": OWL_ONTOLOGY,
    f"{{{OWL_NS}}}Class": OWL_CLASS,
    f"{{{OWL_NS}}}ObjectProperty": OWL_OBJECT_PROPERTY,
    f"{{{OWL_NS}}}DatatypeProperty": OWL_DATA_PROPERTY,
    f"{{{OWL_NS}}}AnnotationProperty": OWL_ANNOTATION_PROPERTY,
    f"{{{OWL_NS}}}NamedIndividual": OWL_NAMED_INDIVIDUAL,
}


def _triples_from_rdfxml(data: bytes) -> list[tuple[str, str, Term]]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise SerializationError(f"ill-formed RDF/XML: {exc}")
    if root.tag != f"{{{RDF_NS}}}RDF":
        raise SerializationError(f"expected rdf:RDF document element, found {root.tag}")

    triples: list[tuple[str, str, Term]] = []
    about_key = f"{{{RDF_NS}}}about"
    resource_key = f"{{{RDF_NS}}}resource"
    datatype_key = f"{{{RDF_NS}}}datatype"

    for node in root:
        subject = node.get(about_key)
        if subject is None:
            raise SerializationError(
                f"node {node.tag} without rdf:about: anonymous individuals are not supported"
            )
        node_type = _RDFXML_NODE_TAGS.get(node.tag)
        if node_type is not None:
            triples.append((subject, RDF_TYPE, ("iri", node_type)))
        elif node.tag != f"{{{RDF_NS}}}Description":
            raise SerializationError(f"unsupported node element {node.tag}")
        for child in node:
            if not child.tag.startswith("{"):
                raise SerializationError(f"property element {child.tag} without namespace")
            ns, _, local = child.tag[1:].partition("}")
            predicate = ns + local
            resource = child.get(resource_key)
            if resource is not None:
                if len(child) or (child.text and child.text.strip()):
                    raise SerializationError(
                        f"property {predicate} mixes rdf:resource with content"
                    )
                triples.append((subject, predicate, ("iri", resource)))
                continue
            if len(child):
                raise SerializationError(
                    f"nested node under {predicate}: anonymous individuals are not supported"
                )
            datatype = child.get(datatype_key)
            triples.append((subject, predicate, ("literal", child.text or "", datatype)))
    return triples


# --------------------------------------------------------------------------
# Triples -> OntologyGraph


def _graph_from_triples(triples: Iterable[tuple[str, str, Term]]) -> OntologyGraph:
    typed: dict[str, set[str]] = {}
    for s, p, o in triples:
        if p == RDF_TYPE and o[0] == "iri" and o[1].startswith(OWL_NS):
            typed.setdefault(o[1], set()).add(s)

    ontology_subjects = sorted(typed.get(OWL_ONTOLOGY, set()))
    if len(ontology_subjects) != 1:
        raise SerializationError(
            f"expected exactly one owl:Ontology header, found {len(ontology_subjects)}"
        )
    base = ontology_subjects[0]
    prefix = base + "#"

    def owned(iri: str, what: str) -> str:
        if not iri.startswith(prefix):
            raise SerializationError(f"{what} {iri} is outside the base namespace {base}")
        return iri

    graph = OntologyGraph(base_iri=base)
    graph.classes = {owned(c, "class") for c in typed.get(OWL_CLASS, set())}

    prop_name = lambda iri: unquote(local_name(iri))
    for iri in sorted(typed.get(OWL_OBJECT_PROPERTY, set())):
        owned(iri, "object property")
        graph.object_properties[prop_name(iri)] = ObjectProperty(
            name=prop_name(iri), iri=iri
        )
    data_kinds: dict[str, set[str]] = {}
    for iri in sorted(typed.get(OWL_DATA_PROPERTY, set())):
        owned(iri, "data property")
        graph.data_properties[prop_name(iri)] = DataProperty(name=prop_name(iri), iri=iri)
        data_kinds[iri] = set()

    annotation_iris = set(typed.get(OWL_ANNOTATION_PROPERTY, set()))
    provenance_iri = prefix + MERGE_PROVENANCE_NAME
    for iri in annotation_iris:
        if iri != provenance_iri:
            raise SerializationError(f"unsupported annotation property {iri}")

    individuals = {owned(i, "individual") for i in typed.get(OWL_NAMED_INDIVIDUAL, set())}
    object_props = {p.iri: p for p in graph.object_properties.values()}
    data_props = {p.iri: p for p in graph.data_properties.values()}

    instance_types: dict[str, set[str]] = {i: set() for i in individuals}
    for s, p, o in triples:
        if p == RDF_TYPE:
            if o[0] != "iri":
                raise SerializationError(f"rdf:type of {s} must be an IRI")
            if o[1].startswith(OWL_NS):
                continue
            if s in instance_types:
                instance_types[s].add(o[1])
            else:
                raise SerializationError(f"rdf:type on non-individual {s}")
        elif p == RDFS_SUBCLASS:
            graph.subclass_axioms.add((owned(s, "class"), owned(o[1], "class")))
        elif p == RDFS_DOMAIN:
            if s in object_props:
                object_props[s].domains.add(owned(o[1], "class"))
            elif s in data_props:
                data_props[s].domains.add(owned(o[1], "class"))
            else:
                raise SerializationError(f"rdfs:domain on undeclared property {s}")
        elif p == RDFS_RANGE:
            if s in object_props:
                object_props[s].ranges.add(owned(o[1], "class"))
            elif s in data_props:
                if o[0] != "iri" or o[1] not in _KIND_BY_XSD:
                    raise SerializationError(f"unsupported literal range on {s}")
                data_kinds[s].add(_KIND_BY_XSD[o[1]])
            else:
                raise SerializationError(f"rdfs:range on undeclared property {s}")
        elif p == provenance_iri and s not in individuals:
            if o[0] != "iri":
                raise SerializationError("merge provenance must reference an instance")
            if s in graph.merged_into:
                raise SerializationError(f"conflicting merge provenance for {s}")
            graph.merged_into[owned(s, "retired instance")] = owned(o[1], "representative")
        elif p in object_props:
            if o[0] != "iri":
                raise SerializationError(f"object assertion {s} {p} requires an IRI object")
            graph.object_assertions.add((s, p, o[1]))
        elif p in data_props:
            if o[0] != "literal":
                raise SerializationError(f"data assertion {s} {p} requires a literal")
            _, lex, datatype = o
            kind = "string" if datatype is None else _KIND_BY_XSD.get(datatype)
            if kind is None:
                raise SerializationError(f"unsupported literal datatype {datatype}")
            graph.data_assertions.add((s, p, lex, kind))
        else:
            raise SerializationError(f"unsupported predicate {p}")

    for iri in sorted(individuals):
        classes = instance_types[iri]
        if len(classes) != 1:
            raise SerializationError(
                f"individual {iri} must have exactly one class, found {len(classes)}"
            )
        graph.instances[iri] = owned(next(iter(classes)), "class")

    for iri, kinds in data_kinds.items():
        if len(kinds) > 1:
            raise SerializationError(f"conflicting literal ranges for {iri}")
        if kinds:
            data_props[iri].literal_kind = next(iter(kinds))

    graph.require_valid()
    return graph
