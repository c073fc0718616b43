import shutil
from pathlib import Path

import pytest

from ontoforge import classgen, instancegen
from ontoforge.schema import parse_schema

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"

BASE_IRI = "http://example.org/secreq"


@pytest.fixture(scope="session")
def corpus_schema_bytes() -> bytes:
    return (FIXTURES / "requirements.xsd").read_bytes()


@pytest.fixture(scope="session")
def corpus_xml_bytes() -> bytes:
    return (FIXTURES / "requirements.xml").read_bytes()


@pytest.fixture(scope="session")
def corpus_model(corpus_schema_bytes):
    return parse_schema(corpus_schema_bytes)


@pytest.fixture(scope="session")
def corpus_class_graph(corpus_model):
    return classgen.generate_schema_ontology(corpus_model, BASE_IRI)


@pytest.fixture(scope="session")
def corpus_build(corpus_class_graph, corpus_xml_bytes, corpus_model):
    return instancegen.populate_instances(
        corpus_class_graph, corpus_xml_bytes, corpus_model
    )


@pytest.fixture(scope="session")
def corpus_ontology(corpus_build):
    return corpus_build[0]


@pytest.fixture
def vault_copy(tmp_path) -> Path:
    target = tmp_path / "vault"
    shutil.copytree(FIXTURES / "vault", target)
    return target
