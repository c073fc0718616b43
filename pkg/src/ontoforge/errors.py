"""Exception types shared across the pipeline stages."""


class OntoforgeError(Exception):
    """Base class for all ontoforge errors."""


class VaultError(OntoforgeError):
    """Vault scanning, population or context extraction failed."""


class SchemaError(OntoforgeError):
    """XSD parsing failed or an unsupported construct was encountered."""


class AuthoringRuleError(SchemaError):
    """A stage refused to run because authoring-rule violations are present."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(v.describe() for v in self.violations)
        super().__init__(f"authoring rules violated: {lines}")


class OntologyError(OntoforgeError):
    """An ontology graph invariant does not hold."""


class DocumentError(OntoforgeError):
    """The XML document does not validate against the schema."""

    def __init__(self, message, element_path=None):
        self.element_path = element_path
        if element_path:
            message = f"{message} (at {element_path})"
        super().__init__(message)


class RefineError(OntoforgeError):
    """Merge candidate handling, clique application or revert failed."""


class OracleError(OntoforgeError):
    """The merge oracle could not produce a response."""


class EvaluationError(OntoforgeError):
    """Scoring input is inconsistent with the ground truth."""


class SerializationError(OntoforgeError):
    """RDF serialization or parsing failed."""


class ConfigError(OntoforgeError):
    """Pipeline configuration is missing or invalid."""
