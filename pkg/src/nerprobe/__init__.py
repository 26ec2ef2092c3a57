"""Entity-level NER auditing: scoring, adversarial test sets, splits and significance tests."""

__version__ = "0.1.0"
SCHEMA_VERSION = "1"
