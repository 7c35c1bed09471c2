"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can emit structured diagnostics without string matching.
"""
from __future__ import annotations


class AdasearchError(Exception):
    """Base class for all engine errors."""

    code = "error"


# --- corpus ---------------------------------------------------------------

class CorpusError(AdasearchError):
    code = "corpus_error"


class InvalidDocument(CorpusError):
    code = "invalid_document"

    def __init__(self, message: str, record_index: int | None = None):
        super().__init__(message)
        self.record_index = record_index


class DuplicateDocId(CorpusError):
    code = "duplicate_doc_id"

    def __init__(self, doc_id: str):
        super().__init__(f"duplicate doc_id: {doc_id!r}")
        self.doc_id = doc_id


class CorpusFormatError(CorpusError):
    code = "corpus_format_error"

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class EmptyQuery(CorpusError):
    code = "empty_query"


class ParseError(CorpusError):
    code = "parse_error"

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EvaluationError(CorpusError):
    code = "evaluation_error"


class NotFound(AdasearchError):
    code = "not_found"


# --- dbn ------------------------------------------------------------------

class DbnError(AdasearchError):
    code = "dbn_error"


class NetworkFormatError(DbnError):
    code = "network_format_error"


class InvalidSpec(DbnError):
    code = "invalid_spec"

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network spec: {lines}")


class EvidenceError(DbnError):
    code = "evidence_error"


class QueryError(DbnError):
    code = "query_error"


class CaseError(DbnError):
    code = "case_error"


class SpaceTooLarge(DbnError):
    code = "space_too_large"


# --- user model -----------------------------------------------------------

class SessionError(AdasearchError):
    code = "session_error"


class InvalidEvent(SessionError):
    code = "invalid_event"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class OrderViolation(SessionError):
    code = "order_violation"


class LexiconError(AdasearchError):
    code = "lexicon_error"


class ProfileError(AdasearchError):
    code = "profile_error"


# --- adaptation -----------------------------------------------------------

class FusionError(AdasearchError):
    code = "fusion_error"


class AdaptationError(AdasearchError):
    code = "adaptation_error"

    def __init__(self, message: str, missing_slots=()):
        super().__init__(message)
        self.missing_slots = tuple(missing_slots)


class SummaryError(AdasearchError):
    code = "summary_error"


# --- service --------------------------------------------------------------

class ConfigError(AdasearchError):
    code = "config_error"


class ReplayError(AdasearchError):
    code = "replay_error"

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
