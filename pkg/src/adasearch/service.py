"""Runtime wiring: configuration, the engine facade, session-log persistence,
deterministic replay, and the HTTP API.

Sessions live in memory; every accepted event is also appended to a per-
session log file, so restarting the service and replaying the persisted logs
reconstructs identical session states. The corpus index is immutable and
swapped atomically on reindex.
"""
from __future__ import annotations

import datetime as _dt
import json
import re
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import yaml
from pydantic import BaseModel

from . import adaptation, corpus, dbn, user_model
from .errors import (
    AdasearchError,
    ConfigError,
    CorpusFormatError,
    EmptyQuery,
    InvalidEvent,
    ParseError,
    ReplayError,
)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ServiceConfig:
    port: int
    corpus_path: Path
    network_path: Path
    lexicon_path: Path
    adaptation_path: Path
    data_dir: Path


def load_service_config(path) -> ServiceConfig:
    """Read the service config; relative paths resolve against the file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("service config must be a mapping")
    base = path.parent

    def resolve(key: str) -> Path:
        try:
            return (base / str(raw[key])).resolve()
        except KeyError:
            raise ConfigError(f"service config missing {key!r}") from None

    config = ServiceConfig(
        port=int(raw.get("port", 8000)),
        corpus_path=resolve("corpus"),
        network_path=resolve("network"),
        lexicon_path=resolve("lexicons"),
        adaptation_path=resolve("adaptation"),
        data_dir=(base / str(raw.get("data_dir", "var"))).resolve(),
    )
    for attr in ("corpus_path", "network_path", "lexicon_path", "adaptation_path"):
        if not getattr(config, attr).exists():
            raise ConfigError(f"{attr.replace('_', ' ')} does not exist: "
                              f"{getattr(config, attr)}")
    return config


# ---------------------------------------------------------------------------
# Engine facade
# ---------------------------------------------------------------------------

class Engine:
    """Everything the endpoints need, independent of HTTP."""

    def __init__(self, config: ServiceConfig, persist: bool = True):
        self.config = config
        self.persist = persist
        self.spec = dbn.load_network(config.network_path)
        violations = dbn.validate_network(self.spec)
        if violations:
            raise ConfigError(
                "network spec invalid: " + "; ".join(str(v) for v in violations))
        self.user_config = user_model.load_user_model_config(config.lexicon_path)
        self.adaptation_config = adaptation.load_adaptation_config(
            config.adaptation_path)
        objective_domain = set(self.spec.variable("objective").domain)
        catalog = set(self.adaptation_config.catalog)
        if objective_domain != catalog:
            raise ConfigError(
                f"objective catalog {sorted(catalog)} does not match the "
                f"network objective domain {sorted(objective_domain)}")

        self._index_lock = threading.Lock()
        self._counts_lock = threading.Lock()
        self.index = corpus.ingest_corpus(corpus.load_corpus(config.corpus_path))
        self.sessions = user_model.SessionManager(
            self.spec, self.user_config,
            click_text_resolver=self._describe_doc)
        self.counts = dbn.CountTable.from_spec(self.spec)
        if persist:
            self.config.data_dir.mkdir(parents=True, exist_ok=True)
            (self.config.data_dir / "sessions").mkdir(exist_ok=True)
            self._load_counts()
            self._restore_sessions()

    # -- corpus ---------------------------------------------------------------

    def _describe_doc(self, doc_id: str) -> str | None:
        index = self.index
        doc = index.documents.get(doc_id)
        if doc is None:
            return None
        return " ".join([doc.venue_type, doc.venue_name, doc.title,
                         *doc.keywords])

    def reindex(self) -> int:
        fresh = corpus.ingest_corpus(corpus.load_corpus(self.config.corpus_path))
        with self._index_lock:
            self.index = fresh
        return len(fresh)

    def reference_year(self) -> int:
        configured = self.adaptation_config.reference_year
        return configured if configured is not None else _dt.date.today().year

    # -- persistence ------------------------------------------------------------

    def _session_log_path(self, session_id: str) -> Path:
        return self.config.data_dir / "sessions" / f"{session_id}.jsonl"

    def _append_log(self, session_id: str, record: dict) -> None:
        if not self.persist:
            return
        with open(self._session_log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _restore_sessions(self) -> None:
        directory = self.config.data_dir / "sessions"
        highest = 0
        for log_path in sorted(directory.glob("*.jsonl")):
            with open(log_path, "r", encoding="utf-8") as fh:
                lines = [json.loads(line) for line in fh if line.strip()]
            if not lines or "open" not in lines[0]:
                raise ConfigError(f"session log {log_path} lacks an open record")
            opened = lines[0]
            session_id = str(opened["session_id"])
            m = re.fullmatch(r"s-(\d+)", session_id)
            if m:
                highest = max(highest, int(m.group(1)))
            self.sessions.open_session(
                user_id=str(opened["open"].get("user_id", "")),
                declared_profile=opened["open"].get("declared_profile") or {},
                session_id=session_id,
            )
            for line in lines[1:]:
                event = user_model.event_from_record(line["event"])
                self.sessions.record_activity(session_id, event)
        self.sessions.advance_session_counter(highest)

    def _counts_path(self) -> Path:
        return self.config.data_dir / "counts.json"

    def _load_counts(self) -> None:
        path = self._counts_path()
        if not path.exists():
            return
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        counts = {
            variable: {tuple(entry["given"]): tuple(float(c) for c in entry["counts"])
                       for entry in rows}
            for variable, rows in raw.items()
        }
        self.counts = dbn.CountTable(self.counts.domains, self.counts.parents,
                                     self.counts.parent_domains, counts)

    def _save_counts(self) -> None:
        if not self.persist:
            return
        doc = {
            variable: [{"given": list(key), "counts": list(row)}
                       for key, row in rows.items()]
            for variable, rows in self.counts.counts.items()
        }
        tmp = self._counts_path().with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True))
        tmp.replace(self._counts_path())

    # -- session operations -------------------------------------------------------

    def open_session(self, user_id: str,
                     declared_profile: Mapping[str, str] | None = None) -> str:
        session_id = self.sessions.open_session(user_id, declared_profile)
        self._append_log(session_id, {
            "receipt": 0,
            "session_id": session_id,
            "open": {"user_id": user_id,
                     "declared_profile": dict(declared_profile or {})},
        })
        return session_id

    def record_activity(self, session_id: str,
                        event: user_model.ActivityEvent) -> user_model.UserState:
        state = self.sessions.record_activity(session_id, event)
        self._append_log(session_id, {
            "receipt": len(state.activities),
            "event": user_model.event_to_record(event),
        })
        return state

    def run_query(self, session_id: str, query_text: str) -> adaptation.ResultSet:
        state = self.sessions.get_user_state(session_id)
        query = corpus.parse_query(query_text)
        return adaptation.compute_results(
            self.index, state, query, self.adaptation_config,
            reference_year=self.reference_year())

    def close_session(self, session_id: str) -> int:
        """Fold the finished session into the CPT count table (self-training)."""
        case = self.sessions.build_completed_case(session_id)
        with self._counts_lock:
            self.counts = dbn.update_parameters(self.counts, case)
            self._save_counts()
        return len(case)


# ---------------------------------------------------------------------------
# JSON views
# ---------------------------------------------------------------------------

def slot_view(bucket: Mapping[str, user_model.SlotValue]) -> dict[str, dict]:
    return {name: {"value": held.value, "source": held.source}
            for name, held in sorted(bucket.items())}


def state_view(state: user_model.UserState) -> dict[str, Any]:
    return {
        "session_id": state.session_id,
        "user_id": state.user_id,
        "objective_posterior": dict(state.objective_posterior),
        "individual_characteristics": slot_view(state.individual_characteristics),
        "context": slot_view(state.context),
        "activities": [user_model.event_to_record(e) for e in state.activities],
        "evidence_ignored_count": state.evidence_ignored_count,
    }


def result_view(result: adaptation.ResultSet) -> dict[str, Any]:
    return {
        "ranked": [{"doc_id": doc_id, "score": score}
                   for doc_id, score in result.ranked],
        "adapted_query": result.adapted_query.render(),
        "activated": result.adapted_query.activated,
        "winning_objective": result.adapted_query.winning_objective,
        "objective_used": dict(result.objective_used),
        "summary": [[value, count] for value, count in result.summary],
    }


def doc_view(doc: corpus.Document) -> dict[str, Any]:
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "authors": list(doc.authors),
        "venue_name": doc.venue_name,
        "venue_type": doc.venue_type,
        "year": doc.year,
        "keywords": list(doc.keywords),
        "team_ids": list(doc.team_ids),
    }


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

def load_activity_log(path) -> list[user_model.ActivityEvent]:
    events: list[user_model.ActivityEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                event = user_model.event_from_record(record)
                user_model.validate_event(event)
            except (json.JSONDecodeError, InvalidEvent) as exc:
                raise ReplayError(f"bad activity record: {exc}", line_no=line_no) \
                    from None
            events.append(event)
    return events


def replay(engine: Engine, log_path, user_id: str = "replay") -> list[dict[str, Any]]:
    """Apply a recorded activity log to a fresh session and report the model
    after every event (and the results for every issued query).

    The report is a list of JSON-serializable records; identical inputs
    produce byte-identical serialized reports.
    """
    events = load_activity_log(log_path)
    session_id = engine.sessions.open_session(user_id)
    state = engine.sessions.get_user_state(session_id)
    report: list[dict[str, Any]] = [{
        "record": "initial",
        "session_id": session_id,
        "objective_posterior": dict(state.objective_posterior),
    }]
    for event in events:
        event = replace(event, session_id=session_id)
        state = engine.sessions.record_activity(session_id, event)
        evidence = engine.sessions.evidence_history(session_id)[-1]
        entry: dict[str, Any] = {
            "record": "event",
            "seq": event.seq,
            "kind": event.kind,
            "evidence": evidence,
            "objective_posterior": dict(state.objective_posterior),
            "individual_characteristics": slot_view(state.individual_characteristics),
            "context": slot_view(state.context),
        }
        if event.kind == "query_issued":
            try:
                entry["result"] = result_view(
                    engine.run_query(session_id, event.text))
            except (EmptyQuery, ParseError) as exc:
                entry["result_error"] = str(exc)
        report.append(entry)
    return report


def render_report(report: list[dict[str, Any]]) -> str:
    return "\n".join(json.dumps(entry, sort_keys=True) for entry in report) + "\n"


# ---------------------------------------------------------------------------
# HTTP app
# ---------------------------------------------------------------------------

_ERROR_STATUS = {
    "not_found": 404,
    "order_violation": 409,
    "invalid_event": 422,
    "profile_error": 422,
    "empty_query": 400,
    "parse_error": 400,
    "evaluation_error": 400,
    "adaptation_error": 422,
    "fusion_error": 400,
    "summary_error": 400,
}


class OpenSessionBody(BaseModel):
    user_id: str = ""
    declared_profile: dict[str, str] = {}


class ActivityBody(BaseModel):
    seq: int
    timestamp: str
    kind: str
    text: str | None = None
    doc_id: str | None = None


class QueryBody(BaseModel):
    query: str


def create_app(engine: Engine):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="adasearch", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(AdasearchError)
    async def on_engine_error(request: Request, exc: AdasearchError):
        body = {"error": {"code": exc.code, "message": str(exc)}}
        if isinstance(exc, InvalidEvent) and exc.field:
            body["error"]["field"] = exc.field
        return JSONResponse(status_code=_ERROR_STATUS.get(exc.code, 400),
                            content=body)

    @app.get("/health")
    def health():
        return {"status": "ok", "corpus_docs": len(engine.index)}

    @app.post("/sessions")
    def open_session(body: OpenSessionBody):
        session_id = engine.open_session(body.user_id, body.declared_profile)
        state = engine.sessions.get_user_state(session_id)
        return {"session_id": session_id, "state": state_view(state)}

    @app.post("/sessions/{session_id}/activities")
    def record_activity(session_id: str, body: ActivityBody):
        event = user_model.ActivityEvent(
            session_id=session_id, seq=body.seq, timestamp=body.timestamp,
            kind=body.kind, text=body.text, doc_id=body.doc_id)
        state = engine.record_activity(session_id, event)
        return {"state": state_view(state)}

    @app.post("/sessions/{session_id}/query")
    def run_query(session_id: str, body: QueryBody):
        result = engine.run_query(session_id, body.query)
        return result_view(result)

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return state_view(engine.sessions.get_user_state(session_id))

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str):
        slices = engine.close_session(session_id)
        return {"status": "ok", "case_slices": slices}

    @app.get("/corpus/docs/{doc_id}")
    def get_doc(doc_id: str):
        return doc_view(engine.index.document(doc_id))

    @app.get("/corpus/docs/{doc_id}/links")
    def get_links(doc_id: str, type: str):
        if type not in corpus.LINK_TYPES:
            return JSONResponse(status_code=400, content={
                "error": {"code": "bad_link_type",
                          "message": f"type must be one of {corpus.LINK_TYPES}"}})
        neighbors = corpus.explore(engine.index, doc_id, type)
        return {"doc_id": doc_id, "type": type, "neighbors": neighbors}

    @app.post("/admin/reindex")
    def reindex():
        try:
            count = engine.reindex()
        except CorpusFormatError as exc:
            return JSONResponse(status_code=400, content={
                "error": {"code": exc.code, "message": str(exc)}})
        return {"status": "ok", "corpus_docs": count}

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    engine = Engine(config)
    app = create_app(engine)
    uvicorn.run(app, host="127.0.0.1", port=config.port)
