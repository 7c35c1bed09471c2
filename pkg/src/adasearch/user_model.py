"""Per-session user model: the objective posterior, declared and inferred
profile slots, the activity log, and lexicon-based evidence extraction.

Each accepted activity event advances the session's belief by exactly one
filter step, so a session's state is a pure function of its ordered event
list (plus the network spec and lexicons), which is what makes replay
deterministic.

Declared profile facts win over inference: a slot set from a declared profile
(or a ``profile_edit`` event) is stored with ``source="declared"``, is never
overwritten by inferred values, and — when the slot maps onto a hidden
network variable — is clamped as hard evidence on every slice.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Mapping, Sequence

import yaml

from . import dbn
from .corpus import tokenize
from .errors import (
    InvalidEvent,
    LexiconError,
    NotFound,
    OrderViolation,
    ProfileError,
)

EVENT_KINDS = ("dialogue_utterance", "query_issued", "result_clicked", "profile_edit")

DECLARED = "declared"
INFERRED = "inferred"


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActivityEvent:
    session_id: str
    seq: int
    timestamp: str  # ISO-8601 instant
    kind: str
    text: str | None = None
    doc_id: str | None = None


def _parse_timestamp(value: str) -> datetime:
    # datetime.fromisoformat only learned the Z suffix in 3.11.
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def validate_event(event: ActivityEvent) -> None:
    if event.kind not in EVENT_KINDS:
        raise InvalidEvent(f"unknown kind {event.kind!r}", field="kind")
    if not isinstance(event.seq, int) or isinstance(event.seq, bool) or event.seq < 0:
        raise InvalidEvent("seq must be a non-negative integer", field="seq")
    try:
        _parse_timestamp(event.timestamp)
    except (TypeError, ValueError):
        raise InvalidEvent(f"timestamp {event.timestamp!r} is not ISO-8601",
                           field="timestamp") from None
    if event.kind == "result_clicked" and not event.doc_id:
        raise InvalidEvent("result_clicked requires doc_id", field="doc_id")
    if event.kind in ("dialogue_utterance", "query_issued") and not event.text:
        raise InvalidEvent(f"{event.kind} requires text", field="text")


def event_to_record(event: ActivityEvent) -> dict:
    record = {
        "session_id": event.session_id,
        "seq": event.seq,
        "timestamp": event.timestamp,
        "kind": event.kind,
    }
    if event.text is not None:
        record["text"] = event.text
    if event.doc_id is not None:
        record["doc_id"] = event.doc_id
    return record


def event_from_record(record: Mapping) -> ActivityEvent:
    try:
        return ActivityEvent(
            session_id=str(record["session_id"]),
            seq=record["seq"],
            timestamp=str(record["timestamp"]),
            kind=str(record["kind"]),
            text=None if record.get("text") is None else str(record["text"]),
            doc_id=None if record.get("doc_id") is None else str(record["doc_id"]),
        )
    except KeyError as exc:
        raise InvalidEvent(f"missing field {exc}", field=str(exc)) from None


# ---------------------------------------------------------------------------
# Lexicons and evidence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LexiconEntry:
    keywords: frozenset[str]
    value: str
    min_hits: int = 1


@dataclass(frozen=True)
class EvidenceLexicon:
    variable: str
    entries: tuple[LexiconEntry, ...]


@dataclass(frozen=True)
class ProfileSlot:
    """A profile slot; ``variable`` links it to a hidden network variable."""

    name: str
    category: str  # individual | context
    variable: str | None = None


@dataclass(frozen=True)
class UserModelConfig:
    lexicons: tuple[EvidenceLexicon, ...]
    profile_slots: Mapping[str, ProfileSlot]


def load_user_model_config(path) -> UserModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise LexiconError("lexicon config must be a mapping")
    lexicons = []
    try:
        for body in raw.get("lexicons", ()):
            entries = tuple(
                LexiconEntry(
                    keywords=frozenset(tokenize(" ".join(str(k) for k in e["keywords"]))),
                    value=str(e["value"]),
                    min_hits=int(e.get("min_hits", 1)),
                )
                for e in body.get("entries", ())
            )
            lexicons.append(EvidenceLexicon(variable=str(body["variable"]),
                                            entries=entries))
        slots = {}
        for name, body in (raw.get("profile_slots") or {}).items():
            body = body or {}
            slots[str(name)] = ProfileSlot(
                name=str(name),
                category=str(body.get("category", "individual")),
                variable=None if body.get("variable") is None else str(body["variable"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise LexiconError(f"malformed lexicon config: {exc!r}") from None
    for slot in slots.values():
        if slot.category not in ("individual", "context"):
            raise LexiconError(f"slot {slot.name!r}: bad category {slot.category!r}")
    return UserModelConfig(lexicons=tuple(lexicons), profile_slots=slots)


def validate_lexicons(config: UserModelConfig, spec: dbn.NetworkSpec) -> None:
    """Every lexicon target and every slot-mapped variable must exist."""
    observed = {v.name: set(v.domain) for v in spec.observed}
    for lexicon in config.lexicons:
        domain = observed.get(lexicon.variable)
        if domain is None:
            raise LexiconError(f"{lexicon.variable!r} is not an observed variable")
        for entry in lexicon.entries:
            if entry.value not in domain:
                raise LexiconError(
                    f"{entry.value!r} not in domain of {lexicon.variable!r}")
            if entry.min_hits < 1 or not entry.keywords:
                raise LexiconError(
                    f"lexicon for {lexicon.variable!r}: entries need keywords "
                    f"and min_hits >= 1")
    hidden = {v.name: set(v.domain) for v in spec.hidden}
    for slot in config.profile_slots.values():
        if slot.variable is not None and slot.variable not in hidden:
            raise LexiconError(
                f"slot {slot.name!r} maps to unknown hidden variable {slot.variable!r}")


def extract_evidence(event: ActivityEvent,
                     lexicons: Sequence[EvidenceLexicon],
                     click_text: str | None = None) -> dict[str, str]:
    """Evidence for one slice: keyword hits resolved per observed variable.

    The matched text is the event text for utterances and queries, and the
    caller-supplied document descriptor for clicks (clicks yield nothing
    unless such a descriptor is configured). A hit count is the number of
    distinct keywords of an entry present in the normalized text; per
    variable the highest-count value wins and ties emit nothing.
    """
    if event.kind == "result_clicked":
        text = click_text
    else:
        text = event.text
    if not text:
        return {}
    tokens = set(tokenize(text))
    evidence: dict[str, str] = {}
    for lexicon in lexicons:
        best: dict[str, int] = {}
        for entry in lexicon.entries:
            hits = len(entry.keywords & tokens)
            if hits >= entry.min_hits:
                best[entry.value] = max(best.get(entry.value, 0), hits)
        if not best:
            continue
        top = max(best.values())
        winners = [value for value, hits in best.items() if hits == top]
        if len(winners) == 1:
            evidence[lexicon.variable] = winners[0]
    return evidence


# ---------------------------------------------------------------------------
# Session state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotValue:
    value: str
    source: str  # declared | inferred


@dataclass(frozen=True)
class UserState:
    session_id: str
    user_id: str
    objective_posterior: Mapping[str, float]
    individual_characteristics: Mapping[str, SlotValue]
    context: Mapping[str, SlotValue]
    activities: tuple[ActivityEvent, ...]
    evidence_ignored_count: int = 0


class _Session:
    def __init__(self, session_id: str, user_id: str, belief: dbn.BeliefState):
        self.session_id = session_id
        self.user_id = user_id
        self.belief = belief
        self.individual: dict[str, SlotValue] = {}
        self.context: dict[str, SlotValue] = {}
        self.events: list[ActivityEvent] = []
        self.evidence_log: list[dict[str, str]] = []
        self.ignored = 0
        self.lock = threading.Lock()

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else -1


class SessionManager:
    """Owns all live sessions for one (network, lexicon) deployment.

    Events for one session are applied under that session's lock, strictly in
    seq order; distinct sessions progress independently. Snapshots returned
    by ``get_user_state`` are immutable copies.
    """

    def __init__(self, spec: dbn.NetworkSpec, config: UserModelConfig,
                 objective_variable: str = "objective",
                 click_text_resolver: Callable[[str], str | None] | None = None):
        dbn.require_valid(spec)
        validate_lexicons(config, spec)
        if objective_variable not in {v.name for v in spec.hidden}:
            raise LexiconError(f"{objective_variable!r} is not a hidden variable")
        self.spec = spec
        self.config = config
        self.objective_variable = objective_variable
        self.click_text_resolver = click_text_resolver
        self._sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        self._next_id = itertools.count(1)

    # -- session lifecycle --------------------------------------------------

    def open_session(self, user_id: str,
                     declared_profile: Mapping[str, str] | None = None,
                     session_id: str | None = None) -> str:
        with self._registry_lock:
            if session_id is None:
                session_id = f"s-{next(self._next_id):06d}"
            if session_id in self._sessions:
                raise ProfileError(f"session {session_id!r} already exists")
            session = _Session(session_id, user_id, dbn.init_belief(self.spec))
            self._sessions[session_id] = session
        with session.lock:
            for slot_name, value in (declared_profile or {}).items():
                self._declare_slot(session, slot_name, str(value))
            clamps = self._clamps(session)
            if clamps:
                session.belief = dbn.clamp_belief(session.belief, clamps, self.spec)
            self._refresh_inferred_slots(session)
        return session_id

    def _get(self, session_id: str) -> _Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise NotFound(f"unknown session: {session_id!r}")
        return session

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    def advance_session_counter(self, minimum: int) -> None:
        """Skip generated ids at or below ``minimum`` (used after restoring
        persisted sessions so fresh ids never collide)."""
        with self._registry_lock:
            self._next_id = itertools.count(minimum + 1)

    # -- slots ----------------------------------------------------------------

    def _slot_bucket(self, session: _Session, slot: ProfileSlot) -> dict[str, SlotValue]:
        return session.context if slot.category == "context" else session.individual

    def _declare_slot(self, session: _Session, name: str, value: str) -> None:
        slot = self.config.profile_slots.get(name)
        if slot is None:
            # Unmapped slots are stored verbatim as individual characteristics.
            slot = ProfileSlot(name=name, category="individual")
        if slot.variable is not None:
            domain = self.spec.variable(slot.variable).domain
            if value not in domain:
                raise ProfileError(
                    f"slot {name!r}: {value!r} not in domain of {slot.variable!r}")
        self._slot_bucket(session, slot)[name] = SlotValue(value, DECLARED)

    def _clamps(self, session: _Session) -> dict[str, str]:
        clamps: dict[str, str] = {}
        for name, slot in self.config.profile_slots.items():
            if slot.variable is None:
                continue
            held = self._slot_bucket(session, slot).get(name)
            if held is not None and held.source == DECLARED:
                clamps[slot.variable] = held.value
        return clamps

    def _refresh_inferred_slots(self, session: _Session) -> None:
        for name, slot in self.config.profile_slots.items():
            if slot.variable is None:
                continue
            bucket = self._slot_bucket(session, slot)
            held = bucket.get(name)
            if held is not None and held.source == DECLARED:
                continue
            marginal = dbn.query_posterior(session.belief, slot.variable)
            top = max(marginal.values())
            winners = [value for value, p in marginal.items() if p == top]
            if len(winners) == 1:
                bucket[name] = SlotValue(winners[0], INFERRED)

    # -- events ---------------------------------------------------------------

    def record_activity(self, session_id: str, event: ActivityEvent) -> UserState:
        session = self._get(session_id)
        validate_event(event)
        if event.session_id != session_id:
            raise InvalidEvent(
                f"event session_id {event.session_id!r} does not match {session_id!r}",
                field="session_id")
        with session.lock:
            if event.seq <= session.last_seq:
                raise OrderViolation(
                    f"seq {event.seq} not greater than last accepted {session.last_seq}")
            if event.kind == "profile_edit" and event.text:
                name, sep, value = event.text.partition("=")
                if not sep or not name.strip() or not value.strip():
                    raise InvalidEvent(
                        "profile_edit text must look like slot=value", field="text")
                self._declare_slot(session, name.strip(), value.strip())
            click_text = None
            if event.kind == "result_clicked" and self.click_text_resolver is not None:
                click_text = self.click_text_resolver(event.doc_id)
            evidence = extract_evidence(event, self.config.lexicons, click_text)
            session.belief = dbn.filter_step(
                session.belief, evidence, self.spec, clamps=self._clamps(session))
            if session.belief.evidence_ignored:
                session.ignored += 1
            session.events.append(event)
            session.evidence_log.append(evidence)
            self._refresh_inferred_slots(session)
            return self._snapshot(session)

    def get_user_state(self, session_id: str) -> UserState:
        session = self._get(session_id)
        with session.lock:
            return self._snapshot(session)

    def belief(self, session_id: str) -> dbn.BeliefState:
        session = self._get(session_id)
        with session.lock:
            return session.belief

    def evidence_history(self, session_id: str) -> list[dict[str, str]]:
        session = self._get(session_id)
        with session.lock:
            return [dict(e) for e in session.evidence_log]

    def _snapshot(self, session: _Session) -> UserState:
        return UserState(
            session_id=session.session_id,
            user_id=session.user_id,
            objective_posterior=dbn.query_posterior(
                session.belief, self.objective_variable),
            individual_characteristics=dict(session.individual),
            context=dict(session.context),
            activities=tuple(session.events),
            evidence_ignored_count=session.ignored,
        )

    # -- parameter learning -----------------------------------------------------

    def build_completed_case(self, session_id: str,
                             labels: Sequence[Mapping[str, str]] | None = None
                             ) -> list[dict[str, str]]:
        """Per-slice assignments for ``dbn.update_parameters``: recorded
        evidence plus hidden values filled in by self-training (the posterior
        argmax of the final belief), unless ``labels`` overrides a slice."""
        session = self._get(session_id)
        with session.lock:
            hidden_argmax = session.belief.argmax()
            case: list[dict[str, str]] = [dict(hidden_argmax)]
            for evidence in session.evidence_log:
                assignment = dict(hidden_argmax)
                assignment.update(evidence)
                case.append(assignment)
        if labels:
            for t, override in enumerate(labels):
                if t < len(case):
                    case[t].update(override)
        return case
