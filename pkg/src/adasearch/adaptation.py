"""Turns the inferred user model into results: fuses inferred and explicitly
stated objectives, adapts the query with the winning objective's constraints,
scores candidates by content and objective relevance, and groups the results.

Objectives are deployment config: each objective in the catalog has exactly
one template describing (a) the hard constraints to inject when it wins, as
query fragments with ``{placeholder}`` parameters filled from profile slots
and the reference year, (b) soft expansion terms that join content scoring,
and (c) match patterns that recognize the objective in explicitly issued
queries.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import yaml

from . import corpus as cp
from .errors import (
    AdaptationError,
    ConfigError,
    FusionError,
    SummaryError,
)
from .user_model import UserState

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchPattern:
    attribute: str
    op: str          # "=", ">=", "<="
    value: str       # "*" matches any value

    def satisfied_by(self, atom) -> bool:
        if self.op == "=" and isinstance(atom, cp.AttrEq):
            return atom.attribute == self.attribute and \
                (self.value == "*" or atom.value == self.value)
        if isinstance(atom, cp.AttrCmp) and atom.op == self.op:
            return atom.attribute == self.attribute and \
                (self.value == "*" or str(atom.value) == self.value)
        return False


@dataclass(frozen=True)
class ObjectiveTemplate:
    objective_id: str
    constraints: tuple[str, ...]
    match_patterns: tuple[MatchPattern, ...]
    expansion_terms: tuple[str, ...] = ()
    horizon_years: int | None = None


@dataclass(frozen=True)
class AdaptationConfig:
    templates: Mapping[str, ObjectiveTemplate]
    lambda_weight: float = 0.5
    alpha: float = 0.6
    theta: float = 0.1
    top_k: int = 50
    tau: float = 0.4
    group_by: str = "venue_name"
    reference_year: int | None = None

    @property
    def catalog(self) -> tuple[str, ...]:
        return tuple(self.templates)


_PATTERN_RE = re.compile(r"^([a-z_]+)\s*(>=|<=|=)\s*(.+)$")


def parse_match_pattern(text: str) -> MatchPattern:
    m = _PATTERN_RE.match(text.strip())
    if m is None:
        raise ConfigError(f"bad match pattern: {text!r}")
    attribute, op, value = m.group(1), m.group(2), m.group(3).strip()
    if attribute not in cp.ATTRIBUTES:
        raise ConfigError(f"match pattern uses unknown attribute {attribute!r}")
    return MatchPattern(attribute, op, value)


def load_adaptation_config(path) -> AdaptationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("adaptation config must be a mapping")
    templates: dict[str, ObjectiveTemplate] = {}
    try:
        for body in raw.get("objectives", ()):
            objective_id = str(body["id"])
            if objective_id in templates:
                raise ConfigError(f"duplicate objective {objective_id!r}")
            templates[objective_id] = ObjectiveTemplate(
                objective_id=objective_id,
                constraints=tuple(str(c) for c in body.get("constraints", ())),
                match_patterns=tuple(parse_match_pattern(p)
                                     for p in body.get("match", ())),
                expansion_terms=tuple(str(t) for t in body.get("expansion_terms", ())),
                horizon_years=(None if body.get("horizon_years") is None
                               else int(body["horizon_years"])),
            )
        defaults = dict(
            lambda_weight=float(raw.get("lambda", 0.5)),
            alpha=float(raw.get("alpha", 0.6)),
            theta=float(raw.get("theta", 0.1)),
            top_k=int(raw.get("top_k", 50)),
            tau=float(raw.get("tau", 0.4)),
            group_by=str(raw.get("group_by", "venue_name")),
            reference_year=(None if raw.get("reference_year") is None
                            else int(raw["reference_year"])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed adaptation config: {exc!r}") from None
    if not templates:
        raise ConfigError("adaptation config declares no objectives")
    for key in ("lambda_weight", "alpha", "theta", "tau"):
        if not 0.0 <= defaults[key] <= 1.0:
            raise ConfigError(f"{key} must be in [0, 1]")
    # Constraint fragments must parse once placeholders are substituted.
    for template in templates.values():
        for fragment in template.constraints:
            probe = _PLACEHOLDER_RE.sub("0", fragment)
            try:
                cp.parse_query(probe)
            except cp.EmptyQuery:
                raise ConfigError(
                    f"objective {template.objective_id!r}: empty constraint") from None
            except cp.ParseError as exc:
                raise ConfigError(
                    f"objective {template.objective_id!r}: bad constraint "
                    f"{fragment!r}: {exc}") from None
    return AdaptationConfig(templates=templates, **defaults)


# ---------------------------------------------------------------------------
# Objective distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectiveSignal:
    """Distribution over the objective catalog, with an uninformative flag
    for the no-matches case."""

    probs: Mapping[str, float]
    uninformative: bool = False


def _uniform(catalog: Sequence[str]) -> dict[str, float]:
    return {objective: 1.0 / len(catalog) for objective in catalog}


def explicit_objectives(query_history: Sequence[cp.BooleanQuery],
                        config: AdaptationConfig) -> ObjectiveSignal:
    """Objectives recognizable from the queries the user actually issued.

    A query matches a template when every match pattern finds a positive atom
    in the query; per query only the most specific matches count (largest
    pattern set). Matched objectives share mass equally; with no matches the
    signal is uniform and flagged uninformative.
    """
    catalog = config.catalog
    matched: set[str] = set()
    for query in query_history:
        atoms = cp.positive_atoms(query)
        hits = [
            template for template in config.templates.values()
            if template.match_patterns and all(
                any(pattern.satisfied_by(atom) for atom in atoms)
                for pattern in template.match_patterns
            )
        ]
        if not hits:
            continue
        best = max(len(t.match_patterns) for t in hits)
        matched.update(t.objective_id for t in hits
                       if len(t.match_patterns) == best)
    if not matched:
        return ObjectiveSignal(_uniform(catalog), uninformative=True)
    share = 1.0 / len(matched)
    return ObjectiveSignal(
        {objective: (share if objective in matched else 0.0)
         for objective in catalog},
        uninformative=False,
    )


def fuse_objectives(p_dbn: Mapping[str, float],
                    p_explicit: ObjectiveSignal | Mapping[str, float],
                    lambda_weight: float) -> dict[str, float]:
    """Convex mixture of the inferred and explicit objective distributions.

    ``lambda_weight`` is the share of the inferred side; 1 and 0 return the
    respective inputs verbatim, and an uninformative explicit signal defers
    entirely to the inferred distribution.
    """
    if not 0.0 <= lambda_weight <= 1.0:
        raise FusionError(f"lambda must be in [0, 1], got {lambda_weight!r}")
    if isinstance(p_explicit, ObjectiveSignal):
        if p_explicit.uninformative:
            return dict(p_dbn)
        explicit = p_explicit.probs
    else:
        explicit = p_explicit
    if set(p_dbn) != set(explicit):
        raise FusionError(
            f"objective catalogs differ: {sorted(p_dbn)} vs {sorted(explicit)}")
    if lambda_weight == 1.0:
        return dict(p_dbn)
    if lambda_weight == 0.0:
        return dict(explicit)
    # Sum in sorted-key order so fusion at 0.5 is exactly argument-symmetric.
    mixed = {key: lambda_weight * p_dbn[key] + (1.0 - lambda_weight) * explicit[key]
             for key in p_dbn}
    total = math.fsum(mixed[key] for key in sorted(mixed))
    return {key: value / total for key, value in mixed.items()}


# ---------------------------------------------------------------------------
# Query adaptation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdaptedQuery:
    base: cp.BooleanQuery
    hard_constraints: tuple[cp.BooleanQuery, ...]
    soft_terms: tuple[str, ...]
    winning_objective: str | None
    activated: bool

    def combined(self) -> cp.BooleanQuery:
        """Display form: the OR-expanded base conjoined with the constraints."""
        expanded = self.base
        for term in self.soft_terms:
            expanded = cp.Or(expanded, cp.Term(term))
        if not self.hard_constraints:
            return expanded
        return cp.and_all([expanded, *self.hard_constraints])

    def render(self) -> str:
        return cp.render(self.combined())


def _slot_parameters(user_state: UserState) -> dict[str, str]:
    params: dict[str, str] = {}
    for bucket in (user_state.context, user_state.individual_characteristics):
        for name, held in bucket.items():
            params.setdefault(name, held.value)
    return params


def build_constraints(template: ObjectiveTemplate, user_state: UserState,
                      reference_year: int) -> tuple[cp.BooleanQuery, ...]:
    """Instantiate a template's constraint fragments for one user and date."""
    params = _slot_parameters(user_state)
    params["reference_year"] = str(reference_year)
    if template.horizon_years is not None:
        params["since_year"] = str(reference_year - template.horizon_years)
    missing = sorted({
        name
        for fragment in template.constraints
        for name in _PLACEHOLDER_RE.findall(fragment)
        if name not in params
    })
    if missing:
        raise AdaptationError(
            f"objective {template.objective_id!r} needs unset slots: "
            f"{', '.join(missing)}", missing_slots=missing)
    built = []
    for fragment in template.constraints:
        text = _PLACEHOLDER_RE.sub(lambda m: params[m.group(1)], fragment)
        built.append(cp.parse_query(text))
    return tuple(built)


def _winning_objective(fused: Mapping[str, float]) -> tuple[str, float]:
    top = max(fused.values())
    winners = sorted(key for key, p in fused.items() if p == top)
    return winners[0], top


def adapt_query(q: cp.BooleanQuery, fused: Mapping[str, float],
                user_state: UserState, reference_year: int,
                config: AdaptationConfig) -> AdaptedQuery:
    """Inject the winning objective's constraints when its fused probability
    reaches the activation threshold; below it the query passes through."""
    winner, top = _winning_objective(fused)
    if top < config.tau:
        return AdaptedQuery(base=q, hard_constraints=(), soft_terms=(),
                            winning_objective=None, activated=False)
    template = config.templates.get(winner)
    if template is None:
        raise AdaptationError(f"no template for objective {winner!r}")
    constraints = build_constraints(template, user_state, reference_year)
    return AdaptedQuery(
        base=q,
        hard_constraints=constraints,
        soft_terms=template.expansion_terms,
        winning_objective=winner,
        activated=True,
    )


# ---------------------------------------------------------------------------
# Result computation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultSet:
    ranked: tuple[tuple[str, float], ...]
    adapted_query: AdaptedQuery
    objective_used: Mapping[str, float]
    summary: tuple[tuple[str, int], ...]

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.ranked]


def content_match(doc: cp.Document, terms: set[str]) -> float:
    """Share of the wanted terms present in the document's title+keywords."""
    if not terms:
        return 0.0
    return len(terms & doc.terms()) / len(terms)


def objective_relevance(index: cp.CorpusIndex, doc_id: str,
                        constraints: Sequence[cp.BooleanQuery]) -> float:
    """1.0 when every constraint conjunct holds, else the satisfied fraction."""
    if not constraints:
        return 0.0
    satisfied = sum(1 for c in constraints
                    if doc_id in cp.evaluate_query(index, c))
    return satisfied / len(constraints)


def compute_results(index: cp.CorpusIndex, user_state: UserState,
                    q: cp.BooleanQuery, config: AdaptationConfig,
                    reference_year: int | None = None) -> ResultSet:
    """The full pipeline from user model to ranked subset of the corpus.

    Candidates are the documents matching the injected hard constraints when
    adaptation activates, otherwise the documents matching the query itself.
    Each candidate scores ``alpha * content + (1 - alpha) * relevance``;
    documents below ``theta`` drop out and the rest are capped at ``top_k``,
    ties broken by ascending doc_id.
    """
    if reference_year is None:
        reference_year = config.reference_year
    if reference_year is None:
        raise AdaptationError("no reference year configured")

    history = []
    for event in user_state.activities:
        if event.kind != "query_issued" or not event.text:
            continue
        try:
            history.append(cp.parse_query(event.text))
        except (cp.EmptyQuery, cp.ParseError):
            continue
    explicit = explicit_objectives(history, config)
    fused = fuse_objectives(user_state.objective_posterior, explicit,
                            config.lambda_weight)
    adapted = adapt_query(q, fused, user_state, reference_year, config)

    if adapted.activated:
        candidates = cp.evaluate_query(index, cp.and_all(adapted.hard_constraints))
        scoring_constraints: tuple[cp.BooleanQuery, ...] = adapted.hard_constraints
    else:
        candidates = cp.evaluate_query(index, q)
        # Relevance is still scored against the leading objective when its
        # template resolves; a below-threshold or unresolvable objective
        # contributes zero.
        winner, _ = _winning_objective(fused)
        template = config.templates.get(winner)
        scoring_constraints = ()
        if template is not None:
            try:
                scoring_constraints = build_constraints(
                    template, user_state, reference_year)
            except AdaptationError:
                scoring_constraints = ()

    wanted_terms = cp.query_terms(q) | {
        token for term in adapted.soft_terms for token in cp.tokenize(term)}
    scored = []
    for doc_id in candidates:
        doc = index.documents[doc_id]
        score = (config.alpha * content_match(doc, wanted_terms)
                 + (1.0 - config.alpha)
                 * objective_relevance(index, doc_id, scoring_constraints))
        if score >= config.theta:
            scored.append((doc_id, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    ranked = tuple(scored[:config.top_k])

    result = ResultSet(ranked=ranked, adapted_query=adapted,
                       objective_used=fused, summary=())
    summary = summarize(index, result, config.group_by)
    return ResultSet(ranked=ranked, adapted_query=adapted,
                     objective_used=fused, summary=tuple(summary))


def summarize(index: cp.CorpusIndex, result: ResultSet,
              group_by: str) -> list[tuple[str, int]]:
    """Counts per attribute value among the result's documents, descending by
    count then ascending by value; multi-valued attributes count once per
    value a document carries."""
    if group_by not in cp.ATTRIBUTES:
        raise SummaryError(f"cannot group by unknown attribute {group_by!r}")
    counts: dict[str, int] = {}
    for doc_id, _ in result.ranked:
        doc = index.document(doc_id)
        values = {"author": doc.authors,
                  "venue_name": (doc.venue_name,),
                  "venue_type": (doc.venue_type,),
                  "year": (str(doc.year),),
                  "team": doc.team_ids}[group_by]
        for value in values:
            counts[value] = counts.get(value, 0) + 1
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))
