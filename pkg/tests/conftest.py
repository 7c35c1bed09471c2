from __future__ import annotations

import itertools
import math
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adasearch import adaptation, corpus, dbn, service, user_model

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"


# ---------------------------------------------------------------------------
# Shipped fixtures
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def fixture_docs() -> list[corpus.Document]:
    return corpus.load_corpus(DATA / "corpus.jsonl")


@pytest.fixture(scope="session")
def fixture_index(fixture_docs) -> corpus.CorpusIndex:
    return corpus.ingest_corpus(fixture_docs)


@pytest.fixture(scope="session")
def network_spec() -> dbn.NetworkSpec:
    return dbn.load_network(DATA / "network.yaml")


@pytest.fixture(scope="session")
def user_config() -> user_model.UserModelConfig:
    return user_model.load_user_model_config(DATA / "lexicons.yaml")


@pytest.fixture(scope="session")
def adaptation_config() -> adaptation.AdaptationConfig:
    return adaptation.load_adaptation_config(DATA / "adaptation.yaml")


@pytest.fixture()
def engine(tmp_path) -> service.Engine:
    config = service.load_service_config(DATA / "service.yaml")
    from dataclasses import replace
    config = replace(config, data_dir=tmp_path / "var")
    return service.Engine(config)


@pytest.fixture()
def manager(network_spec, user_config) -> user_model.SessionManager:
    return user_model.SessionManager(network_spec, user_config)


# ---------------------------------------------------------------------------
# Distribution hygiene helper
# ---------------------------------------------------------------------------

def assert_distribution(dist, tol: float = 1e-12) -> None:
    values = list(dist.values()) if hasattr(dist, "values") else list(dist)
    assert all(v >= 0 for v in values), f"negative entry in {dist!r}"
    total = math.fsum(values)
    assert abs(total - 1.0) <= tol, f"sums to {total!r}"


# ---------------------------------------------------------------------------
# Random generators shared by the dbn property tests and the acceptance gate
# ---------------------------------------------------------------------------

def random_distribution(rng: random.Random, size: int) -> list[float]:
    raw = [rng.gammavariate(1.0, 1.0) + 1e-4 for _ in range(size)]
    total = math.fsum(raw)
    return [x / total for x in raw]


def random_network(rng: random.Random, max_hidden: int = 4,
                   max_domain: int = 3) -> dbn.NetworkSpec:
    """A random valid spec: hidden chain with random dynamics/edges plus one
    or two observed variables hanging off random hidden parents."""
    n_hidden = rng.randint(1, max_hidden)
    hidden_names = [f"h{i}" for i in range(n_hidden)]
    variables = []
    for name in hidden_names:
        domain = tuple(f"{name}v{j}" for j in range(rng.randint(2, max_domain)))
        dynamics = rng.choice((dbn.STATIC, dbn.TEMPORAL))
        variables.append(dbn.Variable(name, domain, dbn.HIDDEN, dynamics))
    temporal = [v for v in variables if v.dynamics == dbn.TEMPORAL]

    intra_edges: list[tuple[str, str]] = []
    inter_edges: list[tuple[str, str]] = []
    for i, child in enumerate(variables):
        if child.dynamics != dbn.TEMPORAL:
            continue
        if rng.random() < 0.8:
            inter_edges.append((child.name, child.name))
        # Intra parents only from earlier variables keeps the slice acyclic.
        for parent in variables[:i]:
            if rng.random() < 0.4:
                intra_edges.append((parent.name, child.name))
        if rng.random() < 0.3:
            other = rng.choice(variables)
            if other.name != child.name:
                inter_edges.append((other.name, child.name))

    n_observed = rng.randint(1, 2)
    observed = []
    for k in range(n_observed):
        name = f"o{k}"
        domain = tuple(f"{name}v{j}" for j in range(rng.randint(2, max_domain)))
        observed.append(dbn.Variable(name, domain, dbn.OBSERVED, dbn.TEMPORAL))
        parents = rng.sample(variables, rng.randint(1, len(variables)))
        intra_edges.extend((p.name, name) for p in parents)
    variables = variables + observed
    inter_edges = sorted(set(inter_edges))

    spec_skeleton = dbn.NetworkSpec(
        variables=tuple(variables),
        intra_edges=tuple(intra_edges),
        inter_edges=tuple(inter_edges),
        cpts={},
        priors={},
    )
    priors = {
        v.name: dict(zip(v.domain, random_distribution(rng, len(v.domain))))
        for v in variables if v.kind == dbn.HIDDEN
    }
    cpts = {}
    by_name = {v.name: v for v in variables}
    for v in variables:
        if v.kind == dbn.HIDDEN and v.dynamics == dbn.STATIC:
            continue
        parents = spec_skeleton.parents_of(v.name)
        parent_domains = [
            by_name[p[:-len(dbn.PREV_SUFFIX)] if p.endswith(dbn.PREV_SUFFIX) else p].domain
            for p in parents
        ]
        rows = {
            key: dict(zip(v.domain, random_distribution(rng, len(v.domain))))
            for key in itertools.product(*parent_domains)
        }
        cpts[v.name] = dbn.Cpt(v.name, parents, rows)
    spec = dbn.NetworkSpec(
        variables=tuple(variables),
        intra_edges=tuple(intra_edges),
        inter_edges=tuple(inter_edges),
        cpts=cpts,
        priors=priors,
    )
    assert not dbn.validate_network(spec)
    return spec


def random_evidence_sequence(rng: random.Random, spec: dbn.NetworkSpec,
                             n_slices: int) -> list[dict[str, str]]:
    sequence = []
    for _ in range(n_slices):
        evidence = {}
        for v in spec.observed:
            if rng.random() < 0.7:
                evidence[v.name] = rng.choice(v.domain)
        sequence.append(evidence)
    return sequence


def joint_state_count(spec: dbn.NetworkSpec) -> int:
    count = 1
    for v in spec.hidden:
        count *= len(v.domain)
    return count


def random_filterable_case(rng: random.Random, max_trajectories: int = 300_000):
    """(spec, evidence_sequence) sized so the enumeration oracle stays cheap."""
    while True:
        spec = random_network(rng)
        n = joint_state_count(spec)
        slices = rng.randint(1, 5)
        if n ** (slices + 1) <= max_trajectories:
            return spec, random_evidence_sequence(rng, spec, slices)


# ---------------------------------------------------------------------------
# Random corpora and query trees
# ---------------------------------------------------------------------------

VOCAB = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
         "iota", "kappa")
AUTHOR_POOL = ("ana", "ben", "cleo", "dmitri", "eva", "farid")
VENUE_POOL = (("Modeling Letters", "journal"), ("Search Quarterly", "journal"),
              ("Abstraction Summit", "conference"), ("Field Notes", "report"))
TEAM_POOL = ("t-red", "t-blue", "t-green")


def random_docs(rng: random.Random, count: int) -> list[corpus.Document]:
    docs = []
    for i in range(count):
        venue, venue_type = rng.choice(VENUE_POOL)
        docs.append(corpus.Document(
            doc_id=f"r{i:03d}",
            title=" ".join(rng.sample(VOCAB, rng.randint(1, 4))),
            authors=tuple(rng.sample(AUTHOR_POOL, rng.randint(1, 3))),
            venue_name=venue,
            venue_type=venue_type,
            year=rng.randint(1998, 2010),
            keywords=tuple(rng.sample(VOCAB, rng.randint(0, 2))),
            team_ids=tuple(rng.sample(TEAM_POOL, rng.randint(0, 2))),
        ))
    return docs


def random_query(rng: random.Random, depth: int) -> corpus.BooleanQuery:
    if depth <= 0 or rng.random() < 0.3:
        choice = rng.random()
        if choice < 0.5:
            return corpus.Term(rng.choice(VOCAB))
        if choice < 0.65:
            return corpus.AttrEq("author", rng.choice(AUTHOR_POOL))
        if choice < 0.8:
            return corpus.AttrEq("venue_type",
                                 rng.choice(("journal", "conference", "report")))
        if choice < 0.9:
            return corpus.AttrEq("team", rng.choice(TEAM_POOL))
        return corpus.AttrCmp("year", rng.choice((">=", "<=", "=")),
                              rng.randint(1998, 2010))
    kind = rng.random()
    if kind < 0.4:
        return corpus.And(random_query(rng, depth - 1), random_query(rng, depth - 1))
    if kind < 0.8:
        return corpus.Or(random_query(rng, depth - 1), random_query(rng, depth - 1))
    return corpus.Not(random_query(rng, depth - 1))
