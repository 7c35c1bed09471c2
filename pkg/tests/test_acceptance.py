"""Acceptance gate: one test per criterion, each printing a PASS line with
its elapsed time (run with ``pytest tests/test_acceptance.py -v -s``).

The whole gate exercises only the Python engine; nothing here needs the web
console to be built or running.
"""
from __future__ import annotations

import collections
import json
import random
import time
from dataclasses import replace
from fractions import Fraction

import pytest

from adasearch import adaptation as ad, corpus as cp, dbn, service
from adasearch import user_model as um

from conftest import (
    DATA,
    assert_distribution,
    random_distribution,
    random_docs,
    random_filterable_case,
    random_query,
)
from oracles import dirichlet_posterior_mean, naive_eval


def _report(name: str, started: float) -> None:
    print(f"ACCEPTANCE {name}: PASS ({time.monotonic() - started:.2f}s)")


def _fresh_engine(tmp_path) -> service.Engine:
    config = service.load_service_config(DATA / "service.yaml")
    config = replace(config, data_dir=tmp_path / "var")
    return service.Engine(config, persist=False)


# ---------------------------------------------------------------------------
# 1. Scenario reproduction
# ---------------------------------------------------------------------------

def test_scenario_reproduction(tmp_path):
    started = time.monotonic()
    engine = _fresh_engine(tmp_path)
    docs = corpus_docs = cp.load_corpus(DATA / "corpus.jsonl")

    # Fixture shape: ~50 records, venue and author variety, 1998-2006.
    assert len(docs) == 50
    journals = {d.venue_name for d in docs if d.venue_type == "journal"}
    non_journals = {d.venue_name for d in docs if d.venue_type != "journal"}
    assert len(journals) >= 3
    assert len(non_journals) >= 2
    assert any("t-dmg" in d.team_ids for d in docs)
    assert any(not d.team_ids for d in docs)
    years = {d.year for d in docs}
    assert min(years) == 1998 and max(years) == 2006

    report = service.replay(engine, DATA / "scenario_log.jsonl")
    final = report[-1]
    posterior = final["objective_posterior"]
    assert max(posterior, key=posterior.get) == "journal_list_for_team"
    assert_distribution(posterior)

    result = final["result"]
    assert result["activated"]
    assert "year>=2003" in result["adapted_query"]

    oracle_set = {
        d.venue_name for d in corpus_docs
        if d.venue_type == "journal" and "t-dmg" in d.team_ids and d.year >= 2003
    }
    summary_keys = {value for value, _ in result["summary"]}
    assert summary_keys == oracle_set
    assert oracle_set == {"Data Mining Review", "Information Filtering Letters"}

    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"scenario took {elapsed:.2f}s"
    _report("scenario reproduction", started)


# ---------------------------------------------------------------------------
# 2. Inference correctness: filtering vs trajectory enumeration
# ---------------------------------------------------------------------------

def test_inference_matches_enumeration_on_200_random_specs():
    started = time.monotonic()
    rng = random.Random(20060815)
    worst = 0.0
    for _ in range(200):
        spec, evidence = random_filterable_case(rng, max_trajectories=1_000_000)
        assert len(spec.hidden) <= 4
        assert all(len(v.domain) <= 3 for v in spec.hidden)
        assert len(evidence) <= 5

        belief = dbn.init_belief(spec)
        for e in evidence:
            belief = dbn.filter_step(belief, e, spec)
        oracle = dbn.enumerate_joint(spec, evidence)

        filtered = belief.as_dict()
        for assignment, p in oracle.posterior.items():
            worst = max(worst, abs(filtered[assignment] - p))
        for variable in belief.hidden_names:
            marginal = dbn.query_posterior(belief, variable)
            oracle_marginal = oracle.marginal(variable)
            for value, p in marginal.items():
                worst = max(worst, abs(oracle_marginal[value] - p))
    assert worst <= 1e-9, f"max |filter - enumeration| = {worst:.3e}"

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"inference check took {elapsed:.2f}s"
    _report(f"inference correctness (max diff {worst:.2e})", started)


# ---------------------------------------------------------------------------
# 3. Distribution hygiene
# ---------------------------------------------------------------------------

def test_distribution_hygiene_sweep(network_spec, user_config):
    started = time.monotonic()
    rng = random.Random(93)

    # Belief pipelines, including steps with ignored evidence and clamps.
    for _ in range(25):
        spec, evidence = random_filterable_case(rng, max_trajectories=50_000)
        belief = dbn.init_belief(spec)
        assert_distribution(belief.joint_belief())
        for e in evidence:
            belief = dbn.filter_step(belief, e, spec)
            assert_distribution(belief.joint_belief())
            for variable in belief.hidden_names:
                assert_distribution(dbn.query_posterior(belief, variable))
        oracle = dbn.enumerate_joint(spec, evidence)
        assert_distribution(oracle.posterior)

    # Count-table rows.
    spec, _ = random_filterable_case(rng, max_trajectories=1_000)
    counts = dbn.CountTable.from_spec(spec, pseudo_count=0.7)
    for variable, rows in counts.counts.items():
        for key in rows:
            assert_distribution(counts.row_distribution(variable, key))

    # Session posteriors under the shipped deployment.
    manager = um.SessionManager(network_spec, user_config)
    sid = manager.open_session("u1", {"role": "new_phd_student"})
    texts = ["hello", "list of journals where my research team published",
             "deadline for the conference workshop proceedings",
             "recent years since 2003", "anything at all"]
    assert_distribution(manager.get_user_state(sid).objective_posterior)
    for i, text in enumerate(texts, start=1):
        state = manager.record_activity(sid, um.ActivityEvent(
            sid, i, "2006-05-15T09:00:00Z", "dialogue_utterance", text))
        assert_distribution(state.objective_posterior)

    # Fusion outputs.
    for _ in range(25):
        lam = rng.random()
        keys = ("a", "b", "c")
        p = dict(zip(keys, random_distribution(rng, 3)))
        q = dict(zip(keys, random_distribution(rng, 3)))
        assert_distribution(ad.fuse_objectives(p, q, lam))

    _report("distribution hygiene", started)


# ---------------------------------------------------------------------------
# 4. CPT learning vs the closed-form Dirichlet posterior mean
# ---------------------------------------------------------------------------

def _counting_network(n_hidden_values: int, n_observed_values: int):
    hidden_domain = tuple(f"h{i}" for i in range(n_hidden_values))
    observed_domain = tuple(f"o{i}" for i in range(n_observed_values))
    uniform_h = {v: 1.0 / n_hidden_values for v in hidden_domain}
    return dbn.NetworkSpec(
        variables=(
            dbn.Variable("h", hidden_domain, dbn.HIDDEN, dbn.TEMPORAL),
            dbn.Variable("o", observed_domain, dbn.OBSERVED, dbn.TEMPORAL),
        ),
        intra_edges=(("h", "o"),),
        inter_edges=(("h", "h"),),
        cpts={
            "h": dbn.Cpt("h", ("h@prev",), {
                (v,): dict(uniform_h) for v in hidden_domain}),
            "o": dbn.Cpt("o", ("h",), {
                (v,): {w: 1.0 / n_observed_values for w in observed_domain}
                for v in hidden_domain}),
        },
        priors={"h": dict(uniform_h)},
    )


def test_cpt_learning_matches_closed_form():
    started = time.monotonic()
    rng = random.Random(404)
    for _ in range(50):
        spec = _counting_network(rng.randint(2, 3), rng.randint(2, 4))
        observed_domain = spec.variable("o").domain
        hidden_value = rng.choice(spec.variable("h").domain)
        pseudo = rng.randint(1, 4)
        counts = dbn.CountTable.from_spec(spec, pseudo_count=pseudo)

        draws = [rng.choice(observed_domain) for _ in range(rng.randint(0, 30))]
        case = [{"h": hidden_value, "o": value} for value in draws]
        updated = dbn.update_parameters(counts, case)

        tally = collections.Counter(draws)
        expected = dirichlet_posterior_mean(
            [pseudo] * len(observed_domain),
            {i: tally[value] for i, value in enumerate(observed_domain)})
        row = updated.row_distribution("o", (hidden_value,))
        for i, value in enumerate(observed_domain):
            assert abs(row[value] - float(expected[i])) <= 1e-12
        assert sum(Fraction(x) for x in expected) == 1
        assert_distribution(row)

        # Rows for other parent values keep the prior mean.
        for other in spec.variable("h").domain:
            if other != hidden_value:
                row = updated.row_distribution("o", (other,))
                assert row == pytest.approx(
                    {v: 1 / len(observed_domain) for v in observed_domain})
    _report("cpt learning", started)


# ---------------------------------------------------------------------------
# 5. Query engine vs naive per-document evaluation
# ---------------------------------------------------------------------------

def test_query_engine_matches_naive_evaluation():
    started = time.monotonic()
    rng = random.Random(1998)
    for _ in range(100):
        docs = random_docs(rng, rng.randint(0, 120))
        index = cp.ingest_corpus(docs)
        q1 = random_query(rng, depth=4)
        q2 = random_query(rng, depth=4)
        assert cp.evaluate_query(index, q1) == naive_eval(docs, q1)
        assert cp.evaluate_query(index, q2) == naive_eval(docs, q2)
        # De Morgan over the generated trees.
        assert cp.evaluate_query(index, cp.Not(cp.And(q1, q2))) == \
            cp.evaluate_query(index, cp.Or(cp.Not(q1), cp.Not(q2)))
        assert cp.evaluate_query(index, cp.Not(cp.Or(q1, q2))) == \
            cp.evaluate_query(index, cp.And(cp.Not(q1), cp.Not(q2)))
    _report("query engine", started)


# ---------------------------------------------------------------------------
# 6. Fusion identities
# ---------------------------------------------------------------------------

def test_fusion_identities():
    started = time.monotonic()
    rng = random.Random(55)
    for _ in range(100):
        keys = tuple(f"k{i}" for i in range(rng.randint(2, 5)))
        p = dict(zip(keys, random_distribution(rng, len(keys))))
        q = dict(zip(keys, random_distribution(rng, len(keys))))
        assert ad.fuse_objectives(p, q, 1.0) == p
        assert ad.fuse_objectives(p, q, 0.0) == q
        assert ad.fuse_objectives(p, q, 0.5) == ad.fuse_objectives(q, p, 0.5)
    _report("fusion identities", started)


# ---------------------------------------------------------------------------
# 7. Replay determinism
# ---------------------------------------------------------------------------

def test_replay_determinism(tmp_path):
    started = time.monotonic()

    renders = []
    for attempt in ("a", "b"):
        engine = _fresh_engine(tmp_path / attempt)
        renders.append(service.render_report(
            service.replay(engine, DATA / "scenario_log.jsonl")))
    assert renders[0] == renders[1]

    # A second, machine-captured log with clicks and a second query.
    log_path = tmp_path / "captured.jsonl"
    events = [
        {"session_id": "cap", "seq": 1, "timestamp": "2006-06-01T10:00:00Z",
         "kind": "profile_edit", "text": "team=t-dmg"},
        {"session_id": "cap", "seq": 2, "timestamp": "2006-06-01T10:00:05Z",
         "kind": "query_issued", "text": "venue_type=conference"},
        {"session_id": "cap", "seq": 3, "timestamp": "2006-06-01T10:00:09Z",
         "kind": "result_clicked", "doc_id": "d017"},
        {"session_id": "cap", "seq": 5, "timestamp": "2006-06-01T10:00:21Z",
         "kind": "dialogue_utterance",
         "text": "show the conference workshop proceedings deadline"},
        {"session_id": "cap", "seq": 8, "timestamp": "2006-06-01T10:00:30Z",
         "kind": "query_issued", "text": "clustering OR ranking"},
    ]
    log_path.write_text("\n".join(json.dumps(e) for e in events) + "\n")
    renders = []
    for attempt in ("c", "d"):
        engine = _fresh_engine(tmp_path / attempt)
        renders.append(service.render_report(service.replay(engine, log_path)))
    assert renders[0] == renders[1]
    _report("replay determinism", started)
