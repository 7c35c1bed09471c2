#!/usr/bin/env python3
"""Regenerate data/network.yaml, the reference user-model network.

Hidden state: a static individual-characteristics variable (ic), a sticky
temporal context, and a temporal objective that depends on its own previous
value, the current context and ic. Observations: a noisy role hint, a noisy
task hint, and per-slice activity features that reflect all three hidden
variables. CPT rows come from small multiplicative affinity weights,
normalized per row.
"""
from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from adasearch.dbn import (
    Cpt,
    NetworkSpec,
    Variable,
    dump_network,
    validate_network,
)

IC = ("new_phd_student", "senior_researcher", "visiting_analyst")
CONTEXT = ("journal_list_for_team", "conference_scan", "open_exploration")
OBJECTIVE = ("journal_list_for_team", "team_publication_history", "conference_scan")

CTX_AFFINITY = {
    "journal_list_for_team": "journal_list_for_team",
    "conference_scan": "conference_scan",
    "open_exploration": None,
}
IC_AFFINITY = {
    "new_phd_student": "journal_list_for_team",
    "senior_researcher": "conference_scan",
    "visiting_analyst": "team_publication_history",
}


def normalized(weights: dict[str, float]) -> dict[str, float]:
    total = sum(weights.values())
    return {value: weight / total for value, weight in weights.items()}


def objective_row(prev: str, ctx: str, ic: str) -> dict[str, float]:
    weights = {}
    for objective in OBJECTIVE:
        w = 1.0
        if objective == prev:
            w *= 4.0
        if CTX_AFFINITY[ctx] == objective:
            w *= 5.0
        if IC_AFFINITY[ic] == objective:
            w *= 1.6
        weights[objective] = w
    return normalized(weights)


def features_row(objective: str, ctx: str, ic: str) -> dict[str, float]:
    weights = {}
    for feature in OBJECTIVE:
        w = 1.0
        if feature == objective:
            w *= 6.0
        if CTX_AFFINITY[ctx] == feature:
            w *= 1.5
        if IC_AFFINITY[ic] == feature:
            w *= 1.2
        weights[feature] = w
    return normalized(weights)


def noisy_channel(domain: tuple[str, ...], fidelity: float) -> dict:
    spread = (1.0 - fidelity) / (len(domain) - 1)
    return {
        (true,): {value: (fidelity if value == true else spread)
                  for value in domain}
        for true in domain
    }


def build() -> NetworkSpec:
    variables = (
        Variable("ic", IC, "hidden", "static"),
        Variable("context", CONTEXT, "hidden", "temporal"),
        Variable("objective", OBJECTIVE, "hidden", "temporal"),
        Variable("ic_role", IC, "observed", "temporal"),
        Variable("ctx_task", CONTEXT, "observed", "temporal"),
        Variable("activity_features", OBJECTIVE, "observed", "temporal"),
    )
    intra_edges = (
        ("context", "objective"),
        ("ic", "objective"),
        ("objective", "activity_features"),
        ("context", "activity_features"),
        ("ic", "activity_features"),
        ("ic", "ic_role"),
        ("context", "ctx_task"),
    )
    inter_edges = (("context", "context"), ("objective", "objective"))
    priors = {
        "ic": {"new_phd_student": 0.34, "senior_researcher": 0.33,
               "visiting_analyst": 0.33},
        "context": {"journal_list_for_team": 0.2, "conference_scan": 0.2,
                    "open_exploration": 0.6},
        "objective": {"journal_list_for_team": 0.34,
                      "team_publication_history": 0.33,
                      "conference_scan": 0.33},
    }
    cpts = {
        "context": Cpt("context", ("context@prev",), {
            (prev,): {ctx: (0.8 if ctx == prev else 0.1) for ctx in CONTEXT}
            for prev in CONTEXT
        }),
        "objective": Cpt("objective", ("objective@prev", "context", "ic"), {
            (prev, ctx, ic): objective_row(prev, ctx, ic)
            for prev in OBJECTIVE for ctx in CONTEXT for ic in IC
        }),
        "ic_role": Cpt("ic_role", ("ic",), noisy_channel(IC, 0.8)),
        "ctx_task": Cpt("ctx_task", ("context",), noisy_channel(CONTEXT, 0.8)),
        "activity_features": Cpt(
            "activity_features", ("objective", "context", "ic"), {
                (objective, ctx, ic): features_row(objective, ctx, ic)
                for objective in OBJECTIVE for ctx in CONTEXT for ic in IC
            }),
    }
    return NetworkSpec(variables, intra_edges, inter_edges, cpts, priors)


def main() -> None:
    spec = build()
    violations = validate_network(spec)
    if violations:
        raise SystemExit("\n".join(str(v) for v in violations))
    out = Path(__file__).resolve().parents[1] / "data" / "network.yaml"
    dump_network(spec, out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
