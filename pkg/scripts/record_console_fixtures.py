#!/usr/bin/env python3
"""Record live-service fixtures for the web console's contract tests.

Drives the HTTP API through one console-style session (profile edit, two
dialogue turns, a query, a result click) and captures everything the console
tests need: the posted activity bodies with their responses, each state
snapshot, the query result, the equivalent replayable activity log, and the
posterior the console would display at the end.

Writes into frontend/fixtures/.
"""
from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from fastapi.testclient import TestClient

from adasearch import service

INTERACTIONS = [
    {"kind": "profile_edit", "text": "team=t-dmg"},
    {"kind": "dialogue_utterance",
     "text": "I am a new PhD student at the university starting research"},
    {"kind": "dialogue_utterance",
     "text": "I need the list of journals where my research team has published"},
    {"kind": "query_issued", "text": "journals AND team AND published"},
    {"kind": "result_clicked", "doc_id": "d001"},
]

BASE_TIME = "2006-05-15T10:{:02d}:00Z"


def main() -> None:
    out_dir = REPO / "frontend" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)

    config = service.load_service_config(REPO / "data" / "service.yaml")
    config = replace(config, data_dir=REPO / "var" / "fixture-recording")
    engine = service.Engine(config, persist=False)
    client = TestClient(service.create_app(engine))

    opened = client.post("/sessions", json={"user_id": "console-demo"})
    session_id = opened.json()["session_id"]

    posted = []
    log_lines = []
    query_result = None
    for seq, interaction in enumerate(INTERACTIONS, start=1):
        body = {"seq": seq, "timestamp": BASE_TIME.format(seq), **interaction}
        response = client.post(f"/sessions/{session_id}/activities", json=body)
        assert response.status_code == 200, response.text
        posted.append({
            "body": body,
            "status": response.status_code,
            "state": response.json()["state"],
        })
        log_lines.append({"session_id": session_id, **body})
        if interaction["kind"] == "query_issued":
            result = client.post(f"/sessions/{session_id}/query",
                                 json={"query": interaction["text"]})
            assert result.status_code == 200, result.text
            query_result = result.json()

    final_state = client.get(f"/sessions/{session_id}/state").json()

    (out_dir / "recorded_session.json").write_text(json.dumps({
        "open": {"request": {"user_id": "console-demo"},
                 "response": opened.json()},
        "activities": posted,
        "query_result": query_result,
        "final_state": final_state,
    }, indent=2, sort_keys=True) + "\n")
    (out_dir / "console_log.jsonl").write_text(
        "\n".join(json.dumps(line) for line in log_lines) + "\n")
    (out_dir / "displayed_posterior.json").write_text(json.dumps(
        final_state["objective_posterior"], indent=2, sort_keys=True) + "\n")
    print(f"wrote fixtures for session {session_id} to {out_dir}")


if __name__ == "__main__":
    main()
