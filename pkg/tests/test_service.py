import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from hochcat.service import app

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def workspace_payload():
    with open(ROOT / "fixtures" / "standard.json") as fh:
        return json.load(fh)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_commands_listing(client):
    resp = client.get("/commands")
    assert resp.status_code == 200
    cmds = resp.json()["commands"]
    for expected in ["validate", "nerve", "cover", "restrict", "glue", "tensor",
                     "hom", "arrow", "recognize-arrow", "hh", "sheaf-check", "mv",
                     "support", "localize", "triangle", "censor", "groth",
                     "base-change", "cstar", "chain-mv", "compare"]:
        assert expected in cmds


def test_run_hh(client, workspace_payload):
    resp = client.post("/run", json={
        "command": "hh",
        "args": {"cat": "lambda", "max_degree": 2},
        "workspace": workspace_payload,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["exit_code"] == 0
    assert body["header"]["convention"] == "standard"
    assert [r["hh"] for r in body["records"] if "hh" in r] == [2, 1, 1]
    assert body["text"] == ["HH: 2 1 1*"]


def test_run_sheaf_check(client, workspace_payload):
    resp = client.post("/run", json={
        "command": "sheaf-check",
        "args": {"cover": "vposet.chains", "max_degree": 2},
        "workspace": workspace_payload,
    })
    assert resp.status_code == 200
    assert resp.json()["exit_code"] == 0


def test_run_rejects_invalid_workspace(client):
    resp = client.post("/run", json={
        "command": "hh",
        "args": {"cat": "x"},
        "workspace": {"categories": {"broken": {"objects": []}}},
    })
    assert resp.status_code == 422


def test_run_property_failure_reported(client, workspace_payload):
    payload = json.loads(json.dumps(workspace_payload))
    for entry in payload["descent_data"]["vposet.descent"]["isos"]:
        if entry["i"] == 0 and entry["j"] == 1:
            entry["entries"][0][2] = "2"
            break
    resp = client.post("/run", json={
        "command": "glue",
        "args": {"descent": "vposet.descent"},
        "workspace": payload,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["exit_code"] == 1
    assert any(r.get("error") == "CocycleViolated" for r in body["records"])


def test_run_unknown_command(client, workspace_payload):
    resp = client.post("/run", json={
        "command": "nope", "args": {}, "workspace": {},
    })
    assert resp.status_code == 200
    assert resp.json()["exit_code"] == 2
