"""
Testes básicos para verificar se o servidor stub de decisão está funcionando.
"""
import pytest
from fastapi.testclient import TestClient

from src.api.dependencies import StubReplier, get_stub_replier
from src.main import app
from src.services.decision_prompt import parse_response

client = TestClient(app)

PAYLOAD = {
    "model": "stub",
    "messages": [{"role": "user", "content": "Now, decide your order."}],
    "temperature": 1.0,
}


@pytest.fixture
def replier():
    """Substitui o gerador de respostas por um novo, no modo alternate."""
    stub = StubReplier("alternate")
    app.dependency_overrides[get_stub_replier] = lambda: stub
    yield stub
    app.dependency_overrides.clear()


def test_read_root():
    """Testa o endpoint raiz da aplicação."""
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["status"] == "online"
    assert "Stub de decisão" in response.json()["message"]


def test_status():
    response = client.get("/api/status")
    assert response.status_code == 200
    assert response.json()["reply_mode"] in ("buy", "sell", "alternate", "prose")


def test_completion_envelope(replier):
    response = client.post("/v1/chat/completions", json=PAYLOAD)
    assert response.status_code == 200
    body = response.json()
    assert body["object"] == "chat.completion"
    assert body["model"] == "stub"
    assert body["choices"][0]["message"]["role"] == "assistant"


def test_alternate_mode_starts_with_buy(replier):
    sides = []
    for _ in range(3):
        content = client.post("/v1/chat/completions", json=PAYLOAD).json()["choices"][0]["message"]["content"]
        sides.append(parse_response(content).is_buy)
    assert sides == [True, False, True]


@pytest.mark.parametrize("mode,is_buy", [("buy", True), ("sell", False)])
def test_header_selects_mode(replier, mode, is_buy):
    response = client.post("/v1/chat/completions", json=PAYLOAD, headers={"X-Stub-Mode": mode})
    assert parse_response(response.json()["choices"][0]["message"]["content"]).is_buy is is_buy


def test_prose_mode_is_unparseable(replier):
    response = client.post("/v1/chat/completions", json=PAYLOAD, headers={"X-Stub-Mode": "prose"})
    assert "{" not in response.json()["choices"][0]["message"]["content"]


def test_invalid_mode_rejected(replier):
    response = client.post("/v1/chat/completions", json=PAYLOAD, headers={"X-Stub-Mode": "maybe"})
    assert response.status_code == 400


def test_invalid_body_rejected():
    response = client.post("/v1/chat/completions", json={"messages": []})
    assert response.status_code == 422


def test_unknown_reply_mode():
    with pytest.raises(ValueError):
        StubReplier("hold")
