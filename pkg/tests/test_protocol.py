import json
import re
import socket
import threading
from collections import Counter

import pytest

from tomholdem.engine import ActionKind
from tomholdem.protocol import (
    ActionRequest,
    DuplicateAgentName,
    ErrorCode,
    GameSession,
    PortUnavailable,
    ProtocolClient,
    ProtocolError,
    SessionConfig,
    handle_request,
    serve,
)
from tomholdem.rng import SplitMix64

AGENTS = ["Doyle", "Stu", "Vanessa"]


def session(hands=20, seed=1, clock=None, timeout=None):
    cfg = SessionConfig(list(AGENTS), session_seed=seed, hands=hands, timeout_secs=timeout)
    s = GameSession(cfg, clock=clock) if clock else GameSession(cfg)
    s.start()
    return s


def submit(s, agent, kind, amount=0, hand_id=None):
    hid = s.state.hand_id if hand_id is None else hand_id
    return handle_request(s, {"tool": "submit_action", "agent": agent,
                              "payload": {"hand_id": hid, "kind": kind, "amount": amount}})


def random_legal(view, rng):
    legal = view["legal"]
    la = legal[rng.below(len(legal))]
    amount = la["min"] + rng.below(la["max"] - la["min"] + 1) if la["kind"] in ("Bet", "Raise") else 0
    return la["kind"], amount


def _card_present(token: str, text: str) -> bool:
    return re.search(rf"(?<![A-Za-z0-9]){token}(?![A-Za-z0-9])", text) is not None


def test_duplicate_agent_name():
    with pytest.raises(DuplicateAgentName):
        SessionConfig(["Doyle", "Doyle", "Stu"])


def test_default_port_is_3000():
    assert SessionConfig().port == 3000


def test_unknown_agent():
    s = session()
    resp = handle_request(s, {"tool": "get_state", "agent": "Phil", "payload": {}})
    assert resp == {"ok": False, "state": None, "error": {"code": "UnknownAgent", "detail": "'Phil' is not registered"}}


@pytest.mark.parametrize("raw", [
    b"not json",
    "[1, 2]",
    {"tool": "shout", "agent": "Doyle"},
    {"tool": "get_state", "agent": 3},
    {"tool": "submit_action", "agent": "Doyle", "payload": {"kind": "Call"}},
    {"tool": "submit_action", "agent": "Doyle", "payload": {"hand_id": 1, "kind": "Jump"}},
    {"tool": "submit_action", "agent": "Doyle", "payload": {"hand_id": 1, "kind": "Raise", "amount": -5}},
    {"tool": "submit_action", "agent": "Doyle", "payload": "Call"},
])
def test_malformed_requests(raw):
    s = session()
    before = s.state
    resp = handle_request(s, raw)
    assert not resp["ok"] and resp["error"]["code"] == "MalformedRequest"
    assert s.state is before


def test_view_off_turn_and_preflop_shape():
    s = session()
    actor = s.state.actor
    other = next(a for a in AGENTS if a != actor)
    v = s.get_state(other)
    assert not v.is_your_turn and v.legal == []
    assert v.board == [] and len(v.your_hole) == 2
    assert s.get_state(actor).is_your_turn and s.get_state(actor).legal


def test_out_of_turn_leaves_state_unchanged():
    s = session()
    actor = s.state.actor
    other = next(a for a in AGENTS if a != actor)
    before = json.dumps(s.get_state(actor).to_dict())
    resp = submit(s, other, "Fold")
    assert resp["error"]["code"] == "NotYourTurn"
    assert json.dumps(s.get_state(actor).to_dict()) == before


def test_stale_hand_and_illegal_action():
    s = session()
    actor = s.state.actor
    assert submit(s, actor, "Call", hand_id=s.state.hand_id - 1)["error"]["code"] == "StaleHand"
    assert submit(s, actor, "Check")["error"]["code"] == "IllegalAction"  # facing the big blind
    assert submit(s, actor, "Raise", 150)["error"]["code"] == "IllegalAction"


def test_legal_call_advances_the_turn():
    s = session()
    actor = s.state.actor
    resp = submit(s, actor, "Call")
    assert resp["ok"]
    view = resp["state"]
    assert view["committed"][actor] == 100
    assert view["actor"] != actor and not view["is_your_turn"]
    assert view["action_history"][-1]["kind"] == "Call"


def test_flop_view_has_three_board_cards():
    s = session()
    submit(s, s.state.actor, "Call")
    submit(s, s.state.actor, "Call")
    submit(s, s.state.actor, "Check")
    assert s.state.street.value == "Flop"
    assert len(s.get_state("Doyle").board) == 3


def test_redaction_string_scan_over_random_play():
    rng = SplitMix64(2024)
    s = session(hands=30, seed=9)
    views = 0
    while not s.over:
        for agent in AGENTS:
            resp = handle_request(s, {"tool": "get_state", "agent": agent, "payload": {}})
            text = json.dumps(resp)
            if s.state.street.value != "Showdown" and not s.state.hand_over:
                for p in s.state.players:
                    if p.name != agent:
                        for card in p.hole:
                            assert not _card_present(str(card), text), (agent, str(card))
            views += 1
        actor = s.state.actor
        view = handle_request(s, {"tool": "get_state", "agent": actor, "payload": {}})["state"]
        kind, amount = random_legal(view, rng)
        assert submit(s, actor, kind, amount)["ok"]
    assert views > 60


def test_concurrent_submissions_serialize():
    """Three agents hammer the session at once; no accepted action may be lost or doubled."""
    for seed in range(10):
        s = session(seed=seed, hands=3)
        finished = []
        s.on_hand_complete.append(finished.append)
        accepted, lock = [], threading.Lock()
        barrier = threading.Barrier(3)

        def go(agent):
            rng = SplitMix64(seed * 10 + AGENTS.index(agent))
            barrier.wait()
            for _ in range(40):
                hid = s.state.hand_id
                kind = [ActionKind.Call, ActionKind.Check, ActionKind.Fold][rng.below(3)]
                try:
                    s.submit_action(agent, ActionRequest(hid, kind))
                except ProtocolError as err:
                    assert err.code in (ErrorCode.NotYourTurn, ErrorCode.IllegalAction, ErrorCode.StaleHand)
                    continue
                with lock:
                    accepted.append((hid, agent, kind))

        threads = [threading.Thread(target=go, args=(a,)) for a in AGENTS]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        hands = finished + ([] if s.over else [s.state])
        logged = Counter((h.hand_id, r.actor, r.kind) for h in hands for r in h.action_log
                         if r.kind != ActionKind.PostBlind)
        assert logged == Counter(accepted)
        assert s.state.chips_in_play() == 30_000


def test_timeout_auto_folds_or_checks():
    now = [0.0]
    s = session(clock=lambda: now[0], timeout=30)
    actor = s.state.actor
    now[0] = 29.9
    assert not s.tick()
    now[0] = 30.0
    view = s.get_state(actor)
    assert s.timeouts == 1
    assert view.statuses[actor] == "Folded"
    # the big blind, unraised after a fold and a call, is auto-checked rather than folded
    submit(s, s.state.actor, "Call")
    bb = s.state.actor
    now[0] = 100.0
    s.tick()
    assert s.state.action_log[-1].kind in (ActionKind.Check,)
    assert s.state.action_log[-1].actor == bb


def _free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_wire_round_trip_plays_a_session():
    cfg = SessionConfig(list(AGENTS), session_seed=5, hands=5, timeout_secs=None, port=_free_port())
    rng = SplitMix64(3)
    with serve(cfg) as handle:
        clients = {a: ProtocolClient(port=handle.port) for a in AGENTS}
        try:
            assert clients["Doyle"].call({"tool": "nope", "agent": "Doyle"})["error"]["code"] == "MalformedRequest"
            steps = 0
            while True:
                views = {a: c.get_state(a)["state"] for a, c in clients.items()}
                if views["Doyle"]["session_over"]:
                    break
                actor = next(a for a, v in views.items() if v["is_your_turn"])
                kind, amount = random_legal(views[actor], rng)
                resp = clients[actor].submit_action(actor, views[actor]["hand_id"], kind, amount)
                assert resp["ok"], resp
                steps += 1
            assert views["Doyle"]["hands_played"] == 5
            assert sum(views["Doyle"]["stacks"].values()) == 30_000
            assert steps >= 5
        finally:
            for c in clients.values():
                c.close()
        assert handle.wait(5)


def test_port_in_use():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        sock.listen()
        port = sock.getsockname()[1]
        with pytest.raises(PortUnavailable):
            serve(SessionConfig(list(AGENTS), port=port))
