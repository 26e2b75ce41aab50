import random

import pytest
from hypothesis import given, settings, strategies as st

from pacarena.config import RuleConfig
from pacarena.engine import GHOSTS, GhostId
from pacarena.messaging import BROADCAST, Message, MessageType, Messenger

B, P, I, S = GHOSTS


def delay_oracle(t_a, c, x, m):
    return t_a + c + x * m


def test_delivery_formula_on_random_tuples():
    rng = random.Random(2024)
    for _ in range(10_000):
        t_a, c, x, m = rng.randrange(0, 5000), rng.randrange(0, 50), rng.randrange(0, 50), rng.randrange(0, 50)
        kind = rng.choice(list(MessageType))
        messenger = Messenger(c, x, {kind: m})
        assert messenger.send(Message(B, P, kind, 1, t_a)) == delay_oracle(t_a, c, x, m)


def test_defaults_deliver_next_tick():
    messenger = Messenger.from_config(RuleConfig())
    messenger.broadcast(B, MessageType.PACMAN_SEEN, 42, tick=10)
    assert messenger.collect(P, 10) == []
    got = messenger.collect(P, 11)
    assert [(m.sender, m.data, m.tick) for m in got] == [(B, 42, 10)]


def test_broadcast_reaches_the_other_three():
    messenger = Messenger()
    messenger.broadcast(I, MessageType.I_AM, 7, tick=0)
    assert messenger.pending == 3
    assert messenger.collect(I, 5) == []
    for g in (B, P, S):
        assert [m.data for m in messenger.collect(g, 5)] == [7]


def test_unicast_goes_to_one_recipient():
    messenger = Messenger()
    messenger.send(Message(B, S, MessageType.I_AM_HEADING, 3, 0))
    assert messenger.collect(P, 9) == []
    assert len(messenger.collect(S, 9)) == 1


def test_fifo_by_due_tick_then_send_order():
    messenger = Messenger(1, 1, {MessageType.PACMAN_SEEN: 5})
    messenger.send(Message(B, P, MessageType.PACMAN_SEEN, 1, 0))  # due 6
    messenger.send(Message(I, P, MessageType.I_AM, 2, 0))  # due 1
    messenger.send(Message(S, P, MessageType.I_AM, 3, 0))  # due 1
    assert [m.data for m in messenger.collect(P, 1)] == [2, 3]
    assert [m.data for m in messenger.collect(P, 10)] == [1]


def test_reset_clears_pending():
    messenger = Messenger()
    messenger.broadcast(B, MessageType.PACMAN_SEEN, 1, 0)
    messenger.reset()
    assert messenger.pending == 0 and messenger.cleared == 3
    assert messenger.collect(P, 100) == []


def test_invalid_messages():
    with pytest.raises(ValueError):
        Message(B, B, MessageType.I_AM, 1, 0)
    with pytest.raises(TypeError):
        Message(B, P, MessageType.I_AM, "node 4", 0)
    with pytest.raises(TypeError):
        Message(B, P, MessageType.I_AM, 1.5, 0)
    with pytest.raises(ValueError):
        Messenger(-1, 1)
    with pytest.raises(ValueError):
        Messenger(1, 1, {MessageType.I_AM: -2})


def test_broadcast_sentinel():
    msg = Message(B, BROADCAST, MessageType.I_AM, 0, 0)
    assert msg.is_broadcast and msg.recipient == "BROADCAST"
    assert Message(0, 2, MessageType.I_AM, 0, 0).recipient is GhostId.INKY


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(-1, 3), st.integers(0, 30), st.integers(0, 40)),
                max_size=40),
       st.lists(st.integers(0, 80), max_size=10),
       st.booleans())
def test_conservation(sends, polls, reset_midway):
    messenger = Messenger(1, 2, {MessageType.PACMAN_SEEN: 3})
    for k, (sender, to, data, tick) in enumerate(sends):
        recipient = BROADCAST if to < 0 or to == sender else to
        messenger.send(Message(sender, recipient, MessageType.PACMAN_SEEN, data, tick))
        if reset_midway and k == len(sends) // 2:
            messenger.reset()
    for now in sorted(polls):
        for g in GHOSTS:
            for m in messenger.collect(g, now):
                assert messenger.delivery_tick(m.type, m.tick) <= now
    assert messenger.sent == messenger.delivered + messenger.pending + messenger.cleared
