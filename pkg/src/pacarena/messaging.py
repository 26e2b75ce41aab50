"""Ghost-to-ghost messages with delayed delivery.

A message sent at tick ``t_a`` is due at ``t_a + delta_c + delta_x * delta_m``
where ``delta_m`` depends on the message type.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Union

from .config import RuleConfig
from .engine import GHOSTS, GhostId


class MessageType(str, Enum):
    PACMAN_SEEN = "pacman_seen"
    I_AM = "i_am"
    I_AM_HEADING = "i_am_heading"


BROADCAST = "BROADCAST"
Recipient = Union[GhostId, str]


@dataclass(frozen=True)
class Message:
    sender: GhostId
    recipient: Recipient
    type: MessageType
    data: int
    tick: int

    def __post_init__(self):
        if not isinstance(self.data, int) or isinstance(self.data, bool):
            raise TypeError("message data must be a single integer")
        if self.recipient != BROADCAST:
            object.__setattr__(self, "recipient", GhostId(self.recipient))
            if self.recipient == self.sender:
                raise ValueError("unicast message addressed to its own sender")
        object.__setattr__(self, "sender", GhostId(self.sender))

    @property
    def is_broadcast(self) -> bool:
        return self.recipient == BROADCAST


class Messenger:
    """Delayed-delivery queue owned by one match.

    Broadcasts are fanned out into one copy per other ghost at send time, so
    each recipient drains its own queue independently.
    """

    def __init__(
        self,
        delta_c: int = 1,
        delta_x: int = 1,
        delta_m: Optional[Mapping[MessageType, int]] = None,
    ):
        if delta_c < 0 or delta_x < 0:
            raise ValueError("delays must be non-negative")
        self.delta_c = delta_c
        self.delta_x = delta_x
        self.delta_m = {t: 0 for t in MessageType}
        if delta_m:
            for kind, value in delta_m.items():
                if value < 0:
                    raise ValueError("delays must be non-negative")
                self.delta_m[MessageType(kind)] = value
        self._queues: dict[GhostId, list] = {g: [] for g in GHOSTS}
        self._seq = itertools.count()
        self.sent = 0
        self.delivered = 0
        self.cleared = 0

    @classmethod
    def from_config(cls, config: RuleConfig) -> "Messenger":
        return cls(
            config.msg_delta_c,
            config.msg_delta_x,
            {
                MessageType.PACMAN_SEEN: config.msg_delta_m_pacman_seen,
                MessageType.I_AM: config.msg_delta_m_i_am,
                MessageType.I_AM_HEADING: config.msg_delta_m_i_am_heading,
            },
        )

    def delivery_tick(self, kind: MessageType, t_a: int) -> int:
        return t_a + self.delta_c + self.delta_x * self.delta_m[kind]

    def send(self, message: Message, t_a: Optional[int] = None) -> int:
        """Queue ``message`` and return its delivery tick."""
        t_a = message.tick if t_a is None else t_a
        due = self.delivery_tick(message.type, t_a)
        order = next(self._seq)
        if message.is_broadcast:
            targets = [g for g in GHOSTS if g != message.sender]
        else:
            targets = [message.recipient]
        for target in targets:
            heapq.heappush(self._queues[target], (due, order, message))
        self.sent += len(targets)
        return due

    def broadcast(self, sender: GhostId, kind: MessageType, data: int, tick: int) -> int:
        return self.send(Message(sender, BROADCAST, kind, data, tick))

    def collect(self, recipient: GhostId, now: int) -> list[Message]:
        queue = self._queues[GhostId(recipient)]
        out = []
        while queue and queue[0][0] <= now:
            out.append(heapq.heappop(queue)[2])
        self.delivered += len(out)
        return out

    @property
    def pending(self) -> int:
        return sum(len(q) for q in self._queues.values())

    def pending_for(self, recipient: GhostId) -> list[tuple[int, Message]]:
        return [(due, msg) for due, _, msg in sorted(self._queues[GhostId(recipient)])]

    def reset(self) -> None:
        self.cleared += self.pending
        for queue in self._queues.values():
            queue.clear()
