"""Append-only inquiry/notification log and KPI computation.

The log is a list of typed records (turn, notification, location) with
strictly increasing positions, optionally mirrored to an NDJSON file.
Annotations are reviewer labels: they may set outcome and intended intent
on a turn after the fact, never anything else. On disk an annotation is
its own appended record so the file stays append-only.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from typing import IO, Mapping, Optional

from .chat import ChatTurn, IntentCategory, IntentSet, Outcome
from .errors import BadRequest, EmptyWindow, FallbackImmutable, LogCorrupt, NotFound
from .geofence import NotificationRecord
from .model import Dish, Phase, UserProfile, rfc3339_to_ts, ts_to_rfc3339

DAY_S = 86400.0
TREND_WINDOW_S = 7 * DAY_S
ACTIVE_WINDOW_S = 30 * DAY_S


@dataclass(frozen=True)
class LocationEvent:
    user_id: str
    at: float

    def to_wire(self) -> dict:
        return {"user_id": self.user_id, "at": ts_to_rfc3339(self.at)}


Record = ChatTurn | NotificationRecord | LocationEvent


def _record_kind(record: Record) -> str:
    if isinstance(record, ChatTurn):
        return "turn"
    if isinstance(record, NotificationRecord):
        return "notification"
    return "location"


class InquiryLog:
    """Append-only event log with optional NDJSON persistence."""

    def __init__(self, path: str | None = None, _records: list[Record] | None = None):
        self._records: list[Record] = _records or []
        self._path = path
        self._fh: IO[str] | None = open(path, "a", encoding="utf-8") if path else None

    # -- appends ---------------------------------------------------------

    def _append(self, record: Record) -> int:
        position = len(self._records)
        self._records.append(record)
        self._write_line({"kind": _record_kind(record), **record.to_wire()})
        return position

    def _write_line(self, payload: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(payload, separators=(",", ":")) + "\n")
            self._fh.flush()

    def record_turn(self, turn: ChatTurn) -> int:
        return self._append(turn)

    def record_notification(self, notification: NotificationRecord) -> int:
        return self._append(notification)

    def record_location(self, user_id: str, at: float) -> int:
        return self._append(LocationEvent(user_id=user_id, at=at))

    # -- reads -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._records)

    def get(self, position: int) -> Record:
        if not 0 <= position < len(self._records):
            raise NotFound(f"unknown position {position}")
        return self._records[position]

    def turns(self) -> list[ChatTurn]:
        return [r for r in self._records if isinstance(r, ChatTurn)]

    def records(self) -> list[Record]:
        return list(self._records)

    def extent(self) -> tuple[float, float] | None:
        """(min, max) timestamp over all records, None when empty."""
        stamps = [r.at for r in self._records]
        if not stamps:
            return None
        return min(stamps), max(stamps)

    # -- annotation ------------------------------------------------------

    def annotate_turn(
        self, position: int, outcome: Outcome, annotated_intent: Optional[str] = None
    ) -> ChatTurn:
        """Set reviewer labels on a turn. The fallback outcome is sticky:
        a fallback turn can never be relabeled as anything else."""
        record = self.get(position)
        if not isinstance(record, ChatTurn):
            raise BadRequest(f"record at position {position} is not a turn")
        outcome = Outcome(outcome)
        if record.outcome is Outcome.FALLBACK and outcome is not Outcome.FALLBACK:
            raise FallbackImmutable("fallback immutable")
        updated = replace(record, outcome=outcome, annotated_intent=annotated_intent)
        self._records[position] = updated
        self._write_line(
            {
                "kind": "annotation",
                "position": position,
                "outcome": outcome.value,
                "annotated_intent": annotated_intent,
            }
        )
        return updated

    # -- persistence -----------------------------------------------------

    @classmethod
    def load(cls, path: str) -> "InquiryLog":
        """Rebuild a log from its NDJSON file; malformed records abort with
        their byte offset."""
        records: list[Record] = []
        with open(path, "rb") as fh:
            raw = fh.read()
        offset = 0
        for line in raw.split(b"\n"):
            if line.strip():
                try:
                    payload = json.loads(line)
                    record = _parse_line(payload, records)
                except (ValueError, KeyError, TypeError) as exc:
                    raise LogCorrupt(path, offset, f"bad record ({exc})") from None
                if record is not None:
                    records.append(record)
            offset += len(line) + 1
        log = cls.__new__(cls)
        log._records = records
        log._path = path
        log._fh = open(path, "a", encoding="utf-8")
        return log

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def _parse_line(payload: Mapping, records: list[Record]) -> Record | None:
    kind = payload.get("kind", "turn")
    if kind == "turn":
        return ChatTurn.from_wire(payload)
    if kind == "notification":
        return NotificationRecord(
            user_id=str(payload["user_id"]),
            dish_id=str(payload["dish_id"]),
            fence_id=str(payload["fence_id"]),
            at=rfc3339_to_ts(payload["at"]) if isinstance(payload["at"], str) else float(payload["at"]),
            message=str(payload.get("message", "")),
        )
    if kind == "location":
        at = payload["at"]
        return LocationEvent(
            user_id=str(payload["user_id"]),
            at=rfc3339_to_ts(at) if isinstance(at, str) else float(at),
        )
    if kind == "annotation":
        position = int(payload["position"])
        turn = records[position]
        if not isinstance(turn, ChatTurn):
            raise ValueError("annotation of a non-turn record")
        records[position] = replace(
            turn,
            outcome=Outcome(payload["outcome"]),
            annotated_intent=(
                None if payload.get("annotated_intent") is None else str(payload["annotated_intent"])
            ),
        )
        return None
    raise ValueError(f"unknown record kind {kind!r}")


# --------------------------------------------------------------------------
# corpus import

def parse_corpus_line(payload: Mapping, intents: IntentSet) -> ChatTurn:
    """Validate one pre-labeled corpus turn against the intent set."""
    if payload.get("kind", "turn") != "turn":
        raise ValueError("corpus lines must be turn records")
    turn = ChatTurn.from_wire(payload)
    if turn.matched_intent not in intents.by_name:
        raise ValueError(f"unknown matched intent {turn.matched_intent!r}")
    if turn.annotated_intent is not None and turn.annotated_intent not in intents.by_name:
        raise ValueError(f"unknown annotated intent {turn.annotated_intent!r}")
    if turn.matched_intent == intents.fallback_name and turn.outcome is not Outcome.FALLBACK:
        raise ValueError("fallback-matched turn without fallback outcome")
    return turn


def import_corpus(text: str, log: InquiryLog, intents: IntentSet) -> int:
    """Append every NDJSON line of `text` to the log.

    Raises BadRequest naming the 1-based line number of the first bad line;
    nothing is appended in that case.
    """
    turns = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
            turns.append(parse_corpus_line(payload, intents))
        except (ValueError, KeyError, TypeError) as exc:
            raise BadRequest(f"malformed corpus line {number}: {exc}") from None
    for turn in turns:
        log.record_turn(turn)
    return len(turns)


# --------------------------------------------------------------------------
# KPI report

@dataclass(frozen=True)
class KpiReport:
    window_from: float
    window_to: float
    total_inquiries: int
    responded: int
    fallback_count: int
    fallback_rate_pct: Optional[float]
    outcome_totals: Mapping[str, int]
    category_totals: Mapping[str, int]
    phase_totals: Mapping[str, int]
    most_talked_to: list[tuple[str, int]]
    most_popular: list[tuple[str, int]]
    trending_local: list[tuple[str, int, int]]
    registered_users: int
    active_users: int

    def to_wire(self) -> dict:
        wire = {
            "window": {"from": ts_to_rfc3339(self.window_from), "to": ts_to_rfc3339(self.window_to)},
            "total_inquiries": self.total_inquiries,
            "responded": self.responded,
            "fallback_count": self.fallback_count,
            "outcome_totals": dict(self.outcome_totals),
            "category_totals": dict(self.category_totals),
            "phase_totals": dict(self.phase_totals),
            "most_talked_to": [{"dish_id": d, "inquiries": n} for d, n in self.most_talked_to],
            "most_popular": [{"dish_id": d, "distinct_users": n} for d, n in self.most_popular],
            "trending_local": [
                {"dish_id": d, "recent": r, "prior": p} for d, r, p in self.trending_local
            ],
            "registered_users": self.registered_users,
            "active_users": self.active_users,
        }
        if self.fallback_rate_pct is not None:
            wire["fallback_rate_pct"] = self.fallback_rate_pct
        return wire


def effective_category(turn: ChatTurn, intents: IntentSet) -> IntentCategory | None:
    """The category a turn counts under.

    Non-fallback turns count under their matched intent's category; a
    fallback turn counts under the annotated (intended) intent's category
    when a reviewer set one, else nowhere.
    """
    if turn.matched_intent != intents.fallback_name:
        return intents.category_of(turn.matched_intent)
    if turn.annotated_intent is not None:
        return intents.category_of(turn.annotated_intent)
    return None


def kpi_report(
    log: InquiryLog,
    intents: IntentSet,
    dishes: Mapping[str, Dish],
    profiles: Mapping[str, UserProfile],
    window: tuple[float, float],
) -> KpiReport:
    """Aggregate every KPI over the turns inside [from, to]."""
    window_from, window_to = window
    if window_from > window_to:
        raise EmptyWindow("empty window")
    turns = [t for t in log.turns() if window_from <= t.at <= window_to]
    total = len(turns)
    responded = sum(1 for t in turns if t.responded)
    fallback_count = sum(1 for t in turns if t.matched_intent == intents.fallback_name)
    rate = round(100.0 * fallback_count / total, 1) if total else None

    outcome_totals = Counter(t.outcome.value if t.outcome else "unlabeled" for t in turns)
    for label in Outcome:
        outcome_totals.setdefault(label.value, 0)
    outcome_totals.setdefault("unlabeled", 0)

    category_totals = {c.value: 0 for c in IntentCategory if c is not IntentCategory.FALLBACK}
    for turn in turns:
        category = effective_category(turn, intents)
        if category is not None and category is not IntentCategory.FALLBACK:
            category_totals[category.value] += 1

    phase_totals = {phase.wire: 0 for phase in Phase}
    for turn in turns:
        phase_totals[turn.phase.wire] += 1

    by_dish = Counter(t.dish_id for t in turns)
    most_talked_to = sorted(by_dish.items(), key=lambda kv: (-kv[1], kv[0]))

    users_by_dish: dict[str, set[str]] = defaultdict(set)
    for turn in turns:
        users_by_dish[turn.dish_id].add(turn.user_id)
    most_popular = sorted(
        ((d, len(users)) for d, users in users_by_dish.items()), key=lambda kv: (-kv[1], kv[0])
    )

    recent_start = window_to - TREND_WINDOW_S
    prior_start = window_to - 2 * TREND_WINDOW_S
    trending: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for turn in turns:
        dish = dishes.get(turn.dish_id)
        if dish is None or not dish.local:
            continue
        if turn.at > recent_start:
            trending[turn.dish_id][0] += 1
        elif turn.at > prior_start:
            trending[turn.dish_id][1] += 1
    trending_local = sorted(
        ((d, r, p) for d, (r, p) in trending.items()),
        key=lambda row: (-(row[1] - row[2]), -row[1], row[0]),
    )

    active_start = window_to - ACTIVE_WINDOW_S
    active_ids = set()
    for record in log.records():
        if isinstance(record, (ChatTurn, LocationEvent)) and active_start <= record.at <= window_to:
            active_ids.add(record.user_id)
    active_users = sum(1 for uid in active_ids if uid in profiles)
    registered_users = sum(1 for p in profiles.values() if p.registered)

    return KpiReport(
        window_from=window_from,
        window_to=window_to,
        total_inquiries=total,
        responded=responded,
        fallback_count=fallback_count,
        fallback_rate_pct=rate,
        outcome_totals=dict(outcome_totals),
        category_totals=category_totals,
        phase_totals=phase_totals,
        most_talked_to=most_talked_to,
        most_popular=most_popular,
        trending_local=trending_local,
        registered_users=registered_users,
        active_users=active_users,
    )


def intent_matrix(log: InquiryLog, window: tuple[float, float]) -> dict[tuple[str, str], int]:
    """(annotated intent, matched intent) counts over annotated turns."""
    window_from, window_to = window
    if window_from > window_to:
        raise EmptyWindow("empty window")
    cells: Counter = Counter()
    for turn in log.turns():
        if window_from <= turn.at <= window_to and turn.annotated_intent is not None:
            cells[(turn.annotated_intent, turn.matched_intent)] += 1
    return dict(cells)


def phase_histogram(
    log: InquiryLog, window: tuple[float, float], intents: IntentSet
) -> dict[str, dict[str, int]]:
    """Counts per (phase, category); bucket sums equal the in-window total.

    Unannotated fallback turns land in a dedicated "fallback" column so
    nothing is dropped.
    """
    window_from, window_to = window
    if window_from > window_to:
        raise EmptyWindow("empty window")
    histogram = {phase.wire: {c.value: 0 for c in IntentCategory} for phase in Phase}
    for turn in log.turns():
        if not window_from <= turn.at <= window_to:
            continue
        category = effective_category(turn, intents) or IntentCategory.FALLBACK
        histogram[turn.phase.wire][category.value] += 1
    return histogram
