"""Rule-based dish conversation.

Free text is matched against intent training phrases by token-set Jaccard
similarity; below the confidence threshold the fallback intent answers and
offers three random other things to ask. Responses are templates enriched
with live dish, restaurant, time, and food-day data.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from random import Random
from typing import Callable, Iterable, Mapping, NamedTuple, Optional

from .errors import (
    BadTemplate,
    EmptyInquiry,
    InsufficientSuggestions,
    PhaseRegression,
)
from .model import Dish, Phase, Restaurant, rfc3339_to_ts, ts_to_rfc3339

TAU = 0.5  # confidence threshold; single keywords match one-word phrases
CONTEXT_K = 10  # turns kept per session

# placeholders templates may use; {suggestions} only in fallback templates
DISH_PLACEHOLDERS = frozenset(
    {"name", "nickname", "ingredients", "price", "allergens", "restaurant", "hours_today", "time", "food_day"}
)
FALLBACK_PLACEHOLDERS = DISH_PLACEHOLDERS | {"suggestions"}

VOICE_MALE = "voice_male"
VOICE_FEMALE = "voice_female"


class IntentCategory(str, Enum):
    ENTERTAINMENT = "entertainment"
    INFORMATION_ADVICE = "information_advice"
    CONTROL = "control"
    FALLBACK = "fallback"


class Outcome(str, Enum):
    """Reviewer labels for a turn; fallback is set by the engine itself."""

    APPROPRIATE = "appropriate"
    MODERATELY_APPROPRIATE = "moderately_appropriate"
    WRONG_INTENT = "wrong_intent"
    FALLBACK = "fallback"


# --------------------------------------------------------------------------
# text normalization and matching

_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")


def normalize(text: str) -> list[str]:
    """Lowercase, fold diacritics, strip punctuation, split on whitespace."""
    folded = unicodedata.normalize("NFKD", text.casefold())
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch))
    cleaned = "".join(ch if ch.isalnum() or ch.isspace() else "" for ch in folded)
    return cleaned.split()


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class Intent:
    name: str
    category: IntentCategory
    training_phrases: tuple[str, ...]
    response_templates: tuple[str, ...]
    suggestible: bool = True

    def phrase_token_sets(self) -> list[frozenset[str]]:
        return [frozenset(normalize(p)) for p in self.training_phrases]


@dataclass(frozen=True)
class IntentSet:
    """Validated intent catalog; immutable after load."""

    intents: tuple[Intent, ...]
    by_name: Mapping[str, Intent] = field(init=False, repr=False)
    fallback_name: str = field(init=False)

    def __post_init__(self) -> None:
        fallbacks = [i for i in self.intents if i.category is IntentCategory.FALLBACK]
        if len(fallbacks) != 1:
            raise ValueError(f"exactly one fallback intent required, found {len(fallbacks)}")
        if fallbacks[0].suggestible:
            raise ValueError("the fallback intent must not be suggestible")
        names = [i.name for i in self.intents]
        if len(set(names)) != len(names):
            raise ValueError("duplicate intent names")
        seen: dict[frozenset[str], str] = {}
        for intent in self.intents:
            if not intent.training_phrases:
                raise ValueError(f"intent {intent.name}: no training phrases")
            if not intent.response_templates:
                raise ValueError(f"intent {intent.name}: no response templates")
            for phrase, tokens in zip(intent.training_phrases, intent.phrase_token_sets()):
                if not tokens:
                    raise ValueError(f"intent {intent.name}: phrase {phrase!r} normalizes to nothing")
                owner = seen.setdefault(tokens, intent.name)
                if owner != intent.name:
                    raise ValueError(
                        f"training phrase {phrase!r} of {intent.name} collides with intent {owner}"
                    )
            allowed = FALLBACK_PLACEHOLDERS if intent.category is IntentCategory.FALLBACK else DISH_PLACEHOLDERS
            for template in intent.response_templates:
                _check_template(template, allowed, intent.name)
        if len(self.suggestible_names()) < 3:
            raise InsufficientSuggestions("insufficient suggestions: need at least 3 suggestible intents")
        object.__setattr__(self, "by_name", {i.name: i for i in self.intents})
        object.__setattr__(self, "fallback_name", fallbacks[0].name)

    def fallback(self) -> Intent:
        return self.by_name[self.fallback_name]

    def category_of(self, name: str) -> IntentCategory:
        return self.by_name[name].category

    def suggestible_names(self) -> list[str]:
        return sorted(i.name for i in self.intents if i.suggestible)

    def matchable(self) -> list[Intent]:
        return sorted(
            (i for i in self.intents if i.category is not IntentCategory.FALLBACK),
            key=lambda i: i.name,
        )


def _check_template(template: str, allowed: frozenset[str], intent_name: str) -> None:
    stripped = _PLACEHOLDER_RE.sub("", template)
    if "{" in stripped or "}" in stripped:
        raise BadTemplate(f"bad template in {intent_name}: unbalanced braces")
    for token in _PLACEHOLDER_RE.findall(template):
        if token not in allowed:
            raise BadTemplate(f"bad template in {intent_name}: unknown placeholder {{{token}}}")


def load_intents(data) -> IntentSet:
    """Build an IntentSet from parsed JSON (list of intent objects)."""
    intents = []
    for item in data:
        intents.append(
            Intent(
                name=str(item["name"]),
                category=IntentCategory(item["category"]),
                training_phrases=tuple(str(p) for p in item["training_phrases"]),
                response_templates=tuple(str(t) for t in item["response_templates"]),
                suggestible=bool(item.get("suggestible", True)),
            )
        )
    return IntentSet(intents=tuple(intents))


def load_intents_file(path: str) -> IntentSet:
    with open(path, encoding="utf-8") as fh:
        return load_intents(json.load(fh))


def match_intent(text: str, intents: IntentSet, tau: float = TAU) -> tuple[str, float]:
    """Best (intent, confidence) for a user utterance.

    Confidence is the maximum Jaccard similarity between the utterance's
    token set and any training phrase of any non-fallback intent. Below
    `tau` the fallback intent is returned with that same confidence. Ties
    go to the lexicographically smallest intent name.
    """
    tokens = frozenset(normalize(text))
    best_name = intents.fallback_name
    best = 0.0
    for intent in intents.matchable():
        for phrase_tokens in intent.phrase_token_sets():
            score = _jaccard(tokens, phrase_tokens)
            if score > best:
                best, best_name = score, intent.name
    if best >= tau:
        return best_name, best
    return intents.fallback_name, best


# --------------------------------------------------------------------------
# food-day calendar

@dataclass(frozen=True)
class FoodDayCalendar:
    days: Mapping[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for month, day in self.days:
            datetime(2020, month, day)  # 2020 is a leap year; permits Feb 29
        object.__setattr__(self, "days", dict(self.days))

    def lookup(self, month: int, day: int) -> Optional[str]:
        return self.days.get((month, day))

    @classmethod
    def from_wire(cls, items: Iterable[Mapping]) -> "FoodDayCalendar":
        return cls(days={(int(i["month"]), int(i["day"])): str(i["name"]) for i in items})

    @classmethod
    def load_file(cls, path: str) -> "FoodDayCalendar":
        with open(path, encoding="utf-8") as fh:
            return cls.from_wire(json.load(fh))


# --------------------------------------------------------------------------
# rendering

def _format_price(price_minor: int) -> str:
    return f"{price_minor // 100}.{price_minor % 100:02d}"


def _format_minute(minute: int) -> str:
    return f"{minute // 60:02d}:{minute % 60:02d}"


def _hours_today(restaurant: Restaurant, now: float) -> str:
    weekday = datetime.fromtimestamp(now + restaurant.utc_offset_min * 60, tz=timezone.utc).weekday()
    intervals = restaurant.hours.days[weekday]
    if not intervals:
        return "closed today"
    return ", ".join(f"{_format_minute(o)}-{_format_minute(c)}" for o, c in intervals)


class _Strict(dict):
    def __missing__(self, key):
        raise BadTemplate(f"bad template: unknown placeholder {{{key}}}")


def _substitutions(dish: Dish, restaurant: Restaurant, now: float, calendar: FoodDayCalendar) -> dict:
    local = datetime.fromtimestamp(now + restaurant.utc_offset_min * 60, tz=timezone.utc)
    return {
        "name": dish.name,
        "nickname": dish.nickname if dish.nickname else dish.name,
        "ingredients": ", ".join(dish.ingredients),
        "price": _format_price(dish.price_minor),
        "allergens": ", ".join(sorted(dish.allergens)) or "none",
        "restaurant": restaurant.name,
        "hours_today": _hours_today(restaurant, now),
        "time": local.strftime("%H:%M"),
        "food_day": calendar.lookup(local.month, local.day) or "no special day",
    }


def render_response(
    intent: Intent,
    dish: Dish,
    restaurant: Restaurant,
    now: float,
    calendar: FoodDayCalendar,
    rng: Random,
) -> str:
    """Pick one of the intent's templates (uniform) and fill it in."""
    template = intent.response_templates[rng.randrange(len(intent.response_templates))]
    return template.format_map(_Strict(_substitutions(dish, restaurant, now, calendar)))


def fallback_response(
    intents: IntentSet,
    rng: Random,
    dish: Dish | None = None,
    restaurant: Restaurant | None = None,
    now: float = 0.0,
    calendar: FoodDayCalendar | None = None,
) -> tuple[str, list[str]]:
    """Fallback text plus the three suggested intent names embedded in it.

    Suggestions are drawn uniformly without replacement from the
    suggestible intents.
    """
    pool = intents.suggestible_names()
    if len(pool) < 3:
        raise InsufficientSuggestions("insufficient suggestions")
    suggestions = rng.sample(pool, 3)
    fallback = intents.fallback()
    template = fallback.response_templates[rng.randrange(len(fallback.response_templates))]
    values: dict = {"suggestions": ", ".join(suggestions)}
    if dish is not None and restaurant is not None:
        values.update(_substitutions(dish, restaurant, now, calendar or FoodDayCalendar()))
    return template.format_map(_Strict(values)), suggestions


def voice_for(dish: Dish, rng: Random) -> str:
    """Voice id for the dish avatar: by gender, or a coin flip when
    unspecified."""
    if dish.avatar_gender.value == "male":
        return VOICE_MALE
    if dish.avatar_gender.value == "female":
        return VOICE_FEMALE
    return VOICE_MALE if rng.random() < 0.5 else VOICE_FEMALE


# --------------------------------------------------------------------------
# sessions and turns

@dataclass(frozen=True)
class ChatTurn:
    """One logged inquiry; also the analytics record."""

    at: float
    session_id: str
    user_id: str
    dish_id: str
    user_text: str
    matched_intent: str
    confidence: float
    response_text: str
    responded: bool
    phase: Phase
    outcome: Optional[Outcome] = None
    annotated_intent: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.responded and self.response_text:
            raise ValueError("unresponded turn with response text")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence out of [0, 1]")

    def to_wire(self) -> dict:
        return {
            "at": ts_to_rfc3339(self.at),
            "session_id": self.session_id,
            "user_id": self.user_id,
            "dish_id": self.dish_id,
            "user_text": self.user_text,
            "matched_intent": self.matched_intent,
            "confidence": self.confidence,
            "response_text": self.response_text,
            "responded": self.responded,
            "phase": self.phase.wire,
            "outcome": None if self.outcome is None else self.outcome.value,
            "annotated_intent": self.annotated_intent,
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "ChatTurn":
        at = data["at"]
        if isinstance(at, str):
            at = rfc3339_to_ts(at)
        outcome = data.get("outcome")
        return cls(
            at=float(at),
            session_id=str(data.get("session_id", "")),
            user_id=str(data.get("user_id", "")),
            dish_id=str(data.get("dish_id", "")),
            user_text=str(data.get("user_text", "")),
            matched_intent=str(data["matched_intent"]),
            confidence=float(data.get("confidence", 0.0)),
            response_text=str(data.get("response_text", "")),
            responded=bool(data.get("responded", True)),
            phase=Phase.from_wire(data.get("phase", "prearrival")),
            outcome=None if outcome is None else Outcome(outcome),
            annotated_intent=(
                None if data.get("annotated_intent") is None else str(data["annotated_intent"])
            ),
        )


@dataclass(frozen=True)
class ChatSession:
    id: str
    user_id: str
    dish_id: str
    started_at: float
    phase: Phase = Phase.PREARRIVAL
    context: tuple[ChatTurn, ...] = ()

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "dish_id": self.dish_id,
            "started_at": ts_to_rfc3339(self.started_at),
            "phase": self.phase.wire,
            "context": [turn.to_wire() for turn in self.context],
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "ChatSession":
        started = data["started_at"]
        if isinstance(started, str):
            started = rfc3339_to_ts(started)
        return cls(
            id=str(data["id"]),
            user_id=str(data["user_id"]),
            dish_id=str(data["dish_id"]),
            started_at=float(started),
            phase=Phase.from_wire(data.get("phase", "prearrival")),
            context=tuple(ChatTurn.from_wire(t) for t in data.get("context", [])),
        )


def set_phase(session: ChatSession, phase: Phase) -> ChatSession:
    """Advance the session phase; skipping ahead is fine, going back is not."""
    if phase < session.phase:
        raise PhaseRegression("phase regression")
    return replace(session, phase=phase)


class TurnResult(NamedTuple):
    turn: ChatTurn
    session: ChatSession
    suggestions: list[str]  # empty unless the fallback answered


@dataclass(frozen=True)
class ChatEngine:
    """Stateless engine over an immutable intent set and calendar."""

    intents: IntentSet
    calendar: FoodDayCalendar = field(default_factory=FoodDayCalendar)
    tau: float = TAU
    context_k: int = CONTEXT_K

    def handle_turn(
        self,
        session: ChatSession,
        dish: Dish,
        restaurant: Restaurant,
        user_text: str,
        now: float,
        rng: Random,
        record: Callable[[ChatTurn], object] | None = None,
    ) -> TurnResult:
        """Run one inquiry: match, respond, extend context, log.

        Emits exactly one record through `record` per call.
        """
        if not user_text.strip():
            raise EmptyInquiry("empty inquiry")
        name, confidence = match_intent(user_text, self.intents, self.tau)
        suggestions: list[str] = []
        if name == self.intents.fallback_name:
            text, suggestions = fallback_response(
                self.intents, rng, dish=dish, restaurant=restaurant, now=now, calendar=self.calendar
            )
            outcome: Outcome | None = Outcome.FALLBACK
        else:
            text = render_response(self.intents.by_name[name], dish, restaurant, now, self.calendar, rng)
            outcome = None
        turn = ChatTurn(
            at=now,
            session_id=session.id,
            user_id=session.user_id,
            dish_id=session.dish_id,
            user_text=user_text,
            matched_intent=name,
            confidence=confidence,
            response_text=text,
            responded=True,
            phase=session.phase,
            outcome=outcome,
        )
        context = (session.context + (turn,))[-self.context_k :]
        updated = replace(session, context=context)
        if record is not None:
            record(turn)
        return TurnResult(turn=turn, session=updated, suggestions=suggestions)
