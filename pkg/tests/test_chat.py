import json
from dataclasses import replace
from collections import Counter
from random import Random

import pytest
from hypothesis import given, strategies as st

from tabletalk.chat import (
    ChatEngine,
    ChatSession,
    ChatTurn,
    FoodDayCalendar,
    Intent,
    IntentCategory,
    Outcome,
    fallback_response,
    load_intents,
    match_intent,
    normalize,
    render_response,
    set_phase,
    voice_for,
)
from tabletalk.errors import BadTemplate, EmptyInquiry, InsufficientSuggestions, PhaseRegression
from tabletalk.model import AvatarGender, Phase

from helpers import NOON_SATURDAY, dish, restaurant

T0 = NOON_SATURDAY


def make_session(phase=Phase.PREARRIVAL, context=()):
    return ChatSession(id="s1", user_id="u1", dish_id="d1", started_at=T0, phase=phase, context=context)


class TestNormalize:
    def test_case_and_punctuation(self):
        assert normalize("Hello!") == ["hello"]

    def test_whitespace_split(self):
        assert normalize("Wo kann ich dich kaufen?") == ["wo", "kann", "ich", "dich", "kaufen"]

    def test_empty(self):
        assert normalize("") == []
        assert normalize("?!...") == []

    def test_diacritics_folded(self):
        assert normalize("Crème Brûlée süß") == ["creme", "brulee", "suss"]


class TestMatchIntent:
    def test_exact_phrase(self, intents):
        assert match_intent("hello", intents) == ("welcome", 1.0)

    def test_thank_you_is_praise(self, intents):
        assert match_intent("thank you", intents) == ("praise", 1.0)

    def test_no_overlap_falls_back(self, intents):
        assert match_intent("xyzzy plugh", intents) == ("fallback", 0.0)

    def test_below_threshold_falls_back_with_confidence(self, intents):
        name, confidence = match_intent("what is the meaning of pickles", intents)
        assert name == "fallback"
        assert 0.0 < confidence < 0.5

    def test_tie_breaks_lexicographically(self):
        intents = load_intents(
            [
                {"name": "beta", "category": "entertainment", "training_phrases": ["blue moon"],
                 "response_templates": ["b"], "suggestible": True},
                {"name": "alpha", "category": "entertainment", "training_phrases": ["red moon"],
                 "response_templates": ["a"], "suggestible": True},
                {"name": "gamma", "category": "entertainment", "training_phrases": ["sun"],
                 "response_templates": ["c"], "suggestible": True},
                {"name": "fallback", "category": "fallback", "training_phrases": ["zzz"],
                 "response_templates": ["? {suggestions}"], "suggestible": False},
            ]
        )
        # "moon" scores 0.5 on both alpha and beta; alpha wins the tie
        assert match_intent("moon", intents) == ("alpha", 0.5)

    def test_self_consistency_of_shipped_set(self, intents):
        for intent in intents.intents:
            if intent.category is IntentCategory.FALLBACK:
                continue
            for phrase in intent.training_phrases:
                name, confidence = match_intent(phrase, intents)
                assert name == intent.name, phrase
                assert confidence >= 0.5

    @given(st.text(max_size=40))
    def test_fallback_completeness(self, text):
        # no non-fallback intent is ever returned below the threshold
        from conftest import _data_text

        intents = load_intents(json.loads(_data_text("intents.json")))
        name, confidence = match_intent(text, intents)
        if name != "fallback":
            assert confidence >= 0.5


class TestIntentSetValidation:
    def base(self):
        return [
            {"name": "a", "category": "entertainment", "training_phrases": ["alpha"],
             "response_templates": ["a"], "suggestible": True},
            {"name": "b", "category": "entertainment", "training_phrases": ["beta"],
             "response_templates": ["b"], "suggestible": True},
            {"name": "c", "category": "entertainment", "training_phrases": ["gamma"],
             "response_templates": ["c"], "suggestible": True},
            {"name": "fallback", "category": "fallback", "training_phrases": ["zzz"],
             "response_templates": ["try {suggestions}"], "suggestible": False},
        ]

    def test_base_is_valid(self):
        load_intents(self.base())

    def test_exactly_one_fallback(self):
        data = self.base()
        data.pop()
        with pytest.raises(ValueError):
            load_intents(data)

    def test_suggestible_fallback_rejected(self):
        data = self.base()
        data[-1]["suggestible"] = True
        with pytest.raises(ValueError):
            load_intents(data)

    def test_colliding_phrases_rejected(self):
        data = self.base()
        data[1]["training_phrases"] = ["Alpha!"]  # same token set as intent a
        with pytest.raises(ValueError):
            load_intents(data)

    def test_unknown_placeholder_rejected(self):
        data = self.base()
        data[0]["response_templates"] = ["hello {wat}"]
        with pytest.raises(BadTemplate):
            load_intents(data)

    def test_suggestions_outside_fallback_rejected(self):
        data = self.base()
        data[0]["response_templates"] = ["try {suggestions}"]
        with pytest.raises(BadTemplate):
            load_intents(data)

    def test_unbalanced_braces_rejected(self):
        data = self.base()
        data[0]["response_templates"] = ["hello {name"]
        with pytest.raises(BadTemplate):
            load_intents(data)

    def test_too_few_suggestible(self):
        data = self.base()
        data[0]["suggestible"] = False
        with pytest.raises(InsufficientSuggestions):
            load_intents(data)


FIG5_INGREDIENTS = (
    "french fries", "beyond meat patty", "sauteed onions", "lettuce",
    "tomatoes", "pickled gherkins", "ketchup", "mustard",
)


class TestRenderResponse:
    def burger(self):
        base = dish(name="Plant Burger", nickname="Planty", allergens=("gluten", "mustard"), price_minor=950)
        return replace(base, ingredients=FIG5_INGREDIENTS)

    def test_ingredients_listed(self, intents, calendar):
        text = render_response(intents.by_name["ingredients"], self.burger(), restaurant(), T0, calendar, Random(1))
        for ingredient in FIG5_INGREDIENTS:
            assert ingredient in text

    def test_allergens_both_codes(self, intents, calendar):
        text = render_response(intents.by_name["allergens"], self.burger(), restaurant(), T0, calendar, Random(1))
        assert "gluten" in text and "mustard" in text

    def test_nickname_falls_back_to_name(self, intents, calendar):
        plain = dish(name="Loaded Fries")
        text = render_response(intents.by_name["name"], plain, restaurant(), T0, calendar, Random(2))
        assert "Loaded Fries" in text
        assert "{nickname}" not in text

    def test_price_major_minor(self, intents, calendar):
        text = render_response(intents.by_name["price"], dish(price_minor=1250), restaurant(), T0, calendar, Random(1))
        assert "12.50" in text

    def test_no_allergens_renders_none(self, calendar):
        intent = Intent(
            name="allergens", category=IntentCategory.INFORMATION_ADVICE,
            training_phrases=("allergens",), response_templates=("I contain {allergens}.",),
        )
        text = render_response(intent, dish(allergens=()), restaurant(), T0, calendar, Random(1))
        assert "I contain none." == text

    def test_time_and_food_day(self):
        intent = Intent(
            name="mood", category=IntentCategory.ENTERTAINMENT,
            training_phrases=("mood",), response_templates=("{time} on {food_day}",),
        )
        calendar = FoodDayCalendar(days={(10, 2): "fry day"})
        # restaurant at UTC+120min; noon UTC -> 14:00 local
        text = render_response(intent, dish(), restaurant(utc_offset_min=120), T0, calendar, Random(1))
        assert text == "14:00 on fry day"
        no_day = render_response(intent, dish(), restaurant(utc_offset_min=120), T0, FoodDayCalendar(), Random(1))
        assert no_day == "14:00 on no special day"

    def test_hours_today(self, calendar):
        intent = Intent(
            name="hours", category=IntentCategory.INFORMATION_ADVICE,
            training_phrases=("hours",), response_templates=("open {hours_today}",),
        )
        text = render_response(intent, dish(), restaurant(), T0, calendar, Random(1))
        assert text == "open 00:00-23:59"

    def test_template_choice_uses_rng(self, intents, calendar):
        picks = {
            render_response(intents.by_name["price"], dish(), restaurant(), T0, calendar, Random(seed))
            for seed in range(8)
        }
        assert len(picks) == 2  # both templates of the price intent show up


class TestFallbackResponse:
    def test_three_distinct_suggestible(self, intents):
        text, suggestions = fallback_response(intents, Random(5))
        assert len(suggestions) == 3
        assert len(set(suggestions)) == 3
        assert "fallback" not in suggestions
        for name in suggestions:
            assert intents.by_name[name].suggestible
            assert name in text

    def test_control_intents_never_suggested(self, intents):
        for seed in range(50):
            _, suggestions = fallback_response(intents, Random(seed))
            assert not {"scan", "help", "confirm_suggestion"} & set(suggestions)

    def test_seeded_determinism(self, intents):
        assert fallback_response(intents, Random(11)) == fallback_response(intents, Random(11))

    def test_inclusion_frequency_matches_exact_probability(self):
        # 10 suggestible intents, 3 drawn: inclusion probability is
        # C(9,2)/C(10,3) = 3/10 for each intent
        data = [
            {"name": f"i{k}", "category": "entertainment", "training_phrases": [f"phrase {k}"],
             "response_templates": ["t"], "suggestible": True}
            for k in range(10)
        ]
        data.append({"name": "fallback", "category": "fallback", "training_phrases": ["zzz"],
                     "response_templates": ["{suggestions}"], "suggestible": False})
        intents = load_intents(data)
        rng = Random(20211002)
        counts = Counter()
        draws = 10_000
        for _ in range(draws):
            _, suggestions = fallback_response(intents, rng)
            counts.update(suggestions)
        for k in range(10):
            assert abs(counts[f"i{k}"] / draws - 0.3) < 0.05

    def test_insufficient_pool(self):
        with pytest.raises(InsufficientSuggestions):
            load_intents(
                [
                    {"name": "a", "category": "entertainment", "training_phrases": ["alpha"],
                     "response_templates": ["a"], "suggestible": True},
                    {"name": "fallback", "category": "fallback", "training_phrases": ["zzz"],
                     "response_templates": ["{suggestions}"], "suggestible": False},
                ]
            )


class TestVoiceFor:
    def test_gender_mapping(self):
        assert voice_for(dish(avatar_gender=AvatarGender.MALE), Random(1)) == "voice_male"
        assert voice_for(dish(avatar_gender=AvatarGender.FEMALE), Random(1)) == "voice_female"

    def test_unspecified_seeded_deterministic(self):
        d = dish(avatar_gender=AvatarGender.UNSPECIFIED)
        assert voice_for(d, Random(9)) == voice_for(d, Random(9))

    def test_unspecified_is_a_fair_coin(self):
        d = dish(avatar_gender=AvatarGender.UNSPECIFIED)
        rng = Random(20211002)
        male = sum(voice_for(d, rng) == "voice_male" for _ in range(10_000))
        assert abs(male / 10_000 - 0.5) < 0.03


class TestSetPhase:
    def test_default_is_prearrival(self):
        assert make_session().phase is Phase.PREARRIVAL

    def test_skipping_ahead_allowed(self):
        assert set_phase(make_session(), Phase.WHILE_DINING).phase is Phase.WHILE_DINING

    def test_regression_rejected(self):
        session = make_session(phase=Phase.WHILE_DINING)
        with pytest.raises(PhaseRegression):
            set_phase(session, Phase.PREARRIVAL)

    def test_same_phase_is_fine(self):
        assert set_phase(make_session(), Phase.PREARRIVAL).phase is Phase.PREARRIVAL


class TestHandleTurn:
    def engine(self, intents, calendar, k=10):
        return ChatEngine(intents=intents, calendar=calendar, context_k=k)

    def test_welcome_path(self, intents, calendar):
        result = self.engine(intents, calendar).handle_turn(
            make_session(), dish(), restaurant(), "hello", T0, Random(1)
        )
        assert result.turn.matched_intent == "welcome"
        assert result.turn.responded
        assert result.turn.outcome is None
        assert result.suggestions == []
        assert result.session.context[-1] == result.turn

    def test_fallback_path_sets_outcome(self, intents, calendar):
        result = self.engine(intents, calendar).handle_turn(
            make_session(), dish(), restaurant(), "qwerty zxcvb", T0, Random(1)
        )
        assert result.turn.matched_intent == "fallback"
        assert result.turn.outcome is Outcome.FALLBACK
        assert len(result.suggestions) == 3

    def test_two_turn_script_same_persona(self, intents, calendar):
        # hand-computed: "what do you contain" matches ingredients at 1.0;
        # "and gluten?" -> tokens {and, gluten} vs allergens phrase
        # {gluten} -> jaccard 1/2 = 0.5 >= tau, so allergens answers, still
        # about the session's own dish
        engine = self.engine(intents, calendar)
        burger = dish(allergens=("gluten", "mustard"))
        first = engine.handle_turn(make_session(), burger, restaurant(), "what do you contain", T0, Random(1))
        second = engine.handle_turn(first.session, burger, restaurant(), "and gluten?", T0 + 30, Random(1))
        assert first.turn.matched_intent == "ingredients"
        assert second.turn.matched_intent == "allergens"
        assert second.turn.confidence == 0.5
        assert "gluten" in second.turn.response_text
        assert len(second.session.context) == 2

    def test_empty_inquiry_rejected(self, intents, calendar):
        with pytest.raises(EmptyInquiry):
            self.engine(intents, calendar).handle_turn(
                make_session(), dish(), restaurant(), "   ", T0, Random(1)
            )

    def test_context_bounded_by_k(self, intents, calendar):
        engine = self.engine(intents, calendar, k=3)
        session = make_session()
        for i in range(7):
            session = engine.handle_turn(session, dish(), restaurant(), "hello", T0 + i, Random(1)).session
            assert len(session.context) <= 3
        assert len(session.context) == 3
        assert session.context[-1].at == T0 + 6  # newest kept, oldest evicted

    def test_turn_tagged_with_session_phase(self, intents, calendar):
        session = set_phase(make_session(), Phase.AFTER_DINING)
        result = self.engine(intents, calendar).handle_turn(
            session, dish(), restaurant(), "hello", T0, Random(1)
        )
        assert result.turn.phase is Phase.AFTER_DINING

    def test_deterministic_with_fixed_seed_and_clock(self, intents, calendar):
        def run():
            return self.engine(intents, calendar).handle_turn(
                make_session(), dish(), restaurant(), "tell me a joke", T0, Random(77)
            ).turn.to_wire()

        assert json.dumps(run()) == json.dumps(run())

    def test_emits_exactly_one_record(self, intents, calendar):
        emitted = []
        self.engine(intents, calendar).handle_turn(
            make_session(), dish(), restaurant(), "hello", T0, Random(1), record=emitted.append
        )
        assert len(emitted) == 1
        self.engine(intents, calendar).handle_turn(
            make_session(), dish(), restaurant(), "zzz qqq", T0, Random(1), record=emitted.append
        )
        assert len(emitted) == 2


class TestWireFormats:
    def test_turn_round_trip(self):
        turn = ChatTurn(
            at=T0, session_id="s1", user_id="u1", dish_id="d1", user_text="hello",
            matched_intent="welcome", confidence=1.0, response_text="hi", responded=True,
            phase=Phase.PREARRIVAL, outcome=Outcome.APPROPRIATE, annotated_intent="welcome",
        )
        assert ChatTurn.from_wire(turn.to_wire()) == turn

    def test_unresponded_with_text_rejected(self):
        with pytest.raises(ValueError):
            ChatTurn(
                at=T0, session_id="s", user_id="u", dish_id="d", user_text="x",
                matched_intent="welcome", confidence=1.0, response_text="oops",
                responded=False, phase=Phase.PREARRIVAL,
            )

    def test_session_round_trip(self, intents, calendar):
        engine = ChatEngine(intents=intents, calendar=calendar)
        session = engine.handle_turn(make_session(), dish(), restaurant(), "hello", T0, Random(1)).session
        assert ChatSession.from_wire(session.to_wire()) == session

    def test_calendar_rejects_bad_dates(self):
        with pytest.raises(ValueError):
            FoodDayCalendar(days={(2, 30): "nope"})
