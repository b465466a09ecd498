#!/usr/bin/env python3
"""Regenerate the bundled evaluation corpus (sample_corpus.ndjson).

Deterministic: 145 turn records over 9 users and the 12 sample dishes,
with fixed outcome, category, and phase totals:

  responded 142, unresponded 3
  outcomes: 71 appropriate / 30 fallback / 24 wrong_intent /
            17 moderately_appropriate (+ 3 unlabeled = the unresponded)
  categories: 87 entertainment / 54 information_advice / 4 control
  phases: 60 prearrival / 64 postarrival_preprocess / 1 while_dining /
          20 after_dining

Wrong-intent records carry a matched and an annotated intent from the
same category so the category tally is identical whether counted by
matched or by intended intent.
"""

import json
import os
from datetime import datetime, timedelta, timezone

ENT = ["welcome", "praise", "joke", "name", "mood", "age", "gender", "hobbies", "eaten_reaction"]
INFO = [
    "ingredients", "ingredient_detail", "preparation", "allergens",
    "price", "nutrition", "where_to_buy", "location_directions",
]
CTRL = ["scan", "help", "confirm_suggestion"]

TEXTS = {
    "welcome": "hello there",
    "praise": "thank you!",
    "joke": "tell me a joke",
    "name": "what is your name",
    "mood": "how are you today",
    "age": "how old are you",
    "gender": "are you male or female",
    "hobbies": "do you have hobbies",
    "eaten_reaction": "i am going to eat you now",
    "ingredients": "what do you contain",
    "ingredient_detail": "where do the onions come from",
    "preparation": "how are you made",
    "allergens": "do you contain gluten",
    "price": "how much are you",
    "nutrition": "how many calories do you have",
    "where_to_buy": "where can i buy you",
    "location_directions": "how do i get to you",
    "scan": "scan",
    "help": "what can you do",
    "confirm_suggestion": "yes please",
}

REPLIES = {name: f"(reply about {name.replace('_', ' ')})" for name in TEXTS}
FALLBACK_REPLY = "Hmm, that went over my plate. You could ask me about: price, joke, mood."

# (kind, intent pool, count); sums to 145
RECIPE = [
    ("appropriate", ENT, 43),
    ("appropriate", INFO, 25),
    ("appropriate", CTRL, 3),
    ("wrong_intent", ENT, 15),
    ("wrong_intent", INFO, 9),
    ("moderately_appropriate", ENT, 9),
    ("moderately_appropriate", INFO, 8),
    ("fallback", ENT, 18),
    ("fallback", INFO, 11),
    ("fallback", CTRL, 1),
    ("unresponded", ENT, 2),
    ("unresponded", INFO, 1),
]

PHASES = ["prearrival"] * 60 + ["postarrival_preprocess"] * 64 + ["while_dining"] * 1 + ["after_dining"] * 20

BASE = datetime(2021, 10, 2, 8, 0, 0, tzinfo=timezone.utc)


def build_records():
    rows = []
    for kind, pool, count in RECIPE:
        for j in range(count):
            intent = pool[j % len(pool)]
            if kind == "appropriate":
                rows.append((TEXTS[intent], intent, 0.8, REPLIES[intent], True, "appropriate", intent))
            elif kind == "moderately_appropriate":
                rows.append((TEXTS[intent], intent, 0.62, REPLIES[intent], True, "moderately_appropriate", intent))
            elif kind == "wrong_intent":
                matched = pool[(j + 1) % len(pool)]
                rows.append((TEXTS[intent], matched, 0.55, REPLIES[matched], True, "wrong_intent", intent))
            elif kind == "fallback":
                rows.append((TEXTS[intent], "fallback", 0.15, FALLBACK_REPLY, True, "fallback", intent))
            else:  # unresponded: inquiry logged, no response delivered
                rows.append((TEXTS[intent], intent, 0.7, "", False, None, None))
    return rows


def main():
    rows = build_records()
    assert len(rows) == 145 == len(PHASES)
    out_path = os.path.join(
        os.path.dirname(__file__), "..", "src", "tabletalk", "data", "sample_corpus.ndjson"
    )
    with open(os.path.abspath(out_path), "w", encoding="utf-8") as fh:
        for i, (text, matched, confidence, reply, responded, outcome, annotated) in enumerate(rows):
            user = f"u{i % 9 + 1:02d}"
            record = {
                "kind": "turn",
                "at": (BASE + timedelta(seconds=300 * i)).strftime("%Y-%m-%dT%H:%M:%SZ"),
                "session_id": f"s-{user}-{i:03d}",
                "user_id": user,
                "dish_id": f"d{(7 * i) % 12 + 1:02d}",
                "user_text": text,
                "matched_intent": matched,
                "confidence": confidence,
                "response_text": reply,
                "responded": responded,
                "phase": PHASES[i],
                "outcome": outcome,
                "annotated_intent": annotated,
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    print(f"wrote {len(rows)} records to {os.path.abspath(out_path)}")


if __name__ == "__main__":
    main()
