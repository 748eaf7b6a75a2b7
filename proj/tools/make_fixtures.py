#!/usr/bin/env python3
"""Regenerates the sample dataset, scripted agent outputs and judgment fixtures.

Usage: tools/make_fixtures.py [repo root]
Output is deterministic; rerunning it must leave the files unchanged.
"""
import json
import random
import sys
from pathlib import Path

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent


def dump(obj):
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_lines(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def record(rid, goal, steps, hint, subtype, expertise, critical, source="real"):
    return {
        "id": rid,
        "goal": goal,
        "steps": steps,
        "hint": {"text": hint, "constraint_subtype": subtype, "expertise": expertise, "critical_type": critical},
        "source": source,
    }


RECORDS = [
    record("bake-bread", "Bake Bread",
           ["Dissolve yeast in water.", "Mix the ingredients.", "Knead the dough.",
            "Put dough into greased pan.", "Bake for 30 minutes."],
           "I would like to make something sweet and I also like nuts.",
           "preference", "unspecified", "constraint"),
    record("customize-shoes", "Customize Shoes",
           ["doodle on shoes.", "add embellishments.", "change out laces for ribbon.",
            "glue rhinestones on straps.", "wrap ribbon around straps."],
           "I am a ballet dancer and would like to improve the comfort of my shoes.",
           "refinement", "intermediate", "both"),
    record("plant-garden", "Plant a Garden",
           ["Pick a sunny spot in the yard.", "Dig up the soil.", "Mix in compost.",
            "Plant the seeds.", "Water every morning."],
           "I live in an apartment with only a small balcony.",
           "prerequisite", "beginner", "constraint"),
    record("start-running", "Start Running",
           ["Buy running shoes.", "Run two miles every day.", "Increase the distance each week."],
           "I have bad knees and have not exercised in years.",
           "prerequisite", "beginner", "both"),
    record("make-pancakes", "Make Pancakes",
           ["Whisk flour, sugar and baking powder.", "Beat in eggs and milk.",
            "Heat a buttered pan.", "Pour in the batter.", "Flip when bubbles form."],
           "I am vegan.",
           "prerequisite", "unspecified", "constraint"),
    record("grow-tomatoes", "Grow Tomatoes",
           ["Start seeds in small pots.", "Move seedlings outside after the last frost.",
            "Stake the plants.", "Water at the base.", "Harvest when red."],
           "I want to grow them indoors over the winter under lights.",
           "refinement", "expert", "expertise"),
    record("strength-training", "Build Strength at Home",
           ["Warm up for five minutes.", "Do bench presses.", "Do barbell squats.", "Stretch."],
           "I only have a pair of adjustable dumbbells.",
           "prerequisite", "intermediate", "constraint"),
    record("brew-coffee", "Brew Pour-Over Coffee",
           ["Boil water.", "Grind the beans.", "Pour water over the grounds.", "Serve."],
           "I am a barista and want to dial in the recipe precisely.",
           "refinement", "expert", "expertise", source="simulated"),
    record("compost", "Start a Compost Pile",
           ["Choose a corner of the yard.", "Layer green and brown waste.",
            "Turn the pile weekly.", "Use the compost after three months."],
           "I have no yard, only a kitchen.",
           "prerequisite", "beginner", "constraint"),
    record("yoga-routine", "Build a Morning Yoga Routine",
           ["Roll out a mat.", "Do sun salutations.", "Hold a headstand.", "Rest in corpse pose."],
           "I would like something gentle, ten minutes at most.",
           "preference", "unspecified", "constraint", source="simulated"),
]

# Scripted agent outputs keyed by (role, record). Some deliberately carry
# chatter, list markers or edits the engine must reject.
SCRIPT = {
    "bake-bread": {
        "modify": "insert(2, Add sugar and honey to the dough.)\ninsert(3, Fold in chopped nuts.)",
        "verify": "replace(5, Bake for 30 minutes at 350F until golden.)",
        "unified": "insert(2, Add sugar and honey to the dough.)\ninsert(3, Fold in chopped nuts.)\n"
                   "replace(5, Bake for 30 minutes at 350F.)",
        "resolve": "insert(2, Add sugar and honey to the dough.)\ninsert(3, Fold in chopped nuts.)\n"
                   "replace(5, Bake for 30 minutes at 350F until golden.)",
        "e2e": "1. Dissolve yeast in warm water.\n2. Mix the ingredients with sugar.\n3. Place into a baking pan.\n"
               "4. Add chopped nuts.\n5. Knead the dough.\n6. Bake.",
    },
    "customize-shoes": {
        "modify": "insert(0, Identify areas of discomfort.)\nreplace(1, )\ninsert(5, Insert gel pads into the shoes.)",
        "verify": "",
        "unified": "Here are the edits:\n- insert(0, Identify areas of discomfort.)\n- replace(1, )\n"
                   "- replace(4, )\n- insert(5, Insert gel pads into the shoes.)",
        "resolve": "insert(0, Identify areas of discomfort.)\nreplace(1, )\ninsert(5, Insert gel pads into the shoes.)",
        "e2e": "1. Identify areas of discomfort.\n2. Purchase gel pads.\n3. Insert in areas of discomfort.\n"
               "4. Sew elastic onto the shoes.\n5. Darn the tips.\n6. Soften the shank.\n7. Add toe pads.\n"
               "8. Wrap toes with tape.\n9. Stretch the shoes.\n10. Wear them at home.\n11. Break in shoes gradually.",
    },
    "plant-garden": {
        "modify": "replace(1, Pick a sunny spot on the balcony.)\nreplace(2, Fill containers with potting soil.)\n"
                  "replace(3, )",
        "verify": "insert(3, Choose compact plant varieties.)\nreplace(9, Water daily.)",
        "unified": "replace(1, Pick a sunny spot on the balcony.)\nreplace(2, Fill containers with potting soil.)\n"
                   "replace(3, )\ninsert(2, Make sure the containers drain.)",
        "resolve": "replace(1, Pick a sunny spot on the balcony.)\nreplace(2, Fill containers with potting soil.)\n"
                   "replace(3, )\ninsert(3, Choose compact plant varieties.)",
        "e2e": "1. Buy containers.\n2. Fill them with potting soil.\n3. Plant herbs.\n4. Water them.",
    },
    "start-running": {
        "modify": "insert(0, Ask a doctor whether running is safe for your knees.)\n"
                  "replace(2, Alternate one minute of jogging with two minutes of walking.)\n"
                  "replace(3, Add one minute of jogging each week.)",
        "verify": "1. insert(1, Pick a soft surface such as a track.)",
        "unified": "insert(0, Ask a doctor whether running is safe for your knees.)\n"
                   "replace(2, Walk and jog in short intervals.)",
        "resolve": "insert(0, Ask a doctor whether running is safe for your knees.)\n"
                   "replace(2, Alternate one minute of jogging with two minutes of walking.)\n"
                   "insert(1, Pick a soft surface such as a track.)\n"
                   "replace(3, Add one minute of jogging each week.)",
        "e2e": "I can't help with that without more detail.",
    },
    "make-pancakes": {
        "modify": "replace(2, Stir in oat milk and a mashed banana.)\nreplace(3, Heat an oiled pan.)",
        "verify": "insert(5, Serve warm.)",
        "unified": "replace(2, Stir in oat milk and a mashed banana.)\nreplace(3, Heat an oiled pan.)\ninsert(5, Serve warm.)",
        "resolve": "replace(2, Stir in oat milk and a mashed banana.)\nreplace(3, Heat an oiled pan.)\ninsert(5, Serve warm.)",
        "e2e": "1. Whisk flour, sugar and baking powder.\n2. Stir in oat milk.\n3. Heat an oiled pan.\n"
               "4. Pour in the batter.\n5. Flip when bubbles form.",
    },
    "grow-tomatoes": {
        "modify": "replace(2, Move seedlings to large pots under grow lights for 14 hours a day.)\n"
                  "insert(3, Shake the plants daily or use a brush to pollinate the flowers.)",
        "verify": "replace(2, Move seedlings to large pots under grow lights.)",
        "unified": "replace(2, Move seedlings to large pots under grow lights for 14 hours a day.)\n"
                   "insert(3, Pollinate the flowers by hand.)",
        "resolve": "replace(2, Move seedlings to large pots under grow lights for 14 hours a day.)\n"
                   "insert(3, Shake the plants daily or use a brush to pollinate the flowers.)",
        "e2e": "1. Start seeds indoors.\n2. Grow under lights.\n3. Pollinate by hand.\n4. Harvest.",
    },
    "strength-training": {
        "modify": "replace(2, Do dumbbell floor presses.)\nreplace(3, Do goblet squats with one dumbbell.)",
        "verify": "replace(2, Do dumbbell floor presses, three sets of ten.)\ninsert(4, Log the weights used.)",
        "unified": "replace(2, Do dumbbell floor presses.)\nreplace(3, Do goblet squats.)",
        "resolve": "replace(2, Do dumbbell floor presses, three sets of ten.)\nreplace(3, Do goblet squats with one dumbbell.)",
        "e2e": "1. Warm up.\n2. Do dumbbell presses.\n3. Do goblet squats.\n4. Stretch.",
    },
    "brew-coffee": {
        "modify": "replace(1, Heat water to 94C.)\nreplace(2, Grind 15 g of beans medium-fine.)\n"
                  "replace(3, \"Pour 250 g of water in three pulses, finishing by 3:00.\")",
        "verify": "insert(2, Rinse the paper filter.)",
        "unified": "replace(1, Heat water to 94C.)\nreplace(2, Grind 15 g of beans medium-fine.)\ninsert(2, Rinse the filter.)",
        "resolve": "replace(1, Heat water to 94C.)\nreplace(2, Grind 15 g of beans medium-fine.)\n"
                   "insert(2, Rinse the paper filter.)\n"
                   "replace(3, \"Pour 250 g of water in three pulses, finishing by 3:00.\")",
        "e2e": "1. Heat water to 94C.\n2. Grind 15 g of beans.\n3. Rinse the filter.\n4. Pour in pulses.\n5. Serve.",
    },
    "compost": {
        "modify": "replace(1, Get a lidded bin that fits under the sink.)\nreplace(3, Stir the bin weekly.)",
        "verify": "replace(1, Get a small worm bin.)",
        # The resolver is down for this record; the runtime falls back to a
        # deterministic merge.
        "resolve": None,
        "unified": "replace(1, Get a lidded bin that fits under the sink.)\nreplace(3, Stir the bin weekly.)",
        "e2e": "1. Get a kitchen bin.\n2. Add scraps.\n3. Stir weekly.\n4. Use the compost.",
    },
    "yoga-routine": {
        "modify": "replace(3, )\nreplace(2, Do three slow sun salutations.)\ninsert(9, Breathe.)",
        "verify": "",
        "unified": "replace(3, )\nreplace(2, Do three slow sun salutations.)",
        "resolve": "replace(3, )\nreplace(2, Do three slow sun salutations.)\nreplace(7, Meditate.)",
        "e2e": "1. Roll out a mat.\n2. Do three sun salutations.\n3. Rest in corpse pose.",
    },
}

ROLES = ["modify", "verify", "unified", "resolve", "e2e"]


def sample_files():
    write_lines(ROOT / "data/samples/dataset.jsonl", [dump({"format": 1})] + [dump(r) for r in RECORDS])
    lines = []
    for r in RECORDS:
        for role in ROLES:
            output = SCRIPT[r["id"]][role]
            if output is None:
                lines.append(dump({"role": role, "record_id": r["id"], "error": "service unavailable"}))
            else:
                lines.append(dump({"role": role, "record_id": r["id"], "output": output}))
    write_lines(ROOT / "data/samples/mock_outputs.jsonl", lines)


CATEGORIES = ["missing_steps", "extra_steps", "underspecified_steps", "incorrect_steps", "wrong_order"]

# Majority counts per method over 206 items: customized, executable, both.
TABLE1 = [
    ("Sequential", 125, 149, 107),
    ("Unified", 113, 147, 97),
    ("Parallel", 111, 146, 94),
    ("Reverse-Sequential", 87, 131, 71),
]
N_ITEMS = 206


def panel(rng, majority):
    # Three annotators, mixing unanimous and 2-1 panels.
    positives = rng.choice([3, 2]) if majority else rng.choice([0, 1])
    votes = [True] * positives + [False] * (3 - positives)
    rng.shuffle(votes)
    return votes


def judgment(method, rid, annotator, criterion, verdict, categories):
    return dump({"method": method, "record_id": rid, "annotator_id": annotator, "criterion": criterion,
                 "verdict": verdict, "error_categories": categories})


def table1_file():
    rng = random.Random(206)
    lines = []
    for method, customized, executable, both in TABLE1:
        # Items [0, both) pass both; then customized only; then executable only.
        only_c = customized - both
        only_e = executable - both
        assert only_c + only_e + both <= N_ITEMS
        for i in range(N_ITEMS):
            c = i < both or both <= i < both + only_c
            e = i < both or both + only_c <= i < both + only_c + only_e
            rid = f"item-{i + 1:03d}"
            for criterion, majority in (("customized", c), ("executable", e)):
                for a, verdict in enumerate(panel(rng, majority)):
                    cats = [] if verdict else sorted(rng.sample(CATEGORIES, rng.choice([1, 1, 2])))
                    lines.append(judgment(method, rid, f"a{a + 1}", criterion, verdict, cats))
    write_lines(ROOT / "data/fixtures/table1_judgments.jsonl", lines)


def e2e_errors_file():
    # 40 error marks over 40 items, 13 of them extra_steps. Two annotators
    # mark two categories at once.
    marks = (["extra_steps"] * 12 + ["missing_steps"] * 9 + ["underspecified_steps"] * 7 +
             ["incorrect_steps"] * 6 + ["wrong_order"] * 2)
    random.Random(40).shuffle(marks)
    groups = [["extra_steps", "missing_steps"], ["underspecified_steps", "wrong_order"]]
    groups += [[m] for m in marks]
    lines = []
    for i in range(40):
        rid = f"e2e-{i + 1:02d}"
        cats = groups[i] if i < len(groups) else []
        for a in range(3):
            verdict = not (a == 0 and cats)
            lines.append(judgment("E2E", rid, f"a{a + 1}", "customized", verdict, cats if not verdict else []))
            lines.append(judgment("E2E", rid, f"a{a + 1}", "executable", True, []))
    assert sum(len(g) for g in groups) == 40
    write_lines(ROOT / "data/fixtures/e2e_errors.jsonl", lines)


def malformed_file():
    ok = record("ok-1", "Boil an Egg", ["Boil water.", "Add the egg.", "Wait ten minutes."],
                "I like soft yolks.", "preference", "beginner", "constraint")
    ok2 = dict(ok, id="ok-2")

    def variant(**changes):
        r = json.loads(json.dumps(ok))
        for path, value in changes.items():
            target = r
            keys = path.split("__")
            for k in keys[:-1]:
                target = target[k]
            if value is ...:
                del target[keys[-1]]
            else:
                target[keys[-1]] = value
        return dump(r)

    bad = [
        ('{"id": "bad-json", "goal": ', "not valid JSON"),
        ("[1, 2, 3]", "record must be a JSON object"),
        (variant(id=...), "missing field 'id'"),
        (variant(id="   "), "id is empty"),
        (variant(id="bad-goal", goal=""), "goal is empty"),
        (variant(id="bad-steps", steps="Boil water."), "field 'steps' must be an array"),
        (variant(id="no-steps", steps=[]), "procedure has no steps"),
        (variant(id="num-step", steps=["Boil water.", 7]), "every step must be a string"),
        (variant(id="blank-step", steps=["Boil water.", "  "]), "step 2 is empty"),
        (variant(id="wizard", hint__expertise="wizard"), "invalid expertise 'wizard'"),
        (variant(id="no-hint", hint__text=""), "customization hint is empty"),
        (dump(ok), "duplicate id 'ok-1'"),
    ]
    lines = [dump({"format": 1}), dump(ok), dump(ok2)] + [line for line, _ in bad]
    write_lines(ROOT / "data/fixtures/malformed_dataset.jsonl", lines)
    expected = [f"{i + 4}\t{message}" for i, (_, message) in enumerate(bad)]
    write_lines(ROOT / "data/fixtures/malformed_dataset.expected", expected)


if __name__ == "__main__":
    sample_files()
    table1_file()
    e2e_errors_file()
    malformed_file()
