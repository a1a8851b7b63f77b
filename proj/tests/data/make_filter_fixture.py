#!/usr/bin/env python3
"""Writes the 200-post planted filter fixture.

Every post is planted in exactly one category whose fate through the
chain (keyword -> irrelevant -> profile-only -> dedupe) is fixed by
construction:

  hit         80  keyword in text (case / whitespace variants)   retained
  quoted       5  keyword only in quoted_text or extended_text   retained
  both        15  keyword in text and in profile                 retained
  miss        30  no keyword anywhere                            dropped, keyword stage
  stop        25  keyword + stopphrase in body                   irrelevant
  stop_prof    5  stopphrase in body, keyword only in profile    irrelevant
  profile     25  keyword only in screen name / description      profile-only
  dup         15  repeat id of an earlier retained post          deduped
"""

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
rng = random.Random(7)

KEYWORD_FORMS = ["solar energy", "SOLAR ENERGY", "Solar Panel", "solar  panel", "solar PV", "Solar\nPV",
                 "solar photovoltaic", "solar battery", "Solar Thermal", "solar power", "solar-powered",
                 "solar generation", "Solar Subsidies"]
STOP_FORMS = ["Pokemon", "superman", "GALAXY", "eclipse", "solar plexus", "solar-powered human",
              "I will become your sun"]
FILLER = ["great day", "new install", "check this out", "loving it", "big news", "what do you think",
          "so cool", "at the office"]
NO_KEYWORD = ["wind turbines are great", "solar system model for class", "sunny afternoon", "solarium open",
              "power outage again", "energy drink review", "panel discussion at 5", "photovoltaic cells? no idea",
              "the sun is out", "batteries not included"]

posts, expected, retained_ids = [], [], []
n = 0


def post(text, screen="someone", desc="", **extra):
    global n
    n += 1
    p = {"id": f"f{n:03d}", "text": text, "screen_name": screen, "user_description": desc,
         "created_at": "2020-02-01T12:00:00Z"}
    p.update(extra)
    return p


plan = (["hit"] * 80 + ["quoted"] * 5 + ["both"] * 15 + ["miss"] * 30 + ["stop"] * 25 + ["stop_prof"] * 5 +
        ["profile"] * 25)
rng.shuffle(plan)
for cat in plan:
    kw = rng.choice(KEYWORD_FORMS)
    fill = rng.choice(FILLER)
    if cat == "hit":
        p = post(f"{fill} {kw} {rng.choice(FILLER)}")
    elif cat == "quoted":
        field = rng.choice(["quoted_text", "extended_text"])
        p = post(fill, **{field: f"quoting: {kw} rocks"})
    elif cat == "both":
        p = post(f"{kw} {fill}", screen="SolarPowerFan", desc=f"all about {kw}")
    elif cat == "miss":
        p = post(rng.choice(NO_KEYWORD))
    elif cat == "stop":
        p = post(f"{kw} and {rng.choice(STOP_FORMS)} {fill}")
    elif cat == "stop_prof":
        p = post(f"{rng.choice(STOP_FORMS)} {fill}", screen="solar_energy_daily", desc=f"{kw} news")
    else:
        if rng.random() < 0.5:
            p = post(rng.choice(NO_KEYWORD), screen="SolarPanelPro", desc="installer")
        else:
            p = post(rng.choice(NO_KEYWORD), desc=f"I sell {kw} systems")
    posts.append(p)
    if cat in ("hit", "quoted", "both"):
        expected.append(p["id"])

for pid in rng.sample(expected, 15):
    dup = dict(next(p for p in posts if p["id"] == pid))
    dup["text"] = dup["text"] + " (again)"
    posts.append(dup)

assert len(posts) == 200
with open(os.path.join(HERE, "filter_fixture.jsonl"), "w") as f:
    for p in posts:
        f.write(json.dumps(p) + "\n")
with open(os.path.join(HERE, "filter_expected.txt"), "w") as f:
    f.write("\n".join(expected) + "\n")
report = {"n_input": 200, "n_keyword_matched": 170, "n_excluded_irrelevant": 30, "n_excluded_profile_only": 25,
          "n_deduped": 15, "n_retained": 100}
with open(os.path.join(HERE, "filter_expected_report.json"), "w") as f:
    json.dump(report, f, indent=2)
    f.write("\n")
