#!/usr/bin/env python3
"""Regenerates the bundled demo inputs under data/demo/.

Everything here is synthetic except the state geometry (rounded bounding
boxes and centres) and the 2019 population estimates. Output is fully
determined by SEED.
"""

import csv
import datetime as dt
import json
import os
import random
import sys

SEED = 20200323
OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "demo")

# code, name, region, lat_min, lat_max, lon_min, lon_max, centroid_lat, centroid_lon, population_2019
STATES = [
    ("AK", "Alaska", "West", 51.2, 71.4, -179.2, -129.9, 64.2, -149.5, 731545),
    ("AL", "Alabama", "South", 30.2, 35.0, -88.5, -84.9, 32.8, -86.8, 4903185),
    ("AR", "Arkansas", "South", 33.0, 36.5, -94.6, -89.6, 34.9, -92.4, 3017804),
    ("AZ", "Arizona", "West", 31.3, 37.0, -114.8, -109.0, 34.2, -111.7, 7278717),
    ("CA", "California", "West", 32.5, 42.0, -124.4, -114.1, 37.2, -119.5, 39512223),
    ("CO", "Colorado", "West", 37.0, 41.0, -109.1, -102.0, 39.0, -105.5, 5758736),
    ("CT", "Connecticut", "Northeast", 41.0, 42.1, -73.7, -71.8, 41.6, -72.7, 3565287),
    ("DC", "District of Columbia", "South", 38.79, 38.99, -77.12, -76.91, 38.9, -77.03, 705749),
    ("DE", "Delaware", "South", 38.45, 39.84, -75.79, -75.05, 39.0, -75.5, 973764),
    ("FL", "Florida", "South", 24.5, 31.0, -87.6, -80.0, 28.6, -82.4, 21477737),
    ("GA", "Georgia", "South", 30.4, 35.0, -85.6, -80.8, 32.7, -83.4, 10617423),
    ("HI", "Hawaii", "West", 18.9, 22.2, -160.3, -154.8, 20.8, -156.3, 1415872),
    ("IA", "Iowa", "Midwest", 40.4, 43.5, -96.6, -90.1, 42.0, -93.5, 3155070),
    ("ID", "Idaho", "West", 42.0, 49.0, -117.2, -111.0, 44.4, -114.6, 1787065),
    ("IL", "Illinois", "Midwest", 37.0, 42.5, -91.5, -87.5, 40.0, -89.2, 12671821),
    ("IN", "Indiana", "Midwest", 37.8, 41.8, -88.1, -84.8, 39.9, -86.3, 6732219),
    ("KS", "Kansas", "Midwest", 37.0, 40.0, -102.1, -94.6, 38.5, -98.4, 2913314),
    ("KY", "Kentucky", "South", 36.5, 39.1, -89.6, -82.0, 37.5, -85.3, 4467673),
    ("LA", "Louisiana", "South", 29.0, 33.0, -94.0, -89.0, 31.0, -92.0, 4648794),
    ("MA", "Massachusetts", "Northeast", 41.2, 42.9, -73.5, -69.9, 42.3, -71.8, 6892503),
    ("MD", "Maryland", "South", 37.9, 39.7, -79.5, -75.0, 39.0, -76.8, 6045680),
    ("ME", "Maine", "Northeast", 43.1, 47.5, -71.1, -66.9, 45.4, -69.2, 1344212),
    ("MI", "Michigan", "Midwest", 41.7, 48.3, -90.4, -82.4, 44.3, -85.4, 9986857),
    ("MN", "Minnesota", "Midwest", 43.5, 49.4, -97.2, -89.5, 46.3, -94.3, 5639632),
    ("MO", "Missouri", "Midwest", 36.0, 40.6, -95.8, -89.1, 38.4, -92.5, 6137428),
    ("MS", "Mississippi", "South", 30.2, 35.0, -91.7, -88.1, 32.7, -89.7, 2976149),
    ("MT", "Montana", "West", 44.4, 49.0, -116.1, -104.0, 47.0, -109.6, 1068778),
    ("NC", "North Carolina", "South", 33.8, 36.6, -84.3, -75.5, 35.5, -79.4, 10488084),
    ("ND", "North Dakota", "Midwest", 45.9, 49.0, -104.1, -96.6, 47.5, -100.5, 762062),
    ("NE", "Nebraska", "Midwest", 40.0, 43.0, -104.1, -95.3, 41.5, -99.8, 1934408),
    ("NH", "New Hampshire", "Northeast", 42.7, 45.3, -72.6, -70.6, 43.7, -71.6, 1359711),
    ("NJ", "New Jersey", "Northeast", 38.9, 41.4, -75.6, -73.9, 40.2, -74.7, 8882190),
    ("NM", "New Mexico", "West", 31.3, 37.0, -109.1, -103.0, 34.4, -106.1, 2096829),
    ("NV", "Nevada", "West", 35.0, 42.0, -120.0, -114.0, 39.3, -116.6, 3080156),
    ("NY", "New York", "Northeast", 40.5, 45.0, -79.8, -71.9, 42.9, -75.5, 19453561),
    ("OH", "Ohio", "Midwest", 38.4, 42.0, -84.8, -80.5, 40.3, -82.8, 11689100),
    ("OK", "Oklahoma", "South", 33.6, 37.0, -103.0, -94.4, 35.6, -97.5, 3956971),
    ("OR", "Oregon", "West", 42.0, 46.3, -124.6, -116.5, 43.9, -120.6, 4217737),
    ("PA", "Pennsylvania", "Northeast", 39.7, 42.3, -80.5, -74.7, 40.9, -77.8, 12801989),
    ("RI", "Rhode Island", "Northeast", 41.1, 42.0, -71.9, -71.1, 41.7, -71.5, 1059361),
    ("SC", "South Carolina", "South", 32.0, 35.2, -83.4, -78.5, 33.9, -80.9, 5148714),
    ("SD", "South Dakota", "Midwest", 42.5, 45.9, -104.1, -96.4, 44.4, -100.2, 884659),
    ("TN", "Tennessee", "South", 35.0, 36.7, -90.3, -81.6, 35.9, -86.4, 6829174),
    ("TX", "Texas", "South", 25.8, 36.5, -106.6, -93.5, 31.5, -99.3, 28995881),
    ("UT", "Utah", "West", 37.0, 42.0, -114.1, -109.0, 39.3, -111.7, 3205958),
    ("VA", "Virginia", "South", 36.5, 39.5, -83.7, -75.2, 37.5, -78.8, 8535519),
    ("VT", "Vermont", "Northeast", 42.7, 45.0, -73.4, -71.5, 44.1, -72.7, 623989),
    ("WA", "Washington", "West", 45.5, 49.0, -124.8, -116.9, 47.4, -120.5, 7614893),
    ("WI", "Wisconsin", "Midwest", 42.5, 47.1, -92.9, -86.8, 44.6, -89.9, 5822434),
    ("WV", "West Virginia", "South", 37.2, 40.6, -82.6, -77.7, 38.6, -80.6, 1792147),
    ("WY", "Wyoming", "West", 41.0, 45.0, -111.1, -104.1, 43.0, -107.5, 578759),
]

CITIES = [
    ("New York", "NY"), ("Los Angeles", "CA"), ("Chicago", "IL"), ("Houston", "TX"), ("Phoenix", "AZ"),
    ("Philadelphia", "PA"), ("San Antonio", "TX"), ("San Diego", "CA"), ("Dallas", "TX"), ("San Jose", "CA"),
    ("Austin", "TX"), ("Jacksonville", "FL"), ("Fort Worth", "TX"), ("Columbus", "OH"), ("Charlotte", "NC"),
    ("San Francisco", "CA"), ("Indianapolis", "IN"), ("Seattle", "WA"), ("Denver", "CO"), ("Boston", "MA"),
    ("El Paso", "TX"), ("Nashville", "TN"), ("Detroit", "MI"), ("Oklahoma City", "OK"), ("Portland", "OR"),
    ("Las Vegas", "NV"), ("Memphis", "TN"), ("Louisville", "KY"), ("Baltimore", "MD"), ("Milwaukee", "WI"),
    ("Albuquerque", "NM"), ("Tucson", "AZ"), ("Fresno", "CA"), ("Sacramento", "CA"), ("Kansas City", "MO"),
    ("Mesa", "AZ"), ("Atlanta", "GA"), ("Omaha", "NE"), ("Colorado Springs", "CO"), ("Raleigh", "NC"),
    ("Miami", "FL"), ("Minneapolis", "MN"), ("Tulsa", "OK"), ("Cleveland", "OH"), ("Wichita", "KS"),
    ("New Orleans", "LA"), ("Tampa", "FL"), ("Honolulu", "HI"), ("Pittsburgh", "PA"), ("St. Louis", "MO"),
    ("Orlando", "FL"), ("Newark", "NJ"), ("Anchorage", "AK"), ("Boise", "ID"), ("Richmond", "VA"),
    ("Salt Lake City", "UT"), ("Des Moines", "IA"), ("Birmingham", "AL"), ("Little Rock", "AR"),
    ("Providence", "RI"), ("Jackson", "MS"), ("Charleston", "SC"), ("Sioux Falls", "SD"), ("Fargo", "ND"),
    ("Billings", "MT"), ("Portland", "ME"), ("Hartford", "CT"), ("Wilmington", "DE"), ("Burlington", "VT"),
    ("Cheyenne", "WY"), ("Charleston", "WV"), ("Kansas City", "KS"), ("Concord", "NH"), ("Madison", "WI"),
    ("Springfield", "IL"), ("Springfield", "MO"), ("Springfield", "MA"),
]

ALIASES = [
    ("NYC", "NY"), ("Philly", "PA"), ("SoCal", "CA"), ("NorCal", "CA"), ("Bay Area", "CA"),
    ("Washington DC", "DC"), ("Cali", "CA"), ("The Big Easy", "LA"), ("Mass", "MA"),
    ("Ontario", "NON_US"), ("Bavaria", "NON_US"), ("Catalonia", "NON_US"),
]

FOREIGN_PLACES = ["London, UK", "Toronto, Canada", "Sydney, Australia", "Berlin, Germany", "Mumbai, India",
                  "Lagos, Nigeria", "Mexico City", "Paris, France", "Bavaria", "Dublin, Ireland"]
UNKNOWN_PLACES = ["", "Earth", "the moon", "somewhere sunny", "everywhere", "my couch", "Planet Earth"]

KEYWORDS = ["solar energy", "solar panel", "solar PV", "solar photovoltaic", "solar battery", "solar thermal",
            "solar power", "solar-powered", "solar generation", "solar subsidies"]
STOPPHRASES = ["Pokemon", "Superman", "galaxy", "eclipse", "solar plexus", "solar-powered human",
               "I will become your sun"]

POS_OPENERS = ["Love", "So happy with", "Thrilled about", "Proud of", "Excited for", "Grateful for",
               "Really impressed by", "Great news about"]
NEG_OPENERS = ["Hate", "So annoyed with", "Disappointed by", "Tired of", "Frustrated with", "Angry about",
               "Really unhappy with", "Terrible news about"]
POS_TAILS = ["saving money every month", "clean and reliable", "the future is bright", "best decision ever",
             "bills dropped a lot", "works great", "highly recommend it", "amazing results"]
NEG_TAILS = ["waste of money", "broken again", "bills went up", "awful installer", "total scam",
             "worst decision ever", "nothing but problems", "never again"]
SUBJECTS = ["my new solar panel", "our solar power system", "the solar energy rebate", "our solar battery",
            "the solar PV install", "solar subsidies in town", "the solar thermal heater",
            "this solar-powered charger", "local solar generation"]
NOISE_TEXTS = ["What a galaxy brain take on solar power", "Solar eclipse viewing party with solar panel glasses",
               "my solar plexus hurts after yoga, no solar energy left", "Pokemon go and solar power banks lol"]
OFFTOPIC = ["great weather today", "coffee time", "watching the game tonight", "wind turbines are great"]


def fmt(x):
    return f"{x:.4f}".rstrip("0").rstrip(".")


def write_csv(name, header, rows):
    with open(os.path.join(OUT, name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def policy_rows(rng):
    rows = []
    for (code, _name, region, *_rest) in STATES:
        gen = round(rng.uniform(2, 60), 1)
        kind = rng.random()
        if kind < 0.25:
            target, year = "", ""
        elif kind < 0.35:
            target, year = str(round(gen * rng.uniform(0.5, 0.95), 1)), ""  # already met, no year
        else:
            target = str(round(min(100.0, gen + rng.uniform(5, 60)), 1))
            year = str(rng.choice([2025, 2030, 2035, 2040, 2045, 2050]))
        rows.append([
            code, gen, target, year,
            rng.randint(0, 4), rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 2),
            rng.randint(0, 120), round(rng.uniform(50, 900), 1), round(rng.uniform(8, 30), 2),
            round(rng.uniform(3.0, 6.5), 2), region,
        ])
    return rows


def state_positive_rate(rng, policy):
    rates = {}
    for row in policy:
        code, nem = row[0], row[4] + row[5] + row[6] + row[7] + row[8]
        region = row[13]
        bump = {"West": 0.05, "Northeast": 0.02, "Midwest": -0.03, "South": -0.04}[region]
        rates[code] = min(0.97, max(0.4, 0.72 + 0.015 * nem + bump + rng.gauss(0, 0.04)))
    return rates


def location_for(rng, st):
    code, name = st[0], st[1]
    cities = [c for c, s in CITIES if s == code]
    aliases = [a for a, s in ALIASES if s == code]
    options = [f"{name}", f"{name}, USA", f"{code}"]
    if cities:
        options += [f"{rng.choice(cities)}, {code}", f"{rng.choice(cities)}, {name}"]
    if aliases:
        options.append(rng.choice(aliases))
    return rng.choice(options)


def sentence(rng, positive):
    opener = rng.choice(POS_OPENERS if positive else NEG_OPENERS)
    tail = rng.choice(POS_TAILS if positive else NEG_TAILS)
    return f"{opener} {rng.choice(SUBJECTS)}, {tail}"


def decorate(rng, text):
    r = rng.random()
    if r < 0.15:
        text = f"RT @user{rng.randint(1, 999)}: {text}"
    elif r < 0.25:
        text = f"@friend{rng.randint(1, 99)} {text}"
    if rng.random() < 0.2:
        text += f" https://t.co/{rng.randint(10**6, 10**7)}"
    if rng.random() < 0.15:
        text += " #solar #cleanenergy"
    return text


def corpus(rng, rates):
    weights = [s[9] for s in STATES]
    start = dt.datetime(2020, 1, 1, tzinfo=dt.timezone.utc)
    days = (dt.date(2020, 7, 31) - dt.date(2020, 1, 1)).days + 1
    dip = {dt.date(2020, 3, 23), dt.date(2020, 3, 24), dt.date(2020, 3, 25)}
    lines, n = [], 0

    def stamp(day):
        t = start + dt.timedelta(days=day, seconds=rng.randint(0, 86399))
        return t.strftime("%Y-%m-%dT%H:%M:%SZ")

    for day in range(days):
        date = (start + dt.timedelta(days=day)).date()
        count = 90 if date in dip else 30
        for _ in range(count):
            n += 1
            st = rng.choices(STATES, weights)[0]
            p = rates[st[0]] - (0.45 if date in dip else 0.0)
            positive = rng.random() < p
            rec = {"id": f"p{n:06d}", "text": decorate(rng, sentence(rng, positive)),
                   "screen_name": f"user{rng.randint(1, 50000)}", "user_description": "just a person",
                   "created_at": stamp(day), "is_retweet": rng.random() < 0.1}
            where = rng.random()
            if where < 0.3:
                jl = (st[4] - st[3]) * 0.04
                jo = (st[6] - st[5]) * 0.04
                rec["lat"] = round(st[7] + rng.uniform(-jl, jl), 5)
                rec["lon"] = round(st[8] + rng.uniform(-jo, jo), 5)
                if rng.random() < 0.3:
                    rec["user_location"] = rng.choice(UNKNOWN_PLACES[1:])
            elif where < 0.85:
                rec["user_location"] = location_for(rng, st)
            elif where < 0.93:
                rec["user_location"] = rng.choice(FOREIGN_PLACES)
            else:
                loc = rng.choice(UNKNOWN_PLACES)
                if loc:
                    rec["user_location"] = loc
            if rng.random() < 0.05:
                rec["extended_text"] = rec["text"] + " (full thread below)"
            lines.append(json.dumps(rec, ensure_ascii=False))
            r = rng.random()
            if r < 0.02:
                lines.append(json.dumps(rec, ensure_ascii=False))  # duplicate id
            elif r < 0.05:
                n += 1
                lines.append(json.dumps({"id": f"p{n:06d}", "text": rng.choice(NOISE_TEXTS),
                                         "screen_name": "stargazer", "user_description": "",
                                         "user_location": location_for(rng, st), "created_at": stamp(day)}))
            elif r < 0.08:
                n += 1
                lines.append(json.dumps({"id": f"p{n:06d}", "text": rng.choice(OFFTOPIC),
                                         "screen_name": "SolarPanelPro",
                                         "user_description": "solar panel installer",
                                         "user_location": location_for(rng, st), "created_at": stamp(day)}))
            elif r < 0.10:
                n += 1
                lines.append(json.dumps({"id": f"p{n:06d}", "text": rng.choice(OFFTOPIC),
                                         "screen_name": "someone", "user_description": "",
                                         "created_at": stamp(day)}))
            elif r < 0.105:
                lines.append('{"id": "broken", "text": ')
            elif r < 0.11:
                n += 1
                lines.append(json.dumps({"id": f"p{n:06d}", "text": "solar power", "created_at": "yesterday"}))
    return lines


def annotations(rng):
    rows = []
    for _ in range(600):
        positive = rng.random() < 0.7
        text = sentence(rng, positive)
        if rng.random() < 0.05:
            positive = not positive  # annotator disagreement
        rows.append((decorate(rng, text), "positive" if positive else "negative"))
    for _ in range(30):
        rows.append((f"Article about {rng.choice(SUBJECTS)} published today", "neutral"))
    rng.shuffle(rows)
    return rows


def main():
    os.makedirs(OUT, exist_ok=True)
    rng = random.Random(SEED)
    write_csv("states.csv", ["code", "name", "region", "lat_min", "lat_max", "lon_min", "lon_max",
                             "centroid_lat", "centroid_lon"],
              [[s[0], s[1], s[2]] + [fmt(v) for v in s[3:9]] for s in STATES])
    rank = {}
    city_rows = []
    for i, (c, s) in enumerate(CITIES):
        city_rows.append([c, s, i + 1])
        rank[(c, s)] = i + 1
    write_csv("cities.csv", ["city", "state_code", "rank"], city_rows)
    write_csv("aliases.csv", ["alias", "state_code"], ALIASES)
    write_csv("population.csv", ["state_code", "population"], [[s[0], s[9]] for s in STATES])
    policy = policy_rows(rng)
    write_csv("policy_synthetic.csv",
              ["state", "renewable_generation", "rps_target_percent", "rps_target_year", "nem_mechanism",
               "nem_cap", "nem_subscriber", "nem_compensation", "nem_rollover", "incentives_count",
               "solar_jobs_per_million", "electricity_price", "solar_radiation", "region"], policy)
    rates = state_positive_rate(rng, policy)
    with open(os.path.join(OUT, "corpus.jsonl"), "w") as f:
        f.write("\n".join(corpus(rng, rates)) + "\n")
    with open(os.path.join(OUT, "annotations.tsv"), "w") as f:
        f.write("text\tlabel\n")
        for text, label in annotations(rng):
            f.write(f"{text}\t{label}\n")
    with open(os.path.join(OUT, "keywords.txt"), "w") as f:
        f.write("# one phrase per line\n" + "\n".join(KEYWORDS) + "\n")
    with open(os.path.join(OUT, "stopphrases.txt"), "w") as f:
        f.write("# posts containing any of these are dropped\n" + "\n".join(STOPPHRASES) + "\n")
    config = {
        "corpus": "corpus.jsonl", "keywords": "keywords.txt", "stopphrases": "stopphrases.txt",
        "gazetteer": ".", "population": "population.csv", "policy": "policy_synthetic.csv",
        "annotations": "annotations.tsv", "exclude": "2020-03-23..2020-03-25", "out_dir": "../../out/demo",
        "seed": 42,
    }
    with open(os.path.join(OUT, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
