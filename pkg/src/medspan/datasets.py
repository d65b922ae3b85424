"""Bundled synthetic corpus for demos and tests.

The corpus ships as package data and is exactly what
:func:`build_synthetic_corpus` produces with default arguments, so the
generator documents the file and the file pins the generator.
"""

from __future__ import annotations

from importlib.resources import as_file, files

from ._rng import stream
from .corpus import Dataset, Span, Tweet, parse_dataset
from .lexicon import Lexicon

DRUG_NAMES = (
    "tylenol",
    "tums",
    "zofran",
    "benadryl",
    "unisom",
    "colace",
    "aspirin",
    "ibuprofen",
    "advil",
    "motrin",
    "claritin",
    "zyrtec",
    "pepcid",
    "melatonin",
    "metformin",
    "insulin",
    "heparin",
    "progesterone",
    "prozac",
    "paxil",
    "folic acid",
    "prenatal vitamins",
    "birth control",
    "vitamin d",
    "fish oil",
    "iron supplements",
)

_TYPOS = {
    "aspirin": "asprin",
    "benadryl": "benadril",
    "ibuprofen": "ibuprofin",
    "claritin": "clariton",
}

_POSITIVE_TEMPLATES = (
    "ugh this headache will not quit, just took {} again",
    "my ob said {} is fine during pregnancy",
    "living on {} and naps this week",
    "cannot sleep without {} anymore 😴",
    "🤰 still taking {} every morning",
    "anyone else on {} for the nausea?",
    "they switched me from {} to {} this week",
    "popped a {} before my shift, fingers crossed",
    "forgot my {} at home and i am suffering",
    "#pregnancyproblems {} is my best friend rn",
    "started {} today, wish me luck 🍀",
    "the nurse recommended {} but it does nothing for me",
    "refilled my {} prescription on the way home",
    "half a {} with breakfast, doctor's orders",
    "{} at bedtime actually works, who knew",
)

_SPECIAL_POSITIVES = (
    ("week 16 update: the #ZofranPump is keeping me upright", ("#ZofranPump",)),
    (
        "they put me on a blood pressure support blend, no idea what is in it",
        ("blood pressure support blend",),
    ),
    ("switched to lovenox injections after the consult", ("lovenox",)),
    ("nurse said to keep the zofran and swap the colace for now", ("zofran", "colace")),
)

_NEGATIVE_TEMPLATES = (
    "the traffic this morning was absolutely unreal",
    "craving tacos again, send help",
    "my cat just knocked the plant off the shelf 😂",
    "third trimester insomnia is no joke",
    "appointment got moved to thursday, again",
    "the baby kicked all night long",
    "cannot believe it is already week {week}",
    "registry is finally done 🎉",
    "nursery painting day with the crew!",
    "heartburn city over here tonight",
    "aspiring photographer, amateur napper",
    "dropped an anvil on my toe in the game, classic",
    "the glucose test was not as bad as feared",
    "anyone have stroller recommendations?",
    "maternity jeans are the best invention",
    "spent the whole day reorganizing the closet",
    "brunch with the girls was exactly what i needed",
    "the nursery wallpaper finally arrived",
    "my feet are officially two sizes bigger",
    "husband assembled the crib in record time",
    "daycare waitlists are terrifying",
    "watched three documentaries and cried at all of them",
    "the hospital tour is booked for next month",
    "craving ice cubes of all things",
    "braxton hicks had me timing everything yesterday",
    "the name list is down to five options",
    "finally felt hiccups from the inside, wild",
    "hospital bag packed at last 🎒",
    "sunday reset: laundry, meal prep, nap",
    "week {week} bump photo is up on the blog",
)


def _styled(rng, name: str) -> str:
    if name in _TYPOS and rng.random() < 0.15:
        name = _TYPOS[name]
    if rng.random() < 0.25:
        return name[0].upper() + name[1:]
    return name


def _fill(template: str, fillers: list[str]) -> tuple[str, tuple[Span, ...]]:
    parts = template.split("{}")
    text = parts[0]
    spans = []
    for filler, part in zip(fillers, parts[1:]):
        spans.append(Span(len(text), len(text) + len(filler), filler))
        text += filler + part
    return text, tuple(spans)


def build_synthetic_corpus(seed: int = 0, size: int = 200, positive_count: int = 30) -> Dataset:
    """Generate an imbalanced annotated corpus of pregnancy-journal tweets.

    Includes multi-word mentions, misspellings, casing variants, emoji
    before mentions, a hashtag-embedded mention, and a couple of phrases no
    plain lexicon can catch.
    """
    if not 0 < positive_count <= size:
        raise ValueError(f"need 0 < positive_count <= size, got {positive_count}/{size}")
    rng = stream(seed, "synthetic")
    positive_at = set(int(i) for i in rng.choice(size, positive_count, replace=False))
    tweets = []
    specials_used = 0
    for i in range(size):
        tweet_id = f"t{i:04d}"
        user_id = f"u{int(rng.integers(1, 21)):02d}"
        if i in positive_at:
            if specials_used < len(_SPECIAL_POSITIVES):
                text, surfaces = _SPECIAL_POSITIVES[specials_used]
                specials_used += 1
                spans_list = []
                cursor = 0
                for surface in surfaces:
                    start = text.index(surface, cursor)
                    spans_list.append(Span(start, start + len(surface), surface))
                    cursor = start + len(surface)
                spans = tuple(spans_list)
            else:
                template = _POSITIVE_TEMPLATES[int(rng.integers(0, len(_POSITIVE_TEMPLATES)))]
                slots = template.count("{}")
                picks = rng.choice(len(DRUG_NAMES), size=slots, replace=False)
                fillers = [_styled(rng, DRUG_NAMES[int(p)]) for p in picks]
                text, spans = _fill(template, fillers)
        else:
            template = _NEGATIVE_TEMPLATES[int(rng.integers(0, len(_NEGATIVE_TEMPLATES)))]
            text = template.replace("{week}", str(int(rng.integers(6, 39))))
            spans = ()
        tweets.append(Tweet(tweet_id, user_id, text, spans))
    return Dataset("synthetic", tuple(tweets))


def load_synthetic_corpus() -> Dataset:
    """The bundled 200-tweet corpus (30 positives)."""
    data = files("medspan").joinpath("data/synthetic.jsonl").read_bytes()
    return parse_dataset(data, "jsonl", name="synthetic")


def load_drug_lexicon() -> Lexicon:
    """The bundled manual drug list."""
    with as_file(files("medspan").joinpath("data/drugs.txt")) as path:
        return Lexicon.from_file(path)
