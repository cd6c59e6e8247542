"""Seeded synthetic text-message corpus.

The SMS corpus used for keyboard-model studies is not redistributable, so the
harness and tests draw short chat-style sentences from a template grammar.
Each template is a sequence of slots; a slot is a word or a list of
alternatives. Most sentences are four words long.
"""

from __future__ import annotations

import numpy as np

PEOPLE = ["him", "her", "them", "mom", "dad", "sis", "bro", "jake", "emma", "sam", "alex", "grandma", "lisa", "mike"]
TIMES = ["today", "tonight", "tomorrow", "later", "soon", "again", "monday", "friday", "saturday", "sunday", "early", "after", "tmrw"]
PLACES = ["home", "work", "school", "class", "town", "church", "practice", "walmart", "target", "costco", "downtown", "campus", "gym", "library"]
FOODS = ["pizza", "lunch", "dinner", "coffee", "tacos", "breakfast", "sushi", "burgers", "wings", "pancakes", "icecream", "chinese", "subway", "donuts"]
FEEL = ["tired", "hungry", "bored", "sick", "busy", "sleepy", "stressed", "excited", "nervous", "sore", "cold", "drunk", "lost", "broke"]
THINGS = ["phone", "keys", "car", "bag", "wallet", "charger", "laptop", "jacket", "umbrella", "glasses", "headphones", "homework", "book", "ticket"]
GOOD = ["good", "great", "fine", "awesome", "okay", "cool", "amazing", "perfect", "sweet", "nice", "fun", "lovely"]
NAMES = ["babe", "man", "dude", "girl", "hun", "buddy", "sweetie", "honey", "guys", "bestie", "fam", "boo"]
TAGS = ["lol", "haha", "ok", "xoxo", "omg", "ugh", "yay", "lmao", "thx", "pls", "hehe", "smh"]
SHOWS = ["movie", "game", "show", "concert", "match", "episode", "video", "trailer", "finale", "play"]
EVENTS = ["party", "trip", "test", "exam", "meeting", "interview", "date", "wedding", "shift", "appointment", "quiz", "recital"]
ACTS = ["call", "text", "meet", "ask", "pick", "visit", "help", "drive", "email", "tell", "remind", "bring"]
NUMS = ["five", "six", "seven", "eight", "ten", "noon", "minutes", "twenty", "thirty", "nine"]


TEMPLATES: list[list] = [
    [["how", "hows"], ["are", "r", "is"], ["you", "u", "ya", "everyone"], ["doing", "feeling", "holding", "today"]],
    [["wheres", "where"], ["is", "did", "was"], ["the", "our", "that"], ["party", "trip", "meeting", "shift"]],
    [["see", "catch", "meet"], ["ya", "you", "u", "yall"], TIMES, NAMES],
    [["i", "ill"], ["will", "can", "should", "could", "might"], ACTS, PEOPLE],
    [["im", "iam", "feeling"], ["so", "really", "pretty", "kinda", "super"], FEEL, TAGS],
    [["are", "r"], ["you", "u", "ya", "we"], ["coming", "going", "awake", "free", "up", "ready"], TIMES],
    [["what", "whatcha"], ["are", "r", "were"], ["you", "u", "ya", "they"], ["doing", "eating", "watching", "wearing", "making"]],
    [["when", "whens"], ["is", "does", "was", "starts"], ["the", "your", "our", "ur"], EVENTS],
    [["can", "could"], ["you", "u", "ya", "someone"], ["bring", "grab", "get", "find", "pack", "charge"], THINGS],
    [["do", "dont"], ["you", "u", "ya", "yall"], ["want", "need", "like", "miss", "crave"], FOODS],
    [["let", "lemme"], ["me", "us", "them", "mom"], ["know", "see", "check", "think"], ["when", "first", "later", "asap", "tonight"]],
    [["lets", "shall"], ["get", "grab", "have", "order", "try"], FOODS, TIMES],
    [["thanks", "thank", "thx"], ["so", "for", "again", "sm"], ["much", "that", "coming", "dinner", "everything"], NAMES],
    [["running", "driving", "walking"], ["late", "behind", "slow", "fast"], ["be", "sorry", "almost", "nearly"], ["there", "soon", "ok", "ready"]],
    [["just", "finally"], ["got", "left", "finished", "reached"], PLACES, TAGS],
    [["did", "didnt"], ["you", "u", "ya", "anyone"], ["see", "watch", "like", "miss"], SHOWS],
    [["call", "ring", "phone"], ["me", "us", "grandma", "him"], ["when", "after", "before", "during"], ["work", "class", "lunch", "dinner", "practice"]],
    [["have", "enjoy"], ["a", "the", "your", "ur"], GOOD, ["day", "night", "time", "weekend", "trip", "flight"]],
    [["miss", "missing", "missed"], ["you", "u", "ya", "yall"], ["so", "too", "already", "alot"], ["much", "babe", "lots", "hun"]],
    [["love", "luv", "adore"], ["you", "u", "ya", "yall"], ["too", "more", "always", "lots"], NAMES],
    [["that", "this", "it"], ["sounds", "is", "was", "looks"], GOOD, TAGS],
    [["omw", "headed", "heading"], ["to", "from", "back", "toward"], PLACES, TAGS],
    [["onmy", "otw", "enroute"], ["way", "path", "bike", "train"], ["home", "now", "there", "back", "over"], TAGS],
    [["happy", "hbd", "merry"], ["birthday", "bday", "anniversary", "holidays"], ["to", "my", "dear", "lil"], NAMES],
    [["good", "gm", "gn"], ["morning", "night", "luck", "afternoon"], NAMES, TAGS],
    [["is", "isnt"], ["it", "he", "she", "everyone"], ["ready", "there", "home", "okay", "awake"], TIMES],
    [["forgot", "lost", "misplaced"], ["my", "his", "her", "the"], THINGS, TAGS],
    [["cant", "couldnt"], ["find", "see", "hear", "reach", "open"], ["my", "the", "your", "mom's"], THINGS],
    [["who", "whos"], ["is", "was", "else"], ["coming", "there", "driving", "playing", "cooking"], TIMES],
    [["no", "nah"], ["problem", "worries", "prob", "biggie"], ["at", "man", "babe", "dude"], ["all", "whatsoever", "really", "seriously"]],
    [["be", "arriving", "landing"], ["there", "back", "home", "around"], ["in", "by", "around", "at"], NUMS],
    [["text", "msg", "message"], ["me", "us", "him", "her"], ["when", "if", "after", "before"], ["you", "class", "work", "practice"]],
    [["wanna", "want"], ["get", "watch", "play", "grab", "see"], ["food", "movies", "games", "coffee", "something"], TIMES],
    [["ok", "okay", "k"], ["see", "talk", "text", "catch"], ["you", "u", "ya", "yall"], ["soon", "later", "then", "tmrw"]],
    [["we", "yall"], ["should", "could", "can", "gotta"], ["go", "hang", "meet", "chill"], ["out", "tonight", "sometime", "together"]],
    [["my", "our"], THINGS, ["is", "died", "broke", "disappeared"], TAGS],
    [["sorry", "oops"], ["i", "we", "he", "she"], ["missed", "forgot", "was", "slept"], ["your", "it", "late", "in"]],
    [["why", "y"], ["are", "r", "is"], ["you", "u", "ya", "he"], FEEL],
    [["going", "goin", "gonna"], ["to", "toward", "past", "by"], PLACES, TIMES],
    [["pick", "drop", "get"], ["me", "us", "her", "him"], ["up", "off", "there"], ["at", "from", "outside", "near"]],
    [["remember", "remind"], ["the", "your", "ur", "our"], EVENTS, TIMES],
    [["nice", "great", "well"], ["job", "work", "done", "game"], ["on", "at", "in", "with"], ["the", "your", "ur", "that"]],
    [["hope", "hopefully"], ["you", "ur", "the", "everything"], ["feel", "feeling", "day", "trip"], ["better", "good", "went", "okay"]],
    [["need", "needs"], ["anything", "help", "a", "money"], ["from", "with", "for", "ride"], PLACES],
    [["hey", "hi", "yo", "hello"], NAMES, ["whats", "hows", "you", "wassup"], ["up", "going", "there", "new"]],
    [["the", "that", "our"], SHOWS, ["was", "is", "starts", "ended"], GOOD],
    [["leaving", "left"], PLACES, ["now", "soon", "in", "at"], TAGS],
    [["almost", "nearly"], ["done", "there", "home", "ready", "finished"], ["with", "at", "by", "for"], ["work", "the", "class", "dinner"]],
    [["tell", "ask"], PEOPLE, ["i", "to", "that", "we"], ["said", "call", "love", "miss"]],
    [["congrats", "congratulations"], ["on", "to", "about"], ["the", "your", "ur", "his"], EVENTS],
    [["stuck", "waiting", "parked"], ["in", "at", "on", "near"], ["traffic", "work", "class", "the"], TAGS],
    [["grab", "bring", "buy"], ["me", "some", "a", "us"], FOODS, ["pls", "please", "thx", "lol"]],
    [["feel", "get"], ["better", "well", "rested", "healthy"], ["soon", "today", "quick", "babe"], NAMES],
]

SUFFIX_TAGS = ["tho", "rn", "asap", "fr", "btw", "plz"]


def _fill(slot, rng) -> str:
    if isinstance(slot, str):
        return slot
    return slot[int(rng.integers(len(slot)))]


def synthetic_sentence(rng: np.random.Generator) -> str:
    template = TEMPLATES[int(rng.integers(len(TEMPLATES)))]
    words = [_fill(s, rng) for s in template]
    r = rng.random()
    if r < 0.1:
        words = words[:3]
    elif r < 0.2:
        words.append(_fill(SUFFIX_TAGS, rng))
    return " ".join(words)


def synthetic_corpus(n: int, seed: int = 0) -> list[str]:
    """``n`` sentences drawn from the template grammar with a seeded generator."""
    rng = np.random.default_rng(seed)
    return [synthetic_sentence(rng) for _ in range(n)]
