#!/usr/bin/env python3
"""Generate the bundled synthetic code-mixed word corpus.

Words are assembled from class-specific syllable pools: English-like
compounds ("lightford", "waterston"), transliterated-Hindi-like morpheme
sequences ("dilkhushna", "pyaraka"), and named entities built from Indian
name syllables ("rajdeep", "mohindbad"). Final syllables are biased toward
class suffix morphemes (-ing/-tion versus -na/-ko), which concentrates the
strongest n-gram evidence in the frequent suffixes while the rest of the
signal is spread over many moderately frequent syllable grams; pools share
enough material that no class is trivially separable. A Zipf-weighted
sample of repeat occurrences is appended so the dedup statistics are
non-trivial.

The output is deterministic for a given seed. Files written:
  <out>/synthetic_corpus.tsv      surface<TAB>tag rows, shuffled
  <out>/synthetic_manifest.json   expected corpus statistics
"""

import argparse
import json
import random
from pathlib import Path

EN_STEMS = [
    "ster", "ting", "con", "ver", "net", "ware", "ford", "land", "well",
    "ton", "son", "ley", "den", "ner", "ler", "ship", "board", "stream",
    "search", "light", "stone", "press", "trade", "mark", "wood", "field",
    "creek", "night", "water", "count", "spring", "plan", "tree", "bright",
    "clear", "deep", "fast", "gold", "green", "hill", "lake", "long", "mill",
    "north", "east", "west", "south", "port", "rock", "sand", "silver",
    "smith", "snow", "star", "storm", "strong", "swift", "thorn", "view",
    "walk", "white", "wind", "winter", "sum", "mer", "ridge", "brook",
    "back", "bell", "black", "blue", "bridge", "brown", "burn", "bury",
    "camp", "car", "chase", "church", "cliff", "cloud", "coal", "cold",
    "cross", "dale", "dark", "dawn", "door", "down", "drift", "dust",
    "fair", "fall", "farm", "fern", "fire", "fish", "flat", "flint", "fog",
    "fox", "frost", "gate", "glen", "grass", "gray", "grove", "hart",
    "hawk", "hay", "heath", "high", "holt", "hook", "horn", "hunt", "iron",
    "king", "knoll", "leaf", "low", "mar", "marsh", "mead", "moor", "moss",
    "mount", "oak", "old", "pine", "pond", "pool", "quick", "rain", "red",
    "reed", "ring", "river", "road", "rose", "rush",
]
EN_SUFFIXES = {
    "ing": 9, "tion": 7, "er": 6, "ed": 6, "ly": 5, "ness": 4, "ment": 4,
    "ity": 3, "ful": 3, "ous": 3, "ish": 2, "al": 2, "ive": 2, "est": 2,
    "able": 2, "th": 2, "ure": 1, "age": 1, "ism": 1, "ist": 1, "ance": 1,
    "ward": 1, "less": 1, "s": 5, "es": 3,
}

HI_STEMS = [
    "kha", "ghar", "baat", "kar", "raha", "pyar", "dil", "dost", "zind",
    "agi", "khush", "gam", "raat", "din", "subah", "shaam", "paani", "hawa",
    "chai", "gaon", "sheher", "rasta", "sapna", "duniya", "kya", "aaj",
    "kal", "phir", "bhi", "koi", "kuch", "sab", "yeh", "woh", "jab", "tab",
    "hum", "tum", "mera", "tera", "apna", "bada", "chhota", "accha", "bura",
    "naya", "puraana", "meetha", "thanda", "garam", "lambi", "seedha",
    "mushkil", "aasaan", "jaldi", "dheere", "zyada", "thoda", "bahut",
    "aankh", "haath", "pair", "sir", "baal", "naak", "kaan", "pet", "gala",
    "chand", "suraj", "taara", "badal", "barish", "dhoop", "chhaya", "nadi",
    "samandar", "pahad", "jungle", "phool", "patta", "mitti", "patthar",
    "sona", "chandi", "loha", "kapda", "joota", "topi", "roti", "sabzi",
    "doodh", "dahi", "ghee", "namak", "mirch", "haldi", "pyaaz", "aloo",
    "khel", "padh", "likh", "bol", "sun", "dekh", "chal", "daud", "haans",
    "ro", "soch", "samajh", "bhool", "yaad", "mil", "bich", "upar", "neeche",
]
HI_SUFFIXES = {
    "na": 9, "ta": 7, "ko": 6, "ne": 6, "ki": 5, "ka": 5, "ke": 4, "se": 4,
    "ya": 3, "ti": 3, "gi": 2, "ga": 2, "wala": 2, "wali": 2, "kar": 2,
    "hai": 2, "ho": 1, "mein": 1, "par": 1, "tha": 1, "thi": 1, "gaya": 1,
    "liya": 1, "re": 2, "lo": 1,
}

NE_SYLLABLES = [
    "moh", "ind", "raj", "sha", "kum", "del", "mum", "chen", "kol", "pun",
    "jai", "agra", "bad", "pur", "singh", "khan", "lal", "dev", "nath",
    "ram", "shan", "pra", "deep", "esh", "gan", "pat", "bha", "lak", "nav",
    "riya", "sur", "tan", "ved", "yash", "zar", "ore", "gar", "wad", "ner",
    "ban", "mit", "anu", "roh", "sid", "arv", "nir", "ash", "vik", "meh",
    "cha", "dha", "gau", "har", "ish", "jan", "kir", "mad", "nag", "pal",
    "rav", "sam", "tri", "uma", "vas", "abhi", "adi", "aka", "ala", "ama",
    "ani", "arj", "aru", "bal", "bar", "bas", "bil", "bom", "cal", "chan",
    "dar", "das", "dee", "dha", "dil", "dur", "gad", "gop", "gul", "guj",
    "hyd", "jod", "kan", "kap", "kas", "ker", "luck", "mah", "man", "mys",
    "nas", "pad", "pan", "par", "pim", "rai", "ran", "rat", "sat", "sho",
    "sol", "sri", "sub", "tha", "udai", "vad", "var", "vij", "vis",
]
NE_ENDINGS = {
    "singh": 5, "pur": 5, "bad": 4, "esh": 4, "nath": 3, "ram": 3, "raj": 3,
    "dev": 3, "wal": 2, "kar": 2, "ji": 2, "nagar": 2, "garh": 2, "ore": 1,
    "ana": 1, "ika": 1, "an": 2, "a": 2,
}


def _pick(rng: random.Random, table: dict) -> str:
    return rng.choices(list(table), weights=list(table.values()))[0]


def _en_word(rng: random.Random) -> str:
    n = rng.choice([1, 2, 2, 2, 3])
    w = "".join(rng.choice(EN_STEMS) for _ in range(n))
    if rng.random() < 0.6:
        w += _pick(rng, EN_SUFFIXES)
    return w


def _hi_word(rng: random.Random) -> str:
    n = rng.choice([1, 2, 2, 2, 3])
    w = "".join(rng.choice(HI_STEMS) for _ in range(n))
    if rng.random() < 0.6:
        w += _pick(rng, HI_SUFFIXES)
    return w


def _ne_word(rng: random.Random) -> str:
    n = rng.choice([1, 2, 2])
    w = "".join(rng.choice(NE_SYLLABLES) for _ in range(n))
    if rng.random() < 0.55:
        w += _pick(rng, NE_ENDINGS)
    return w


def generate(seed: int = 20240611, n_unique: int = 2600, n_redundant: int = 650):
    """Returns (rows, manifest): occurrence rows in shuffled order plus the
    exact statistics the `stats` command must report for them."""
    rng = random.Random(seed)
    makers = [("EN", _en_word, 0.56), ("HI", _hi_word, 0.28), ("NE", _ne_word, 0.16)]
    words: list[tuple[str, str]] = []
    seen: set[str] = set()
    for tag, make, frac in makers:
        target = round(n_unique * frac)
        made = 0
        attempts = 0
        while made < target:
            w = make(rng)
            attempts += 1
            if attempts > 200 * target:
                raise RuntimeError(f"cannot reach {target} unique words for {tag}")
            if 3 <= len(w) <= 16 and w not in seen:
                seen.add(w)
                words.append((w, tag))
                made += 1

    rows = list(words)
    weights = [1.0 / (i + 1) for i in range(len(words))]
    for surface, tag in rng.choices(words, weights=weights, k=n_redundant):
        rows.append((surface, tag))
    rng.shuffle(rows)

    per_tag = {"EN": 0, "HI": 0, "NE": 0}
    for _, tag in words:
        per_tag[tag] += 1
    manifest = {
        "seed": seed,
        "total_tokens": len(rows),
        "unique_words": len(words),
        "words_en": per_tag["EN"],
        "words_hi": per_tag["HI"],
        "words_ne": per_tag["NE"],
        "removed_redundant": len(rows) - len(words),
    }
    return rows, manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20240611)
    parser.add_argument("--unique", type=int, default=2600)
    parser.add_argument("--redundant", type=int, default=650)
    parser.add_argument(
        "--out-dir",
        default=Path(__file__).resolve().parent.parent / "src" / "hinglish_lid" / "data",
        type=Path,
    )
    args = parser.parse_args(argv)

    rows, manifest = generate(args.seed, args.unique, args.redundant)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    tsv = args.out_dir / "synthetic_corpus.tsv"
    with open(tsv, "w", encoding="utf-8") as fh:
        fh.write(f"# synthetic code-mixed word corpus, generator seed {args.seed}\n")
        for surface, tag in rows:
            fh.write(f"{surface}\t{tag}\n")
    (args.out_dir / "synthetic_manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {tsv} ({manifest['total_tokens']} rows, {manifest['unique_words']} unique)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
