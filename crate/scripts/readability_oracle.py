"""Regenerates crates/core/tests/fixtures/readability.json.

Counts words, sentences, syllables and unfamiliar words with a separate
implementation of the documented rules, then applies the Flesch and
Dale-Chall formulas. Run from the repository root.
"""

import json
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FAMILIAR = ROOT / "crates/core/data/familiar_words.txt"
OUT = ROOT / "crates/core/tests/fixtures/readability.json"

TEXTS = [
    "The cat sat on the mat.",
    "I love this product. It works great!",
    "Battery life is excellent and the charger is fast.",
    "Does it fit? Yes it does. I would buy again.",
    "Terrible packaging; the box arrived crushed and the unit was scratched.",
    "This power bank charges my phone twice before needing a recharge itself.",
    "Good.",
    "Absolutely phenomenal craftsmanship, unbelievably comfortable, extraordinarily durable.",
    "The table is stable. The cable is not! Make sure to charge it.",
    "11000mAh capacity, 2 USB ports, 5V 2A output. Solid build.",
    "My kids use it every day and nothing has broken yet.",
    "Customer service replied quickly and replaced the defective adapter without questions.",
    "Is the warranty valid internationally? The manual does not say.",
    "Cheap plastic. Cheap feel. Cheap price. You get what you pay for.",
    "I bought two of these for my parents and they are very happy with them.",
    "The screen flickers occasionally, especially when brightness is low, which is annoying.",
    "Create, complete and delete operations behave predictably.",
    "Wow!!! Best purchase ever... Seriously.",
    "After three months the left earbud stopped working and the right one crackles.",
    "Lightweight, compact, reliable: everything a traveler needs in a charger.",
]

VOWELS = set("aeiouy")


def sentences(text):
    """Lists of lowercase tokens per non-empty sentence."""
    out = []
    for chunk in re.split(r"[.!?]", text):
        toks = [t.lower() for t in re.findall(r"[A-Za-z0-9]+", chunk)]
        if toks:
            out.append(toks)
    return out


def silent_e(w):
    n = len(w)
    if n < 3 or w[-1] != "e" or w[-2] in VOWELS:
        return False
    if w[-2] == "l" and w[-3] not in VOWELS:
        return False
    i = n - 2
    while i > 0 and w[i] not in VOWELS:
        i -= 1
    if w[i] not in VOWELS:
        return False
    return i == 0 or w[i - 1] not in VOWELS


def syllables(w):
    if w.isdigit():
        return 1
    groups = len(re.findall(r"[aeiouy]+", w))
    if groups > 1 and silent_e(w):
        groups -= 1
    return max(groups, 1)


def main():
    familiar = {
        line.strip().lower()
        for line in FAMILIAR.read_text().splitlines()
        if line.strip() and not line.strip().startswith("#")
    }
    fixtures = []
    for text in TEXTS:
        sents = sentences(text)
        words = [t for s in sents for t in s]
        n_w, n_s = len(words), len(sents)
        syl = sum(syllables(w) for w in words)
        difficult = sum(1 for w in words if w not in familiar)
        pct = 100.0 * difficult / n_w
        dale = 0.1579 * pct + 0.0496 * (n_w / n_s) + (3.6365 if pct > 5.0 else 0.0)
        flesch = 206.835 - 1.015 * (n_w / n_s) - 84.6 * (syl / n_w)
        fixtures.append(
            {
                "text": text,
                "words": n_w,
                "sentences": n_s,
                "syllables": syl,
                "difficult_words": difficult,
                "flesch": flesch,
                "dale_chall": dale,
            }
        )
    OUT.write_text(json.dumps(fixtures, indent=2) + "\n")


if __name__ == "__main__":
    main()
