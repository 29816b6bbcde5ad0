"""Regenerate the bundled word lists under crates/core/data/.

Sources (all fetched as wheels from PyPI, unpacked into SRC):
  textstat     resources/en/easy_words.txt   -> familiar_words.txt (Dale-Chall list)
  textblob     en/en-lexicon.txt (Brill)     -> pos_lexicon.tsv
               en/en-spelling.txt            -> word frequencies, dictionary entries
  english-words data/web2_lower.pickle       -> english_words.txt

usage: python3 scripts/build_wordlists.py SRC OUT
"""
import os
import pickle
import re
import sys

LEXICON_SIZE = 5000

PENN_TO_COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB",
    "VBP": "VERB", "VBZ": "VERB", "MD": "VERB",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
    "PRP": "PRON", "PRP$": "PRON", "WP": "PRON", "WP$": "PRON", "EX": "PRON",
    "DT": "DET", "PDT": "DET", "WDT": "DET",
    "IN": "ADP", "CC": "CONJ", "CD": "NUM",
    "TO": "PRT", "RP": "PRT", "POS": "PRT", "UH": "INTJ",
}

# Review-domain words whose Brill majority tag is wrong for product reviews,
# plus product vocabulary that falls outside the frequency cut.
OVERRIDES = {
    "works": "VERB", "love": "VERB", "loves": "VERB", "like": "VERB",
    "use": "VERB", "charge": "VERB", "charges": "VERB", "fits": "VERB",
    "battery": "NOUN", "charger": "NOUN", "phone": "NOUN", "phones": "NOUN",
    "cable": "NOUN", "cables": "NOUN", "screen": "NOUN", "camera": "NOUN",
    "product": "NOUN", "products": "NOUN", "price": "NOUN", "quality": "NOUN",
    "delivery": "NOUN", "seller": "NOUN", "device": "NOUN", "memory": "NOUN",
    "card": "NOUN", "bank": "NOUN", "usb": "NOUN", "mobile": "NOUN",
    "awesome": "ADJ", "amazing": "ADJ", "excellent": "ADJ", "worst": "ADJ",
    "good": "ADJ", "great": "ADJ", "bad": "ADJ", "nice": "ADJ",
    "the": "DET", "a": "DET", "an": "DET",
}

ALPHA = re.compile(r"^[a-z]+$")


def read_table(path):
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.startswith(";;;") or not line.strip():
                continue
            yield line.split()


def main(src, out):
    tb = os.path.join(src, "textblob", "en")
    freq = {}
    for word, count in read_table(os.path.join(tb, "en-spelling.txt")):
        w = word.lower()
        if ALPHA.match(w):
            freq[w] = freq.get(w, 0) + int(count)

    brill = {}
    for fields in read_table(os.path.join(tb, "en-lexicon.txt")):
        word, tag = fields[0], fields[1]
        if word.islower() and ALPHA.match(word) and word not in brill:
            brill[word] = tag

    ranked = sorted((w for w in freq if w in brill and brill[w] in PENN_TO_COARSE),
                    key=lambda w: (-freq[w], w))
    lexicon = {w: PENN_TO_COARSE[brill[w]] for w in ranked[:LEXICON_SIZE]}
    lexicon.update(OVERRIDES)
    with open(os.path.join(out, "pos_lexicon.tsv"), "w", encoding="utf-8") as f:
        for w in sorted(lexicon):
            f.write(f"{w}\t{lexicon[w]}\n")

    easy = set()
    with open(os.path.join(src, "textstat", "resources", "en", "easy_words.txt"),
              encoding="utf-8") as f:
        for line in f:
            w = line.strip().lower()
            if ALPHA.match(w):
                easy.add(w)
    with open(os.path.join(out, "familiar_words.txt"), "w", encoding="utf-8") as f:
        f.writelines(w + "\n" for w in sorted(easy))

    with open(os.path.join(src, "english_words", "data", "web2_lower.pickle"), "rb") as f:
        web2 = pickle.load(f)
    words = {w for w in web2 if ALPHA.match(w)}
    words |= set(freq) | set(brill) | easy | set(lexicon)
    with open(os.path.join(out, "english_words.txt"), "w", encoding="utf-8") as f:
        f.writelines(w + "\n" for w in sorted(words))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
