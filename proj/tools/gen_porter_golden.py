#!/usr/bin/env python3
"""Regenerate tests/data/porter_golden.tsv from a reference Porter stemmer.

Requires: pip install nltk english-words snowballstemmer
Words are stemmed with NLTK's PorterStemmer in ORIGINAL_ALGORITHM mode. The
Snowball "porter" stemmer is run as a second opinion and disagreements are
reported on stderr (they are not written to the golden file differently).
"""
import random
import sys

from english_words import get_english_words_set
from nltk.stem.porter import PorterStemmer
import snowballstemmer

CLASSIC = """caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing happy sky
relational conditional rational valenci hesitanci digitizer conformabli radicalli
differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate
formative formalize electriciti electrical hopeful goodness revival allowance inference
airliner gyroscopic adjustable defensible irritant replacement adjustment dependent
adoption homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators medicine influenza sick
cough cold fever flu health recovery children holiday awful""".split()


def main(n=12000, seed=1980, out="tests/data/porter_golden.tsv"):
    words = sorted(w for w in get_english_words_set(["web2"], lower=True)
                   if w.isascii() and w.isalpha())
    rng = random.Random(seed)
    sample = set(rng.sample(words, n)) | set(CLASSIC)
    ref = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    second = snowballstemmer.stemmer("porter")
    with open(out, "w", encoding="utf-8") as f:
        f.write("# word\tporter1980_stem (reference: nltk ORIGINAL_ALGORITHM)\n")
        for w in sorted(sample):
            s = ref.stem(w)
            if s != second.stemWord(w):
                print(f"snowball disagrees: {w} {s} {second.stemWord(w)}", file=sys.stderr)
            f.write(f"{w}\t{s}\n")


if __name__ == "__main__":
    main()
