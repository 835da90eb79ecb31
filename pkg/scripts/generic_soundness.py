"""Compare the generic evaluator's verdict with exact sentence probabilities
computed by weighted model counting, for the curated sentence pool."""

import argparse
from fractions import Fraction

from plpasym.asymptotics import QfType, generic_eval
from plpasym.generate import SENTENCE_VOCAB, SLOW_SENTENCES, sentence_pool
from plpasym.wfomc import sentence_probability


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 5, 6, 7])
    parser.add_argument("--q", type=Fraction, default=Fraction(1, 2))
    parser.add_argument("--include-slow", action="store_true",
                        help="also report sentences whose probability dips before converging")
    args = parser.parse_args()

    q = {"r": args.q, "p": args.q}
    empty = QfType(0, (), frozenset(), SENTENCE_VOCAB)
    pool = sentence_pool() + (sentence_pool(SLOW_SENTENCES) if args.include_slow else [])
    for text, formula in pool:
        verdict = "accept" if generic_eval(formula, empty, []) else "reject"
        values = " ".join(f"{float(sentence_probability(formula, SENTENCE_VOCAB, q, n)):.4f}"
                          for n in args.sizes)
        print(f"{verdict}  {values}  {text}")


if __name__ == "__main__":
    main()
