"""Exact P(s(1)) and total variation to the transformed program for the
two-relation example, for any pair of fact probabilities."""

import argparse
from fractions import Fraction

from plpasym import asymptotic_transform, parse_program, parse_query, program_tv_distance, query_prob


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q-r", type=Fraction, default=Fraction(1, 2))
    parser.add_argument("--q-p", type=Fraction, default=Fraction(1, 2))
    parser.add_argument("--max-n", type=int, default=7)
    args = parser.parse_args()

    program = parse_program(f"{args.q_r} :: r(X).\n{args.q_p} :: p(X,Y).\ns(X) :- r(X), p(X,Y).\n")
    transformed = asymptotic_transform(program)
    print(transformed.to_text())
    print(f"{'n':>3}  {'P(s(1))':>12}  {'closed form':>12}  {'tv':>10}")
    for n in range(1, args.max_n + 1):
        p = query_prob(program, n, parse_query("s(1)"))
        closed = args.q_r * (1 - (1 - args.q_p) ** n)
        tv = program_tv_distance(program, transformed.program, n)
        print(f"{n:>3}  {float(p):>12.6f}  {float(closed):>12.6f}  {float(tv):>10.6f}")


if __name__ == "__main__":
    main()
