"""Tabulate Carnap's m* conditional P(r(n+1) | r holds on I) for a few |I|."""

import argparse

from plpasym.semantics import m_star, m_star_conditional


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=7)
    args = parser.parse_args()

    print(f"{'n':>3}  {'total':>5}  " + "  ".join(f"|I|={k:<3}" for k in range(3)))
    for n in range(1, args.max_n + 1):
        cells = []
        for k in range(3):
            cells.append(f"{str(m_star_conditional(n, range(1, k + 1))):<7}" if k <= n else " " * 7)
        print(f"{n:>3}  {str(m_star(n).total()):>5}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
