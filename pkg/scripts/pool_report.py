"""Summarise the generated program pool: determinacy, projectivity, the size of
each transform and its total variation to the source program."""

import argparse

from plpasym import asymptotic_transform, check_determinate, program_tv_distance
from plpasym.errors import ScaleLimitExceeded
from plpasym.generate import PoolConfig, program_pool
from plpasym.semantics import Family, check_projective


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=PoolConfig.seed)
    parser.add_argument("--size", type=int, default=PoolConfig.size)
    parser.add_argument("--max-n", type=int, default=4)
    args = parser.parse_args()

    pool = program_pool(PoolConfig(seed=args.seed, size=args.size))
    for member in pool:
        transformed = asymptotic_transform(member.program)
        projective = check_projective(Family.from_program(member.program), args.max_n).holds
        tvs = []
        for n in range(1, args.max_n + 1):
            try:
                tvs.append(f"{float(program_tv_distance(member.program, transformed.program, n)):.4f}")
            except ScaleLimitExceeded:
                tvs.append("-")
        print(f"{member.name}  determinate={check_determinate(member.program)[0]!s:<5} "
              f"projective={projective!s:<5} rules={len(transformed.program.rules):>2}  tv={' '.join(tvs)}")


if __name__ == "__main__":
    main()
