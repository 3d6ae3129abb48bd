"""Tables of weight-one dimensions J_{1,N}(eps^a) and of the dimension formula for index (1).

usage: python scripts/dim_table.py [--nmax 20] [--chars 0,8,16] [--kmax 20]
"""

import argparse
from dataclasses import dataclass, field

from weilform.jacobidim import dim_critical, dim_formula


@dataclass
class TableConfig:
    nmax: int = 20
    chars: list = field(default_factory=lambda: [0, 8, 16])
    kmax: int = 20


def critical_table(cfg: TableConfig) -> list[list[int]]:
    return [[N] + [dim_critical([[2 * N]], char=a or None).total for a in cfg.chars] for N in range(1, cfg.nmax + 1)]


def formula_table(cfg: TableConfig) -> list[tuple[int, str]]:
    return [(k, str(dim_formula([[2]], k).value)) for k in range(3, cfg.kmax + 1)]


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--chars", default="0,8,16")
    p.add_argument("--kmax", type=int, default=20)
    args = p.parse_args(argv)
    cfg = TableConfig(args.nmax, [int(a) for a in args.chars.split(",")], args.kmax)
    print("N  " + "  ".join(f"eps^{a}" for a in cfg.chars))
    for row in critical_table(cfg):
        print(f"{row[0]:<3}" + "  ".join(f"{d:>5}" for d in row[1:]))
    print("\nk  dim J_{k,1}")
    for k, v in formula_table(cfg):
        print(f"{k:<3}{v}")


if __name__ == "__main__":
    main()
