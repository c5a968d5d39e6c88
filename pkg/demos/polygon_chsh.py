"""
CHSH winning probabilities for two polygon systems.

Each party holds a system whose state space is a regular n-gon. For odd n
the composite is the maximal tensor product; for even n the polygon is
first made self-dual and composed with the generalised maximal tensor
product. The optimum is found by one linear program per choice of two
measurements on each side and per CHSH variant.

The last block sweeps the odd polygons again, now only over measurement
pairs whose angular separations differ between the parties. For n = 5,
11 and 13 this restricted family lands exactly on the closed form, while
the unrestricted optimum is higher.

    python demos/polygon_chsh.py [n_max]
"""

import sys

from gptchsh.chsh import TSIRELSON, odd_polygon_formula, optimize_chsh, selfdual_polygon_formula
from gptchsh.composition import generalized_max_tensor, max_tensor
from gptchsh.systems import polygon_system, self_dualize

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 11

print("odd polygons, maximal tensor product")
print(f"{'n':>3} {'optimum':>12} {'formula':>12} {'LPs':>6} {'time':>7}")
for n in range(5, n_max + 1, 2):
    s = polygon_system(n)
    r = optimize_chsh(max_tensor(s, s))
    print(f"{n:>3} {r.optimum:12.8f} {odd_polygon_formula(n):12.8f} {r.problems_solved:>6} {r.wall_time:6.1f}s")

print("\nself-dualised even polygons, generalised maximal tensor product")
for n in range(4, n_max + 2, 2):
    s = self_dualize(polygon_system(n))
    r = optimize_chsh(generalized_max_tensor(s, s))
    print(f"{n:>3} {r.optimum:12.8f} {selfdual_polygon_formula(n):12.8f}")
print(f"Tsirelson {TSIRELSON:.8f}")


def separation(n, pair):
    d = (pair[1] - pair[0]) % n
    return min(d, n - d)


print("\nodd polygons, Alice and Bob restricted to different separations")
for n in range(5, n_max + 1, 2):
    s = polygon_system(n)
    joint = max_tensor(s, s)
    r = optimize_chsh(joint, pair_filter=lambda pa, pb: separation(n, pa) != separation(n, pb))
    print(f"{n:>3} {r.optimum:12.8f} {odd_polygon_formula(n):12.8f}")
