"""
Reference strategies for the adaptive CHSH game.

Quantum: both sources are Bell states, Bob measures in the Bell basis and
Alice and Charlie use fixed qubit bases. Every announcement of Bob leaves
Alice and Charlie with a rotated Bell state, so they win with Tsirelson's
probability whatever Bob says.

Classical: any theory with two perfectly distinguishable states can
share a random bit with each neighbour. Bob tells whether his two bits
agree and Alice and Charlie read out their bits; that wins 3/4 of the
time. Random separable states never do better.

    python demos/references.py
"""

import numpy as np

from gptchsh.chsh import TSIRELSON, classical_bound_check
from gptchsh.game import BOB_OUTCOMES, classical_reference, conditional_table, outcome_probability, p_win, quantum_reference
from gptchsh.systems import gbit_square, polygon_system, trit

q = quantum_reference()
print(f"quantum p_win {p_win(q):.12f} (Tsirelson {TSIRELSON:.12f})")
for b in BOB_OUTCOMES:
    print(f"  b={b} probability {outcome_probability(q, b):.3f}")
print("conditional table for b=(0,0), rows 2*rA+a, columns 2*rC+c")
print(np.round(np.asarray(conditional_table(q, (0, 0)).table(), float), 4))

for system in (gbit_square(), trit(), polygon_system(5)):
    rep = classical_bound_check(samples=200, seed=1, system=system)
    print(f"{system.label:>12}: reference {p_win(classical_reference(system))}, "
          f"best of 200 separable states {float(rep.max_win):.4f}")
