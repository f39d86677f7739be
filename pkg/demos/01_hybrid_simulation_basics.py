"""Simulating a system that both flows and jumps.

A hybrid system pairs an ODE (the flow, active on a flow set C) with a
reset rule (the jump, active on a jump set D).  Solutions are parameterized
by hybrid time (t, j): elapsed ordinary time and the number of jumps so
far.  This demo builds the simplest interesting example, a timer that ramps
to a threshold and resets, runs it with the fixed-step executor, and pokes
at the resulting hybrid arc.
"""

import numpy as np

from hybrid_pe import (ExecConfig, HybridSystemDef, HybridTimePoint, simulate,
                       sup_norm, upsilon, write_arc_csv)

# Timer: x' = 1 everywhere, reset x -> 0 once x >= 1.
system = HybridSystemDef(
    flow_map=lambda x, t, j: np.array([1.0]),
    jump_map=lambda x, t, j: np.array([0.0]),
    flow_predicate=lambda x, t, j: True,
    jump_predicate=lambda x, t, j: x[0] >= 1.0,
    state_dim=1,
)

arc = simulate(system, np.array([0.0]), ExecConfig(h=0.05, t_end=3.4))

print("jump times        :", [f"{t:.6f}" for t in arc.domain.jump_times])
print("number of jumps   :", arc.domain.num_jumps)
print("termination reason:", arc.termination)

# The pre-jump instants: points (t, j) whose successor (t, j+1) also lies in
# the domain.  The executor stores the state on both sides of each jump.
print("pre-jump instants :", sorted((p.t, p.j) for p in upsilon(arc.domain)))
for j in range(arc.domain.num_jumps):
    pre = arc.values[j][-1][0]
    post = arc.values[j + 1][0][0]
    print(f"  jump {j}: x = {pre:.6f} -> {post:.6f}")

# The hybrid sup norm scans all samples up to a point in the (t, j) order.
p = HybridTimePoint(2.0, 1)
print(f"sup norm up to (t={p.t}, j={p.j}):", f"{sup_norm(arc, p):.6f}")

# Arcs serialize to CSV with a (t, j) prefix; jumps appear as consecutive
# rows sharing t with j incremented.
write_arc_csv(arc, "/tmp/timer_arc.csv")
print("wrote /tmp/timer_arc.csv")
