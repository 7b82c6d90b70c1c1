"""
Point-mass flight dynamics
==========================

Fly the 3-DOF aircraft model open loop: hold trim, then roll into a
sustained level turn.  Trim (nx=0, nz=1, mu=0) balances gravity exactly,
so speed, altitude and flight-path angle stay put to machine precision.
"""

import math

from dogfight import AircraftState, ControlInput, rk4_step

DT = 0.02
TRIM = ControlInput(nx=0.0, nz=1.0, mu=0.0)

s = AircraftState(x=0.0, y=0.0, z=5000.0, v=300.0, gamma=0.0, phi=0.0)
print(f"start       x={s.x:9.1f}  z={s.z:7.1f}  v={s.v:6.1f}  "
      f"gamma={s.gamma:+.5f}  phi={s.phi:+.4f}")

# Ten seconds of trim: 500 steps straight down the x axis.
for _ in range(500):
    s = rk4_step(s, TRIM, DT)
print(f"after trim  x={s.x:9.1f}  z={s.z:7.1f}  v={s.v:6.1f}  "
      f"gamma={s.gamma:+.5f}  phi={s.phi:+.4f}")

# Bank 60 degrees and double the load factor: a level 2g turn.  The
# vertical lift component nz*cos(mu)=1 still cancels gravity, while the
# horizontal component swings the heading around.
turn = ControlInput(nx=0.0, nz=2.0, mu=math.acos(0.5))
for step in range(1, 1501):
    s = rk4_step(s, turn, DT)
    if step % 500 == 0:
        print(f"turn {step * DT:4.1f} s  x={s.x:9.1f}  y={s.y:9.1f}  "
              f"z={s.z:7.1f}  v={s.v:6.1f}  phi={s.phi:+.4f}")

# Heading rate for a coordinated level turn is g*tan(mu)/v.
rate = 9.8 * math.tan(math.acos(0.5)) / 300.0
print(f"predicted heading rate {rate:.5f} rad/s, "
      f"so 30 s of turn sweeps {rate * 30:.3f} rad")
