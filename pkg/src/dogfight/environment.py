"""Two-aircraft engagement world.

An engagement advances in 0.5 s decision steps, each made of 25 physics
sub-steps.  Both sides submit a raw action (nz, nx, roll, fire logit); the
controls are clamped once per decision and held, and a positive fire logit
launches the side's single missile when the launch gate allows it.
Termination is evaluated every sub-step and the outcome is a sparse
terminal reward: +1 to the winner, -1 to the loser, 0 each for a draw.
Only a missile hit produces a winner; ground contact, the 200 s time
limit, and mutual missile expiry all end the engagement drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dynamics import (
    PHYSICS_DT,
    AircraftState,
    clamp_controls,
    rk4_step,
    velocity_vector,
    wrap_angle,
)
from .missile import (
    MissileParams,
    MissileState,
    MissileStatus,
    launch_missile,
    missile_step,
)

BLUE = "blue"
RED = "red"


def other_side(side: str) -> str:
    if side == BLUE:
        return RED
    if side == RED:
        return BLUE
    raise ValueError(f"unknown side {side!r}")

DECISION_DT = 0.5
EPISODE_TIME_LIMIT = 200.0
GROUND_FLOOR = 100.0

FIRE_RANGE = 12000.0
FIRE_BEARING = math.pi / 3

DEFAULT_MISSILE_PARAMS = MissileParams()

_PI = math.pi
_HPI = math.pi / 2

# Normalization bounds, one (lo, hi) pair per observation feature, in the
# feature order produced by observe().
OBS_BOUNDS = (
    (-_PI, _PI),        # own heading
    (-_HPI, _HPI),      # own flight-path angle
    (250.0, 400.0),     # own speed
    (0.0, 10000.0),     # own altitude
    (0.0, 20000.0),     # distance to target
    (0.0, 1.0),         # own missile in flight
    (-_PI, _PI),        # target aspect azimuth, relative to own nose
    (-_HPI, _HPI),      # target aspect elevation
    (-_PI, _PI),        # target heading
    (-_HPI, _HPI),      # target flight-path angle
    (0.0, 20000.0),     # incoming-missile distance
    (-_PI, _PI),        # line-of-sight azimuth, world frame
    (0.0, 1.0),         # incoming missile in flight
)

OBS_DIM = len(OBS_BOUNDS)


class Outcome(Enum):
    ONGOING = "Ongoing"
    BLUE_WIN = "BlueWin"
    RED_WIN = "RedWin"
    DRAW = "Draw"


_REWARDS = {
    Outcome.ONGOING: (0.0, 0.0),
    Outcome.BLUE_WIN: (1.0, -1.0),
    Outcome.RED_WIN: (-1.0, 1.0),
    Outcome.DRAW: (0.0, 0.0),
}


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Initial-condition ranges for reset; lo must not exceed hi."""

    speed_min: float = 250.0
    speed_max: float = 400.0
    alt_min: float = 3000.0
    alt_max: float = 8000.0
    sep_min: float = 5000.0
    sep_max: float = 15000.0
    reward_shaping: bool = False  # stub, must stay off

    def __post_init__(self):
        pairs = ((self.speed_min, self.speed_max),
                 (self.alt_min, self.alt_max),
                 (self.sep_min, self.sep_max))
        for lo, hi in pairs:
            if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 < lo <= hi):
                raise ValueError(f"invalid scenario bounds [{lo}, {hi}]")


DEFAULT_SCENARIO = ScenarioConfig()


@dataclass(frozen=True, slots=True)
class ActionCommand:
    """Raw pre-clamp action: (nz, nx, roll, fire logit)."""

    raw: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.raw) != 4 or not all(math.isfinite(v) for v in self.raw):
            raise ValueError(f"action must be 4 finite reals, got {self.raw}")


Action = Union[ActionCommand, Sequence[float], np.ndarray]


@dataclass(frozen=True, slots=True)
class EngagementState:
    blue: AircraftState
    red: AircraftState
    blue_missile: Optional[MissileState]
    red_missile: Optional[MissileState]
    blue_fired: bool
    red_fired: bool
    t: float
    outcome: Outcome


@dataclass(frozen=True, slots=True)
class StepResult:
    state: EngagementState
    obs_blue: np.ndarray
    obs_red: np.ndarray
    reward_blue: float
    reward_red: float
    done: bool
    outcome: Outcome


TrajectoryRow = tuple
Recorder = Callable[[TrajectoryRow], None]


def reset(seed: int, scenario: ScenarioConfig = DEFAULT_SCENARIO) -> EngagementState:
    """Place both aircraft for a fresh engagement, deterministically per seed.

    Blue starts at the origin, red at the drawn separation along +x.  Draw
    order is fixed (speeds, altitudes, separation, headings, blue before
    red) so a seed always reproduces the same engagement.
    """
    if scenario.reward_shaping:
        raise NotImplementedError("continuous reward shaping is not implemented")
    rng = np.random.default_rng(seed)
    v_b = float(rng.uniform(scenario.speed_min, scenario.speed_max))
    v_r = float(rng.uniform(scenario.speed_min, scenario.speed_max))
    z_b = float(rng.uniform(scenario.alt_min, scenario.alt_max))
    z_r = float(rng.uniform(scenario.alt_min, scenario.alt_max))
    sep = float(rng.uniform(scenario.sep_min, scenario.sep_max))
    phi_b = wrap_angle(float(rng.uniform(0.0, math.tau)))
    phi_r = wrap_angle(float(rng.uniform(0.0, math.tau)))
    blue = AircraftState(0.0, 0.0, z_b, v_b, 0.0, phi_b)
    red = AircraftState(sep, 0.0, z_r, v_r, 0.0, phi_r)
    return EngagementState(blue, red, None, None, False, False, 0.0, Outcome.ONGOING)


def observe(s: EngagementState, side: str) -> np.ndarray:
    """13 features describing the engagement from one side, normalized to [0, 1].

    The construction only uses own/target/own-missile/incoming-missile
    roles, so it is symmetric under swapping sides.
    """
    if side == BLUE:
        own, tgt, own_m, inc_m = s.blue, s.red, s.blue_missile, s.red_missile
    elif side == RED:
        own, tgt, own_m, inc_m = s.red, s.blue, s.red_missile, s.blue_missile
    else:
        raise ValueError(f"unknown side {side!r}")

    dx = tgt.x - own.x
    dy = tgt.y - own.y
    dz = tgt.z - own.z
    dh = math.hypot(dx, dy)
    d = math.hypot(dh, dz)
    beta = math.atan2(dy, dx)
    aspect_az = wrap_angle(beta - own.phi)
    aspect_el = math.atan2(dz, dh)

    f1 = 1.0 if own_m is not None and own_m.status is MissileStatus.IN_FLIGHT else 0.0
    if inc_m is not None and inc_m.status is MissileStatus.IN_FLIGHT:
        d1 = math.sqrt((inc_m.x - own.x) ** 2 + (inc_m.y - own.y) ** 2
                       + (inc_m.z - own.z) ** 2)
        f2 = 1.0
    else:
        d1 = OBS_BOUNDS[10][1]
        f2 = 0.0

    feats = (own.phi, own.gamma, own.v, own.z, d, f1, aspect_az, aspect_el,
             tgt.phi, tgt.gamma, d1, beta, f2)
    out = np.empty(OBS_DIM)
    for i, (x, (lo, hi)) in enumerate(zip(feats, OBS_BOUNDS)):
        u = (x - lo) / (hi - lo)
        out[i] = 0.0 if u < 0.0 else (1.0 if u > 1.0 else u)
    return out


def _as_raw(a: Action) -> tuple[float, float, float, float]:
    if isinstance(a, ActionCommand):
        return a.raw
    raw = (float(a[0]), float(a[1]), float(a[2]), float(a[3]))
    if len(a) != 4 or not all(math.isfinite(v) for v in raw):
        raise ValueError(f"action must be 4 finite reals, got {a!r}")
    return raw


def fire_allowed(own: AircraftState, target: AircraftState) -> bool:
    """Launch gate: target inside 12 km and within 60 degrees of the nose."""
    dx = target.x - own.x
    dy = target.y - own.y
    dz = target.z - own.z
    if dx * dx + dy * dy + dz * dz >= FIRE_RANGE * FIRE_RANGE:
        return False
    bearing = wrap_angle(math.atan2(dy, dx) - own.phi)
    return abs(bearing) < FIRE_BEARING


def _evaluate(blue, red, bm, rm, blue_fired, red_fired, t) -> Outcome:
    blue_hit = rm is not None and rm.status is MissileStatus.HIT
    red_hit = bm is not None and bm.status is MissileStatus.HIT
    if blue_hit and red_hit:
        return Outcome.DRAW
    if blue_hit:
        return Outcome.RED_WIN
    if red_hit:
        return Outcome.BLUE_WIN
    # Ground contact aborts the engagement with no winner; a win has to
    # come from a missile, so random descents cannot feed the reward.
    if blue.z < GROUND_FLOOR or red.z < GROUND_FLOOR:
        return Outcome.DRAW
    if t >= EPISODE_TIME_LIMIT:
        return Outcome.DRAW
    if blue_fired and red_fired \
            and bm.status is MissileStatus.EXPIRED \
            and rm.status is MissileStatus.EXPIRED:
        return Outcome.DRAW
    return Outcome.ONGOING


def trajectory_rows(s: EngagementState) -> list[TrajectoryRow]:
    """Two export rows (blue then red) for the instant captured by s."""
    rows = []
    for side, craft, m in ((BLUE, s.blue, s.blue_missile),
                           (RED, s.red, s.red_missile)):
        if m is not None:
            mx, my, mz = m.x, m.y, m.z
        else:
            mx = my = mz = None
        rows.append((s.t, side, craft.x, craft.y, craft.z, craft.v,
                     craft.gamma, craft.phi, mx, my, mz, s.outcome.value))
    return rows


def env_step(s: EngagementState, a_blue: Action, a_red: Action,
             decision_dt: float = DECISION_DT,
             params: MissileParams = DEFAULT_MISSILE_PARAMS,
             recorder: Optional[Recorder] = None) -> StepResult:
    """Advance the engagement by one decision step.

    Fire decisions are taken once at the decision boundary, then the inner
    sub-steps integrate missiles first (against the aircraft as they were
    at the start of the sub-step, matching the linear-target hit model) and
    the aircraft second.  Termination is checked after every sub-step and
    freezes the state mid-decision.  Stepping a finished engagement returns
    it unchanged with done set.
    """
    if s.outcome is not Outcome.ONGOING:
        return StepResult(s, observe(s, BLUE), observe(s, RED),
                          0.0, 0.0, True, s.outcome)

    n_sub = decision_dt / PHYSICS_DT
    n = round(n_sub)
    if n < 1 or abs(n_sub - n) > 1e-9:
        raise ValueError(
            f"decision_dt {decision_dt} is not a positive multiple of {PHYSICS_DT}")

    raw_b = _as_raw(a_blue)
    raw_r = _as_raw(a_red)
    ctrl_b = clamp_controls(raw_b[1], raw_b[0], raw_b[2])
    ctrl_r = clamp_controls(raw_r[1], raw_r[0], raw_r[2])

    blue, red = s.blue, s.red
    bm, rm = s.blue_missile, s.red_missile
    blue_fired, red_fired = s.blue_fired, s.red_fired

    if raw_b[3] > 0.0 and not blue_fired and fire_allowed(blue, red):
        bm = launch_missile(blue, BLUE, RED)
        blue_fired = True
    if raw_r[3] > 0.0 and not red_fired and fire_allowed(red, blue):
        rm = launch_missile(red, RED, BLUE)
        red_fired = True

    t0 = s.t
    t = t0
    outcome = Outcome.ONGOING
    for i in range(n):
        if bm is not None and bm.status is MissileStatus.IN_FLIGHT:
            bm = missile_step(bm, params, (red.x, red.y, red.z),
                              velocity_vector(red), PHYSICS_DT)
        if rm is not None and rm.status is MissileStatus.IN_FLIGHT:
            rm = missile_step(rm, params, (blue.x, blue.y, blue.z),
                              velocity_vector(blue), PHYSICS_DT)
        blue = rk4_step(blue, ctrl_b, PHYSICS_DT)
        red = rk4_step(red, ctrl_r, PHYSICS_DT)
        t = t0 + (i + 1) * PHYSICS_DT
        outcome = _evaluate(blue, red, bm, rm, blue_fired, red_fired, t)
        if recorder is not None:
            state_i = EngagementState(blue, red, bm, rm, blue_fired,
                                      red_fired, t, outcome)
            for row in trajectory_rows(state_i):
                recorder(row)
        if outcome is not Outcome.ONGOING:
            break

    ns = EngagementState(blue, red, bm, rm, blue_fired, red_fired, t, outcome)
    reward_blue, reward_red = _REWARDS[outcome]
    done = outcome is not Outcome.ONGOING
    return StepResult(ns, observe(ns, BLUE), observe(ns, RED),
                      reward_blue, reward_red, done, outcome)
