"""Command-line front end: train, eval, replay, and selfcheck.

Exit codes: 0 on success, 1 on configuration or usage errors, 2 on
runtime errors (unreadable checkpoints, I/O failures, numeric blowups).
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dynamics import PHYSICS_DT, AircraftState, ControlInput, rk4_step
from .harness import (
    CheckpointError,
    ConfigError,
    RunConfig,
    league_config,
    load_checkpoint,
    load_config,
    save_checkpoint,
    serialize_config,
    smoke_profile,
    write_match,
    write_metrics,
    write_trajectory,
)
from .missile import MissileParams, MissileState, MissileStatus, missile_step
from .mlp import backprop, forward, init_params, log_density
# The invariant suite differentiates the production losses themselves, so it
# reaches into ppo for the closures that backprop consumes.
from .ppo import TrainConfig, _actor_loss, _critic_loss
from .selfplay import DRAW, LOSS, WIN, AgentCheckpoint, play_match, train_loop


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.no_mcts:
        overrides["use_mcts"] = False
    if overrides:
        cfg = replace(cfg, **overrides)
    if args.smoke:
        cfg = smoke_profile(cfg)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(serialize_config(cfg), encoding="utf-8")

    league = league_config(cfg)
    # Line buffering keeps both logs valid prefixes if the run dies mid-way.
    with open(out / "metrics.jsonl", "w", encoding="utf-8", buffering=1) as mfp, \
         open(out / "matches.jsonl", "w", encoding="utf-8", buffering=1) as xfp:

        def on_metrics(row) -> None:
            write_metrics(mfp, row)
            tm = row.train
            print(f"iter {row.iteration:3d}/{cfg.iterations}"
                  f"  wins {row.wins:3d}  losses {row.losses:3d}"
                  f"  draws {row.draws:3d}"
                  f"  surrogate {tm.surrogate:+.4f}"
                  f"  value_loss {tm.value_loss:.4f}"
                  f"  wall {row.wall_clock:.1f} s", flush=True)

        def on_checkpoint(ckpt: AgentCheckpoint) -> None:
            save_checkpoint(out / f"checkpoint_{ckpt.iteration:04d}.ckpt", ckpt)

        train_loop(league, cfg.seed, checkpoint_sink=on_checkpoint,
                   metrics_sink=on_metrics,
                   match_sink=lambda rec: write_match(xfp, rec))
    print(f"trained {cfg.iterations} iterations into {out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    if args.games < 1:
        raise ConfigError(f"games must be at least 1, got {args.games}")
    if args.seed < 0:
        raise ConfigError(f"seed must be non-negative, got {args.seed}")
    side_a = load_checkpoint(args.a)
    side_b = load_checkpoint(args.b)
    rng = np.random.default_rng(args.seed)
    tally = {WIN: 0, LOSS: 0, DRAW: 0}
    for game in range(args.games):
        record = play_match(side_a, side_b, args.mcts_a, args.mcts_b,
                            int(rng.integers(0, 2 ** 63)), game_index=game)
        tally[record.outcome] += 1
        print(f"game {game}: {record.outcome} after {record.episode_length} "
              f"decisions ({record.sim_time:.1f} s simulated)", flush=True)
    print(f"a vs b: {tally[WIN]} wins, {tally[LOSS]} losses, "
          f"{tally[DRAW]} draws")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    if args.seed < 0:
        raise ConfigError(f"seed must be non-negative, got {args.seed}")
    side_a = load_checkpoint(args.ckpt_a)
    side_b = load_checkpoint(args.ckpt_b)
    rows: list = []
    record = play_match(side_a, side_b, False, False, args.seed,
                        recorder=rows.append)
    with open(args.traj, "w", encoding="utf-8", newline="") as fp:
        write_trajectory(fp, rows)
    print(f"{record.outcome} after {record.episode_length} decisions "
          f"({record.sim_time:.1f} s simulated); trajectory in {args.traj}")
    return 0


# --- selfcheck invariants ---------------------------------------------------

def _check_trim_drift() -> str:
    s = AircraftState(0.0, 0.0, 1000.0, 300.0, 0.0, 0.0)
    c = ControlInput(0.0, 1.0, 0.0)
    for _ in range(5000):
        s = rk4_step(s, c, PHYSICS_DT)
    dz, dv = abs(s.z - 1000.0), abs(s.v - 300.0)
    if dz >= 1e-6 or dv >= 1e-6:
        raise AssertionError(f"drift after 100 s: dz={dz:.2e} m, dv={dv:.2e} m/s")
    return f"dz={dz:.1e} m, dv={dv:.1e} m/s over 100 s"


def _check_rk4_order() -> str:
    c = ControlInput(1.0, 3.0, 1.0)
    s0 = AircraftState(0.0, 0.0, 5000.0, 250.0, 0.05, -0.4)

    def integrate(n: int) -> float:
        s = s0
        for _ in range(n):
            s = rk4_step(s, c, 0.64 / n)
        return s.phi

    ref = integrate(512)
    err4, err8, err16 = (abs(integrate(n) - ref) for n in (4, 8, 16))
    if err4 / err8 < 8.0 or err8 / err16 < 8.0:
        raise AssertionError(
            f"step-halving factors {err4 / err8:.2f}, {err8 / err16:.2f}")
    return f"step-halving factors {err4 / err8:.1f}, {err8 / err16:.1f}"


def _fly_linear(tpos, tvel) -> MissileState:
    m = MissileState(0.0, 0.0, 5000.0, 300.0, 0.0, 0.0, 0.0, "blue", "red")
    p = MissileParams()
    while m.status is MissileStatus.IN_FLIGHT:
        m = missile_step(m, p, tpos, tvel, PHYSICS_DT)
        tpos = (tpos[0] + tvel[0] * PHYSICS_DT,
                tpos[1] + tvel[1] * PHYSICS_DT,
                tpos[2] + tvel[2] * PHYSICS_DT)
    return m


def _check_pn_head_on() -> str:
    out = _fly_linear((5000.0, 0.0, 5000.0), (-300.0, 0.0, 0.0))
    if out.status is not MissileStatus.HIT:
        raise AssertionError(f"ended {out.status.name} at t={out.t:.2f} s")
    return f"hit at t={out.t:.2f} s"


def _check_pn_crossing() -> str:
    out = _fly_linear((4000.0, 0.0, 5000.0), (0.0, 300.0, 0.0))
    if out.status is not MissileStatus.HIT:
        raise AssertionError(f"ended {out.status.name} at t={out.t:.2f} s")
    return f"hit at t={out.t:.2f} s"


def _max_fd_error(params, x, fn) -> float:
    """Worst central-difference disagreement over every parameter."""
    _, grads = backprop(params, x, fn)
    h = 1e-5
    worst = 0.0
    for p_arr, g_arr in zip(params.tensors(), grads.tensors()):
        flat_p, flat_g = p_arr.ravel(), g_arr.ravel()
        for idx in range(flat_p.size):
            keep = flat_p[idx]
            flat_p[idx] = keep + h
            up, _ = backprop(params, x, fn)
            flat_p[idx] = keep - h
            down, _ = backprop(params, x, fn)
            flat_p[idx] = keep
            numeric = (up - down) / (2.0 * h)
            worst = max(worst, abs(flat_g[idx] - numeric) / max(1.0, abs(numeric)))
    return worst


def _check_gradients() -> str:
    rng = np.random.default_rng(2718)
    actor = init_params(31, (13, 8, 8, 4), with_log_std=True)
    critic = init_params(32, (13, 8, 8, 1))
    obs = rng.uniform(0.0, 1.0, size=(12, 13))
    actions = rng.normal(size=(12, 4))
    old_logp = (np.asarray(log_density(forward(actor, obs), actor.log_std,
                                       actions))
                + rng.normal(scale=0.1, size=12))
    adv = rng.normal(size=12)
    targets = rng.choice(np.array([-1.0, 0.0, 1.0]), size=12)

    cases = (
        ("surrogate", actor,
         _actor_loss(actions, old_logp, adv, TrainConfig(entropy_coeff=0.0), {})),
        ("entropy", actor,
         _actor_loss(actions, old_logp, np.zeros(12),
                     TrainConfig(entropy_coeff=1.0), {})),
        ("value", critic, _critic_loss(targets)),
    )
    worst = 0.0
    for label, params, fn in cases:
        err = _max_fd_error(params, obs, fn)
        if err >= 1e-4:
            raise AssertionError(f"{label} gradient error {err:.2e}")
        worst = max(worst, err)
    return f"max relative error {worst:.1e}"


def _check_batch_forward() -> str:
    params = init_params(44, (13, 8, 8, 4), with_log_std=True)
    x = np.random.default_rng(45).uniform(0.0, 1.0, size=(32, 13))
    rows = np.stack([forward(params, row) for row in x])
    if not np.array_equal(forward(params, x), rows):
        raise AssertionError("batched forward deviates from row-wise forward")
    return "32 rows bitwise equal"


def _check_checkpoint_roundtrip() -> str:
    actor = init_params(7, (13, 8, 8, 4), with_log_std=True)
    critic = init_params(8, (13, 8, 8, 1))
    ckpt = AgentCheckpoint(3, actor, critic, 99, "selfcheck")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "probe.ckpt"
        save_checkpoint(path, ckpt)
        back = load_checkpoint(path)
    pairs = zip(actor.tensors() + critic.tensors(),
                back.actor.tensors() + back.critic.tensors())
    if not all(np.array_equal(a, b) for a, b in pairs):
        raise AssertionError("reloaded parameters differ")
    return "bit-exact"


SELF_CHECKS = (
    ("trim drift", _check_trim_drift),
    ("rk4 order", _check_rk4_order),
    ("pn head-on intercept", _check_pn_head_on),
    ("pn crossing intercept", _check_pn_crossing),
    ("loss gradients", _check_gradients),
    ("batch forward", _check_batch_forward),
    ("checkpoint round-trip", _check_checkpoint_roundtrip),
)


def _cmd_selfcheck(args: argparse.Namespace) -> int:
    del args
    failures = 0
    for name, check in SELF_CHECKS:
        try:
            detail = check()
        except Exception as exc:  # a broken invariant fails its line, not the suite
            print(f"FAIL {name}: {exc}")
            failures += 1
        else:
            print(f"ok   {name}: {detail}")
    if failures:
        print(f"selfcheck: {failures} of {len(SELF_CHECKS)} checks failed",
              file=sys.stderr)
        return 2
    print(f"selfcheck: all {len(SELF_CHECKS)} checks passed")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dogfight",
        description="Deterministic 1-v-1 air-combat self-play laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run the self-play training loop")
    p_train.add_argument("--config", help="INI config file; defaults apply when omitted")
    p_train.add_argument("--seed", type=int, help="master seed override")
    p_train.add_argument("--out", help="output directory override")
    p_train.add_argument("--no-mcts", action="store_true",
                         help="ablation: sample the raw policy, skip search")
    p_train.add_argument("--smoke", action="store_true",
                         help="fast liveness profile: 10 iterations, batch 256, 4 opponents")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="pit two checkpoints against each other")
    p_eval.add_argument("--a", required=True, help="checkpoint flying blue")
    p_eval.add_argument("--b", required=True, help="checkpoint flying red")
    p_eval.add_argument("--games", type=int, default=3)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--mcts-a", action="store_true", help="side a searches")
    p_eval.add_argument("--mcts-b", action="store_true", help="side b searches")
    p_eval.set_defaults(func=_cmd_eval)

    p_replay = sub.add_parser("replay", help="record one match as a trajectory CSV")
    p_replay.add_argument("--ckpt-a", required=True, help="checkpoint flying blue")
    p_replay.add_argument("--ckpt-b", required=True, help="checkpoint flying red")
    p_replay.add_argument("--seed", type=int, default=0)
    p_replay.add_argument("--traj", required=True, help="CSV output path")
    p_replay.set_defaults(func=_cmd_replay)

    p_check = sub.add_parser("selfcheck", help="run the build invariant suite")
    p_check.set_defaults(func=_cmd_selfcheck)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems and 0 after --help; usage
        # problems fold into the configuration-error code.
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (CheckpointError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


main = run_cli


if __name__ == "__main__":
    sys.exit(run_cli())
