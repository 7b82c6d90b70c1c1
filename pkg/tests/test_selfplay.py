"""League tests.

The mirror test replays one match with the sides' labels swapped and
asserts the two trajectory streams are bit-identical with roles
exchanged, which pins the whole match loop (sampling streams, stepping,
outcome mapping) to the environment's side symmetry.
"""

from dataclasses import replace

import numpy as np
import pytest

from dogfight.dynamics import AircraftState
from dogfight.environment import BLUE, RED, EngagementState, Outcome, reset
from dogfight.mcts import SearchConfig
from dogfight.mlp import init_params
from dogfight.ppo import RolloutBuffer, TrainConfig
from dogfight.selfplay import (
    AgentCheckpoint,
    IterationMetrics,
    LeagueConfig,
    MatchRecord,
    evaluate_vs_past,
    play_match,
    train_loop,
)

SMALL = (13, 8, 8, 4)
FAST_SEARCH = SearchConfig(num_simulations=4, max_depth=2)


def make_agent(seed, iteration=0):
    return AgentCheckpoint(iteration,
                           init_params(seed, SMALL, with_log_std=True),
                           init_params(seed + 1000, SMALL[:-1] + (1,)),
                           seed, "")


def test_match_record_outcome_validation():
    with pytest.raises(ValueError):
        MatchRecord(0, 0, 0, "Victory", 10, 5.0, 0)


def test_iteration_metrics_partition():
    IterationMetrics(1, 1, 1, 1, 3, None, 0.0)
    with pytest.raises(ValueError):
        IterationMetrics(1, 1, 1, 1, 4, None, 0.0)


def test_league_config_validation():
    LeagueConfig(layer_sizes=SMALL)
    with pytest.raises(ValueError):
        LeagueConfig(iterations=0)
    with pytest.raises(ValueError):
        LeagueConfig(eval_games=0)
    with pytest.raises(ValueError):
        LeagueConfig(layer_sizes=(13, 8, 3))
    with pytest.raises(ValueError):
        LeagueConfig(layer_sizes=(12, 8, 4))


def test_play_match_deterministic():
    a, b = make_agent(0), make_agent(1)
    r1 = play_match(a, b, False, False, 42)
    r2 = play_match(a, b, False, False, 42)
    assert r1 == r2
    assert r1.outcome in ("Win", "Loss", "Draw")
    assert r1.episode_length >= 1 and r1.sim_time > 0.0


def test_play_match_mcts_deterministic():
    a, b = make_agent(2), make_agent(3)
    r1 = play_match(a, b, True, True, 7, search_config=FAST_SEARCH)
    r2 = play_match(a, b, True, True, 7, search_config=FAST_SEARCH)
    assert r1 == r2


def test_play_match_records_blue_transitions():
    a, b = make_agent(4), make_agent(5)
    buffer = RolloutBuffer()
    record = play_match(a, b, False, False, 11, record_side=BLUE, buffer=buffer)
    assert len(buffer) == record.episode_length
    assert buffer.open_count == 0
    episode = buffer.episodes[0]
    z = episode[-1].reward
    assert z in (-1.0, 0.0, 1.0)
    for tr in episode:
        assert tr.obs.shape == (13,)
        assert tr.action.shape == (4,)
        assert np.isfinite(tr.logp) and np.isfinite(tr.value)
        assert tr.z == z
    assert all(not tr.done for tr in episode[:-1]) and episode[-1].done


def test_play_match_rejects_red_recording():
    with pytest.raises(ValueError):
        play_match(make_agent(0), make_agent(1), False, False, 0,
                   record_side=RED, buffer=RolloutBuffer())


def test_play_match_rejects_terminal_initial_state():
    done = replace(reset(0), outcome=Outcome.DRAW)
    with pytest.raises(ValueError):
        play_match(make_agent(0), make_agent(1), False, False, 0,
                   initial_state=done)


def _close_head_on():
    blue = AircraftState(0.0, 0.0, 5000.0, 300.0, 0.0, 0.0)
    red = AircraftState(6000.0, 0.0, 5000.0, 300.0, 0.0, np.pi)
    return EngagementState(blue, red, None, None, False, False, 0.0,
                           Outcome.ONGOING)


def test_play_match_side_swap_mirrors_bitwise():
    # Same agents, same per-side streams, swapped roles and a swapped
    # start state: every trajectory row must transpose exactly.
    a, b = make_agent(6), make_agent(7)
    s = _close_head_on()
    swapped = replace(s, blue=s.red, red=s.blue)
    rows1, rows2 = [], []
    r1 = play_match(a, b, False, False, 0, initial_state=s,
                    seed_a=101, seed_b=202, recorder=rows1.append)
    r2 = play_match(b, a, False, False, 0, initial_state=swapped,
                    seed_a=202, seed_b=101, recorder=rows2.append)
    flip = {"Win": "Loss", "Loss": "Win", "Draw": "Draw"}
    assert r2.outcome == flip[r1.outcome]
    assert r2.episode_length == r1.episode_length
    assert r2.sim_time == r1.sim_time
    assert len(rows1) == len(rows2)
    flip_out = {"BlueWin": "RedWin", "RedWin": "BlueWin",
                "Draw": "Draw", "Ongoing": "Ongoing"}
    # Rows alternate blue, red within each sub-step; the partner of
    # rows1[2k] (blue) is rows2[2k+1] (red) and vice versa.
    paired = [rows2[i + 1] if i % 2 == 0 else rows2[i - 1]
              for i in range(len(rows2))]
    for one, two in zip(rows1, paired):
        assert one[0] == two[0]  # t
        assert one[1] != two[1]  # side label transposed
        assert one[2:11] == two[2:11]  # aircraft and missile coordinates
        assert flip_out[one[11]] == two[11]


def test_evaluate_vs_past_degenerate_pool():
    current = make_agent(8, iteration=5)
    pool = [make_agent(9, iteration=0)]
    records = []
    metrics = evaluate_vs_past(current, pool, np.random.default_rng(0),
                               match_sink=records.append)
    assert metrics.games == 3
    assert metrics.wins + metrics.losses + metrics.draws == 3
    assert len(records) == 3
    assert all(r.opponent_iteration == 0 for r in records)
    assert [r.game_index for r in records] == [0, 1, 2]
    assert metrics.iteration == 5
    assert metrics.seconds > 0.0


def test_evaluate_vs_past_large_pool_resamples():
    current = make_agent(10, iteration=40)
    pool = [make_agent(20 + i, iteration=i) for i in range(40)]
    records = []
    metrics = evaluate_vs_past(current, pool, np.random.default_rng(1),
                               games=1, use_mcts=False,
                               match_sink=records.append)
    assert metrics.games == 36 and len(records) == 36
    opponents = [r.opponent_iteration for r in records]
    assert len(set(opponents)) < 36  # replacement makes collisions overwhelming
    assert all(0 <= i < 40 for i in opponents)


def test_evaluate_vs_past_empty_pool():
    with pytest.raises(ValueError):
        evaluate_vs_past(make_agent(0), [], np.random.default_rng(0))


def _tiny_league(iterations=2, use_mcts=True):
    return LeagueConfig(iterations=iterations,
                        train=TrainConfig(batch_size=64, epochs=2),
                        search=FAST_SEARCH,
                        use_mcts=use_mcts,
                        eval_opponents=2,
                        eval_games=1,
                        layer_sizes=SMALL,
                        config_hash="tiny")


def test_train_loop_two_iterations():
    saved, rows = [], []
    pool, history = train_loop(_tiny_league(), 0,
                               checkpoint_sink=saved.append,
                               metrics_sink=rows.append)
    assert [c.iteration for c in pool] == [0, 1, 2]
    assert [c.iteration for c in saved] == [1, 2]  # no iteration-0 file
    assert len(history) == 2 and rows == history
    for row in history:
        assert row.train is not None
        for v in (row.train.surrogate, row.train.value_loss,
                  row.train.entropy, row.train.clip_fraction, row.train.kl):
            assert np.isfinite(v)
        assert row.wins + row.losses + row.draws == row.games
        assert row.seconds > 0.0 and row.wall_clock > 0.0
    assert all(c.config_hash == "tiny" for c in pool)
    # Training moved the live parameters; snapshots must be distinct copies.
    assert not np.array_equal(pool[0].actor.weights[0], pool[2].actor.weights[0])
    assert pool[1].actor.weights[0] is not pool[2].actor.weights[0]


def test_train_loop_deterministic_history():
    def run():
        _, history = train_loop(_tiny_league(use_mcts=False), 3)
        return history

    h1, h2 = run(), run()
    assert len(h1) == len(h2) == 2
    for a, b in zip(h1, h2):
        assert (a.wins, a.losses, a.draws, a.games) == (b.wins, b.losses, b.draws, b.games)
        assert a.seconds == b.seconds
        assert a.train == b.train  # bitwise equal diagnostics
