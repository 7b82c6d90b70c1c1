"""
A full engagement between two untrained agents
==============================================

Wire fresh random-weight policies into the engagement loop and play one
seeded match to termination.  Untrained agents rarely manage a kill, so
most seeds end in a draw; the whole match replays bit-identically from
its seed.  The flight path goes to a trajectory CSV.
"""

from dogfight import init_params
from dogfight.harness import write_trajectory
from dogfight.selfplay import AgentCheckpoint, play_match

LAYERS = (13, 256, 256, 4)


def fresh_agent(seed):
    actor = init_params(seed, LAYERS, with_log_std=True)
    critic = init_params(seed + 1, LAYERS[:-1] + (1,))
    return AgentCheckpoint(iteration=0, actor=actor, critic=critic,
                           seed=seed, config_hash="demo")


a = fresh_agent(10)
b = fresh_agent(20)

rows = []
record = play_match(a, b, use_mcts_a=False, use_mcts_b=False, seed=5,
                    recorder=rows.append)
print(f"seed 5: {record.outcome} after {record.episode_length} decisions, "
      f"{record.sim_time:.1f} s simulated")

with open("demo_match.csv", "w", encoding="utf-8", newline="") as fp:
    write_trajectory(fp, rows)
print(f"wrote {len(rows)} trajectory rows to demo_match.csv")

# Replaying the same seed reproduces the engagement exactly.
again = play_match(a, b, use_mcts_a=False, use_mcts_b=False, seed=5)
print(f"replay matches: {again == record}")

# A short seed sweep shows the sparse-reward regime: wins need a missile
# hit, and random policies mostly never line one up.
tally = {}
for seed in range(30):
    r = play_match(a, b, use_mcts_a=False, use_mcts_b=False, seed=seed)
    tally[r.outcome] = tally.get(r.outcome, 0) + 1
print("30-seed sweep:", dict(sorted(tally.items())))
