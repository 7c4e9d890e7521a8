"""Scripted experts with ground-truth access, used only for data generation."""

from __future__ import annotations

from stg.envs.grid import GridEnv

UP, DOWN, LEFT, RIGHT, STAY = range(5)


def greedy_action(agent: tuple[int, int], target: tuple[int, int]) -> int:
    """One Manhattan-distance-reducing move toward `target`.

    The axis with the larger remaining gap moves first; ties go to the
    horizontal axis. At the target, stay.
    """
    dr = target[0] - agent[0]
    dc = target[1] - agent[1]
    if dr == 0 and dc == 0:
        return STAY
    if abs(dr) > abs(dc):
        return DOWN if dr > 0 else UP
    return RIGHT if dc > 0 else LEFT


def expert_action(env: GridEnv) -> int:
    """Expert move for the env's current ground-truth state.

    Chase is pure greedy. Corridor routes through the wall gap: greedy to
    the cell left of the gap, one step through, then greedy to the goal -
    each leg is obstacle-free, so the greedy primitive never hits the wall.
    """
    if env.config.task == "chase":
        return greedy_action(env.agent, env.goal)
    wall_col = env.wall_col
    row, col = env.agent
    if col < wall_col:
        staging = (env.gap_row, wall_col - 1)
        if (row, col) == staging:
            return RIGHT
        return greedy_action(env.agent, staging)
    if col == wall_col:
        return RIGHT
    return greedy_action(env.agent, env.goal)
