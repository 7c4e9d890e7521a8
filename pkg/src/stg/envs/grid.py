"""Pixel gridworld with frame-stacked grayscale observations.

Two tasks share the renderer: "chase" places agent and goal anywhere on an
empty grid; "corridor" splits the grid with a one-gap wall and places the
goal on the far side. The agent is the bright square (255), the goal
mid-gray (128), walls dim gray (64) on a black background. Reaching the
goal ends the episode with success; running out the horizon ends it
without. The environment emits no reward signal at all - success flags
feed evaluation only.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from stg.envs.config import EnvConfig

ACTIONS = ("up", "down", "left", "right", "stay")
_MOVES = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1), 4: (0, 0)}

AGENT_INTENSITY = 255
GOAL_INTENSITY = 128
WALL_INTENSITY = 64


class GridEnv:
    """Single-instance environment; not safe for concurrent stepping."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.agent: tuple[int, int] = (0, 0)
        self.goal: tuple[int, int] = (0, 0)
        self.walls: frozenset[tuple[int, int]] = frozenset()
        self.gap_row: int = 0
        self.steps = 0
        self.done = True
        self._stack: Optional[np.ndarray] = None

    # ------------------------------------------------------------------
    # episode control
    # ------------------------------------------------------------------

    def reset(self, rng: "np.random.Generator | int | None" = None) -> np.ndarray:
        """Place agent and goal and return the initial stacked observation.

        The first frame is replicated frame_stack times. Accepts a seeded
        Generator (shared streams stay reproducible) or a plain seed.
        """
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(self.config.seed if rng is None else rng)
        g = self.config.grid
        if self.config.task == "chase":
            self.walls = frozenset()
            agent_idx = int(rng.integers(g * g))
            goal_idx = int(rng.integers(g * g - 1))
            if goal_idx >= agent_idx:
                goal_idx += 1
            self.agent = divmod(agent_idx, g)
            self.goal = divmod(goal_idx, g)
        else:  # corridor
            wall_col = g // 2
            self.gap_row = int(rng.integers(g))
            self.walls = frozenset(
                (row, wall_col) for row in range(g) if row != self.gap_row
            )
            left = [(r, c) for r in range(g) for c in range(wall_col)]
            right = [(r, c) for r in range(g) for c in range(wall_col + 1, g)]
            self.agent = left[int(rng.integers(len(left)))]
            self.goal = right[int(rng.integers(len(right)))]
        self.steps = 0
        self.done = False
        frame = self._render()
        self._stack = np.repeat(frame[None, :, :], self.config.frame_stack, axis=0)
        return self._stack.copy()

    def step(self, action: int) -> tuple[np.ndarray, bool, bool]:
        """Apply an action; returns (observation, done, success).

        Blocked moves (boundary or wall) leave the position unchanged but
        still advance time and shift the frame stack.
        """
        if self.done:
            raise RuntimeError("step() called on a finished episode; reset() first")
        if action not in _MOVES:
            raise ValueError(f"action must be in 0..4 ({'/'.join(ACTIONS)}), got {action}")
        dr, dc = _MOVES[action]
        row, col = self.agent[0] + dr, self.agent[1] + dc
        g = self.config.grid
        if 0 <= row < g and 0 <= col < g and (row, col) not in self.walls:
            self.agent = (row, col)
        self.steps += 1
        success = self.agent == self.goal
        self.done = success or self.steps >= self.config.horizon
        frame = self._render()
        self._stack = np.concatenate([self._stack[1:], frame[None, :, :]], axis=0)
        return self._stack.copy(), self.done, success

    @property
    def truncated(self) -> bool:
        """True when the episode ended by horizon rather than success."""
        return self.done and self.agent != self.goal

    @property
    def wall_col(self) -> int:
        """Column of the corridor wall (fixed by the grid size)."""
        return self.config.grid // 2

    # ------------------------------------------------------------------
    # rendering
    # ------------------------------------------------------------------

    def _render(self) -> np.ndarray:
        size, s = self.config.frame_size, self.config.scale
        frame = np.zeros((size, size), dtype=np.uint8)
        for row, col in self.walls:
            frame[row * s : (row + 1) * s, col * s : (col + 1) * s] = WALL_INTENSITY
        gr, gc = self.goal
        frame[gr * s : (gr + 1) * s, gc * s : (gc + 1) * s] = GOAL_INTENSITY
        ar, ac = self.agent
        frame[ar * s : (ar + 1) * s, ac * s : (ac + 1) * s] = AGENT_INTENSITY
        return frame
