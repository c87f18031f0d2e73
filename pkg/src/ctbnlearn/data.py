"""Fully observed trajectories and datasets of trajectories."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .model import VariableSpec

__all__ = ["Trajectory", "Dataset", "Segments"]


def _ro(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Trajectory:
    """A sample path: initial joint state plus single-variable jumps.

    ``times[i]``, ``variables[i]`` and ``states[i]`` describe the i-th event:
    at ``times[i]`` variable ``variables[i]`` jumps to ``states[i]``.
    ``absorbed`` marks paths that stopped early in a state with zero exit rate.
    """

    initial: np.ndarray
    times: np.ndarray
    variables: np.ndarray
    states: np.ndarray
    duration: float
    absorbed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "initial", _ro(self.initial, np.int64))
        object.__setattr__(self, "times", _ro(self.times, float).reshape(-1))
        object.__setattr__(self, "variables", _ro(self.variables, np.int64).reshape(-1))
        object.__setattr__(self, "states", _ro(self.states, np.int64).reshape(-1))
        object.__setattr__(self, "duration", float(self.duration))
        k = len(self.times)
        if len(self.variables) != k or len(self.states) != k:
            raise ValueError("times, variables and states must have equal length")
        if k:
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if self.times[0] <= 0 or self.times[-1] > self.duration:
                raise ValueError("event times must lie in (0, duration]")
            n = len(self.initial)
            if self.variables.min() < 0 or self.variables.max() >= n:
                raise ValueError("event variable index out of range")
            path = self.path()
            prev = path[np.arange(k), self.variables]
            if np.any(prev == self.states):
                raise ValueError("an event does not change the state of its variable")
        elif self.duration < 0:
            raise ValueError("negative duration")

    @property
    def n_events(self) -> int:
        return len(self.times)

    def path(self) -> np.ndarray:
        """Joint state held during each of the ``n_events + 1`` segments."""
        k = len(self.times)
        n = len(self.initial)
        out = np.empty((k + 1, n), dtype=np.int64)
        rows = np.arange(1, k + 1)
        for v in range(n):
            sel = self.variables == v
            vals = np.empty(k + 1, dtype=np.int64)
            vals[0] = self.initial[v]
            vals[1:][sel] = self.states[sel]
            pos = np.zeros(k + 1, dtype=np.int64)
            pos[1:][sel] = rows[sel]
            np.maximum.accumulate(pos, out=pos)
            out[:, v] = vals[pos]
        return out

    def rescaled(self, factor: float) -> "Trajectory":
        return Trajectory(self.initial, self.times * factor, self.variables, self.states,
                          self.duration * factor, self.absorbed)


@dataclass(frozen=True)
class Segments:
    """All trajectories flattened into constant-state segments.

    Row ``r`` holds joint state ``states[r]`` for ``dt[r]`` time units and ends
    with variable ``event_var[r]`` jumping to ``event_to[r]``; ``event_var`` is
    -1 for the censored last segment of each trajectory.
    """

    states: np.ndarray
    dt: np.ndarray
    event_var: np.ndarray
    event_to: np.ndarray


@dataclass(frozen=True)
class Dataset:
    variables: tuple[VariableSpec, ...]
    trajectories: tuple[Trajectory, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        cards = np.array(self.cardinalities)
        for j, tr in enumerate(self.trajectories):
            if len(tr.initial) != self.n:
                raise ValueError(f"trajectory {j} has {len(tr.initial)} variables, expected {self.n}")
            if np.any(tr.initial < 0) or np.any(tr.initial >= cards):
                raise ValueError(f"trajectory {j}: initial state out of range")
            if tr.n_events and (np.any(tr.states >= cards[tr.variables]) or np.any(tr.states < 0)):
                raise ValueError(f"trajectory {j}: event state out of range")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def __len__(self):
        return len(self.trajectories)

    @property
    def n_transitions(self) -> int:
        return int(sum(tr.n_events for tr in self.trajectories))

    @property
    def total_time(self) -> float:
        return float(sum(tr.duration for tr in self.trajectories))

    @cached_property
    def segments(self) -> Segments:
        if not self.trajectories:
            return Segments(np.zeros((0, self.n), dtype=np.int64), np.zeros(0),
                            np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        states, dt, ev, to = [], [], [], []
        for tr in self.trajectories:
            states.append(tr.path())
            bounds = np.concatenate(([0.0], tr.times, [tr.duration]))
            dt.append(np.diff(bounds))
            ev.append(np.concatenate((tr.variables, [-1])))
            to.append(np.concatenate((tr.states, [-1])))
        seg = Segments(np.asfortranarray(np.concatenate(states)),
                       *(np.concatenate(a) for a in (dt, ev, to)))
        for a in (seg.states, seg.dt, seg.event_var, seg.event_to):
            a.setflags(write=False)
        return seg

    def rescaled(self, factor: float) -> "Dataset":
        """Same paths with every timestamp multiplied by ``factor``."""
        return Dataset(self.variables, [tr.rescaled(factor) for tr in self.trajectories])

    def select(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.variables, [self.trajectories[i] for i in indices])

    def __add__(self, other: "Dataset") -> "Dataset":
        if self.variables != other.variables:
            raise ValueError("datasets have different variables")
        return Dataset(self.variables, self.trajectories + other.trajectories)
