"""Group Interval Scheduling Problem: reduction to MIS on a conflict graph.

Tasks are time intervals with a group label.  Two tasks conflict when their
intervals overlap (open-interval convention: touching endpoints are
compatible) or when they belong to the same group; the largest compatible
task subset is the MIS of the conflict graph.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInterval, ParseError
from .graphs import ConflictGraph


@dataclass(frozen=True)
class Task:
    task_id: int
    group_id: int
    start: float
    end: float


@dataclass(frozen=True)
class GispInstance:
    tasks: tuple[Task, ...]

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def max_group_size(self) -> int:
        counts: dict[int, int] = {}
        for t in self.tasks:
            counts[t.group_id] = counts.get(t.group_id, 0) + 1
        return max(counts.values(), default=0)


def _validate(inst: GispInstance):
    for t in inst.tasks:
        if not t.start < t.end:
            raise InvalidInterval(f"task {t.task_id}: start {t.start} >= end {t.end}")


def gisp_to_graph(inst: GispInstance) -> ConflictGraph:
    """Conflict graph of a GISP instance: vertex i = i-th task; edges between
    overlapping intervals and between same-group tasks."""
    _validate(inst)
    edges = set()
    for i in range(inst.n_tasks):
        a = inst.tasks[i]
        for j in range(i + 1, inst.n_tasks):
            b = inst.tasks[j]
            overlap = a.start < b.end and b.start < a.end
            if overlap or a.group_id == b.group_id:
                edges.add((i, j))
    return ConflictGraph(n_vertices=inst.n_tasks, edges=frozenset(edges))


def parse_gisp_dataset(path) -> GispInstance:
    """Parse the GISP CSV format ``task_id,group_id,start,end`` (times in
    minutes since the epoch of the file)."""
    tasks = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != [
            "task_id", "group_id", "start", "end",
        ]:
            raise ParseError("expected header task_id,group_id,start,end", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line=lineno)
            try:
                task = Task(int(row[0]), int(row[1]), float(row[2]), float(row[3]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if not task.start < task.end:
                raise ParseError(
                    f"task {task.task_id}: start {task.start} >= end {task.end}",
                    line=lineno,
                )
            tasks.append(task)
    return GispInstance(tasks=tuple(tasks))


def write_gisp_dataset(inst: GispInstance, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "group_id", "start", "end"])
        for t in inst.tasks:
            writer.writerow([t.task_id, t.group_id, repr(t.start), repr(t.end)])


def synthesize_gisp(
    n_tasks: int,
    n_groups: int,
    horizon_minutes: float = 24 * 60.0,
    duration_range=(30.0, 240.0),
    seed: int = 0,
) -> GispInstance:
    """Synthetic charging-load style instance: uniform start times over the
    horizon, uniform durations, uniform group assignment."""
    rng = np.random.default_rng(seed)
    tasks = []
    for tid in range(n_tasks):
        dur = rng.uniform(*duration_range)
        start = rng.uniform(0.0, max(horizon_minutes - dur, 1.0))
        tasks.append(Task(tid, int(rng.integers(n_groups)), start, start + dur))
    return GispInstance(tasks=tuple(tasks))


def save_instance(inst: GispInstance, path):
    doc = [
        {"task_id": t.task_id, "group_id": t.group_id, "start": t.start, "end": t.end}
        for t in inst.tasks
    ]
    with open(path, "w") as fh:
        json.dump({"tasks": doc}, fh, indent=1)
        fh.write("\n")


def load_instance(path) -> GispInstance:
    with open(path) as fh:
        doc = json.load(fh)
    tasks = tuple(
        Task(t["task_id"], t["group_id"], t["start"], t["end"]) for t in doc["tasks"]
    )
    inst = GispInstance(tasks=tasks)
    _validate(inst)
    return inst
