"""Minimal-element structure of finite image sets under a cone order.

Indices are 1-based throughout, matching the family numbering f^1..f^p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .cone import ConeSpec
from .errors import EmptyInput


@dataclass(frozen=True)
class PartitionElement:
    """One selector: one function index per minimal-value class."""

    a: tuple


@dataclass(frozen=True)
class MinimalStructure:
    minimal_indices: tuple            # I(x), sorted
    weakly_minimal_indices: tuple     # I_W(x), sorted
    classes: tuple                    # w groups, each a sorted tuple of indices
    representatives: tuple            # one image vector per class
    w: int

    def partition_count(self) -> int:
        out = 1
        for cls in self.classes:
            out *= len(cls)
        return out


def _dominance_matrices(c: ConeSpec, values: np.ndarray, tol: float):
    """leq[j,i] = (v_j <= v_i), lt[j,i] = (v_j < v_i), vectorized."""
    # diff[j,i] = A @ (v_i - v_j); shape (Q, p, p)
    AV = values @ c.A.T                      # (p, Q)
    diff = AV[None, :, :] - AV[:, None, :]   # diff[j,i,q] = (A(v_i - v_j))_q
    leq_mat = np.all(diff >= -tol, axis=2)
    lt_mat = np.all(diff > tol, axis=2)
    return leq_mat, lt_mat


def _as_values(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if values.size == 0:
        raise EmptyInput("empty image set")
    return values


def minimal_elements(c: ConeSpec, values, tol: float = 0.0) -> tuple:
    """Indices i with no j such that v_j <= v_i and v_j != v_i (1-based)."""
    values = _as_values(values)
    leq_mat, _ = _dominance_matrices(c, values, tol)
    distinct = np.any(values[:, None, :] != values[None, :, :], axis=2)
    dominated = np.any(leq_mat & distinct, axis=0)
    return tuple(int(i) + 1 for i in np.flatnonzero(~dominated))


def weakly_minimal_elements(c: ConeSpec, values, tol: float = 0.0) -> tuple:
    """Indices i with no j such that v_j < v_i strictly (1-based)."""
    values = _as_values(values)
    _, lt_mat = _dominance_matrices(c, values, tol)
    dominated = np.any(lt_mat, axis=0)
    return tuple(int(i) + 1 for i in np.flatnonzero(~dominated))


def group_minimal_values(c: ConeSpec, values, minimal, tol_group: float = 1e-8) -> MinimalStructure:
    """Cluster the minimal indices into classes of (numerically) equal value.

    Classes are connected components of the graph linking indices whose
    images differ by at most tol_group in the infinity norm; ordering is
    deterministic by smallest member index.
    """
    values = _as_values(values)
    minimal = sorted(minimal)
    if not minimal:
        raise EmptyInput("empty minimal index set")
    sub = values[np.asarray(minimal, dtype=int) - 1]
    k = len(minimal)
    close = np.max(np.abs(sub[:, None, :] - sub[None, :, :]), axis=2) <= tol_group

    label = [-1] * k
    classes = []
    for start in range(k):
        if label[start] >= 0:
            continue
        comp = []
        stack = [start]
        label[start] = len(classes)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.flatnonzero(close[v]):
                if label[u] < 0:
                    label[u] = len(classes)
                    stack.append(int(u))
        classes.append(tuple(minimal[v] for v in sorted(comp)))

    reps = tuple(values[cls[0] - 1].copy() for cls in classes)
    weak = weakly_minimal_elements(c, values)
    return MinimalStructure(
        minimal_indices=tuple(minimal),
        weakly_minimal_indices=weak,
        classes=tuple(classes),
        representatives=reps,
        w=len(classes),
    )


def analyze(c: ConeSpec, values, tol_order: float = 0.0, tol_group: float = 1e-8) -> MinimalStructure:
    """Minimal elements + grouping in one call (solver entry point)."""
    mins = minimal_elements(c, values, tol_order)
    return group_minimal_values(c, values, mins, tol_group)


def partition_iter(ms: MinimalStructure) -> Iterator[PartitionElement]:
    """Lazily enumerate the partition set in lexicographic order."""
    for combo in itertools.product(*ms.classes):
        yield PartitionElement(a=combo)
