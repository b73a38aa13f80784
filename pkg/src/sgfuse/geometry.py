"""Axis-aligned bounding box primitives used throughout the scene-graph stack."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box given by its componentwise min and max corners (meters)."""

    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        if len(self.min) != 3 or len(self.max) != 3:
            raise ValueError("Aabb corners must be 3-vectors")
        object.__setattr__(self, "min", tuple(float(c) for c in self.min))
        object.__setattr__(self, "max", tuple(float(c) for c in self.max))
        for lo, hi in zip(self.min, self.max):
            if lo > hi:
                raise ValueError(f"Aabb min {self.min} exceeds max {self.max}")

    @property
    def extents(self) -> Vec3:
        return tuple(hi - lo for lo, hi in zip(self.min, self.max))

    @property
    def volume(self) -> float:
        ex, ey, ez = self.extents
        return ex * ey * ez

    @property
    def max_length(self) -> float:
        return max(self.extents)

    @property
    def center(self) -> Vec3:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.min, self.max))

    def contains(self, point: Vec3, atol: float = 0.0) -> bool:
        return all(
            lo - atol <= p <= hi + atol
            for p, lo, hi in zip(point, self.min, self.max)
        )

    def translated(self, delta: Vec3) -> "Aabb":
        return Aabb(
            tuple(lo + d for lo, d in zip(self.min, delta)),
            tuple(hi + d for hi, d in zip(self.max, delta)),
        )


def aabb_intersection_volume(a: Aabb, b: Aabb) -> float:
    vol = 1.0
    for alo, ahi, blo, bhi in zip(a.min, a.max, b.min, b.max):
        overlap = min(ahi, bhi) - max(alo, blo)
        if overlap <= 0.0:
            return 0.0
        vol *= overlap
    return vol


def aabb_iou(a: Aabb, b: Aabb) -> float:
    """Intersection-over-union of two boxes, in [0, 1].

    Degenerate (zero-volume) boxes yield 0 unless the two boxes are identical,
    in which case the IoU is defined as 1.
    """
    if a.volume == 0.0 and b.volume == 0.0:
        return 1.0 if (a.min == b.min and a.max == b.max) else 0.0
    inter = aabb_intersection_volume(a, b)
    union = a.volume + b.volume - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def bbox_union(a: Aabb, b: Aabb) -> Aabb:
    """Smallest axis-aligned box containing both inputs."""
    return Aabb(
        tuple(min(alo, blo) for alo, blo in zip(a.min, b.min)),
        tuple(max(ahi, bhi) for ahi, bhi in zip(a.max, b.max)),
    )


def euclidean(a: Vec3, b: Vec3) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def clamp_point(point: Vec3, box: Aabb) -> Vec3:
    return tuple(
        min(max(p, lo), hi) for p, lo, hi in zip(point, box.min, box.max)
    )
