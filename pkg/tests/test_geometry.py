"""Box geometry: IoU, unions, distances."""

from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgfuse.geometry import Aabb, aabb_iou, bbox_union, clamp_point, euclidean

from _helpers import monte_carlo_iou


def boxes(max_coord=5.0):
    coord = st.floats(0.0, max_coord, allow_nan=False, width=32)
    return st.builds(
        lambda a, b: Aabb(
            tuple(min(x, y) for x, y in zip(a, b)),
            tuple(max(x, y) for x, y in zip(a, b)),
        ),
        st.tuples(coord, coord, coord),
        st.tuples(coord, coord, coord),
    )


class TestAabb:
    def test_rejects_inverted_corners(self):
        with pytest.raises(ValueError):
            Aabb((1.0, 0.0, 0.0), (0.0, 1.0, 1.0))

    def test_volume_and_lengths(self):
        box = Aabb((0, 0, 0), (2, 3, 4))
        assert box.volume == 24.0
        assert box.max_length == 4.0
        assert box.extents == (2.0, 3.0, 4.0)


class TestIou:
    def test_identity(self):
        cube = Aabb((0, 0, 0), (1, 1, 1))
        assert aabb_iou(cube, cube) == 1.0

    def test_disjoint(self):
        a = Aabb((0, 0, 0), (1, 1, 1))
        b = Aabb((5, 5, 5), (6, 6, 6))
        assert aabb_iou(a, b) == 0.0

    def test_half_overlap(self):
        # Intersection 0.5, union 1.5.
        a = Aabb((0, 0, 0), (1, 1, 1))
        b = Aabb((0.5, 0, 0), (1.5, 1, 1))
        assert aabb_iou(a, b) == pytest.approx(1 / 3)

    def test_degenerate_boxes(self):
        point = Aabb((1, 1, 1), (1, 1, 1))
        other = Aabb((2, 2, 2), (2, 2, 2))
        assert aabb_iou(point, point) == 1.0
        assert aabb_iou(point, other) == 0.0

    def test_monte_carlo_oracle(self):
        rng = Random(7)
        for _ in range(5):
            a = Aabb(
                tuple(rng.uniform(0, 2) for _ in range(3)),
                tuple(rng.uniform(2, 4) for _ in range(3)),
            )
            b = Aabb(
                tuple(rng.uniform(0, 2) for _ in range(3)),
                tuple(rng.uniform(2, 4) for _ in range(3)),
            )
            assert aabb_iou(a, b) == pytest.approx(
                monte_carlo_iou(a, b, rng, samples=60_000), abs=0.02
            )

    @settings(max_examples=200)
    @given(boxes(), boxes())
    def test_bounds_and_symmetry(self, a, b):
        iou = aabb_iou(a, b)
        assert 0.0 <= iou <= 1.0
        assert iou == aabb_iou(b, a)


class TestUnion:
    def test_idempotent(self):
        a = Aabb((0, 0, 0), (1, 2, 3))
        assert bbox_union(a, a) == a

    def test_componentwise_extremes(self):
        a = Aabb((0, 0, 0), (1, 1, 1))
        b = Aabb((2, 2, 2), (3, 3, 3))
        assert bbox_union(a, b) == Aabb((0, 0, 0), (3, 3, 3))

    def test_point_containment_oracle(self):
        rng = Random(3)
        for _ in range(20):
            a = Aabb(
                tuple(rng.uniform(0, 1) for _ in range(3)),
                tuple(rng.uniform(1, 3) for _ in range(3)),
            )
            b = Aabb(
                tuple(rng.uniform(0, 1) for _ in range(3)),
                tuple(rng.uniform(1, 3) for _ in range(3)),
            )
            u = bbox_union(a, b)
            for box in (a, b):
                for _ in range(50):
                    p = tuple(
                        rng.uniform(lo, hi) for lo, hi in zip(box.min, box.max)
                    )
                    assert u.contains(p)

    @settings(max_examples=200)
    @given(boxes(), boxes(), boxes())
    def test_algebraic_laws(self, a, b, c):
        assert bbox_union(a, b) == bbox_union(b, a)
        assert bbox_union(bbox_union(a, b), c) == bbox_union(a, bbox_union(b, c))
        assert bbox_union(a, b).volume >= max(a.volume, b.volume)


def test_clamp_point():
    box = Aabb((0, 0, 0), (1, 1, 1))
    assert clamp_point((2.0, -1.0, 0.5), box) == (1.0, 0.0, 0.5)


def test_euclidean_345():
    assert euclidean((0, 0, 0), (3, 4, 0)) == 5.0
