import math

import numpy as np
import pytest

from raycasimir.core import Geometry, PathClass
from raycasimir.lattice import (
    LatticeIndex,
    classify,
    crossing_lines,
    enumerate_images,
    fold,
    image_position,
    is_allowed,
    path_length_even,
    path_length_odd,
)


def test_classify_parities():
    assert classify(0, 0) is PathClass.EVEN
    assert classify(1, 0) is PathClass.ODD
    assert classify(0, 1) is PathClass.ODD
    assert classify(1, 1) is PathClass.FORBIDDEN


def test_reduced_index():
    assert LatticeIndex(4, 6).reduced == (2, 3)
    assert LatticeIndex(3, 0).reduced == (1, 0)


def test_enumeration_counts_and_order():
    imgs = list(enumerate_images(5))
    by_order = {}
    for im in imgs:
        by_order.setdefault(im.order, []).append(im)
    for r, group in by_order.items():
        assert len(group) == 4 * r
        classes = [im.path_class for im in group]
        # odd orders have no even images, even orders have no odd ones
        if r % 2:
            assert PathClass.EVEN not in classes
        else:
            assert PathClass.ODD not in classes
    orders = [im.order for im in imgs]
    assert orders == sorted(orders)


def test_image_positions_fill_positions():
    g = Geometry(1.0, 1.0, 0.25)
    im = next(iter(enumerate_images(1, start=(0.3, 0.4), geometry=g)))
    assert im.position is not None
    assert image_position(g, (0.3, 0.4), 1, 0) == (pytest.approx(1.7), 0.4)
    assert image_position(g, (0.3, 0.4), 0, -1)[1] == pytest.approx(-0.4)


def test_fold_is_triangle_wave():
    y = np.array([0.2, 1.7, 2.3, -0.4])
    assert np.allclose(fold(y, 1.5), [0.2, 1.3, 0.7, 0.4])


def test_even_length_is_start_independent():
    g = Geometry(0.8, 1.1, 0.3)
    for n, m in [(1, 0), (1, 2), (3, 1)]:
        x, y = image_position(g, (0.1, 0.9), 2 * n, 2 * m)
        assert math.hypot(x - 0.1, y - 0.9) == pytest.approx(path_length_even(g, n, m))
    with pytest.raises(ValueError):
        path_length_even(g, 0, 0)


def test_odd_length_dependence():
    g = Geometry(1.0, 1.0, 0.0)
    y_inv = path_length_odd(g, (2, 1), (np.array([0.1, 0.9]), np.array([0.3, 0.3])))
    assert y_inv[0] == pytest.approx(y_inv[1])
    with pytest.raises(ValueError):
        path_length_odd(g, (2, 2), (0.1, 0.1))


def test_crossing_lines():
    assert list(crossing_lines(3)) == [1, 2, 3]
    assert list(crossing_lines(-2)) == [-1, 0]


def test_forbidden_images_always_escape(rng):
    # 10^4 random (geometry, start, image) trials with both parities odd
    failures = 0
    for _ in range(10_000):
        g = Geometry(rng.uniform(0.1, 5), rng.uniform(0.1, 5), rng.choice([0.0, rng.uniform(0, 3)]))
        start = (rng.uniform(0, g.a), rng.uniform(0, g.period))
        p = int(rng.integers(0, 8)) * 2 + 1
        q = int(rng.integers(0, 8)) * 2 + 1
        p *= int(rng.choice([-1, 1]))
        q *= int(rng.choice([-1, 1]))
        failures += bool(is_allowed(g, start, (p, q)))
    assert failures == 0


def test_h_zero_allows_generic_paths(rng):
    g = Geometry(1.0, 1.0, 0.0)
    x = rng.uniform(0, 1, 1000)
    y = rng.uniform(0, 1, 1000)
    assert is_allowed(g, (x, y), (4, 2)).all()
    assert is_allowed(g, (x, y), (3, 2)).all()


def test_escape_through_gap():
    g = Geometry(1.0, 1.0, 0.5)
    # from mid-height, aiming so the crossing at x = a falls inside the gap
    assert not is_allowed(g, (0.5, 1.0), (2, 1))
    assert is_allowed(g, (0.5, 1.0), (2, 0))
