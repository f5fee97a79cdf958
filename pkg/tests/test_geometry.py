import numpy as np
import pytest

from maskseq import (
    BinaryMask,
    Contour,
    box_iou,
    extract_contours,
    largest_contour,
    mask_iou,
    rasterize_polygon,
    shoelace_area,
)
from maskseq.geometry import ring_perimeter, signed_ring_area

from conftest import naive_iou, naive_rasterize, random_convex_ring, rect_mask


class TestExtractContours:
    def test_empty_mask(self):
        assert extract_contours(BinaryMask(np.zeros((8, 8), bool))) == []

    def test_filled_square(self):
        # 4x4 foreground block with top-left pixel (2, 2)
        c = extract_contours(rect_mask(2, 2, 4, 4, size=8))
        assert len(c) == 1
        assert c[0].bbox == (2.0, 2.0, 6.0, 6.0)
        assert shoelace_area(c[0]) == 16.0

    def test_two_disjoint_squares(self):
        m = np.zeros((16, 16), bool)
        m[1:4, 1:4] = True
        m[8:14, 8:14] = True
        cs = extract_contours(BinaryMask(m))
        assert sorted(shoelace_area(c) for c in cs) == [9.0, 36.0]

    def test_clockwise_orientation(self, rng):
        for _ in range(10):
            m = rng.random((30, 40)) < 0.35
            if not m.any():
                continue
            for c in extract_contours(BinaryMask(m)):
                assert c.signed_area > 0
                assert c.clockwise

    def test_single_pixel(self):
        cs = extract_contours(rect_mask(3, 5, 1, 1, size=10))
        assert len(cs) == 1
        assert shoelace_area(cs[0]) == 1.0

    def test_diagonal_pair_is_one_component(self):
        m = np.zeros((4, 4), bool)
        m[0, 0] = m[1, 1] = True
        cs = extract_contours(BinaryMask(m))
        assert len(cs) == 1
        assert shoelace_area(cs[0]) == 2.0

    def test_holes_not_returned(self):
        m = np.zeros((10, 10), bool)
        m[1:9, 1:9] = True
        m[3:7, 3:7] = False
        cs = extract_contours(BinaryMask(m))
        assert len(cs) == 1
        assert shoelace_area(cs[0]) == 64.0  # outer ring only

    def test_pixel_count_matches_area_for_rectilinear(self, rng):
        for _ in range(10):
            m = np.zeros((64, 64), bool)
            for _ in range(2):
                x, y = rng.integers(2, 30, size=2)
                w, h = rng.integers(4, 28, size=2)
                m[y : y + h, x : x + w] = True
            mask = BinaryMask(m)
            cs = extract_contours(mask)
            if len(cs) == 1:
                # rectilinear single component without holes: exact match
                inner = rasterize_polygon(cs[0].points, 64, 64)
                assert inner == mask


class TestLargestContour:
    def test_max_selection(self):
        big = Contour([(0, 0), (4, 0), (4, 4), (0, 4)])
        small = Contour([(0, 0), (2, 0), (2, 2), (0, 2)])
        assert largest_contour([big, small]) is big
        assert largest_contour([small, big]) is big

    def test_singleton(self):
        c = Contour([(0, 0), (3, 0), (0, 3)])
        assert largest_contour([c]) is c

    def test_tie_breaks_to_first(self):
        a = Contour([(0, 0), (3, 0), (3, 3), (0, 3)])
        b = Contour([(10, 10), (13, 10), (13, 13), (10, 13)])
        assert largest_contour([a, b]) is a

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="no contour"):
            largest_contour([])


class TestShoelace:
    def test_unit_square(self):
        assert shoelace_area(Contour([(0, 0), (1, 0), (1, 1), (0, 1)])) == 1.0

    def test_triangle(self):
        assert shoelace_area(Contour([(0, 0), (4, 0), (0, 3)])) == 6.0

    def test_big_square(self):
        assert shoelace_area(Contour([(0, 0), (10, 0), (10, 10), (0, 10)])) == 100.0


class TestRasterize:
    def test_full_cover(self):
        sq = [(0, 0), (10, 0), (10, 10), (0, 10)]
        assert rasterize_polygon(sq, 10, 10).pixel_count == 100

    def test_exact_count_on_bigger_grid(self):
        sq = [(0, 0), (10, 0), (10, 10), (0, 10)]
        m = rasterize_polygon(sq, 20, 20)
        assert m.pixel_count == 100
        assert m.array[:10, :10].all()

    def test_bowtie_even_odd_matches_bruteforce(self):
        bow = np.array([(0, 0), (4, 4), (4, 0), (0, 4)], dtype=float)
        got = rasterize_polygon(bow, 6, 6)
        assert np.array_equal(got.array, naive_rasterize(bow, 6, 6))

    def test_random_polygons_match_bruteforce(self, rng):
        for _ in range(8):
            ring = rng.uniform(-3, 20, size=(7, 2))
            got = rasterize_polygon(ring, 16, 16)
            assert np.array_equal(got.array, naive_rasterize(ring, 16, 16))

    def test_degenerate_errors(self):
        with pytest.raises(ValueError, match="degenerate polygon"):
            rasterize_polygon([(0, 0), (1, 1)], 4, 4)

    def test_clipped_by_grid(self):
        huge = [(-100, -100), (100, -100), (100, 100), (-100, 100)]
        assert rasterize_polygon(huge, 8, 8).pixel_count == 64

    def test_area_close_to_shoelace(self, rng):
        # discretization bound on random convex rings inside the grid
        for _ in range(20):
            ring = random_convex_ring(rng, n=int(rng.integers(5, 12)))
            c = Contour(ring)
            px = rasterize_polygon(ring, 256, 256).pixel_count
            bound = ring_perimeter(ring) + 4
            assert abs(px - shoelace_area(c)) <= bound

    def test_retrace_is_idempotent(self, rng):
        for _ in range(10):
            ring = random_convex_ring(rng, n=int(rng.integers(5, 12)))
            first = rasterize_polygon(ring, 256, 256)
            if not first.array.any():
                continue
            traced = largest_contour(extract_contours(first))
            second = rasterize_polygon(traced.points, 256, 256)
            assert first == second


class TestIoU:
    def test_identity(self):
        m = rect_mask(2, 2, 6, 6, size=16)
        assert mask_iou(m, m) == 1.0

    def test_disjoint(self):
        assert mask_iou(rect_mask(0, 0, 4, 4, 16), rect_mask(8, 8, 4, 4, 16)) == 0.0

    def test_shifted_square(self):
        a = rect_mask(0, 0, 10, 10, size=32)
        b = rect_mask(5, 0, 10, 10, size=32)
        assert mask_iou(a, b) == pytest.approx(50 / 150)

    def test_both_empty_is_one(self):
        e = BinaryMask(np.zeros((4, 4), bool))
        assert mask_iou(e, e) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimensions differ"):
            mask_iou(rect_mask(0, 0, 2, 2, 8), rect_mask(0, 0, 2, 2, 9))

    def test_symmetry_and_range(self, rng):
        for _ in range(10):
            a = BinaryMask(rng.random((12, 12)) < 0.5)
            b = BinaryMask(rng.random((12, 12)) < 0.5)
            v = mask_iou(a, b)
            assert v == mask_iou(b, a)
            assert 0.0 <= v <= 1.0

    def test_matches_naive_oracle(self, rng):
        for _ in range(5):
            a = rng.random((10, 10)) < 0.4
            b = rng.random((10, 10)) < 0.4
            assert mask_iou(BinaryMask(a), BinaryMask(b)) == pytest.approx(naive_iou(a, b))


class TestBoxIoU:
    def test_identical(self):
        assert box_iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0

    def test_half_overlap(self):
        assert box_iou((0, 0, 10, 10), (5, 0, 15, 10)) == pytest.approx(50 / 150)

    def test_disjoint(self):
        assert box_iou((0, 0, 10, 10), (20, 20, 30, 30)) == 0.0


class TestContourType:
    def test_rejects_too_few(self):
        with pytest.raises(ValueError):
            Contour([(0, 0), (1, 1)])

    def test_rejects_duplicate_consecutive(self):
        with pytest.raises(ValueError):
            Contour([(0, 0), (0, 0), (1, 1), (2, 0)])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Contour([(0, 0), (np.nan, 1), (1, 1)])

    def test_signed_area_sign(self):
        cw = Contour([(0, 0), (1, 0), (1, 1), (0, 1)])
        ccw = Contour([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert cw.signed_area > 0 and cw.clockwise
        assert ccw.signed_area < 0 and not ccw.clockwise
        assert signed_ring_area(cw.points) == -signed_ring_area(ccw.points)
