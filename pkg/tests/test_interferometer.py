import math

import numpy as np
import pytest

from ridgephase.errors import BadPinholePair, CollinearPinholes, EmptyImage, GeometryOverlap
from ridgephase.interferometer import (
    CYCLIC_PAIRS,
    Interferogram,
    NoiseSpec,
    ObservationGrid,
    PinholeGeometry,
    SourceConfig,
    check_paraxial_validity,
    exact_intensity,
    pair_fringe,
    paraxial_intensity,
    quantize,
    relative_deviation,
)
from ridgephase.states import H, V, JonesVector, paper_states, visibility

from conftest import K_PAPER


def same_states(psi=H):
    return (psi, psi, psi)


class TestGeometry:
    def test_recentering(self):
        g = PinholeGeometry([[1e-3, 2e-3], [3e-3, 2.5e-3], [1.7e-3, 4e-3]])
        r = np.linalg.norm(g.positions, axis=1)
        assert np.allclose(r, g.circumradius, rtol=1e-12)
        assert g.area == pytest.approx(0.5 * abs(2e-3 * 2e-3 - 0.5e-3 * 0.7e-3))

    def test_equilateral(self, paper_geom):
        assert paper_geom.separation(1, 2) == pytest.approx(1.5e-3, rel=1e-12)
        assert paper_geom.circumradius == pytest.approx(1.5e-3 / math.sqrt(3), rel=1e-12)
        assert paper_geom.area == pytest.approx(math.sqrt(3) / 4 * 1.5e-3 ** 2, rel=1e-12)
        p = paper_geom.positions
        # left, right, upper
        assert p[0, 0] < 0 < p[1, 0] and p[2, 1] > 0

    def test_k_and_b_identities(self):
        g = PinholeGeometry([[0.0, 0.0], [2e-3, 0.3e-3], [0.4e-3, 1.1e-3]])
        k = g.k_vectors(K_PAPER, 2.0)
        assert np.linalg.norm(k.sum(axis=0)) <= 1e-12 * np.linalg.norm(k[0])
        for i, (j, m) in zip((1, 2, 3), ((2, 3), (3, 1), (1, 2))):
            b, kjm = g.b_vector(i), g.k_vector(j, m, K_PAPER, 2.0)
            assert abs(b @ kjm) <= 1e-12 * np.linalg.norm(b) * np.linalg.norm(kjm)

    def test_collinear(self):
        with pytest.raises(CollinearPinholes):
            PinholeGeometry([[0, 0], [1e-3, 1e-3], [2e-3, 2e-3]])

    def test_bad_pair(self, paper_geom):
        with pytest.raises(BadPinholePair):
            paper_geom.k_vector(2, 2, K_PAPER, 2.0)


class TestExact:
    def test_zero_amplitude_limit(self, paper_geom, small_grid):
        # C -> 0 is excluded by validation; intensity scales as C^2
        src = SourceConfig(K_PAPER, paper_states(1.0), amplitude=1e-200)
        assert np.all(exact_intensity(paper_geom, src, small_grid).samples == 0)

    def test_on_axis_maximum(self, paper_geom):
        grid = ObservationGrid(2.0, 101, 101, 9e-6, 9e-6)
        p = exact_intensity(paper_geom, SourceConfig(K_PAPER, same_states()), grid).samples
        assert np.unravel_index(np.argmax(p), p.shape) == (50, 50)
        assert p[50, 50] == pytest.approx(9 / (4.0 + paper_geom.circumradius ** 2), rel=1e-12)

    def test_overlap_error(self, paper_geom):
        a1 = paper_geom.position(1)
        grid = ObservationGrid(1e-7, 3, 3, 1e-9, 1e-9, (a1[0], a1[1]))
        with pytest.raises(GeometryOverlap):
            exact_intensity(paper_geom, SourceConfig(K_PAPER, same_states()), grid)

    def test_global_phase_invariance(self, paper_geom, small_grid):
        src = SourceConfig(K_PAPER, paper_states(0.7), (0.1, -0.4, 2.0))
        shifted = src.with_phases([p + 1.234 for p in src.phases])
        for model in (exact_intensity, paraxial_intensity):
            a = model(paper_geom, src, small_grid).samples
            b = model(paper_geom, shifted, small_grid).samples
            assert np.max(np.abs(a - b)) <= 1e-12 * np.max(a)


class TestParaxial:
    def test_identical_states_center(self, paper_geom, small_grid):
        grid = ObservationGrid(2.0, 11, 11, 9e-6, 9e-6)
        p = paraxial_intensity(paper_geom, SourceConfig(K_PAPER, same_states()), grid).samples
        assert p[5, 5] == pytest.approx(9 / 4.0, rel=1e-12)

    def test_orthogonal_pair_flat(self, paper_geom, small_grid):
        src = SourceConfig(K_PAPER, (H, V, JonesVector.normalized(1, 1)))
        p12 = pair_fringe(paper_geom, src, 1, 2, small_grid).samples
        assert np.allclose(p12, 2 / 4.0, rtol=1e-15)
        p23 = pair_fringe(paper_geom, src, 2, 3, small_grid).samples
        assert np.ptp(p23) > 0.5

    def test_pair_sum_reproduces_total(self, paper_geom, small_grid):
        src = SourceConfig(K_PAPER, paper_states(0.9), (0.3, 1.0, -2.0), amplitude=1.7)
        total = paraxial_intensity(paper_geom, src, small_grid).samples
        parts = sum(pair_fringe(paper_geom, src, i, j, small_grid).samples for i, j in CYCLIC_PAIRS)
        parts = parts - 3 * src.amplitude ** 2 / small_grid.L ** 2
        assert np.max(np.abs(total - parts)) <= 1e-12 * np.max(total)

    def test_visibilities_at_90(self, paper_geom, small_grid):
        src = SourceConfig.paper(math.pi / 2)
        s = src.states
        vis = sorted(visibility(s[i - 1], s[j - 1]) for i, j in CYCLIC_PAIRS)
        assert vis == pytest.approx([0.5, 0.5, 0.5])
        # and the (2,3) fringe swings between 2(1 -/+ V) C^2/L^2
        p23 = pair_fringe(paper_geom, src, 2, 3, small_grid).samples * 4.0
        assert p23.max() == pytest.approx(3.0, abs=1e-3) and p23.min() == pytest.approx(1.0, abs=1e-3)

    def test_fringe_spacing(self, paper_geom):
        spacing = 2 * math.pi / np.linalg.norm(paper_geom.k_vector(1, 2, K_PAPER, 2.0))
        assert spacing == pytest.approx(532e-9 * 2.0 / 1.5e-3, rel=1e-12)
        assert spacing == pytest.approx(0.709e-3, rel=1e-3)
        # horizontal pair: sample the fringe along x and read the period off zero crossings
        grid = ObservationGrid(2.0, 4001, 3, 1e-6, 1e-6)
        src = SourceConfig(K_PAPER, same_states(), (0.0, 0.0, 0.0))
        row = pair_fringe(paper_geom, src, 1, 2, grid).samples[1] - 2 / 4.0
        x = grid.x
        cross = x[:-1][np.sign(row[:-1]) != np.sign(row[1:])]
        assert np.mean(np.diff(cross)) * 2 == pytest.approx(spacing, rel=2e-3)

    def test_energy_average(self):
        # right-angle pinholes give carriers on a square lattice; a grid of
        # whole periods averages every cosine to zero
        d = 1e-3
        geom = PinholeGeometry([[0, 0], [d, 0], [0, d]])
        kappa = K_PAPER * d / 2.0
        period = 2 * math.pi / kappa
        n = 64
        grid = ObservationGrid(2.0, 3 * n, 2 * n, period / n, period / n)
        rng = np.random.default_rng(1)
        for _ in range(5):
            states = tuple(JonesVector.normalized(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
                           for _ in range(3))
            src = SourceConfig(K_PAPER, states, tuple(rng.uniform(0, 6, 3)), amplitude=1.3)
            p = paraxial_intensity(geom, src, grid).samples
            assert p.mean() == pytest.approx(3 * 1.3 ** 2 / 4.0, rel=1e-12)

    def test_single_pinhole_shift_translates_two_families(self, paper_geom, small_grid):
        src = SourceConfig.paper(1.1)
        beta = 0.8
        moved = src.with_phases((beta, 0.0, 0.0))
        # P23 does not see pinhole 1
        assert np.array_equal(pair_fringe(paper_geom, src, 2, 3, small_grid).samples,
                              pair_fringe(paper_geom, moved, 2, 3, small_grid).samples)
        # P12 is translated by s with k12 . s = beta
        k12 = paper_geom.k_vector(1, 2, K_PAPER, 2.0)
        s = k12 * beta / (k12 @ k12)
        back = ObservationGrid(2.0, small_grid.nx, small_grid.ny, small_grid.dx, small_grid.dy,
                               (-s[0], -s[1]))
        a = pair_fringe(paper_geom, moved, 1, 2, small_grid).samples
        b = pair_fringe(paper_geom, src, 1, 2, back).samples
        assert np.max(np.abs(a - b)) < 1e-9


class TestExactVsParaxial:
    def test_paper_grid(self, paper_geom, paper_grid):
        src = SourceConfig.paper(1.3, phases=(0.2, 0.0, -0.5))
        dev = relative_deviation(exact_intensity(paper_geom, src, paper_grid),
                                 paraxial_intensity(paper_geom, src, paper_grid))
        assert dev < 1e-3

    def test_decreases_with_distance(self, paper_geom, small_grid):
        src = SourceConfig.paper(0.4)
        devs = []
        for L in (0.5, 1.0, 2.0, 4.0):
            g = small_grid.with_distance(L)
            devs.append(relative_deviation(exact_intensity(paper_geom, src, g),
                                           paraxial_intensity(paper_geom, src, g)))
        assert all(b < a for a, b in zip(devs, devs[1:]))


class TestValidity:
    def test_paper_margins(self, paper_geom, paper_grid):
        rep = check_paraxial_validity(paper_geom, paper_grid, K_PAPER)
        scale = (8.0 / K_PAPER) ** 0.25
        assert rep.scale == pytest.approx(scale, rel=1e-12)
        assert scale == pytest.approx(0.0287, abs=5e-4)
        assert rep.far_ratio == pytest.approx(scale / 2.0)
        # brute force over every pixel center
        X, Y = paper_grid.mesh()
        reach = max(np.hypot(X - a[0], Y - a[1]).max() for a in paper_geom.positions)
        assert rep.near_ratio == pytest.approx(reach / scale, rel=1e-12)
        half_diag = math.hypot(*(np.array([640 * 9e-6, 480 * 8e-6]) / 2))
        assert half_diag / scale == pytest.approx(0.12, abs=0.005)
        # pinhole offset pushes the strict margin just past 0.1
        assert 0.1 < rep.near_ratio < 0.16 and not rep.passed

    def test_far_limit_passes(self, paper_geom, paper_grid):
        assert check_paraxial_validity(paper_geom, paper_grid.with_distance(1e4), K_PAPER).passed

    def test_large_grid_fails(self, paper_geom):
        scale = (8.0 / K_PAPER) ** 0.25
        grid = ObservationGrid(2.0, 11, 11, scale / 10, scale / 10)
        rep = check_paraxial_validity(paper_geom, grid, K_PAPER)
        assert not rep.passed


class TestQuantize:
    def test_constant(self, small_grid):
        img = Interferogram(small_grid, np.full(small_grid.shape, 0.3))
        r = quantize(img, 8)
        assert np.all(r.pixels == 255)

    def test_round_trip_bound(self, paper_geom, small_grid):
        img = paraxial_intensity(paper_geom, SourceConfig.paper(0.6), small_grid)
        for depth in (8, 16):
            r = quantize(img, depth)
            back = r.to_interferogram().samples
            rel = img.samples / img.samples.max()
            assert np.max(np.abs(back - rel)) <= 1 / 2 ** depth

    def test_empty(self, small_grid):
        with pytest.raises(EmptyImage):
            quantize(Interferogram(small_grid, np.zeros(small_grid.shape)))

    def test_bad_depth(self, small_grid):
        with pytest.raises(ValueError):
            quantize(Interferogram(small_grid, np.ones(small_grid.shape)), 12)

    def test_seeded_noise(self, paper_geom, small_grid):
        img = paraxial_intensity(paper_geom, SourceConfig.paper(0.6), small_grid)
        a = quantize(img, 16, NoiseSpec(1000, seed=5)).pixels
        b = quantize(img, 16, NoiseSpec(1000, seed=5)).pixels
        c = quantize(img, 16, NoiseSpec(1000, seed=6)).pixels
        assert np.array_equal(a, b) and not np.array_equal(a, c)
        # shot noise at 1000 counts: relative scatter ~ 1/sqrt(1000)
        clean = quantize(img, 16).pixels.astype(float)
        ratio = a.astype(float) / a.mean() - clean / clean.mean()
        assert 0.01 < np.std(ratio) < 0.06
