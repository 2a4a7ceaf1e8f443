import io
import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy import stats

from dynamics.builtins import uniform_marks
from noise.batch import NoiseBatch
from noise.dump import dump_noise, load_noise
from noise.exceptions import GridError, NoiseError
from noise.paths import TimeGrid, coarsen, from_increments, sample_noise
from noise.streams import Purpose, open_uniforms, substream


class TimeGridTests(SimpleTestCase):
    """Tests for TimeGrid.

    Methods:
        test_nodes: Nodes run from 0 to T exactly with step T / n.
        test_invalid: Nonpositive T and n_steps are rejected.
        test_nested_nodes: A coarsened grid shares the fine grid's nodes.
        test_index_of: Times map to the closest node.

    """

    def test_nodes(self):
        grid = TimeGrid(2.0, 8)
        self.assertEqual(grid.dt, 0.25)
        self.assertEqual(grid.nodes[0], 0.0)
        self.assertEqual(grid.nodes[-1], 2.0)
        self.assertTrue(np.all(np.diff(grid.nodes) > 0))
        self.assertEqual(grid.t_start, 0.0)

    def test_invalid(self):
        for args in ((0.0, 4), (-1.0, 4), (float('inf'), 4), (1.0, 0),
                     (1.0, 2.5)):
            with self.assertRaises(GridError):
                TimeGrid(*args)

    def test_nested_nodes(self):
        grid = TimeGrid(0.7, 96)
        coarse = grid.coarsen(8)
        np.testing.assert_array_equal(grid.nodes[::8], coarse.nodes)

    def test_index_of(self):
        grid = TimeGrid(1.0, 4)
        self.assertEqual(grid.index_of(0.5), 2)
        self.assertEqual(grid.index_of(1.0), 4)
        with self.assertRaises(GridError):
            grid.index_of(1.5)


class SampleNoiseTests(SimpleTestCase):
    """Tests for sample_noise and the substreams.

    Methods:
        test_no_jumps_without_intensity: lam = 0 never produces jumps.
        test_deterministic: Equal (seed, path_index) give identical paths.
        test_streams_differ: Distinct path indices and purposes differ.
        test_jump_times_and_marks: Times are sorted in (0, T]; marks are
            nonzero.
        test_invalid_intensity: Negative or infinite lam is rejected.
        test_open_uniforms: Uniforms never hit 0 or 1.
        test_jump_step_convention: A jump exactly at t_1 belongs to step 0.

    """

    def setUp(self):
        self.grid = TimeGrid(1.0, 16)

    def test_no_jumps_without_intensity(self):
        for index in range(20):
            path = sample_noise(self.grid, 0.0, uniform_marks, 3, index)
            self.assertEqual(path.jumps, [])
            self.assertEqual(path.n_jumps, 0)

    def test_deterministic(self):
        first = sample_noise(self.grid, 2.0, uniform_marks, 42, 7)
        second = sample_noise(self.grid, 2.0, uniform_marks, 42, 7)
        np.testing.assert_array_equal(first.dB, second.dB)
        self.assertEqual(first.jumps, second.jumps)
        self.assertEqual(first.stream_id, 7)

    def test_streams_differ(self):
        first = sample_noise(self.grid, 2.0, uniform_marks, 42, 7)
        second = sample_noise(self.grid, 2.0, uniform_marks, 42, 8)
        self.assertFalse(np.array_equal(first.dB, second.dB))
        a = substream(1, 2, Purpose.BROWNIAN).random(4)
        b = substream(1, 2, Purpose.MARKS).random(4)
        self.assertFalse(np.array_equal(a, b))

    def test_jump_times_and_marks(self):
        path = sample_noise(TimeGrid(3.0, 10), 20.0, uniform_marks, 1, 0)
        self.assertGreater(path.n_jumps, 0)
        self.assertTrue(np.all(path.jump_times > 0))
        self.assertTrue(np.all(path.jump_times <= 3.0))
        self.assertTrue(np.all(np.diff(path.jump_times) > 0))
        self.assertTrue(np.all(path.jump_marks != 0))
        self.assertEqual(path.intensity, 20.0)

    def test_invalid_intensity(self):
        for lam in (-1.0, float('inf'), float('nan')):
            with self.assertRaises(NoiseError):
                sample_noise(self.grid, lam, uniform_marks, 0, 0)
        with self.assertRaises(NoiseError):
            sample_noise(self.grid, 1.0, uniform_marks, 0, -1)

    def test_open_uniforms(self):
        u = open_uniforms(substream(5, 0, Purpose.BROWNIAN), 100000)
        self.assertTrue(np.all(u > 0))
        self.assertTrue(np.all(u < 1))

    def test_jump_step_convention(self):
        grid = TimeGrid(1.0, 4)
        path = from_increments(grid, np.zeros(4), [0.25, 0.3, 1.0],
                               [1.0, -1.0, 0.5], 1.0)
        self.assertEqual(path.jump_steps.tolist(), [0, 1, 3])


class CoarsenTests(SimpleTestCase):
    """Tests for coarsen.

    Methods:
        test_identity: factor 1 returns the path itself.
        test_additive: Coarse increments are sums of fine increments.
        test_composition: coarsen twice by 2 equals coarsen by 4, bitwise.
        test_terminal_preserved: The terminal Brownian value is unchanged for
            every divisor.
        test_jumps_unchanged: Jump lists survive coarsening.
        test_bad_factor: Factors not dividing n_steps are rejected.

    """

    def setUp(self):
        self.path = sample_noise(TimeGrid(1.0, 64), 3.0, uniform_marks, 9, 2)

    def test_identity(self):
        self.assertIs(coarsen(self.path, 1), self.path)

    def test_additive(self):
        path = from_increments(TimeGrid(1.0, 4), [0.1, -0.2, 0.3, 0.4])
        coarse = coarsen(path, 2)
        self.assertEqual(coarse.grid.n_steps, 2)
        np.testing.assert_allclose(coarse.dB, [-0.1, 0.7], rtol=1e-15,
                                   atol=1e-16)

    def test_composition(self):
        twice = coarsen(coarsen(self.path, 2), 2)
        once = coarsen(self.path, 4)
        np.testing.assert_array_equal(twice.w, once.w)
        np.testing.assert_array_equal(twice.dB, once.dB)

    def test_terminal_preserved(self):
        for factor in (1, 2, 4, 8, 16, 32, 64):
            self.assertEqual(coarsen(self.path, factor).terminal,
                             self.path.terminal)

    def test_jumps_unchanged(self):
        self.assertEqual(coarsen(self.path, 8).jumps, self.path.jumps)

    def test_bad_factor(self):
        for factor in (3, 0, 128):
            with self.assertRaises(GridError):
                coarsen(self.path, factor)


class NoiseBatchTests(SimpleTestCase):
    """Tests for NoiseBatch.

    Methods:
        test_stacks_increments: dB rows are the paths' increments.
        test_schedule_groups: Every jump is scheduled once, at its step, and
            no group touches a path twice.
        test_rank_order: Jumps of one path and step are grouped in time order.
        test_mismatched_grids: Paths on different grids are rejected.
        test_marks_match_single_path: Batch mark draws equal per-path draws.

    """

    def setUp(self):
        grid = TimeGrid(1.0, 4)
        self.paths = [
            from_increments(grid, [0.1, 0.2, 0.3, 0.4],
                            [0.1, 0.15, 0.2, 0.9], [1, 2, 3, 4], 1.0),
            from_increments(grid, [0.0, 0.0, 0.0, 1.0],
                            [0.2, 0.6], [5, 6], 1.0, stream_id=1),
            from_increments(grid, [1.0, 0.0, 0.0, 0.0], intensity=1.0,
                            stream_id=2),
        ]
        self.batch = NoiseBatch(self.paths)

    def test_stacks_increments(self):
        self.assertEqual(self.batch.dB.shape, (3, 4))
        np.testing.assert_array_equal(self.batch.dB[1], self.paths[1].dB)
        self.assertEqual(self.batch.jump_offsets.tolist(), [0, 4, 6, 6])

    def test_schedule_groups(self):
        seen = []
        for step, groups in self.batch.schedule.items():
            for group in groups:
                paths = self.batch.jump_path[group]
                self.assertEqual(len(set(paths.tolist())), len(paths))
                self.assertTrue(np.all(self.batch.jump_step[group] == step))
                seen.extend(group.tolist())
        self.assertEqual(sorted(seen), list(range(6)))

    def test_rank_order(self):
        groups = self.batch.schedule[0]
        self.assertEqual([self.batch.jump_mark[g].tolist() for g in groups],
                         [[1.0, 5.0], [2.0], [3.0]])

    def test_mismatched_grids(self):
        other = from_increments(TimeGrid(1.0, 2), [0.0, 0.0], intensity=1.0)
        with self.assertRaises(NoiseError):
            NoiseBatch([self.paths[0], other])
        with self.assertRaises(NoiseError):
            NoiseBatch([])

    def test_marks_match_single_path(self):
        marks = self.batch.compensator_marks(uniform_marks, 5)
        alone = NoiseBatch([self.paths[1]]).compensator_marks(uniform_marks, 5)
        self.assertEqual(marks.shape, (3, 4, 5))
        np.testing.assert_array_equal(marks[1], alone[0])


class DumpTests(SimpleTestCase):
    """Tests for the binary noise dump.

    Methods:
        test_layout: Header fields sit at their documented offsets.
        test_reload: A reloaded path has the same increments and jumps.
        test_bad_magic: Foreign data is rejected.

    """

    def setUp(self):
        self.path = sample_noise(TimeGrid(2.0, 5), 4.0, uniform_marks, 11, 3)

    def test_layout(self):
        stream = io.BytesIO()
        dump_noise(self.path, stream)
        data = stream.getvalue()
        self.assertEqual(data[:4], b'SKJN')
        self.assertEqual(np.frombuffer(data[4:12], '<f8')[0], 2.0)
        self.assertEqual(np.frombuffer(data[12:20], '<i8')[0], 5)
        self.assertEqual(len(data), 4 + 48 + 8 * 5 + 16 * self.path.n_jumps)

    def test_reload(self):
        stream = io.BytesIO()
        dump_noise(self.path, stream)
        stream.seek(0)
        loaded = load_noise(stream)
        np.testing.assert_array_equal(loaded.dB[:1], self.path.dB[:1])
        np.testing.assert_allclose(loaded.dB, self.path.dB, atol=1e-14)
        self.assertEqual(loaded.jumps, self.path.jumps)
        self.assertEqual((loaded.seed, loaded.stream_id), (11, 3))

    def test_bad_magic(self):
        with self.assertRaises(NoiseError):
            load_noise(io.BytesIO(b'XXXX' + bytes(48)))


@tag('slow')
class NoiseStatisticsTests(SimpleTestCase):
    """Distributional checks at 10^5 sampled paths.

    Methods:
        test_increment_variance: Sample variance of every increment is within
            5 standard errors of dt.
        test_jump_count_mean: Mean jump count is within 5 SE of lam T, and
            within 3 sqrt(lam / n) of lam.
        test_jump_times_uniform: A KS test of jump times against
            Uniform(0, T] passes at level 10^-3.

    """

    n_paths = 100000

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        grid = TimeGrid(1.0, 4)
        cls.paths = [sample_noise(grid, 2.0, uniform_marks, 2024, index)
                     for index in range(cls.n_paths)]

    def test_increment_variance(self):
        dB = np.stack([path.dB for path in self.paths])
        dt = 0.25
        se = dt * math.sqrt(2.0 / (self.n_paths - 1))
        for variance in dB.var(axis=0, ddof=1):
            self.assertLess(abs(variance - dt), 5 * se)

    def test_jump_count_mean(self):
        counts = np.array([path.n_jumps for path in self.paths])
        se = counts.std(ddof=1) / math.sqrt(self.n_paths)
        self.assertLess(abs(counts.mean() - 2.0), 5 * se)
        self.assertLess(abs(counts.mean() - 2.0),
                        3 * math.sqrt(2.0 / self.n_paths))

    def test_jump_times_uniform(self):
        times = np.concatenate([path.jump_times for path in self.paths])
        result = stats.kstest(times, 'uniform', args=(0.0, 1.0))
        self.assertGreater(result.pvalue, 1e-3)
