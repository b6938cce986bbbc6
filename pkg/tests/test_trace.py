import os.path as osp

from unittest import TestCase

import numpy as np
import pandas as pd

from keepalive.components.errors import DomainError, TraceLoadError
from keepalive.components.point_process import HawkesParams
from keepalive.components.trace import (DAY_MINUTES, Placement, TraceDataset,
    TraceSchema, bin_arrivals, expand_bins, load_trace, random_app_params,
    synth_trace)
from keepalive.util.test_utils import TestDir, compare_histories


def _wide_frame(rows):
    columns = ['HashOwner', 'HashApp', 'HashFunction', 'Trigger'] + \
        [str(m) for m in range(1, DAY_MINUTES + 1)]
    data = []
    for app, function, counts in rows:
        minutes = [0] * DAY_MINUTES
        for minute, count in counts.items():
            minutes[minute] = count
        data.append(['owner', app, function, 'http'] + minutes)
    return pd.DataFrame(data, columns=columns)


class BinsTest(TestCase):
    def test_can_place_arrivals_mid_bin(self):
        history = expand_bins([0, 2, 0, 1])

        compare_histories(self, [1.25, 1.75, 3.5], history)

    def test_can_place_arrivals_uniformly(self):
        counts = [3, 0, 5]

        first = expand_bins(counts, Placement.uniform,
            np.random.default_rng(1))
        second = expand_bins(counts, 'uniform', np.random.default_rng(1))

        compare_histories(self, first, second)
        np.testing.assert_array_equal(counts, bin_arrivals(first, 3))

    def test_binning_inverts_expansion(self):
        counts = np.random.default_rng(2).integers(0, 4, size=DAY_MINUTES)

        np.testing.assert_array_equal(counts,
            bin_arrivals(expand_bins(counts)))

    def test_can_reject_fractional_counts(self):
        with self.assertRaises(DomainError):
            expand_bins([1, 0.5])


class DatasetTest(TestCase):
    def test_can_query_apps(self):
        dataset = TraceDataset({
            'a': { 1: [0.5, 2.5], 2: [] },
            'b': { 2: [3.0] },
        }, days=[1, 2])

        self.assertEqual(['a', 'b'], dataset.app_ids)
        self.assertEqual(['a'], dataset.apps_with(1))
        self.assertEqual(['b'], dataset.apps_with(2))
        self.assertEqual([], dataset.apps_with(1, min_arrivals=3))
        self.assertEqual(3, dataset.total_arrivals())
        self.assertEqual(1, dataset.total_arrivals(2))
        self.assertEqual(0, len(dataset.get('b', 1)))

    def test_can_reject_arrivals_outside_day(self):
        with self.assertRaises(DomainError):
            TraceDataset({ 'a': { 1: [0.5, DAY_MINUTES + 1.0] } }, days=[1])

    def test_can_reject_unknown_day(self):
        with self.assertRaises(DomainError):
            TraceDataset({ 'a': { 3: [0.5] } }, days=[1])

    def test_can_save_and_load(self):
        dataset = TraceDataset({
            'a': { 7: [0.1, 1.0 / 3.0], 8: [10.0] },
            'b': { 8: [5.5] },
        }, days=[7, 8])

        with TestDir() as test_dir:
            path = osp.join(test_dir, 'trace.json')
            dataset.save(path)

            self.assertEqual(dataset, TraceDataset.load(path))

    def test_can_report_broken_file(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'trace.json')
            with open(path, 'w') as f:
                f.write('{ "apps": ')

            with self.assertRaises(TraceLoadError):
                TraceDataset.load(path)


class LoadTraceTest(TestCase):
    def test_can_load_wide_day_file(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir,
                'invocations_per_function_md.anon.d07.csv')
            _wide_frame([
                ('app1', 'f1', { 0: 2, 10: 1 }),
                ('app1', 'f2', { 10: 1 }),
                ('app2', 'f3', { 1439: 1 }),
            ]).to_csv(path, index=False)

            dataset = load_trace(path)

            self.assertEqual([7], dataset.days)
            self.assertEqual(['app1', 'app2'], dataset.app_ids)
            compare_histories(self, [0.25, 0.75, 10.25, 10.75],
                dataset.get('app1', 7))
            compare_histories(self, [1439.5], dataset.get('app2', 7))

    def test_can_load_directory_of_days(self):
        with TestDir() as test_dir:
            for day in [7, 8]:
                _wide_frame([('app1', 'f1', { day: 1 })]).to_csv(
                    osp.join(test_dir, 'invocations.d%02d.csv' % day),
                    index=False)

            dataset = load_trace(test_dir)

            self.assertEqual([7, 8], dataset.days)
            compare_histories(self, [8.5], dataset.get('app1', 8))

    def test_can_limit_loaded_days(self):
        with TestDir() as test_dir:
            paths = []
            for day in [7, 8]:
                path = osp.join(test_dir, 'invocations.d%02d.csv' % day)
                _wide_frame([('app1', 'f1', { 0: 1 })]).to_csv(path,
                    index=False)
                paths.append(path)

            dataset = load_trace(paths, days=[8])

            self.assertEqual([8], dataset.days)

    def test_can_report_bad_counts_with_line_numbers(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'invocations.d07.csv')
            df = _wide_frame([
                ('app1', 'f1', { 0: 1 }),
                ('app1', 'f2', { 0: 1 }),
            ])
            df['5'] = df['5'].astype(object)
            df.loc[1, '5'] = 'x'
            df.to_csv(path, index=False)

            with self.assertRaises(TraceLoadError) as cm:
                load_trace(path)

            self.assertIn((3, 'invocations.d07.csv: counts must be integers'),
                cm.exception.offenders)

    def test_can_report_duplicate_rows(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'invocations.d07.csv')
            _wide_frame([
                ('app1', 'f1', { 0: 1 }),
                ('app1', 'f1', { 1: 1 }),
            ]).to_csv(path, index=False)

            with self.assertRaises(TraceLoadError) as cm:
                load_trace(path)

            self.assertEqual([3], [line
                for line, _ in cm.exception.offenders])

    def test_can_report_duplicate_rows_across_files(self):
        with TestDir() as test_dir:
            first = osp.join(test_dir, 'invocations.d07.csv')
            second = osp.join(test_dir, 'extra.d07.csv')
            _wide_frame([('app1', 'f1', { 0: 1 })]).to_csv(first,
                index=False)
            _wide_frame([
                ('app1', 'f2', { 0: 1 }),
                ('app1', 'f1', { 5: 1 }),
            ]).to_csv(second, index=False)

            with self.assertRaises(TraceLoadError) as cm:
                load_trace([first, second])

            self.assertEqual([(3, "extra.d07.csv: duplicate (app, function, "
                "day) row for day 7, already in invocations.d07.csv")],
                cm.exception.offenders)

    def test_can_combine_functions_from_several_files(self):
        with TestDir() as test_dir:
            first = osp.join(test_dir, 'invocations.d07.csv')
            second = osp.join(test_dir, 'extra.d07.csv')
            _wide_frame([('app1', 'f1', { 0: 1 })]).to_csv(first,
                index=False)
            _wide_frame([('app1', 'f2', { 5: 1 })]).to_csv(second,
                index=False)

            dataset = load_trace([first, second])

            compare_histories(self, [0.5, 5.5], dataset.get('app1', 7))

    def test_can_report_missing_columns(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'invocations.d07.csv')
            pd.DataFrame({ 'HashApp': ['a'] }).to_csv(path, index=False)

            with self.assertRaises(TraceLoadError):
                load_trace(path)

    def test_can_report_unknown_day(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'invocations.csv')
            _wide_frame([('app1', 'f1', { 0: 1 })]).to_csv(path, index=False)

            with self.assertRaises(TraceLoadError):
                load_trace(path)

            self.assertEqual([3], load_trace(path, day=3).days)

    def test_empty_file_gives_empty_dataset(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'invocations.d07.csv')
            open(path, 'w').close()

            dataset = load_trace(path)

            self.assertEqual(0, len(dataset))

    def test_can_load_long_layout(self):
        with TestDir() as test_dir:
            path = osp.join(test_dir, 'trace.csv')
            pd.DataFrame({
                'app': ['a', 'a', 'b'],
                'function': ['f1', 'f2', 'f3'],
                'day': [1, 1, 2],
                'minute': [5, 5, 0],
                'count': [1, 1, 1],
            }).to_csv(path, index=False)

            dataset = load_trace(path, schema=TraceSchema.long())

            self.assertEqual([1, 2], dataset.days)
            compare_histories(self, [5.25, 5.75], dataset.get('a', 1))
            compare_histories(self, [0.5], dataset.get('b', 2))


class SynthTraceTest(TestCase):
    def test_can_generate_reproducible_trace(self):
        params = { 'a': HawkesParams(0.05, 0.5, 1.0),
            'b': HawkesParams.poisson(0.1) }

        first = synth_trace(params, [7, 8], seed=4)
        second = synth_trace(params, [7, 8], seed=4)

        self.assertEqual(first, second)
        self.assertEqual([7, 8], first.days)
        self.assertLess(0, first.total_arrivals(8))

    def test_can_draw_stationary_app_params(self):
        population = random_app_params(10, seed=1)

        self.assertEqual(10, len(population))
        self.assertIn('app0000', population)
        for params in population.values():
            self.assertTrue(params.is_stationary)
