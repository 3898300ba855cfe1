#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
文件格式测试
"""

import json
import os
import tempfile
import unittest

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from modules.errors import InvalidInputError
from modules.file_formats import (
    dumps_samples,
    format_float,
    read_control,
    read_matrix_function,
    write_control,
    write_matrix_function,
    write_report,
    write_table,
)
from modules.grid_core import Control, SpaceTimeGrid


class TestMatrixFunctionFiles(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.tmp = tempfile.TemporaryDirectory()
        self.grid = SpaceTimeGrid(2, 1.0, 8)

    def tearDown(self):
        """测试后的清理工作"""
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_exact_round_trip(self):
        """测试 17 位有效数字下双精度往返精确"""
        rng = np.random.default_rng(11)
        samples = rng.standard_normal((17, 2, 2)) * 1e3
        write_matrix_function(self.path('r.json'), 'response', self.grid, samples)
        kind, grid, loaded = read_matrix_function(self.path('r.json'))
        self.assertEqual(kind, 'response')
        self.assertEqual(grid, self.grid)
        self.assertTrue(np.array_equal(loaded, samples))

    def test_layout(self):
        """测试文件布局: 行优先 N*N 浮点数"""
        samples = np.arange(36, dtype=float).reshape(9, 2, 2)
        text = dumps_samples('potential', self.grid, samples)
        document = json.loads(text)
        self.assertEqual(document['kind'], 'potential')
        self.assertEqual((document['N'], document['M']), (2, 8))
        self.assertEqual(document['samples'][1], [4, 5, 6, 7])
        self.assertTrue(text.endswith('}\n'))

    def test_format_float(self):
        """测试浮点格式与负零"""
        self.assertEqual(format_float(-0.0), '0')
        self.assertEqual(float(format_float(0.1)), 0.1)
        with self.assertRaises(InvalidInputError):
            format_float(float('inf'))

    def test_corrupted_json(self):
        """测试损坏的 JSON"""
        with open(self.path('bad.json'), 'w', encoding='utf-8') as f:
            f.write('{"kind": "response", "N": 1, ')
        with self.assertRaises(InvalidInputError):
            read_matrix_function(self.path('bad.json'))

    def test_wrong_kind_and_count(self):
        """测试 kind 与样本数检查"""
        write_matrix_function(self.path('v.json'), 'potential', self.grid, np.zeros((9, 2, 2)))
        with self.assertRaises(InvalidInputError):
            read_matrix_function(self.path('v.json'), expected_kind='response')
        document = json.loads(dumps_samples('response', self.grid, np.zeros((9, 2, 2))))
        with open(self.path('short.json'), 'w', encoding='utf-8') as f:
            json.dump(document, f)
        with self.assertRaises(InvalidInputError):
            read_matrix_function(self.path('short.json'))
        with self.assertRaises(InvalidInputError):
            write_matrix_function(self.path('c.json'), 'kernel', self.grid, np.zeros((9, 2, 2)))

    def test_missing_fields(self):
        """测试缺少字段"""
        with open(self.path('partial.json'), 'w', encoding='utf-8') as f:
            json.dump({'kind': 'response', 'N': 1, 'M': 8}, f)
        with self.assertRaises(InvalidInputError):
            read_matrix_function(self.path('partial.json'))


class TestControlFiles(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.tmp = tempfile.TemporaryDirectory()
        self.grid = SpaceTimeGrid(2, 1.0, 8)

    def tearDown(self):
        """测试后的清理工作"""
        self.tmp.cleanup()

    def test_json_control(self):
        """测试 JSON 控制文件"""
        samples = np.stack([np.linspace(0, 1, 9), np.linspace(1, 0, 9)], axis=1)
        path = os.path.join(self.tmp.name, 'f.json')
        write_control(path, Control(self.grid, samples))
        control = read_control(path, self.grid)
        assert_allclose(control.samples, samples, rtol=0, atol=0)
        with self.assertRaises(InvalidInputError):
            read_control(path, SpaceTimeGrid(2, 1.0, 10))

    def test_csv_control(self):
        """测试 CSV 控制文件"""
        path = os.path.join(self.tmp.name, 'f.csv')
        frame = pd.DataFrame({'t': self.grid.space_nodes, 'f1': np.ones(9), 'f2': np.zeros(9)})
        frame.to_csv(path, index=False)
        control = read_control(path, self.grid)
        assert_allclose(control.samples[:, 0], 1.0)
        pd.DataFrame({'f1': np.ones(9)}).to_csv(path, index=False)
        with self.assertRaises(InvalidInputError):
            read_control(path, self.grid)


class TestTablesAndReports(unittest.TestCase):
    def test_csv_and_xlsx(self):
        """测试表格写出为 CSV 与 Excel"""
        frame = pd.DataFrame({'M': [10, 20], 'error': [0.1, 1.0 / 3.0]})
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = os.path.join(tmp, 'out', 'table.csv')
            write_table(frame, csv_path)
            with open(csv_path, 'rb') as f:
                content = f.read()
            self.assertNotIn(b'\r\n', content)
            self.assertEqual(pd.read_csv(csv_path)['error'][1], 1.0 / 3.0)

            xlsx_path = os.path.join(tmp, 'table.xlsx')
            write_table(frame, xlsx_path)
            loaded = pd.read_excel(xlsx_path)
            self.assertEqual(loaded.columns.tolist(), ['M', 'error'])
            self.assertEqual(len(loaded), 2)

            with self.assertRaises(InvalidInputError):
                write_table(frame, os.path.join(tmp, 'table.txt'))

    def test_report_non_finite(self):
        """测试报告中的非有限值写为 null"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'report.json')
            write_report(path, {'a': float('-inf'), 'b': np.float64(2.5), 'c': [np.int64(3), np.bool_(True)]})
            with open(path, 'r', encoding='utf-8') as f:
                document = json.load(f)
        self.assertIsNone(document['a'])
        self.assertEqual(document['b'], 2.5)
        self.assertEqual(document['c'], [3, True])


if __name__ == '__main__':
    unittest.main()
