#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行配置测试
"""

import json
import os
import tempfile
import unittest

import config
from modules.errors import InvalidInputError
from modules.grid_core import SpaceTimeGrid
from modules.run_config import RunConfig, load_run_config


class TestLoadRunConfig(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        """测试后的清理工作"""
        self.tmp.cleanup()

    def write(self, document):
        path = os.path.join(self.tmp.name, 'run.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(document, f)
        return path

    def test_defaults(self):
        """测试缺省配置"""
        run_config = load_run_config()
        self.assertEqual(run_config.grid, SpaceTimeGrid(config.DEFAULT_N, config.DEFAULT_T, config.DEFAULT_M))
        self.assertEqual(run_config.method, config.DEFAULT_METHOD)
        self.assertEqual(len(run_config.scan_amplitudes), config.SCAN_AMPLITUDE_COUNT)
        self.assertEqual(run_config.scan_amplitudes[-1], config.SCAN_AMPLITUDE_RANGE[1])
        self.assertEqual(run_config.output_path('forward'), config.DEFAULT_OUTPUTS['forward'])

    def test_file_and_overrides(self):
        """测试命令行参数覆盖配置文件"""
        path = self.write({
            'N': 2, 'T': 2.0, 'M': 40, 'method': 'amplitude',
            'potential': {'type': 'constant', 'value': [[1, 0], [0, 1]]},
            'scan': {'amplitudes': [0, 5, 10], 'frequency': 2.0},
        })
        run_config = load_run_config(path, {'M': 60, 'method': None, 'out': 'x.json'})
        self.assertEqual(run_config.M, 60)
        self.assertEqual(run_config.method, 'amplitude')
        self.assertEqual(run_config.scan_amplitudes, (0.0, 5.0, 10.0))
        self.assertEqual(run_config.scan_frequency, 2.0)
        self.assertEqual(run_config.output_path('invert'), 'x.json')
        self.assertEqual(run_config.potential_on().samples.shape, (61, 2, 2))

    def test_invalid_values(self):
        """测试不变量检查"""
        for document in ({'M': 4}, {'N': 0}, {'T': -1.0}, {'M': 10, 'stride': 3},
                         {'M': 16, 'stride': 4}, {'method': 'gelfand'}, {'workers': 0},
                         {'threshold': 0.0}, {'M': 10.5}, {'roundtrip_levels': 1}):
            with self.subTest(document=document):
                with self.assertRaises(InvalidInputError):
                    load_run_config(self.write(document))

    def test_unknown_key(self):
        """测试未知字段"""
        with self.assertRaises(InvalidInputError):
            load_run_config(self.write({'M': 20, 'sweep': 1}))

    def test_potential_checked_on_grid(self):
        """测试势规格在加载时求值"""
        with self.assertRaises(InvalidInputError):
            load_run_config(self.write({'N': 2, 'potential': {'type': 'constant', 'value': 1.0}}))
        with self.assertRaises(InvalidInputError):
            load_run_config(self.write({'potential': [1.0]}))

    def test_missing_or_corrupted_file(self):
        """测试缺失或损坏的配置文件"""
        with self.assertRaises(InvalidInputError):
            load_run_config(os.path.join(self.tmp.name, 'missing.json'))
        path = os.path.join(self.tmp.name, 'broken.json')
        with open(path, 'w', encoding='utf-8') as f:
            f.write('{"M": ')
        with self.assertRaises(InvalidInputError):
            load_run_config(path)


class TestRunConfig(unittest.TestCase):
    def test_with_grid(self):
        """测试换用响应文件的网格"""
        run_config = RunConfig(stride=2)
        updated = run_config.with_grid(SpaceTimeGrid(3, 0.5, 20))
        self.assertEqual((updated.N, updated.T, updated.M), (3, 0.5, 20))
        self.assertEqual(updated.stride, 2)
        with self.assertRaises(InvalidInputError):
            run_config.with_grid(SpaceTimeGrid(1, 1.0, 9))

    def test_missing_potential(self):
        """测试缺少势规格"""
        with self.assertRaises(InvalidInputError):
            RunConfig().potential_on()


if __name__ == '__main__':
    unittest.main()
