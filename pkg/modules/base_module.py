#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 命令基础抽象类

该模块定义了所有命令的通用接口和基础功能，
采用抽象基类设计模式，确保所有命令都遵循统一的接口规范:
参数注册、配置加载、执行、输出写出，以及异常到退出码的映射。

设计模式:
- 抽象基类模式
- 模板方法模式
"""

import argparse
import logging
import os
import sys
import time
import traceback
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

import config
from .errors import CharacterizationFailure, InvalidInputError, NumericalFailure
from .file_formats import read_matrix_function, write_table
from .forward import ResponseFunction
from .run_config import RunConfig, load_run_config


class BaseModule(ABC):
    """
    命令基础抽象类

    所有命令都应该继承此类，并实现必要的抽象方法。
    run() 是模板方法: 加载配置 → execute() → 返回退出码。
    """

    def __init__(self):
        """初始化命令"""
        self.module_config = self.get_module_config()
        self.logger = logging.getLogger(f"wavebc.{self.module_config['command']}")
        self.run_config: Optional[RunConfig] = None

    @abstractmethod
    def get_module_config(self) -> Dict[str, Any]:
        """
        获取命令配置信息

        Returns:
            Dict[str, Any]: 包含 command、name、description 的字典
        """
        pass

    @abstractmethod
    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        """
        执行命令并写出输出

        Args:
            run_config (RunConfig): 已校验的运行配置
            args (argparse.Namespace): 命令行参数
        """
        pass

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """注册命令专有参数（子类按需重写）"""
        pass

    def add_common_arguments(self, parser: argparse.ArgumentParser) -> None:
        """
        注册所有命令共用的参数

        Args:
            parser (argparse.ArgumentParser): 子命令解析器
        """
        parser.add_argument('--config', metavar='PATH', help='JSON 运行配置文件')
        parser.add_argument('--out', metavar='PATH',
                            help=f"主输出路径（缺省 {config.DEFAULT_OUTPUTS[self.module_config['command']]}）")
        parser.add_argument('--method', choices=config.SUPPORTED_METHODS, help='恢复路径')
        parser.add_argument('--stride', type=int, metavar='K', help='ξ 扫描步长')
        parser.add_argument('--threshold', type=float, metavar='X', help='σ_min 相对阈值')
        parser.add_argument('--diagnostics', metavar='PATH', help='诊断表路径（.csv 或 .xlsx）')
        parser.add_argument('--workers', type=int, metavar='W', help='线程数')

    def config_overrides(self, args: argparse.Namespace) -> Dict[str, Any]:
        """命令行参数中覆盖配置文件的部分"""
        return {
            'out': getattr(args, 'out', None),
            'method': getattr(args, 'method', None),
            'stride': getattr(args, 'stride', None),
            'threshold': getattr(args, 'threshold', None),
            'diagnostics': getattr(args, 'diagnostics', None),
            'workers': getattr(args, 'workers', None),
        }

    def load_response(self, path: Optional[str], run_config: RunConfig) -> ResponseFunction:
        """
        读取响应文件，并以文件中的网格为准更新配置

        Args:
            path (Optional[str]): 响应文件路径
            run_config (RunConfig): 当前配置

        Returns:
            ResponseFunction: 响应函数
        """
        if not path:
            raise InvalidInputError("需要 --response 指定响应文件")
        _, grid, samples = read_matrix_function(path, expected_kind='response')
        self.run_config = run_config.with_grid(grid)
        return ResponseFunction(grid, samples)

    def diagnostics_path(self, run_config: RunConfig, suffix: str) -> str:
        """诊断表路径，缺省为主输出同名加后缀"""
        if run_config.diagnostics:
            return run_config.diagnostics
        stem = os.path.splitext(run_config.output_path(self.module_config['command']))[0]
        return f"{stem}_{suffix}.csv"

    def write_records(self, records: List[Any], path: str) -> None:
        """把带 to_dict() 的记录列表写成表格"""
        frame = pd.DataFrame([record.to_dict() for record in records])
        write_table(frame, path)

    def on_characterization_failure(self, error: CharacterizationFailure) -> None:
        """刻画失败时写出部分诊断（子类按需重写）"""
        pass

    def run(self, args: argparse.Namespace) -> int:
        """
        执行命令（模板方法）

        Args:
            args (argparse.Namespace): 命令行参数

        Returns:
            int: 退出码
        """
        command = self.module_config['command']
        started = time.perf_counter()
        try:
            self.run_config = load_run_config(getattr(args, 'config', None), self.config_overrides(args))
            self.logger.info("开始 %s: N=%d, T=%g, M=%d",
                             command, self.run_config.N, self.run_config.T, self.run_config.M)
            self.execute(self.run_config, args)
        except CharacterizationFailure as e:
            try:
                self.on_characterization_failure(e)
            except (OSError, InvalidInputError) as write_error:
                self.logger.error("部分诊断写出失败: %s", write_error)
            return self._fail(e, config.EXIT_CHARACTERIZATION_FAILURE)
        except (InvalidInputError, OSError) as e:
            return self._fail(e, config.EXIT_INPUT_ERROR)
        except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as e:
            return self._fail(e, config.EXIT_NUMERICAL_FAILURE)
        self.logger.info("%s 完成，用时 %.3fs", command, time.perf_counter() - started)
        return config.EXIT_OK

    def _fail(self, error: BaseException, code: int) -> int:
        message = str(error) or type(error).__name__
        self.logger.debug("退出码 %d: %s", code, message)
        if config.SHOW_ERROR_DETAILS:
            traceback.print_exc(file=sys.stderr)
        print(f"错误: {message}", file=sys.stderr)
        return code


__all__ = ['BaseModule']
