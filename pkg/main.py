#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 命令行主程序

该程序是 WaveBC 的主入口，子命令由模块注册表生成，
每个子命令交给对应的命令实例执行并返回退出码。

设计模式:
- 工厂模式（命令管理）
- 配置驱动模式（子命令创建）
"""

import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import List, Optional

import config
from config import APP_DESCRIPTION, APP_NAME, APP_VERSION
from modules import create_module, get_all_modules


class WaveBCArgumentParser(argparse.ArgumentParser):
    """参数错误按输入错误退出（退出码 1）"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(config.EXIT_INPUT_ERROR, f"{self.prog}: 错误: {message}\n")


def setup_logging(level: Optional[str] = None) -> None:
    """
    配置日志: 标准错误输出，LOG_FILE 非空时追加滚动文件

    Args:
        level (Optional[str]): 日志级别，缺省 config.LOG_LEVEL
    """
    root = logging.getLogger()
    root.setLevel((level or config.LOG_LEVEL).upper())
    for handler in list(root.handlers):
        root.removeHandler(handler)
    formatter = logging.Formatter(config.LOG_FORMAT)

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    root.addHandler(console)

    if config.LOG_FILE:
        file_handler = RotatingFileHandler(
            config.LOG_FILE,
            maxBytes=config.LOG_MAX_SIZE,
            backupCount=config.LOG_BACKUP_COUNT,
            encoding=config.DEFAULT_ENCODING,
        )
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)


def build_parser() -> argparse.ArgumentParser:
    """由注册表创建参数解析器，每个命令一个子命令"""
    parser = WaveBCArgumentParser(
        prog=APP_NAME.lower(),
        description=f"{APP_NAME} v{APP_VERSION}: {APP_DESCRIPTION}",
    )
    parser.add_argument('--version', action='version', version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='日志级别')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=WaveBCArgumentParser)
    subparsers.required = True

    for command, info in get_all_modules().items():
        module = create_module(command)
        subparser = subparsers.add_parser(command, help=f"{info['icon']} {info['description']}",
                                          description=info['description'])
        module.add_common_arguments(subparser)
        module.add_arguments(subparser)
        subparser.set_defaults(module=module)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    主函数

    Args:
        argv (Optional[List[str]]): 命令行参数，缺省取 sys.argv[1:]

    Returns:
        int: 退出码
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    return args.module.run(args)


if __name__ == "__main__":
    sys.exit(main())
