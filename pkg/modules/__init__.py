#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 核心模块包

该包包含正问题、反问题、刻画检查与命令的实现，
每个命令都是独立的类，通过统一的注册表进行管理。

命令列表:
- ForwardCommand: 正问题
- InvertCommand: 反问题
- CharacterizeCommand: 刻画检查
- SimulateCommand: 波场模拟
- RoundtripCommand: 往返收敛
- ScanCommand: 参数扫描

设计模式:
- 模块化设计模式
- 工厂模式（命令管理）
- 策略模式（势规格处理）
"""

__version__ = "1.0.0"
__author__ = "WaveBC Team"
__description__ = "WaveBC 核心功能模块包"

from .commands import (
    CharacterizeCommand,
    ForwardCommand,
    InvertCommand,
    RoundtripCommand,
    ScanCommand,
    SimulateCommand,
)

# 命令注册表
AVAILABLE_MODULES = {
    'forward': {
        'name': '正问题',
        'description': '由势 V 计算 [0, 2T] 上的响应函数 r',
        'icon': '→',
        'class': ForwardCommand,
        'version': '1.0.0'
    },
    'invert': {
        'name': '反问题',
        'description': '由响应函数 r 重建 [0, T] 上的势 V',
        'icon': '←',
        'class': InvertCommand,
        'version': '1.0.0'
    },
    'characterize': {
        'name': '刻画检查',
        'description': '逐 ξ 检查连接算子 C^ξ 是否为同构',
        'icon': '✓',
        'class': CharacterizeCommand,
        'version': '1.0.0'
    },
    'simulate': {
        'name': '波场模拟',
        'description': '计算边界控制在时刻 t 产生的波场',
        'icon': '~',
        'class': SimulateCommand,
        'version': '1.0.0'
    },
    'roundtrip': {
        'name': '往返收敛',
        'description': '正问题 + 反问题在 M、2M、4M 上的误差与阶',
        'icon': '↻',
        'class': RoundtripCommand,
        'version': '1.0.0'
    },
    'scan': {
        'name': '参数扫描',
        'description': '扫描 r_a(t) = a·cos(ω t)，寻找 C^T 通过而某个 C^ξ 失败的情形',
        'icon': '≈',
        'class': ScanCommand,
        'version': '1.0.0'
    },
}


def get_module_info(module_name: str) -> dict:
    """
    获取指定命令的信息

    Args:
        module_name (str): 命令名称

    Returns:
        dict: 命令信息字典，如果命令不存在则返回None
    """
    return AVAILABLE_MODULES.get(module_name)


def get_all_modules() -> dict:
    """
    获取所有可用命令的信息

    Returns:
        dict: 所有命令的信息字典
    """
    return AVAILABLE_MODULES.copy()


def create_module(module_name: str):
    """
    创建指定命令的实例

    Args:
        module_name (str): 命令名称

    Returns:
        命令实例，如果命令不存在则返回None
    """
    module_info = get_module_info(module_name)
    if module_info:
        return module_info['class']()
    return None


__all__ = [
    'ForwardCommand',
    'InvertCommand',
    'CharacterizeCommand',
    'SimulateCommand',
    'RoundtripCommand',
    'ScanCommand',
    'AVAILABLE_MODULES',
    'get_module_info',
    'get_all_modules',
    'create_module'
]
