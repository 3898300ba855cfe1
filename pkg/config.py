#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 配置文件

该文件集中保存应用程序的全部缺省配置: 应用信息、网格缺省值、
数值阈值、文件格式、性能与日志配置、退出码。
运行时的 JSON 配置文件与命令行参数在此基础上覆盖。

配置分类:
- 应用程序信息
- 网格配置
- 数值阈值配置
- 文件配置
- 性能配置
- 日志配置
- 错误处理配置
"""

import os

# =============================================================================
# 应用程序信息配置
# =============================================================================
APP_NAME = "WaveBC"
APP_VERSION = "1.0.0"
APP_DESCRIPTION = "矩阵势一维波动方程正反问题求解套件（边界控制法）"
APP_AUTHOR = "WaveBC Team"

# =============================================================================
# 网格配置
# =============================================================================
DEFAULT_N = 1  # 控制维数
DEFAULT_T = 1.0  # 时间视界
DEFAULT_M = 100  # 步数，h = T/M
MIN_STEPS = 8  # 运行配置允许的最小步数

# =============================================================================
# 数值阈值配置
# =============================================================================
RCOND_THRESHOLD = 1e-12  # 低于该倒条件数判定为奇异
SIGMA_RELATIVE_THRESHOLD = 1e-8  # σ_min > 阈值·σ_max 视为同构
SVD_DIMENSION_LIMIT = 1500  # 超过该维数改用逆迭代估计 σ_min
RANDOM_SEED = 20240601  # 迭代估计的起始向量种子

# 恢复方法
DEFAULT_METHOD = 'resolvent'
SUPPORTED_METHODS = ['resolvent', 'amplitude']

# 参数扫描 r_a(t) = a·cos(ω t)
SCAN_FREQUENCY = 3.0
SCAN_AMPLITUDE_RANGE = (0.0, 40.0)
SCAN_AMPLITUDE_COUNT = 41

# =============================================================================
# 文件配置
# =============================================================================
FLOAT_SIGNIFICANT_DIGITS = 17  # 双精度往返精确
FLOAT_FORMAT = f'%.{FLOAT_SIGNIFICANT_DIGITS}g'
DEFAULT_ENCODING = 'utf-8'

SUPPORTED_FILE_TYPES = {
    'table': ['.csv', '.xlsx'],
}

DEFAULT_OUTPUTS = {
    'forward': 'response.json',
    'invert': 'potential.json',
    'characterize': 'report.json',
    'simulate': 'wavefield.csv',
    'roundtrip': 'convergence.csv',
    'scan': 'scan.csv',
}

# =============================================================================
# 性能配置
# =============================================================================
PARALLEL_WORKERS = min(4, os.cpu_count() or 1)  # 逐 ξ 计算的线程数
ROUNDTRIP_LEVELS = 3  # 收敛表 M, 2M, 4M

# =============================================================================
# 日志配置
# =============================================================================
LOG_LEVEL = os.environ.get('WAVEBC_LOG_LEVEL', 'INFO')  # 日志级别
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE = os.environ.get('WAVEBC_LOG_FILE', '')  # 为空时只输出到标准错误
LOG_MAX_SIZE = 10 * 1024 * 1024  # 日志文件最大大小（10MB）
LOG_BACKUP_COUNT = 5  # 日志备份文件数量

# =============================================================================
# 错误处理配置
# =============================================================================
EXIT_OK = 0
EXIT_INPUT_ERROR = 1  # 输入或 I/O 错误
EXIT_CHARACTERIZATION_FAILURE = 2  # 某个 C^ξ 不是同构
EXIT_NUMERICAL_FAILURE = 3  # 内部数值失败

SHOW_ERROR_DETAILS = False  # 是否在标准错误输出完整的异常栈

# =============================================================================
# 测试配置
# =============================================================================
SLOW_TESTS_ENV = 'RUN_SLOW_TESTS'  # 设为 1 时运行桌面规模的验收测试
