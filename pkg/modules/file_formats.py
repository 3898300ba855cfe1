#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 文件格式

矩阵函数（势、响应）与控制使用 JSON:
    {"kind": ..., "N": int, "T": float, "M": int, "samples": [[行优先 N*N 浮点数], ...]}
浮点数一律以 17 位有效数字输出，保证双精度往返精确且重复运行字节一致。
表格（诊断、波场、收敛表、扫描表）经 pandas 写出 CSV，扩展名为 .xlsx 时经 openpyxl 写出 Excel。

设计模式:
- 门面模式（读写入口）
"""

import json
import logging
import math
import os
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

import config
from .errors import InvalidInputError
from .grid_core import Control, SpaceTimeGrid

logger = logging.getLogger(__name__)

MATRIX_FUNCTION_KINDS = ('potential', 'response')


def format_float(value: float) -> str:
    """以固定有效位数格式化浮点数，-0 归一为 0"""
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"不能序列化非有限值: {value}")
    if value == 0.0:
        value = 0.0
    return config.FLOAT_FORMAT % value


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _write_text(path: str, text: str) -> None:
    _ensure_parent(path)
    with open(path, 'w', encoding=config.DEFAULT_ENCODING, newline='') as f:
        f.write(text)


def dumps_samples(kind: str, grid: SpaceTimeGrid, samples: np.ndarray) -> str:
    """
    把样本序列化为确定性的 JSON 文本

    Args:
        kind (str): 'potential' / 'response' / 'control'
        grid (SpaceTimeGrid): 网格
        samples (np.ndarray): 形状 (n, N, N) 或 (n, N)

    Returns:
        str: 以换行结尾的 JSON 文本
    """
    samples = np.asarray(samples, dtype=float)
    rows = samples.reshape(samples.shape[0], -1)
    body = ',\n    '.join('[' + ', '.join(format_float(v) for v in row) + ']' for row in rows)
    return (
        '{\n'
        f'  "kind": {json.dumps(kind)},\n'
        f'  "N": {grid.N},\n'
        f'  "T": {format_float(grid.T)},\n'
        f'  "M": {grid.M},\n'
        f'  "samples": [\n    {body}\n  ]\n'
        '}\n'
    )


def write_matrix_function(path: str, kind: str, grid: SpaceTimeGrid, samples: np.ndarray) -> None:
    """
    写出势或响应文件

    Args:
        path (str): 输出路径
        kind (str): 'potential' 或 'response'
        grid (SpaceTimeGrid): 网格
        samples (np.ndarray): 形状 (n, N, N)
    """
    if kind not in MATRIX_FUNCTION_KINDS:
        raise InvalidInputError(f"未知的文件类型: {kind}")
    _write_text(path, dumps_samples(kind, grid, samples))
    logger.info("已写出 %s 文件: %s", kind, path)


def write_control(path: str, control: Control) -> None:
    """写出控制 JSON 文件"""
    _write_text(path, dumps_samples('control', control.grid, control.samples))


def _load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding=config.DEFAULT_ENCODING) as f:
            document = json.load(f)
    except FileNotFoundError:
        raise InvalidInputError(f"文件不存在: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InvalidInputError(f"JSON 解析失败 ({path}): {e}") from None
    except OSError as e:
        raise InvalidInputError(f"读取文件失败 ({path}): {e}") from None
    if not isinstance(document, dict):
        raise InvalidInputError(f"{path} 的顶层必须是对象")
    return document


def _read_header(document: Dict[str, Any], path: str) -> SpaceTimeGrid:
    missing = [key for key in ('kind', 'N', 'T', 'M', 'samples') if key not in document]
    if missing:
        raise InvalidInputError(f"{path} 缺少字段: {missing}")
    N, M, T = document['N'], document['M'], document['T']
    if not isinstance(N, int) or isinstance(N, bool) or not isinstance(M, int) or isinstance(M, bool):
        raise InvalidInputError(f"{path} 中 N 与 M 必须是整数")
    if not isinstance(T, (int, float)) or isinstance(T, bool):
        raise InvalidInputError(f"{path} 中 T 必须是数值")
    return SpaceTimeGrid(N, float(T), M)


def _sample_array(rows: Any, count: int, width: int, path: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != count:
        length = len(rows) if isinstance(rows, list) else type(rows).__name__
        raise InvalidInputError(f"{path} 应有 {count} 个样本，实际为 {length}")
    try:
        array = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{path} 的样本不是规则的数值数组") from None
    if array.shape != (count, width):
        raise InvalidInputError(f"{path} 的样本形状应为 ({count}, {width})，实际为 {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{path} 的样本含有非有限值")
    return array


def read_matrix_function(path: str, expected_kind: Optional[str] = None) -> Tuple[str, SpaceTimeGrid, np.ndarray]:
    """
    读取势或响应文件

    Args:
        path (str): 文件路径
        expected_kind (Optional[str]): 期望的 kind，给出时不符即报错

    Returns:
        Tuple[str, SpaceTimeGrid, np.ndarray]: (kind, 网格, 形状 (n, N, N) 的样本)
    """
    document = _load_json(path)
    grid = _read_header(document, path)
    kind = document['kind']
    if kind not in MATRIX_FUNCTION_KINDS:
        raise InvalidInputError(f"{path} 的 kind 必须是 {MATRIX_FUNCTION_KINDS}，实际为 {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise InvalidInputError(f"{path} 应为 {expected_kind} 文件，实际为 {kind}")
    count = grid.M + 1 if kind == 'potential' else 2 * grid.M + 1
    array = _sample_array(document['samples'], count, grid.N * grid.N, path)
    return kind, grid, array.reshape(count, grid.N, grid.N)


def read_control(path: str, grid: SpaceTimeGrid) -> Control:
    """
    读取控制

    支持 kind 为 "control" 的 JSON 文件，或带表头的 CSV 文件（列 f1..fN，可选时间列 t）。

    Args:
        path (str): 文件路径
        grid (SpaceTimeGrid): 运行网格

    Returns:
        Control: M+1 个样本
    """
    extension = os.path.splitext(path)[1].lower()
    if extension == '.csv':
        try:
            frame = pd.read_csv(path)
        except FileNotFoundError:
            raise InvalidInputError(f"文件不存在: {path}") from None
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise InvalidInputError(f"CSV 解析失败 ({path}): {e}") from None
        columns = [f'f{a + 1}' for a in range(grid.N)]
        missing = [name for name in columns if name not in frame.columns]
        if missing:
            raise InvalidInputError(f"{path} 缺少控制列: {missing}")
        values = _sample_array(frame[columns].to_numpy().tolist(), grid.M + 1, grid.N, path)
        return Control(grid, values)

    document = _load_json(path)
    file_grid = _read_header(document, path)
    if document['kind'] != 'control':
        raise InvalidInputError(f"{path} 应为 control 文件，实际为 {document['kind']!r}")
    if file_grid.N != grid.N or file_grid.M != grid.M or file_grid.T != grid.T:
        raise InvalidInputError(f"控制文件的网格 {file_grid} 与运行网格 {grid} 不一致")
    values = _sample_array(document['samples'], grid.M + 1, grid.N, path)
    return Control(grid, values)


def write_table(frame: pd.DataFrame, path: str, sheet_name: str = 'WaveBC') -> None:
    """
    写出表格

    Args:
        frame (pd.DataFrame): 表格
        path (str): .csv 或 .xlsx 路径
        sheet_name (str): Excel 工作表名
    """
    extension = os.path.splitext(path)[1].lower()
    if extension not in config.SUPPORTED_FILE_TYPES['table']:
        raise InvalidInputError(f"不支持的表格格式: {extension}，可选 {config.SUPPORTED_FILE_TYPES['table']}")
    _ensure_parent(path)
    if extension == '.xlsx':
        frame.to_excel(path, sheet_name=sheet_name, index=False, engine='openpyxl')
    else:
        frame.to_csv(path, index=False, float_format=config.FLOAT_FORMAT,
                     lineterminator='\n', encoding=config.DEFAULT_ENCODING)
    logger.info("已写出表格 (%d 行): %s", len(frame), path)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def write_report(path: str, report: Dict[str, Any]) -> None:
    """
    写出报告 JSON，非有限值写为 null

    Args:
        path (str): 输出路径
        report (Dict[str, Any]): 报告字典
    """
    text = json.dumps(_jsonable(report), indent=2, ensure_ascii=False, allow_nan=False)
    _write_text(path, text + '\n')
    logger.info("已写出报告: %s", path)


__all__ = [
    'MATRIX_FUNCTION_KINDS',
    'format_float',
    'dumps_samples',
    'write_matrix_function',
    'write_control',
    'read_matrix_function',
    'read_control',
    'write_table',
    'write_report',
]
