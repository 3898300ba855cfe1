#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 启动脚本

检查依赖包后把命令行参数交给 main.main()。
"""

import importlib.util
import sys
from typing import List

# 导入名 -> 最低版本（与 requirements.txt 一致）
REQUIRED_PACKAGES = {
    'numpy': '1.22',
    'scipy': '1.8',
    'pandas': '1.5',
    'openpyxl': '3.0',
}


def missing_dependencies() -> List[str]:
    """返回未安装的依赖包"""
    return [name for name in REQUIRED_PACKAGES if importlib.util.find_spec(name) is None]


def main():
    """主函数"""
    missing = missing_dependencies()
    if missing:
        print("缺少以下依赖包:", file=sys.stderr)
        for name in missing:
            print(f"  - {name}>={REQUIRED_PACKAGES[name]}", file=sys.stderr)
        print("\n请运行: pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)

    from main import main as run_app
    sys.exit(run_app(sys.argv[1:]))


if __name__ == "__main__":
    main()
