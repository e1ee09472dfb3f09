"""
qcert - 拟线性椭圆问题唯一性证书工具入口

用法:
    python src/main.py certify problem.yaml mesh.txt solution.txt --theorem 2d -o report.json
"""
import sys
from pathlib import Path

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli.commands import run


if __name__ == "__main__":
    sys.exit(run())
