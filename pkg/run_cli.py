import os
import sys

# 将当前目录加入 Python 路径，确保能找到 src 包
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.dev.cli.main import run  # noqa: E402

if __name__ == "__main__":
    run()
