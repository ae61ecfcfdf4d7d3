import time
import logging
import functools
from typing import Callable, Optional, TypeVar

from config import config
from src.dev.common.constant import PROJECT_NAME

logger = logging.getLogger(PROJECT_NAME)

F = TypeVar("F", bound=Callable)


def setup_logging(level: Optional[str] = None) -> None:
    """按配置初始化日志，日志统一输出到 stderr，stdout 留给 CLI 结果"""
    level_name = (level or config.get("LOGGING.LEVEL", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=config.get("LOGGING.FORMAT", "%(asctime)s - %(name)s - %(levelname)s - %(message)s"),
    )
    logger.setLevel(getattr(logging, level_name, logging.INFO))


def get_logger(layer: str) -> logging.Logger:
    return logger.getChild(layer)


# 装饰器：记录解码/穷举/扫参的执行耗时
def log_execution(func: F) -> F:
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            logger.debug(f"{func.__name__} 执行成功，耗时：{time.perf_counter() - start_time:.4f}s")
            return result
        except Exception as e:
            logger.error(f"{func.__name__} 执行失败：{e}，耗时：{time.perf_counter() - start_time:.4f}s")
            raise
    return wrapper  # type: ignore[return-value]
