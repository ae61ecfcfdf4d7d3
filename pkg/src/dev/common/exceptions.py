from typing import Iterable, Optional


class BeamKitError(Exception):
    """所有业务异常的基类，CLI 统一映射为退出码 1"""


class ConfigurationError(BeamKitError):
    """解码/扫参配置不合法"""


class ContractViolation(BeamKitError, ValueError):
    """调用方违反前置条件（例如扩展已结束的假设）"""


class ModelError(BeamKitError):
    """打分模型错误"""

    def __init__(self, message: str, context: Optional[str] = None):
        super().__init__(message)
        self.context = context


class ModelFormatError(ModelError):
    """模型文件解析错误，location 形如 'line 3 column 7' 或 'rows.a b'"""

    def __init__(self, message: str, location: Optional[str] = None):
        text = f"{message} (at {location})" if location else message
        super().__init__(text)
        self.location = location


class NormalizationError(ModelError):
    """概率行未归一化"""

    def __init__(self, contexts: Iterable[str], details: Iterable[str] = ()):
        self.contexts = list(contexts)
        self.details = list(details)
        listed = "; ".join(self.details) if self.details else ", ".join(repr(c) for c in self.contexts)
        super().__init__(f"{len(self.contexts)} context row(s) violate normalization: {listed}")


class EnumerationLimitError(BeamKitError):
    """穷举规模超过上限"""

    def __init__(self, required: int, limit: int):
        super().__init__(f"exhaustive search needs {required} enumerations, limit is {limit}")
        self.required = required
        self.limit = limit


class SweepError(BeamKitError):
    """扫参过程中某个单元解码失败"""

    def __init__(self, message: str, model_index: int, context: Optional[str], value: float):
        super().__init__(f"{message} (model #{model_index}, input {context!r}, value {value})")
        self.model_index = model_index
        self.context = context
        self.value = value
