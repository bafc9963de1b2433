#!/usr/bin/env python3
"""
JSON 读写 - 命令行各子命令之间的交换格式
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.core.errors import InvalidInputError
from src.core.tensor import Tensor4, ThirdOrderTensor

logger = logging.getLogger(__name__)

STDIN = "-"


def read_payload(source: Optional[str] = None) -> Any:
    """读取 JSON；source 为空或 '-' 时读标准输入。RunReport 包装会被自动拆开"""
    try:
        if source in (None, STDIN):
            text = sys.stdin.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"无法读取输入 {source}: {e}") from e

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"输入不是合法 JSON ({source or 'stdin'}): {e}") from e
    return unwrap(payload)


def unwrap(payload: Any) -> Any:
    if isinstance(payload, dict) and "outputs" in payload and "command" in payload:
        return payload["outputs"]
    return payload


def tensor_from_payload(payload: Any) -> Tensor4:
    """张量可以是 {m, n, entries} 对象，也可以是 m x n x m x n 的嵌套列表"""
    if isinstance(payload, list):
        try:
            return Tensor4(np.asarray(payload, dtype=float))
        except (TypeError, ValueError) as e:
            raise InvalidInputError(f"嵌套列表张量格式错误: {e}") from e
    if not isinstance(payload, dict):
        raise InvalidInputError("张量 JSON 必须是对象或 4 维嵌套列表")
    return Tensor4.from_dict(payload)


def third_order_from_payload(payload: Any) -> ThirdOrderTensor:
    if not isinstance(payload, dict) or "p" not in payload:
        raise InvalidInputError("三阶张量 JSON 需要包含 p, m, n, entries")
    return ThirdOrderTensor.from_dict(payload)


def matrix_from_payload(payload: Any) -> np.ndarray:
    """矩阵可以是嵌套列表，也可以是 {"entries": 嵌套列表}"""
    if isinstance(payload, dict):
        payload = payload.get("entries")
    try:
        matrix = np.asarray(payload, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"矩阵 JSON 格式错误: {e}") from e
    if matrix.ndim != 2:
        raise InvalidInputError(f"矩阵必须是二维数组，实际维数 {matrix.ndim}")
    return matrix


def parse_vector(text: str) -> np.ndarray:
    """'1,0,-2' 或 JSON 数组文本 -> 向量"""
    text = text.strip()
    try:
        values = json.loads(text) if text.startswith("[") else [float(v) for v in text.split(",") if v.strip()]
        vector = np.asarray(values, dtype=float).ravel()
    except (ValueError, TypeError) as e:
        raise InvalidInputError(f"无法解析向量: {text!r}") from e
    if vector.size == 0:
        raise InvalidInputError("向量不能为空")
    return vector


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"无法序列化类型 {type(obj).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, default=_plain)


def write_payload(payload: Any, out: Optional[str] = None, stream=None) -> str:
    """JSON 写到标准输出；指定 out 时同时写入文件"""
    text = dumps(payload)
    stream = stream or sys.stdout
    stream.write(text + "\n")
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        logger.info(f"💾 结果已写入: {path}")
    return text
