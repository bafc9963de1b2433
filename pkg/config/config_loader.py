#!/usr/bin/env python3
"""
配置加载器 - 处理配置文件加载、环境变量替换和验证
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from src.core.settings import ToleranceConfig
from src.eigen.m_eigen import SolverConfig
from src.oracle.brute_force import GridSpec

logger = logging.getLogger(__name__)

SEED_ENV = "BIQUAD_SEED"

DEFAULT_CONFIG: Dict[str, Any] = {
    'solver': {
        'starts': 32,
        'max_iters': 2000,
        'tol': 1e-11,
        'shift': None,
        'seed': 0,
    },
    'tolerances': {
        'symmetry': 1e-10,
        'rank': 1e-10,
        'drop': 1e-12,
        'inverse': 1e-8,
        'condition_limit': 1e12,
        'inequality': 1e-8,
    },
    'oracle': {
        'resolution': 90,
        'samples': 2000,
        'seed': 0,
    },
    'system': {
        'log_level': 'INFO',
        'log_file': None,
    },
}

SECTION_MODELS = {
    'solver': SolverConfig,
    'tolerances': ToleranceConfig,
    'oracle': GridSpec,
}

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def load_config(config_path: Optional[str] = "config/config.yaml") -> Dict[str, Any]:
    """加载配置文件；文件不存在时创建默认配置"""
    load_dotenv()

    if config_path is None:
        config = copy.deepcopy(DEFAULT_CONFIG)
    else:
        config_file = Path(config_path)
        if not config_file.exists():
            config = _create_default_config(config_file)
        else:
            with open(config_file, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f) or {}

    config = _resolve_environment_variables(config)
    return _merge_defaults(config)


def validate_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """验证配置完整性，返回 {'valid', 'errors', 'warnings'}"""
    errors = []
    warnings = []

    for section, model in SECTION_MODELS.items():
        if section not in config:
            errors.append(f"缺少必需配置段: {section}")
            continue
        try:
            model(**(config[section] or {}))
        except ValidationError as e:
            for item in e.errors():
                location = '.'.join(str(part) for part in item['loc'])
                errors.append(f"{section}.{location}: {item['msg']}")

    system = config.get('system', {})
    level = str(system.get('log_level', 'INFO')).upper()
    if level not in LOG_LEVELS:
        warnings.append(f"未知日志级别 {level}，使用 INFO")

    solver = config.get('solver', {})
    if isinstance(solver.get('starts'), int) and solver['starts'] < 4:
        warnings.append("起点数较少，M-特征值下界可能偏松")

    oracle = config.get('oracle', {})
    if isinstance(oracle.get('resolution'), int) and 8 <= oracle['resolution'] < 36:
        warnings.append("网格分辨率较低，暴力参考误差较大")

    return {
        'valid': len(errors) == 0,
        'errors': errors,
        'warnings': warnings
    }


def resolve_seed(config: Dict[str, Any], cli_seed: Optional[int] = None) -> int:
    """种子优先级: 命令行 --seed > 环境变量 BIQUAD_SEED > solver.seed"""
    if cli_seed is not None:
        return int(cli_seed)
    env_seed = os.getenv(SEED_ENV)
    if env_seed not in (None, ''):
        try:
            return int(env_seed)
        except ValueError:
            logger.warning(f"⚠️ 环境变量 {SEED_ENV}={env_seed!r} 不是整数，忽略")
    return int(config.get('solver', {}).get('seed', 0))


def _create_default_config(config_file: Path) -> Dict[str, Any]:
    """创建默认配置文件"""
    config_file.parent.mkdir(parents=True, exist_ok=True)
    default_config = copy.deepcopy(DEFAULT_CONFIG)

    with open(config_file, 'w', encoding='utf-8') as f:
        yaml.dump(default_config, f, default_flow_style=False, allow_unicode=True)

    logger.info(f"✅ 已创建默认配置文件: {config_file}")
    return default_config


def _merge_defaults(config: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for section, values in config.items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


def _resolve_environment_variables(config: Dict[str, Any]) -> Dict[str, Any]:
    """解析 ${ENV_VAR} 占位符；未设置的变量删除该键，回落到默认值"""
    unresolved = object()

    def resolve_value(value):
        if isinstance(value, str) and value.startswith('${') and value.endswith('}'):
            env_value = os.getenv(value[2:-1])
            if env_value is None or env_value == '':
                return unresolved
            return yaml.safe_load(env_value)
        return value

    def traverse(obj):
        if isinstance(obj, dict):
            resolved = {k: traverse(v) for k, v in obj.items()}
            return {k: v for k, v in resolved.items() if v is not unresolved}
        elif isinstance(obj, list):
            return [traverse(item) for item in obj]
        else:
            return resolve_value(obj)

    return traverse(config)

