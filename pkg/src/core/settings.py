#!/usr/bin/env python3
"""
数值容差配置
"""

from pydantic import BaseModel, ConfigDict, Field


class ToleranceConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    symmetry: float = Field(default=1e-10, ge=0)
    rank: float = Field(default=1e-10, gt=0)
    drop: float = Field(default=1e-12, ge=0)
    inverse: float = Field(default=1e-8, gt=0)
    condition_limit: float = Field(default=1e12, gt=1)
    inequality: float = Field(default=1e-8, ge=0)
