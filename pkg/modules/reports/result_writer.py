#!/usr/bin/env python3
"""
결과 파일 생성기
격자/스캔 표는 CSV, 진단 정보는 JSON 으로 <out>/<명령>.csv, <out>/<명령>.json 에 기록한다.
같은 입력이면 바이트 단위로 같은 파일이 나오도록 타임스탬프를 넣지 않는다.
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from modules.utils.config_manager import get_config


def to_serializable(value: Any) -> Any:
    """numpy/Enum/Path 값을 JSON 기본형으로 변환 (nan/inf 는 null)"""
    if isinstance(value, dict):
        return {str(key): to_serializable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_serializable(item) for item in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class ResultWriter:
    """하위 명령 결과를 출력 폴더에 기록"""

    def __init__(self, output_dir, command: str):
        self.logger = logging.getLogger("ResultWriter")
        self.config = get_config()
        self.output_dir = Path(output_dir)
        self.command = command
        settings = self.config.get_output_settings()
        self.delimiter = settings.get("csv_delimiter", ",")
        self.indent = settings.get("json_indent", 2)

    @property
    def csv_path(self) -> Path:
        return self.output_dir / f"{self.command}.csv"

    @property
    def json_path(self) -> Path:
        return self.output_dir / f"{self.command}.json"

    def write_csv(self, frame: pd.DataFrame) -> Path:
        """헤더 행은 항상 기록, 실수는 최단 왕복 표현(repr)"""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(self.csv_path, sep=self.delimiter, index=False, lineterminator="\n")
        self.logger.info(f"📄 CSV 저장: {self.csv_path} ({len(frame)}행)")
        return self.csv_path

    def write_json(self, report: Dict[str, Any]) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        text = json.dumps(
            to_serializable(report),
            indent=self.indent,
            sort_keys=True,
            ensure_ascii=False,
            allow_nan=False,
        )
        with open(self.json_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text + "\n")
        self.logger.info(f"📄 JSON 저장: {self.json_path}")
        return self.json_path

    def write(self, report: Dict[str, Any], frame: Optional[pd.DataFrame] = None):
        if frame is not None:
            self.write_csv(frame)
        self.write_json(report)
