#!/usr/bin/env python3
"""
설정 관리 모듈
config/solver_config.json 을 읽어 기본 허용오차/해상도 값을 제공
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config" / "solver_config.json"

# 설정 파일이 없을 때 사용하는 내장 기본값
DEFAULT_SETTINGS: Dict[str, Any] = {
    "bvp": {
        "resonance_tolerance": 1e-9,
        "compatibility_tolerance": 1e-9,
    },
    "quantization": {
        "pair_tolerance": 1e-9,
        "max_mode": 1000,
        "candidate_limit": 1_000_000,
        "constraint_form": "dispersion",
    },
    "path_integral": {
        "singularity_tolerance": 1e-9,
        "compatibility_tolerance": 1e-9,
        "scheme": "trapezoid",
        "bruteforce": {
            "max_slices": 3,
            "nodes": 240,
            "decay": 36.0,
            "epsilon": None,
            "tolerance": 1e-6,
        },
    },
    "output": {
        "csv_delimiter": ",",
        "json_indent": 2,
    },
}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """솔버 설정 관리 클래스"""

    def __init__(self, config_path: Optional[Path] = None):
        self.logger = logging.getLogger(__name__)
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        self.solver_config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """설정 파일 로드 (없거나 손상되면 내장 기본값 사용)"""
        if not self.config_path.exists():
            self.logger.warning(f"설정 파일이 없습니다 - 기본값 사용: {self.config_path}")
            return copy.deepcopy(DEFAULT_SETTINGS)

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                user_settings = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            self.logger.warning(f"설정 파일 읽기 실패 - 기본값 사용: {e}")
            return copy.deepcopy(DEFAULT_SETTINGS)

        self.logger.debug(f"설정 파일 로드 완료: {self.config_path}")
        return _deep_merge(DEFAULT_SETTINGS, user_settings)

    def _section(self, name: str) -> Dict[str, Any]:
        return self.solver_config.get(name, {})

    def get_bvp_tolerances(self) -> Dict[str, float]:
        section = self._section("bvp")
        return {
            "resonance": float(section["resonance_tolerance"]),
            "compatibility": float(section["compatibility_tolerance"]),
        }

    def get_pair_tolerance(self) -> float:
        return float(self._section("quantization")["pair_tolerance"])

    def get_max_mode(self) -> int:
        return int(self._section("quantization")["max_mode"])

    def get_candidate_limit(self) -> int:
        return int(self._section("quantization")["candidate_limit"])

    def get_constraint_form(self) -> str:
        return str(self._section("quantization")["constraint_form"])

    def get_singularity_tolerance(self) -> float:
        return float(self._section("path_integral")["singularity_tolerance"])

    def get_compatibility_tolerance(self) -> float:
        return float(self._section("path_integral")["compatibility_tolerance"])

    def get_lattice_scheme(self) -> str:
        return str(self._section("path_integral")["scheme"])

    def get_bruteforce_settings(self) -> Dict[str, Any]:
        return dict(self._section("path_integral")["bruteforce"])

    def get_output_settings(self) -> Dict[str, Any]:
        return dict(self._section("output"))


_config_instance: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """전역 설정 인스턴스 반환"""
    global _config_instance
    if _config_instance is None:
        _config_instance = ConfigManager()
    return _config_instance


def reset_config(config_path: Optional[Path] = None) -> ConfigManager:
    """설정 다시 로드 (테스트/다른 설정 파일 사용 시)"""
    global _config_instance
    _config_instance = ConfigManager(config_path)
    return _config_instance
