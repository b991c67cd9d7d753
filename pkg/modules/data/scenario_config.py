#!/usr/bin/env python3
"""
시나리오 설정 파서
한 줄에 `key = value` 하나, `#` 이후는 주석. 하위 명령마다 허용 키가 다르며,
잘못된 값은 파싱 시점에 해당 키 이름과 함께 거부한다.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from modules.core.exceptions import FieldModelError, ScenarioConfigError
from modules.core.field_model import CavityGrid, FieldParams, natural_time_from_si
from modules.core.two_time_bvp import BoundarySlice, decompose_profile
from modules.utils.config_manager import get_config


@dataclass(frozen=True)
class KeySpec:
    """설정 키 하나의 형식과 제약"""

    kind: str  # float | int | str | floats | path
    required: bool = False
    default: Any = None
    positive: bool = False
    non_negative: bool = False
    choices: Optional[Tuple[str, ...]] = None
    si_time: bool = False


COMMON_KEYS: Dict[str, KeySpec] = {
    "mass": KeySpec("float", default=0.0, non_negative=True),
    "speed_of_light": KeySpec("float", default=1.0, positive=True),
    "hbar": KeySpec("float", default=1.0, positive=True),
    "units": KeySpec("str", default="natural", choices=("natural", "si")),
}

# 기본값은 설정 파일의 quantization.constraint_form
FORM_KEY = KeySpec("str", choices=("dispersion", "paper"))

COMMAND_KEYS: Dict[str, Dict[str, KeySpec]] = {
    "pairs": {
        "length": KeySpec("float", required=True, positive=True),
        "delta_t": KeySpec("float", required=True, positive=True, si_time=True),
        "tolerance": KeySpec("float", positive=True),
        "max_mode": KeySpec("int", positive=True),
        "form": FORM_KEY,
    },
    "scan": {
        "length": KeySpec("float", required=True, positive=True),
        "dt_min": KeySpec("float", required=True, positive=True, si_time=True),
        "dt_max": KeySpec("float", required=True, positive=True, si_time=True),
        "steps": KeySpec("int", required=True),
        "tolerance": KeySpec("float", positive=True),
        "tolerances": KeySpec("floats", positive=True),
        "max_mode": KeySpec("int", positive=True),
        "form": FORM_KEY,
    },
    "bvp": {
        "length": KeySpec("float", required=True, positive=True),
        "delta_t": KeySpec("float", required=True, positive=True, si_time=True),
        "n_space": KeySpec("int", required=True),
        "n_time": KeySpec("int", required=True),
        "t_start": KeySpec("float", default=0.0, si_time=True),
        "n_modes": KeySpec("int", positive=True),
        "initial": KeySpec("floats"),
        "final": KeySpec("floats"),
        "initial_profile": KeySpec("path"),
        "final_profile": KeySpec("path"),
        "spectrum": KeySpec("str", default="continuum", choices=("continuum", "stencil")),
        "resonance_tolerance": KeySpec("float", positive=True),
        "compatibility_tolerance": KeySpec("float", positive=True),
    },
    "pathint": {
        "delta_t": KeySpec("float", required=True, positive=True, si_time=True),
        "n_slices": KeySpec("int", required=True, positive=True),
        "alpha": KeySpec("float", required=True),
        "beta": KeySpec("float", required=True),
        "omega": KeySpec("float", non_negative=True),
        "length": KeySpec("float", positive=True),
        "n_x": KeySpec("int", default=1, positive=True),
        "scheme": KeySpec("str", choices=("trapezoid", "midpoint")),
        "lattice_resonance": KeySpec("int", positive=True),
        "singularity_tolerance": KeySpec("float", positive=True),
        "compatibility_tolerance": KeySpec("float", positive=True),
        "bruteforce_nodes": KeySpec("int", positive=True),
        "bruteforce_epsilon": KeySpec("float", positive=True),
        "bruteforce_tolerance": KeySpec("float", positive=True),
    },
    "dispersion": {
        "length": KeySpec("float", required=True, positive=True),
        "n_max": KeySpec("int", required=True, positive=True),
    },
    "compton": {
        "n_max": KeySpec("int", required=True, positive=True),
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """하위 명령 하나의 검증된 설정 (시간/질량은 자연단위로 변환된 값)"""

    command: str
    values: Dict[str, Any]
    source: Optional[Path] = None
    profiles: Dict[str, Any] = field(default_factory=dict, repr=False)

    def get(self, key: str, default: Any = None) -> Any:
        value = self.values.get(key)
        return default if value is None else value

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def with_overrides(self, **overrides) -> "ScenarioConfig":
        """명령행 인수로 일부 키를 덮어쓴 사본"""
        schema = {**COMMON_KEYS, **COMMAND_KEYS[self.command]}
        values = dict(self.values)
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in schema:
                raise ScenarioConfigError(f"'{self.command}' 명령은 '{key}' 키를 지원하지 않습니다", key=key)
            values[key] = value
        return replace(self, values=values)

    def field_params(self) -> FieldParams:
        if self.values["units"] == "si":
            return FieldParams.from_si(self.values["mass"])
        return FieldParams(
            mass=self.values["mass"],
            speed_of_light=self.values["speed_of_light"],
            hbar=self.values["hbar"],
        )

    def cavity_grid(self) -> CavityGrid:
        return CavityGrid(
            length=self.values["length"],
            delta_t=self.values["delta_t"],
            n_space=self.values["n_space"],
            n_time=self.values["n_time"],
            t_start=self.values["t_start"],
        )

    def boundary_slices(self) -> Tuple[BoundarySlice, BoundarySlice]:
        """IBC/FBC 사인 계수 (인라인 계수 또는 프로파일 파일의 DST 분해)"""
        grid = self.cavity_grid()
        slices = []
        for key in ("initial", "final"):
            if self.values.get(key) is not None:
                coefficients = list(self.values[key])
                n_modes = self.values.get("n_modes") or len(coefficients)
                if n_modes != len(coefficients):
                    raise ScenarioConfigError(
                        f"'{key}' 계수 {len(coefficients)}개가 n_modes={n_modes} 와 다릅니다", key=key
                    )
                slices.append(BoundarySlice(coefficients))
            else:
                samples = self.profiles[f"{key}_profile"]
                n_modes = self.values.get("n_modes") or grid.n_space
                slices.append(decompose_profile(samples, grid, n_modes))
        return slices[0], slices[1]

    def echo(self) -> Dict[str, Any]:
        """JSON 보고서에 되돌려 적을 입력값"""
        return {
            key: (str(value) if isinstance(value, Path) else value)
            for key, value in sorted(self.values.items())
            if value is not None
        }


class ScenarioConfigParser:
    """`key = value` 형식 시나리오 파일 파서"""

    def __init__(self, command: str):
        if command not in COMMAND_KEYS:
            raise ScenarioConfigError(f"알 수 없는 명령: {command}")
        self.logger = logging.getLogger("ScenarioConfigParser")
        self.command = command
        self.schema = {**COMMON_KEYS, **COMMAND_KEYS[command]}

    def read_pairs(self, text: str) -> Dict[str, str]:
        """주석/빈 줄을 건너뛰고 원시 key-value 쌍 추출"""
        raw: Dict[str, str] = {}
        for line_number, line in enumerate(text.splitlines(), start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            if "=" not in content:
                raise ScenarioConfigError(f"{line_number}번째 줄에 '=' 가 없습니다: {line.strip()}")
            key, value = (part.strip() for part in content.split("=", 1))
            if not key:
                raise ScenarioConfigError(f"{line_number}번째 줄에 키가 없습니다")
            if key in raw:
                raise ScenarioConfigError(f"키가 중복되었습니다: {key}", key=key)
            raw[key] = value
        return raw

    def convert(self, key: str, text: str, spec: KeySpec, base_dir: Path) -> Any:
        try:
            if spec.kind == "float":
                value = float(text)
            elif spec.kind == "int":
                value = int(text)
            elif spec.kind == "floats":
                value = [float(item) for item in text.split(",") if item.strip()]
                if not value:
                    raise ValueError("빈 목록")
            elif spec.kind == "path":
                path = Path(text)
                value = path if path.is_absolute() else base_dir / path
            else:
                value = text.strip().lower()
        except ValueError as e:
            raise ScenarioConfigError(f"'{key}' 값을 해석할 수 없습니다: {text} ({e})", key=key) from e

        numbers = value if isinstance(value, list) else [value]
        if spec.kind in ("float", "int", "floats"):
            for number in numbers:
                if not math.isfinite(number):
                    raise ScenarioConfigError(f"'{key}' 값이 유한하지 않습니다: {text}", key=key)
                if spec.positive and number <= 0:
                    raise ScenarioConfigError(f"'{key}' 는 양수여야 합니다: {text}", key=key)
                if spec.non_negative and number < 0:
                    raise ScenarioConfigError(f"'{key}' 는 0 이상이어야 합니다: {text}", key=key)
        if spec.choices and value not in spec.choices:
            raise ScenarioConfigError(
                f"'{key}' 는 {'|'.join(spec.choices)} 중 하나여야 합니다: {text}", key=key
            )
        return value

    def parse(self, text: str, base_dir: Path = Path(".")) -> Dict[str, Any]:
        raw = self.read_pairs(text)
        for key in raw:
            if key not in self.schema:
                raise ScenarioConfigError(f"'{self.command}' 명령에 알 수 없는 키: {key}", key=key)

        values: Dict[str, Any] = {}
        for key, spec in self.schema.items():
            if key in raw:
                values[key] = self.convert(key, raw[key], spec, base_dir)
            elif spec.required:
                raise ScenarioConfigError(f"필수 키가 없습니다: {key}", key=key)
            else:
                values[key] = spec.default

        if "form" in self.schema and values["form"] is None:
            values["form"] = self.convert("form", get_config().get_constraint_form(), FORM_KEY, base_dir)
        if values["units"] == "si":
            self.apply_si_units(values, raw)
        self.check_relations(values)
        return values

    def apply_si_units(self, values: Dict[str, Any], raw: Dict[str, str]):
        """SI 입력: 시간(초) → c·t, 각진동수(rad/s) → ω/c. 질량은 FieldParams.from_si 에서 변환"""
        for key in ("speed_of_light", "hbar"):
            if key in raw:
                raise ScenarioConfigError(f"units = si 에서는 '{key}' 를 지정할 수 없습니다 (CODATA 값 사용)", key=key)
        for key, spec in self.schema.items():
            if spec.si_time and values.get(key) is not None:
                values[key] = natural_time_from_si(values[key])
        if values.get("omega") is not None:
            values["omega"] = values["omega"] / natural_time_from_si(1.0)

    def check_relations(self, values: Dict[str, Any]):
        if self.command == "scan":
            if values["dt_min"] >= values["dt_max"]:
                raise ScenarioConfigError("dt_min 은 dt_max 보다 작아야 합니다", key="dt_max")
            if values["steps"] < 2:
                raise ScenarioConfigError(f"steps 는 2 이상이어야 합니다: {values['steps']}", key="steps")
        elif self.command == "bvp":
            for name in ("n_space", "n_time"):
                if values[name] < 2:
                    raise ScenarioConfigError(f"'{name}' 는 2 이상이어야 합니다: {values[name]}", key=name)
            for side in ("initial", "final"):
                inline = values.get(side) is not None
                profile = values.get(f"{side}_profile") is not None
                if inline == profile:
                    raise ScenarioConfigError(
                        f"'{side}' 또는 '{side}_profile' 중 정확히 하나가 필요합니다", key=side
                    )
        elif self.command == "pathint":
            if values.get("omega") is None and values.get("length") is None and values.get("lattice_resonance") is None:
                raise ScenarioConfigError("'omega', 'length', 'lattice_resonance' 중 하나가 필요합니다", key="omega")
            if values.get("omega") is not None and values.get("length") is not None:
                raise ScenarioConfigError("'omega' 와 'length' 는 함께 지정할 수 없습니다", key="omega")
            resonance = values.get("lattice_resonance")
            if resonance is not None and resonance > values["n_slices"]:
                raise ScenarioConfigError(
                    f"lattice_resonance 는 n_slices 이하여야 합니다: {resonance}", key="lattice_resonance"
                )

    def load_profile(self, key: str, path: Path, n_space: int):
        """
        샘플 프로파일 CSV (첫 번째 숫자 열) 읽기

        첫 줄이 모두 숫자가 아니면 헤더로, 아니면 첫 샘플로 취급한다.
        """
        try:
            frame = pd.read_csv(path, header=None)
            if pd.to_numeric(frame.iloc[0], errors="coerce").isna().all():
                frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise ScenarioConfigError(f"'{key}' 파일을 읽을 수 없습니다: {path} ({e})", key=key) from e

        numeric = frame.select_dtypes(include="number")
        if numeric.shape[1] == 0:
            raise ScenarioConfigError(f"'{key}' 파일에 숫자 열이 없습니다: {path}", key=key)
        samples = numeric.iloc[:, 0].to_numpy(dtype=float)
        if samples.size != n_space:
            raise ScenarioConfigError(
                f"'{key}' 샘플 수 {samples.size} 가 n_space={n_space} 와 다릅니다", key=key
            )
        self.logger.debug(f"프로파일 로드: {path} ({samples.size} 샘플)")
        return samples

    def load(self, path) -> ScenarioConfig:
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        values = self.parse(text, base_dir=path.parent)

        profiles = {}
        for key in ("initial_profile", "final_profile"):
            if values.get(key) is not None:
                profiles[key] = self.load_profile(key, values[key], values["n_space"])

        config = ScenarioConfig(command=self.command, values=values, source=path, profiles=profiles)
        try:
            config.field_params()
        except FieldModelError as e:
            raise ScenarioConfigError(f"물리 파라미터 오류: {e}", key="mass") from e
        self.logger.info(f"시나리오 설정 로드 완료: {path} ({self.command})")
        return config


def load_scenario(path, command: str) -> ScenarioConfig:
    """시나리오 파일을 읽어 검증된 ScenarioConfig 반환 (파일 오류는 OSError)"""
    return ScenarioConfigParser(command).load(path)
