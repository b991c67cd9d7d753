"""공통 pytest 픽스처"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 프로젝트 루트 디렉토리를 Python 경로에 추가
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from modules.core.field_model import CavityGrid, FieldParams
from modules.utils.config_manager import reset_config


@pytest.fixture(autouse=True)
def default_config():
    """테스트마다 저장소 기본 설정으로 초기화"""
    yield reset_config()
    reset_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_params():
    """m=1, c=ħ=1"""
    return FieldParams(mass=1.0)


@pytest.fixture
def small_grid():
    return CavityGrid(length=1.0, delta_t=1.0, n_space=8, n_time=15)


@pytest.fixture
def write_scenario(tmp_path):
    """key = value 시나리오 파일 작성 헬퍼"""

    def _write(name, **values):
        path = tmp_path / name
        lines = ["# test scenario"] + [f"{key} = {value}" for key, value in values.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
