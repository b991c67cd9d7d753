"""config_manager: 기본값, 부분 덮어쓰기, 손상된 파일 처리"""

import json

from modules.utils.config_manager import DEFAULT_SETTINGS, get_config, reset_config


def test_repository_config_matches_defaults():
    config = get_config()
    assert config.get_pair_tolerance() == DEFAULT_SETTINGS["quantization"]["pair_tolerance"]
    assert config.get_bvp_tolerances() == {"resonance": 1e-9, "compatibility": 1e-9}
    assert config.get_bruteforce_settings()["max_slices"] == 3
    assert config.get_lattice_scheme() == "trapezoid"
    assert config.get_constraint_form() == "dispersion"


def test_singleton():
    assert get_config() is get_config()


def test_partial_override_is_merged(tmp_path):
    path = tmp_path / "solver.json"
    path.write_text(json.dumps({"path_integral": {"bruteforce": {"nodes": 64}}}), encoding="utf-8")
    config = reset_config(path)
    assert config.get_bruteforce_settings()["nodes"] == 64
    assert config.get_bruteforce_settings()["decay"] == 36.0
    assert config.get_singularity_tolerance() == 1e-9
    assert get_config() is config


def test_missing_file_falls_back(tmp_path, caplog):
    config = reset_config(tmp_path / "absent.json")
    assert config.get_max_mode() == 1000
    assert "기본값 사용" in caplog.text


def test_broken_file_falls_back(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert reset_config(path).get_candidate_limit() == 1_000_000


def test_getters_return_copies():
    config = get_config()
    config.get_bruteforce_settings()["nodes"] = 1
    assert config.get_bruteforce_settings()["nodes"] == 240
