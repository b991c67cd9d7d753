#!/usr/bin/env python3
"""
Cavity Field Solver
IBC + FBC 공동 클라인-고든 장 시나리오 실행 파일

하위 명령: pairs, scan, bvp, pathint, dispersion, compton
종료 코드: 0 = 계산 완료 (빈 결과/해 없음 포함), 2 = 입력 오류, 1 = 수치 실패
"""

import sys
import argparse
import logging
import math
from pathlib import Path

# 프로젝트 루트 디렉토리를 Python 경로에 추가
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pandas as pd

from modules.core.exceptions import ConvergenceError, FieldModelError
from modules.core.field_model import Mode, dispersion, si_seconds
from modules.core.path_integral import (
    LatticeActionSpec,
    LatticeScheme,
    harmonic_propagator,
    joint_probability_bruteforce,
    joint_probability_exact,
    lattice_frequency,
    lattice_resonant_frequency,
    stationary_phase_report,
)
from modules.core.quantization import (
    ConstraintForm,
    compton_bound,
    find_admissible_pairs,
    scan_delta_t,
    tolerance_sweep,
)
from modules.core.two_time_bvp import BvpTolerances, Spectrum, solve_field_bvp
from modules.data.scenario_config import ScenarioConfig, load_scenario
from modules.reports.result_writer import ResultWriter
from modules.utils.config_manager import get_config

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2

COMMANDS = ("pairs", "scan", "bvp", "pathint", "dispersion", "compton")

# --tolerance 가 덮어쓰는 설정 키
TOLERANCE_KEYS = {
    "pairs": ("tolerance",),
    "scan": ("tolerance",),
    "bvp": ("resonance_tolerance", "compatibility_tolerance"),
    "pathint": ("bruteforce_tolerance",),
}


def setup_logging(quiet=False):
    """통일된 로깅 설정 (stderr)"""
    level = logging.WARNING if quiet else logging.INFO

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s' if not quiet else '%(message)s',
        datefmt='%H:%M:%S',
        stream=sys.stderr,
        force=True,
    )

    return logging.getLogger(__name__)


def setup_argument_parser():
    """명령행 인수 파서 설정"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="시나리오 설정 파일 (key = value)")
    common.add_argument("--out", default=".", help="결과 폴더 (기본값: 현재 폴더)")
    common.add_argument(
        "--form",
        choices=("dispersion", "paper"),
        default=None,
        help="정수쌍 제약식 형태 (pairs/scan, 기본값: dispersion)",
    )
    common.add_argument("--tolerance", type=float, default=None, help="허용오차 덮어쓰기")
    common.add_argument("--quiet", "-q", action="store_true", help="최소한의 출력만 표시")

    parser = argparse.ArgumentParser(
        description="IBC + FBC 공동 클라인-고든 장 계산기",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
사용 예시:
  python main.py pairs --config pairs.cfg --out results      # 허용 정수쌍 (n_x, n_t)
  python main.py scan --config scan.cfg                       # Δt 스캔과 허용 비율
  python main.py bvp --config bvp.cfg                         # 두 시각 경계값 문제 장 재구성
  python main.py pathint --config pathint.cfg --bruteforce    # 격자 경로적분 + 직접 구적 비교
  python main.py dispersion --config modes.cfg                # ω(k) 표
  python main.py compton --config electron.cfg                # 콤프턴 주기 한계
        """
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, parents=[common])
        if command == "pathint":
            sub.add_argument(
                "--bruteforce",
                action="store_true",
                help="직접 구적 교차검증 (n_slices ≤ 3)",
            )
    return parser


def apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    overrides = {}
    if args.tolerance is not None:
        keys = TOLERANCE_KEYS.get(config.command)
        if keys is None:
            logging.getLogger(__name__).warning(f"⚠️ '{config.command}' 명령은 --tolerance 를 사용하지 않습니다")
        else:
            if not args.tolerance > 0:
                raise FieldModelError(f"--tolerance 는 양수여야 합니다: {args.tolerance}")
            overrides.update({key: args.tolerance for key in keys})
    if args.form is not None and config.command in ("pairs", "scan"):
        overrides["form"] = args.form
    return config.with_overrides(**overrides)


def run_pairs(config: ScenarioConfig, writer: ResultWriter, logger) -> int:
    """허용 정수쌍 탐색"""
    params = config.field_params()
    form = ConstraintForm.parse(config["form"])
    pairs = find_admissible_pairs(
        params,
        config["length"],
        config["delta_t"],
        config.get("tolerance"),
        form,
        config.get("max_mode"),
    )
    si_units = config["units"] == "si"

    rows = []
    for pair in pairs:
        bound = compton_bound(params, pair.n_t)
        row = {
            "n_x": pair.n_x,
            "n_t": pair.n_t,
            "residual": pair.residual,
            "frequency": pair.frequency(config["delta_t"]),
            "wavenumber": pair.wavenumber(config["length"]),
            "compton_bound": bound,
        }
        if si_units and bound is not None:
            row["compton_bound_seconds"] = si_seconds(bound)
        rows.append(row)

    if not pairs:
        logger.info("허용 정수쌍 없음 (정상 결과)")
    else:
        logger.info(f"허용 정수쌍 {len(pairs)}개")

    writer.write(
        {
            "command": "pairs",
            "inputs": config.echo(),
            "form": form.value,
            "pair_count": len(pairs),
            "pairs": rows,
        },
        pd.DataFrame(rows, columns=["n_x", "n_t", "residual", "frequency", "wavenumber", "compton_bound"]),
    )
    return EXIT_OK


def run_scan(config: ScenarioConfig, writer: ResultWriter, logger) -> int:
    """Δt 스캔 (tolerances 키가 있으면 허용오차 스윕)"""
    params = config.field_params()
    form = ConstraintForm.parse(config["form"])
    window = (config["length"], config["dt_min"], config["dt_max"], config["steps"])

    slope = None
    if config.get("tolerances"):
        reports, slope = tolerance_sweep(params, *window, config["tolerances"], form, config.get("max_mode"))
    else:
        reports = [scan_delta_t(params, *window, config.get("tolerance"), form, config.get("max_mode"))]

    frames = []
    for report in reports:
        frame = report.to_frame()
        if len(reports) > 1:
            frame.insert(0, "tolerance", report.tolerance)
        frames.append(frame)

    summary = {
        "command": "scan",
        "inputs": config.echo(),
        "form": reports[0].form.value,
        "summaries": [
            {
                "tolerance": report.tolerance,
                "admissible_fraction": report.admissible_fraction,
                "unique_fraction": report.unique_fraction,
                "admissible_count": int(np.count_nonzero(report.solution_counts)),
                "steps": int(report.solution_counts.size),
            }
            for report in reports
        ],
    }
    if slope is None:
        summary["admissible_fraction"] = reports[0].admissible_fraction
    else:
        summary["tolerance_slope"] = slope

    writer.write(summary, pd.concat(frames, ignore_index=True))
    return EXIT_OK


def run_bvp(config: ScenarioConfig, writer: ResultWriter, logger) -> int:
    """두 시각 경계값 문제 풀이와 장 격자 출력"""
    params = config.field_params()
    grid = config.cavity_grid()
    initial, final = config.boundary_slices()
    defaults = BvpTolerances.from_config()
    tolerances = BvpTolerances(
        resonance=config.get("resonance_tolerance", defaults.resonance),
        compatibility=config.get("compatibility_tolerance", defaults.compatibility),
    )
    spectrum = Spectrum(config["spectrum"])
    solution = solve_field_bvp(params, grid, initial, final, tolerances, spectrum)

    times, positions = np.meshgrid(grid.t_coordinates(), grid.x_coordinates(), indexing="ij")
    frame = pd.DataFrame(
        {"t": times.ravel(), "x": positions.ravel(), "phi": solution.field.values.ravel()}
    )

    if not solution.feasible:
        logger.warning("⚠️ 경계 조건이 양립하지 않는 모드가 있습니다 (feasible=false)")

    writer.write(
        {
            "command": "bvp",
            "inputs": config.echo(),
            "feasible": solution.feasible,
            "kge_residual_max": solution.kge_residual_max,
            "spectrum": spectrum.value,
            "modes": solution.mode_table().to_dict(orient="records"),
        },
        frame,
    )
    return EXIT_OK


def resolve_mode(config: ScenarioConfig, params, scheme: LatticeScheme) -> Mode:
    """omega / length+n_x / lattice_resonance 로부터 모드 결정"""
    n_x = config["n_x"]
    if config.get("lattice_resonance") is not None:
        omega = lattice_resonant_frequency(
            config["delta_t"], config["n_slices"], config["lattice_resonance"], scheme
        )
    elif config.get("omega") is not None:
        omega = config["omega"]
    else:
        wavenumber = n_x * math.pi / config["length"]
        return Mode(n_x=n_x, wavenumber=wavenumber, frequency=dispersion(params, wavenumber))

    # 분산관계의 역: k = sqrt(ω² − μ²)/c
    spatial = max(0.0, omega ** 2 - params.compton_frequency ** 2)
    return Mode(n_x=n_x, wavenumber=math.sqrt(spatial) / params.speed_of_light, frequency=omega)


def run_pathint(config: ScenarioConfig, writer: ResultWriter, logger, bruteforce: bool = False) -> int:
    """격자 경로적분 결합확률"""
    params = config.field_params()
    scheme = LatticeScheme.parse(config.get("scheme", get_config().get_lattice_scheme()))
    mode = resolve_mode(config, params, scheme)
    spec = LatticeActionSpec.from_interval(
        mode, config["delta_t"], config["n_slices"], config["alpha"], config["beta"], scheme, params.hbar
    )

    exact = joint_probability_exact(
        spec, config.get("singularity_tolerance"), config.get("compatibility_tolerance")
    )
    stationary = stationary_phase_report(spec, config.get("singularity_tolerance"))

    report = {
        "command": "pathint",
        "inputs": config.echo(),
        "scheme": scheme.value,
        "omega": mode.frequency,
        "magnitude": exact.magnitude,
        "phase": exact.phase,
        "probability": exact.probability,
        "classical_action": exact.classical_action,
        "kernel_rank_deficiency": exact.kernel_rank_deficiency,
        "compatibility_residual": exact.compatibility_residual,
        "relative_weight": stationary.weight_ratio,
        "stationary_phase": {
            "stationary_point_exists": stationary.stationary_point_exists,
            "family_dimension": stationary.family_dimension,
            "classical_action": stationary.classical_action,
            "weight_ratio": stationary.weight_ratio,
            "shell_endpoints": list(stationary.shell_endpoints),
        },
        "diagnostics": exact.diagnostics,
    }

    try:
        report["lattice_frequency"] = lattice_frequency(spec)
    except FieldModelError as e:
        logger.warning(f"⚠️ 격자 진동수 계산 불가: {e}")
        report["lattice_frequency"] = None

    try:
        continuum = harmonic_propagator(mode.frequency, spec.delta_t, spec.alpha, spec.beta, spec.hbar)
        report["continuum"] = {
            "magnitude": continuum.magnitude,
            "phase": continuum.phase,
            "classical_action": continuum.classical_action,
        }
    except FieldModelError:
        report["continuum"] = None

    if bruteforce:
        settings = get_config().get_bruteforce_settings()
        brute = joint_probability_bruteforce(
            spec,
            epsilon=config.get("bruteforce_epsilon"),
            nodes=config.get("bruteforce_nodes", settings["nodes"]),
            tolerance=config.get("bruteforce_tolerance", settings["tolerance"]),
        )
        delta_phase = math.remainder(brute.phase - exact.phase, 2.0 * math.pi)
        report["bruteforce"] = {
            "magnitude": brute.magnitude,
            "phase": brute.phase,
            "relative_magnitude_difference": abs(brute.magnitude - exact.magnitude) / exact.magnitude
            if exact.magnitude > 0 else None,
            "phase_difference": abs(delta_phase),
            "extrapolation": brute.diagnostics,
        }
        logger.info(f"직접 구적 비교: |Z| 상대 차이 {report['bruteforce']['relative_magnitude_difference']}")

    frame = pd.DataFrame(
        [
            {
                "n_slices": spec.n_slices,
                "omega": mode.frequency,
                "magnitude": exact.magnitude,
                "phase": exact.phase,
                "kernel_rank_deficiency": exact.kernel_rank_deficiency,
                "compatibility_residual": exact.compatibility_residual,
            }
        ]
    )
    writer.write(report, frame)
    return EXIT_OK


def run_dispersion(config: ScenarioConfig, writer: ResultWriter, logger) -> int:
    """모드 1..n_max 의 ω(k) 표"""
    params = config.field_params()
    modes = []
    for n_x in range(1, config["n_max"] + 1):
        wavenumber = n_x * math.pi / config["length"]
        modes.append(Mode(n_x=n_x, wavenumber=wavenumber, frequency=dispersion(params, wavenumber)))
    frame = pd.DataFrame(
        [
            {"n_x": mode.n_x, "wavenumber": mode.wavenumber, "frequency": mode.frequency, "period": mode.period}
            for mode in modes
        ]
    )
    writer.write(
        {
            "command": "dispersion",
            "inputs": config.echo(),
            "compton_frequency": params.compton_frequency,
            "mode_count": len(modes),
        },
        frame,
    )
    return EXIT_OK


def run_compton(config: ScenarioConfig, writer: ResultWriter, logger) -> int:
    """n_t = 1..n_max 의 콤프턴 주기 한계"""
    params = config.field_params()
    si_units = config["units"] == "si"
    rows = []
    for n_t in range(1, config["n_max"] + 1):
        bound = compton_bound(params, n_t)
        row = {"n_t": n_t, "compton_bound": bound}
        if si_units:
            row["compton_bound_seconds"] = si_seconds(bound) if bound is not None else None
        rows.append(row)

    if params.mass == 0:
        logger.info("질량 0 - 콤프턴 한계 없음")

    period = params.compton_period()
    writer.write(
        {
            "command": "compton",
            "inputs": config.echo(),
            "bounded": params.mass > 0,
            "compton_period": period,
            "compton_period_seconds": si_seconds(period) if si_units and period is not None else None,
            "bounds": rows,
        },
        pd.DataFrame(rows),
    )
    return EXIT_OK


def print_summary(writer: ResultWriter, quiet: bool = False):
    """결과 파일 위치 출력"""
    if quiet:
        return
    print(f"✅ {writer.command} 완료")
    for path in (writer.csv_path, writer.json_path):
        if path.exists():
            print(f"   - {path}")


def main(argv=None) -> int:
    """시나리오 실행 (종료 코드 반환)"""
    parser = setup_argument_parser()
    args = parser.parse_args(argv)

    logger = setup_logging(args.quiet)

    try:
        config = apply_overrides(load_scenario(args.config, args.command), args)
        writer = ResultWriter(args.out, args.command)

        if args.command == "pairs":
            status = run_pairs(config, writer, logger)
        elif args.command == "scan":
            status = run_scan(config, writer, logger)
        elif args.command == "bvp":
            status = run_bvp(config, writer, logger)
        elif args.command == "pathint":
            status = run_pathint(config, writer, logger, bruteforce=args.bruteforce)
        elif args.command == "dispersion":
            status = run_dispersion(config, writer, logger)
        else:
            status = run_compton(config, writer, logger)

        print_summary(writer, args.quiet)
        return status

    except (FieldModelError, OSError) as e:
        logger.error(f"입력 오류: {e}")
        return EXIT_INPUT_ERROR
    except ConvergenceError as e:
        logger.error(f"수치 계산 실패: {e} {e.diagnostics}")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("\n⚠️ 사용자에 의해 중단되었습니다.", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        logger.exception(f"예상치 못한 오류 발생: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
