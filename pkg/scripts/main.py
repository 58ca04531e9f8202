"""
tacnode 커맨드라인 도구

극한 커널, 갭 확률, Tracy-Widom F2, 유한 n 수렴, 브라운 다리 시뮬레이션을
JSON (기본) 또는 CSV 로 출력합니다. 데이터는 stdout (또는 --output 파일),
진단 메시지는 stderr 로만 나갑니다.

종료 코드: 0 성공, 1 수치/범위 오류, 2 사용법 오류, 130 사용자 중단
"""
import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

# 프로젝트 루트 경로
project_root = Path(__file__).parent.parent

# src 모듈 import를 위한 경로 추가
sys.path.insert(0, str(project_root))

from src.errors import ConfigError, TacnodeError
from src.kernel.finite import convergence_report, scaled_finite_kernel
from src.kernel.tacnode import GapWindow, full_kernel, full_kernel_alt, gap_probability
from src.numerics.fredholm import tracy_widom_f2
from src.scaling.params import FiniteSystemConfig, ScaledPoint, TacnodeParams
from src.simulation.bridges import empirical_gap, sample_bridges
from src.utils.config import ToolkitConfig, resolve_config
from src.utils.output import emit, write_paths_csv
from src.utils.parallel import ordered_map

logger = logging.getLogger("tacnode")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

SWEEP_OUTPUTS = {
    "kernel": ("lambda", "sigma", "tau1", "xi1", "tau2", "xi2"),
    "kernel_alt": ("lambda", "sigma", "tau1", "xi1", "tau2", "xi2"),
    "finite": ("lambda", "sigma", "tau1", "xi1", "tau2", "xi2"),
    "gap": ("lambda", "sigma"),
    "tw2": ("s",),
}


def setup_logging(verbose: bool, quiet: bool, log_file: Optional[str] = None):
    """로깅 설정 (stderr + 선택적 파일)"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def parse_window(text: str) -> GapWindow:
    """TAU:LO:HI"""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"구간 형식은 TAU:LO:HI 입니다: {text}")
    try:
        time, lo, hi = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"숫자가 아닙니다: {text}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"lo < hi 이어야 합니다: {text}")
    return GapWindow(time=time, lo=lo, hi=hi)


def parse_n_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"정수 목록이 아닙니다: {text}") from None
    if not values:
        raise argparse.ArgumentTypeError("n 목록이 비어 있습니다")
    return values


def _add_point_arguments(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument('--lambda', dest='lam', type=float, required=required, help='곡률비 λ')
    parser.add_argument('--sigma', type=float, required=required, help='상호작용 세기 σ')
    for name in ('tau1', 'xi1', 'tau2', 'xi2'):
        parser.add_argument(f'--{name}', type=float, required=required)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=None, help='작업 스레드 수')
    common.add_argument('--config', type=str, default=None, help='설정 파일 경로 (YAML 또는 key=value)')
    common.add_argument('--format', choices=('json', 'csv'), default=None, help='출력 형식')
    common.add_argument('--output', '-o', type=str, default=None, help='출력 파일 (기본: stdout)')
    common.add_argument('--quad-order', dest='quad_order', type=int, default=None, help='해 연산자 구적 차수')
    common.add_argument('--cutoff', type=float, default=None, help='구적 절단 길이')
    common.add_argument('--nystrom-order', dest='nystrom_order', type=int, default=None, help='유한 n Nyström 차수')
    common.add_argument('--gap-order', dest='gap_order', type=int, default=None, help='갭 구간당 노드 수')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='DEBUG 로그')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='WARNING 이상만')

    parser = argparse.ArgumentParser(
        prog='tacnode',
        description='비대칭 tacnode 커널과 Fredholm 갭 확률 계산 도구',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
사용 예시:
  tacnode tw2 --s -2
  tacnode kernel --lambda 2 --sigma 0.5 --tau1 0.3 --xi1 -0.2 --tau2 -0.1 --xi2 0.4 --check-alt
  tacnode gap --lambda 1 --sigma 0 --window 0:-1:1
  tacnode converge --lambda 1 --sigma 0 --n-list 16,32,64 --tau1 0 --xi1 0 --tau2 0 --xi2 0.5
  tacnode simulate --n 2 --m 2 --a1 -2 --a2 2 --steps 16 --samples 1000 --seed 7 --gap 0.5:-0.3:0.3
  tacnode sweep --param s --from -4 --to 2 --points 25 --quantity tw2
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='명령어')

    kernel_parser = subparsers.add_parser('kernel', parents=[common], help='극한 커널 𝕃_tac')
    _add_point_arguments(kernel_parser)
    alt_group = kernel_parser.add_mutually_exclusive_group()
    alt_group.add_argument('--alt', action='store_true', help='단일 적분형 조립 사용')
    alt_group.add_argument('--check-alt', dest='check_alt', action='store_true', help='두 조립을 모두 계산해 비교')

    gap_parser = subparsers.add_parser('gap', parents=[common], help='다중 시간 갭 확률')
    gap_parser.add_argument('--lambda', dest='lam', type=float, required=True)
    gap_parser.add_argument('--sigma', type=float, required=True)
    gap_parser.add_argument('--window', type=parse_window, action='append', required=True, help='TAU:LO:HI (반복 가능)')

    tw2_parser = subparsers.add_parser('tw2', parents=[common], help='Tracy-Widom F2')
    tw2_parser.add_argument('--s', type=float, required=True)

    finite_parser = subparsers.add_parser('finite', parents=[common], help='스케일된 유한 n 커널')
    finite_parser.add_argument('--n', type=int, required=True)
    _add_point_arguments(finite_parser)
    finite_parser.add_argument('--compare', action='store_true', help='극한 커널과 비교')

    converge_parser = subparsers.add_parser('converge', parents=[common], help='유한 n → 극한 수렴표')
    converge_parser.add_argument('--n-list', dest='n_list', type=parse_n_list, required=True, help='N1,N2,...')
    _add_point_arguments(converge_parser)

    simulate_parser = subparsers.add_parser('simulate', parents=[common], help='비충돌 브라운 다리 샘플링')
    simulate_parser.add_argument('--n', type=int, required=True)
    simulate_parser.add_argument('--m', type=int, required=True)
    simulate_parser.add_argument('--a1', type=float, required=True)
    simulate_parser.add_argument('--a2', type=float, required=True)
    simulate_parser.add_argument('--steps', type=int, required=True, help='격자 구간 수')
    simulate_parser.add_argument('--samples', type=int, required=True, help='수락할 샘플 수')
    simulate_parser.add_argument('--seed', type=int, required=True, help='64비트 시드')
    simulate_parser.add_argument('--max-proposals', dest='max_proposals', type=int, default=10_000_000)
    simulate_parser.add_argument('--gap', type=parse_window, default=None, help='T:LO:HI 경험적 갭')
    simulate_parser.add_argument('--dump-paths', dest='dump_paths', type=str, default=None, help='경로 CSV 파일')

    sweep_parser = subparsers.add_parser('sweep', parents=[common], help='파라미터 범위 표 (CSV)')
    sweep_parser.add_argument('--param', required=True, choices=('lambda', 'sigma', 'tau1', 'xi1', 'tau2', 'xi2', 's'))
    sweep_parser.add_argument('--from', dest='start', type=float, required=True)
    sweep_parser.add_argument('--to', dest='stop', type=float, required=True)
    sweep_parser.add_argument('--points', type=int, required=True)
    sweep_parser.add_argument('--quantity', choices=tuple(SWEEP_OUTPUTS), default='kernel', help='표로 만들 값')
    _add_point_arguments(sweep_parser, required=False)
    sweep_parser.add_argument('--s', type=float, default=None)
    sweep_parser.add_argument('--n', type=int, default=None, help='finite 에서 사용할 n')
    sweep_parser.add_argument('--window', type=parse_window, action='append', default=None)
    return parser


def _params(args) -> TacnodeParams:
    return TacnodeParams(lam=args.lam, sigma=args.sigma)


def _points(args):
    return ScaledPoint(tau=args.tau1, xi=args.xi1), ScaledPoint(tau=args.tau2, xi=args.xi2)


def run_kernel(args, config: ToolkitConfig) -> Dict[str, Any]:
    params = _params(args)
    pt1, pt2 = _points(args)
    settings = config.kernel_settings()
    record: Dict[str, Any] = {
        "command": "kernel", "lambda": args.lam, "sigma": args.sigma,
        "tau1": args.tau1, "xi1": args.xi1, "tau2": args.tau2, "xi2": args.xi2,
    }
    if args.check_alt:
        value = full_kernel(params, pt1, pt2, settings)
        value_alt = full_kernel_alt(params, pt1, pt2, settings)
        record.update(value=value, value_alt=value_alt, abs_diff=abs(value - value_alt))
    elif args.alt:
        record.update(value=full_kernel_alt(params, pt1, pt2, settings), formulation="alt")
    else:
        record.update(value=full_kernel(params, pt1, pt2, settings))
    return record


def run_gap(args, config: ToolkitConfig) -> Dict[str, Any]:
    value = gap_probability(_params(args), args.window, config.gap_order, config.kernel_settings())
    return {
        "command": "gap", "lambda": args.lam, "sigma": args.sigma,
        "windows": [{"time": w.time, "lo": w.lo, "hi": w.hi} for w in args.window],
        "value": value,
    }


def run_tw2(args, config: ToolkitConfig) -> Dict[str, Any]:
    return {"command": "tw2", "s": args.s, "value": tracy_widom_f2(args.s, config.quad_order, config.cutoff)}


def run_finite(args, config: ToolkitConfig) -> Dict[str, Any]:
    params = _params(args)
    pt1, pt2 = _points(args)
    cfg = FiniteSystemConfig.from_tacnode(args.n, params)
    value = scaled_finite_kernel(args.n, params, pt1, pt2, config.finite_settings())
    record: Dict[str, Any] = {"command": "finite", "n": cfg.n, "m": cfg.m, "value": value}
    if args.compare:
        limit = full_kernel(params, pt1, pt2, config.kernel_settings())
        record.update(limit=limit, err=abs(value - limit))
    return record


def run_converge(args, config: ToolkitConfig) -> Dict[str, Any]:
    pt1, pt2 = _points(args)
    report = convergence_report(
        args.n_list, _params(args), pt1, pt2,
        config.finite_settings(), config.kernel_settings(), config.threads,
    )
    return {
        "command": "converge",
        "rows": [asdict(row) for row in report.rows],
        "slope": report.slope,
    }


def run_simulate(args, config: ToolkitConfig) -> Dict[str, Any]:
    cfg = FiniteSystemConfig(n=args.n, m=args.m, a1=args.a1, a2=args.a2, d=1.0)
    ensemble = sample_bridges(cfg, args.steps, args.samples, args.seed, args.max_proposals, config.threads)
    record: Dict[str, Any] = {
        "command": "simulate", "n": args.n, "m": args.m, "a1": args.a1, "a2": args.a2,
        "steps": args.steps, "seed": args.seed,
        "samples_accepted": ensemble.count,
        "samples_proposed": ensemble.samples_proposed,
        "acceptance_rate": ensemble.count / ensemble.samples_proposed,
    }
    if args.gap is not None:
        estimate = empirical_gap(ensemble, args.gap.time, args.gap.lo, args.gap.hi)
        record.update(
            gap_time=args.gap.time, gap_lo=args.gap.lo, gap_hi=args.gap.hi,
            p_hat=estimate.p_hat, stderr=estimate.stderr,
        )
    if args.dump_paths:
        write_paths_csv(args.dump_paths, ensemble.paths, ensemble.time_grid)
        record["paths_file"] = args.dump_paths
    return record


def _sweep_value(quantity: str, values: Dict[str, float], args, config: ToolkitConfig) -> float:
    if quantity == "tw2":
        return tracy_widom_f2(values["s"], config.quad_order, config.cutoff)
    params = TacnodeParams(lam=values["lambda"], sigma=values["sigma"])
    if quantity == "gap":
        return gap_probability(params, args.window, config.gap_order, config.kernel_settings())
    pt1 = ScaledPoint(tau=values["tau1"], xi=values["xi1"])
    pt2 = ScaledPoint(tau=values["tau2"], xi=values["xi2"])
    if quantity == "finite":
        return scaled_finite_kernel(args.n, params, pt1, pt2, config.finite_settings())
    if quantity == "kernel_alt":
        return full_kernel_alt(params, pt1, pt2, config.kernel_settings())
    return full_kernel(params, pt1, pt2, config.kernel_settings())


def run_sweep(args, config: ToolkitConfig, parser: argparse.ArgumentParser) -> Dict[str, Any]:
    allowed = SWEEP_OUTPUTS[args.quantity]
    if args.param not in allowed:
        parser.error(f"{args.quantity} 는 {', '.join(allowed)} 만 sweep 할 수 있습니다")
    if args.points < 2:
        parser.error("--points 는 2 이상이어야 합니다")
    base = {
        "lambda": args.lam, "sigma": args.sigma, "tau1": args.tau1, "xi1": args.xi1,
        "tau2": args.tau2, "xi2": args.xi2, "s": args.s,
    }
    missing = [name for name in allowed if name != args.param and base[name] is None]
    if missing:
        parser.error(f"다음 값이 필요합니다: {', '.join('--' + name for name in missing)}")
    if args.quantity == "gap" and not args.window:
        parser.error("gap sweep 에는 --window 가 필요합니다")
    if args.quantity == "finite" and args.n is None:
        parser.error("finite sweep 에는 --n 이 필요합니다")

    grid = np.linspace(args.start, args.stop, args.points)
    logger.info(f"sweep 시작: {args.quantity} over {args.param} ({args.points}점)")

    def evaluate(x: float) -> Dict[str, Any]:
        values = dict(base, **{args.param: float(x)})
        return {args.param: float(x), args.quantity: _sweep_value(args.quantity, values, args, config)}

    rows = ordered_map(evaluate, grid, config.threads)
    logger.info("sweep 완료")
    return {"command": "sweep", "param": args.param, "quantity": args.quantity, "rows": rows}


COMMANDS = {
    'kernel': run_kernel,
    'gap': run_gap,
    'tw2': run_tw2,
    'finite': run_finite,
    'converge': run_converge,
    'simulate': run_simulate,
}
TABLE_COMMANDS = {'converge', 'sweep'}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """CLI 실행 후 종료 코드 반환"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    setup_logging(getattr(args, "verbose", False), getattr(args, "quiet", False))
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    try:
        config = resolve_config(
            {
                "threads": args.threads,
                "quad_order": args.quad_order,
                "cutoff": args.cutoff,
                "nystrom_order": args.nystrom_order,
                "gap_order": args.gap_order,
                "output_format": args.format,
            },
            args.config,
        )
        if config.log_file:
            setup_logging(args.verbose, args.quiet, config.log_file)
        fmt = args.format or ("csv" if args.command == "sweep" else config.output_format)

        if args.command == 'sweep':
            record = run_sweep(args, config, parser)
        else:
            record = COMMANDS[args.command](args, config)

        rows_key = "rows" if args.command in TABLE_COMMANDS else None
        if args.output:
            with open(args.output, 'w', encoding='utf-8', newline='') as f:
                emit(record, fmt, f, rows_key)
            logger.info(f"결과 저장: {args.output}")
        else:
            emit(record, fmt, sys.stdout, rows_key)
        return EXIT_OK

    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except ConfigError as e:
        logger.error(e.diagnostic())
        return EXIT_USAGE
    except TacnodeError as e:
        logger.error(e.diagnostic())
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.info("사용자가 중단했습니다.")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.error(f"[cli] 예상하지 못한 오류: {e}", exc_info=True)
        return EXIT_FAILURE


def main():
    """메인 함수"""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
