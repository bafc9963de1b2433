#!/usr/bin/env python3
"""
双二次张量工具包 - 主入口文件
提供命令行界面：标准输出只写 JSON，日志与诊断写标准错误
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config.config_loader import load_config, resolve_seed, validate_config  # noqa: E402
from src.core import __version__  # noqa: E402
from src.core.errors import BiquadError, InvalidInputError  # noqa: E402
from src.core.orchestrator import (  # noqa: E402
    EXIT_INPUT,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VIOLATION,
    BiquadraticOrchestrator,
    exit_code_for,
)
from src.core.tensor_io import (  # noqa: E402
    STDIN,
    matrix_from_payload,
    parse_vector,
    read_payload,
    tensor_from_payload,
    third_order_from_payload,
    write_payload,
)

DEFAULT_CONFIG_PATH = str(project_root / "config" / "config.yaml")

SINGLE_TENSOR_COMMANDS = ('validate', 'symmetrize', 'snorm', 'nucnorm', 'decomp',
                          'invert', 'psd', 'ellipticity')


class BiquadraticToolkit:
    """双二次张量工具包 - 主控制器"""

    def __init__(self, config_path: Optional[str] = None, seed: Optional[int] = None,
                 verbose: bool = False):
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.config = load_config(self.config_path)
        self.logger = self._setup_logging(verbose)
        self._initialize_system(seed)

    def _setup_logging(self, verbose: bool) -> logging.Logger:
        """设置日志系统（标准错误 + 可选日志文件）"""
        system = self.config.get('system', {})
        level = logging.DEBUG if verbose else getattr(logging, str(system.get('log_level', 'INFO')).upper(),
                                                     logging.INFO)
        handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
        if system.get('log_file'):
            log_file = Path(system['log_file'])
            log_file.parent.mkdir(parents=True, exist_ok=True)
            handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
        logging.basicConfig(
            level=level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers,
            force=True,
        )
        return logging.getLogger(__name__)

    def _initialize_system(self, seed: Optional[int]):
        validation_result = validate_config(self.config)
        for warning in validation_result['warnings']:
            self.logger.warning(f"⚠️ {warning}")
        if not validation_result['valid']:
            self.logger.error(f"❌ 配置验证失败: {validation_result['errors']}")
            raise InvalidInputError(f"配置文件验证失败: {validation_result['errors']}")

        self.seed = resolve_seed(self.config, seed)
        self.orchestrator = BiquadraticOrchestrator(self.config, self.seed)
        self.logger.debug(f"✅ 系统初始化完成 (版本 {__version__}, 种子 {self.seed})")

    # ==================== 参数到命令的映射 ====================

    def execute(self, args: argparse.Namespace) -> Dict[str, Any]:
        command = args.command
        tol = getattr(args, 'tol', None)
        starts = getattr(args, 'starts', None)
        orchestrator = self.orchestrator.with_overrides(
            starts=starts, tol=None if command == 'validate' else tol
        )
        inputs, params = self._collect_params(args)
        if command == 'validate':
            params['tol'] = tol
        return orchestrator.run(command, inputs, **params)

    def _collect_params(self, args: argparse.Namespace):
        command = args.command
        if command in SINGLE_TENSOR_COMMANDS or command in ('quartic', 'meig', 'tucker'):
            source = args.input or STDIN
            params: Dict[str, Any] = {'tensor': tensor_from_payload(read_payload(source))}
            inputs = [source]
            if command == 'quartic':
                params.update(x=parse_vector(args.x), y=parse_vector(args.y))
            elif command == 'meig':
                params['smallest'] = bool(args.smallest)
            elif command == 'tucker':
                if args.hosvd:
                    params['dims'] = args.hosvd
                else:
                    p_file, q_file = args.independent
                    params['P'] = matrix_from_payload(read_payload(p_file))
                    params['Q'] = matrix_from_payload(read_payload(q_file))
                    inputs += [p_file, q_file]
            return inputs, params

        if command == 'contract':
            source = args.input or STDIN
            return [source], {'third': third_order_from_payload(read_payload(source))}

        if command == 'product':
            return [args.left, args.right], {
                'tensor': tensor_from_payload(read_payload(args.left)),
                'other': tensor_from_payload(read_payload(args.right)),
            }

        if command == 'verify':
            if args.pair:
                left, right = args.pair
                pair = (tensor_from_payload(read_payload(left)), tensor_from_payload(read_payload(right)))
                return [left, right], {'pairs': [pair]}
            return [], {'count': args.random, 'm': args.m, 'n': args.n}

        if command == 'gen':
            params = {'kind': args.kind, 'm': args.m, 'n': args.n, 'p': args.p,
                      'lam': args.lam, 'mu': args.mu, 'young': args.young, 'poisson': args.poisson}
            if args.values:
                params['values'] = parse_vector(args.values)
            if args.x:
                params['x'] = parse_vector(args.x)
            if args.y:
                params['y'] = parse_vector(args.y)
            return [], params

        raise InvalidInputError(f"未知命令: {command}")


def _common_options(suppress: bool) -> argparse.ArgumentParser:
    """全局选项既可写在子命令前也可写在子命令后"""
    default = argparse.SUPPRESS if suppress else None
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=default, help='随机种子 (优先于 BIQUAD_SEED 与配置文件)')
    common.add_argument('--tol', type=float, default=default,
                        help='数值容差: validate 的对称性容差，其余命令的求解器收敛容差')
    common.add_argument('--starts', type=int, default=default, help='M-特征值搜索的起点数')
    common.add_argument('--out', default=default, help='把 JSON 结果同时写入文件')
    common.add_argument('--report', action='store_true', default=default,
                        help='输出完整运行报告 (含输入、种子、耗时、版本)')
    common.add_argument('--config', '-c', default=default, help='配置文件路径')
    common.add_argument('--verbose', '-v', action='store_true', default=default, help='详细日志 (DEBUG)')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='biquad',
        description='双二次张量工具包: 对称化、M-特征值、范数界、秩一分解、Tucker 分解、张量积与逆',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[_common_options(suppress=False)],
        epilog="""
使用示例:
  # 生成单位张量并计算核范数区间
  python main.py gen identity --m 2 --n 3 | python main.py nucnorm

  # 最大 / 最小 M-特征值
  python main.py meig tensor.json --largest --starts 64

  # HOSVD 与独立因子 Tucker 分解
  python main.py tucker tensor.json --hosvd 2 2
  python main.py tucker tensor.json --independent P.json Q.json

  # 随机不等式验证组合
  python main.py verify --random 50 --m 2 --n 2 --seed 7
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    common = _common_options(suppress=True)
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')

    help_texts = {
        'validate': '校验双二次对称性并做轨道平均',
        'symmetrize': '四项平均对称化',
        'snorm': '谱范数区间',
        'nucnorm': '核范数区间',
        'decomp': '双二次秩一分解',
        'invert': '张量逆',
        'psd': '半正定分类',
        'ellipticity': '强椭圆性判定',
    }
    for name, text in help_texts.items():
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('input', nargs='?', help='张量 JSON 文件 (缺省读标准输入)')

    p = sub.add_parser('quartic', parents=[common], help='计算四次型 <A, x∘y∘x∘y>')
    p.add_argument('input', nargs='?')
    p.add_argument('--x', required=True, help='x 向量, 如 "1,0"')
    p.add_argument('--y', required=True, help='y 向量')

    p = sub.add_parser('meig', parents=[common], help='最大或最小 M-特征值')
    p.add_argument('input', nargs='?')
    which = p.add_mutually_exclusive_group()
    which.add_argument('--largest', action='store_true', help='最大 M-特征值 (默认)')
    which.add_argument('--smallest', action='store_true', help='最小 M-特征值')

    p = sub.add_parser('tucker', parents=[common], help='双二次 Tucker 分解')
    p.add_argument('input', nargs='?')
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument('--hosvd', nargs=2, type=int, metavar=('D1', 'D2'))
    mode.add_argument('--independent', nargs=2, metavar=('P_JSON', 'Q_JSON'))

    p = sub.add_parser('product', parents=[common], help='张量积 AB')
    p.add_argument('left', help="左因子 JSON ('-' 表示标准输入)")
    p.add_argument('right', help='右因子 JSON')

    p = sub.add_parser('contract', parents=[common], help='三阶张量自缩并为半正定双二次张量')
    p.add_argument('input', nargs='?', help='三阶张量 JSON')

    p = sub.add_parser('verify', parents=[common], help='不等式与结构性质验证组合')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--pair', nargs=2, metavar=('A_JSON', 'B_JSON'))
    source.add_argument('--random', type=int, metavar='N')
    p.add_argument('--m', type=int, default=2)
    p.add_argument('--n', type=int, default=2)

    p = sub.add_parser('gen', parents=[common], help='生成张量')
    p.add_argument('kind', choices=['identity', 'diagonal', 'rank1', 'random', 'gram',
                                    'third', 'elastic', 'kron'])
    p.add_argument('--m', type=int, default=2)
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--p', type=int, default=2, help='三阶张量第一维 (gram / third)')
    p.add_argument('--values', help='对角元 (行优先, 逗号分隔)')
    p.add_argument('--x', help='rank1 的 x 向量')
    p.add_argument('--y', help='rank1 的 y 向量')
    p.add_argument('--lam', type=float, help='Lamé 常数 λ')
    p.add_argument('--mu', type=float, help='剪切模量 μ')
    p.add_argument('--young', type=float, help='杨氏模量 E')
    p.add_argument('--poisson', type=float, help='泊松比 ν')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数 - 命令行入口点，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INPUT

    try:
        toolkit = BiquadraticToolkit(args.config, args.seed, bool(args.verbose))
        report = toolkit.execute(args)
    except BiquadError as e:
        logging.getLogger(__name__).error(f"❌ {e}")
        return exit_code_for(e)
    except Exception as e:
        logging.getLogger(__name__).exception(f"❌ 内部错误 ({type(e).__name__}): {e}")
        return EXIT_NUMERICAL

    if not report['success']:
        return report['exit_code']

    write_payload(report if args.report else report['outputs'], args.out)

    if args.command == 'verify':
        summary = report['outputs']['summary']
        if summary['structural_failures']:
            return EXIT_NUMERICAL
        if summary['violations']:
            return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
