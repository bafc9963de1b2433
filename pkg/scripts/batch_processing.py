#!/usr/bin/env python3
"""
批量处理脚本
对目录或清单中的多个张量文件执行同一命令并生成汇总报告
"""

import argparse
import csv
import json
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.config_loader import load_config, resolve_seed  # noqa: E402
from src.core.errors import BiquadError  # noqa: E402
from src.core.orchestrator import BiquadraticOrchestrator  # noqa: E402
from src.core.tensor_io import read_payload, tensor_from_payload  # noqa: E402

BATCH_COMMANDS = ('snorm', 'nucnorm', 'decomp', 'psd', 'ellipticity', 'invert', 'crosscheck')

logger = logging.getLogger(__name__)


def setup_logging(log_file: Optional[str] = None) -> logging.Logger:
    """设置日志"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    return logging.getLogger(__name__)


def collect_tensor_files(path: str) -> List[Path]:
    """目录 -> 其中全部 *.json；.txt 清单 -> 每行一个路径；否则视为单个文件"""
    source = Path(path)
    if source.is_dir():
        return sorted(source.glob('*.json'))
    if source.suffix.lower() == '.txt':
        with open(source, 'r', encoding='utf-8') as f:
            return [Path(line.strip()) for line in f if line.strip() and not line.startswith('#')]
    return [source]


def process_batch(orchestrator: BiquadraticOrchestrator, files: List[Path], command: str) -> List[Dict[str, Any]]:
    """逐个文件执行命令，单个文件失败不影响其余文件"""
    results = []
    total = len(files)
    logger.info(f"🔄 开始批量处理 {total} 个张量文件 (命令: {command})")
    start_time = time.time()

    for i, file_path in enumerate(files, 1):
        logger.info(f"📝 处理进度: {i}/{total} - {file_path.name}")
        try:
            tensor = tensor_from_payload(read_payload(str(file_path)))
            if command == 'crosscheck':
                result = {
                    'command': command,
                    'success': True,
                    'outputs': orchestrator.cross_check(orchestrator.ensure_biquadratic(tensor)),
                    'timings': {},
                }
            else:
                result = orchestrator.run(command, [str(file_path)], tensor=tensor)
        except BiquadError as e:
            result = {'command': command, 'success': False, 'error': str(e),
                      'error_type': type(e).__name__}
            logger.error(f"❌ 处理失败: {file_path} - {e}")
        result['file'] = str(file_path)
        result['batch_index'] = i
        results.append(result)

    logger.info(f"✅ 批量处理完成! 总耗时: {time.time() - start_time:.2f}s")
    return results


def flatten_row(result: Dict[str, Any]) -> Dict[str, Any]:
    """CSV 行：只保留标量输出字段"""
    row = {
        'file': result.get('file'),
        'success': result.get('success'),
        'error': result.get('error', ''),
        'total_ms': result.get('timings', {}).get('total', ''),
    }
    for key, value in (result.get('outputs') or {}).items():
        if isinstance(value, (int, float, str, bool)):
            row[key] = value
    return row


def save_results(results: List[Dict[str, Any]], output_format: str, output_path: Optional[str] = None) -> str:
    """保存处理结果"""
    if not output_path:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        output_path = f"results/batch_results_{timestamp}.{output_format}"
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)

    if output_format == 'json':
        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(results, f, indent=2, ensure_ascii=False)
    elif output_format == 'csv':
        rows = [flatten_row(r) for r in results]
        fieldnames: List[str] = []
        for row in rows:
            fieldnames.extend(k for k in row if k not in fieldnames)
        with open(output_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)
    else:
        raise ValueError(f"不支持的导出格式: {output_format}")

    logger.info(f"💾 结果已保存到: {output_path}")
    return output_path


def generate_report(results: List[Dict[str, Any]]) -> Dict[str, Any]:
    """生成批量处理报告"""
    successful = [r for r in results if r.get('success')]
    failed = [r for r in results if not r.get('success')]
    times = [r['timings']['total'] for r in successful if 'total' in r.get('timings', {})]

    error_counts: Dict[str, int] = {}
    for result in failed:
        error_type = result.get('error_type', 'Unknown')
        error_counts[error_type] = error_counts.get(error_type, 0) + 1

    return {
        'summary': {
            'total_files': len(results),
            'successful': len(successful),
            'failed': len(failed),
            'success_rate': len(successful) / len(results) * 100 if results else 0.0,
            'average_ms': sum(times) / len(times) if times else 0.0,
        },
        'failure_analysis': [{'error_type': k, 'count': v} for k, v in sorted(error_counts.items())],
        'timestamp': datetime.now().isoformat(),
    }


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    parser = argparse.ArgumentParser(description='批量处理张量文件')
    parser.add_argument('--input', '-i', required=True, help='输入目录、.txt 清单或单个 JSON 文件')
    parser.add_argument('--command', choices=BATCH_COMMANDS, default='nucnorm', help='对每个张量执行的命令')
    parser.add_argument('--output', '-o', help='输出文件路径（可选）')
    parser.add_argument('--format', '-f', choices=['json', 'csv'], default='json', help='输出格式')
    parser.add_argument('--max_files', '-m', type=int, help='最大处理文件数（用于测试）')
    parser.add_argument('--seed', type=int, help='随机种子')
    parser.add_argument('--config', default=None, help='配置文件路径')
    parser.add_argument('--log_file', help='日志文件路径')
    args = parser.parse_args(argv)

    global logger
    logger = setup_logging(args.log_file)

    if not Path(args.input).exists():
        logger.error(f"❌ 输入不存在: {args.input}")
        return 1

    config = load_config(args.config or str(Path(__file__).parent.parent / 'config' / 'config.yaml'))
    orchestrator = BiquadraticOrchestrator(config, resolve_seed(config, args.seed))
    logger.info("✅ 系统初始化成功")

    files = collect_tensor_files(args.input)
    if not files:
        logger.error("❌ 没有找到张量文件")
        return 1
    if args.max_files and args.max_files < len(files):
        files = files[:args.max_files]
        logger.info(f"🔧 限制处理前 {args.max_files} 个文件")

    results = process_batch(orchestrator, files, args.command)
    report = generate_report(results)
    output_file = save_results(results, args.format, args.output)

    summary = report['summary']
    logger.info(f"""
🎉 批量处理完成!
📊 处理统计:
   • 文件总数: {summary['total_files']}
   • 成功处理: {summary['successful']}
   • 处理失败: {summary['failed']}
   • 成功率: {summary['success_rate']:.1f}%
   • 平均耗时: {summary['average_ms']:.1f} ms
💾 结果文件: {output_file}
    """)
    return 0 if not report['failure_analysis'] else 2


if __name__ == "__main__":
    sys.exit(main())
