#!/usr/bin/env python3
"""
批量处理脚本测试
"""

import csv
import json
import sys
from pathlib import Path

import pytest

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from scripts.batch_processing import (
    collect_tensor_files,
    generate_report,
    main,
    process_batch,
    save_results,
)
from src.core.orchestrator import BiquadraticOrchestrator
from src.core.tensor import diagonal, identity


class TestBatchProcessing:
    """批量处理测试类"""

    def setup_method(self):
        self.orchestrator = BiquadraticOrchestrator({'solver': {'starts': 4, 'seed': 0}})

    def _write_inputs(self, directory: Path):
        directory.mkdir(parents=True, exist_ok=True)
        (directory / 'a_identity.json').write_text(json.dumps(identity(2, 2).to_dict()), encoding='utf-8')
        singular = diagonal(2, 2, [[1.0, 0.0], [1.0, 1.0]])
        (directory / 'b_singular.json').write_text(json.dumps(singular.to_dict()), encoding='utf-8')
        return directory

    def test_collect_from_directory_and_list(self, tmp_path):
        directory = self._write_inputs(tmp_path / 'tensors')
        files = collect_tensor_files(str(directory))
        assert [f.name for f in files] == ['a_identity.json', 'b_singular.json']

        listing = tmp_path / 'files.txt'
        listing.write_text(f"# 清单\n{files[1]}\n\n", encoding='utf-8')
        assert collect_tensor_files(str(listing)) == [files[1]]

    def test_failures_are_isolated(self, tmp_path):
        files = collect_tensor_files(str(self._write_inputs(tmp_path / 'tensors')))
        results = process_batch(self.orchestrator, files, 'invert')
        assert [r['success'] for r in results] == [True, False]
        assert results[1]['error_type'] == 'SingularFlattening'

        report = generate_report(results)
        assert report['summary']['successful'] == 1
        assert report['failure_analysis'] == [{'error_type': 'SingularFlattening', 'count': 1}]

    def test_unreadable_file_is_reported(self, tmp_path):
        broken = tmp_path / 'broken.json'
        broken.write_text('{', encoding='utf-8')
        results = process_batch(self.orchestrator, [broken], 'nucnorm')
        assert results[0]['success'] is False
        assert results[0]['file'] == str(broken)

    def test_csv_export(self, tmp_path):
        files = collect_tensor_files(str(self._write_inputs(tmp_path / 'tensors')))
        results = process_batch(self.orchestrator, files, 'nucnorm')
        path = save_results(results, 'csv', str(tmp_path / 'out' / 'rows.csv'))
        with open(path, 'r', encoding='utf-8', newline='') as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 2
        assert float(rows[0]['lower']) == 4.0
        assert rows[0]['upper_source'] == 'diagonal-exact'

    def test_main_writes_json(self, tmp_path, monkeypatch):
        monkeypatch.delenv('BIQUAD_SEED', raising=False)
        directory = tmp_path / 'tensors'
        directory.mkdir()
        (directory / 'identity.json').write_text(json.dumps(identity(2, 3).to_dict()), encoding='utf-8')
        output = tmp_path / 'results.json'
        code = main(['--input', str(directory), '--command', 'snorm', '--output', str(output),
                     '--config', str(tmp_path / 'config.yaml')])
        assert code == 0
        results = json.loads(output.read_text(encoding='utf-8'))
        assert results[0]['outputs']['upper'] == pytest.approx(1.0)

    def test_main_missing_input(self, tmp_path):
        assert main(['--input', str(tmp_path / 'absent')]) == 1
