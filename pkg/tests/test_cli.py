#!/usr/bin/env python3
"""
命令行集成测试
通过 main(argv) 运行子命令，检查标准输出 JSON、退出码与文件管道
"""

import io
import json
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from main import main
from src.core.tensor import Tensor4, diagonal, identity


def run(capsys, *argv):
    """运行一次命令，返回 (退出码, 解析后的标准输出或 None)"""
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write_json(path: Path, payload) -> str:
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv('BIQUAD_SEED', raising=False)


class TestGenerateAndPipe:
    """生成器与管道测试类"""

    def test_identity_to_nucnorm_via_file(self, capsys, tmp_path):
        code, payload = run(capsys, 'gen', 'identity', '--m', '2', '--n', '3')
        assert code == 0
        assert payload['m'] == 2 and payload['n'] == 3
        assert payload['layout'] == 'dense-i1j1i2j2-rowmajor'

        tensor_file = write_json(tmp_path / 'identity.json', payload)
        code, result = run(capsys, 'nucnorm', tensor_file)
        assert code == 0
        assert result['lower'] == result['upper'] == 6.0
        assert result['exact'] is True

    def test_nested_list_input(self, capsys, tmp_path):
        nested = identity(2, 3).entries.tolist()
        code, result = run(capsys, 'nucnorm', write_json(tmp_path / 'nested.json', nested))
        assert code == 0
        assert result['lower'] == result['upper'] == 6.0

        code, _ = run(capsys, 'nucnorm', write_json(tmp_path / 'ragged.json', [[1.0, 2.0], [3.0]]))
        assert code == 1

    def test_stdin_pipeline(self, capsys, monkeypatch):
        _, payload = run(capsys, 'gen', 'identity', '--m', '2', '--n', '2')
        monkeypatch.setattr('sys.stdin', io.StringIO(json.dumps(payload)))
        code, result = run(capsys, 'nucnorm')
        assert code == 0
        assert result['lower'] == 4.0

    def test_rank_one_spectral_norm(self, capsys, tmp_path):
        _, payload = run(capsys, 'gen', 'rank1', '--x', '1,0', '--y', '0,1')
        tensor_file = write_json(tmp_path / 'r1.json', payload)
        code, result = run(capsys, 'snorm', tensor_file, '--starts', '4')
        assert code == 0
        assert result['lower'] == pytest.approx(1.0)
        assert result['upper'] == pytest.approx(1.0)

    def test_generation_is_deterministic(self, capsys):
        _, first = run(capsys, 'gen', 'random', '--m', '2', '--n', '3', '--seed', '3')
        _, second = run(capsys, 'gen', 'random', '--m', '2', '--n', '3', '--seed', '3')
        _, other = run(capsys, 'gen', 'random', '--m', '2', '--n', '3', '--seed', '4')
        assert first == second
        assert first != other

    def test_third_order_contract(self, capsys, tmp_path):
        _, third = run(capsys, 'gen', 'third', '--p', '2', '--m', '2', '--n', '3')
        assert third['p'] == 2
        code, result = run(capsys, 'contract', write_json(tmp_path / 't.json', third))
        assert code == 0
        assert (result['m'], result['n']) == (2, 3)

    def test_elastic_ellipticity(self, capsys, tmp_path):
        _, payload = run(capsys, 'gen', 'elastic', '--lam', '1', '--mu', '1')
        code, result = run(capsys, 'ellipticity', write_json(tmp_path / 'c.json', payload), '--starts', '4')
        assert code == 0
        assert result['status'] in ('certified', 'unverified')
        assert result['min_estimate'] == pytest.approx(1.0, abs=1e-8)

    def test_elastic_requires_constants(self, capsys):
        code, payload = run(capsys, 'gen', 'elastic')
        assert code == 1
        assert payload is None


class TestCommands:
    """单张量与双张量命令测试类"""

    def setup_method(self):
        self.identity_payload = identity(2, 2).to_dict()

    def test_quartic(self, capsys, tmp_path):
        tensor_file = write_json(tmp_path / 'i.json', self.identity_payload)
        code, result = run(capsys, 'quartic', tensor_file, '--x', '1,0', '--y', '[0, 1]')
        assert code == 0
        assert result['value'] == pytest.approx(1.0)

    def test_meig_smallest(self, capsys, tmp_path):
        tensor_file = write_json(tmp_path / 'd.json', diagonal(2, 2, [[5.0, 1.0], [1.0, 2.0]]).to_dict())
        code, result = run(capsys, 'meig', tensor_file, '--smallest', '--starts', '4')
        assert code == 0
        assert result['which'] == 'smallest'
        assert result['lambda'] == pytest.approx(1.0)

    def test_invert_identity(self, capsys, tmp_path):
        code, result = run(capsys, 'invert', write_json(tmp_path / 'i.json', self.identity_payload))
        assert code == 0
        assert result['entries'] == pytest.approx(self.identity_payload['entries'])

    def test_invert_singular_is_numerical_error(self, capsys, tmp_path):
        singular = diagonal(2, 2, [[1.0, 0.0], [1.0, 1.0]]).to_dict()
        code, result = run(capsys, 'invert', write_json(tmp_path / 's.json', singular))
        assert code == 2
        assert result is None

    def test_product_flag(self, capsys, tmp_path):
        left = write_json(tmp_path / 'a.json', self.identity_payload)
        right = write_json(tmp_path / 'b.json', diagonal(2, 2, [[2.0, 3.0], [4.0, 5.0]]).to_dict())
        code, result = run(capsys, 'product', left, right)
        assert code == 0
        assert result['biquadratic'] is True
        assert result['entries'][0] == 2.0

    def test_decomp(self, capsys, tmp_path):
        code, result = run(capsys, 'decomp', write_json(tmp_path / 'i.json', self.identity_payload))
        assert code == 0
        assert result['reconstruction_error'] <= 1e-10
        assert result['tucker_ranks'] == [2, 2]
        assert result['factor_ranks'] == [2, 2]
        assert len(result['terms']) <= result['term_bound']

    def test_tucker_hosvd(self, capsys, tmp_path):
        _, payload = run(capsys, 'gen', 'random', '--m', '3', '--n', '2', '--seed', '1')
        code, result = run(capsys, 'tucker', write_json(tmp_path / 'r.json', payload), '--hosvd', '3', '2')
        assert code == 0
        assert result['kind'] == 'orthonormal'
        assert result['exact'] is True

    def test_tucker_independent(self, capsys, tmp_path):
        _, payload = run(capsys, 'gen', 'random', '--m', '2', '--n', '2', '--seed', '2')
        tensor_file = write_json(tmp_path / 'r.json', payload)
        p_file = write_json(tmp_path / 'P.json', [[1.0, 1.0], [0.0, 1.0]])
        q_file = write_json(tmp_path / 'Q.json', {'entries': [[2.0, 0.0], [0.0, 1.0]]})
        code, result = run(capsys, 'tucker', tensor_file, '--independent', p_file, q_file)
        assert code == 0
        assert result['kind'] == 'independent'
        assert result['br_preservation']['satisfied'] is True

    def test_psd(self, capsys, tmp_path):
        negative = (-identity(2, 2)).to_dict()
        code, result = run(capsys, 'psd', write_json(tmp_path / 'n.json', negative), '--starts', '4')
        assert code == 0
        assert result['tag'] == 'NotPSD'
        assert result['witness']['value'] < 0


class TestValidation:
    """校验与错误退出码测试类"""

    def _asymmetric(self):
        a = np.zeros((1, 2, 1, 2))
        a[0, 0, 0, 1] = 4.0
        return Tensor4(a).to_dict()

    def test_validate_violation_exit_code(self, capsys, tmp_path):
        code, result = run(capsys, 'validate', write_json(tmp_path / 'bad.json', self._asymmetric()))
        assert code == 1
        assert result is None

    def test_validate_loose_tolerance(self, capsys, tmp_path):
        code, result = run(capsys, 'validate', write_json(tmp_path / 'bad.json', self._asymmetric()),
                           '--tol', '2')
        assert code == 0
        assert result['max_deviation'] == 4.0
        assert result['entries'] == [0.0, 2.0, 2.0, 0.0]

    def test_symmetrize(self, capsys, tmp_path):
        code, result = run(capsys, 'symmetrize', write_json(tmp_path / 'bad.json', self._asymmetric()))
        assert code == 0
        assert result['entries'] == [0.0, 2.0, 2.0, 0.0]

    def test_bad_json(self, capsys, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{not json', encoding='utf-8')
        code, _ = run(capsys, 'nucnorm', str(path))
        assert code == 1

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, 'nucnorm', str(tmp_path / 'absent.json'))
        assert code == 1

    def test_unknown_command(self, capsys):
        code, _ = run(capsys, 'frobnicate')
        assert code == 1

    def test_no_command(self, capsys):
        code, _ = run(capsys)
        assert code == 1

    def test_zero_starts_is_input_error(self, capsys, tmp_path):
        tensor_file = write_json(tmp_path / 'i.json', identity(2, 2).to_dict())
        assert main(['meig', tensor_file, '--starts', '0']) == 1
        captured = capsys.readouterr()
        assert captured.out == ''
        assert 'starts' in captured.err

    def test_negative_seed_is_input_error(self, capsys):
        code, result = run(capsys, 'gen', 'random', '--seed', '-1')
        assert code == 1
        assert result is None

    def test_unexpected_exception_is_numerical_error(self, capsys, monkeypatch):
        def broken(self, command, inputs=(), **params):
            raise AttributeError("'EigenDecomposition' object has no attribute 'lam'")

        monkeypatch.setattr('src.core.orchestrator.BiquadraticOrchestrator.run', broken)
        assert main(['gen', 'identity']) == 2
        captured = capsys.readouterr()
        assert captured.out == ''
        assert 'AttributeError' in captured.err


class TestReportsAndSeeds:
    """运行报告与种子测试类"""

    def test_report_envelope(self, capsys):
        code, report = run(capsys, 'gen', 'identity', '--report', '--seed', '9')
        assert code == 0
        for key in ('command', 'inputs', 'seed', 'outputs', 'timings', 'tool_version'):
            assert key in report
        assert report['seed'] == 9
        assert 'total' in report['timings']

    def test_global_options_before_command(self, capsys):
        code, report = run(capsys, '--seed', '4', '--report', 'gen', 'identity')
        assert code == 0
        assert report['seed'] == 4

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv('BIQUAD_SEED', '5')
        _, report = run(capsys, 'gen', 'identity', '--report')
        assert report['seed'] == 5
        _, report = run(capsys, 'gen', 'identity', '--report', '--seed', '9')
        assert report['seed'] == 9

    def test_report_is_accepted_as_input(self, capsys, tmp_path):
        _, report = run(capsys, 'gen', 'identity', '--m', '2', '--n', '2', '--report')
        code, result = run(capsys, 'nucnorm', write_json(tmp_path / 'report.json', report))
        assert code == 0
        assert result['lower'] == 4.0

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / 'out' / 'identity.json'
        _, payload = run(capsys, 'gen', 'identity', '--out', str(out))
        assert json.loads(out.read_text(encoding='utf-8')) == payload


class TestVerify:
    """验证组合测试类"""

    def test_random_battery(self, capsys):
        code, result = run(capsys, 'verify', '--random', '4', '--m', '2', '--n', '2',
                           '--seed', '7', '--starts', '4')
        assert code == 0
        assert result['all_sound'] is True
        assert result['summary']['total_pairs'] == 4
        assert result['summary']['inverse_checked'] >= 2

    def test_pair(self, capsys, tmp_path):
        left = write_json(tmp_path / 'a.json', identity(2, 2).to_dict())
        right = write_json(tmp_path / 'b.json', diagonal(2, 2, [[1.0, -2.0], [0.5, 3.0]]).to_dict())
        code, result = run(capsys, 'verify', '--pair', left, right, '--starts', '4')
        assert code == 0
        assert result['pairs'][0]['all_sound'] is True

    def test_same_seed_gives_identical_bytes(self, capsys):
        argv = ['verify', '--random', '4', '--seed', '7', '--starts', '4']
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second
        assert json.loads(first)['summary']['total_pairs'] == 4

    def test_tucker_preservation_checks_run(self, capsys):
        code, result = run(capsys, 'verify', '--random', '2', '--m', '3', '--n', '2',
                           '--seed', '3', '--starts', '8')
        assert code == 0
        for record in result['pairs']:
            names = [c['name'] for c in record['structural']]
            assert 'br_preservation' in names
            assert 'hosvd_core_m_eigenpairs' in names
            assert record['structural_sound'] is True
        assert result['summary']['structural_failures'] == []

    def test_structural_failure_is_numerical_error(self, capsys, monkeypatch):
        monkeypatch.setattr('src.core.orchestrator.PRESERVATION_TOL', -1.0)
        code, result = run(capsys, 'verify', '--random', '2', '--seed', '7', '--starts', '4')
        assert code == 2
        assert result['summary']['structural_failures'] == [0, 1]
        assert result['all_sound'] is False
