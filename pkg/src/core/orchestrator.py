#!/usr/bin/env python3
"""
流程协调器 - 命令执行控制器
把各数值模块组合成命令，记录各阶段耗时，并生成统一的运行报告
"""

import logging
import time
from contextlib import contextmanager
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.algebra.inequalities import InequalityCheck, verify_inequalities
from src.algebra.product import inverse, product
from src.core import __version__
from src.core.errors import BiquadError, InvalidInputError
from src.core.settings import ToleranceConfig
from src.core.tensor import (
    BiquadraticTensor,
    Tensor4,
    ThirdOrderTensor,
    contract_third_order,
    diagonal,
    elasticity_tensor,
    frobenius,
    identity,
    kronecker,
    lame_from_technical,
    max_symmetry_deviation,
    quartic_form,
    random_biquadratic,
    rank_one,
    symmetrize,
    validate,
)
from src.decomposition.rank_one import (
    bq_rank_one_decompose,
    factor_matrices,
    term_bound,
    tucker_ranks,
)
from src.decomposition.tucker import TuckerForm, br_preservation_check, hosvd, independent_core
from src.eigen.m_eigen import (
    SolverConfig,
    largest_m_eigenvalue,
    m_residual,
    psd_classify,
    smallest_m_eigenvalue,
    strong_ellipticity,
)
from src.kernels.dense import matrix_rank
from src.norms.bounds import nuclear_norm_interval, spectral_norm_interval
from src.oracle.brute_force import GridSpec, grid_tolerance, quartic_extrema_grid

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3

RECONSTRUCTION_TOL = 1e-8
RANK_CHECK_TOL = 1e-8
PRESERVATION_TOL = 1e-6


def exit_code_for(error: BaseException) -> int:
    """输入错误 -> 1，数值错误（及其余内部错误） -> 2"""
    return EXIT_INPUT if isinstance(error, InvalidInputError) else EXIT_NUMERICAL


class BiquadraticOrchestrator:
    """双二次张量工具包的命令协调器"""

    def __init__(self, config: Dict[str, Any], seed: Optional[int] = None):
        self.config = config
        self.logger = logging.getLogger(__name__)
        solver_section = dict(config.get('solver', {}))
        if seed is not None:
            solver_section['seed'] = seed
        try:
            self.solver = SolverConfig(**solver_section)
            self.tolerances = ToleranceConfig(**config.get('tolerances', {}))
            self.grid = GridSpec(**config.get('oracle', {}))
        except ValidationError as e:
            fields = ", ".join(".".join(str(p) for p in err["loc"]) for err in e.errors())
            raise InvalidInputError(f"配置参数无效 ({fields}): {e}") from e
        self.commands: Dict[str, Callable[..., Dict[str, Any]]] = self._initialize_commands()
        self.logger.debug(f"求解器配置: {self.solver.model_dump()}")

    @property
    def seed(self) -> int:
        return self.solver.seed

    def with_overrides(self, **solver_overrides: Any) -> "BiquadraticOrchestrator":
        """返回覆盖部分求解器参数后的新协调器（--starts / --tol）"""
        overrides = {k: v for k, v in solver_overrides.items() if v is not None}
        if not overrides:
            return self
        config = dict(self.config)
        config['solver'] = {**self.solver.model_dump(), **overrides}
        return BiquadraticOrchestrator(config)

    def _initialize_commands(self) -> Dict[str, Callable[..., Dict[str, Any]]]:
        return {
            'validate': self._validate,
            'symmetrize': self._symmetrize,
            'quartic': self._quartic,
            'meig': self._meig,
            'snorm': self._snorm,
            'nucnorm': self._nucnorm,
            'decomp': self._decomp,
            'tucker': self._tucker,
            'product': self._product,
            'invert': self._invert,
            'psd': self._psd,
            'contract': self._contract,
            'ellipticity': self._ellipticity,
            'verify': self._verify,
            'gen': self._gen,
        }

    def run(self, command: str, inputs: Sequence[str] = (), **params: Any) -> Dict[str, Any]:
        """执行命令并返回 RunReport；失败时报告 error / error_step 而不抛出"""
        start_time = time.perf_counter()
        timings: Dict[str, float] = {}

        try:
            if command not in self.commands:
                raise InvalidInputError(f"未知命令: {command}")
            self.logger.info(f"🔍 开始执行命令: {command}")
            outputs = self.commands[command](timings=timings, **params)
            timings['total'] = (time.perf_counter() - start_time) * 1000.0
            self.logger.info(f"🎉 命令完成: {command} (耗时 {timings['total']:.1f} ms)")
            return {
                'command': command,
                'inputs': list(inputs),
                'seed': self.seed,
                'outputs': outputs,
                'timings': timings,
                'tool_version': __version__,
                'success': True,
            }

        except BiquadError as e:
            self.logger.error(f"❌ 命令 {command} 失败: {e}")
            return {
                'command': command,
                'inputs': list(inputs),
                'seed': self.seed,
                'outputs': None,
                'timings': timings,
                'tool_version': __version__,
                'success': False,
                'error': str(e),
                'error_type': type(e).__name__,
                'error_step': self._identify_error_step(timings),
                'exit_code': exit_code_for(e),
            }

    @contextmanager
    def _phase(self, timings: Dict[str, float], name: str):
        timings[name] = 0.0
        start = time.perf_counter()
        try:
            yield
        finally:
            timings[name] = (time.perf_counter() - start) * 1000.0

    @staticmethod
    def _identify_error_step(timings: Dict[str, float]) -> str:
        if not timings:
            return "initialization"
        return list(timings.keys())[-1]

    def ensure_biquadratic(self, T: Tensor4) -> BiquadraticTensor:
        return validate(T, self.tolerances.symmetry)

    # ==================== 单张量命令 ====================

    def _validate(self, timings, tensor: Tensor4, tol: Optional[float] = None) -> Dict[str, Any]:
        with self._phase(timings, 'validate'):
            deviation = max_symmetry_deviation(tensor)
            result = validate(tensor, self.tolerances.symmetry if tol is None else tol)
        return {**result.to_dict(), 'max_deviation': deviation}

    def _symmetrize(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        with self._phase(timings, 'symmetrize'):
            result = symmetrize(tensor)
        return result.to_dict()

    def _quartic(self, timings, tensor: Tensor4, x: np.ndarray, y: np.ndarray) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'quartic'):
            value = quartic_form(A, x, y)
        return {'value': value, 'source': 'quartic-form'}

    def _meig(self, timings, tensor: Tensor4, smallest: bool = False) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'm_eigen_search'):
            pair = smallest_m_eigenvalue(A, self.solver) if smallest else largest_m_eigenvalue(A, self.solver)
        return {**pair.to_dict(), 'which': 'smallest' if smallest else 'largest'}

    def _snorm(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'spectral_interval'):
            interval = spectral_norm_interval(A, self.solver)
        return interval.to_dict()

    def _nucnorm(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'nuclear_interval'):
            interval = nuclear_norm_interval(A, self.tolerances.drop)
        return {**interval.to_dict(), 'ratio': interval.ratio}

    def _decomp(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'decompose'):
            decomposition = bq_rank_one_decompose(A, self.tolerances.drop)
        with self._phase(timings, 'ranks'):
            X, Y = factor_matrices(decomposition)
            r1, r2 = tucker_ranks(A, self.tolerances.rank)
        return {
            **decomposition.to_dict(),
            'term_bound': term_bound(A.m, A.n),
            'tucker_ranks': [r1, r2],
            'factor_ranks': [matrix_rank(X, RANK_CHECK_TOL) if X.size else 0,
                             matrix_rank(Y, RANK_CHECK_TOL) if Y.size else 0],
        }

    def _tucker(self, timings, tensor: Tensor4, dims: Optional[Sequence[int]] = None,
                P: Optional[np.ndarray] = None, Q: Optional[np.ndarray] = None) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        if dims is not None:
            with self._phase(timings, 'hosvd'):
                form = hosvd(A, int(dims[0]), int(dims[1]))
            return form.to_dict()
        if P is None or Q is None:
            raise InvalidInputError("tucker 需要 --hosvd d1 d2 或 --independent P.json Q.json")
        with self._phase(timings, 'independent_core'):
            form = independent_core(A, P, Q)
        with self._phase(timings, 'br_preservation'):
            report = br_preservation_check(A, P, Q, RECONSTRUCTION_TOL, self.tolerances.drop)
        return {**form.to_dict(), 'br_preservation': report.to_dict()}

    def _invert(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'inverse'):
            result = inverse(A, self.tolerances.inverse, self.tolerances.condition_limit)
        return result.to_dict()

    def _psd(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'psd_classify'):
            verdict = psd_classify(A, self.solver)
        return verdict.to_dict()

    def _ellipticity(self, timings, tensor: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        with self._phase(timings, 'strong_ellipticity'):
            report = strong_ellipticity(A, self.solver)
        return report.to_dict()

    def _contract(self, timings, third: ThirdOrderTensor) -> Dict[str, Any]:
        with self._phase(timings, 'contract'):
            result = contract_third_order(third)
        return result.to_dict()

    def _product(self, timings, tensor: Tensor4, other: Tensor4) -> Dict[str, Any]:
        A = self.ensure_biquadratic(tensor)
        B = self.ensure_biquadratic(other)
        with self._phase(timings, 'product'):
            result = product(A, B, self.tolerances.symmetry)
        return {**result.to_dict(), 'biquadratic': isinstance(result, BiquadraticTensor)}

    # ==================== 生成器 ====================

    def _rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def _gen(self, timings, kind: str, m: int = 2, n: int = 2, p: int = 2,
             values: Optional[np.ndarray] = None, x: Optional[np.ndarray] = None,
             y: Optional[np.ndarray] = None, lam: Optional[float] = None, mu: Optional[float] = None,
             young: Optional[float] = None, poisson: Optional[float] = None) -> Dict[str, Any]:
        rng = self._rng()
        with self._phase(timings, f'gen_{kind}'):
            if kind == 'identity':
                result = identity(m, n)
            elif kind == 'diagonal':
                d = rng.standard_normal((m, n)) if values is None else np.asarray(values, dtype=float)
                result = diagonal(m, n, d.reshape(m, n) if d.size == m * n else d)
            elif kind == 'rank1':
                if x is None or y is None:
                    raise InvalidInputError("gen rank1 需要 --x 与 --y")
                result = rank_one(x, y)
            elif kind == 'random':
                result = random_biquadratic(m, n, rng)
            elif kind == 'gram':
                result = contract_third_order(ThirdOrderTensor(rng.standard_normal((p, m, n))))
            elif kind == 'third':
                return ThirdOrderTensor(rng.standard_normal((p, m, n))).to_dict()
            elif kind == 'elastic':
                if young is not None and poisson is not None:
                    lam, mu = lame_from_technical(young, poisson)
                if lam is None or mu is None:
                    raise InvalidInputError("gen elastic 需要 --lam/--mu 或 --young/--poisson")
                result = elasticity_tensor(lam, mu)
            elif kind == 'kron':
                result = kronecker(random_spd(m, rng), random_spd(n, rng))
            else:
                raise InvalidInputError(f"未知生成器类型: {kind}")
        return result.to_dict()

    # ==================== 验证组合 ====================

    def _verify(self, timings, pairs: Optional[List[tuple]] = None, count: int = 0,
                m: int = 2, n: int = 2) -> Dict[str, Any]:
        if pairs is None:
            with self._phase(timings, 'generate_pairs'):
                pairs = generate_pairs(count, m, n, self._rng(1))
        else:
            pairs = [(self.ensure_biquadratic(A), self.ensure_biquadratic(B)) for A, B in pairs]

        records = []
        with self._phase(timings, 'verify_battery'):
            for index, (A, B) in enumerate(pairs):
                self.logger.info(f"🔄 验证进度: {index + 1}/{len(pairs)}")
                records.append(self.verify_pair(A, B, index))

        violations = [r['index'] for r in records if not r['all_sound']]
        structural_failures = [r['index'] for r in records if not r['structural_sound']]
        if violations:
            self.logger.warning(f"⚠️ 发现 {len(violations)} 个违反实例: {violations}")
        if structural_failures:
            self.logger.error(f"❌ 结构检查失败（数值问题）: {structural_failures}")
        return {
            'pairs': records,
            'all_sound': not violations,
            'summary': {
                'total_pairs': len(records),
                'violations': violations,
                'structural_failures': structural_failures,
                'inverse_checked': sum(1 for r in records if not r['inequalities']['skipped']),
                'not_invertible_in_bq': sum(
                    1 for r in records
                    if any(s['reason'] == 'NotInvertibleInBQ' for s in r['inequalities']['skipped'])
                ),
            },
        }

    def verify_pair(self, A: BiquadraticTensor, B: BiquadraticTensor, index: int = 0) -> Dict[str, Any]:
        """不等式 + 秩一分解重建 + Tucker 重建与保持性，所有检查都应成立"""
        inequalities = verify_inequalities(A, B, self.solver, self.tolerances)

        structural: List[InequalityCheck] = []
        decomposition = bq_rank_one_decompose(A, self.tolerances.drop)
        structural.append(InequalityCheck(
            'decomposition_reconstruction', decomposition.reconstruction_error, RECONSTRUCTION_TOL,
            decomposition.reconstruction_error <= RECONSTRUCTION_TOL, 'relative Frobenius error'))
        bound = term_bound(A.m, A.n)
        structural.append(InequalityCheck(
            'decomposition_term_bound', float(len(decomposition)), float(bound),
            len(decomposition) <= bound, 'mn·min(m(m+1)/2, n(n+1)/2)'))

        r1, r2 = tucker_ranks(A, self.tolerances.rank)
        X, Y = factor_matrices(decomposition)
        factor_ranks = (matrix_rank(X, RANK_CHECK_TOL) if X.size else 0,
                        matrix_rank(Y, RANK_CHECK_TOL) if Y.size else 0)
        structural.append(InequalityCheck(
            'factor_ranks_match_tucker_ranks', float(sum(factor_ranks)), float(r1 + r2),
            factor_ranks == (r1, r2), f'factor ranks {list(factor_ranks)} vs tucker ranks {[r1, r2]}'))

        if r1 > 0 and r2 > 0:
            form = hosvd(A, r1, r2)
            structural.append(InequalityCheck(
                'hosvd_reconstruction', form.reconstruction_error, RECONSTRUCTION_TOL,
                form.reconstruction_error <= RECONSTRUCTION_TOL, f'core dims ({r1}, {r2})'))

            preservation = br_preservation_check(A, form.P, form.Q, RECONSTRUCTION_TOL,
                                                 self.tolerances.drop)
            structural.append(InequalityCheck(
                'br_preservation', max(preservation.push_error, preservation.pull_error),
                RECONSTRUCTION_TOL, preservation.satisfied,
                f'terms A {preservation.terms_a}, core {preservation.terms_core}'))
            structural.append(self._core_m_eigen_check(A, form))

        structural_sound = all(c.satisfied for c in structural)
        return {
            'index': index,
            'inequalities': inequalities.to_dict(),
            'structural': [c.to_dict() for c in structural],
            'structural_sound': structural_sound,
            'all_sound': inequalities.all_sound and structural_sound,
        }

    def _core_m_eigen_check(self, A: BiquadraticTensor, form: TuckerForm) -> InequalityCheck:
        """
        正交 Tucker 下 M-特征对双向对应：
          核心的最大 M-特征对 (λ, u, v) 经 (Pu, Qv) 提升后是 A 的 M-特征对
          A 的最大 M-特征对 (λ, x, y) 经 (Pᵀx, Qᵀy) 回拉后是核心的 M-特征对（λ ≠ 0 时）
        """
        tol = PRESERVATION_TOL * max(1.0, frobenius(A))
        core_pair = largest_m_eigenvalue(form.core, self.solver)
        a_pair = largest_m_eigenvalue(A, self.solver)

        residual = m_residual(A, core_pair.lam, form.P @ core_pair.x, form.Q @ core_pair.y)
        if abs(a_pair.lam) > tol:
            residual = max(residual, m_residual(form.core, a_pair.lam,
                                                form.P.T @ a_pair.x, form.Q.T @ a_pair.y))
        return InequalityCheck(
            'hosvd_core_m_eigenpairs', residual, tol, residual <= tol,
            f'largest M-eigenvalue A {a_pair.lam:.12g}, core {core_pair.lam:.12g}')

    def cross_check(self, A: BiquadraticTensor) -> Dict[str, Any]:
        """小规模张量 (m, n <= 3) 的谱范数下界与网格穷举比对"""
        interval = spectral_norm_interval(A, self.solver)
        grid_min, grid_max, _, _ = quartic_extrema_grid(A, self.grid)
        grid_value = max(abs(grid_min), abs(grid_max))
        tolerance = grid_tolerance(A, self.grid)
        return {
            'solver_lower': interval.lower,
            'grid_value': grid_value,
            'tolerance': tolerance,
            'agrees': interval.lower >= grid_value - tolerance - 1e-10
                      and grid_value <= interval.upper + 1e-10,
        }


def random_spd(size: int, rng: np.random.Generator) -> np.ndarray:
    """良态对称正定矩阵 G G^T + size*I（逐位对称）"""
    G = rng.standard_normal((size, size))
    S = G @ G.T + size * np.eye(size)
    return 0.5 * (S + S.T)


def generate_pairs(count: int, m: int, n: int, rng: np.random.Generator) -> List[tuple]:
    """交替生成随机实例与可逆族实例（Kronecker 正定积），保证逆相关检查被覆盖"""
    pairs = []
    for k in range(count):
        if k % 2 == 0:
            A = random_biquadratic(m, n, rng)
        else:
            A = kronecker(random_spd(m, rng), random_spd(n, rng))
        B = random_biquadratic(m, n, rng)
        pairs.append((A, B))
    return pairs
