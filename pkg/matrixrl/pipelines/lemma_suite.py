"""
Randomized property suite for the elliptical-potential checks.
"""
from typing import *
import numpy as np
from tqdm import tqdm
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..utils import substream
from ..modules.lemmas import check_det_lemma, check_lazy_lemma, check_quadratic_det_ratio

N_PROBES = 64


def _random_vectors(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    """Gaussian directions with norms uniform in (0, L] for a random L."""
    L = rng.uniform(0.1, 3.0)
    X = rng.standard_normal((count, d))
    X /= np.maximum(np.linalg.norm(X, axis=-1, keepdims=True), 1e-12)
    return X * rng.uniform(0.0, L, size=(count, 1))


def det_trial(rng: np.random.Generator, max_d: int, max_vectors: int) -> edict:
    d = int(rng.integers(1, max_d + 1))
    M = int(rng.integers(0, max_vectors + 1))
    lam = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    b = float(rng.uniform(0.1, 5.0))
    return check_det_lemma(_random_vectors(rng, M, d), lam, b)


def lazy_trial(rng: np.random.Generator, max_d: int, max_episodes: int, max_H: int, max_tasks: int = 1) -> edict:
    d = int(rng.integers(1, max_d + 1))
    N = int(rng.integers(1, max_episodes + 1))
    H = int(rng.integers(1, max_H + 1))
    P = int(rng.integers(1, max_tasks + 1))
    lam = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    X = _random_vectors(rng, N * H * P, d).reshape(N, H, P, d)
    return check_lazy_lemma(X if P > 1 else X[:, :, 0], lam)


def quadratic_trial(rng: np.random.Generator, max_d: int) -> edict:
    d = int(rng.integers(1, max_d + 1))
    lam = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    G = rng.standard_normal((d, int(rng.integers(0, 2 * d + 1))))
    K = rng.standard_normal((d, int(rng.integers(0, 2 * d + 1))))
    C = lam * np.eye(d) + G @ G.T
    B = C + K @ K.T
    probes = rng.standard_normal((N_PROBES, d))
    return check_quadratic_det_ratio(B, C, probes)


def run_lemma_suite(
    trials: int,
    seed: int = 0,
    max_d: int = 8,
    max_episodes: int = 200,
    max_H: int = 5,
    max_tasks: int = 3,
    verbose: bool = False,
) -> edict:
    """
    Run the determinant, lazy-determinant and quadratic-ratio checks on
    ``trials`` randomized instances each.

    Trial i of each check draws from the ('lemma', check, i) substream of
    ``seed``. Every third lazy trial uses the block-diagonal multitask form
    with up to ``max_tasks`` tasks.

    Returns:
        EasyDict with one {trials, failures, worst_margin, passed} report per
        check and the overall ``passed``.
    """
    if trials < 1:
        raise ParameterError(f"Invalid trials '{trials}', must be >= 1")
    checks = {
        'det_lemma': lambda rng, i: det_trial(rng, max_d, max_episodes * max_H),
        'lazy_lemma': lambda rng, i: lazy_trial(rng, max_d, max_episodes, max_H, max_tasks if i % 3 == 2 else 1),
        'quadratic_det_ratio': lambda rng, i: quadratic_trial(rng, max_d),
    }
    report = edict()
    for name, trial in checks.items():
        failures = 0
        worst = np.inf
        for i in tqdm(range(trials), desc=f'[MATRIXRL] {name}', disable=not verbose):
            out = trial(substream(seed, 'lemma', name, i), i)
            failures += int(not out.holds)
            worst = min(worst, out.rhs - out.lhs)
        report[name] = edict({
            'trials': trials,
            'failures': failures,
            'worst_margin': float(worst),
            'passed': failures == 0,
        })
    report.passed = all(report[name].passed for name in checks)
    return report
