"""Monte Carlo oracle for the training-based uplink.

Each trial draws its randomness from a counter-based Philox stream keyed by
``(master_seed, trial_index)``. Trials are processed in fixed-size chunks,
so the per-trial values, and therefore every aggregate, are bit-identical
for any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .model import (
    DomainError,
    EnergySplit,
    EstimationVariances,
    SystemParams,
    effective_snr,
    estimation_variances,
    validate_params,
)
from .slope import SlopeEstimate, check_high_snr_grid, fit_slope

__all__ = [
    "GENERATOR_VERSION",
    "TrialStream",
    "EstimationOutput",
    "EmpiricalRate",
    "SingularChannelError",
    "complex_normal",
    "gen_channel",
    "simulate_training",
    "normalized_estimate",
    "sinr_mrc",
    "sinr_zf",
    "sinr_mmse",
    "trial_rates",
    "empirical_rate",
    "mmse_saturation_probe",
    "default_threads",
    "run_chunked",
]

# Bump when the sampling recipe changes; seeded outputs change with it.
GENERATOR_VERSION = 1

THREADS_ENV = "MIMO_UPLINK_THREADS"
CHUNK_TRIALS = 256
COND_LIMIT = 1e12
MAX_RESAMPLES = 1000

_MASK64 = (1 << 64) - 1
_CHANNEL_LANE = 0
_NOISE_LANE = 1
# fixed-point grid shared by channels and estimates; keeps H - H_hat exact
_GRID = 2.0 ** -40

RECEIVERS = ("mrc", "zf", "mmse")


class SingularChannelError(np.linalg.LinAlgError):
    """Gram matrix of the estimated channel is numerically singular."""


@dataclass(frozen=True)
class TrialStream:
    """Identity of one trial's random substream."""

    master_seed: int
    trial_index: int

    def generator(self, lane: int = 0) -> np.random.Generator:
        """Fresh generator for ``lane``; lanes occupy disjoint counter ranges."""
        if self.trial_index < 0:
            raise DomainError("trial_index must be non-negative")
        key = ((self.master_seed & _MASK64) << 64) | (self.trial_index & _MASK64)
        bits = np.random.Philox(key=key, counter=[0, 0, lane, 0])
        return np.random.Generator(bits)


@dataclass(frozen=True)
class EstimationOutput:
    H_hat: np.ndarray
    H_tilde: np.ndarray
    variances: EstimationVariances


@dataclass(frozen=True)
class EmpiricalRate:
    mean_per_user_rate: float
    std_error: float
    trials: int
    receiver: str
    resamples: int = 0


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {value!r}")
    return 1


def _as_rng(stream: Union[TrialStream, np.random.Generator], lane: int) -> np.random.Generator:
    if isinstance(stream, TrialStream):
        return stream.generator(lane)
    return stream


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples by Box-Muller on the generator's uniform doubles."""
    shape = tuple(shape) if isinstance(shape, (tuple, list)) else (int(shape),)
    u = rng.random((2,) + shape)
    radius = np.sqrt(-np.log1p(-u[0]))
    angle = 2.0 * np.pi * u[1]
    return radius * np.cos(angle) + 1j * (radius * np.sin(angle))


def gen_channel(M: int, K: int, stream: Union[TrialStream, np.random.Generator]) -> np.ndarray:
    """M x K channel with i.i.d. CN(0, 1) entries.

    A :class:`TrialStream` always yields the same matrix; a ``Generator``
    continues its own sequence. Entries are rounded to a 2**-40 grid so
    that the estimate/error split in :func:`simulate_training` is exact.
    """
    if M < 1 or K < 1:
        raise DomainError("M >= 1 and K >= 1 required")
    return _on_grid(complex_normal(_as_rng(stream, _CHANNEL_LANE), (M, K)))


def _on_grid(x: np.ndarray) -> np.ndarray:
    return np.round(x / _GRID) * _GRID


def simulate_training(H: np.ndarray, E: float,
                      stream: Union[TrialStream, np.random.Generator]) -> EstimationOutput:
    """Pilot phase with ``sqrt(E) * I_K`` pilots followed by the MMSE estimate.

    The estimate is rounded to the same 2**-40 grid as :func:`gen_channel`
    (a shift below 1e-12), so ``H_hat + H_tilde == H`` holds bit for bit
    whenever ``H`` itself lies on that grid.
    """
    variances = estimation_variances(E)
    N = complex_normal(_as_rng(stream, _NOISE_LANE), H.shape)
    root = math.sqrt(E)
    Y_p = root * H + N
    H_hat = _on_grid((root / (E + 1.0)) * Y_p)
    return EstimationOutput(H_hat, H - H_hat, variances)


def normalized_estimate(H: np.ndarray, N: np.ndarray, E: float) -> np.ndarray:
    """``H_hat / sigma_hat`` with unit-variance entries; defined at ``E = 0``."""
    return (math.sqrt(E) * H + N) / math.sqrt(E + 1.0)


def _gram(G: np.ndarray) -> np.ndarray:
    return np.swapaxes(G, -1, -2).conj() @ G


def sinr_mrc(G: np.ndarray, rho: float) -> np.ndarray:
    """Per-user MRC output SINR; ``G`` is ``(..., M, K)``."""
    gram = _gram(G)
    norms = np.real(np.diagonal(gram, axis1=-2, axis2=-1))
    if rho == 0:
        return np.zeros_like(norms)
    cross = np.sum(np.abs(gram) ** 2, axis=-1) - norms ** 2
    cross = np.maximum(cross, 0.0)
    return rho * norms ** 2 / (rho * cross + norms)


def _check_conditioning(gram: np.ndarray) -> None:
    if np.any(~(np.linalg.cond(gram) < COND_LIMIT)):
        raise SingularChannelError("G^H G is numerically singular")


def sinr_zf(G: np.ndarray, rho: float) -> np.ndarray:
    """Per-user zero-forcing SINR ``rho / [(G^H G)^-1]_kk``."""
    M, K = G.shape[-2:]
    if M < K:
        raise DomainError(f"ZF needs M ≥ K (M={M}, K={K})")
    gram = _gram(G)
    _check_conditioning(gram)
    if rho == 0:
        return np.zeros(G.shape[:-2] + (K,))
    inv_diag = np.real(np.diagonal(np.linalg.inv(gram), axis1=-2, axis2=-1))
    return rho / inv_diag


def sinr_mmse(G: np.ndarray, rho: float) -> np.ndarray:
    """Per-user linear MMSE SINR.

    Uses ``1/[(I + rho G^H G)^-1]_kk - 1``, which equals
    ``rho g_k^H (rho sum_{i != k} g_i g_i^H + I)^-1 g_k``.
    """
    K = G.shape[-1]
    if rho == 0:
        return np.zeros(G.shape[:-2] + (K,))
    A = np.eye(K) + rho * _gram(G)
    inv_diag = np.real(np.diagonal(np.linalg.inv(A), axis1=-2, axis2=-1))
    return 1.0 / inv_diag - 1.0


_SINR = {"mrc": sinr_mrc, "zf": sinr_zf, "mmse": sinr_mmse}


def run_chunked(fn: Callable[[int, int], np.ndarray], trials: int,
                threads: int | None = None) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over fixed trial chunks, in index order."""
    bounds = [(s, min(s + CHUNK_TRIALS, trials)) for s in range(0, trials, CHUNK_TRIALS)]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(bounds) == 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return np.concatenate(parts, axis=0)


def _receiver_key(receiver: str) -> str:
    key = receiver.lower()
    if key not in RECEIVERS:
        raise DomainError(f"receiver must be one of {RECEIVERS}, got {receiver!r}")
    return key


def trial_rates(receiver: str, M: int, K: int, T: int,
                splits: Sequence[EnergySplit], trials: int, master_seed: int,
                threads: int | None = None) -> tuple[np.ndarray, int]:
    """Per-trial per-user rates, shape ``(trials, len(splits))``.

    All splits share each trial's channel and pilot noise (common random
    numbers). Returns the rates and the number of ZF resamples.
    """
    key = _receiver_key(receiver)
    sinr = _SINR[key]
    energies = [s.E for s in splits]
    rhos = [effective_snr(s.P_d, s.E, K) for s in splits]
    prelog = 1.0 - K / T
    resamples: dict[int, int] = {}

    def chunk(start: int, stop: int) -> np.ndarray:
        G = np.empty((stop - start, len(splits), M, K), dtype=complex)
        local = 0
        for n, idx in enumerate(range(start, stop)):
            stream = TrialStream(master_seed, idx)
            ch_rng, noise_rng = stream.generator(_CHANNEL_LANE), stream.generator(_NOISE_LANE)
            for attempt in range(MAX_RESAMPLES + 1):
                H = gen_channel(M, K, ch_rng)
                N = complex_normal(noise_rng, (M, K))
                for j, E in enumerate(energies):
                    G[n, j] = normalized_estimate(H, N, E)
                if key != "zf" or np.all(np.linalg.cond(_gram(G[n])) < COND_LIMIT):
                    break
                local += 1
            else:
                raise SingularChannelError(f"trial {idx}: too many resamples")
        out = np.empty((stop - start, len(splits)))
        for j, rho in enumerate(rhos):
            s = sinr(G[:, j], rho)
            out[:, j] = prelog * np.mean(np.log2(1.0 + s), axis=-1)
        resamples[start] = local
        return out

    rates = run_chunked(chunk, trials, threads)
    return rates, sum(resamples.values())


def _mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    v = np.ascontiguousarray(values, dtype=float)
    n = v.shape[0]
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(n))


def _check_split(p: SystemParams, split: EnergySplit) -> None:
    budget = p.P * p.T
    spent = split.E + split.P_d * (p.T - p.K)
    if split.E < 0 or split.P_d < 0 or not math.isclose(spent, budget, rel_tol=1e-9, abs_tol=1e-12):
        raise DomainError(f"split spends {spent} but the interval budget is {budget}")


def empirical_rate(receiver: str, params: SystemParams, split: EnergySplit,
                   trials: int, master_seed: int,
                   threads: int | None = None) -> EmpiricalRate:
    """Ergodic per-user rate of ``receiver`` on the estimated equivalent channel."""
    validate_params(params, needs_training=True)
    _check_split(params, split)
    if trials < 100:
        raise DomainError("empirical_rate needs at least 100 trials")
    rates, resamples = trial_rates(receiver, params.M, params.K, params.T, [split],
                                   trials, master_seed, threads)
    mean, se = _mean_and_stderr(rates[:, 0])
    return EmpiricalRate(mean, se, trials, _receiver_key(receiver).upper(), resamples)


def mmse_saturation_probe(M: int, K: int, T: int, p_grid, trials: int, seed: int,
                          receiver: str = "mmse",
                          threads: int | None = None) -> SlopeEstimate:
    """Slope of the empirical per-user rate versus ``log2(P)``.

    Uses the equal-power split ``E = K*P``, ``P_d = P`` at every grid point
    with common random numbers across the grid. Intended for ``K == M``;
    other shapes give a contrast curve.
    """
    validate_params(SystemParams(M, K, T, 1.0), needs_training=True)
    p = check_high_snr_grid(p_grid)
    splits = [EnergySplit.equal_power(float(P), T, K) for P in p]
    rates, _ = trial_rates(receiver, M, K, T, splits, trials, seed, threads)
    means = np.ascontiguousarray(rates.T).mean(axis=1)
    return fit_slope(p, means, f"{_receiver_key(receiver)}_empirical")
