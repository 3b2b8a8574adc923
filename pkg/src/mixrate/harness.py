"""Seeded sampling, trial execution, parameter scans, ratio search, reports.

Every random draw flows through an (seed, stream) pair: the stream index is
the trial id, so trials are reproducible in isolation and embarrassingly
parallel without any RNG coordination. Identical (seed, stream) pairs give
identical samples on any run of one build.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .ensembles import (
    DensityMatrix,
    Ensemble,
    Hamiltonian,
    HamiltonianSet,
    binary_entropy,
    shannon_entropy,
)
from .errors import DomainError, MixRateError
from .rates import (
    binary_max_rate,
    bound_theorem_binary,
    bound_theorem_general,
    fd_mixing_rate_richardson,
    max_mixing_rate,
    mixing_rate,
    optimal_hamiltonians,
    stm_check,
)

PROB_FLOOR = 1e-6
STM_TIMES = (0.5, 1.0, 2.0)
CONJECTURE_SLACK = 1e-6
THEOREM_SLACK = 1e-8


@dataclass(frozen=True)
class RNGSpec:
    """Seed plus per-trial stream index; fully determines a random stream."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng((self.seed, self.stream))


def _gen(rng: Union[RNGSpec, np.random.Generator]) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RNGSpec) else rng


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for sampling and search; all tolerances strictly positive."""

    dim: int = 2
    n_states: int = 2
    n_trials: int = 1
    seed: int = 0
    fd_step: float = 1e-4
    rank_tol: float = 1e-12
    mode: str = "verify"
    search_step: float = 0.1
    search_shrink: float = 0.5
    search_max_iters: int = 1000
    binary: bool = False

    def __post_init__(self):
        if not 2 <= self.dim <= 64:
            raise DomainError(f"dim {self.dim} outside supported range [2, 64]")
        if self.n_states < 1 or self.n_trials < 1:
            raise DomainError("n_states and n_trials must be >= 1")
        if min(self.fd_step, self.rank_tol, self.search_step) <= 0:
            raise DomainError("tolerances and steps must be positive")
        if self.mode not in {"verify", "scan", "search", "sie"}:
            raise DomainError(f"unknown mode {self.mode!r}")


@dataclass
class TrialRecord:
    """Outcome of one sampled trial."""

    trial_id: int
    seed: int
    dim: int
    n_states: int
    probabilities: tuple[float, ...]
    max_rate: float = 0.0
    binary_max_rate: Optional[float] = None
    bound_thm: float = 0.0
    shannon: float = 0.0
    ratio_thm: Optional[float] = None
    ratio_conj: Optional[float] = None
    fd_residual: float = 0.0
    stm_ok: bool = True
    elapsed: float = 0.0
    error: Optional[str] = None
    iterations: Optional[int] = None


def sample_density(dim: int, rng: Union[RNGSpec, np.random.Generator]) -> DensityMatrix:
    """Hilbert-Schmidt-random state G G† / Tr(G G†) with Ginibre G."""
    g = _gen(rng)
    G = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    rho = G @ G.conj().T
    return DensityMatrix(rho / np.real(np.trace(rho)))


def sample_hamiltonian(dim: int, rng: Union[RNGSpec, np.random.Generator]) -> Hamiltonian:
    """Symmetrized Ginibre matrix rescaled to operator norm exactly 1."""
    g = _gen(rng)
    G = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    Hm = (G + G.conj().T) / 2
    norm = float(np.max(np.abs(np.linalg.eigvalsh(Hm))))
    while norm == 0.0:  # measure-zero, but keep the contract ||H|| = 1
        G = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
        Hm = (G + G.conj().T) / 2
        norm = float(np.max(np.abs(np.linalg.eigvalsh(Hm))))
    return Hamiltonian(Hm / norm, normalized=True)


def sample_hamiltonian_set(
    n: int, dim: int, rng: Union[RNGSpec, np.random.Generator]
) -> HamiltonianSet:
    g = _gen(rng)
    return HamiltonianSet([sample_hamiltonian(dim, g) for _ in range(n)])


def _sample_probs(n: int, g: np.random.Generator) -> np.ndarray:
    # Flat Dirichlet via normalized exponentials; resample until clear of the floor.
    while True:
        e = g.exponential(size=n)
        p = e / np.sum(e)
        if np.all(p > PROB_FLOOR):
            return p


def sample_ensemble(
    cfg: ExperimentConfig, rng: Union[RNGSpec, np.random.Generator]
) -> Ensemble:
    """cfg.n_states Hilbert-Schmidt states with flat-Dirichlet probabilities."""
    g = _gen(rng)
    p = _sample_probs(cfg.n_states, g)
    states = [sample_density(cfg.dim, g) for _ in range(cfg.n_states)]
    return Ensemble(p, states)


def evaluate_ensemble(
    E: Ensemble,
    cfg: ExperimentConfig,
    trial_id: int,
    binary_bounds: bool = False,
) -> TrialRecord:
    """Compute rates, bounds, ratios, fd residual and the STM check for E."""
    t0 = time.perf_counter()
    rec = TrialRecord(
        trial_id=trial_id,
        seed=cfg.seed,
        dim=E.dim,
        n_states=len(E),
        probabilities=tuple(float(p) for p in E.probabilities),
    )
    try:
        H = optimal_hamiltonians(E, cfg.rank_tol)
        rec.max_rate = float(max_mixing_rate(E, cfg.rank_tol))
        rate_at = mixing_rate(E, H, cfg.rank_tol)
        fd = fd_mixing_rate_richardson(E, H, cfg.fd_step, cfg.rank_tol)
        rec.fd_residual = float(abs(rate_at - fd))
        rec.shannon = float(shannon_entropy(E.probabilities))
        rec.stm_ok = all(pt.ok for pt in stm_check(E, H, STM_TIMES))
        if len(E) == 2:
            rec.binary_max_rate = float(binary_max_rate(E, cfg.rank_tol))
        if binary_bounds and len(E) == 2:
            p0 = float(E.probabilities[0])
            rec.bound_thm = float(bound_theorem_binary(p0))
            rec.ratio_thm = _ratio(rec.binary_max_rate, rec.bound_thm)
            rec.ratio_conj = _ratio(rec.binary_max_rate, binary_entropy(p0))
        else:
            rec.bound_thm = float(bound_theorem_general(E.probabilities))
            rec.ratio_thm = _ratio(rec.max_rate, rec.bound_thm)
            if len(E) == 2:
                rec.ratio_conj = _ratio(rec.binary_max_rate, rec.shannon)
            else:
                rec.ratio_conj = _ratio(rec.max_rate, rec.shannon)
    except MixRateError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.elapsed = time.perf_counter() - t0
    return rec


def _ratio(num: Optional[float], den: float) -> Optional[float]:
    if num is None or den <= 0:
        return None
    return num / den


def run_trial(cfg: ExperimentConfig, trial_id: int) -> TrialRecord:
    """Sample an ensemble from (cfg.seed, trial_id) and evaluate it."""
    E = sample_ensemble(cfg, RNGSpec(cfg.seed, trial_id))
    return evaluate_ensemble(E, cfg, trial_id)


def trial_ensemble(cfg: ExperimentConfig, trial_id: int) -> Ensemble:
    """Regenerate the exact ensemble a trial saw (for offender serialization)."""
    return sample_ensemble(cfg, RNGSpec(cfg.seed, trial_id))


def scan_binary(
    p_grid: Sequence[float], cfg: ExperimentConfig
) -> list[TrialRecord]:
    """Binary ensembles at each fixed p; records the binary bound and ratios."""
    records = []
    for pi, p in enumerate(p_grid):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p-grid values must lie in (0, 1), got {p!r}")
        for j in range(cfg.n_trials):
            trial_id = pi * cfg.n_trials + j
            g = RNGSpec(cfg.seed, trial_id).generator()
            states = [sample_density(cfg.dim, g) for _ in range(2)]
            E = Ensemble([p, 1.0 - p], states)
            records.append(evaluate_ensemble(E, cfg, trial_id, binary_bounds=True))
    return records


def scan_binary_ensemble(cfg: ExperimentConfig, trial_id: int, p: float) -> Ensemble:
    g = RNGSpec(cfg.seed, trial_id).generator()
    return Ensemble([p, 1.0 - p], [sample_density(cfg.dim, g) for _ in range(2)])


def _perturb_states(E: Ensemble, eps: float, g: np.random.Generator) -> list[DensityMatrix]:
    out = []
    for s in E.states:
        G = sample_hamiltonian(E.dim, g).matrix
        w, V = np.linalg.eigh(G)
        U = (V * np.exp(1j * eps * w)) @ V.conj().T
        out.append(DensityMatrix(U @ s.matrix @ U.conj().T))
    return out


def _perturb_probs(p: np.ndarray, eps: float, g: np.random.Generator) -> np.ndarray:
    q = np.log(p) + eps * g.standard_normal(p.size)
    q = np.exp(q - np.max(q))
    q /= np.sum(q)
    q = np.clip(q, PROB_FLOOR, None)
    return q / np.sum(q)


def _search_objective(E: Ensemble, cfg: ExperimentConfig) -> float:
    if cfg.binary:
        return binary_max_rate(E, cfg.rank_tol) / binary_entropy(float(E.probabilities[0]))
    return max_mixing_rate(E, cfg.rank_tol) / shannon_entropy(E.probabilities)


def search_ratio(cfg: ExperimentConfig) -> TrialRecord:
    """Hill-climb the rate/entropy ratio by conjugating states and nudging
    probabilities; restarts from a fresh sample when the step collapses.

    The general rate bound is asserted on every accepted candidate; the
    conjectured bound itself is only recorded, never asserted.
    """
    if cfg.binary and cfg.n_states != 2:
        raise DomainError("binary search requires n_states = 2")
    g = RNGSpec(cfg.seed, 0).generator()
    best_E: Optional[Ensemble] = None
    best_obj = -math.inf
    iters = 0
    restart = 0
    while iters < cfg.search_max_iters:
        cur = sample_ensemble(cfg, g)
        cur_obj = _search_objective(cur, cfg)
        eps = cfg.search_step
        rejects = 0
        while iters < cfg.search_max_iters and eps >= 1e-6:
            iters += 1
            states = _perturb_states(cur, eps, g)
            probs = _perturb_probs(cur.probabilities, eps, g)
            cand = Ensemble(probs, states)
            obj = _search_objective(cand, cfg)
            mx = max_mixing_rate(cand, cfg.rank_tol)
            assert mx <= bound_theorem_general(cand.probabilities) + THEOREM_SLACK
            if obj > cur_obj:
                cur, cur_obj, rejects = cand, obj, 0
            else:
                rejects += 1
                if rejects >= 20:
                    eps *= cfg.search_shrink
                    rejects = 0
        if cur_obj > best_obj:
            best_E, best_obj = cur, cur_obj
        restart += 1
    rec = evaluate_ensemble(best_E, cfg, trial_id=0, binary_bounds=cfg.binary)
    rec.iterations = iters
    return rec


CSV_HEADER = (
    "trial_id,seed,dim,n_states,probs,max_rate,binary_max_rate,bound_thm,"
    "shannon,ratio_thm,ratio_conj,fd_residual,stm_ok,elapsed"
)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def record_to_csv_row(rec: TrialRecord) -> str:
    probs = ";".join(repr(float(p)) for p in rec.probabilities)
    cells = [
        rec.trial_id,
        rec.seed,
        rec.dim,
        rec.n_states,
        probs,
        rec.max_rate,
        rec.binary_max_rate,
        rec.bound_thm,
        rec.shannon,
        rec.ratio_thm,
        rec.ratio_conj,
        rec.fd_residual,
        rec.stm_ok,
        rec.elapsed,
    ]
    return ",".join(_csv_cell(c) for c in cells)


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(record_to_csv_row(r) for r in records)
    return "\n".join(lines) + "\n"


def records_to_json(records: Sequence[TrialRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)


def write_report(records: Sequence[TrialRecord], path: str, format: str = "csv") -> None:
    """Write records as CSV (fixed header) or a JSON array."""
    if format not in {"csv", "json"}:
        raise DomainError(f"unknown report format {format!r}")
    text = records_to_csv(records) if format == "csv" else records_to_json(records)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
