"""Closed-loop uplink power control over diversity branch sets.

Mobiles associate with the sector whose downlink pilot they receive the
strongest (green antennas are invisible to this step). Each sector's
uplink is received on a branch set: its own antenna plus every green
antenna attached to it. Per branch r the mobile sees

    S_r = p * g_r          I_r = sum_{j != ms} p_j * g_{j,r}

and the combined SINR is

    mrc        sum_r S_r / (I_r + N_r)
    selection  max_r S_r / (I_r + N_r)
    egc        (sum_r sqrt(S_r))^2 / sum_r (I_r + N_r)

The power-control fixed point is solved by the standard multiplicative
update p' = clamp(p * target / sinr(p)), iterated Jacobi-style from
all-p_min; the unclamped map satisfies the standard interference-function
axioms (positivity, monotonicity, scalability) for all three rules, so
the iteration increases monotonically toward the fixed point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .propagation import LinkGainMatrix
from .scenario import COMBINING_MODES, MobileStation, Scenario

log = logging.getLogger(__name__)

#: An MS pinned at p_max counts as outage only if it misses its target by
#: more than this margin, to avoid flagging MSs that land on the clamp.
OUTAGE_MARGIN_DB = 0.5

DEFAULT_TOL_DB = 0.01
DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True)
class Association:
    """Serving sector per MS: argmax of downlink pilot rx power."""

    serving_sector: tuple[str, ...]
    serving_index: np.ndarray       # column into the DL table
    dl_rx_dbm: np.ndarray           # pilot level at the serving sector


@dataclass(frozen=True)
class BranchSet:
    """Receive-point ids per sector: own antenna plus attached greens."""

    by_sector: dict[str, tuple[str, ...]]


@dataclass(frozen=True)
class PowerControlResult:
    tx_power_dbm: np.ndarray
    sinr_db: np.ndarray
    outage: np.ndarray
    iterations: int
    converged: bool


def associate(gm: LinkGainMatrix) -> Association:
    """DL-strongest association; ties break to the lowest sector id.

    Only the DL pilot table enters, so green antennas can never influence
    the serving sector.
    """
    serving = []
    for row in gm.dl_rx_dbm:
        best = row.max()
        candidates = np.flatnonzero(row == best)
        serving.append(min(gm.sector_ids[i] for i in candidates))
    index = np.array([gm.sector_index[sid] for sid in serving], dtype=int)
    ms_rows = np.arange(len(serving))
    return Association(
        serving_sector=tuple(serving),
        serving_index=index,
        dl_rx_dbm=gm.dl_rx_dbm[ms_rows, index].copy() if len(serving) else np.empty(0),
    )


def receive_branches(s: Scenario) -> BranchSet:
    """Branch sets per sector; a multi-attached green appears in each."""
    by_sector: dict[str, tuple[str, ...]] = {sid: (sid,) for sid in s.sector_ids()}
    for g in s.greens:
        for sid in g.attached_sectors:
            by_sector[sid] = by_sector[sid] + (g.id,)
    return BranchSet(by_sector=by_sector)


@dataclass(frozen=True)
class _Problem:
    """Solver view of one snapshot: linear gains and per-MS branch columns."""

    gains_mw: np.ndarray            # (n_ms, n_rp)
    noise_mw: np.ndarray            # (n_rp,)
    targets_lin: np.ndarray         # (n_ms,)
    groups: tuple[tuple[np.ndarray, np.ndarray], ...]   # (branch cols, ms rows)
    p_min_mw: float
    p_max_mw: float


def _build_problem(s: Scenario, mobiles: list[MobileStation], gm: LinkGainMatrix,
                   assoc: Association, branches: BranchSet) -> _Problem:
    by_serving: dict[str, list[int]] = {}
    for i, sid in enumerate(assoc.serving_sector):
        by_serving.setdefault(sid, []).append(i)
    groups = tuple(
        (np.array([gm.rp_index[rid] for rid in branches.by_sector[sid]], dtype=int),
         np.array(rows, dtype=int))
        for sid, rows in by_serving.items()
    )
    return _Problem(
        gains_mw=10.0 ** (gm.ul_gain_db / 10.0),
        noise_mw=10.0 ** (gm.noise_dbm / 10.0),
        targets_lin=np.array([10.0 ** (m.sinr_target_db / 10.0) for m in mobiles]),
        groups=groups,
        p_min_mw=10.0 ** (s.radio.p_min_dbm / 10.0),
        p_max_mw=10.0 ** (s.radio.p_max_dbm / 10.0),
    )


def _combined_sinr(powers_mw: np.ndarray, problem: _Problem, combining: str) -> np.ndarray:
    """Linear post-combining SINR per MS at its serving sector's branches."""
    gains = problem.gains_mw
    total_rx = powers_mw @ gains                    # per receive point
    out = np.empty(len(powers_mw))
    for cols, rows in problem.groups:
        sub = gains[np.ix_(rows, cols)]
        signal = powers_mw[rows, None] * sub
        interference = total_rx[cols][None, :] - signal
        den = interference + problem.noise_mw[cols][None, :]
        if combining == "mrc":
            lin = (signal / den).sum(axis=1)
        elif combining == "selection":
            lin = (signal / den).max(axis=1)
        elif combining == "egc":
            # (sum_r sqrt(S_r))^2 expanded so a single branch is exact
            num = signal.sum(axis=1)
            n_br = signal.shape[1]
            for a in range(n_br):
                for b in range(a + 1, n_br):
                    num = num + 2.0 * np.sqrt(signal[:, a] * signal[:, b])
            lin = num / den.sum(axis=1)
        else:
            raise ValueError(f"unknown combining mode '{combining}'")
        out[rows] = lin
    return out


def effective_sinr(ms: int, powers_mw: np.ndarray, gm: LinkGainMatrix,
                   assoc: Association, branches: BranchSet, combining: str) -> float:
    """Post-combining SINR (dB) of one MS for the given transmit powers."""
    problem = _problem_from_tables(gm, assoc, branches,
                                   targets_db=np.zeros(len(powers_mw)),
                                   p_min_dbm=-np.inf, p_max_dbm=np.inf)
    lin = _combined_sinr(np.asarray(powers_mw, dtype=float), problem, combining)
    return float(10.0 * np.log10(lin[ms]))


def _problem_from_tables(gm: LinkGainMatrix, assoc: Association, branches: BranchSet,
                         targets_db: np.ndarray, p_min_dbm: float, p_max_dbm: float) -> _Problem:
    by_serving: dict[str, list[int]] = {}
    for i, sid in enumerate(assoc.serving_sector):
        by_serving.setdefault(sid, []).append(i)
    groups = tuple(
        (np.array([gm.rp_index[rid] for rid in branches.by_sector[sid]], dtype=int),
         np.array(rows, dtype=int))
        for sid, rows in by_serving.items()
    )
    return _Problem(
        gains_mw=10.0 ** (gm.ul_gain_db / 10.0),
        noise_mw=10.0 ** (gm.noise_dbm / 10.0),
        targets_lin=10.0 ** (np.asarray(targets_db, dtype=float) / 10.0),
        groups=groups,
        p_min_mw=10.0 ** (p_min_dbm / 10.0),
        p_max_mw=10.0 ** (p_max_dbm / 10.0),
    )


def power_update(powers_mw: np.ndarray, targets_db: np.ndarray, gm: LinkGainMatrix,
                 assoc: Association, branches: BranchSet, combining: str,
                 limits_dbm: tuple[float, float] | None = None) -> np.ndarray:
    """One multiplicative power-control update, p * target / sinr(p).

    With limits_dbm the result is clamped into [p_min, p_max]; without,
    this is the raw interference-function map used by the axiom checks.
    """
    powers_mw = np.asarray(powers_mw, dtype=float)
    lo, hi = limits_dbm if limits_dbm is not None else (-np.inf, np.inf)
    problem = _problem_from_tables(gm, assoc, branches, np.asarray(targets_db, float), lo, hi)
    sinr = _combined_sinr(powers_mw, problem, combining)
    updated = powers_mw * problem.targets_lin / sinr
    if limits_dbm is None:
        return updated
    return np.clip(updated, problem.p_min_mw, problem.p_max_mw)


def power_control_step(powers_mw: np.ndarray, targets_db: np.ndarray, gm: LinkGainMatrix,
                       assoc: Association, branches: BranchSet, combining: str,
                       limits_dbm: tuple[float, float]) -> np.ndarray:
    """Clamped multiplicative update: a 3 dB SINR shortfall raises power 3 dB."""
    return power_update(powers_mw, targets_db, gm, assoc, branches, combining, limits_dbm)


def solve_power_control(s: Scenario, mobiles: list[MobileStation], gm: LinkGainMatrix,
                        assoc: Association, combining: str | None = None,
                        tol_db: float = DEFAULT_TOL_DB, max_iter: int = DEFAULT_MAX_ITER,
                        n_iters: int | None = None) -> PowerControlResult:
    """Solve the interference-coupled power-control fixed point.

    Iterates the clamped update from all-p_min until the largest per-MS
    change drops below tol_db (or max_iter is hit; converged=False then).
    n_iters forces an exact iteration count, used by paired comparisons to
    evaluate both runs of a pair at a common index.

    MSs pinned at p_max that still miss their target by more than
    OUTAGE_MARGIN_DB are flagged as outage.
    """
    if combining is None:
        combining = s.radio.combining
    if combining not in COMBINING_MODES:
        raise ValueError(f"unknown combining mode '{combining}'")
    branches = receive_branches(s)
    problem = _build_problem(s, mobiles, gm, assoc, branches)

    n = len(mobiles)
    powers = np.full(n, problem.p_min_mw)
    iterations = 0
    last_step = 0.0
    total = n_iters if n_iters is not None else max_iter
    for _ in range(total):
        sinr = _combined_sinr(powers, problem, combining)
        updated = np.clip(powers * problem.targets_lin / sinr,
                          problem.p_min_mw, problem.p_max_mw)
        last_step = float(np.max(np.abs(10.0 * np.log10(updated / powers)))) if n else 0.0
        powers = updated
        iterations += 1
        if n_iters is None and last_step < tol_db:
            break
    converged = last_step < tol_db
    if not converged and n_iters is None:
        log.warning("power control did not converge in %d iterations", max_iter)

    sinr_db = 10.0 * np.log10(_combined_sinr(powers, problem, combining)) if n else np.empty(0)
    tx_dbm = 10.0 * np.log10(powers) if n else np.empty(0)
    targets_db = np.array([m.sinr_target_db for m in mobiles])
    pinned = powers >= problem.p_max_mw * (1.0 - 1e-12)
    outage = pinned & (sinr_db < targets_db - OUTAGE_MARGIN_DB)
    for arr in (tx_dbm, sinr_db, outage):
        arr.flags.writeable = False
    return PowerControlResult(
        tx_power_dbm=tx_dbm,
        sinr_db=sinr_db,
        outage=outage,
        iterations=iterations,
        converged=converged,
    )
