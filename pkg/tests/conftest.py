"""Shared builders: tiny scenario documents, hand-placed mobiles, and
synthetic channel tables that bypass the propagation layer."""

import json
from pathlib import Path

import numpy as np
import pytest

from greenant.powerctl import Association, BranchSet
from greenant.propagation import LinkGainMatrix, ReceivePoint
from greenant.scenario import AntennaPattern, MobileStation, load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

BASELINE_JSON = SCENARIO_DIR / "baseline.json"
GREEN_JSON = SCENARIO_DIR / "green.json"


def two_cell_doc(with_green=False, sigma=0.0, targets=(-12.0, -12.0),
                 mobiles_per_sector=2, indoor_fraction=0.0, buildings=()):
    """Two single-sector omni sites 2 km apart; optionally one green near B."""
    doc = {
        "sites": [
            {"id": "A", "position": [0, 0],
             "sectors": [{"id": "A1", "azimuth_deg": 0,
                          "antenna": {"kind": "omni", "gain_dbi": 10}}]},
            {"id": "B", "position": [2000, 0],
             "sectors": [{"id": "B1", "azimuth_deg": 0,
                          "antenna": {"kind": "omni", "gain_dbi": 10}}]},
        ],
        "radio": {"shadowing_sigma_db": {"open": sigma, "suburban": sigma, "urban": sigma}},
        "traffic": {
            "mobiles_per_sector": mobiles_per_sector,
            "indoor_fraction": indoor_fraction,
            "sinr_target_db": {"voice": targets[0], "data": targets[1]},
        },
    }
    if buildings:
        doc["clutter"] = {"buildings": list(buildings)}
    if with_green:
        doc["greens"] = [{"id": "G", "position": [1600, 0],
                          "antenna": {"kind": "omni", "gain_dbi": 10},
                          "attached_sectors": ["A1"]}]
    return doc


def load_doc(doc):
    return load_scenario(json.dumps(doc))


def place(idx, x, y, indoor=False, building_id=None, target_db=-12.0):
    """A hand-placed mobile for constructed (non-random) snapshots."""
    return MobileStation(id=idx, position=(float(x), float(y)), indoor=indoor,
                         building_id=building_id, service="data",
                         sinr_target_db=target_db)


def make_tables(ul_gain_db, n_sectors, serving, noise_dbm=-104.0, attach=None):
    """Synthetic LinkGainMatrix + Association + BranchSet.

    ul_gain_db: (n_ms, n_rp) with sector columns first, green columns after.
    serving: per-MS sector index. attach: {sector_id: [green ids]}.
    """
    ul = np.asarray(ul_gain_db, dtype=float)
    n_ms, n_rp = ul.shape
    sector_ids = tuple(f"s{k}" for k in range(n_sectors))
    green_ids = tuple(f"g{k}" for k in range(n_rp - n_sectors))
    pattern = AntennaPattern()
    rps = [ReceivePoint(kind="sector", id=sid, position=(0.0, 0.0), antenna=pattern,
                        azimuth_deg=0.0, sector_ids=(sid,)) for sid in sector_ids]
    rps += [ReceivePoint(kind="green", id=gid, position=(0.0, 0.0), antenna=pattern,
                         azimuth_deg=0.0, sector_ids=()) for gid in green_ids]

    dl = np.full((n_ms, n_sectors), -90.0)
    rows = np.arange(n_ms)
    serving = np.asarray(serving, dtype=int)
    dl[rows, serving] = -60.0
    gm = LinkGainMatrix(
        ms_ids=tuple(range(n_ms)),
        receive_points=tuple(rps),
        sector_ids=sector_ids,
        ul_gain_db=ul,
        dl_rx_dbm=dl,
        noise_dbm=np.full(n_rp, float(noise_dbm)),
        seed=0,
    )
    assoc = Association(
        serving_sector=tuple(sector_ids[i] for i in serving),
        serving_index=serving,
        dl_rx_dbm=dl[rows, serving],
    )
    by_sector = {sid: (sid,) for sid in sector_ids}
    for sid, gids in (attach or {}).items():
        by_sector[sid] = by_sector[sid] + tuple(gids)
    return gm, assoc, BranchSet(by_sector=by_sector)


def random_instance(rng, max_ms=20, max_sectors=5, green_prob=0.5):
    """Random synthetic instance for property tests.

    Returns (gm, assoc, branches, targets_db). Gains span a wide dynamic
    range so interference-dominated and noise-dominated cases both occur.
    """
    n_ms = int(rng.integers(1, max_ms + 1))
    n_sec = int(rng.integers(1, max_sectors + 1))
    n_green = int(rng.integers(0, 3)) if rng.random() < green_prob else 0
    ul = rng.uniform(-130.0, -70.0, size=(n_ms, n_sec + n_green))
    serving = rng.integers(0, n_sec, size=n_ms)
    attach = {}
    for k in range(n_green):
        sec = int(rng.integers(0, n_sec))
        attach.setdefault(f"s{sec}", []).append(f"g{k}")
    gm, assoc, branches = make_tables(ul, n_sec, serving, attach=attach)
    targets = rng.uniform(-15.0, 9.0, size=n_ms)
    return gm, assoc, branches, targets


@pytest.fixture
def two_cell():
    return load_doc(two_cell_doc())


@pytest.fixture
def two_cell_green():
    return load_doc(two_cell_doc(with_green=True))
