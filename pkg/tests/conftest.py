"""Shared fixtures: figure-caption parameter sets and the pinned reference set.

The expensive artifacts (64-path certificate, the four reference orbits,
and the 3-symbol extension run) are session-scoped so the acceptance
module and the unit tests share one computation.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from switched_nagumo import (
    ModelParams,
    build_regions,
    certify_horseshoe,
    find_periodic,
)
from switched_nagumo.cli import parse_config

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def ref_cfg():
    return parse_config((ROOT / "configs" / "reference.cfg").read_text())


@pytest.fixture(scope="session")
def ref_params(ref_cfg):
    return ModelParams(g=ref_cfg["g"], a=ref_cfg["a"], n0=ref_cfg["n0"],
                       n1=float(ref_cfg["n1"]), alpha=ref_cfg["alpha"],
                       beta=ref_cfg["beta"])


@pytest.fixture(scope="session")
def ref_regions(ref_params, ref_cfg):
    return build_regions(ref_params, pbar0=ref_cfg["pbar0"],
                         mu_bar=float(ref_cfg["mu_bar"]))


@pytest.fixture(scope="session")
def fig_params():
    """Parameters of the narrative phase-plane figures (g=0.1, a=0.4)."""
    return ModelParams(g=0.1, a=0.4, n0=0.1, n1=10.0, alpha=4.0, beta=6.0)


@pytest.fixture(scope="session")
def certificate64(ref_params, ref_cfg):
    """Full-strength certificate at the pinned set (criterion 7)."""
    t0 = time.time()
    cert = certify_horseshoe(ref_params, pbar0=ref_cfg["pbar0"],
                             mu_bar=float(ref_cfg["mu_bar"]),
                             n_paths=int(ref_cfg["paths"]))
    cert.runtime = time.time() - t0
    return cert


@pytest.fixture(scope="session")
def ref_orbits(ref_params, ref_regions):
    """The four reference orbits (criterion 8), with seeding reuse."""
    t0 = time.time()
    orbits = {}
    orbits["1"] = find_periodic(ref_params, ref_regions, "1")
    orbits["2"] = find_periodic(ref_params, ref_regions, "2")
    seeds = {1: orbits["1"], 2: orbits["2"]}
    orbits["1,2"] = find_periodic(ref_params, ref_regions, "1,2",
                                  seed_orbits=seeds)
    orbits["1,1,2"] = find_periodic(ref_params, ref_regions, "1,1,2",
                                    seed_orbits=seeds)
    runtime = time.time() - t0
    return orbits, runtime


@pytest.fixture(scope="session")
def p3_setup(ref_params, ref_cfg):
    """The 3-symbol extension at scan-found larger n1 (criterion 10)."""
    params = ModelParams(g=ref_params.g, a=ref_params.a, n0=ref_params.n0,
                         n1=60.0, alpha=ref_params.alpha, beta=ref_params.beta)
    cert = certify_horseshoe(params, pbar0=ref_cfg["pbar0"],
                             mu_bar=float(ref_cfg["mu_bar"]), p_symbols=3,
                             n_paths=32, rtol=1e-11, atol=1e-13,
                             refine_tol=1e-13)
    return params, cert
