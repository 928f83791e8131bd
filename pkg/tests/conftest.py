"""Shared fixtures: each heavy pipeline (warmup + PSS + monodromy) runs
once per session and is reused by unit and acceptance tests."""

from __future__ import annotations

from types import SimpleNamespace

import pytest

import oscq


def run_pipeline(
    name,
    overrides=None,
    steps_per_cycle=2000,
    method="trapezoidal",
    mode="auto",
    unit_tol=oscq.UNIT_TOL_DEFAULT,
):
    spec = oscq.get_model(name)
    dae = spec.build(overrides or {})
    cfg = oscq.IntegratorConfig(method=method, steps_per_cycle=steps_per_cycle)
    pss = oscq.auto_pss(dae, spec.seed_state, spec.hint(dae.params), cfg, mode=mode)
    xT = oscq.fundamental_matrix(dae, pss)
    multipliers = oscq.eigen_spectrum(xT)
    report = oscq.q_factor(multipliers, unit_tol=unit_tol, period=pss.period)
    return SimpleNamespace(
        spec=spec,
        dae=dae,
        cfg=cfg,
        pss=pss,
        xT=xT,
        multipliers=multipliers,
        report=report,
    )


@pytest.fixture(scope="session")
def ring100():
    return run_pipeline("ring")


@pytest.fixture(scope="session")
def ring50():
    return run_pipeline("ring", {"s": 50.0})


@pytest.fixture(scope="session")
def ring20():
    return run_pipeline("ring", {"s": 20.0})


@pytest.fixture(scope="session")
def ring100_fine():
    return run_pipeline("ring", steps_per_cycle=4000)


@pytest.fixture(scope="session")
def lc_k1():
    return run_pipeline("lc")


@pytest.fixture(scope="session")
def lc_k5():
    return run_pipeline("lc", {"K": 5.0})


@pytest.fixture(scope="session")
def lc_k20():
    return run_pipeline("lc", {"K": 20.0})


@pytest.fixture(scope="session")
def lc_k1_fine():
    return run_pipeline("lc", steps_per_cycle=4000)


@pytest.fixture(scope="session")
def chem():
    return run_pipeline("chemical")


@pytest.fixture(scope="session")
def stno_sph():
    return run_pipeline("stno-spherical")


@pytest.fixture(scope="session")
def stno_cart():
    return run_pipeline("stno-cartesian")
