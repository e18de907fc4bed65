import math
from pathlib import Path

import numpy as np
import pytest

import rqlab

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_grid_and_spectral_ops():
    g = rqlab.Grid([32])
    x = g.coordinates(0)
    assert x.shape == (32,)
    np.testing.assert_allclose(rqlab.gradient(g, np.sin(x))[0], np.cos(x), atol=1e-13)
    np.testing.assert_allclose(rqlab.laplacian(g, np.sin(2 * x)), -4 * np.sin(2 * x), atol=1e-12)
    np.testing.assert_allclose(rqlab.solve_poisson(g, np.sin(x)), -np.sin(x), atol=1e-13)
    assert rqlab.sobolev_norm(g, np.sin(x), 1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_poisson_rejects_nonzero_mean():
    g = rqlab.Grid([16, 16])
    with pytest.raises(rqlab.RqlabError) as err:
        rqlab.solve_poisson(g, np.ones(g.shape))
    assert err.value.kind == "CompatibilityError"
    assert err.value.exit_code == 3


def test_dispersion_matches_closed_form():
    p = rqlab.Params(epsilon=1.0, upsilon=1.0)
    assert rqlab.dispersion_omega(1.0, p) == pytest.approx(math.sqrt(2) - 1, rel=1e-14)
    assert rqlab.dispersion_omega(1.0, p, "minus") == pytest.approx(-1 - math.sqrt(2), rel=1e-14)


def test_plane_wave_keeps_its_charge_and_hydro_image():
    g = rqlab.Grid([16, 16])
    p = rqlab.Params()
    phi, phi_t = rqlab.plane_wave(g, [1, 0, 0], 1.0, p)
    run = rqlab.kg_solve(g, phi, phi_t, p, 0.5)
    assert run["phi"].shape == (len(run["t"]), 16, 16)
    q = np.array(run["charge"])
    assert np.max(np.abs(q - q[0])) <= 1e-10 * abs(q[0])
    h = rqlab.kg_to_hydro(g, run["phi"][-1], run["phi_t"][-1], p)
    np.testing.assert_allclose(h["n"], 1.0, atol=1e-12)
    assert h["winding"] == [1, 0, 0]
    np.testing.assert_allclose(h["grad_S"][0], 1.0, atol=1e-10)


def test_hydro_round_trip():
    g = rqlab.Grid([64])
    p = rqlab.Params()
    x = g.coordinates(0)
    n0 = 1 + 0.05 * np.sin(x)
    S0 = 0.1 * np.cos(x)
    phi0, phi1 = rqlab.kg_from_hydro(g, n0, np.zeros_like(x), S0, [0, 0, 0], np.zeros_like(x), p)
    h = rqlab.kg_to_hydro(g, phi0, phi1, p)
    np.testing.assert_allclose(h["n"], n0, atol=1e-13)
    np.testing.assert_allclose(h["S_periodic"], S0, atol=1e-12)


def test_fit_order_and_sha():
    assert rqlab.fit_order([0.4, 0.2, 0.1], [0.16, 0.04, 0.01]) == pytest.approx(2.0)
    assert rqlab.sha256_hex("abc").startswith("ba7816bf")


def test_config_validation_and_run(tmp_path):
    rqlab.validate_config_text("mode: kg\ngrid: {points: 16}\n")
    with pytest.raises(rqlab.RqlabError) as err:
        rqlab.validate_config_text("mode: kg\nparams: {upsilon: -1}\n")
    assert err.value.exit_code == 2
    summary = rqlab.run_config(CONFIGS / "identities.yaml", tmp_path / "id")
    assert (tmp_path / "id" / "manifest.json").exists()
    assert rqlab.report(tmp_path / "id")["manifest"]["mode"] == "identities"
    assert isinstance(summary, dict)
