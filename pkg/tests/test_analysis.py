"""Coherent states, Husimi grids, trace running, and decay fitting."""

import math

import numpy as np
import pytest

from parecsim import analysis as an
from parecsim import statecore as sc
from parecsim import tentmap as tm
from conftest import random_vec


# --- coherent states --------------------------------------------------------

def test_coherent_state_peak_and_symmetry():
    s = an.coherent_state(an.CoherentStateSpec(np.pi, 0.0), 8)
    prob = np.abs(s.amp) ** 2
    assert prob.argmax() == 128
    # mirror symmetry about the center
    for k in range(1, 40):
        assert prob[128 + k] == pytest.approx(prob[128 - k], abs=1e-10)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


def test_coherent_state_overlap_matches_gaussian_formula():
    # centers 2*pi/sqrt(N) apart: |<c1|c2>| = exp(-dx^2/(8 sigma^2)) = exp(-pi/2),
    # independent of N; periodization corrections < 1e-8 at n_q = 8
    n_q = 8
    dx = 2 * np.pi / math.sqrt(1 << n_q)
    c1 = an.coherent_state(an.CoherentStateSpec(np.pi, 0.0), n_q)
    c2 = an.coherent_state(an.CoherentStateSpec(np.pi + dx, 0.0), n_q)
    ov = abs(np.vdot(c1.amp, c2.amp))
    assert ov == pytest.approx(math.exp(-math.pi / 2), abs=1e-8)
    assert 0.0 < ov < 1.0


def test_coherent_state_momentum_center():
    s = an.coherent_state(an.CoherentStateSpec(np.pi, 0.0), 8)
    mom = np.abs(sc.fourier_kernel(s.amp)) ** 2
    assert mom.argmax() == 0  # n = 0 for y_center = 0

    tau = 2 * np.pi / 256
    s5 = an.coherent_state(an.CoherentStateSpec(np.pi, 5 * tau), 8)
    mom5 = np.abs(sc.fourier_kernel(s5.amp)) ** 2
    assert mom5.argmax() == 5


# --- husimi -----------------------------------------------------------------

def test_husimi_peak_at_own_center():
    s = an.coherent_state(an.CoherentStateSpec(2.0, 1.0), 6)
    g = an.husimi(s, (64, 64))
    iy, ix = np.unravel_index(g.values.argmax(), g.values.shape)
    assert abs(g.x_grid()[ix] - 2.0) < 2 * np.pi / 64 + 1e-9
    # y center snaps to the nearest momentum index
    tau = 2 * np.pi / 64
    y_snap = round(1.0 / tau) * tau
    assert abs(g.y_grid()[iy] - y_snap) < 2 * np.pi / 64 + 1e-9


def test_husimi_normalization_random_states():
    rng = np.random.default_rng(1)
    for _ in range(10):
        s = sc.StateVector(6, random_vec(6, rng))
        g = an.husimi(s, (64, 64))
        assert abs(g.normalization() - 1.0) < 1e-6
        assert np.all(g.values >= 0)


def test_husimi_flat_state_translation_invariance():
    flat = sc.StateVector(6, np.full(64, 1 / 8.0, dtype=complex))
    g = an.husimi(flat, (64, 64))
    row = g.values[0]  # y = 0 row
    assert (row.max() - row.min()) / row.mean() < 0.05


def test_husimi_rejects_degenerate_grid():
    s = sc.basis_state(3, 0)
    with pytest.raises(ValueError):
        an.husimi(s, (1, 8))
    g = an.husimi(s, (2, 2))
    assert g.values.shape == (2, 2)


# --- traces -----------------------------------------------------------------

@pytest.fixture(scope="module")
def params4():
    return tm.TentMapParams(4, 1.7)


def test_trace_epsilon_zero_all_ones(params4):
    tr = an.run_fidelity_trace(
        params4, an.CoherentStateSpec(np.pi / 4), 0.0, [0, 1],
        mode="none", t_max=6, sample_every=2,
    )
    assert np.all(tr.f_mean > 1 - 1e-9)
    assert tr.times[0] == 0 and tr.f_mean[0] == pytest.approx(1.0)


def test_trace_parec_epsilon_zero_all_ones(params4):
    tr = an.run_fidelity_trace(
        params4, an.CoherentStateSpec(np.pi / 4), 0.0, [0, 1],
        mode="parec", n_gef=10, t_max=6, sample_every=2,
    )
    assert np.all(tr.f_mean > 1 - 1e-9)
    assert tr.metadata["mode"] == "parec(10)"


def test_trace_deterministic(params4):
    kw = dict(mode="parec", n_gef=7, t_max=5, sample_every=1, frame_seed=3)
    a = an.run_fidelity_trace(params4, an.CoherentStateSpec(1.0), 1e-4, [5, 6], **kw)
    b = an.run_fidelity_trace(params4, an.CoherentStateSpec(1.0), 1e-4, [5, 6], **kw)
    np.testing.assert_array_equal(a.per_seed, b.per_seed)


def test_trace_decays_with_noise(params4):
    tr = an.run_fidelity_trace(
        params4, an.CoherentStateSpec(np.pi / 4), 1e-3, [0, 1, 2],
        mode="none", t_max=30, sample_every=5,
    )
    assert tr.f_mean[-1] < 0.999
    assert np.all(np.diff(tr.times) > 0)


def test_trace_validation(params4):
    with pytest.raises(ValueError, match="mode"):
        an.run_fidelity_trace(
            params4, an.CoherentStateSpec(1.0), 0.0, [0], mode="bogus", t_max=2,
        )
    with pytest.raises(ValueError, match="n_gef"):
        an.run_fidelity_trace(
            params4, an.CoherentStateSpec(1.0), 0.0, [0], mode="parec", t_max=2,
        )


def test_snapshots_ideal_and_noisy(params4):
    snaps = an.run_snapshots(
        params4, an.CoherentStateSpec(np.pi / 4), 0.0, 0, "ideal", [0, 3],
    )
    init = an.coherent_state(an.CoherentStateSpec(np.pi / 4), 4)
    np.testing.assert_allclose(snaps[0].amp, init.amp, atol=1e-12)
    ref = init.copy()
    for _ in range(3):
        tm.apply_exact_map(ref, params4)
    np.testing.assert_allclose(snaps[3].amp, ref.amp, atol=1e-12)

    noisy = an.run_snapshots(
        params4, an.CoherentStateSpec(np.pi / 4), 1e-4, 0, "none", [3],
    )
    assert sc.fidelity(noisy[3], ref) < 1.0 - 1e-9
    assert sc.fidelity(noisy[3], ref) > 0.9


# --- fitting ----------------------------------------------------------------

def synthetic_trace(times, y):
    f = np.exp(-np.asarray(y, dtype=float))
    return an.FidelityTrace(
        np.asarray(times), f, np.zeros_like(f), f[None, :], {}
    )


def test_fit_linear_exact():
    t = np.arange(0, 2001, 100)
    tr = synthetic_trace(t, 2e-6 * t)
    fit = an.fit_decay(tr, "linear")
    assert fit.t_c == pytest.approx(5e5, rel=1e-9)
    assert fit.residual < 1e-12


def test_fit_combined_exact():
    t = np.arange(0, 3001, 100)
    tr = synthetic_trace(t, 2e-6 * t + 1e-9 * t**2)
    fit = an.fit_decay(tr, "combined")
    assert fit.t_c == pytest.approx(5e5, rel=1e-6)
    assert fit.t_c * fit.t_H == pytest.approx(1e9, rel=1e-6)
    assert fit.t_H == pytest.approx(2000, rel=1e-6)
    assert fit.residual < 1e-10


def test_fit_constant_trace_zero_rate():
    t = np.arange(0, 1001, 100)
    tr = synthetic_trace(t, np.zeros_like(t, dtype=float))
    fit = an.fit_decay(tr, "linear")
    assert fit.rate() == 0.0
    assert fit.t_c == math.inf


def test_fit_quadratic_symmetric_split():
    t = np.arange(0, 1001, 50)
    tr = synthetic_trace(t, 4e-8 * t**2)
    fit = an.fit_decay(tr, "quadratic")
    assert fit.t_c == fit.t_H == pytest.approx(5000, rel=1e-9)
    assert fit.t_c > 0 and fit.t_H > 0


def test_fit_window_excludes_decayed_tail():
    t = np.arange(0, 301, 10)
    y = 0.02 * t  # f < 0.05 beyond t = 150
    tr = synthetic_trace(t, y)
    fit = an.fit_decay(tr, "linear")
    assert fit.t_c == pytest.approx(50, rel=1e-9)

    short = synthetic_trace([0, 1, 2, 3], [0, 1e-3, 2e-3, 3e-3])
    with pytest.raises(ValueError, match=">= 5"):
        an.fit_decay(short, "linear")


def test_fit_quadratic_fraction():
    fit = an.DecayFit("combined", 1e4, 1e3, 1e-4, 1e-7, 0.0)
    # at t = 1000: linear 0.1, quad 0.1 -> one half
    assert fit.quadratic_fraction(1000) == pytest.approx(0.5)
    assert an.DecayFit("linear", 1e4, math.nan, 0.0, 0.0, 0.0).quadratic_fraction(10) == 0.0


def test_stderr_shrinks_with_seed_count(params4):
    # averaged-trace standard error ~ 1/sqrt(n_seeds): batch means over
    # disjoint seed batches of sizes 4, 16, 64 from one 320-seed population
    tr = an.run_fidelity_trace(
        params4, an.CoherentStateSpec(np.pi / 4), 2e-4, list(range(320)),
        mode="none", t_max=16, sample_every=16,
    )
    assert tr.f_stderr[-1] == pytest.approx(
        tr.per_seed[:, -1].std(ddof=1) / np.sqrt(320)
    )
    f = tr.per_seed[:, -1]
    spread = {
        s: f.reshape(-1, s).mean(axis=1).std(ddof=1) for s in (4, 16, 64)
    }
    assert 1.4 < spread[4] / spread[16] < 2.9  # expect 2
    assert 2.0 < spread[4] / spread[64] < 8.0  # expect 4, few batches at 64


# --- sweeps and files -------------------------------------------------------

def test_rate_sweep_degenerate_determinism():
    base = dict(n_q=4, K=1.7, epsilon=2e-3, n_gef=10, t_max=40, sample_every=4)
    pts = an.rate_sweep("epsilon", [2e-3, 2e-3], base, seeds=[0, 1])
    assert pts[0].rate == pts[1].rate
    assert pts[0].a_implied == pytest.approx(pts[1].a_implied)
    with pytest.raises(ValueError, match="at least 2"):
        an.rate_sweep("epsilon", [1e-3], base, seeds=[0])


def test_csv_writers_embed_config(tmp_path):
    t = np.arange(0, 501, 100)
    tr = synthetic_trace(t, 1e-4 * t)
    tr.metadata.update({"n_q": 4, "epsilon": 1e-5, "seeds": [0, 1]})
    p = tmp_path / "trace.csv"
    an.write_trace_csv(p, tr)
    text = p.read_text()
    assert "# epsilon = 1e-05" in text
    assert "t,f_mean,f_stderr" in text
    rows = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert len(rows) == 1 + len(t)

    fit = an.fit_decay(tr, "combined")
    p2 = tmp_path / "fits.csv"
    an.write_fits_csv(p2, [fit], {"epsilon": 1e-5})
    assert "model,t_c" in p2.read_text()

    p3 = tmp_path / "sweep.csv"
    an.write_sweep_csv(p3, "epsilon", [an.RatePoint(1e-5, 2e-6, 1.0)], {"n_gef": 20})
    assert "value,rate,a_implied" in p3.read_text()


def test_husimi_file_outputs(tmp_path):
    s = an.coherent_state(an.CoherentStateSpec(2.0, 1.0), 5)
    g = an.husimi(s, (16, 16))
    pcsv = tmp_path / "h.csv"
    an.write_husimi_csv(pcsv, g, {"t": 0})
    rows = [l for l in pcsv.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 16 and len(rows[0].split(",")) == 16

    pppm = tmp_path / "h.ppm"
    an.write_husimi_ppm(pppm, g, {"t": 0})
    blob = pppm.read_bytes()
    assert blob.startswith(b"P6\n")
    lines = blob.split(b"\n")
    dims_line = [l for l in lines if l and not l.startswith(b"#") and l != b"P6"][0]
    nx, ny = map(int, dims_line.split())
    assert (nx, ny) == (16, 16)
    payload = blob.split(b"255\n", 1)[1]
    assert len(payload) == nx * ny * 3


def test_colormap_endpoints():
    assert tuple(an.COLORMAP[0]) == (0, 0, 255)   # zero density: blue
    assert tuple(an.COLORMAP[255]) == (255, 0, 0)  # maximum: red
