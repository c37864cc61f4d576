"""Fidelity traces, decay-law fits, coherent states, and Husimi sections.

Phase space is the torus (x, y) in [0, 2*pi)^2 with x the scaled position
and y the scaled momentum; momentum index n corresponds to y = n*tau. The
minimum-uncertainty coherent state has position width sigma_x = sqrt(tau/2)
(symmetric: Delta x = Delta y), built as a periodized Gaussian with
winding cutoff |w| <= 3.

Fidelity decay is fitted as -ln f(t) = t/t_c + t^2/(t_c*t_H) (combined), or
with the linear / quadratic term alone, by unweighted least squares over
the window f > 0.05, t >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine as en
from . import staticnoise as sn
from . import tentmap as tm
from .statecore import StateVector

__all__ = [
    "CoherentStateSpec",
    "coherent_state",
    "HusimiGrid",
    "husimi",
    "FidelityTrace",
    "run_fidelity_trace",
    "run_snapshots",
    "DecayFit",
    "fit_decay",
    "RatePoint",
    "rate_sweep",
    "write_trace_csv",
    "write_fits_csv",
    "write_sweep_csv",
    "write_husimi_csv",
    "write_husimi_ppm",
    "COLORMAP",
]

WINDING_CUTOFF = 3
FIT_FLOOR = 0.05


@dataclass(frozen=True)
class CoherentStateSpec:
    """Phase-space center (x in [0, 2*pi), y scaled momentum in [0, 2*pi))."""

    x_center: float
    y_center: float = 0.0


def coherent_state(spec: CoherentStateSpec, n_q: int) -> StateVector:
    """Normalized periodized Gaussian centered at the spec's phase point.

    The momentum center snaps to the nearest integer momentum index
    n0 = round(y/tau); the position profile sums windings |w| <= 3.
    """
    n = 1 << n_q
    tau = 2.0 * math.pi / n
    sigma2 = tau / 2.0
    n0 = int(round(spec.y_center / tau))
    theta = 2.0 * np.pi * np.arange(n) / n
    env = np.zeros(n)
    for w in range(-WINDING_CUTOFF, WINDING_CUTOFF + 1):
        env += np.exp(-((theta - spec.x_center + 2.0 * np.pi * w) ** 2) / (4 * sigma2))
    amp = env * np.exp(1j * n0 * theta)
    return StateVector(n_q, amp / np.linalg.norm(amp))


@dataclass
class HusimiGrid:
    """Coherent-state overlaps |<c(x,y)|psi>|^2 on a phase-space grid.

    values[iy, ix] corresponds to (x_grid()[ix], y_grid()[iy]); both grids
    cover one Brillouin cell [0, 2*pi).
    """

    values: np.ndarray
    n_q: int

    @property
    def dims(self) -> tuple:
        return self.values.shape[1], self.values.shape[0]

    def x_grid(self) -> np.ndarray:
        nx = self.values.shape[1]
        return 2.0 * np.pi * np.arange(nx) / nx

    def y_grid(self) -> np.ndarray:
        ny = self.values.shape[0]
        return 2.0 * np.pi * np.arange(ny) / ny

    def normalization(self) -> float:
        """Discrete sum x cell area / (2*pi*tau); 1 for a normalized state."""
        nx, ny = self.dims
        tau = 2.0 * math.pi / (1 << self.n_q)
        cell = (2.0 * np.pi / nx) * (2.0 * np.pi / ny)
        return float(self.values.sum() * cell / (2.0 * np.pi * tau))


def husimi(state: StateVector, grid_dims: tuple) -> HusimiGrid:
    """Husimi section of a state on an (nx, ny) grid of coherent states."""
    nx, ny = grid_dims
    if nx < 2 or ny < 2:
        raise ValueError(f"grid dims must be >= 2, got {grid_dims}")
    n = state.dim
    tau = 2.0 * math.pi / n
    sigma2 = tau / 2.0
    theta = 2.0 * np.pi * np.arange(n) / n
    xs = 2.0 * np.pi * np.arange(nx) / nx
    # periodized Gaussian envelope for every column offset: (nx, N)
    env = np.zeros((nx, n))
    for w in range(-WINDING_CUTOFF, WINDING_CUTOFF + 1):
        env += np.exp(-((theta[None, :] - xs[:, None] + 2.0 * np.pi * w) ** 2) / (4 * sigma2))
    env_norm = env / np.linalg.norm(env, axis=1, keepdims=True)
    values = np.empty((ny, nx))
    for iy in range(ny):
        n0 = int(round((2.0 * np.pi * iy / ny) / tau))
        weighted = state.amp * np.exp(-1j * n0 * theta)  # conj of the momentum factor
        values[iy] = np.abs(env_norm @ weighted) ** 2
    return HusimiGrid(values, state.n_q)


@dataclass
class FidelityTrace:
    """Disorder-averaged fidelity f(t) with per-seed curves retained."""

    times: np.ndarray
    f_mean: np.ndarray
    f_stderr: np.ndarray
    per_seed: np.ndarray  # (n_seeds, n_times)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if abs(self.f_mean[0] - 1.0) > 1e-9:
            raise ValueError("fidelity trace must start at f(0) = 1")


def _mode_label(mode: str, n_gef) -> str:
    return "none" if mode == "none" else f"parec({n_gef})"


def run_fidelity_trace(
    params: tm.TentMapParams,
    init: CoherentStateSpec,
    epsilon: float,
    seeds,
    mode: str = "none",
    t_max: int = 1000,
    sample_every: int = 10,
    n_gef: int | None = None,
    frame_seed: int = 0,
    pauli_layer_delay: bool = False,
    circuit=None,
) -> FidelityTrace:
    """Evolve ideal (exact map) vs perturbed (lowered circuit) states.

    One disorder lane per seed, all run in a single compiled batch; in parec
    mode each lane draws frames from an independent stream derived from
    (frame_seed, disorder seed).
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    if mode not in ("none", "parec"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "parec" and (n_gef is None or n_gef < 1):
        raise ValueError("parec mode requires n_gef >= 1")
    seeds = list(seeds)
    if circuit is None:
        circuit = tm.build_circuit(params)
    init_state = coherent_state(init, params.n_q)
    imps = [sn.sample(params.n_q, epsilon, s) for s in seeds]
    frame_seeds = [[frame_seed, s] for s in seeds]
    times, fids, _ = en.trace_batch(
        params,
        circuit,
        init_state.amp,
        imps,
        n_gef if mode == "parec" else None,
        frame_seeds,
        t_max,
        sample_every,
        pauli_layer_delay=pauli_layer_delay,
    )
    mean = fids.mean(axis=0)
    if len(seeds) > 1:
        stderr = fids.std(axis=0, ddof=1) / math.sqrt(len(seeds))
    else:
        stderr = np.zeros_like(mean)
    meta = {
        "n_q": params.n_q,
        "K": params.K,
        "epsilon": epsilon,
        "mode": _mode_label(mode, n_gef),
        "n_gef": n_gef,
        "seeds": seeds,
        "frame_seed": frame_seed,
        "init_x": init.x_center,
        "init_y": init.y_center,
        "t_max": t_max,
        "sample_every": sample_every,
        "n_standard_gates": circuit.n_standard_gates,
    }
    return FidelityTrace(times, mean, stderr, fids, meta)


def run_snapshots(
    params: tm.TentMapParams,
    init: CoherentStateSpec,
    epsilon: float,
    seed: int,
    mode: str,
    t_list,
    n_gef: int | None = None,
    frame_seed: int = 0,
    circuit=None,
):
    """Perturbed-state snapshots at the requested iteration counts.

    mode "ideal" evolves by the exact map only; "none" and "parec" evolve
    through the noisy circuit. Returns {t: StateVector} in the computational
    basis (frames peeled off).
    """
    t_list = sorted(set(int(t) for t in t_list))
    if t_list and t_list[0] < 0:
        raise ValueError("snapshot times must be >= 0")
    init_state = coherent_state(init, params.n_q)
    out = {}
    if mode == "ideal":
        amp = init_state.amp.copy()
        t_prev = 0
        for t in t_list:
            for _ in range(t - t_prev):
                amp = tm.exact_map_amplitudes(amp, params)
            t_prev = t
            out[t] = StateVector(params.n_q, amp.copy())
        return out
    if circuit is None:
        circuit = tm.build_circuit(params)
    cc = en.CompiledCircuit(circuit, params.n_q)
    imps = [sn.sample(params.n_q, epsilon, seed)]
    runner = en.BatchRunner(
        cc,
        init_state.amp[None, :],
        imps,
        n_gef=n_gef if mode == "parec" else None,
        frame_seeds=[[frame_seed, seed]],
    )
    t_prev = 0
    for t in t_list:
        runner.advance_iterations(t - t_prev)
        t_prev = t
        out[t] = StateVector(params.n_q, runner.unframed_amplitudes()[0])
    return out


@dataclass
class DecayFit:
    """Fitted decay -ln f = c1*t + c2*t^2 in one of three restricted forms.

    t_c = 1/c1 and t_H = c1/c2 for the combined model; the pure quadratic
    model only identifies the product t_c*t_H = 1/c2 and reports the
    symmetric split t_c = t_H = 1/sqrt(c2).
    """

    model: str
    t_c: float
    t_H: float
    linear_coeff: float
    quad_coeff: float
    residual: float

    def rate(self) -> float:
        return self.linear_coeff

    def quadratic_fraction(self, t: float) -> float:
        """Share of the fitted -ln f at time t carried by the t^2 term."""
        lin = abs(self.linear_coeff) * t
        quad = abs(self.quad_coeff) * t * t
        if lin + quad == 0.0:
            return 0.0
        return quad / (lin + quad)


def fit_decay(trace: FidelityTrace, model: str = "combined") -> DecayFit:
    """Unweighted least squares of -ln f(t) over the window f > 0.05, t >= 1."""
    if model not in ("linear", "quadratic", "combined"):
        raise ValueError(f"unknown model {model!r}")
    mask = (trace.f_mean > FIT_FLOOR) & (trace.times >= 1)
    t = trace.times[mask].astype(float)
    if t.size < 5:
        raise ValueError(
            f"need >= 5 trace points with f > {FIT_FLOOR}, have {t.size}"
        )
    y = -np.log(trace.f_mean[mask])
    if model == "linear":
        c1 = float(t @ y / (t @ t)) if t @ t > 0 else 0.0
        c2 = 0.0
        fit = c1 * t
    elif model == "quadratic":
        t2 = t * t
        c2 = float(t2 @ y / (t2 @ t2))
        c1 = 0.0
        fit = c2 * t2
    else:
        a = np.stack([t, t * t], axis=1)
        (c1, c2), *_ = np.linalg.lstsq(a, y, rcond=None)
        c1, c2 = float(c1), float(c2)
        fit = c1 * t + c2 * t * t
    residual = float(np.sqrt(np.mean((y - fit) ** 2)))

    if model == "linear":
        t_c = 1.0 / c1 if c1 > 0 else math.inf
        t_h = math.nan
    elif model == "quadratic":
        t_c = t_h = 1.0 / math.sqrt(c2) if c2 > 0 else math.inf
    else:
        t_c = 1.0 / c1 if c1 != 0 else math.inf
        t_h = c1 / c2 if c2 != 0 else math.inf
    return DecayFit(model, t_c, t_h, c1, c2, residual)


@dataclass
class RatePoint:
    value: float
    rate: float
    a_implied: float


def rate_sweep(
    axis: str,
    values,
    base: dict,
    seeds,
) -> list:
    """Measured PAREC decay rate 1/t_c per swept value, plus the implied
    rate-law constant a = rate / (eps^2 * n_q * n_standard_gates * n_gef).
    """
    if axis not in ("epsilon", "n_gef", "n_q"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    values = list(values)
    if len(values) < 2:
        raise ValueError("sweep needs at least 2 values")
    out = []
    for v in values:
        cfg = dict(base)
        cfg[axis] = v if axis == "epsilon" else int(v)
        params = tm.TentMapParams(cfg["n_q"], cfg["K"])
        circuit = tm.build_circuit(params)
        trace = run_fidelity_trace(
            params,
            CoherentStateSpec(cfg.get("init_x", math.pi / 4), cfg.get("init_y", 0.0)),
            cfg["epsilon"],
            seeds,
            mode="parec",
            t_max=cfg["t_max"],
            sample_every=cfg["sample_every"],
            n_gef=cfg["n_gef"],
            frame_seed=cfg.get("frame_seed", 0),
            circuit=circuit,
        )
        fit = fit_decay(trace, "linear")
        rate = fit.rate()
        denom = cfg["epsilon"] ** 2 * cfg["n_q"] * circuit.n_standard_gates * cfg["n_gef"]
        out.append(RatePoint(float(v), rate, rate / denom))
    return out


# --- file output ------------------------------------------------------------

def _header_lines(config: dict) -> list:
    return [f"# {k} = {config[k]}" for k in sorted(config)]


def write_trace_csv(path, trace: FidelityTrace) -> None:
    lines = _header_lines(trace.metadata)
    lines.append("t,f_mean,f_stderr")
    for t, f, s in zip(trace.times, trace.f_mean, trace.f_stderr):
        lines.append(f"{int(t)},{float(f)!r},{float(s)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_fits_csv(path, fits, config: dict) -> None:
    lines = _header_lines(config)
    lines.append("model,t_c,t_H,residual,linear_coeff,quad_coeff")
    for f in fits:
        lines.append(
            f"{f.model},{float(f.t_c)!r},{float(f.t_H)!r},{float(f.residual)!r},"
            f"{float(f.linear_coeff)!r},{float(f.quad_coeff)!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path, axis: str, points, config: dict) -> None:
    lines = _header_lines(config)
    lines.append(f"# swept axis: {axis}")
    lines.append("value,rate,a_implied")
    for p in points:
        lines.append(f"{float(p.value)!r},{float(p.rate)!r},{float(p.a_implied)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_husimi_csv(path, grid: HusimiGrid, config: dict) -> None:
    lines = _header_lines(config)
    lines.append(f"# rows: y index 0..{grid.values.shape[0] - 1}; columns: x")
    for row in grid.values:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# 256-entry blue->red lookup table: linear interpolation from (0,0,255) at
# zero density to (255,0,0) at the grid maximum.
COLORMAP = np.stack(
    [
        np.round(np.linspace(0, 255, 256)).astype(np.uint8),
        np.zeros(256, dtype=np.uint8),
        np.round(np.linspace(255, 0, 256)).astype(np.uint8),
    ],
    axis=1,
)


def write_husimi_ppm(path, grid: HusimiGrid, config: dict) -> None:
    """Binary 8-bit PPM; row 0 is the top of the image (largest y)."""
    vmax = float(grid.values.max())
    scaled = grid.values / vmax if vmax > 0 else grid.values
    idx = np.minimum((scaled * 255).astype(np.int64), 255)
    rgb = COLORMAP[idx[::-1, :]]  # flip so y increases upward in the image
    header_comments = "".join(f"# {k} = {config[k]}\n" for k in sorted(config))
    ny, nx = grid.values.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{header_comments}{nx} {ny}\n255\n".encode())
        fh.write(rgb.astype(np.uint8).tobytes())
