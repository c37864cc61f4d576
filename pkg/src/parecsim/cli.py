"""Batch front-end: experiment configuration, orchestration, and file output.

Configuration is a flat key=value text file (# comments) with command-line
overrides; presets bundle the reference experiment parameters. Every output
file embeds the full configuration and seeds in header comments so a run can
be reproduced from any of its artifacts.

Subcommands:
  fidelity      disorder-averaged fidelity trace(s) + decay fits + report
  husimi        phase-space grids (CSV + PPM) for ideal/static/parec states
  sweep         measured decay rate vs epsilon, n_gef, or n_q
  validate      fast self-checks (kernel oracles, conjugation rules, ...)
  tentmap-dump  lowered tent-map circuit in the gate-set text format

The worker-pool width for fanning out independent runs is taken from the
PARECSIM_WORKERS environment variable (default 1); everything else comes
from the config file or flags.
"""

from __future__ import annotations

import argparse
import math
import multiprocessing as mp
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import analysis as an
from . import engine as en
from . import gateset as gs
from . import parec as pc
from . import statecore as sc
from . import staticnoise as sn
from . import tentmap as tm

__all__ = ["RunConfig", "main", "run_validation_checks"]


@dataclass
class RunConfig:
    n_q: int = 10
    K: float = 1.7
    epsilon: float = 5e-6
    mode: str = "none"  # comma-separated list of none | parec(<n_gef>) | parec
    n_gef: int = 20
    t_max: int = 3000
    sample_every: int = 50
    seeds: tuple = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)
    frame_seed: int = 0
    init_x: float = math.pi / 4
    init_y: float = 0.0
    backend: str = "trotter"  # exact | trotter (reference paths only)
    grid_x: int = 128
    grid_y: int = 128
    outdir: str = "out"

    def validate(self) -> None:
        if self.n_q < 2:
            raise ValueError("n_q must be >= 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.n_gef < 1:
            raise ValueError("n_gef must be >= 1")
        if self.backend not in ("trotter", "exact"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        for m in self.mode_list():
            if m[0] not in ("none", "parec"):
                raise ValueError(f"unknown mode {m[0]!r}")

    def mode_list(self) -> list:
        """Parse the mode field into (kind, n_gef) pairs."""
        out = []
        for tok in str(self.mode).split(","):
            tok = tok.strip()
            if not tok:
                continue
            if tok == "none":
                out.append(("none", None))
            elif tok == "parec":
                out.append(("parec", self.n_gef))
            elif tok.startswith("parec(") and tok.endswith(")"):
                arg = tok[6:-1]
                if arg == "n_g":
                    out.append(("parec", "n_g"))
                else:
                    out.append(("parec", int(arg)))
            else:
                out.append((tok, None))
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = ",".join(str(s) for s in self.seeds)
        return d


PRESETS = {
    # reference phase-space reproduction, chaotic-region initial state
    "fig2-left": {
        "n_q": 10, "K": 1.7, "epsilon": 5e-6, "n_gef": 20, "t_max": 3000,
        "init_x": math.pi / 4, "init_y": 0.0, "mode": "none",
    },
    # same, initial state near the regular island
    "fig2-right": {
        "n_q": 10, "K": 1.7, "epsilon": 5e-6, "n_gef": 20, "t_max": 3000,
        "init_x": 5.35, "init_y": 0.0, "mode": "none",
    },
    # fidelity-vs-time comparison across randomization cadences
    "fig3": {
        "n_q": 10, "K": 1.7, "epsilon": 5e-6, "t_max": 3000, "sample_every": 50,
        "init_x": math.pi / 4, "init_y": 0.0,
        "mode": "none,parec(n_g),parec(50),parec(20)",
    },
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key == "seeds":
        return tuple(int(x) for x in str(raw).replace(",", " ").split())
    if key == "mode":
        return str(raw)
    t = _FIELD_TYPES.get(key)
    if t in ("int", int):
        return int(raw)
    if t in ("float", float):
        return float(raw)
    return raw


def load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            out[key] = _coerce(key, val.strip())
    return out


def build_config(args) -> RunConfig:
    data: dict = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ValueError(f"unknown preset {args.preset!r}")
        data.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        data.update(load_config_file(args.config))
    for key in _FIELD_TYPES:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = _coerce(key, val) if isinstance(val, str) else val
    if "seeds" in data and not isinstance(data["seeds"], tuple):
        data["seeds"] = tuple(data["seeds"])
    cfg = RunConfig(**data)
    cfg.validate()
    return cfg


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PARECSIM_WORKERS", "1")))
    except ValueError:
        return 1


def _trace_job(spec):
    cfg_dict, kind, n_gef = spec
    cfg = RunConfig(**cfg_dict)
    params = tm.TentMapParams(cfg.n_q, cfg.K)
    circuit = tm.build_circuit(params)
    if n_gef == "n_g":
        n_gef = circuit.n_standard_gates
    trace = an.run_fidelity_trace(
        params,
        an.CoherentStateSpec(cfg.init_x, cfg.init_y),
        cfg.epsilon,
        list(cfg.seeds),
        mode=kind,
        t_max=cfg.t_max,
        sample_every=cfg.sample_every,
        n_gef=n_gef,
        frame_seed=cfg.frame_seed,
        circuit=circuit,
    )
    return trace


def cmd_fidelity(cfg: RunConfig) -> int:
    os.makedirs(cfg.outdir, exist_ok=True)
    specs = [(vars(cfg) | {"seeds": tuple(cfg.seeds)}, kind, n_gef)
             for kind, n_gef in cfg.mode_list()]
    specs = [(dict(s[0]), s[1], s[2]) for s in specs]
    workers = _workers()
    if workers > 1 and len(specs) > 1:
        # spawn context: fork is unsafe once numba's OpenMP pool exists
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            traces = list(pool.map(_trace_job, specs))
    else:
        traces = [_trace_job(s) for s in specs]

    params = tm.TentMapParams(cfg.n_q, cfg.K)
    circuit = tm.build_circuit(params)
    report = [
        f"tent-map fidelity run: n_q={cfg.n_q} K={cfg.K} epsilon={cfg.epsilon}",
        f"standard gates/iteration: {circuit.n_standard_gates} "
        f"(unpruned formula {tm.standard_gate_count_formula(cfg.n_q)}); "
        f"native gates: {circuit.n_gates}; total delay scale/iteration: "
        f"{circuit.total_delay_scale():.2f}",
        "",
    ]
    for trace in traces:
        label = trace.metadata["mode"]
        slug = label.replace("(", "_").replace(")", "")
        for key, val in cfg.as_dict().items():
            trace.metadata.setdefault(key, val)
        an.write_trace_csv(os.path.join(cfg.outdir, f"trace_{slug}.csv"), trace)
        fits = []
        for model in ("linear", "quadratic", "combined"):
            try:
                fits.append(an.fit_decay(trace, model))
            except ValueError as exc:
                report.append(f"[{label}] {model} fit skipped: {exc}")
        an.write_fits_csv(
            os.path.join(cfg.outdir, f"fits_{slug}.csv"), fits, trace.metadata
        )
        report.append(f"[{label}] f(t_max) = {trace.f_mean[-1]:.6f}")
        for f in fits:
            line = (
                f"[{label}] {f.model}: t_c={f.t_c:.4g} t_H={f.t_H:.4g} "
                f"residual={f.residual:.3g}"
            )
            if f.model == "linear" and label.startswith("parec") and f.rate() > 0:
                n_gef = trace.metadata["n_gef"]
                denom_std = (
                    cfg.epsilon**2 * cfg.n_q * circuit.n_standard_gates * n_gef
                )
                denom_ham = cfg.epsilon**2 * cfg.n_q * circuit.n_gates * n_gef
                line += (
                    f" | rate={f.rate():.4g}"
                    f" a(hamiltonian count)={f.rate() / denom_ham:.3g}"
                    f" a(standard count)={f.rate() / denom_std:.3g}"
                )
            report.append(line)
    path = os.path.join(cfg.outdir, "report.txt")
    with open(path, "w") as fh:
        for k, v in sorted(cfg.as_dict().items()):
            fh.write(f"# {k} = {v}\n")
        fh.write("\n".join(report) + "\n")
    print("\n".join(report))
    return 0


def cmd_husimi(cfg: RunConfig, t_list) -> int:
    os.makedirs(cfg.outdir, exist_ok=True)
    params = tm.TentMapParams(cfg.n_q, cfg.K)
    # more momentum rows than N would oversample duplicate integer indices
    grid = (min(cfg.grid_x, params.N), min(cfg.grid_y, params.N))
    init = an.CoherentStateSpec(cfg.init_x, cfg.init_y)
    seed = cfg.seeds[0]
    variants = [
        ("ideal", "ideal", None),
        ("static", "none", None),
        ("parec", "parec", cfg.n_gef),
    ]
    header = cfg.as_dict()
    for name, mode, n_gef in variants:
        snaps = an.run_snapshots(
            params, init, cfg.epsilon, seed, mode, t_list,
            n_gef=n_gef, frame_seed=cfg.frame_seed,
        )
        for t, state in snaps.items():
            hgrid = an.husimi(state, grid)
            meta = dict(header) | {"t": t, "variant": name}
            base = os.path.join(cfg.outdir, f"husimi_{name}_t{t}")
            an.write_husimi_csv(base + ".csv", hgrid, meta)
            an.write_husimi_ppm(base + ".ppm", hgrid, meta)
            print(f"wrote {base}.csv/.ppm (norm {hgrid.normalization():.6f})")
    return 0


def cmd_sweep(cfg: RunConfig, axis: str, values) -> int:
    os.makedirs(cfg.outdir, exist_ok=True)
    base = {
        "n_q": cfg.n_q, "K": cfg.K, "epsilon": cfg.epsilon, "n_gef": cfg.n_gef,
        "t_max": cfg.t_max, "sample_every": cfg.sample_every,
        "init_x": cfg.init_x, "init_y": cfg.init_y, "frame_seed": cfg.frame_seed,
    }
    points = an.rate_sweep(axis, values, base, list(cfg.seeds))
    path = os.path.join(cfg.outdir, f"sweep_{axis}.csv")
    an.write_sweep_csv(path, axis, points, cfg.as_dict())
    for p in points:
        print(f"{axis}={p.value:g} rate={p.rate:.4g} a_implied={p.a_implied:.3g}")
    print(f"wrote {path}")
    return 0


# --- validation suite -------------------------------------------------------

def _check_state_kernels():
    rng = np.random.default_rng(101)
    from ._oracles import embed_one_dense, embed_two_dense, random_unitary

    for _ in range(5):
        amp = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        amp /= np.linalg.norm(amp)
        u = random_unitary(2, rng)
        q = int(rng.integers(3))
        s = sc.StateVector(3, amp.copy())
        sc.apply_one_qubit(s, q, u)
        assert np.max(np.abs(s.amp - embed_one_dense(u, q, 3) @ amp)) < 1e-12
        u4 = random_unitary(4, rng)
        q1, q2 = map(int, rng.choice(3, 2, replace=False))
        s = sc.StateVector(3, amp.copy())
        sc.apply_two_qubit(s, q1, q2, u4)
        assert np.max(np.abs(s.amp - embed_two_dense(u4, q1, q2, 3) @ amp)) < 1e-12


def _check_fourier_roundtrip():
    rng = np.random.default_rng(102)
    amp = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    amp /= np.linalg.norm(amp)
    s = sc.StateVector(5, amp.copy())
    sc.fourier_transform(s)
    sc.fourier_transform(s, inverse=True)
    assert np.max(np.abs(s.amp - amp)) < 1e-12


def _check_lowerings():
    from ._oracles import dense_standard_gate, dense_native_gate, phase_free_dev

    cases = [
        gs.Hadamard(0),
        gs.Phase(1, 0.77),
        gs.ControlledPhase(0, 2, -1.3),
        gs.CNOT(2, 0),
    ]
    for gate in cases:
        u = np.eye(8, dtype=complex)
        for g in gs.lower_standard(gate):
            u = dense_native_gate(g, 3) @ u
        assert phase_free_dev(u, dense_standard_gate(gate, 3)) < 1e-12


def _check_tentmap_circuit():
    from ._oracles import phase_free_dev

    params = tm.TentMapParams(4, 1.7)
    circuit = tm.build_circuit(params)
    rng = np.random.default_rng(103)
    for _ in range(20):
        amp = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        amp /= np.linalg.norm(amp)
        s = sc.StateVector(4, amp.copy())
        gs.apply(circuit, s)
        assert phase_free_dev(s.amp, tm.exact_map_amplitudes(amp, params)) < 1e-10


def _check_momentum_symmetry():
    params = tm.TentMapParams(3, 1.7)
    basis = np.eye(8, dtype=complex)
    for k in range(8):
        a = tm.exact_map_amplitudes(basis[k], params)
        b = tm.exact_map_amplitudes(basis[k], params, window_offset=8)
        assert np.max(np.abs(b - a)) < 1e-10  # (-1)^N = +1 for even N


def _check_conjugation_rules():
    from ._oracles import PAULI, phase_free_dev

    for axis in ("X", "Z"):
        for lab in "IXYZ":
            g = gs.HamiltonianGate(axis, (0,), 1, 0.91)
            out = pc.conjugate_gate(g, pc.PauliFrame(lab))
            r = PAULI[lab]
            assert phase_free_dev(r @ gs.gate_matrix(g) @ r, gs.gate_matrix(out)) < 1e-12, (
                "conjugate_gate rule violated"
            )
    g = gs.HamiltonianGate("XX", (1, 0), 1, 0.91)
    for l1 in "IXYZ":
        for l0 in "IXYZ":
            frame = pc.PauliFrame(l0 + l1)
            out = pc.conjugate_gate(g, frame)
            r = np.kron(PAULI[l1], PAULI[l0])
            assert phase_free_dev(r @ gs.gate_matrix(g) @ r, gs.gate_matrix(out)) < 1e-12, (
                "conjugate_gate rule violated"
            )


def _check_ideal_invariance():
    params = tm.TentMapParams(4, 1.7)
    circuit = tm.build_circuit(params)
    rng = np.random.default_rng(104)
    amp = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amp /= np.linalg.norm(amp)
    plain = sc.StateVector(4, amp.copy())
    gs.apply(circuit, plain)
    for seed in range(10):
        s = sc.StateVector(4, amp.copy())
        pc.run_parec(circuit, s, None, pc.ParecSchedule(9, rng_seed=seed))
        assert 1.0 - sc.fidelity(plain, s) < 1e-10


def _check_backend_agreement():
    params = tm.TentMapParams(4, 1.7)
    circuit = tm.build_circuit(params)
    imp = sn.sample(4, 5e-6, 3)
    rng = np.random.default_rng(105)
    amp = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amp /= np.linalg.norm(amp)
    a = sc.StateVector(4, amp.copy())
    b = sc.StateVector(4, amp.copy())
    sn.noisy_apply(circuit, a, imp, backend="exact")
    sn.noisy_apply(circuit, b, imp, backend="trotter")
    assert 1.0 - sc.fidelity(a, b) < 1e-10


def _check_engine_equivalence():
    params = tm.TentMapParams(4, 1.7)
    circuit = tm.build_circuit(params)
    imp = sn.sample(4, 1e-4, 9)
    rng = np.random.default_rng(106)
    amp = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amp /= np.linalg.norm(amp)
    runner = en.BatchRunner(en.CompiledCircuit(circuit, 4), amp[None, :], [imp])
    runner.advance_iterations(1)
    ref = sc.StateVector(4, amp.copy())
    sn.noisy_apply(circuit, ref, imp, backend="trotter")
    assert np.max(np.abs(runner.amp[0] - ref.amp)) < 1e-12


VALIDATION_CHECKS = [
    ("statecore.kernel_oracle_equivalence", _check_state_kernels),
    ("statecore.fourier_roundtrip", _check_fourier_roundtrip),
    ("gateset.lower_standard", _check_lowerings),
    ("tentmap.circuit_oracle_equivalence", _check_tentmap_circuit),
    ("tentmap.momentum_shift_symmetry", _check_momentum_symmetry),
    ("parec.conjugate_gate", _check_conjugation_rules),
    ("parec.ideal_invariance", _check_ideal_invariance),
    ("staticnoise.backend_agreement", _check_backend_agreement),
    ("engine.reference_equivalence", _check_engine_equivalence),
]


def run_validation_checks() -> list:
    """Run every named check; returns (name, passed, message) triples."""
    results = []
    for name, fn in VALIDATION_CHECKS:
        try:
            fn()
            results.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - report any failure
            results.append((name, False, f"{type(exc).__name__}: {exc}"))
    return results


def cmd_validate() -> int:
    results = run_validation_checks()
    status = 0
    for name, ok, msg in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + msg if msg else ''}")
        if not ok:
            status = 1
    return status


def cmd_tentmap_dump(cfg: RunConfig, path: str | None) -> int:
    params = tm.TentMapParams(cfg.n_q, cfg.K)
    circuit = tm.build_circuit(params)
    text = gs.circuit_to_text(circuit)
    header = "".join(f"# {k} = {v}\n" for k, v in sorted(cfg.as_dict().items()))
    out = header + text
    if path:
        with open(path, "w") as fh:
            fh.write(out)
        print(f"wrote {path} ({circuit.n_gates} native gates)")
    else:
        sys.stdout.write(out)
    return 0


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="parameter preset")
    p.add_argument("--config", help="flat key=value config file")
    for name in _FIELD_TYPES:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="parecsim",
        description="Quantum tent-map simulator with static imperfections "
        "and Pauli-frame randomization",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_fid = sub.add_parser("fidelity", help="fidelity traces and decay fits")
    _add_config_args(p_fid)

    p_hus = sub.add_parser("husimi", help="phase-space grids")
    _add_config_args(p_hus)
    p_hus.add_argument("--times", default=None, help="comma list of iteration counts")

    p_swp = sub.add_parser("sweep", help="rate vs a swept parameter")
    _add_config_args(p_swp)
    p_swp.add_argument("--axis", required=True, choices=["epsilon", "n_gef", "n_q"])
    p_swp.add_argument("--values", required=True, help="comma list of values")

    sub.add_parser("validate", help="run the built-in self checks")

    p_dump = sub.add_parser("tentmap-dump", help="write the lowered circuit")
    _add_config_args(p_dump)
    p_dump.add_argument("--output", default=None)

    args = ap.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate()
        cfg = build_config(args)
        if args.command == "fidelity":
            return cmd_fidelity(cfg)
        if args.command == "husimi":
            tl = args.times if args.times is not None else str(cfg.t_max)
            t_list = [int(x) for x in tl.replace(",", " ").split()]
            return cmd_husimi(cfg, t_list)
        if args.command == "sweep":
            axis = args.axis
            conv = float if axis == "epsilon" else int
            values = [conv(x) for x in args.values.replace(",", " ").split()]
            return cmd_sweep(cfg, axis, values)
        if args.command == "tentmap-dump":
            return cmd_tentmap_dump(cfg, args.output)
        raise ValueError(f"unknown command {args.command}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
