"""Command-line front end, run configuration, and the experiment harness.

Subcommands:

  svmflow run        advance one scheme from t=0 and write run.csv,
                     snapshots, and a replayable config echo
  svmflow experiment refine | cpu | coarsen reports

Exit codes: 0 success, 1 bad configuration, 2 a time step failed,
3 I/O failure.  SVM_THREADS caps harness parallelism (default serial).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .diagnostics import RunSeries, StepRecord, error_norms, order_fit
from .errors import StepFailure
from .ficn import ficn_step
from .model import ChParams, GradFlowModel
from .runio import (
    ensure_dir,
    read_field_raw,
    write_field_pgm,
    write_field_raw,
    write_run_csv,
)
from .sav import SavState, modified_energy, sav_step
from .spectral import Grid2D, mean
from .svm import SvmVariant, svm_step

SCHEMES = ("svm1", "svm2", "savcn", "ficn")

REFINE_TAU0 = 1.25e-2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    """One run: scheme choice, discretization, model, and output knobs."""

    scheme: str
    tau: float
    t_end: float
    n: int = 128
    epsilon: float = 1e-2
    lam: float = 1e-3
    init: str = "taylor"
    c0: float = 1.0
    newton_tol: float = 1e-13
    picard_tol: float = 1e-12
    snapshot_times: tuple = ()
    out_dir: str | None = None
    seed: int = 0  # reserved for random initial data
    dealias: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if not (8 <= self.n <= 1024) or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"n must be a power of two in [8, 1024], got {self.n}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.t_end < self.tau:
            raise ConfigError(f"t_end {self.t_end} must be at least tau {self.tau}")

    @property
    def nsteps(self) -> int:
        return max(1, int(round(self.t_end / self.tau)))


def init_field(kind: str, grid: Grid2D) -> np.ndarray:
    """Initial nodal data: 'taylor', 'coarsening', or 'file:<path>'."""
    x, y = grid.nodes()
    if kind == "taylor":
        return 0.25 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    if kind == "coarsening":
        return 0.05 * (
            np.cos(6 * np.pi * x) * np.cos(8 * np.pi * y)
            + (np.cos(8 * np.pi * x) * np.cos(6 * np.pi * y)) ** 2
            + np.cos(2 * np.pi * x - 10 * np.pi * y) * np.cos(4 * np.pi * x - 2 * np.pi * y)
        )
    if kind.startswith("file:"):
        path = kind[len("file:"):]
        try:
            values = read_field_raw(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load initial field from {path}: {exc}") from exc
        if values.shape != grid.shape:
            raise ConfigError(
                f"initial field {path} has shape {values.shape}, grid expects {grid.shape}"
            )
        return values
    raise ConfigError(f"unknown initial condition {kind!r}")


def _snapshot_steps(config: SchemeConfig) -> dict[int, float]:
    steps = {}
    for t in config.snapshot_times:
        s = t / config.tau
        si = int(round(s))
        if abs(s - si) > 1e-6 * max(1.0, abs(s)) or not (0 <= si <= config.nsteps):
            raise ConfigError(f"snapshot time {t} is not a step time (tau={config.tau})")
        steps[si] = si * config.tau
    return steps


def run(config: SchemeConfig) -> RunSeries:
    """March the chosen scheme from t=0 to t_end, recording every step.

    Writes run.csv, snapshots, and a config echo when out_dir is set; on a
    StepFailure the records up to the failure are still written and the
    failure re-raised with the failing step attached.
    """
    grid = Grid2D(config.n, dealias=config.dealias)
    model = GradFlowModel.cahn_hilliard(grid, ChParams(config.epsilon, config.lam))
    phi = init_field(config.init, grid)
    snap_at = _snapshot_steps(config)

    series = RunSeries(config=config)
    energy0 = model.free_energy(phi)
    sav_state = None
    if config.scheme == "savcn":
        sav_state = SavState.initialize(model, phi, config.c0)
        target0 = modified_energy(model, sav_state)
    else:
        target0 = energy0
    series.records.append(
        StepRecord(0, 0.0, energy0, target0, mean(phi), 0.0, 0.0, 0, 0.0, 0)
    )
    if 0 in snap_at:
        series.snapshots.append((0.0, phi.copy()))

    variant = {"svm1": SvmVariant.SVM_I, "svm2": SvmVariant.SVM_II}.get(config.scheme)
    phi_prev = phi  # first step uses the flat extrapolation phi^{-1} := phi^0
    failure = None
    try:
        for step in range(1, config.nsteps + 1):
            t0 = time.perf_counter_ns()
            if variant is not None:
                res = svm_step(
                    model, phi, phi_prev, variant, config.tau,
                    newton_tol=config.newton_tol,
                )
                wall = time.perf_counter_ns() - t0
                phi_prev, phi = phi, res.phi_next
                rec = StepRecord(
                    step, step * config.tau, model.free_energy(phi), res.f_tilde,
                    mean(phi), res.alpha, res.beta, res.newton_iters,
                    res.dissipation, wall,
                )
            elif config.scheme == "savcn":
                out = sav_step(model, sav_state, phi_prev, config.tau)
                wall = time.perf_counter_ns() - t0
                phi_prev, sav_state = sav_state.phi, out.state
                phi = sav_state.phi
                rec = StepRecord(
                    step, step * config.tau, model.free_energy(phi),
                    out.modified_energy, mean(phi), 0.0, 0.0, 0,
                    out.dissipation, wall,
                )
            else:  # ficn
                out = ficn_step(model, phi, config.tau, config.picard_tol)
                wall = time.perf_counter_ns() - t0
                phi = out.phi_next
                energy = model.free_energy(phi)
                rec = StepRecord(
                    step, step * config.tau, energy, energy, mean(phi),
                    0.0, 0.0, out.iters, out.dissipation, wall,
                )
            series.records.append(rec)
            if step in snap_at:
                series.snapshots.append((snap_at[step], phi.copy()))
    except StepFailure as exc:
        exc.failed_step = len(series.records)  # first step that did not complete
        failure = exc

    series.phi_final = phi
    if config.out_dir is not None:
        _write_run_outputs(config, series)
    if failure is not None:
        raise failure
    return series


def _write_run_outputs(config: SchemeConfig, series: RunSeries) -> None:
    out = ensure_dir(config.out_dir)
    write_run_csv(out / "run.csv", series.records)
    with open(out / "config.txt", "w") as f:
        f.write(echo_config(config))
    for t, values in series.snapshots:
        stem = f"snap_t{t:.9g}"
        write_field_raw(out / f"{stem}.bin", values)
        write_field_pgm(out / f"{stem}.pgm", values)


# --- configuration plumbing -------------------------------------------------

_CONFIG_KEYS = (
    "scheme", "n", "tau", "t_end", "epsilon", "lambda", "init", "c0",
    "newton_tol", "picard_tol", "snapshot_at", "seed", "dealias",
)


def echo_config(config: SchemeConfig) -> str:
    """Replayable key = value echo (out dir intentionally omitted)."""
    lines = [
        f"scheme = {config.scheme}",
        f"n = {config.n}",
        f"tau = {config.tau!r}",
        f"t_end = {config.t_end!r}",
        f"epsilon = {config.epsilon!r}",
        f"lambda = {config.lam!r}",
        f"init = {config.init}",
        f"c0 = {config.c0!r}",
        f"newton_tol = {config.newton_tol!r}",
        f"picard_tol = {config.picard_tol!r}",
        f"snapshot_at = {','.join(repr(t) for t in config.snapshot_times)}",
        f"seed = {config.seed}",
        f"dealias = {'true' if config.dealias else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def parse_config_file(path) -> dict:
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val
    return values


def _parse_snapshot_times(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad snapshot time list {text!r}") from exc


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def build_config(file_values: dict, flag_values: dict, out_dir=None) -> SchemeConfig:
    """Merge config-file values and flags (flags win) into a SchemeConfig."""
    merged: dict = {}
    converters = {
        "scheme": str, "n": int, "tau": float, "t_end": float,
        "epsilon": float, "lambda": float, "init": str, "c0": float,
        "newton_tol": float, "picard_tol": float,
        "snapshot_at": _parse_snapshot_times, "seed": int, "dealias": _parse_bool,
    }
    for key, text in file_values.items():
        try:
            merged[key] = converters[key](text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {text!r}") from exc
    for key, val in flag_values.items():
        if val is not None:
            merged[key] = val
    kwargs = {
        "scheme": merged.get("scheme"),
        "tau": merged.get("tau"),
        "t_end": merged.get("t_end"),
    }
    if kwargs["scheme"] is None or kwargs["tau"] is None or kwargs["t_end"] is None:
        raise ConfigError("scheme, tau, and t_end are required (flag or config file)")
    for src, dst in (
        ("n", "n"), ("epsilon", "epsilon"), ("lambda", "lam"), ("init", "init"),
        ("c0", "c0"), ("newton_tol", "newton_tol"), ("picard_tol", "picard_tol"),
        ("snapshot_at", "snapshot_times"), ("seed", "seed"), ("dealias", "dealias"),
    ):
        if src in merged:
            kwargs[dst] = merged[src]
    return SchemeConfig(out_dir=out_dir, **kwargs)


# --- experiment harness ------------------------------------------------------


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SVM_THREADS", "1")))
    except ValueError:
        return 1


def _run_many(configs) -> list[RunSeries]:
    workers = min(_worker_count(), len(configs))
    if workers <= 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def refine_experiment(
    profile: str = "desk",
    out_dir=None,
    schemes: tuple = ("svm1", "svm2"),
    n: int | None = None,
    t_end: float = 1.0,
    epsilon: float = 1e-2,
    lam: float = 1e-3,
    num_taus: int | None = None,
) -> dict:
    """Step-refinement study: errors at t_end by adjacent-pair differencing.

    The ladder is tau = 1.25e-2 / 2^(k-1); the desk profile runs k=1..6 on
    a 128^2 grid, the paper profile k=1..7 on 256^2.
    """
    if profile not in ("desk", "paper"):
        raise ConfigError(f"unknown profile {profile!r}")
    if n is None:
        n = 128 if profile == "desk" else 256
    if num_taus is None:
        num_taus = 6 if profile == "desk" else 7
    taus = [REFINE_TAU0 * 2.0 ** -(k - 1) for k in range(1, num_taus + 1)]
    result = {"taus": taus, "schemes": {}}
    for scheme in schemes:
        configs = [
            SchemeConfig(scheme=scheme, tau=tau, t_end=t_end, n=n,
                         epsilon=epsilon, lam=lam, init="taylor")
            for tau in taus
        ]
        runs = _run_many(configs)
        finals = [r.phi_final for r in runs]
        l2s, linfs = [], []
        for coarse, fine in zip(finals[:-1], finals[1:]):
            l2, linf = error_norms(coarse, fine)
            l2s.append(l2)
            linfs.append(linf)
        result["schemes"][scheme] = {
            "l2": l2s,
            "linf": linfs,
            "slope_l2": order_fit(l2s),
            "slope_linf": order_fit(linfs),
            "runs": runs,
        }
    if out_dir is not None:
        out = ensure_dir(out_dir)
        with open(out / "refine_errors.csv", "w") as f:
            f.write("scheme,tau,l2,linf\n")
            for scheme, data in result["schemes"].items():
                for tau, l2, linf in zip(taus[:-1], data["l2"], data["linf"]):
                    f.write(f"{scheme},{tau!r},{l2!r},{linf!r}\n")
        with open(out / "refine_slopes.csv", "w") as f:
            f.write("scheme,slope_l2,slope_linf\n")
            for scheme, data in result["schemes"].items():
                f.write(f"{scheme},{data['slope_l2']!r},{data['slope_linf']!r}\n")
    return result


def cpu_experiment(
    out_dir=None,
    ns: tuple = (128, 256),
    tau: float = 1e-2,
    t_end: float = 1.0,
    epsilon: float = 1e-2,
    lam: float = 1e-3,
) -> dict:
    """Wall-time comparison of all four schemes (always run serially)."""
    result = {}
    for n in ns:
        result[n] = {}
        for scheme in SCHEMES:
            series = run(SchemeConfig(scheme=scheme, tau=tau, t_end=t_end, n=n,
                                      epsilon=epsilon, lam=lam, init="taylor"))
            total_ns = sum(r.wall_ns for r in series.records)
            result[n][scheme] = {
                "wall_s": total_ns / 1e9,
                "steps": len(series.records) - 1,
                "series": series,
            }
    if out_dir is not None:
        out = ensure_dir(out_dir)
        with open(out / "cpu_times.csv", "w") as f:
            f.write("scheme,n,steps,wall_s\n")
            for n, per_scheme in result.items():
                for scheme, data in per_scheme.items():
                    f.write(f"{scheme},{n},{data['steps']},{data['wall_s']!r}\n")
    return result


_COARSEN_LADDERS = {
    # scheme ladders stress each integrator's usable step size
    "desk": {
        "t_end": 0.02,
        "reference": ("svm2", 2.5e-6),
        "ladder": [("svm2", 2e-4), ("svm2", 1e-4), ("svm1", 4e-5), ("savcn", 4e-5)],
    },
    "paper": {
        "t_end": 0.1,
        "reference": ("svm2", 1e-6),
        "ladder": [
            ("savcn", 3.125e-6), ("savcn", 1.5625e-6),
            ("svm1", 5e-5), ("svm1", 4e-5),
            ("svm2", 2e-4), ("svm2", 1.5625e-4),
        ],
    },
}


def coarsen_experiment(
    profile: str = "desk",
    out_dir=None,
    n: int = 128,
    epsilon: float = 1e-2,
    lam: float = 1.0,
) -> dict:
    """Fast-coarsening robustness study against a fine-step reference.

    Reports the relative L2 deviation of each (scheme, tau) final field
    from the shared reference trajectory; ladder runs that fail mid-way
    are reported with infinite deviation instead of aborting the study.
    """
    if profile not in _COARSEN_LADDERS:
        raise ConfigError(f"unknown profile {profile!r}")
    setup = _COARSEN_LADDERS[profile]
    t_end = setup["t_end"]

    def make_config(scheme, tau):
        return SchemeConfig(scheme=scheme, tau=tau, t_end=t_end, n=n,
                            epsilon=epsilon, lam=lam, init="coarsening")

    ref_scheme, ref_tau = setup["reference"]
    reference = run(make_config(ref_scheme, ref_tau))
    ref_l2 = float(np.sqrt(np.mean(reference.phi_final**2)))

    entries = []
    for scheme, tau in setup["ladder"]:
        try:
            series = run(make_config(scheme, tau))
            l2, _ = error_norms(series.phi_final, reference.phi_final)
            entries.append({
                "scheme": scheme, "tau": tau, "rel_l2": l2 / ref_l2,
                "completed": True, "series": series,
            })
        except StepFailure as exc:
            entries.append({
                "scheme": scheme, "tau": tau, "rel_l2": math.inf,
                "completed": False, "reason": exc.reason, "series": None,
            })
    result = {
        "profile": profile,
        "t_end": t_end,
        "reference": {"scheme": ref_scheme, "tau": ref_tau, "series": reference},
        "entries": entries,
    }
    if out_dir is not None:
        out = ensure_dir(out_dir)
        with open(out / "coarsen_deviations.csv", "w") as f:
            f.write("scheme,tau,rel_l2,completed\n")
            for e in entries:
                f.write(f"{e['scheme']},{e['tau']!r},{e['rel_l2']!r},{int(e['completed'])}\n")
        write_field_raw(out / "reference.bin", reference.phi_final)
        write_field_pgm(out / "reference.pgm", reference.phi_final)
        for e in entries:
            if e["series"] is None:
                continue
            stem = f"{e['scheme']}_tau{e['tau']:.9g}"
            write_field_raw(out / f"{stem}.bin", e["series"].phi_final)
            write_field_pgm(out / f"{stem}.pgm", e["series"].phi_final)
            write_run_csv(out / f"{stem}_run.csv", e["series"].records)
    return result


# --- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svmflow",
        description="Energy-dissipation-rate preserving Cahn-Hilliard integrators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="advance one scheme and write diagnostics")
    runp.add_argument("--config", help="key = value config file (flags override)")
    runp.add_argument("--scheme", choices=SCHEMES)
    runp.add_argument("--n", type=int)
    runp.add_argument("--tau", type=float)
    runp.add_argument("--t-end", dest="t_end", type=float)
    runp.add_argument("--epsilon", type=float)
    runp.add_argument("--lambda", dest="lam", type=float)
    runp.add_argument("--init")
    runp.add_argument("--c0", type=float)
    runp.add_argument("--newton-tol", dest="newton_tol", type=float)
    runp.add_argument("--picard-tol", dest="picard_tol", type=float)
    runp.add_argument("--snapshot-at", dest="snapshot_at")
    runp.add_argument("--seed", type=int)
    runp.add_argument("--dealias", action="store_const", const=True)
    runp.add_argument("--out", help="output directory for run.csv, snapshots, echo")

    expp = sub.add_parser("experiment", help="reproduce a study")
    expp.add_argument("name", choices=("refine", "cpu", "coarsen"))
    expp.add_argument("--profile", choices=("desk", "paper"), default="desk")
    expp.add_argument("--out", help="directory for report files")
    expp.add_argument("--n", type=int, help="grid override where applicable")
    return parser


def _cmd_run(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    flag_values = {
        "scheme": args.scheme, "n": args.n, "tau": args.tau, "t_end": args.t_end,
        "epsilon": args.epsilon, "lambda": args.lam, "init": args.init,
        "c0": args.c0, "newton_tol": args.newton_tol, "picard_tol": args.picard_tol,
        "snapshot_at": _parse_snapshot_times(args.snapshot_at) if args.snapshot_at else None,
        "seed": args.seed, "dealias": args.dealias,
    }
    config = build_config(file_values, flag_values, out_dir=args.out)
    series = run(config)
    last = series.records[-1]
    print(f"completed {last.step} steps to t={last.t:g}; "
          f"energy {series.records[0].energy:.6e} -> {last.energy:.6e}")
    return 0


def _cmd_experiment(args) -> int:
    if args.name == "refine":
        result = refine_experiment(profile=args.profile, out_dir=args.out,
                                   **({"n": args.n} if args.n else {}))
        for scheme, data in result["schemes"].items():
            print(f"{scheme}: slope_l2={data['slope_l2']:.3f} "
                  f"slope_linf={data['slope_linf']:.3f}")
    elif args.name == "cpu":
        kwargs = {"ns": (args.n,)} if args.n else {}
        result = cpu_experiment(out_dir=args.out, **kwargs)
        for n, per_scheme in result.items():
            for scheme, data in per_scheme.items():
                print(f"n={n} {scheme}: {data['wall_s']:.3f} s "
                      f"({data['steps']} steps)")
    else:
        result = coarsen_experiment(profile=args.profile, out_dir=args.out,
                                    **({"n": args.n} if args.n else {}))
        for e in result["entries"]:
            status = f"rel_l2={e['rel_l2']:.4g}" if e["completed"] else f"failed ({e['reason']})"
            print(f"{e['scheme']} tau={e['tau']:g}: {status}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_experiment(args)
    except ConfigError as exc:
        print(f"svmflow: configuration error: {exc}", file=sys.stderr)
        return 1
    except StepFailure as exc:
        step = getattr(exc, "failed_step", "?")
        print(f"svmflow: step {step} failed ({exc.reason}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"svmflow: I/O failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
