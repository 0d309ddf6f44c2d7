"""On-disk formats: run.csv, raw field snapshots, and P5 graymaps.

run.csv keeps full double precision (17 significant digits) so identical
configs reproduce bit-identical files apart from the wall_ns column.

Raw snapshots are a 16-byte header -- magic "SVMF", little-endian u32
grid size, 8 reserved zero bytes -- followed by n*n little-endian float64
nodal values in row-major order.  Graymaps are binary PGM (P5, maxval
255) with values mapped linearly from [-1.2, 1.2], clamped.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .diagnostics import StepRecord

CSV_HEADER = "step,t,energy,energy_target,mass,alpha,beta,solver_iters,dissipation,wall_ns"

_MAGIC = b"SVMF"
_HEADER = struct.Struct("<4sI8x")  # magic, u32 n, 8 reserved bytes


def _g17(x: float) -> str:
    return format(x, ".17g")


def format_record(r: StepRecord) -> str:
    return ",".join(
        (
            str(r.step),
            _g17(r.t),
            _g17(r.energy),
            _g17(r.energy_target),
            _g17(r.mass),
            _g17(r.alpha),
            _g17(r.beta),
            str(r.solver_iters),
            _g17(r.dissipation),
            str(r.wall_ns),
        )
    )


def write_run_csv(path, records) -> None:
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for r in records:
            f.write(format_record(r) + "\n")


def read_run_csv(path) -> list[StepRecord]:
    records = []
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected run.csv header: {header!r}")
        for line in f:
            c = line.strip().split(",")
            records.append(
                StepRecord(
                    step=int(c[0]),
                    t=float(c[1]),
                    energy=float(c[2]),
                    energy_target=float(c[3]),
                    mass=float(c[4]),
                    alpha=float(c[5]),
                    beta=float(c[6]),
                    solver_iters=int(c[7]),
                    dissipation=float(c[8]),
                    wall_ns=int(c[9]),
                )
            )
    return records


def write_field_raw(path, values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"expected a square field, got shape {values.shape}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, values.shape[0]))
        f.write(values.tobytes())


def read_field_raw(path) -> np.ndarray:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, n = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(f.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {data.size}")
    return data.reshape(n, n).copy()


def write_field_pgm(path, values: np.ndarray, lo: float = -1.2, hi: float = 1.2) -> None:
    clipped = np.clip(values, lo, hi)
    pixels = np.round((clipped - lo) / (hi - lo) * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{values.shape[1]} {values.shape[0]}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(pixels).tobytes())


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
