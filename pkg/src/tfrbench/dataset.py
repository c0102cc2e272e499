"""Dataset generation and the on-disk TFRS record container.

Binary record file (little-endian)::

    bytes 0-3   magic  b"TFRS"
    u32         version (currently 1)
    u32         N       grid cells per side
    u32         L       number of intensities per record
    u32         M       number of monitor temperatures per record
    then, per record:
    L  x f64    intensities (W/m^2)
    M  x f64    monitor temperatures (K)
    N*N x f64   temperature field (K), row-major, row 0 = bottom edge

The record count is implied by the file size.  A dataset is a directory
holding ``manifest.json`` plus one ``<set>.tfrs`` file per sample set.
"""
from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Optional

import numpy as np

from . import __version__
from .errors import FormatError, TFRError, ValidationError
from .layout import SystemSpec, rasterize
from .observation import MonitorSet, observe, place_monitors
from .parallel import pool_map
from .sampling import STRATEGIES, derive_seed, sample_powers
from .solver import SolverConfig, solve_field

log = logging.getLogger(__name__)

MAGIC = b"TFRS"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


@dataclass
class RecordSet:
    n: int
    intensities: np.ndarray   # (S, L)
    observations: np.ndarray  # (S, M)
    fields: np.ndarray        # (S, N, N)

    def __len__(self):
        return self.fields.shape[0]

    @property
    def n_sources(self) -> int:
        return self.intensities.shape[1]

    @property
    def n_monitors(self) -> int:
        return self.observations.shape[1]

    @classmethod
    def fields_only(cls, fields) -> "RecordSet":
        fields = np.asarray(fields, dtype=float)
        s = fields.shape[0]
        return cls(fields.shape[1], np.zeros((s, 0)), np.zeros((s, 0)), fields)


def write_records(path, records: RecordSet) -> None:
    s, n = len(records), records.n
    lam, m = records.n_sources, records.n_monitors
    if records.fields.shape != (s, n, n) or records.intensities.shape[0] != s \
            or records.observations.shape[0] != s:
        raise ValidationError("record arrays disagree on sample count or grid size")
    body = np.concatenate([
        records.intensities.reshape(s, lam),
        records.observations.reshape(s, m),
        records.fields.reshape(s, n * n),
    ], axis=1).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, lam, m))
        fh.write(body.tobytes(order="C"))


def read_records(path) -> RecordSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, n, lam, m = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported TFRS version {version}")
    width = lam + m + n * n
    payload = len(raw) - _HEADER.size
    if width == 0 or payload % (8 * width):
        raise FormatError(f"{path}: payload size {payload} is not a whole number of records")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(-1, width)
    data = data.astype(float)
    s = data.shape[0]
    return RecordSet(n, data[:, :lam], data[:, lam:lam + m],
                     data[:, lam + m:].reshape(s, n, n))


@dataclass
class Sample:
    q: np.ndarray
    field: np.ndarray
    observation: np.ndarray
    seed: int
    strategy_tag: str


def config_hash(manifest: Mapping) -> str:
    body = {k: v for k, v in manifest.items() if k != "config_hash"}
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class Dataset:
    spec: SystemSpec
    monitors: MonitorSet
    manifest: dict
    sets: dict  # name -> RecordSet

    @property
    def config_hash(self) -> str:
        return self.manifest["config_hash"]

    def samples(self, name: str) -> Iterator[Sample]:
        rec = self.sets[name]
        seeds = self.manifest["sets"][name]["seeds"]
        for k in range(len(rec)):
            yield Sample(rec.intensities[k], rec.fields[k], rec.observations[k],
                         seeds[k], name)

    def save(self, path) -> Path:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        for name, rec in self.sets.items():
            write_records(path / self.manifest["sets"][name]["file"], rec)
        (path / "manifest.json").write_text(json.dumps(self.manifest, indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "Dataset":
        path = Path(path)
        try:
            manifest = json.loads((path / "manifest.json").read_text())
        except FileNotFoundError:
            raise FormatError(f"{path}: no manifest.json") from None
        if manifest.get("format") != "TFRS" or manifest.get("format_version") != VERSION:
            raise FormatError(f"{path}: unsupported dataset format")
        if config_hash(manifest) != manifest.get("config_hash"):
            raise FormatError(f"{path}: manifest hash does not match its contents")
        spec = SystemSpec.from_dict(manifest["spec"])
        monitors = MonitorSet.from_dict(manifest["monitors"])
        sets = {}
        for name, info in manifest["sets"].items():
            rec = read_records(path / info["file"])
            if len(rec) != info["count"] or rec.n != spec.domain.grid_n \
                    or rec.n_monitors != len(monitors):
                raise FormatError(f"{path}: set {name} disagrees with the manifest")
            sets[name] = rec
        return cls(spec, monitors, manifest, sets)


def _solve_one(args):
    spec, strategy, k, seed, cfg = args
    q = sample_powers(spec.n_sources, strategy, seed)
    try:
        field = solve_field(spec, q, cfg)
    except TFRError as exc:
        exc.sample_index = (strategy, k)
        exc.args = (f"{strategy}[{k}]: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
        raise
    return q, field


def generate_dataset(spec: SystemSpec, counts: Mapping[str, int], base_seed: int,
                     cfg: SolverConfig = SolverConfig(), *,
                     monitors: Optional[MonitorSet] = None, monitor_seed: int = 0,
                     threads: int = 1, extra: Optional[dict] = None) -> Dataset:
    """Sample intensities, solve every field and read the monitors.

    Per-sample seeds come from :func:`~tfrbench.sampling.derive_seed`, so the
    result does not depend on ``threads``.
    """
    for name, c in counts.items():
        if name not in STRATEGIES:
            raise ValidationError(f"unknown sample set {name!r}")
        if int(c) < 0:
            raise ValidationError(f"negative count for {name}")
    rasterize(spec)
    if monitors is None:
        monitors = place_monitors(spec, rng_seed=monitor_seed)
    names = [s for s in STRATEGIES if s in counts]
    tasks = [(spec, name, k, derive_seed(base_seed, name, k), cfg)
             for name in names for k in range(int(counts[name]))]
    results = pool_map(_solve_one, tasks, threads)

    n = spec.domain.grid_n
    sets, set_info, pos = {}, {}, 0
    for name in names:
        c = int(counts[name])
        chunk = results[pos:pos + c]
        pos += c
        fields = np.array([f for _, f in chunk]).reshape(c, n, n)
        q = np.array([q for q, _ in chunk]).reshape(c, spec.n_sources)
        obs = np.array([observe(f, monitors) for f in fields]).reshape(c, len(monitors))
        sets[name] = RecordSet(n, q, obs, fields)
        set_info[name] = {"count": c, "file": f"{name}.tfrs",
                          "seeds": [t[3] for t in tasks if t[1] == name]}
        log.info("generated %d samples for %s", c, name)

    manifest = {
        "format": "TFRS",
        "format_version": VERSION,
        "generator": f"tfrbench {__version__}",
        "spec": spec.to_dict(),
        "solver": cfg.to_dict(),
        "discretization": "cell-centered finite volume, 5-point, face-midpoint boundary data",
        "monitor_seed": int(monitor_seed),
        "monitors": monitors.to_dict(),
        "base_seed": int(base_seed),
        "seed_rule": "splitmix64(splitmix64(splitmix64(base) ^ set_code) ^ index)",
        "sampling": {"distribution": "uniform on (0, 30000] W/m^2",
                     "zero_count_rounding": "half-up"},
        "sets": set_info,
    }
    if extra:
        manifest["extra"] = extra
    manifest["config_hash"] = config_hash(manifest)
    return Dataset(spec, monitors, manifest, sets)
