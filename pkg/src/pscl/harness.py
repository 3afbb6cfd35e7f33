"""Monte-Carlo FER/BER campaigns.

Every frame draws its payload and noise from its own stream keyed by
(seed, frame index).  A point stops at the frame that brings the error
count to ``min_frame_errors`` (or at ``max_frames``), so results do not
depend on how frames were spread over workers.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import multiprocessing
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .channel import channel_llrs, modulate, transmit
from .codec import polar_transform
from .construction import METHODS, construct, ebn0_to_sigma2, is_power_of_two, partition_layout
from .crc import NO_CRC, attach_crcs, default_crc, frame_layout, parse_crc_list
from .decoders import make_decoder

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

CSV_COLUMNS = ("ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "ci95")
Z95 = 1.959963984540054


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    N: int = 2048
    K: int = 1024
    design_snr_db: float = 2.0
    construction: str = "ga"
    algorithm: str = "scl"
    list_size: int = 2
    partitions: int = 1
    crc: str = "auto"
    ebn0_db: tuple[float, ...] = (1.5,)
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    seed: int = 0
    workers: int = 1
    chunk_frames: int = 250
    name: str = "sim"
    output_dir: str = "."

    def __post_init__(self):
        ebn0 = self.ebn0_db
        if isinstance(ebn0, (int, float)):
            ebn0 = (ebn0,)
        object.__setattr__(self, "ebn0_db", tuple(float(v) for v in ebn0))
        if not self.ebn0_db:
            raise ConfigError("ebn0_db sweep is empty")
        if self.max_frames < 1:
            raise ConfigError("max_frames must be at least 1")
        if self.min_frame_errors < 1:
            raise ConfigError("min_frame_errors must be at least 1")
        if self.workers < 1 or self.chunk_frames < 1:
            raise ConfigError("workers and chunk_frames must be at least 1")
        if self.construction not in METHODS:
            raise ConfigError(f"unknown construction {self.construction!r}")
        if not is_power_of_two(self.N) or not 0 < self.K <= self.N:
            raise ConfigError(f"invalid code parameters N={self.N}, K={self.K}")
        if self.algorithm not in ("sc", "scl", "pscl"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "sc" and (self.list_size != 1 or self.partitions != 1):
            object.__setattr__(self, "list_size", 1)
            object.__setattr__(self, "partitions", 1)
        if self.algorithm == "scl" and self.partitions != 1:
            raise ConfigError("scl uses a single partition; set algorithm = 'pscl'")
        if not is_power_of_two(self.partitions) or self.partitions > self.N:
            raise ConfigError(f"partitions must be a power of two not above N, got {self.partitions}")
        if self.list_size < 1:
            raise ConfigError("list_size must be at least 1")
        self.crc_specs()

    @property
    def label(self) -> str:
        widths = [s.width for s in self.crc_specs()]
        x = f"-CRC{widths[0]}" if widths and widths[0] else ""
        if self.algorithm == "sc":
            return "SC" + x
        if self.algorithm == "scl":
            return f"SCL{self.list_size}{x}"
        return f"PSCL({self.partitions},{self.list_size}){x}"

    def crc_specs(self):
        """Per-partition CRC specs; ``auto`` splits 32 bits over the partitions."""
        P = self.partitions
        text = self.crc.strip().lower()
        if text == "auto":
            if self.algorithm == "sc":
                return [NO_CRC]
            if 32 % P:
                raise ConfigError(f"crc = 'auto' needs P dividing 32, got {P}")
            return [default_crc(32 // P)] * P
        try:
            return parse_crc_list(self.crc, P)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}


def _coerce(name: str, value):
    kind = _FIELDS[name].type
    if name == "ebn0_db":
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split()]
        if not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(float(v) for v in value)
    if kind == "int":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ConfigError(f"{name} must be an integer")
        return int(value)
    if kind == "float":
        return float(value)
    return str(value)


def config_from_mapping(mapping) -> SimConfig:
    unknown = set(mapping) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        return SimConfig(**{k: _coerce(k, v) for k, v in mapping.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_override(text: str):
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or key not in _FIELDS:
        raise ConfigError(f"bad override {text!r}")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


def load_config(path, overrides=()) -> SimConfig:
    """Read a flat TOML file of SimConfig fields and apply ``key=value`` overrides."""
    try:
        with open(path, "rb") as fh:
            mapping = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    nested = [k for k, v in mapping.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: config must be flat, found tables {nested}")
    for item in overrides:
        key, value = parse_override(item)
        mapping[key] = value
    return config_from_mapping(mapping)


@dataclass(frozen=True)
class PointResult:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    ci95: float

    @classmethod
    def from_counts(cls, ebn0_db, frames, frame_errors, bit_errors, payload_bits):
        fer = frame_errors / frames if frames else 0.0
        ber = bit_errors / (frames * payload_bits) if frames and payload_bits else 0.0
        return cls(float(ebn0_db), int(frames), int(frame_errors), int(bit_errors), fer, ber, ci95(fer, frames))


@dataclass
class SimResult:
    rows: list[PointResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def ci95(fer: float, frames: int) -> float:
    """Half-width of the normal-approximation 95% interval on the FER."""
    if frames <= 0:
        return 0.0
    return Z95 * math.sqrt(fer * (1.0 - fer) / frames)


def version_string() -> str:
    try:
        sha = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).parent,
            capture_output=True,
            text=True,
            timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else __version__


@lru_cache(maxsize=8)
def _code(N, K, design_snr_db, method):
    return construct(N, K, design_snr_db, method)


class Simulator:
    """Frame pipeline of one configuration; owns one decoder instance."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.code = _code(cfg.N, cfg.K, cfg.design_snr_db, cfg.construction)
        specs = cfg.crc_specs()
        playout = partition_layout(self.code, cfg.partitions, [s.width for s in specs])
        self.layout = frame_layout(self.code, playout)
        self.specs = [s if w else NO_CRC for s, w in zip(specs, playout.crc_widths)]
        # SC ignores the CRC when decoding but the frame still carries it
        self.decoder = make_decoder(self.code, cfg.algorithm, cfg.list_size, cfg.partitions, self.specs)
        self.payload_positions = self.layout.payload_positions
        self.payload_bits = self.layout.payload_length

    def run_frames(self, ebn0_db: float, start: int, stop: int):
        """Frame-error flags and bit-error counts for frames ``start..stop-1``."""
        sigma2 = ebn0_to_sigma2(ebn0_db, self.code.rate)
        count = stop - start
        frame_err = np.zeros(count, dtype=np.bool_)
        bit_err = np.zeros(count, dtype=np.int64)
        for j, frame in enumerate(range(start, stop)):
            rng = np.random.default_rng([self.cfg.seed, frame])
            payload = rng.integers(0, 2, self.payload_bits, dtype=np.uint8)
            u = attach_crcs(self.layout, self.specs, payload)
            y = transmit(modulate(polar_transform(u)), sigma2, rng)
            u_hat = self.decoder.decode(channel_llrs(y, sigma2))
            errors = int(np.count_nonzero(u_hat[self.payload_positions] != payload))
            bit_err[j] = errors
            frame_err[j] = errors > 0
        return frame_err, bit_err


_WORKER_SIMS: dict = {}


def _worker_frames(cfg: SimConfig, ebn0_db: float, start: int, stop: int):
    sim = _WORKER_SIMS.get(cfg)
    if sim is None:
        sim = _WORKER_SIMS[cfg] = Simulator(cfg)
    return sim.run_frames(ebn0_db, start, stop)


def run_point(cfg: SimConfig, ebn0_db: float, executor=None) -> PointResult:
    """Simulate one Eb/N0 point under the stopping rule."""
    sim = _WORKER_SIMS.get(cfg) or _WORKER_SIMS.setdefault(cfg, Simulator(cfg))
    frames = frame_errors = bit_errors = 0
    next_frame = 0
    while next_frame < cfg.max_frames:
        spans = []
        for _ in range(cfg.workers):
            if next_frame >= cfg.max_frames:
                break
            stop = min(next_frame + cfg.chunk_frames, cfg.max_frames)
            spans.append((next_frame, stop))
            next_frame = stop
        if executor is None:
            parts = [sim.run_frames(ebn0_db, a, b) for a, b in spans]
        else:
            futures = [executor.submit(_worker_frames, cfg, ebn0_db, a, b) for a, b in spans]
            parts = [f.result() for f in futures]
        fe = np.concatenate([p[0] for p in parts])
        be = np.concatenate([p[1] for p in parts])
        needed = cfg.min_frame_errors - frame_errors
        cum = np.cumsum(fe)
        if cum.size and cum[-1] >= needed:
            cut = int(np.searchsorted(cum, needed)) + 1
            frames += cut
            frame_errors += int(cum[cut - 1])
            bit_errors += int(be[:cut].sum())
            break
        frames += fe.size
        frame_errors += int(cum[-1]) if cum.size else 0
        bit_errors += int(be.sum())
        log.debug("%s %.2f dB: %d frames, %d errors", cfg.label, ebn0_db, frames, frame_errors)
    row = PointResult.from_counts(ebn0_db, frames, frame_errors, bit_errors, sim.payload_bits)
    log.info(
        "%s %.2f dB: FER %.3e BER %.3e (%d/%d frames)",
        cfg.label, ebn0_db, row.fer, row.ber, frame_errors, frames,
    )
    return row


def metadata(cfg: SimConfig) -> dict:
    sim = _WORKER_SIMS.get(cfg) or _WORKER_SIMS.setdefault(cfg, Simulator(cfg))
    return {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(cfg).items()},
        "label": cfg.label,
        "construction": {"method": cfg.construction, "design_snr_db": cfg.design_snr_db},
        "crc": [str(s) if s.enabled else "none" for s in sim.specs],
        "payload_bits": sim.payload_bits,
        "ber_denominator": "payload bits (K minus all CRC bits)",
        "llr_arithmetic": "float64, min-sum",
        "seed": cfg.seed,
        "version": version_string(),
    }


def _pool(workers: int):
    if workers <= 1:
        return None
    methods = multiprocessing.get_all_start_methods()
    ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
    return ProcessPoolExecutor(max_workers=workers, mp_context=ctx)


def run_campaign(cfg: SimConfig, write: bool = True) -> SimResult:
    """Run every sweep point in ascending Eb/N0, rewriting the result files after each."""
    result = SimResult(metadata=metadata(cfg))
    out = Path(cfg.output_dir)
    executor = _pool(cfg.workers)
    try:
        for ebn0 in sorted(cfg.ebn0_db):
            result.rows.append(run_point(cfg, ebn0, executor))
            if write:
                try:
                    write_result(result, out, cfg.name)
                except OSError as exc:
                    log.error("could not write results for %.2f dB: %s", ebn0, exc)
                    result.metadata.setdefault("io_errors", []).append(f"{ebn0}: {exc}")
    finally:
        if executor is not None:
            executor.shutdown()
    return result


def emit(result: SimResult, fmt: str = "csv") -> str:
    """Serialize to CSV (rows only) or JSON (rows plus metadata)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow([repr(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(
            {"metadata": result.metadata, "rows": [dataclasses.asdict(r) for r in result.rows]},
            indent=2,
        )
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> list[PointResult]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError("unexpected CSV columns")
    rows = []
    for rec in reader:
        rows.append(
            PointResult(
                ebn0_db=float(rec["ebn0_db"]),
                frames=int(rec["frames"]),
                frame_errors=int(rec["frame_errors"]),
                bit_errors=int(rec["bit_errors"]),
                fer=float(rec["fer"]),
                ber=float(rec["ber"]),
                ci95=float(rec["ci95"]),
            )
        )
    return rows


def parse_json(text: str) -> SimResult:
    data = json.loads(text)
    return SimResult(rows=[PointResult(**r) for r in data["rows"]], metadata=data["metadata"])


def write_result(result: SimResult, out_dir, name: str) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    json_path = out_dir / f"{name}.json"
    csv_path.write_text(emit(result, "csv"), encoding="utf-8")
    json_path.write_text(emit(result, "json"), encoding="utf-8")
    return csv_path, json_path
