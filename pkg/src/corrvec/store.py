"""Atomic result persistence: JSON-lines series, CSV export, manifests.

Every write lands via a temporary file in the target directory followed by
an atomic rename, so an interrupted run never leaves a half-written file.
All floating-point text is canonicalized to 12 significant digits, which
makes byte-identical reruns a meaningful promise and lets the manifest pin
each file with a content digest.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.12g"


def fmt_float(x: float) -> float:
    """Round-trip a float through the canonical 12-significant-digit text."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be persisted")
    return float(FLOAT_FMT % x)


def _canonical(obj):
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, (np.floating,)):
        return fmt_float(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": fmt_float(obj.real), "im": fmt_float(obj.imag)}
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def dumps_canonical(obj) -> str:
    """JSON text with sorted keys and 12-significant-digit floats."""
    return json.dumps(_canonical(obj), sort_keys=True, separators=(",", ":"))


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_of_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def series_lines(zs: np.ndarray, g: np.ndarray,
                 extras: list[dict] | None = None) -> str:
    """One JSON line per frequency: z, flattened G (re/im), trace spectrum.

    ``extras`` supplies per-point diagnostic fields (residuals, gamma,
    depth, ...) merged into each record.
    """
    from .greens import trace_spectrum

    lines = []
    for k, z in enumerate(zs):
        rec = {
            "z_re": float(np.real(z)),
            "z_im": float(np.imag(z)),
            "g_re": g[k].real.ravel(),
            "g_im": g[k].imag.ravel(),
            "trace_spectrum": trace_spectrum(g[k]),
        }
        if extras is not None:
            rec.update(extras[k])
        lines.append(dumps_canonical(rec))
    return "\n".join(lines) + "\n"


def write_series(path: str | Path, zs: np.ndarray, g: np.ndarray,
                 extras: list[dict] | None = None) -> None:
    write_text_atomic(path, series_lines(zs, g, extras))


def read_series(path: str | Path) -> tuple[np.ndarray, np.ndarray, list[dict]]:
    """Load a JSON-lines series back into (zs, G, extras)."""
    zs, mats, extras = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            zs.append(rec["z_re"] + 1j * rec["z_im"])
            re = np.asarray(rec["g_re"], dtype=float)
            im = np.asarray(rec["g_im"], dtype=float)
            n = int(round(math.sqrt(re.size)))
            if n * n != re.size:
                raise ValueError(f"{path}: G is not square at point {len(zs) - 1}")
            mats.append((re + 1j * im).reshape(n, n))
            extras.append({k: v for k, v in rec.items()
                           if k not in ("z_re", "z_im", "g_re", "g_im")})
    return np.asarray(zs), np.asarray(mats), extras


def spectrum_csv(zs: np.ndarray, g: np.ndarray) -> str:
    """Plot-ready table: raw Im-trace plus the -(1/pi)-scaled column."""
    from .greens import trace_spectrum

    rows = ["z_re,z_im,trace_spectrum,spectral_function"]
    for k, z in enumerate(zs):
        tr = trace_spectrum(g[k])
        rows.append(",".join(FLOAT_FMT % v for v in
                             (np.real(z), np.imag(z), tr, -tr / math.pi)))
    return "\n".join(rows) + "\n"


def write_spectrum_csv(path: str | Path, zs: np.ndarray, g: np.ndarray) -> None:
    write_text_atomic(path, spectrum_csv(zs, g))


class CheckpointStore:
    """Per-point solver checkpoints with atomic whole-file rewrites.

    Records accumulate in memory keyed by (branch, orbital, k); each save
    rewrites the JSON-lines file through the rename discipline, so a kill
    at any instant leaves either the previous or the new consistent state.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.records: dict[tuple[str, int, int], dict] = {}
        if self.path.exists():
            with open(self.path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self.records[(rec["branch"], rec["orbital"], rec["k"])] = rec

    def add(self, rec_dict: dict) -> None:
        key = (rec_dict["branch"], rec_dict["orbital"], rec_dict["k"])
        self.records[key] = rec_dict
        self.save()

    def save(self) -> None:
        lines = [dumps_canonical(self.records[k]) for k in sorted(self.records)]
        write_text_atomic(self.path, "\n".join(lines) + "\n" if lines else "")

    def by_column(self) -> dict[tuple[str, int], dict[int, dict]]:
        out: dict[tuple[str, int], dict[int, dict]] = {}
        for (branch, orbital, k), rec in self.records.items():
            out.setdefault((branch, orbital), {})[k] = rec
        return out


class ManifestWriter:
    """Run manifest: config snapshot, stage log, file digests, timing."""

    def __init__(self, out_dir: str | Path, config_snapshot: dict):
        self.out_dir = Path(out_dir)
        self.data = {
            "config": config_snapshot,
            "stages": [],
            "files": {},
            "versions": {"numpy": np.__version__},
            "wall_clock_s": 0.0,
        }
        self._t0 = time.perf_counter()

    def stage(self, name: str, status: str, **info) -> None:
        entry = {"name": name, "status": status}
        entry.update(info)
        self.data["stages"].append(entry)

    def register(self, path: str | Path) -> None:
        path = Path(path)
        rel = os.path.relpath(path, self.out_dir)
        self.data["files"][rel] = sha256_of_file(path)

    def finish(self) -> Path:
        self.data["wall_clock_s"] = round(time.perf_counter() - self._t0, 3)
        target = self.out_dir / "manifest.json"
        text = json.dumps(_canonical(self.data), sort_keys=True, indent=2)
        write_text_atomic(target, text + "\n")
        return target


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Return the files whose digest no longer matches (empty = intact)."""
    out_dir = Path(out_dir)
    with open(out_dir / "manifest.json") as fh:
        data = json.load(fh)
    bad = []
    for rel, digest in data["files"].items():
        target = out_dir / rel
        if not target.exists() or sha256_of_file(target) != digest:
            bad.append(rel)
    return bad
