"""On-disk sieve cache.

File layout (little endian)::

    magic     7 bytes  b"BFILAB1"
    version   u32
    lo        u64
    hi        u64
    checksum  32 bytes  SHA-256 of everything after the header
    n_flags   u64       number of prime flags (= hi - lo)
    flags     ceil(n_flags / 8) bytes, numpy.packbits order
    n_records u64
    records   n_records * (p u64, e u32)  proper prime powers p**e, e >= 2

``lam`` is never stored; it is re-derived from the structure, so a cached
segment is byte-identical to a freshly sieved one.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import InvariantError
from .sieve import SieveSegment, segment_from_structure

MAGIC = b"BFILAB1"
VERSION = 1
_HEADER = struct.Struct("<7sIQQ32s")
_RECORD = np.dtype([("p", "<u8"), ("e", "<u4")])


def encode(seg: SieveSegment) -> bytes:
    flags = np.packbits(seg.is_prime.astype(np.uint8))
    rec = np.zeros(len(seg.prime_powers), dtype=_RECORD)
    if len(rec):
        rec["p"] = seg.prime_powers[:, 1]
        rec["e"] = seg.prime_powers[:, 2]
    payload = b"".join(
        [
            struct.pack("<Q", len(seg)),
            flags.tobytes(),
            struct.pack("<Q", len(rec)),
            rec.tobytes(),
        ]
    )
    header = _HEADER.pack(MAGIC, VERSION, seg.lo, seg.hi, hashlib.sha256(payload).digest())
    return header + payload


def decode(blob: bytes, source: str = "<bytes>") -> SieveSegment:
    """Parse and verify a cache blob; raises InvariantError on any mismatch."""
    if len(blob) < _HEADER.size:
        raise InvariantError("cache header", f"{source}: truncated header")
    magic, version, lo, hi, digest = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise InvariantError("cache magic", f"{source}: bad magic {magic!r}")
    if version != VERSION:
        raise InvariantError("cache version", f"{source}: unsupported version {version}")
    payload = blob[_HEADER.size :]
    if hashlib.sha256(payload).digest() != digest:
        raise InvariantError("cache checksum mismatch", source)
    (n_flags,) = struct.unpack_from("<Q", payload)
    if n_flags != hi - lo:
        raise InvariantError("cache length", f"{source}: {n_flags} flags for [{lo}, {hi})")
    nbytes = (n_flags + 7) // 8
    off = 8
    flags = np.unpackbits(np.frombuffer(payload, np.uint8, nbytes, off), count=n_flags)
    off += nbytes
    (n_rec,) = struct.unpack_from("<Q", payload, off)
    off += 8
    rec = np.frombuffer(payload, _RECORD, n_rec, off)
    p = rec["p"].astype(np.int64)
    e = rec["e"].astype(np.int64)
    n = np.array([int(pi) ** int(ei) for pi, ei in zip(p.tolist(), e.tolist())], dtype=np.int64)
    pp = np.stack([n, p, e], axis=1) if n_rec else np.zeros((0, 3), np.int64)
    return segment_from_structure(lo, hi, flags.astype(bool), pp)


class SieveCache:
    """A directory of cached sieve segments, one file per interval."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, lo: int, hi: int) -> Path:
        return self.directory / f"sieve_{lo}_{hi}.bfl"

    def load(self, lo: int, hi: int) -> SieveSegment | None:
        path = self.path_for(lo, hi)
        if not path.exists():
            return None
        return decode(path.read_bytes(), str(path))

    def store(self, seg: SieveSegment) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(seg.lo, seg.hi)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(encode(seg))
        tmp.replace(path)
        return path

    def build(self, lo: int, hi: int) -> dict:
        from .sieve import sieve_segment

        seg = sieve_segment(lo, hi)
        path = self.store(seg)
        return self._status("build", lo, hi, path, "ok")

    def verify(self, lo: int, hi: int) -> dict:
        path = self.path_for(lo, hi)
        if not path.exists():
            return self._status("verify", lo, hi, path, "absent")
        decode(path.read_bytes(), str(path))
        return self._status("verify", lo, hi, path, "ok")

    def purge(self, lo: int, hi: int) -> dict:
        path = self.path_for(lo, hi)
        existed = path.exists()
        if existed:
            path.unlink()
        return self._status("purge", lo, hi, path, "removed" if existed else "absent")

    @staticmethod
    def _status(action: str, lo: int, hi: int, path: Path, status: str) -> dict:
        report = {"action": action, "lo": lo, "hi": hi, "path": str(path), "status": status}
        if path.exists():
            report["sha256"] = hashlib.sha256(path.read_bytes()).hexdigest()
        return report
