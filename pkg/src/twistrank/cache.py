"""Binary on-disk cache for a_p tables.

Layout (little-endian): a fixed-width header identifying the curve and
bound, the int32 a_p payload plus uint8 reduction tags, and a trailing
8-byte BLAKE2b checksum over everything before it. Writes are atomic
(temp file + rename); any mismatch or corruption is a cache miss, never
an error.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .curve import ApTable, EllipticCurve, build_ap_table

log = logging.getLogger(__name__)

_MAGIC = b"TRAP"
_VERSION = 1
# magic, version, a, b, N, eps, P, nprimes, label
_HEADER = struct.Struct("<4sIqqqqqq64s")
_DIGEST = 8


def cache_path(cache_dir, curve: EllipticCurve, P: int) -> Path:
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in curve.label)
    return Path(cache_dir) / f"{safe or 'curve'}-{curve.a}-{curve.b}-P{P}.apt"


def cache_store(cache_dir, curve: EllipticCurve, table: ApTable) -> Path:
    """Atomically persist a table; round-trips bit-identically."""
    path = cache_path(cache_dir, curve, table.bound)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(_MAGIC, _VERSION, curve.a, curve.b, curve.N,
                          curve.eps, table.bound, len(table.primes),
                          curve.label.encode()[:64].ljust(64, b"\0"))
    payload = table.ap.astype(np.int32).tobytes() + table.tags.tobytes()
    digest = hashlib.blake2b(header + payload, digest_size=_DIGEST).digest()
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
            fh.write(digest)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def cache_load(cache_dir, curve: EllipticCurve, P: int) -> Optional[ApTable]:
    """Load a cached table, or None when absent/corrupt/mismatched."""
    path = cache_path(cache_dir, curve, P)
    if not path.exists():
        return None
    blob = path.read_bytes()
    if len(blob) < _HEADER.size + _DIGEST:
        log.warning("cache %s truncated; rebuilding", path)
        return None
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.blake2b(body, digest_size=_DIGEST).digest() != digest:
        log.warning("cache %s failed checksum; rebuilding", path)
        return None
    magic, version, a, b, N, eps, bound, nprimes, label = _HEADER.unpack(
        body[:_HEADER.size])
    if (magic, version) != (_MAGIC, _VERSION):
        log.warning("cache %s has unknown format; rebuilding", path)
        return None
    if (a, b, N, eps, bound) != (curve.a, curve.b, curve.N, curve.eps, P) \
            or label.rstrip(b"\0").decode() != curve.label:
        log.warning("cache %s is for a different curve; rebuilding", path)
        return None
    payload = body[_HEADER.size:]
    want = nprimes * 4 + nprimes
    if len(payload) != want:
        log.warning("cache %s has wrong payload size; rebuilding", path)
        return None
    ap = np.frombuffer(payload[: nprimes * 4], dtype=np.int32).astype(np.int64)
    tags = np.frombuffer(payload[nprimes * 4:], dtype=np.uint8).copy()
    from .arith import sieve_primes
    primes = sieve_primes(P).primes
    if len(primes) != nprimes:
        log.warning("cache %s prime count mismatch; rebuilding", path)
        return None
    return ApTable(label=curve.label, bound=P, primes=primes, ap=ap, tags=tags)


def get_ap_table(curve: EllipticCurve, P: int,
                 overrides: Optional[Dict[int, int]] = None,
                 cache_dir=None, workers: int = 1) -> ApTable:
    """Cache-aware table fetch: load when valid, else build and store."""
    if cache_dir is not None:
        table = cache_load(cache_dir, curve, P)
        if table is not None:
            log.info("cache hit for %s at P=%d", curve.label, P)
            return table
    table = build_ap_table(curve, P, overrides=overrides, workers=workers)
    if cache_dir is not None:
        cache_store(cache_dir, curve, table)
    return table
