"""Binary snapshots of a Riccati state and its prior.

Layout, all little-endian:

    8s   magic "RICSNAP1"
    u32  version (1)
    u32  n
    f64  t
    f64  lambda
    u8   Sc present flag
    f64  Sc (0 when absent)
    f64  Sxx, n*n row-major
    f64  Sx, n
    f64  M, n*n row-major
    f64  c, n
    32s  SHA-256 config digest
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import BadMagic, DigestMismatch, TruncatedFile, VersionMismatch
from .riccati import QuadRegularizer, RiccatiState

MAGIC = b"RICSNAP1"
VERSION = 1
_HEAD = struct.Struct("<8sIIddBd")
_DIGEST_LEN = 32


def write_snapshot(state: RiccatiState, reg: QuadRegularizer, digest: bytes) -> bytes:
    if len(digest) != _DIGEST_LEN:
        raise ValueError("digest must be 32 bytes")
    head = _HEAD.pack(MAGIC, VERSION, state.n, float(state.t), float(state.lam),
                      int(state.track_sc), float(state.Sc) if state.track_sc else 0.0)
    body = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for a in (state.Sxx, state.Sx, reg.M, reg.c)
    )
    return head + body + digest


def read_snapshot(data: bytes, expected_digest: Optional[bytes] = None, force: bool = False):
    """Decode a snapshot into (state, reg, digest).

    When ``expected_digest`` is given a mismatch raises
    :class:`DigestMismatch` unless ``force`` is set.
    """
    if len(data) < len(MAGIC):
        raise TruncatedFile("snapshot shorter than its magic")
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagic("not a ricstream snapshot")
    if len(data) < _HEAD.size:
        raise TruncatedFile("snapshot header is incomplete")
    _, version, n, t, lam, flag, sc = _HEAD.unpack_from(data)
    if version != VERSION:
        raise VersionMismatch(f"snapshot version {version}, expected {VERSION}")
    sizes = (n * n, n, n * n, n)
    need = _HEAD.size + 8 * sum(sizes) + _DIGEST_LEN
    if len(data) < need:
        raise TruncatedFile(f"snapshot has {len(data)} bytes, expected {need}")
    if len(data) > need:
        raise TruncatedFile(f"snapshot has {len(data) - need} trailing bytes")
    arrays = []
    off = _HEAD.size
    for size in sizes:
        arrays.append(np.frombuffer(data, dtype="<f8", count=size, offset=off).astype(np.float64))
        off += 8 * size
    digest = bytes(data[off:off + _DIGEST_LEN])
    if expected_digest is not None and digest != expected_digest and not force:
        raise DigestMismatch("snapshot was written under a different configuration")
    Sxx, Sx, M, c = arrays
    state = RiccatiState(Sxx=Sxx.reshape(n, n), Sx=Sx, lam=lam, t=t, Sc=sc if flag else None)
    reg = QuadRegularizer(M.reshape(n, n), c)
    return state, reg, digest


def save_snapshot(path, state, reg, digest) -> None:
    Path(path).write_bytes(write_snapshot(state, reg, digest))


def load_snapshot(path, expected_digest=None, force=False):
    return read_snapshot(Path(path).read_bytes(), expected_digest, force)
