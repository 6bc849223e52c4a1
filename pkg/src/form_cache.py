"""
Binary cache of assembled form matrices.

File layout (little-endian), one file per quadrature digest:

    magic   4 bytes  b"SLFM"
    version u32
    n       u32
    order   f64      s of the fractional-log symbol, s' of the fractional one
    size    u32      basis size N
    tag     u8       0 = fractional-log, 1 = fractional
    digest  32 bytes sha256 of the canonical JSON provenance
    body    N(N+1)/2 f64, the upper triangle in row-major order

A file is only used when every header field matches the request; anything
else (wrong magic, short body, stale digest) is logged and the matrix is
reassembled.
"""
import hashlib
import json
import logging
import struct
from pathlib import Path

import numpy as np

import solver

logger = logging.getLogger(__name__)

MAGIC = b"SLFM"
VERSION = 1
HEADER = struct.Struct("<4sIIdIB32s")


def _symbol_for(params, symbol_tag, order):
    if symbol_tag == solver.FRACTIONAL_LOG:
        return solver.FormSymbol.fractional_log(params)
    if order is None:
        raise ValueError("the fractional symbol needs an order s'")
    return solver.FormSymbol.fractional(order)


def provenance_digest(basis, params, quad, symbol):
    """sha256 over everything the entries depend on."""
    payload = {
        "version": VERSION,
        "n": params.n,
        "s": params.s,
        "basis": basis.describe(),
        "quadrature": quad.describe(),
        "symbol": symbol.describe(),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).digest()


def cache_path(cache_dir, digest):
    return Path(cache_dir) / f"form_{digest.hex()[:16]}.slfm"


def save_form_matrix(matrix, path):
    """Write the header and the upper triangle of `matrix` to `path`."""
    path = Path(path)
    digest = provenance_digest(matrix.basis, matrix.params, matrix.quad, matrix.symbol)
    header = HEADER.pack(
        MAGIC, VERSION, matrix.params.n, matrix.symbol.order, matrix.size,
        solver.SYMBOL_TAGS[matrix.symbol.tag], digest,
    )
    upper = matrix.entries[np.triu_indices(matrix.size)].astype("<f8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(upper.tobytes())
    except OSError as err:
        raise OSError(f"could not write matrix cache {path}: {err}") from err
    return path


def load_form_matrix(path, basis, params, quad, symbol):
    """The cached FormMatrix at `path`, or None when it is missing or does not match."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        raw = path.read_bytes()
    except OSError as err:
        logger.warning("cache file %s unreadable (%s); reassembling", path, err)
        return None
    if len(raw) < HEADER.size:
        logger.warning("cache file %s is truncated; reassembling", path)
        return None

    magic, version, n, order, size, tag, digest = HEADER.unpack_from(raw)
    expected = provenance_digest(basis, params, quad, symbol)
    if magic != MAGIC:
        reason = f"bad magic {magic!r}"
    elif version != VERSION:
        reason = f"version {version} != {VERSION}"
    elif digest != expected:
        reason = "digest mismatch"
    elif (n, size, tag, order) != (params.n, basis.size, solver.SYMBOL_TAGS[symbol.tag], symbol.order):
        reason = "header fields do not match the request"
    elif len(raw) != HEADER.size + 8 * size * (size + 1) // 2:
        reason = "body length does not match the basis size"
    else:
        reason = None
    if reason is not None:
        logger.warning("rejecting cache file %s: %s; reassembling", path, reason)
        return None

    upper = np.frombuffer(raw, dtype="<f8", offset=HEADER.size).astype(float)
    entries = np.zeros((size, size))
    entries[np.triu_indices(size)] = upper
    entries = entries + np.triu(entries, 1).T
    logger.info("cache hit: %s", path)
    return solver.FormMatrix(
        entries=entries, params=params, symbol=symbol, basis=basis, quad=quad, error_estimate=None,
    )


def cached_assembly(basis, params, quad, cache_dir, symbol_tag=solver.FRACTIONAL_LOG, order=None, threads=None):
    """Load the matrix from `cache_dir` when a matching file exists, else assemble and store it.

    Returns (matrix, path, hit).
    """
    symbol = _symbol_for(params, symbol_tag, order)
    path = cache_path(cache_dir, provenance_digest(basis, params, quad, symbol))
    matrix = load_form_matrix(path, basis, params, quad, symbol)
    if matrix is not None:
        return matrix, path, True
    logger.info("cache miss: assembling %s matrix of size %d", symbol.tag, basis.size)
    matrix = solver.assemble_form_matrix(basis, params, quad, symbol_tag, order=order, threads=threads)
    save_form_matrix(matrix, path)
    return matrix, path, False
