"""
Unit tests for the binary matrix cache in form_cache.py

Following tests are included:
    - save/load keeps the entries bit for bit
    - cache hits, digest keyed file names
    - corrupted, truncated or stale files are rejected and the matrix reassembled
"""
import logging

import numpy as np
import pytest

import form_cache
import solver
from bounds import DomainGeometry
from coremath import SpectralParams

HALF = SpectralParams(n=1, s=0.5)


@pytest.fixture
def setup():
    basis = solver.GalerkinBasis.for_box(DomainGeometry.box([np.pi]), 16)
    quad = solver.QuadratureConfig.for_basis(basis)
    return basis, quad


def test_save_and_load_keep_entries(setup, tmp_path):
    basis, quad = setup
    matrix = solver.assemble_form_matrix(basis, HALF, quad)
    path = form_cache.save_form_matrix(matrix, tmp_path / "matrix.slfm")

    expected_size = form_cache.HEADER.size + 8 * 16 * 17 // 2
    assert path.stat().st_size == expected_size
    loaded = form_cache.load_form_matrix(path, basis, HALF, quad, matrix.symbol)
    assert loaded is not None
    assert np.array_equal(loaded.entries, matrix.entries)
    assert loaded.basis == basis and loaded.quad == quad


def test_cache_file_name_is_digest_keyed(setup, tmp_path):
    basis, quad = setup
    symbol = solver.FormSymbol.fractional_log(HALF)
    digest = form_cache.provenance_digest(basis, HALF, quad, symbol)
    assert len(digest) == 32
    path = form_cache.cache_path(tmp_path, digest)
    assert path.name == f"form_{digest.hex()[:16]}.slfm"

    other_quad = solver.QuadratureConfig.for_basis(basis, factor=5.0)
    assert form_cache.provenance_digest(basis, HALF, other_quad, symbol) != digest
    fractional = solver.FormSymbol.fractional(0.5)
    assert form_cache.provenance_digest(basis, HALF, quad, fractional) != digest


def test_cached_assembly_hits_on_second_call(setup, tmp_path, caplog):
    basis, quad = setup
    first, path, hit = form_cache.cached_assembly(basis, HALF, quad, tmp_path)
    assert not hit
    assert path.exists()

    with caplog.at_level(logging.INFO, logger="form_cache"):
        second, same_path, hit = form_cache.cached_assembly(basis, HALF, quad, tmp_path)
    assert hit
    assert same_path == path
    assert np.array_equal(first.entries, second.entries)
    assert "cache hit" in caplog.text


def test_corrupted_magic_triggers_reassembly(setup, tmp_path, caplog):
    basis, quad = setup
    matrix, path, _ = form_cache.cached_assembly(basis, HALF, quad, tmp_path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))

    with caplog.at_level(logging.WARNING, logger="form_cache"):
        again, _, hit = form_cache.cached_assembly(basis, HALF, quad, tmp_path)
    assert not hit
    assert "bad magic" in caplog.text
    assert np.array_equal(again.entries, matrix.entries)
    # the rewritten file is valid again
    assert path.read_bytes()[:4] == form_cache.MAGIC


def test_truncated_and_mismatched_files_are_rejected(setup, tmp_path):
    basis, quad = setup
    matrix = solver.assemble_form_matrix(basis, HALF, quad)
    path = form_cache.save_form_matrix(matrix, tmp_path / "matrix.slfm")

    other = solver.GalerkinBasis.for_box(basis.box, 12)
    assert form_cache.load_form_matrix(path, other, HALF, quad, matrix.symbol) is None

    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    assert form_cache.load_form_matrix(path, basis, HALF, quad, matrix.symbol) is None
    path.write_bytes(raw[:10])
    assert form_cache.load_form_matrix(path, basis, HALF, quad, matrix.symbol) is None
    assert form_cache.load_form_matrix(tmp_path / "missing.slfm", basis, HALF, quad, matrix.symbol) is None


def test_fractional_symbol_needs_order(setup, tmp_path):
    basis, quad = setup
    with pytest.raises(ValueError):
        form_cache.cached_assembly(basis, HALF, quad, tmp_path, solver.FRACTIONAL)
