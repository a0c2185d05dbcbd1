"""Object stores: contract tests plus memory/directory equivalence."""

from __future__ import annotations

import random
import threading

import pytest

from groupcrypt.errors import NotFoundError, StoreError
from groupcrypt.store import DirectoryStore, MemoryStore


def make_stores(tmp_path):
    return [MemoryStore(), DirectoryStore(tmp_path / "objects")]


def test_put_get_overwrite_delete(tmp_path):
    for store in make_stores(tmp_path):
        store.put("a/b/c", b"one")
        assert store.get("a/b/c") == b"one"
        store.put("a/b/c", b"two")  # last writer wins
        assert store.get("a/b/c") == b"two"
        store.delete("a/b/c")
        with pytest.raises(NotFoundError):
            store.get("a/b/c")
        store.delete("a/b/c")  # idempotent


def test_list_prefix_lexicographic(tmp_path):
    for store in make_stores(tmp_path):
        for oid in ("g1/00000002", "g1/00000000", "g1/00000001", "g2/x", "root"):
            store.put(oid, b".")
        assert store.list("g1/") == ["g1/00000000", "g1/00000001", "g1/00000002"]
        assert store.list() == sorted(
            ["g1/00000000", "g1/00000001", "g1/00000002", "g2/x", "root"]
        )
        assert store.list("nope/") == []


def test_id_validation(tmp_path):
    for store in make_stores(tmp_path):
        for bad in ("", "/lead", "trail/", "a//b", "a/../b", "..", "a/.", "nul\x00", "win\\path"):
            with pytest.raises(StoreError):
                store.put(bad, b"x")
            with pytest.raises(StoreError):
                store.get(bad)
        with pytest.raises(StoreError):
            store.put("ok", "not-bytes")


def test_differential_equivalence(tmp_path):
    """Random op sequence must leave both backends observably identical."""
    rng = random.Random(42)
    mem = MemoryStore()
    disk = DirectoryStore(tmp_path / "diff")
    ids = [f"d{i % 3}/o{i}" for i in range(12)]
    for step in range(300):
        op = rng.choice(("put", "get", "delete", "list"))
        oid = rng.choice(ids)
        if op == "put":
            data = rng.randbytes(rng.randrange(0, 64))
            mem.put(oid, data)
            disk.put(oid, data)
        elif op == "delete":
            mem.delete(oid)
            disk.delete(oid)
        elif op == "get":
            try:
                expected = mem.get(oid)
            except NotFoundError:
                with pytest.raises(NotFoundError):
                    disk.get(oid)
            else:
                assert disk.get(oid) == expected
        else:
            prefix = rng.choice(("", "d0/", "d1/", "d2"))
            assert mem.list(prefix) == disk.list(prefix)
    assert mem.list() == disk.list()


def test_directory_store_leaves_no_temp_files(tmp_path):
    store = DirectoryStore(tmp_path / "atomic")
    for i in range(50):
        store.put(f"deep/nest/obj{i}", bytes([i]) * 100)
    leftovers = [p for p in (tmp_path / "atomic").rglob("*.tmp")]
    assert leftovers == []
    assert len(store.list("deep/")) == 50


def test_concurrent_distinct_ids(tmp_path):
    for store in make_stores(tmp_path):
        errors = []

        def worker(base):
            try:
                for i in range(50):
                    store.put(f"w{base}/o{i}", bytes([base]) * 16)
                for i in range(50):
                    assert store.get(f"w{base}/o{i}") == bytes([base]) * 16
            except Exception as exc:  # propagate to the main thread
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(b,)) for b in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert len(store.list()) == 200
