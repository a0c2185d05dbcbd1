"""Minimal object-store abstraction used by every persistence path.

Two interchangeable backends: an in-memory dict for tests and benchmarks,
and a directory tree for durable runs.  Object ids are slash-separated
paths; the id grammar is validated on every call so a backend can map ids
to filesystem paths without traversal surprises.
"""

from __future__ import annotations

import os
import threading
import uuid
from pathlib import Path

from .errors import NotFoundError, StoreError


def _check_id(object_id: str) -> None:
    if not isinstance(object_id, str) or not object_id:
        raise StoreError("object id must be a non-empty string")
    if object_id.startswith("/") or object_id.endswith("/"):
        raise StoreError(f"object id may not start or end with '/': {object_id!r}")
    for seg in object_id.split("/"):
        if not seg:
            raise StoreError(f"object id has an empty segment: {object_id!r}")
        if seg in (".", ".."):
            raise StoreError(f"object id segment not allowed: {object_id!r}")
        if "\x00" in seg or "\\" in seg:
            raise StoreError(f"object id has forbidden characters: {object_id!r}")


def _check_prefix(prefix: str) -> None:
    if not isinstance(prefix, str):
        raise StoreError("prefix must be a string")
    if "\x00" in prefix or "\\" in prefix or ".." in prefix.split("/"):
        raise StoreError(f"prefix has forbidden characters: {prefix!r}")


class ObjectStore:
    """Interface: byte blobs addressed by slash-separated string ids.

    ``put`` overwrites (last writer wins), ``get`` of a missing id raises
    ``NotFoundError``, ``list`` returns ids with the given string prefix in
    lexicographic order, and ``delete`` is idempotent.
    """

    def put(self, object_id: str, data: bytes) -> None:
        raise NotImplementedError

    def get(self, object_id: str) -> bytes:
        raise NotImplementedError

    def list(self, prefix: str = "") -> list[str]:
        raise NotImplementedError

    def delete(self, object_id: str) -> None:
        raise NotImplementedError


class MemoryStore(ObjectStore):
    """Dict-backed store; thread-safe for concurrent puts and gets."""

    def __init__(self) -> None:
        self._objects: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def put(self, object_id: str, data: bytes) -> None:
        _check_id(object_id)
        if not isinstance(data, (bytes, bytearray)):
            raise StoreError("data must be bytes")
        with self._lock:
            self._objects[object_id] = bytes(data)

    def get(self, object_id: str) -> bytes:
        _check_id(object_id)
        with self._lock:
            try:
                return self._objects[object_id]
            except KeyError:
                raise NotFoundError(f"no such object: {object_id!r}") from None

    def list(self, prefix: str = "") -> list[str]:
        _check_prefix(prefix)
        with self._lock:
            return sorted(k for k in self._objects if k.startswith(prefix))

    def delete(self, object_id: str) -> None:
        _check_id(object_id)
        with self._lock:
            self._objects.pop(object_id, None)


class DirectoryStore(ObjectStore):
    """Filesystem store rooted at a directory.

    Writes go to a temporary sibling file followed by an atomic rename, so
    a reader never observes a half-written object.
    """

    def __init__(self, root: str | os.PathLike) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, object_id: str) -> Path:
        _check_id(object_id)
        return self.root / object_id

    def put(self, object_id: str, data: bytes) -> None:
        if not isinstance(data, (bytes, bytearray)):
            raise StoreError("data must be bytes")
        path = self._path(object_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.parent / f".{path.name}.{uuid.uuid4().hex}.tmp"
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except OSError as exc:
            tmp.unlink(missing_ok=True)
            raise StoreError(f"write failed for {object_id!r}: {exc}") from exc

    def get(self, object_id: str) -> bytes:
        path = self._path(object_id)
        try:
            with open(path, "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            raise NotFoundError(f"no such object: {object_id!r}") from None
        except OSError as exc:
            raise StoreError(f"read failed for {object_id!r}: {exc}") from exc

    def list(self, prefix: str = "") -> list[str]:
        _check_prefix(prefix)
        out = []
        for dirpath, _dirnames, filenames in os.walk(self.root):
            for name in filenames:
                if name.endswith(".tmp") and name.startswith("."):
                    continue
                rel = (Path(dirpath) / name).relative_to(self.root).as_posix()
                if rel.startswith(prefix):
                    out.append(rel)
        return sorted(out)

    def delete(self, object_id: str) -> None:
        path = self._path(object_id)
        try:
            path.unlink(missing_ok=True)
        except OSError as exc:
            raise StoreError(f"delete failed for {object_id!r}: {exc}") from exc
