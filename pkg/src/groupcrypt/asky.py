"""Anonymous key enveloping: per-object file keys wrapped per reader.

Every write draws a fresh 32-byte file key ``fk``, encrypts the content
under it, and prepends an envelope that wraps ``fk`` once per authorized
reader under that reader's personal key.  Fragments carry no identities:

- standard envelopes hold 60-byte fragments ``iv || ct || tag`` in
  uniformly random order; a reader finds theirs by trial decryption
  (expected (r+1)/2 attempts in an r-reader group),
- indexed envelopes prepend a fresh 16-byte nonce and hold 88-byte
  fragments ``label || iv || ct || tag`` sorted by label, where
  ``label = SHA-224(reader_key || nonce)``; the reader recomputes their
  label, binary-searches it, and performs exactly one decryption.

Uploads go through a proxy that asks the enclave to sign SHA-256 of the
full package; readers verify the signature before touching any
ciphertext.  The storage provider sees only signed ciphertext, pseudonym
object ids, and fragments whose count reveals the reader-set size but not
its composition.

Wire formats::

    envelope  "ASKE1" || variant(1) || [nonce(16) if indexed] ||
              count(4 BE) || fragments
    object    "ASKO1" || siglen(2 BE) || signature || envelope || file cipher

where the file cipher is ``iv(12) || ct || tag(16)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from hashlib import sha224

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .enclave import EnclaveState, verify_package
from .errors import (
    AccessDeniedError,
    IntegrityError,
    PermissionDeniedError,
    SerializationError,
)

ENVELOPE_MAGIC = b"ASKE1"
OBJECT_MAGIC = b"ASKO1"
VARIANT_STANDARD = 0
VARIANT_INDEXED = 1

KEY_BYTES = 32
IV_BYTES = 12
TAG_BYTES = 16
NONCE_BYTES = 16
LABEL_BYTES = 28
FRAGMENT_BYTES = IV_BYTES + KEY_BYTES + TAG_BYTES
INDEXED_FRAGMENT_BYTES = LABEL_BYTES + FRAGMENT_BYTES


@dataclass
class ReadStats:
    """Instrumentation for read paths."""

    aead_attempts: int = 0
    label_comparisons: int = 0


def key_enveloping(
    enclave: EnclaveState, writer_id: str, group_id: str, file_key: bytes, rng
) -> bytes:
    """Standard envelope: shuffled anonymous fragments.

    A caller without the writer role receives an empty envelope rather
    than an error.
    """
    frags = enclave.envelope_fragments(writer_id, group_id, file_key, rng)
    out = bytearray()
    out += ENVELOPE_MAGIC
    out.append(VARIANT_STANDARD)
    out += len(frags).to_bytes(4, "big")
    for frag in frags:
        assert len(frag) == FRAGMENT_BYTES
        out += frag
    return bytes(out)


def key_enveloping_indexed(
    enclave: EnclaveState, writer_id: str, group_id: str, file_key: bytes, rng
) -> bytes:
    """Indexed envelope: label-sorted fragments plus the label nonce."""
    nonce, frags = enclave.envelope_fragments_indexed(
        writer_id, group_id, file_key, rng
    )
    out = bytearray()
    out += ENVELOPE_MAGIC
    out.append(VARIANT_INDEXED)
    out += nonce
    out += len(frags).to_bytes(4, "big")
    for frag in frags:
        assert len(frag) == INDEXED_FRAGMENT_BYTES
        out += frag
    return bytes(out)


def parse_envelope(data: bytes) -> tuple[int, bytes, list[bytes], int]:
    """Split an envelope; returns (variant, nonce, fragments, total length).

    ``total length`` is how many bytes of ``data`` the envelope occupies,
    so callers can locate the payload that follows it.
    """
    if data[: len(ENVELOPE_MAGIC)] != ENVELOPE_MAGIC:
        raise SerializationError("bad envelope magic")
    off = len(ENVELOPE_MAGIC)
    if off >= len(data):
        raise SerializationError("envelope truncated")
    variant = data[off]
    off += 1
    nonce = b""
    if variant == VARIANT_INDEXED:
        nonce = data[off : off + NONCE_BYTES]
        if len(nonce) != NONCE_BYTES:
            raise SerializationError("envelope truncated")
        off += NONCE_BYTES
    elif variant != VARIANT_STANDARD:
        raise SerializationError(f"unknown envelope variant: {variant}")
    if off + 4 > len(data):
        raise SerializationError("envelope truncated")
    count = int.from_bytes(data[off : off + 4], "big")
    off += 4
    frag_len = INDEXED_FRAGMENT_BYTES if variant == VARIANT_INDEXED else FRAGMENT_BYTES
    need = count * frag_len
    if off + need > len(data):
        raise SerializationError("envelope truncated")
    frags = [data[off + i * frag_len : off + (i + 1) * frag_len] for i in range(count)]
    return variant, nonce, frags, off + need


def proxy_write(enclave: EnclaveState, store, writer_id: str, group_id: str,
                object_id: str, package: bytes) -> None:
    """Upload path: have the enclave authorize and sign, then store.

    The stored object is ``ASKO1 || siglen || signature || package``.
    An unauthorized writer raises ``PermissionDeniedError`` and nothing is
    stored.
    """
    sig = enclave.sign_package(writer_id, group_id, package)
    store.put(object_id, OBJECT_MAGIC + len(sig).to_bytes(2, "big") + sig + package)


def proxy_write_with_token(enclave: EnclaveState, store, token: bytes,
                           object_id: str, package: bytes,
                           now: float | None = None) -> None:
    """Upload using a pre-issued write capability instead of an ACL check."""
    sig = enclave.sign_with_token(token, object_id, package, now=now)
    store.put(object_id, OBJECT_MAGIC + len(sig).to_bytes(2, "big") + sig + package)


def _split_object(data: bytes) -> tuple[bytes, bytes]:
    """Return (signature, package) from a stored object."""
    if data[: len(OBJECT_MAGIC)] != OBJECT_MAGIC:
        raise SerializationError("bad object magic")
    off = len(OBJECT_MAGIC)
    if off + 2 > len(data):
        raise SerializationError("object truncated")
    siglen = int.from_bytes(data[off : off + 2], "big")
    off += 2
    sig = data[off : off + siglen]
    if len(sig) != siglen:
        raise SerializationError("object truncated")
    return sig, data[off + siglen :]


def _build_package(envelope: bytes, file_key: bytes, content: bytes, rng) -> bytes:
    iv = rng.randbytes(IV_BYTES)
    ct = AESGCM(file_key).encrypt(iv, content, None)
    return envelope + iv + ct


def write_to_group(
    enclave: EnclaveState,
    store,
    writer_id: str,
    group_id: str,
    object_id: str,
    content: bytes,
    rng,
    indexed: bool = False,
) -> None:
    """Encrypt ``content`` under a fresh file key and upload it.

    The package is envelope followed by file cipher; permission errors
    from the signing step propagate.
    """
    file_key = rng.randbytes(KEY_BYTES)
    if indexed:
        envelope = key_enveloping_indexed(enclave, writer_id, group_id, file_key, rng)
    else:
        envelope = key_enveloping(enclave, writer_id, group_id, file_key, rng)
    package = _build_package(envelope, file_key, content, rng)
    proxy_write(enclave, store, writer_id, group_id, object_id, package)


def _open_file_cipher(file_key: bytes, payload: bytes) -> bytes:
    if len(payload) < IV_BYTES + TAG_BYTES:
        raise SerializationError("file cipher truncated")
    try:
        return AESGCM(file_key).decrypt(payload[:IV_BYTES], payload[IV_BYTES:], None)
    except InvalidTag as exc:
        raise IntegrityError("file cipher failed authentication") from exc


def read_file(
    store,
    object_id: str,
    reader_key: bytes,
    verify_key: bytes,
    stats: ReadStats | None = None,
) -> bytes:
    """Standard read: verify the signature, then trial-decrypt fragments.

    The signature is checked before any fragment is touched; a bad
    signature raises ``IntegrityError``.  A reader whose key opens no
    fragment gets ``AccessDeniedError``.
    """
    data = store.get(object_id)
    sig, package = _split_object(data)
    if not verify_package(verify_key, package, sig):
        raise IntegrityError("object signature invalid")
    variant, nonce, frags, env_len = parse_envelope(package)
    if variant == VARIANT_INDEXED:
        return _read_indexed(reader_key, nonce, frags, package[env_len:], stats)
    aead = AESGCM(reader_key)
    file_key = None
    for frag in frags:
        if stats is not None:
            stats.aead_attempts += 1
        try:
            file_key = aead.decrypt(frag[:IV_BYTES], frag[IV_BYTES:], None)
            break
        except InvalidTag:
            continue
    if file_key is None:
        raise AccessDeniedError("no envelope fragment opened with this key")
    return _open_file_cipher(file_key, package[env_len:])


def _read_indexed(
    reader_key: bytes,
    nonce: bytes,
    frags: list[bytes],
    payload: bytes,
    stats: ReadStats | None,
) -> bytes:
    """Search the label index; one decryption on the hit.

    The search halves the candidate range with one ordering comparison per
    step (ceil(log2 r) comparisons for r fragments) and lands on the
    rightmost fragment whose label is not above the target.  The AEAD tag
    check on that candidate doubles as the membership test, so an
    authorized reader spends exactly one decryption.
    """
    if not frags:
        raise AccessDeniedError("envelope holds no fragments")
    label = sha224(reader_key + nonce).digest()
    lo, hi = 0, len(frags)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if stats is not None:
            stats.label_comparisons += 1
        if frags[mid][:LABEL_BYTES] <= label:
            lo = mid
        else:
            hi = mid
    aead = AESGCM(reader_key)
    # colliding labels are astronomically unlikely, but fragments to the
    # left with the same label are probed rather than failing the read
    idx = lo
    while True:
        frag = frags[idx][LABEL_BYTES:]
        if stats is not None:
            stats.aead_attempts += 1
        try:
            file_key = aead.decrypt(frag[:IV_BYTES], frag[IV_BYTES:], None)
            return _open_file_cipher(file_key, payload)
        except InvalidTag:
            pass
        if idx == 0 or frags[idx][:LABEL_BYTES] != label:
            break
        if stats is not None:
            stats.label_comparisons += 1
        if frags[idx - 1][:LABEL_BYTES] != label:
            break
        idx -= 1
    raise AccessDeniedError("no envelope fragment opened with this key")


def read_file_indexed(
    store,
    object_id: str,
    reader_key: bytes,
    verify_key: bytes,
    stats: ReadStats | None = None,
) -> bytes:
    """Indexed read; rejects objects written with the standard envelope."""
    data = store.get(object_id)
    sig, package = _split_object(data)
    if not verify_package(verify_key, package, sig):
        raise IntegrityError("object signature invalid")
    variant, nonce, frags, env_len = parse_envelope(package)
    if variant != VARIANT_INDEXED:
        raise SerializationError("object does not carry an indexed envelope")
    return _read_indexed(reader_key, nonce, frags, package[env_len:], stats)
