"""Hybrid-encryption baseline: one key wrap per member.

The comparison point for the partitioned broadcast scheme.  The group key
is individually wrapped for every member under their public key, so
metadata grows affinely with membership and a removal must re-wrap for
everyone who remains (O(N)), while an addition appends one wrap (O(1)).

Wrapping uses an ephemeral X25519 exchange, HKDF-SHA256, and AES-GCM.
Each wrap entry is exactly 92 bytes:

    ephemeral public key (32) || iv (12) || ciphertext (32) || tag (16)

Serialized group metadata: ``HEGM1 || count(4 BE)`` followed by one
``idlen(2 BE) || id || entry(92)`` record per member.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives import serialization

from .errors import (
    AuthenticationError,
    DuplicateError,
    MembershipError,
    SerializationError,
)

META_MAGIC = b"HEGM1"
PUB_BYTES = 32
IV_BYTES = 12
KEY_BYTES = 32
TAG_BYTES = 16
ENTRY_BYTES = PUB_BYTES + IV_BYTES + KEY_BYTES + TAG_BYTES


@dataclass
class WrapCounter:
    """Counts individual key-wrap operations for benchmarking."""

    wraps: int = 0


@dataclass
class HEKeyPair:
    """A member's long-term X25519 key pair."""

    user_id: str
    private: X25519PrivateKey

    @property
    def public_bytes(self) -> bytes:
        return self.private.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )


def gen_keypair(user_id: str, rng) -> HEKeyPair:
    """Deterministic under a seeded ``rng``."""
    return HEKeyPair(
        user_id, X25519PrivateKey.from_private_bytes(rng.randbytes(KEY_BYTES))
    )


def _kdf(shared: bytes, eph_pub: bytes, recipient_pub: bytes) -> bytes:
    return HKDF(
        algorithm=SHA256(),
        length=KEY_BYTES,
        salt=None,
        info=b"he-group-wrap" + eph_pub + recipient_pub,
    ).derive(shared)


def _wrap(recipient_pub: bytes, gk: bytes, rng, counter: WrapCounter | None) -> bytes:
    eph = X25519PrivateKey.from_private_bytes(rng.randbytes(KEY_BYTES))
    eph_pub = eph.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    shared = eph.exchange(X25519PublicKey.from_public_bytes(recipient_pub))
    key = _kdf(shared, eph_pub, recipient_pub)
    iv = rng.randbytes(IV_BYTES)
    ct = AESGCM(key).encrypt(iv, gk, None)
    if counter is not None:
        counter.wraps += 1
    entry = eph_pub + iv + ct
    assert len(entry) == ENTRY_BYTES
    return entry


@dataclass
class HEGroupMeta:
    """Per-group metadata: one wrap entry per member, insertion ordered."""

    group_id: str
    entries: dict[str, bytes] = field(default_factory=dict)

    def metadata_bytes(self) -> int:
        return len(self.to_bytes())

    def to_bytes(self) -> bytes:
        out = bytearray()
        out += META_MAGIC
        out += len(self.entries).to_bytes(4, "big")
        for uid, entry in self.entries.items():
            raw = uid.encode()
            if len(raw) > 0xFFFF:
                raise SerializationError("member id longer than 65535 bytes")
            out += len(raw).to_bytes(2, "big")
            out += raw
            out += entry
        return bytes(out)

    @classmethod
    def from_bytes(cls, group_id: str, data: bytes) -> "HEGroupMeta":
        if data[: len(META_MAGIC)] != META_MAGIC:
            raise SerializationError("bad hybrid metadata magic")
        off = len(META_MAGIC)

        def take(k: int) -> bytes:
            nonlocal off
            if off + k > len(data):
                raise SerializationError("hybrid metadata truncated")
            chunk = data[off : off + k]
            off += k
            return chunk

        count = int.from_bytes(take(4), "big")
        entries: dict[str, bytes] = {}
        for _ in range(count):
            idlen = int.from_bytes(take(2), "big")
            uid = take(idlen).decode()
            if uid in entries:
                raise SerializationError(f"duplicate entry for {uid!r}")
            entries[uid] = take(ENTRY_BYTES)
        if off != len(data):
            raise SerializationError("trailing bytes after hybrid metadata")
        return cls(group_id=group_id, entries=entries)


def he_create_group(
    group_id: str,
    member_pubs: dict[str, bytes],
    gk: bytes,
    rng,
    counter: WrapCounter | None = None,
) -> HEGroupMeta:
    """Wrap ``gk`` for every member; one wrap per member."""
    meta = HEGroupMeta(group_id=group_id)
    for uid, pub in member_pubs.items():
        if uid in meta.entries:
            raise DuplicateError(f"duplicate member id: {uid!r}")
        meta.entries[uid] = _wrap(pub, gk, rng, counter)
    return meta


def he_add_user(
    meta: HEGroupMeta,
    user_id: str,
    pub: bytes,
    gk: bytes,
    rng,
    counter: WrapCounter | None = None,
) -> None:
    """Append one wrap entry; constant cost."""
    if user_id in meta.entries:
        raise DuplicateError(f"{user_id!r} is already a member")
    meta.entries[user_id] = _wrap(pub, gk, rng, counter)


def he_remove_user(
    meta: HEGroupMeta,
    user_id: str,
    member_pubs: dict[str, bytes],
    gk_new: bytes,
    rng,
    counter: WrapCounter | None = None,
) -> None:
    """Drop a member and re-wrap a fresh group key for everyone remaining.

    ``member_pubs`` must cover every remaining member; cost is linear in
    the remaining membership.
    """
    if user_id not in meta.entries:
        raise MembershipError(f"{user_id!r} is not a member")
    remaining = [uid for uid in meta.entries if uid != user_id]
    missing = [uid for uid in remaining if uid not in member_pubs]
    if missing:
        raise MembershipError(f"missing public keys for: {missing!r}")
    meta.entries = {
        uid: _wrap(member_pubs[uid], gk_new, rng, counter) for uid in remaining
    }


def he_unwrap(meta: HEGroupMeta, user_id: str, private: X25519PrivateKey) -> bytes:
    """Recover the group key from the member's own wrap entry."""
    entry = meta.entries.get(user_id)
    if entry is None:
        raise AuthenticationError(f"no wrap entry for {user_id!r}")
    eph_pub = entry[:PUB_BYTES]
    iv = entry[PUB_BYTES : PUB_BYTES + IV_BYTES]
    ct = entry[PUB_BYTES + IV_BYTES :]
    recipient_pub = private.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    shared = private.exchange(X25519PublicKey.from_public_bytes(eph_pub))
    key = _kdf(shared, eph_pub, recipient_pub)
    try:
        return AESGCM(key).decrypt(iv, ct, None)
    except InvalidTag as exc:
        raise AuthenticationError("wrap entry failed authentication") from exc
