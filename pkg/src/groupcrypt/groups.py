"""Partitioned group key management on top of the broadcast scheme.

A group of N members is split into partitions of at most ``n`` members.
Each partition carries one broadcast cipher plus a wrapped copy ``y`` of
the current 32-byte group key ``gk``: ``y`` is an AES-GCM encryption of
``gk`` under SHA-256 of the partition's broadcast key.  A member derives
``gk`` by running broadcast decryption inside their own partition and then
opening ``y``.

Membership changes:

- additions extend the lowest-id partition with room using the constant
  cost cipher extension; ``y`` stays valid because the broadcast key does
  not change.  When every partition is full a new singleton partition
  wrapping the current ``gk`` is created,
- removals rotate ``gk`` (forward secrecy), strip the leaving member from
  their home partition, re-randomize every other partition, and re-wrap
  the new ``gk`` everywhere; cost is linear in the partition count, not in
  N,
- :func:`maybe_repartition` rebuilds the layout from scratch when at least
  half the partitions have fallen to at most two thirds occupancy.
  Workflows call it after removals; ``remove_user`` itself never triggers
  it, so removal cost stays predictable.

Revocation is lazy toward stored objects: rotating ``gk`` protects future
writes, while objects encrypted under an older ``gk`` remain readable via
metadata snapshots taken before the rotation.

Persistence layout under an object store: one object per partition at
``<group-id>/<zero-padded-partition-id>`` and the sealed group key at
``<group-id>/sealed_gk``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from hashlib import sha256
from typing import Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import ibbe
from .algebra import GTElem, PairingCtx
from .enclave import EnclaveState
from .errors import (
    AuthenticationError,
    DuplicateError,
    MembershipError,
    SerializationError,
)
from .ibbe import BroadcastCipher, PublicKey, UserKey

PARTITION_MAGIC = b"GPT1"
GROUP_KEY_BYTES = 32
IV_BYTES = 12
WRAPPED_KEY_BYTES = GROUP_KEY_BYTES + 16
SEALED_KEY_NAME = "sealed_gk"


def _wrap_key(bk: GTElem) -> bytes:
    return sha256(bk.to_bytes()).digest()


def _wrap_gk(bk: GTElem, gk: bytes, rng) -> tuple[bytes, bytes]:
    """Encrypt ``gk`` under the broadcast key; returns (iv, y)."""
    iv = rng.randbytes(IV_BYTES)
    y = AESGCM(_wrap_key(bk)).encrypt(iv, gk, None)
    return iv, y


@dataclass
class Partition:
    """One broadcast unit: member list, cipher, and wrapped group key."""

    id: int
    members: list[str]
    cipher: BroadcastCipher
    iv: bytes
    y: bytes

    def to_bytes(self) -> bytes:
        out = bytearray()
        out += PARTITION_MAGIC
        out += self.id.to_bytes(4, "big")
        out += len(self.members).to_bytes(4, "big")
        for uid in self.members:
            raw = uid.encode()
            if len(raw) > 0xFFFF:
                raise SerializationError("member id longer than 65535 bytes")
            out += len(raw).to_bytes(2, "big")
            out += raw
        out += self.cipher.to_bytes()
        out += self.iv
        out += len(self.y).to_bytes(4, "big")
        out += self.y
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Partition":
        if data[: len(PARTITION_MAGIC)] != PARTITION_MAGIC:
            raise SerializationError("bad partition magic")
        off = len(PARTITION_MAGIC)

        def take(k: int) -> bytes:
            nonlocal off
            if off + k > len(data):
                raise SerializationError("partition record truncated")
            chunk = data[off : off + k]
            off += k
            return chunk

        pid = int.from_bytes(take(4), "big")
        count = int.from_bytes(take(4), "big")
        members = []
        for _ in range(count):
            idlen = int.from_bytes(take(2), "big")
            members.append(take(idlen).decode())
        cipher = BroadcastCipher.from_bytes(take(ibbe.CIPHER_BYTES))
        iv = take(IV_BYTES)
        ylen = int.from_bytes(take(4), "big")
        y = take(ylen)
        if off != len(data):
            raise SerializationError("trailing bytes after partition record")
        return cls(id=pid, members=members, cipher=cipher, iv=iv, y=y)


@dataclass
class GroupState:
    """All metadata for one group plus the sealed current group key."""

    group_id: str
    n: int
    partitions: list[Partition] = field(default_factory=list)
    user_index: dict[str, int] = field(default_factory=dict)
    sealed_gk: bytes = b""
    next_partition_id: int = 0

    def partition_of(self, user_id: str) -> Partition:
        pid = self.user_index.get(user_id)
        if pid is None:
            raise MembershipError(f"{user_id!r} is not a member")
        for part in self.partitions:
            if part.id == pid:
                return part
        raise MembershipError(f"{user_id!r} indexed to a missing partition")

    def members(self) -> list[str]:
        """Current membership in partition order."""
        out: list[str] = []
        for part in sorted(self.partitions, key=lambda p: p.id):
            out.extend(part.members)
        return out

    def crypto_metadata_bytes(self) -> int:
        """Bytes of cryptographic material: ciphers, wrapped keys, IVs."""
        return sum(
            ibbe.CIPHER_BYTES + len(p.iv) + len(p.y) for p in self.partitions
        )

    def total_metadata_bytes(self) -> int:
        """Full serialized size including member rosters."""
        return sum(len(p.to_bytes()) for p in self.partitions)


def _partition_object_id(group_id: str, pid: int) -> str:
    return f"{group_id}/{pid:08d}"


def _persist_partition(store, group_id: str, part: Partition) -> None:
    if store is not None:
        store.put(_partition_object_id(group_id, part.id), part.to_bytes())


def _persist_sealed(store, state: GroupState) -> None:
    if store is not None:
        store.put(f"{state.group_id}/{SEALED_KEY_NAME}", state.sealed_gk)


def create_group(
    enclave: EnclaveState,
    group_id: str,
    members: Sequence[str],
    n: int,
    rng,
    store=None,
) -> GroupState:
    """Create a group over ``members`` with partition capacity ``n``.

    Members are packed into consecutive partitions of size ``n``.  A fresh
    group key is drawn, wrapped per partition, and stored sealed.
    """
    if n < 1:
        raise ValueError("partition capacity must be at least 1")
    if n > enclave.n:
        raise ValueError(
            f"partition capacity {n} exceeds enclave broadcast capacity {enclave.n}"
        )
    if not members:
        raise ValueError("a group needs at least one member")
    if len(set(members)) != len(members):
        raise DuplicateError("duplicate member ids in group creation")

    gk = enclave.new_group_key(rng)
    state = GroupState(group_id=group_id, n=n, sealed_gk=enclave.seal(gk))
    for start in range(0, len(members), n):
        chunk = list(members[start : start + n])
        bk, cipher = enclave.encrypt_partition(chunk, rng)
        iv, y = _wrap_gk(bk, gk, rng)
        part = Partition(
            id=state.next_partition_id, members=chunk, cipher=cipher, iv=iv, y=y
        )
        state.partitions.append(part)
        for uid in chunk:
            state.user_index[uid] = part.id
        state.next_partition_id += 1
        _persist_partition(store, group_id, part)
    _persist_sealed(store, state)
    return state


def add_user(
    enclave: EnclaveState, state: GroupState, user_id: str, rng, store=None
) -> None:
    """Add a member at constant broadcast cost.

    The lowest-id partition with room absorbs the user via the cipher
    extension; its broadcast key and wrapped group key stay valid.  If all
    partitions are full a new singleton partition wraps the current group
    key.
    """
    if user_id in state.user_index:
        raise DuplicateError(f"{user_id!r} is already a member")
    target = None
    for part in sorted(state.partitions, key=lambda p: p.id):
        if len(part.members) < state.n:
            target = part
            break
    if target is not None:
        target.cipher = enclave.add_to_cipher(target.cipher, user_id)
        target.members.append(user_id)
        state.user_index[user_id] = target.id
        _persist_partition(store, state.group_id, target)
        return
    gk = enclave.unseal(state.sealed_gk)
    bk, cipher = enclave.encrypt_partition([user_id], rng)
    iv, y = _wrap_gk(bk, gk, rng)
    part = Partition(
        id=state.next_partition_id, members=[user_id], cipher=cipher, iv=iv, y=y
    )
    state.partitions.append(part)
    state.user_index[user_id] = part.id
    state.next_partition_id += 1
    _persist_partition(store, state.group_id, part)


def remove_user(
    enclave: EnclaveState, state: GroupState, user_id: str, rng, store=None
) -> None:
    """Remove a member and rotate the group key.

    The home partition loses the member (and is deleted if it empties);
    every other partition is re-randomized so the old broadcast keys die
    with the old group key.  All wrapped keys are recomputed under fresh
    IVs.  Cost is linear in the number of partitions.
    """
    home = state.partition_of(user_id)
    gk_new = enclave.new_group_key(rng)
    state.sealed_gk = enclave.seal(gk_new)
    del state.user_index[user_id]
    home.members.remove(user_id)
    if not home.members:
        state.partitions.remove(home)
        if store is not None:
            store.delete(_partition_object_id(state.group_id, home.id))
        survivors = state.partitions
    else:
        bk, cipher = enclave.remove_from_cipher(home.cipher, user_id, rng)
        home.cipher = cipher
        home.iv, home.y = _wrap_gk(bk, gk_new, rng)
        survivors = [p for p in state.partitions if p.id != home.id]
        _persist_partition(store, state.group_id, home)
    for part in survivors:
        bk, cipher = enclave.rekey_partition(part.cipher, rng)
        part.cipher = cipher
        part.iv, part.y = _wrap_gk(bk, gk_new, rng)
        _persist_partition(store, state.group_id, part)
    _persist_sealed(store, state)


def maybe_repartition(
    enclave: EnclaveState, state: GroupState, rng, store=None
) -> tuple[GroupState, bool]:
    """Rebuild the partition layout if it has become too sparse.

    Trigger rule: at least half of the partitions hold at most ``ceil(2n/3)``
    members.  On trigger the whole group is recreated over the current
    membership (fresh group key, ``ceil(N/n)`` partitions) and the old
    partition objects are deleted from the store.  Otherwise the state is
    returned untouched.
    """
    if not state.partitions:
        return state, False
    threshold = math.ceil(2 * state.n / 3)
    underfull = sum(1 for p in state.partitions if len(p.members) <= threshold)
    if 2 * underfull < len(state.partitions):
        return state, False
    members = state.members()
    if store is not None:
        for part in state.partitions:
            store.delete(_partition_object_id(state.group_id, part.id))
    new_state = create_group(enclave, state.group_id, members, state.n, rng, store)
    return new_state, True


def derive_from_partition(
    pk: PublicKey, part: Partition, user_id: str, uk: UserKey, ctx: PairingCtx
) -> bytes:
    """Client-side group key derivation from one partition's metadata.

    Runs broadcast decryption against the partition cipher and opens the
    wrapped group key.  Both a user absent from the member list and a
    wrapped-key authentication failure raise ``AuthenticationError``.
    """
    if user_id not in part.members:
        raise AuthenticationError(f"{user_id!r} is not in this partition")
    bk = ibbe.decrypt(pk, part.members, user_id, uk, part.cipher, ctx)
    try:
        return AESGCM(_wrap_key(bk)).decrypt(part.iv, part.y, None)
    except InvalidTag as exc:
        raise AuthenticationError(
            "wrapped group key failed authentication"
        ) from exc


def derive_group_key(
    pk: PublicKey, state: GroupState, user_id: str, uk: UserKey, ctx: PairingCtx
) -> bytes:
    """Derive the current group key for ``user_id`` from group metadata."""
    pid = state.user_index.get(user_id)
    if pid is None:
        raise AuthenticationError(f"{user_id!r} is not a group member")
    for part in state.partitions:
        if part.id == pid:
            return derive_from_partition(pk, part, user_id, uk, ctx)
    raise AuthenticationError(f"{user_id!r} indexed to a missing partition")


def save_group(store, state: GroupState) -> None:
    """Write every partition object and the sealed group key."""
    for part in state.partitions:
        _persist_partition(store, state.group_id, part)
    _persist_sealed(store, state)


def load_group(store, group_id: str, n: int) -> GroupState:
    """Rebuild a :class:`GroupState` from the store layout.

    The partition capacity ``n`` is deployment configuration and is
    supplied by the caller rather than persisted.
    """
    state = GroupState(group_id=group_id, n=n)
    sealed_id = f"{group_id}/{SEALED_KEY_NAME}"
    for object_id in store.list(f"{group_id}/"):
        if object_id == sealed_id:
            state.sealed_gk = store.get(object_id)
            continue
        part = Partition.from_bytes(store.get(object_id))
        state.partitions.append(part)
        for uid in part.members:
            if uid in state.user_index:
                raise SerializationError(
                    f"{uid!r} appears in two stored partitions"
                )
            state.user_index[uid] = part.id
    if not state.sealed_gk:
        raise SerializationError(f"no sealed group key stored for {group_id!r}")
    state.partitions.sort(key=lambda p: p.id)
    state.next_partition_id = (
        max((p.id for p in state.partitions), default=-1) + 1
    )
    return state


def delete_group(store, state: GroupState) -> None:
    """Remove every stored object belonging to the group."""
    for object_id in store.list(f"{state.group_id}/"):
        store.delete(object_id)
