"""Simulated trusted-execution boundary holding all long-term secret material.

An :class:`EnclaveState` plays the role of the hardware-protected service
that a group administrator would run.  It owns the broadcast-encryption
master key, a per-user key table for the enveloping protocol, group access
control lists, an Ed25519 signing key whose public half is distributed to
clients, and a sealing key used to protect state that leaves the boundary.

Boundary rules enforced by this module:

- the master secret and the user key table never leave in plaintext; callers
  interact with them only through the methods below,
- group keys are the payload being distributed and may cross the boundary,
- sealed blobs are authenticated; tampering raises ``IntegrityError``,
- mutating calls are serialized by a re-entrant lock.

Known gap: sealed state carries no rollback protection.  A caller replaying
an old sealed blob gets the old (authentic) contents back; protecting
against that requires a monotonic counter outside the scope of this
simulation.
"""

from __future__ import annotations

import hmac
import json
import os
import threading
import time
from hashlib import sha224, sha256
from typing import Sequence

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import __version__, ibbe
from .algebra import PairingCtx, rand_scalar
from .errors import (
    DuplicateError,
    IntegrityError,
    NotFoundError,
    PermissionDeniedError,
    SerializationError,
)
from .ibbe import BroadcastCipher, MasterKey, PublicKey, UserKey

SEAL_MAGIC = b"GSEAL1"
ACL_MAGIC = b"GACL1"
TOKEN_MAGIC = b"ATOK1"

KEY_BYTES = 32
NONCE_BYTES = 12
TAG_BYTES = 16

_ROLES = ("reader", "writer")
_ACTIONS = ("add", "remove")


def _aead_box(key: bytes, payload: bytes, magic: bytes) -> bytes:
    """Encrypt ``payload`` into ``magic || nonce || ctlen || ct || tag``."""
    nonce = os.urandom(NONCE_BYTES)
    sealed = AESGCM(key).encrypt(nonce, payload, magic)
    ct, tag = sealed[:-TAG_BYTES], sealed[-TAG_BYTES:]
    return magic + nonce + len(ct).to_bytes(4, "big") + ct + tag


def _aead_unbox(key: bytes, blob: bytes, magic: bytes) -> bytes:
    if len(blob) < len(magic) + NONCE_BYTES + 4 + TAG_BYTES:
        raise IntegrityError("sealed blob truncated")
    if blob[: len(magic)] != magic:
        raise IntegrityError("sealed blob has wrong magic")
    off = len(magic)
    nonce = blob[off : off + NONCE_BYTES]
    off += NONCE_BYTES
    ctlen = int.from_bytes(blob[off : off + 4], "big")
    off += 4
    if len(blob) != off + ctlen + TAG_BYTES:
        raise IntegrityError("sealed blob length mismatch")
    try:
        return AESGCM(key).decrypt(nonce, blob[off:], magic)
    except InvalidTag as exc:
        raise IntegrityError("sealed blob failed authentication") from exc


def _hkdf_label(key: bytes, label: bytes) -> bytes:
    """Derive a 32-byte subkey for an internal purpose label."""
    return hmac.new(key, b"groupcrypt-enclave:" + label, sha256).digest()


def verify_package(verify_key: bytes, package: bytes, signature: bytes) -> bool:
    """Client-side check of an enclave signature over ``package``.

    ``verify_key`` is the 32-byte raw Ed25519 public key published by the
    enclave.  The signature covers SHA-256 of the package bytes.
    """
    try:
        pub = Ed25519PublicKey.from_public_bytes(verify_key)
        pub.verify(signature, sha256(package).digest())
        return True
    except (InvalidSignature, ValueError):
        return False


class EnclaveState:
    """In-memory stand-in for an attested enclave instance.

    Construct via :func:`init`, never directly.
    """

    def __init__(
        self,
        ctx: PairingCtx,
        n: int,
        master_key: MasterKey,
        public_key: PublicKey,
        sealing_key: bytes,
        signing_key: Ed25519PrivateKey,
    ) -> None:
        self.ctx = ctx
        self.n = n
        self._master_key = master_key
        self.public_key = public_key
        self._sealing_key = sealing_key
        self._signing_key = signing_key
        self._asky_keys: dict[str, bytes] = {}
        self._acls: dict[str, dict[str, set[str]]] = {}
        self._lock = threading.RLock()
        self.measurement = sha256(
            b"groupcrypt-enclave " + __version__.encode()
        ).digest()
        # subkeys for duties that must not share the raw sealing key
        self._doc_key = _hkdf_label(sealing_key, b"acl-doc")
        self._doc_id_key = _hkdf_label(sealing_key, b"acl-doc-id")
        self._token_key = _hkdf_label(sealing_key, b"write-token")

    # -- attestation and sealing -------------------------------------

    def attest_stub(self) -> bytes:
        """Return the 32-byte measurement a verifier would check.

        The measurement is a digest of the build identity, so it changes
        whenever the package version string changes.
        """
        return self.measurement

    def verify_key_bytes(self) -> bytes:
        """Raw 32-byte Ed25519 public key clients use to verify uploads."""
        return self._signing_key.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )

    def seal(self, payload: bytes) -> bytes:
        """Authenticated-encrypt ``payload`` under the sealing key.

        Non-deterministic: every call draws a fresh nonce.
        """
        with self._lock:
            return _aead_box(self._sealing_key, payload, SEAL_MAGIC)

    def unseal(self, blob: bytes) -> bytes:
        """Open a sealed blob; any tampering raises ``IntegrityError``."""
        with self._lock:
            return _aead_unbox(self._sealing_key, blob, SEAL_MAGIC)

    # -- broadcast-encryption mediation --------------------------------

    def extract_user_key(self, user_id: str) -> UserKey:
        """Derive the per-user decryption key from the master secret."""
        with self._lock:
            return ibbe.extract_user_key(self._master_key, user_id, self.ctx)

    def new_group_key(self, rng) -> bytes:
        """Draw a fresh 32-byte symmetric group key."""
        with self._lock:
            return rng.randbytes(KEY_BYTES)

    def encrypt_partition(
        self, members: Sequence[str], rng
    ) -> tuple[object, BroadcastCipher]:
        """Encrypt to ``members`` on the master-key path; returns (bk, cipher)."""
        with self._lock:
            k = rand_scalar(rng)
            return ibbe.encrypt_master(
                self._master_key, self.public_key, members, k, self.ctx
            )

    def add_to_cipher(self, cipher: BroadcastCipher, user_id: str) -> BroadcastCipher:
        """Extend a partition cipher by one member; bk is unchanged."""
        with self._lock:
            return ibbe.add_user_to_cipher(self._master_key, cipher, user_id, self.ctx)

    def remove_from_cipher(
        self, cipher: BroadcastCipher, user_id: str, rng
    ) -> tuple[object, BroadcastCipher]:
        """Strip a member and re-randomize; returns (new bk, new cipher)."""
        with self._lock:
            k_new = rand_scalar(rng)
            return ibbe.remove_user_from_cipher(
                self._master_key, self.public_key, cipher, user_id, k_new, self.ctx
            )

    def rekey_partition(
        self, cipher: BroadcastCipher, rng
    ) -> tuple[object, BroadcastCipher]:
        """Re-randomize a cipher over its unchanged member set."""
        with self._lock:
            k_new = rand_scalar(rng)
            return ibbe.rekey_cipher(self.public_key, cipher, k_new, self.ctx)

    # -- enveloping-protocol user table and ACLs ------------------------

    def create_user(self, user_id: str, rng) -> bytes:
        """Provision a user: store a fresh 32-byte key and return it once."""
        with self._lock:
            if user_id in self._asky_keys:
                raise DuplicateError(f"user already provisioned: {user_id!r}")
            key = rng.randbytes(KEY_BYTES)
            self._asky_keys[user_id] = key
            return key

    def has_user(self, user_id: str) -> bool:
        with self._lock:
            return user_id in self._asky_keys

    def set_membership(self, group_id: str, user_id: str, role: str, action: str) -> None:
        """Grant or revoke a reader/writer role.  Revocation is idempotent."""
        if role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}, got {role!r}")
        if action not in _ACTIONS:
            raise ValueError(f"action must be one of {_ACTIONS}, got {action!r}")
        with self._lock:
            if user_id not in self._asky_keys:
                raise NotFoundError(f"no provisioned user: {user_id!r}")
            acl = self._acls.setdefault(group_id, {"readers": set(), "writers": set()})
            bucket = acl[role + "s"]
            if action == "add":
                bucket.add(user_id)
            else:
                bucket.discard(user_id)

    def readers(self, group_id: str) -> tuple[str, ...]:
        with self._lock:
            acl = self._acls.get(group_id)
            return tuple(sorted(acl["readers"])) if acl else ()

    def writers(self, group_id: str) -> tuple[str, ...]:
        with self._lock:
            acl = self._acls.get(group_id)
            return tuple(sorted(acl["writers"])) if acl else ()

    def is_writer(self, group_id: str, user_id: str) -> bool:
        with self._lock:
            acl = self._acls.get(group_id)
            return bool(acl and user_id in acl["writers"])

    def is_reader(self, group_id: str, user_id: str) -> bool:
        with self._lock:
            acl = self._acls.get(group_id)
            return bool(acl and user_id in acl["readers"])

    # -- enveloping fragments (user keys stay inside) --------------------

    def envelope_fragments(
        self, writer_id: str, group_id: str, file_key: bytes, rng
    ) -> list[bytes]:
        """Per-reader fragments ``iv || ct || tag`` in uniformly random order.

        A caller without the writer role gets an empty list, not an error,
        so the response length alone does not reveal why nothing was wrapped.
        """
        with self._lock:
            if not self.is_writer(group_id, writer_id):
                return []
            frags = []
            for reader in self.readers(group_id):
                iv = rng.randbytes(NONCE_BYTES)
                ct = AESGCM(self._asky_keys[reader]).encrypt(iv, file_key, None)
                frags.append(iv + ct)
            rng.shuffle(frags)
            return frags

    def envelope_fragments_indexed(
        self, writer_id: str, group_id: str, file_key: bytes, rng
    ) -> tuple[bytes, list[bytes]]:
        """Labelled fragments ``label || iv || ct || tag`` sorted by label.

        Labels are SHA-224 of reader key and a fresh 16-byte nonce, so they
        are unlinkable across envelopes.  Returns ``(nonce, fragments)``;
        non-writers get an empty fragment list.
        """
        with self._lock:
            nonce = rng.randbytes(16)
            if not self.is_writer(group_id, writer_id):
                return nonce, []
            frags = []
            for reader in self.readers(group_id):
                key = self._asky_keys[reader]
                label = sha224(key + nonce).digest()
                iv = rng.randbytes(NONCE_BYTES)
                ct = AESGCM(key).encrypt(iv, file_key, None)
                frags.append(label + iv + ct)
            frags.sort()
            return nonce, frags

    # -- signing and write tokens ----------------------------------------

    def sign_package(self, writer_id: str, group_id: str, package: bytes) -> bytes:
        """Sign SHA-256 of ``package`` iff ``writer_id`` holds the writer role."""
        with self._lock:
            if not self.is_writer(group_id, writer_id):
                raise PermissionDeniedError(
                    f"{writer_id!r} is not a writer of {group_id!r}"
                )
            return self._signing_key.sign(sha256(package).digest())

    def issue_write_token(
        self,
        writer_id: str,
        group_id: str,
        object_id: str,
        ttl_seconds: int,
        now: float | None = None,
    ) -> bytes:
        """Capability allowing one object to be signed without re-checking ACLs.

        Token layout: magic || idlen || object_id || expiry(8 BE) || mac(32).
        """
        with self._lock:
            if not self.is_writer(group_id, writer_id):
                raise PermissionDeniedError(
                    f"{writer_id!r} is not a writer of {group_id!r}"
                )
            if now is None:
                now = time.time()
            expiry = int(now) + int(ttl_seconds)
            oid = object_id.encode()
            body = len(oid).to_bytes(2, "big") + oid + expiry.to_bytes(8, "big")
            mac = hmac.new(self._token_key, body, sha256).digest()
            return TOKEN_MAGIC + body + mac

    def sign_with_token(
        self, token: bytes, object_id: str, package: bytes, now: float | None = None
    ) -> bytes:
        """Redeem a write token: validate it, then sign the package."""
        with self._lock:
            if now is None:
                now = time.time()
            if len(token) < len(TOKEN_MAGIC) + 2 + 8 + 32:
                raise PermissionDeniedError("malformed write token")
            if token[: len(TOKEN_MAGIC)] != TOKEN_MAGIC:
                raise PermissionDeniedError("malformed write token")
            body, mac = token[len(TOKEN_MAGIC) : -32], token[-32:]
            if not hmac.compare_digest(
                hmac.new(self._token_key, body, sha256).digest(), mac
            ):
                raise PermissionDeniedError("write token failed authentication")
            idlen = int.from_bytes(body[:2], "big")
            oid = body[2 : 2 + idlen]
            expiry = int.from_bytes(body[2 + idlen :], "big")
            if oid != object_id.encode():
                raise PermissionDeniedError("write token bound to another object")
            if now > expiry:
                raise PermissionDeniedError("write token expired")
            return self._signing_key.sign(sha256(package).digest())

    # -- ACL persistence ----------------------------------------------

    def _doc_id(self, kind: bytes, name: str) -> str:
        return hmac.new(self._doc_id_key, kind + name.encode(), sha256).hexdigest()[:32]

    def persist_acls(self, store, prefix: str = "acl") -> None:
        """Write the user table and ACLs as encrypted per-entity documents.

        Document ids are keyed pseudonyms; plaintext user or group ids never
        appear in storage.  An encrypted index document makes reloads
        possible without enumerating pseudonyms.
        """
        with self._lock:
            users = sorted(self._asky_keys)
            groups = sorted(self._acls)
            index = json.dumps({"users": users, "groups": groups}).encode()
            store.put(
                f"{prefix}/{self._doc_id(b'index:', '')}",
                _aead_box(self._doc_key, index, ACL_MAGIC),
            )
            for uid in users:
                doc = json.dumps(
                    {"id": uid, "key": self._asky_keys[uid].hex()}
                ).encode()
                store.put(
                    f"{prefix}/{self._doc_id(b'user:', uid)}",
                    _aead_box(self._doc_key, doc, ACL_MAGIC),
                )
            for gid in groups:
                acl = self._acls[gid]
                doc = json.dumps(
                    {
                        "id": gid,
                        "readers": sorted(acl["readers"]),
                        "writers": sorted(acl["writers"]),
                    }
                ).encode()
                store.put(
                    f"{prefix}/{self._doc_id(b'group:', gid)}",
                    _aead_box(self._doc_key, doc, ACL_MAGIC),
                )

    def load_acls(self, store, prefix: str = "acl") -> None:
        """Restore the user table and ACLs persisted by :meth:`persist_acls`."""
        with self._lock:
            blob = store.get(f"{prefix}/{self._doc_id(b'index:', '')}")
            index = json.loads(_aead_unbox(self._doc_key, blob, ACL_MAGIC))
            keys: dict[str, bytes] = {}
            acls: dict[str, dict[str, set[str]]] = {}
            for uid in index["users"]:
                blob = store.get(f"{prefix}/{self._doc_id(b'user:', uid)}")
                doc = json.loads(_aead_unbox(self._doc_key, blob, ACL_MAGIC))
                if doc["id"] != uid:
                    raise IntegrityError("user document bound to wrong id")
                keys[uid] = bytes.fromhex(doc["key"])
            for gid in index["groups"]:
                blob = store.get(f"{prefix}/{self._doc_id(b'group:', gid)}")
                doc = json.loads(_aead_unbox(self._doc_key, blob, ACL_MAGIC))
                if doc["id"] != gid:
                    raise IntegrityError("group document bound to wrong id")
                acls[gid] = {
                    "readers": set(doc["readers"]),
                    "writers": set(doc["writers"]),
                }
            self._asky_keys = keys
            self._acls = acls


def init(
    ctx: PairingCtx,
    n: int,
    rng,
    sealing_key_path: str | os.PathLike | None = None,
) -> EnclaveState:
    """Provision an enclave instance with partition capacity ``n``.

    All key material is drawn from ``rng`` in a fixed order, so two calls
    with identically seeded generators produce the same measurement and the
    same master key.  If ``sealing_key_path`` exists its 32 bytes are used
    as the sealing key; otherwise a fresh key is drawn and, when a path is
    given, written there with mode 0600.
    """
    master_key, public_key = ibbe.setup(ctx, n, rng)
    sealing_key = None
    if sealing_key_path is not None and os.path.exists(sealing_key_path):
        with open(sealing_key_path, "rb") as fh:
            sealing_key = fh.read()
        if len(sealing_key) != KEY_BYTES:
            raise SerializationError("sealing key file must hold exactly 32 bytes")
    if sealing_key is None:
        sealing_key = rng.randbytes(KEY_BYTES)
        if sealing_key_path is not None:
            fd = os.open(
                sealing_key_path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600
            )
            try:
                os.write(fd, sealing_key)
            finally:
                os.close(fd)
            os.chmod(sealing_key_path, 0o600)
    signing_key = Ed25519PrivateKey.from_private_bytes(rng.randbytes(KEY_BYTES))
    return EnclaveState(ctx, n, master_key, public_key, sealing_key, signing_key)
