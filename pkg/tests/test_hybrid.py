"""Hybrid baseline: wrap/unwrap correctness, costs, and metadata shape."""

from __future__ import annotations

import random

import pytest

from groupcrypt import hybrid
from groupcrypt.errors import (
    AuthenticationError,
    DuplicateError,
    MembershipError,
    SerializationError,
)


def build_group(count, seed=1, tag="u"):
    rng = random.Random(seed)
    kps = {f"{tag}{i:04d}": hybrid.gen_keypair(f"{tag}{i:04d}", rng) for i in range(count)}
    pubs = {u: kp.public_bytes for u, kp in kps.items()}
    gk = rng.randbytes(32)
    counter = hybrid.WrapCounter()
    meta = hybrid.he_create_group("g", pubs, gk, rng, counter)
    return rng, kps, pubs, gk, counter, meta


def test_every_member_unwraps():
    rng, kps, pubs, gk, counter, meta = build_group(7)
    assert counter.wraps == 7
    for uid, kp in kps.items():
        assert hybrid.he_unwrap(meta, uid, kp.private) == gk


def test_wrong_key_and_missing_entry_fail():
    rng, kps, pubs, gk, counter, meta = build_group(3)
    stranger = hybrid.gen_keypair("stranger", rng)
    with pytest.raises(AuthenticationError):
        hybrid.he_unwrap(meta, "stranger", stranger.private)
    some_uid = next(iter(kps))
    with pytest.raises(AuthenticationError):
        hybrid.he_unwrap(meta, some_uid, stranger.private)


def test_add_appends_single_wrap():
    rng, kps, pubs, gk, counter, meta = build_group(5)
    kp = hybrid.gen_keypair("extra", rng)
    before = counter.wraps
    hybrid.he_add_user(meta, "extra", kp.public_bytes, gk, rng, counter)
    assert counter.wraps == before + 1
    assert hybrid.he_unwrap(meta, "extra", kp.private) == gk
    with pytest.raises(DuplicateError):
        hybrid.he_add_user(meta, "extra", kp.public_bytes, gk, rng, counter)


def test_remove_rewraps_all_remaining():
    rng, kps, pubs, gk, counter, meta = build_group(6)
    victim = next(iter(kps))
    gk2 = rng.randbytes(32)
    before = counter.wraps
    hybrid.he_remove_user(meta, victim, pubs, gk2, rng, counter)
    assert counter.wraps == before + 5
    assert victim not in meta.entries
    with pytest.raises(AuthenticationError):
        hybrid.he_unwrap(meta, victim, kps[victim].private)
    for uid in meta.entries:
        assert hybrid.he_unwrap(meta, uid, kps[uid].private) == gk2
    with pytest.raises(MembershipError):
        hybrid.he_remove_user(meta, victim, pubs, gk2, rng, counter)
    with pytest.raises(MembershipError):
        hybrid.he_remove_user(meta, next(iter(meta.entries)), {}, gk2, rng)


def test_lazy_revocation_against_old_metadata():
    rng, kps, pubs, gk, counter, meta = build_group(4)
    victim = next(iter(kps))
    old_entries = dict(meta.entries)
    hybrid.he_remove_user(meta, victim, pubs, rng.randbytes(32), rng)
    old_meta = hybrid.HEGroupMeta("g", old_entries)
    assert hybrid.he_unwrap(old_meta, victim, kps[victim].private) == gk


def test_entry_size_and_affine_metadata():
    for count in (1, 4, 16):
        _, _, _, _, _, meta = build_group(count)
        assert all(len(e) == 92 for e in meta.entries.values())
        # fixed-width ids: metadata must be exactly affine in membership
        assert meta.metadata_bytes() == 9 + count * (2 + 5 + 92)


def test_serialization_round_trip():
    rng, kps, pubs, gk, counter, meta = build_group(5)
    blob = meta.to_bytes()
    back = hybrid.HEGroupMeta.from_bytes("g", blob)
    assert back.entries == meta.entries
    for uid in kps:
        assert hybrid.he_unwrap(back, uid, kps[uid].private) == gk
    with pytest.raises(SerializationError):
        hybrid.HEGroupMeta.from_bytes("g", blob[:-1])
    with pytest.raises(SerializationError):
        hybrid.HEGroupMeta.from_bytes("g", blob + b"\x00")
    with pytest.raises(SerializationError):
        hybrid.HEGroupMeta.from_bytes("g", b"XXXXX" + blob[5:])


def test_keypair_determinism():
    a = hybrid.gen_keypair("u", random.Random(5))
    b = hybrid.gen_keypair("u", random.Random(5))
    assert a.public_bytes == b.public_bytes


def test_serialization_preserves_entry_order():
    rng, kps, pubs, gk, counter, meta = build_group(4)
    kp = hybrid.gen_keypair("zz-late", rng)
    hybrid.he_add_user(meta, "zz-late", kp.public_bytes, gk, rng)
    back = hybrid.HEGroupMeta.from_bytes("g", meta.to_bytes())
    assert list(back.entries) == list(meta.entries)
    assert list(back.entries)[-1] == "zz-late"


def test_duplicate_entry_rejected_on_parse():
    rng, kps, pubs, gk, counter, meta = build_group(2)
    blob = meta.to_bytes()
    body = blob[9:]
    first = body[: 2 + 5 + 92]
    doubled = blob[:5] + (3).to_bytes(4, "big") + body + first
    with pytest.raises(SerializationError):
        hybrid.HEGroupMeta.from_bytes("g", doubled)
