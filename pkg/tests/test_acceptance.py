"""End-to-end acceptance suite.

Each test checks one externally visible guarantee of the toolkit at its
stated tolerance and ends with a single PASS line carrying the measured
values.  Run with ``pytest -v tests/test_acceptance.py`` for one
pass/fail line per guarantee (add ``-s`` to stream the PASS lines).

This module is deliberately heavier than the unit tests; the trace-replay
check alone replays a 10,000-operation workload four times and takes a
few minutes on its own.
"""

from __future__ import annotations

import math
import random
import time

import pytest

from groupcrypt import asky, enclave, groups, hybrid, ibbe, trace
from groupcrypt.algebra import PairingCtx, rand_scalar, scalar_to_bytes
from groupcrypt.errors import AccessDeniedError, AuthenticationError
from groupcrypt.store import DirectoryStore, MemoryStore


def _derive(enc, state, uid, ctx):
    uk = enc.extract_user_key(uid)
    return groups.derive_group_key(enc.public_key, state, uid, uk, ctx)


def test_encrypt_paths_agree():
    # >= 200 random (S, k): the master-key path and the public-key path
    # must produce identical ciphers and broadcast keys, exactly
    t0 = time.perf_counter()
    ctx = PairingCtx()
    rng = random.Random(101)
    mk, pk = ibbe.setup(ctx, 64, rng)
    universe = [f"u{i:03d}" for i in range(64)]
    for _ in range(200):
        members = rng.sample(universe, rng.randrange(1, 65))
        k = rand_scalar(rng)
        bk_m, c_m = ibbe.encrypt_master(mk, pk, members, k, ctx)
        bk_p, c_p = ibbe.encrypt_public(pk, members, k, ctx)
        assert bk_m == bk_p
        assert (c_m.c1, c_m.c2, c_m.c3) == (c_p.c1, c_p.c2, c_p.c3)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    print(f"PASS encrypt paths agree: 200 random sets at n=64 in {elapsed:.1f}s")


def test_round_trip_membership():
    # every member derives the group key; non-members and revoked users
    # fail with an authentication error, across a size grid
    t0 = time.perf_counter()
    combos = 0
    for psize in (1, 4, 16, 100):
        ctx = PairingCtx()
        rng = random.Random(202)
        enc = enclave.init(ctx, psize, rng)
        for gsize in (1, 2, 5, 16, 100):
            members = [f"m{psize}x{gsize}x{i}" for i in range(gsize)]
            state = groups.create_group(enc, f"g{psize}x{gsize}", members, psize, rng)
            gks = {_derive(enc, state, uid, ctx) for uid in members}
            assert len(gks) == 1
            with pytest.raises(AuthenticationError):
                _derive(enc, state, "stranger", ctx)
            victim = members[0]
            groups.remove_user(enc, state, victim, rng)
            with pytest.raises(AuthenticationError):
                _derive(enc, state, victim, ctx)
            if gsize > 1:
                # survivors move to a fresh key the revoked user never saw
                assert _derive(enc, state, members[-1], ctx) not in gks
            combos += 1
    # a member listed in one partition cannot derive from another
    ctx = PairingCtx()
    rng = random.Random(203)
    enc = enclave.init(ctx, 4, rng)
    members = [f"x{i}" for i in range(8)]
    state = groups.create_group(enc, "cross", members, 4, rng)
    outside = next(u for u in members if u not in state.partitions[0].members)
    with pytest.raises(AuthenticationError):
        groups.derive_from_partition(
            enc.public_key, state.partitions[0], outside,
            enc.extract_user_key(outside), ctx,
        )
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"took {elapsed:.1f}s"
    print(f"PASS round trip: {combos} group/partition size combos in {elapsed:.1f}s")


def test_update_ops_constant_cost():
    # add/remove/rekey match fresh encryption over the resulting set and
    # cost a fixed number of group exponentiations regardless of set size
    ctx = PairingCtx()
    rng = random.Random(303)
    mk, pk = ibbe.setup(ctx, 128, rng)
    universe = [f"c{i:03d}" for i in range(128)]

    def run(op: str, base: int) -> int:
        members = universe[:base]
        k = rand_scalar(rng)
        _, cipher = ibbe.encrypt_master(mk, pk, members, k, ctx)
        k2 = rand_scalar(rng)
        before = ctx.snapshot()
        if op == "add":
            updated = ibbe.add_user_to_cipher(mk, cipher, universe[base], ctx)
            cost = (ctx.snapshot() - before).group_exps()
            target, k_ref, bk = members + [universe[base]], k, None
        elif op == "remove":
            bk, updated = ibbe.remove_user_from_cipher(
                mk, pk, cipher, members[0], k2, ctx
            )
            cost = (ctx.snapshot() - before).group_exps()
            target, k_ref = members[1:], k2
        else:
            bk, updated = ibbe.rekey_cipher(pk, cipher, k2, ctx)
            cost = (ctx.snapshot() - before).group_exps()
            target, k_ref = members, k2
        bk_fresh, fresh = ibbe.encrypt_master(mk, pk, target, k_ref, ctx)
        assert (updated.c1, updated.c2, updated.c3) == (fresh.c1, fresh.c2, fresh.c3)
        if bk is not None:
            assert bk == bk_fresh
        return cost

    # removal from a single-member set would leave the empty set, which
    # fresh encryption cannot express, so its small case starts at 2
    expected = {"add": 2, "remove": 3, "rekey": 2}
    small = {"add": 1, "remove": 2, "rekey": 1}
    for op, want in expected.items():
        costs = {run(op, small[op]), run(op, 100)}
        assert costs == {want}, f"{op}: {costs}"
    print("PASS constant-cost updates: group-exp counts (add, remove, rekey) "
          "= (2, 3, 2) at sizes 1/2 and 100")


def test_operation_count_scaling():
    ctx = PairingCtx()
    rng = random.Random(404)
    mk, pk = ibbe.setup(ctx, 512, rng)
    ids = [f"s{i:04d}" for i in range(512)]

    # master-path encryption performs exactly |S| scalar multiplications
    for size in (1, 10, 100):
        before = ctx.snapshot()
        ibbe.encrypt_master(mk, pk, ids[:size], rand_scalar(rng), ctx)
        assert (ctx.snapshot() - before).scalar_mults == size

    # decryption scalar work is quadratic: doubling the set size must
    # multiply the scalar-op count by 4 within [3.5, 4.5]
    counts = {}
    for size in (64, 128, 256, 512):
        members = ids[:size]
        _, cipher = ibbe.encrypt_master(mk, pk, members, rand_scalar(rng), ctx)
        uk = ibbe.extract_user_key(mk, members[0], ctx)
        before = ctx.snapshot()
        ibbe.decrypt(pk, members, members[0], uk, cipher, ctx)
        counts[size] = (ctx.snapshot() - before).scalar_ops()
    ratios = [counts[2 * s] / counts[s] for s in (64, 128, 256)]
    assert all(3.5 <= r <= 4.5 for r in ratios), ratios

    # removal cost is linear in the partition count m and independent of
    # the total membership N for fixed m
    ctx2 = PairingCtx()
    rng2 = random.Random(405)
    enc = enclave.init(ctx2, 8, rng2)

    def removal_cost(total: int) -> tuple[int, int]:
        members = [f"r{total}x{i}" for i in range(total)]
        state = groups.create_group(enc, f"rm{total}", members, 8, rng2)
        m = len(state.partitions)
        before = ctx2.snapshot()
        groups.remove_user(enc, state, members[1], rng2)
        return m, (ctx2.snapshot() - before).group_exps()

    by_m: dict[int, set[int]] = {}
    for total in (9, 12, 16, 25, 32, 64):
        m, cost = removal_cost(total)
        assert cost == 2 * m + 1, (total, m, cost)
        by_m.setdefault(m, set()).add(cost)
    assert set(by_m) == {2, 4, 8}
    assert all(len(costs) == 1 for costs in by_m.values())
    print("PASS op-count scaling: encrypt mults = |S|, decrypt ratios "
          f"{[f'{r:.2f}' for r in ratios]}, removal cost 2m+1 for m in {sorted(by_m)}")


def test_metadata_size_behavior():
    # broadcast cipher bytes are constant in |S|
    ctx = PairingCtx()
    rng = random.Random(505)
    mk, pk = ibbe.setup(ctx, 1000, rng)
    ids = [f"b{i:04d}" for i in range(1000)]
    lengths = {
        len(ibbe.encrypt_master(mk, pk, ids[:s], rand_scalar(rng), ctx)[1].to_bytes())
        for s in (1, 10, 100, 1000)
    }
    assert len(lengths) == 1
    cipher_bytes = lengths.pop()

    # baseline metadata is exactly affine in membership (fixed-width ids)
    points = {}
    for count in (1, 10, 100, 1000):
        pubs = {
            f"h{i:06d}": hybrid.gen_keypair(f"h{i:06d}", rng).public_bytes
            for i in range(count)
        }
        meta = hybrid.he_create_group("aff", pubs, rng.randbytes(32), rng)
        points[count] = meta.metadata_bytes()
    slope = (points[10] - points[1]) // 9
    base = points[1] - slope
    assert all(points[c] == base + slope * c for c in points), points

    # partitioned-group metadata is a function of ceil(N/n) alone
    ctx2 = PairingCtx()
    rng2 = random.Random(506)
    enc = enclave.init(ctx2, 16, rng2)
    by_m: dict[int, set[int]] = {}
    for total in (1, 16, 17, 32, 33, 100):
        members = [f"n{total}x{i}" for i in range(total)]
        state = groups.create_group(enc, f"meta{total}", members, 16, rng2)
        m = math.ceil(total / 16)
        assert len(state.partitions) == m
        by_m.setdefault(m, set()).add(state.crypto_metadata_bytes())
    assert all(len(vals) == 1 for vals in by_m.values())
    ordered = [by_m[m].pop() for m in sorted(by_m)]
    assert ordered == sorted(set(ordered)), ordered  # strictly grows with m
    print(f"PASS metadata sizes: cipher constant at {cipher_bytes} B, baseline "
          f"affine ({base} + {slope}/member), group bytes track partition count")


def test_envelope_byte_accounting(ctx):
    rng = random.Random(606)
    enc = enclave.init(ctx, 1, rng)
    enc.create_user("writer", rng)
    for r in (1, 7, 64):
        gid = f"env{r}"
        enc.set_membership(gid, "writer", "writer", "add")
        for i in range(r):
            uid = f"e{r}x{i}"
            enc.create_user(uid, rng)
            enc.set_membership(gid, uid, "reader", "add")
        fk = rng.randbytes(32)
        env = asky.key_enveloping(enc, "writer", gid, fk, rng)
        variant, nonce, frags, total = asky.parse_envelope(env)
        assert total - 10 == 60 * r  # fragment bytes beyond the fixed header
        assert len(frags) == r and all(len(f) == 60 for f in frags)
        env = asky.key_enveloping_indexed(enc, "writer", gid, fk, rng)
        variant, nonce, frags, total = asky.parse_envelope(env)
        assert len(nonce) == 16
        assert total - 26 == 88 * r
        assert len(frags) == r and all(len(f) == 88 for f in frags)
    print("PASS envelope accounting: 60 B/reader standard, "
          "88 B/reader + 16 B nonce indexed, r in {1, 7, 64}")


def test_read_path_costs(ctx):
    rng = random.Random(707)
    enc = enclave.init(ctx, 1, rng)
    readers = [f"p{i:03d}" for i in range(100)]
    keys = {uid: enc.create_user(uid, rng) for uid in readers}
    enc.create_user("w", rng)
    enc.set_membership("rp", "w", "writer", "add")
    for uid in readers:
        enc.set_membership("rp", uid, "reader", "add")
    store = MemoryStore()
    vk = enc.verify_key_bytes()

    # indexed: every one of the 100 readers spends exactly one decryption
    asky.write_to_group(enc, store, "w", "rp", "o/i", b"data", random.Random(1),
                        indexed=True)
    for uid in readers:
        stats = asky.ReadStats()
        assert asky.read_file_indexed(store, "o/i", keys[uid], vk, stats) == b"data"
        assert stats.aead_attempts == 1
        assert stats.label_comparisons <= 7  # ceil(log2 100)

    # standard: mean trial count over 1000 uniformly placed readers
    total = 0
    pick = random.Random(2)
    for i in range(1000):
        asky.write_to_group(enc, store, "w", "rp", "o/s", b"data",
                            random.Random(1000 + i))
        uid = readers[pick.randrange(100)]
        stats = asky.ReadStats()
        assert asky.read_file(store, "o/s", keys[uid], vk, stats) == b"data"
        total += stats.aead_attempts
    mean = total / 1000
    assert 45.5 <= mean <= 55.5, mean
    print(f"PASS read paths: indexed = 1 decryption each, standard mean "
          f"{mean:.2f} trials (analytic 50.5)")


def test_lazy_revocation_timeline(ctx):
    rng = random.Random(808)
    enc = enclave.init(ctx, 1, rng)
    keys = {uid: enc.create_user(uid, rng) for uid in ("a", "b", "u")}
    enc.create_user("w", rng)
    enc.set_membership("lz", "w", "writer", "add")
    for uid in keys:
        enc.set_membership("lz", uid, "reader", "add")
    store = MemoryStore()
    vk = enc.verify_key_bytes()
    asky.write_to_group(enc, store, "w", "lz", "lz/1", b"first", random.Random(1))
    enc.set_membership("lz", "u", "reader", "remove")
    asky.write_to_group(enc, store, "w", "lz", "lz/2", b"second", random.Random(2))
    assert asky.read_file(store, "lz/1", keys["u"], vk) == b"first"
    with pytest.raises(AccessDeniedError):
        asky.read_file(store, "lz/2", keys["u"], vk)
    for uid in ("a", "b"):
        assert asky.read_file(store, "lz/1", keys[uid], vk) == b"first"
        assert asky.read_file(store, "lz/2", keys[uid], vk) == b"second"
    print("PASS lazy revocation: revoked reader keeps object 1, loses object 2; "
          "remaining readers keep both")


def test_repartition_heuristic():
    ctx = PairingCtx()
    rng = random.Random(909)
    enc = enclave.init(ctx, 6, rng)

    # [6, 6, 6, 4]: one partition at or below 2n/3 = 4 of four total
    members = [f"rp{i}" for i in range(22)]
    state = groups.create_group(enc, "rp", members, 6, rng)
    assert [len(p.members) for p in state.partitions] == [6, 6, 6, 4]
    same, rebuilt = groups.maybe_repartition(enc, state, rng)
    assert same is state and not rebuilt
    groups.remove_user(enc, state, "rp0", rng)  # [5, 6, 6, 4]
    same, rebuilt = groups.maybe_repartition(enc, state, rng)
    assert same is state and not rebuilt
    assert [len(p.members) for p in state.partitions] == [5, 6, 6, 4]

    # a second removal makes half the partitions underfull and triggers
    groups.remove_user(enc, state, "rp1", rng)  # [4, 6, 6, 4]
    new_state, rebuilt = groups.maybe_repartition(enc, state, rng)
    assert rebuilt and new_state is not state
    remaining = set(members) - {"rp0", "rp1"}
    assert len(new_state.partitions) == math.ceil(len(remaining) / 6)
    assert set(new_state.members()) == remaining
    gks = {_derive(enc, new_state, uid, ctx) for uid in remaining}
    assert len(gks) == 1

    # a mostly empty group repacks into fewer partitions
    shrink = [f"sh{i}" for i in range(12)]
    state = groups.create_group(enc, "sh", shrink, 6, rng)
    for uid in ("sh0", "sh1", "sh2", "sh6", "sh7", "sh8"):
        groups.remove_user(enc, state, uid, rng)
    assert [len(p.members) for p in state.partitions] == [3, 3]
    new_state, rebuilt = groups.maybe_repartition(enc, state, rng)
    assert rebuilt and len(new_state.partitions) == 1
    assert set(new_state.members()) == set(shrink) - {"sh0", "sh1", "sh2",
                                                      "sh6", "sh7", "sh8"}
    assert len({_derive(enc, new_state, uid, ctx)
                for uid in new_state.members()}) == 1
    print("PASS repartition heuristic: untouched below threshold, rebuilt into "
          "ceil(N/n) partitions with membership and derivability preserved")


def test_trace_replay_scaling():
    # one 10,000-op workload replayed at four partition capacities: larger
    # partitions shrink total admin work but grow per-member derive work
    t0 = time.perf_counter()
    ops = trace.gen_synthetic(10_000, 0.02, 1010)
    admin_exps = []
    derive_ops = []
    for psize in (250, 500, 1000, 2000):
        ctx = PairingCtx()
        rng = random.Random(42)
        enc = enclave.init(ctx, psize, rng)
        before = ctx.snapshot()
        state = trace.replay_groups(enc, ops, "replay", psize, rng)
        admin_exps.append((ctx.snapshot() - before).group_exps())
        part = max(state.partitions, key=lambda p: len(p.members))
        uid = part.members[0]
        uk = enc.extract_user_key(uid)
        before = ctx.snapshot()
        groups.derive_group_key(enc.public_key, state, uid, uk, ctx)
        derive_ops.append((ctx.snapshot() - before).scalar_ops())
    assert all(a > b for a, b in zip(admin_exps, admin_exps[1:])), admin_exps
    assert all(a < b for a, b in zip(derive_ops, derive_ops[1:])), derive_ops
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"took {elapsed:.1f}s"
    print(f"PASS trace replay: admin group-exps {admin_exps} fall and derive "
          f"scalar-ops {derive_ops} rise across partition sizes "
          f"(250..2000) in {elapsed:.0f}s")


def test_storage_blindness(tmp_path):
    # after a full scenario, no stored byte sequence reveals any group key,
    # file key, user secret key, or the master secret
    ctx = PairingCtx()
    rng = random.Random(1111)
    enc = enclave.init(ctx, 3, rng)
    store = DirectoryStore(tmp_path / "objects")
    secrets: list[tuple[str, bytes]] = []

    members = [f"sb{i}" for i in range(8)]
    state = groups.create_group(enc, "grp", members, 3, rng, store)
    secrets.append(("initial group key", _derive(enc, state, "sb1", ctx)))
    groups.add_user(enc, state, "sb8", rng, store)
    groups.add_user(enc, state, "sb9", rng, store)
    groups.remove_user(enc, state, "sb0", rng, store)
    secrets.append(("rotated group key", _derive(enc, state, "sb1", ctx)))
    state, rebuilt = groups.maybe_repartition(enc, state, rng, store)
    secrets.append(("current group key", _derive(enc, state, "sb1", ctx)))
    for uid in state.members():
        secrets.append((f"broadcast user key {uid}",
                        enc.extract_user_key(uid).sk.to_bytes()))
    secrets.append(("master secret", scalar_to_bytes(enc._master_key.gamma)))

    reader_keys = {}
    for uid in ("ra", "rb", "rc"):
        reader_keys[uid] = enc.create_user(uid, rng)
        secrets.append((f"personal key {uid}", reader_keys[uid]))
        enc.set_membership("grp", uid, "reader", "add")
    enc.create_user("wr", rng)
    secrets.append(("personal key wr", enc._asky_keys["wr"]))
    enc.set_membership("grp", "wr", "writer", "add")
    vk = enc.verify_key_bytes()
    for seed, oid, indexed in ((7001, "grp/f1", False), (7002, "grp/f2", True)):
        asky.write_to_group(enc, store, "wr", "grp", oid, b"body", random.Random(seed),
                            indexed=indexed)
        secrets.append((f"file key {oid}", random.Random(seed).randbytes(32)))
        assert asky.read_file(store, oid, reader_keys["ra"], vk) == b"body"
    enc.persist_acls(store)

    object_ids = store.list("")
    assert len(object_ids) > 10
    scanned = 0
    for oid in object_ids:
        blob = store.get(oid)
        scanned += len(blob)
        for label, needle in secrets:
            assert needle not in blob, f"{label} leaked in {oid}"
            assert needle not in oid.encode(), f"{label} leaked in object id"
    print(f"PASS storage blindness: {len(secrets)} secrets absent from "
          f"{len(object_ids)} stored objects ({scanned} bytes scanned)")
