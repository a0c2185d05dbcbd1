"""Benchmark and replay harness.

Subcommands::

    groupcrypt bench <operation> [flags]   micro-benchmarks, CSV output
    groupcrypt replay --trace FILE ...     trace replay summary, CSV output
    groupcrypt trace-gen --ops N ...       synthetic trace generation

Sizes are given as a single value ``N``, a comma list ``1,10,100``, or a
range ``A..B`` stepped geometrically by 2 (``A..BxS`` steps arithmetically
by S).  All randomness is derived from ``--seed`` so operation counters
are reproducible; wall-clock columns naturally vary between runs.
Durations are medians over ``--iters`` measured runs after two warm-up
runs; counters are exact values from the first measured run.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import statistics
import sys
import time

from . import asky, enclave, groups, hybrid, ibbe, trace
from .algebra import OpCounts, PairingCtx
from .errors import GroupCryptError

BENCH_OPS = (
    "setup",
    "extract",
    "create",
    "add",
    "remove",
    "decrypt",
    "envelope",
    "metadata",
)
SCHEMES = ("ibbe-sgx", "he")

BENCH_HEADER = (
    "scheme",
    "operation",
    "group_size",
    "partition_size",
    "iterations",
    "median_ms",
    "mean_ms",
    *OpCounts.FIELDS,
    "metadata_bytes",
)
REPLAY_HEADER = (
    "scheme",
    "partition_size",
    "ops",
    "adds",
    "removes",
    "repartitions",
    "admin_seconds",
    "mean_derive_ms",
    *OpCounts.FIELDS,
    "he_wraps",
    "crypto_metadata_bytes",
    "total_metadata_bytes",
)


def parse_sizes(text: str) -> list[int]:
    """Parse ``N``, ``A,B,C``, ``A..B`` (geometric x2), or ``A..BxS``."""

    def one(tok: str) -> int:
        val = int(tok)
        if val < 1:
            raise ValueError(f"sizes must be positive, got {val}")
        return val

    text = text.strip()
    if "," in text:
        return [one(t) for t in text.split(",")]
    if ".." not in text:
        return [one(text)]
    lo_text, _, rest = text.partition("..")
    step = None
    if "x" in rest:
        hi_text, _, step_text = rest.partition("x")
        step = one(step_text)
    else:
        hi_text = rest
    lo, hi = one(lo_text), one(hi_text)
    if lo > hi:
        raise ValueError(f"range start {lo} exceeds end {hi}")
    out = []
    cur = lo
    while cur <= hi:
        out.append(cur)
        cur = cur + step if step is not None else cur * 2
    if out[-1] != hi:
        out.append(hi)
    return out


def _write_rows(header: tuple[str, ...], rows: list[list], out_path: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt_ms(values: list[float]) -> tuple[str, str]:
    med = statistics.median(values) * 1000.0
    mean = statistics.mean(values) * 1000.0
    return f"{med:.3f}", f"{mean:.3f}"


def _measure(ctx: PairingCtx, run, iters: int, warmup: int = 2):
    """Run ``run(rng)`` warm then measured; returns (durations, counters).

    Each call gets its own deterministically derived rng, so every
    iteration performs identical work; counters come from the first
    measured iteration.
    """
    durations: list[float] = []
    counts = OpCounts()
    for i in range(warmup + iters):
        rng = random.Random(run.seed * 1000003 + i)
        before = ctx.snapshot()
        t0 = time.perf_counter()
        run(rng)
        dt = time.perf_counter() - t0
        if i == warmup:
            counts = ctx.snapshot() - before
        if i >= warmup:
            durations.append(dt)
    return durations, counts


class _Run:
    """Callable wrapper carrying the seed used to derive per-iter rngs."""

    def __init__(self, fn, seed: int) -> None:
        self._fn = fn
        self.seed = seed

    def __call__(self, rng) -> None:
        self._fn(rng)


def _copy_group_state(state: groups.GroupState) -> groups.GroupState:
    parts = [
        groups.Partition(p.id, list(p.members), p.cipher, p.iv, p.y)
        for p in state.partitions
    ]
    return groups.GroupState(
        group_id=state.group_id,
        n=state.n,
        partitions=parts,
        user_index=dict(state.user_index),
        sealed_gk=state.sealed_gk,
        next_partition_id=state.next_partition_id,
    )


def _member_ids(count: int) -> list[str]:
    return [f"m{i:06d}" for i in range(count)]


def _he_pubs(count: int, rng) -> dict[str, bytes]:
    return {u: hybrid.gen_keypair(u, rng).public_bytes for u in _member_ids(count)}


def _bench_rows(args) -> list[list]:
    op = args.operation
    seed = args.seed
    iters = args.iters
    group_sizes = parse_sizes(args.group_size)
    partition_sizes = parse_sizes(args.partition_size)
    rows: list[list] = []

    def emit(scheme, gsize, psize, durations, counts: OpCounts, meta_bytes):
        med, mean = _fmt_ms(durations)
        rows.append(
            [scheme, op, gsize, psize, iters, med, mean]
            + [getattr(counts, f) for f in OpCounts.FIELDS]
            + [meta_bytes]
        )

    if op == "setup":
        for psize in partition_sizes:
            if args.scheme == "ibbe-sgx":
                ctx = PairingCtx()
                durations, counts = _measure(
                    ctx,
                    _Run(lambda rng: ibbe.setup(ctx, psize, rng), seed),
                    iters,
                )
                emit("ibbe-sgx", 0, psize, durations, counts, 0)
            else:
                for gsize in group_sizes:
                    ctx = PairingCtx()
                    durations, counts = _measure(
                        ctx, _Run(lambda rng: _he_pubs(gsize, rng), seed), iters
                    )
                    emit("he", gsize, 0, durations, counts, 0)
        return rows

    if op == "extract":
        if args.scheme == "ibbe-sgx":
            ctx = PairingCtx()
            enc = enclave.init(ctx, max(partition_sizes), random.Random(seed))
            durations, counts = _measure(
                ctx,
                _Run(
                    lambda rng: enc.extract_user_key(f"u{rng.random()}"), seed
                ),
                iters,
            )
            emit("ibbe-sgx", 0, max(partition_sizes), durations, counts, 0)
        else:
            ctx = PairingCtx()
            durations, counts = _measure(
                ctx, _Run(lambda rng: hybrid.gen_keypair("u", rng), seed), iters
            )
            emit("he", 0, 0, durations, counts, 0)
        return rows

    if op in ("create", "add", "remove", "metadata"):
        if args.scheme == "he":
            partition_sizes = partition_sizes[:1]  # meaningless for the baseline
        for psize in partition_sizes:
            for gsize in group_sizes:
                if args.scheme == "ibbe-sgx":
                    ctx = PairingCtx()
                    enc = enclave.init(ctx, psize, random.Random(seed))
                    members = _member_ids(gsize)
                    if op == "create":
                        holder = {}

                        def run_create(rng):
                            holder["gs"] = groups.create_group(
                                enc, "bench", members, psize, rng
                            )

                        durations, counts = _measure(
                            ctx, _Run(run_create, seed), iters
                        )
                        emit("ibbe-sgx", gsize, psize, durations, counts,
                             holder["gs"].crypto_metadata_bytes())
                    elif op == "metadata":
                        gs = groups.create_group(
                            enc, "bench", members, psize, random.Random(seed)
                        )
                        emit("ibbe-sgx", gsize, psize, [0.0], OpCounts(),
                             gs.crypto_metadata_bytes())
                    else:
                        base = groups.create_group(
                            enc, "bench", members, psize, random.Random(seed)
                        )

                        def run_mut(rng):
                            state = _copy_group_state(base)
                            if op == "add":
                                groups.add_user(enc, state, "newcomer", rng)
                            else:
                                groups.remove_user(enc, state, members[0], rng)

                        durations, counts = _measure(ctx, _Run(run_mut, seed), iters)
                        emit("ibbe-sgx", gsize, psize, durations, counts,
                             base.crypto_metadata_bytes())
                else:
                    ctx = PairingCtx()
                    pubs = _he_pubs(gsize, random.Random(seed))
                    gk = random.Random(seed).randbytes(32)
                    if op == "create":
                        holder = {}

                        def run_create_he(rng):
                            holder["meta"] = hybrid.he_create_group(
                                "bench", pubs, gk, rng
                            )

                        durations, counts = _measure(
                            ctx, _Run(run_create_he, seed), iters
                        )
                        emit("he", gsize, 0, durations, counts,
                             holder["meta"].metadata_bytes())
                    elif op == "metadata":
                        meta = hybrid.he_create_group(
                            "bench", pubs, gk, random.Random(seed)
                        )
                        emit("he", gsize, 0, [0.0], OpCounts(),
                             meta.metadata_bytes())
                    else:
                        base = hybrid.he_create_group(
                            "bench", pubs, gk, random.Random(seed)
                        )
                        new_pub = hybrid.gen_keypair(
                            "newcomer", random.Random(seed)
                        ).public_bytes
                        victim = next(iter(pubs))

                        def run_mut_he(rng):
                            meta = hybrid.HEGroupMeta("bench", dict(base.entries))
                            if op == "add":
                                hybrid.he_add_user(meta, "newcomer", new_pub, gk, rng)
                            else:
                                hybrid.he_remove_user(
                                    meta, victim, pubs, rng.randbytes(32), rng
                                )

                        durations, counts = _measure(
                            ctx, _Run(run_mut_he, seed), iters
                        )
                        emit("he", gsize, 0, durations, counts,
                             base.metadata_bytes())
        return rows

    if op == "decrypt":
        for psize in partition_sizes:
            if args.scheme == "ibbe-sgx":
                ctx = PairingCtx()
                enc = enclave.init(ctx, psize, random.Random(seed))
                members = _member_ids(psize)  # one full partition
                gs = groups.create_group(
                    enc, "bench", members, psize, random.Random(seed)
                )
                uk = enc.extract_user_key(members[0])

                def run_dec(rng):
                    groups.derive_group_key(enc.public_key, gs, members[0], uk, ctx)

                durations, counts = _measure(ctx, _Run(run_dec, seed), iters)
                emit("ibbe-sgx", psize, psize, durations, counts,
                     gs.crypto_metadata_bytes())
            else:
                for gsize in group_sizes:
                    ctx = PairingCtx()
                    rng0 = random.Random(seed)
                    kps = {u: hybrid.gen_keypair(u, rng0) for u in _member_ids(gsize)}
                    pubs = {u: kp.public_bytes for u, kp in kps.items()}
                    gk = rng0.randbytes(32)
                    meta = hybrid.he_create_group("bench", pubs, gk, rng0)
                    target = next(iter(kps))

                    def run_dec_he(rng):
                        hybrid.he_unwrap(meta, target, kps[target].private)

                    durations, counts = _measure(ctx, _Run(run_dec_he, seed), iters)
                    emit("he", gsize, 0, durations, counts, meta.metadata_bytes())
                break
        return rows

    if op == "envelope":
        for gsize in group_sizes:
            ctx = PairingCtx()
            rng0 = random.Random(seed)
            enc = enclave.init(ctx, 1, rng0)
            readers = [f"r{i:06d}" for i in range(gsize)]
            for uid in readers:
                enc.create_user(uid, rng0)
            enc.create_user("writer", rng0)
            for uid in readers:
                enc.set_membership("bench", uid, "reader", "add")
            enc.set_membership("bench", "writer", "writer", "add")
            fk = rng0.randbytes(32)
            holder = {}

            def run_std(rng):
                holder["env"] = asky.key_enveloping(enc, "writer", "bench", fk, rng)

            durations, counts = _measure(ctx, _Run(run_std, seed), iters)
            rows.append(
                ["asky", "envelope-standard", gsize, 0, iters, *_fmt_ms(durations)]
                + [getattr(counts, f) for f in OpCounts.FIELDS]
                + [len(holder["env"])]
            )

            def run_idx(rng):
                holder["env"] = asky.key_enveloping_indexed(
                    enc, "writer", "bench", fk, rng
                )

            durations, counts = _measure(ctx, _Run(run_idx, seed), iters)
            rows.append(
                ["asky", "envelope-indexed", gsize, 0, iters, *_fmt_ms(durations)]
                + [getattr(counts, f) for f in OpCounts.FIELDS]
                + [len(holder["env"])]
            )
        return rows

    raise ValueError(f"unknown bench operation: {op!r}")


def _replay_rows(args) -> list[list]:
    with open(args.trace, "rb") as fh:
        ops = trace.parse_trace(fh.read())
    adds = sum(1 for o in ops if o.op == "add")
    removes = len(ops) - adds
    rows: list[list] = []
    for psize in parse_sizes(args.partition_size):
        if args.scheme == "ibbe-sgx":
            ctx = PairingCtx()
            rng = random.Random(args.seed)
            enc = enclave.init(ctx, psize, rng)
            stats = {"repartitions": 0}
            before = ctx.snapshot()
            t0 = time.perf_counter()
            state = trace.replay_groups(enc, ops, "replay", psize, rng, stats=stats)
            admin_seconds = time.perf_counter() - t0
            counts = ctx.snapshot() - before
            derive_ms: list[float] = []
            if state is not None and state.partitions:
                target_part = max(state.partitions, key=lambda p: len(p.members))
                uid = target_part.members[0]
                uk = enc.extract_user_key(uid)
                for _ in range(args.derives):
                    t0 = time.perf_counter()
                    groups.derive_group_key(enc.public_key, state, uid, uk, ctx)
                    derive_ms.append((time.perf_counter() - t0) * 1000.0)
            rows.append(
                [
                    "ibbe-sgx",
                    psize,
                    len(ops),
                    adds,
                    removes,
                    stats["repartitions"],
                    f"{admin_seconds:.3f}",
                    f"{statistics.mean(derive_ms):.3f}" if derive_ms else "",
                ]
                + [getattr(counts, f) for f in OpCounts.FIELDS]
                + [
                    0,
                    state.crypto_metadata_bytes() if state else 0,
                    state.total_metadata_bytes() if state else 0,
                ]
            )
        else:
            rng = random.Random(args.seed)
            counter = hybrid.WrapCounter()
            t0 = time.perf_counter()
            meta, keypairs, _gk = trace.replay_hybrid(ops, "replay", rng, counter)
            admin_seconds = time.perf_counter() - t0
            derive_ms = []
            if meta is not None and meta.entries:
                uid = next(iter(meta.entries))
                for _ in range(args.derives):
                    t0 = time.perf_counter()
                    hybrid.he_unwrap(meta, uid, keypairs[uid].private)
                    derive_ms.append((time.perf_counter() - t0) * 1000.0)
            rows.append(
                [
                    "he",
                    0,
                    len(ops),
                    adds,
                    removes,
                    0,
                    f"{admin_seconds:.3f}",
                    f"{statistics.mean(derive_ms):.3f}" if derive_ms else "",
                ]
                + [0] * len(OpCounts.FIELDS)
                + [
                    counter.wraps,
                    meta.metadata_bytes() if meta else 0,
                    meta.metadata_bytes() if meta else 0,
                ]
            )
            break  # partition size does not apply to the baseline
    return rows


def _cmd_trace_gen(args) -> None:
    ops = trace.gen_synthetic(args.ops, args.revocation_ratio, args.seed)
    blob = trace.serialize_trace(ops)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob.decode())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupcrypt",
        description="Benchmarks and trace replay for the group access toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="micro-benchmarks, CSV output")
    bench.add_argument("operation", choices=BENCH_OPS)
    bench.add_argument("--scheme", choices=SCHEMES, default="ibbe-sgx")
    bench.add_argument("--group-size", default="16",
                       help="N, comma list, or A..B[xS] (default geometric x2)")
    bench.add_argument("--partition-size", default="16",
                       help="N, comma list, or A..B[xS]")
    bench.add_argument("--iters", type=int, default=10)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default=None)

    replay = sub.add_parser("replay", help="trace replay summary, CSV output")
    replay.add_argument("--trace", required=True)
    replay.add_argument("--scheme", choices=SCHEMES, default="ibbe-sgx")
    replay.add_argument("--partition-size", default="1000")
    replay.add_argument("--derives", type=int, default=5,
                        help="group-key derivations to time after replay")
    replay.add_argument("--seed", type=int, default=0)
    replay.add_argument("--out", default=None)

    gen = sub.add_parser("trace-gen", help="generate a synthetic trace")
    gen.add_argument("--ops", type=int, required=True)
    gen.add_argument("--revocation-ratio", type=float, default=0.02)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            _write_rows(BENCH_HEADER, _bench_rows(args), args.out)
        elif args.command == "replay":
            _write_rows(REPLAY_HEADER, _replay_rows(args), args.out)
        elif args.command == "trace-gen":
            _cmd_trace_gen(args)
    except (GroupCryptError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
