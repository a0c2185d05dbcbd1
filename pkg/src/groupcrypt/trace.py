"""Membership traces: synthetic generation, CSV parsing, and replay.

A trace is an ordered list of add/remove operations over user ids.  Valid
traces never remove an absent user or add a present one; the parser
enforces this and reports violations with line numbers.

:func:`gen_synthetic` builds a seeded workload with a target revocation
ratio.  It shuffles the planned mix of adds and removes, then walks the
resulting sequence tracking membership; a remove drawn while the group is
empty is substituted by an add, so the realized remove count can fall
below the target on remove-heavy ratios but the trace is always valid.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import groups
from .errors import TraceError

_OPS = ("add", "remove")
_HEADER = "op,user_id"


@dataclass(frozen=True)
class TraceOp:
    op: str
    user_id: str


def gen_synthetic(n_ops: int, revocation_ratio: float, seed: int) -> list[TraceOp]:
    """Seeded synthetic trace with ``round(ratio * n_ops)`` planned removes."""
    if n_ops < 0:
        raise ValueError("n_ops must be non-negative")
    if not 0.0 <= revocation_ratio <= 1.0:
        raise ValueError("revocation_ratio must lie in [0, 1]")
    rng = random.Random(seed)
    n_removes = round(revocation_ratio * n_ops)
    plan = ["remove"] * n_removes + ["add"] * (n_ops - n_removes)
    rng.shuffle(plan)

    ops: list[TraceOp] = []
    present: list[str] = []
    slot: dict[str, int] = {}
    counter = 0
    for kind in plan:
        if kind == "remove" and not present:
            kind = "add"
        if kind == "add":
            uid = f"u{counter}"
            counter += 1
            slot[uid] = len(present)
            present.append(uid)
            ops.append(TraceOp("add", uid))
        else:
            i = rng.randrange(len(present))
            uid = present[i]
            last = present.pop()
            if last != uid:
                present[i] = last
                slot[last] = i
            del slot[uid]
            ops.append(TraceOp("remove", uid))
    return ops


def serialize_trace(ops: list[TraceOp]) -> bytes:
    lines = [_HEADER]
    for op in ops:
        if op.op not in _OPS:
            raise TraceError(f"unknown op: {op.op!r}")
        if "," in op.user_id or "\n" in op.user_id or not op.user_id:
            raise TraceError(f"user id not serializable: {op.user_id!r}")
        lines.append(f"{op.op},{op.user_id}")
    return ("\n".join(lines) + "\n").encode()


def parse_trace(data: bytes | str) -> list[TraceOp]:
    """Parse and validate a CSV trace; the header line is optional.

    Violations (bad op, empty id, remove of an absent user, add of a
    present user) raise ``TraceError`` naming the 1-based line number.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise TraceError(f"trace is not valid UTF-8: {exc}") from exc
    ops: list[TraceOp] = []
    present: set[str] = set()
    for lineno, line in enumerate(data.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line == _HEADER:
            continue
        op, sep, uid = line.partition(",")
        if not sep:
            raise TraceError(f"line {lineno}: expected 'op,user_id', got {line!r}")
        op = op.strip()
        uid = uid.strip()
        if op not in _OPS:
            raise TraceError(f"line {lineno}: unknown op {op!r}")
        if not uid:
            raise TraceError(f"line {lineno}: empty user id")
        if op == "add":
            if uid in present:
                raise TraceError(f"line {lineno}: add of present user {uid!r}")
            present.add(uid)
        else:
            if uid not in present:
                raise TraceError(f"line {lineno}: remove of absent user {uid!r}")
            present.remove(uid)
        ops.append(TraceOp(op, uid))
    return ops


def replay_groups(
    enclave,
    ops: list[TraceOp],
    group_id: str,
    n: int,
    rng,
    store=None,
    repartition: bool = True,
    stats: dict | None = None,
) -> groups.GroupState | None:
    """Apply a trace to the partitioned scheme.

    The group is created on the first add.  After every remove the
    repartitioning rule is consulted (unless disabled).  Returns the final
    state, or None for an empty trace.  When ``stats`` is given its
    ``repartitions`` entry is incremented per triggered rebuild.
    """
    state: groups.GroupState | None = None
    for op in ops:
        if op.op == "add":
            if state is None:
                state = groups.create_group(
                    enclave, group_id, [op.user_id], n, rng, store
                )
            else:
                groups.add_user(enclave, state, op.user_id, rng, store)
        elif op.op == "remove":
            if state is None:
                raise TraceError(f"remove of {op.user_id!r} before any add")
            groups.remove_user(enclave, state, op.user_id, rng, store)
            if repartition:
                state, rebuilt = groups.maybe_repartition(enclave, state, rng, store)
                if rebuilt and stats is not None:
                    stats["repartitions"] = stats.get("repartitions", 0) + 1
        else:
            raise TraceError(f"unknown op: {op.op!r}")
    return state


def replay_hybrid(ops: list[TraceOp], group_id: str, rng, counter=None):
    """Apply a trace to the hybrid baseline.

    Key pairs are generated on demand.  Returns ``(meta, keypairs, gk)``
    where ``meta`` is None for an empty trace.
    """
    from . import hybrid

    meta = None
    keypairs: dict[str, hybrid.HEKeyPair] = {}
    gk = rng.randbytes(32)
    for op in ops:
        if op.op == "add":
            kp = keypairs.get(op.user_id)
            if kp is None:
                kp = hybrid.gen_keypair(op.user_id, rng)
                keypairs[op.user_id] = kp
            if meta is None:
                meta = hybrid.he_create_group(
                    group_id, {op.user_id: kp.public_bytes}, gk, rng, counter
                )
            else:
                hybrid.he_add_user(meta, op.user_id, kp.public_bytes, gk, rng, counter)
        elif op.op == "remove":
            if meta is None:
                raise TraceError(f"remove of {op.user_id!r} before any add")
            gk = rng.randbytes(32)
            pubs = {u: keypairs[u].public_bytes for u in meta.entries}
            hybrid.he_remove_user(meta, op.user_id, pubs, gk, rng, counter)
        else:
            raise TraceError(f"unknown op: {op.op!r}")
    return meta, keypairs, gk
