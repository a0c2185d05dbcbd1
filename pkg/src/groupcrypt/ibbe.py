"""Identity-based broadcast encryption with a trusted-side fast path.

One system-wide key pair serves every group.  The master key is the pair
(g, gamma); the public key fixes w = g^gamma, v = e(g, h) and the powers
h^(gamma^i) up to the partition capacity n.  A ciphertext addressed to a
member set S consists of three elements:

    c1 = w^(-k)
    c2 = h^(k * prod_{u in S}(gamma + H(u)))
    c3 = c2^(1/k)

and encapsulates the broadcast key bk = v^k.  Holding gamma, c2 is a single
running product plus one exponentiation (encrypt_master); without gamma the
same value comes from expanding the product into elementary-symmetric
coefficients over the published h-powers (encrypt_public).  Both paths are
deterministic given k, so their outputs can be compared element-wise.

The k-free component c3 is what makes membership updates constant-time:
adding, removing, or re-keying each touch a fixed number of group elements
regardless of |S|.  Decryption cost is quadratic in |S|, which is the reason
callers cap member sets at a partition size.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    G1_BYTES,
    G2_BYTES,
    GT_BYTES,
    ORDER,
    G1Elem,
    G2Elem,
    GTElem,
    PairingCtx,
    expand_linear_factors,
    hash_to_scalar,
    rand_scalar,
)
from .errors import (
    CapacityError,
    DegenerateKeyError,
    DuplicateError,
    MembershipError,
    SerializationError,
)

CIPHER_MAGIC = b"IBBC1"
CIPHER_BYTES = len(CIPHER_MAGIC) + G1_BYTES + 2 * G2_BYTES

PUBKEY_MAGIC = b"IBPK1"


@dataclass
class MasterKey:
    """Held only by the enclave module at runtime; tests may build one."""

    g: G1Elem
    gamma: int


@dataclass
class PublicKey:
    n: int
    w: G1Elem
    v: GTElem
    h_powers: list

    def consistency_check(self, ctx: PairingCtx) -> bool:
        """pairing(w, h) == pairing(g, h^gamma); both equal v^gamma."""
        lhs = ctx.pairing(self.w, self.h_powers[0])
        rhs = ctx.pairing(ctx.g, self.h_powers[1])
        return lhs == rhs

    def to_bytes(self) -> bytes:
        parts = [PUBKEY_MAGIC, self.n.to_bytes(4, "big"),
                 self.w.to_bytes(), self.v.to_bytes()]
        parts.extend(p.to_bytes() for p in self.h_powers)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        if not data.startswith(PUBKEY_MAGIC):
            raise SerializationError("bad public-key magic")
        off = len(PUBKEY_MAGIC)
        if len(data) < off + 4:
            raise SerializationError("truncated public key")
        n = int.from_bytes(data[off:off + 4], "big")
        off += 4
        want = off + G1_BYTES + GT_BYTES + (n + 1) * G2_BYTES
        if len(data) != want:
            raise SerializationError("public-key length mismatch")
        w = G1Elem.from_bytes(data[off:off + G1_BYTES])
        off += G1_BYTES
        v = GTElem.from_bytes(data[off:off + GT_BYTES])
        off += GT_BYTES
        h_powers = []
        for _ in range(n + 1):
            h_powers.append(G2Elem.from_bytes(data[off:off + G2_BYTES]))
            off += G2_BYTES
        return cls(n=n, w=w, v=v, h_powers=h_powers)


@dataclass
class UserKey:
    user_id: str
    sk: G1Elem


@dataclass
class BroadcastCipher:
    c1: G1Elem
    c2: G2Elem
    c3: G2Elem

    def to_bytes(self) -> bytes:
        return CIPHER_MAGIC + self.c1.to_bytes() + self.c2.to_bytes() + self.c3.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BroadcastCipher":
        if len(data) != CIPHER_BYTES:
            raise SerializationError("broadcast cipher must be %d bytes" % CIPHER_BYTES)
        if not data.startswith(CIPHER_MAGIC):
            raise SerializationError("bad broadcast-cipher magic")
        off = len(CIPHER_MAGIC)
        c1 = G1Elem.from_bytes(data[off:off + G1_BYTES])
        off += G1_BYTES
        c2 = G2Elem.from_bytes(data[off:off + G2_BYTES])
        off += G2_BYTES
        c3 = G2Elem.from_bytes(data[off:off + G2_BYTES])
        return cls(c1=c1, c2=c2, c3=c3)


def _check_members(members, n: int) -> list:
    members = list(members)
    if not members:
        raise ValueError("member set must be non-empty")
    if len(members) > n:
        raise CapacityError(f"{len(members)} members exceed capacity {n}")
    if len(set(members)) != len(members):
        raise DuplicateError("duplicate user ids in member set")
    return members


def _check_k(k: int) -> int:
    k = int(k) % ORDER
    if k == 0:
        raise ValueError("k must be a nonzero scalar")
    return k


def setup(ctx: PairingCtx, n: int, rng) -> tuple:
    """System setup for partition capacity n: costs n G2 exponentiations."""
    if n < 1:
        raise ValueError("capacity must be at least 1")
    gamma = rand_scalar(rng)
    mk = MasterKey(g=ctx.g, gamma=gamma)
    w = ctx.exp_g1(ctx.g, gamma)
    v = ctx.pairing(ctx.g, ctx.h)
    h_powers = [ctx.h]
    for _ in range(n):
        h_powers.append(ctx.exp_g2(h_powers[-1], gamma))
    return mk, PublicKey(n=n, w=w, v=v, h_powers=h_powers)


def extract_user_key(mk: MasterKey, user_id: str, ctx: PairingCtx) -> UserKey:
    """sk = g^(1/(gamma + H(u))); one G1 exponentiation, one inversion."""
    denom = ctx.s_add(mk.gamma, hash_to_scalar(user_id))
    if denom == 0:
        raise DegenerateKeyError(f"H({user_id!r}) equals -gamma")
    return UserKey(user_id=user_id, sk=ctx.exp_g1(mk.g, ctx.s_inv(denom)))


def encrypt_master(mk: MasterKey, pk: PublicKey, members, k: int,
                   ctx: PairingCtx) -> tuple:
    """Encrypt using gamma directly: |S| scalar mults, then 2 G2 exps."""
    members = _check_members(members, pk.n)
    k = _check_k(k)
    acc = k
    for u in members:
        term = ctx.s_add(mk.gamma, hash_to_scalar(u))
        if term == 0:
            raise DegenerateKeyError(f"H({u!r}) equals -gamma")
        acc = ctx.s_mul(acc, term)
    c2 = ctx.exp_g2(pk.h_powers[0], acc)
    c3 = ctx.exp_g2(c2, ctx.s_inv(k))
    c1 = ctx.exp_g1(pk.w, (-k) % ORDER)
    bk = ctx.exp_gt(pk.v, k)
    return bk, BroadcastCipher(c1=c1, c2=c2, c3=c3)


def encrypt_public(pk: PublicKey, members, k: int, ctx: PairingCtx) -> tuple:
    """Encrypt from public material alone.

    The member product is expanded into coefficients of prod(X + H(u)) and
    evaluated in the exponent against the published h-powers; quadratic in
    |S| where the master path is linear.
    """
    members = _check_members(members, pk.n)
    k = _check_k(k)
    roots = [hash_to_scalar(u) for u in members]
    poly = expand_linear_factors(roots, ctx)
    c3 = ctx.multi_exp_g2(pk.h_powers[:len(poly.coeffs)], poly.coeffs)
    c2 = ctx.exp_g2(c3, k)
    c1 = ctx.exp_g1(pk.w, (-k) % ORDER)
    bk = ctx.exp_gt(pk.v, k)
    return bk, BroadcastCipher(c1=c1, c2=c2, c3=c3)


def decrypt(pk: PublicKey, members, user_id: str, uk: UserKey,
            cipher: BroadcastCipher, ctx: PairingCtx) -> GTElem:
    """Derive bk as a listed member.

    For user i let D = prod_{j != i} H(u_j) and expand
    prod_{j != i}(X + H(u_j)) = sum_t c_t X^t (note c_0 = D).  Then with
    h_p = prod_{t >= 1} h_powers[t-1]^(c_t):

        bk = (e(c1, h_p) * e(sk, c2))^(1/D)

    because e(c1, h_p) = v^(-k(P(gamma) - D)) and e(sk, c2) = v^(k P(gamma))
    for P the full excluded-member product.  Cost is quadratic in |S|.
    """
    members = _check_members(members, pk.n)
    if user_id not in members:
        raise MembershipError(f"{user_id!r} is not in the member set")
    others = [u for u in members if u != user_id]
    if not others:
        return ctx.pairing(uk.sk, cipher.c2)
    hashes = [hash_to_scalar(u) for u in others]
    delta = hashes[0]
    for x in hashes[1:]:
        delta = ctx.s_mul(delta, x)
    poly = expand_linear_factors(hashes, ctx)
    h_p = ctx.multi_exp_g2(pk.h_powers[:len(hashes)], poly.coeffs[1:])
    raw = ctx.pairing_product([(cipher.c1, h_p), (uk.sk, cipher.c2)])
    return ctx.exp_gt(raw, ctx.s_inv(delta))


def add_user_to_cipher(mk: MasterKey, cipher: BroadcastCipher, user_id: str,
                       ctx: PairingCtx) -> BroadcastCipher:
    """Extend the encoded set by one member: exactly 2 G2 exponentiations.

    bk is unchanged, so existing holders keep their derived key and the new
    member gains access without anyone re-encrypting content.
    """
    term = ctx.s_add(mk.gamma, hash_to_scalar(user_id))
    if term == 0:
        raise DegenerateKeyError(f"H({user_id!r}) equals -gamma")
    return BroadcastCipher(
        c1=cipher.c1,
        c2=ctx.exp_g2(cipher.c2, term),
        c3=ctx.exp_g2(cipher.c3, term),
    )


def remove_user_from_cipher(mk: MasterKey, pk: PublicKey, cipher: BroadcastCipher,
                            user_id: str, k_new: int, ctx: PairingCtx) -> tuple:
    """Drop a member and switch to a fresh k: 1 G1 + 2 G2 exponentiations.

    The removed member's factor is divided out of the k-free component c3,
    then c1 and c2 are rebuilt around k_new.  Returns the new bk alongside
    the updated cipher; the old bk stops being derivable from it.
    """
    k_new = _check_k(k_new)
    term = ctx.s_add(mk.gamma, hash_to_scalar(user_id))
    if term == 0:
        raise DegenerateKeyError(f"H({user_id!r}) equals -gamma")
    c3 = ctx.exp_g2(cipher.c3, ctx.s_inv(term))
    c1 = ctx.exp_g1(pk.w, (-k_new) % ORDER)
    c2 = ctx.exp_g2(c3, k_new)
    bk = ctx.exp_gt(pk.v, k_new)
    return bk, BroadcastCipher(c1=c1, c2=c2, c3=c3)


def rekey_cipher(pk: PublicKey, cipher: BroadcastCipher, k_new: int,
                 ctx: PairingCtx) -> tuple:
    """Refresh k without touching membership: 1 G1 + 1 G2 exponentiation.

    Needs no master key; c3 carries the membership product and is reused
    verbatim.
    """
    k_new = _check_k(k_new)
    c1 = ctx.exp_g1(pk.w, (-k_new) % ORDER)
    c2 = ctx.exp_g2(cipher.c3, k_new)
    bk = ctx.exp_gt(pk.v, k_new)
    return bk, BroadcastCipher(c1=c1, c2=c2, c3=cipher.c3)
