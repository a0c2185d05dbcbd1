"""Pairing-group abstraction: typed wrappers over the bn254 engine, scalar
field helpers, hash-to-scalar, polynomial expansion, and operation counting.

Scalars are plain Python ints reduced mod ORDER.  Group elements are opaque
wrapper objects; the only way to get one is from a generator, a counted
operation on a PairingCtx, or deserialization (which validates curve and
subgroup membership).  All byte encodings defined here are the wire format
used by every other module: 32-byte big-endian scalars, 32-byte compressed
G1, 64-byte compressed G2, 384-byte GT.

Operation counters live on PairingCtx so complexity claims are testable as
exact counts rather than timings.  Only explicit PairingCtx calls count;
whatever the engine does internally (windowing, endomorphisms, shared Miller
loops) is deliberately invisible to the counters.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field

import gmpy2

from . import bn254 as _bn
from .errors import InvalidElementError, SerializationError

ORDER = int(_bn.ORDER)
SCALAR_BYTES = 32
G1_BYTES = 32
G2_BYTES = 64
GT_BYTES = 384

_CRYPTO_REJECTS = ("curve", "subgroup", "cyclotomic", "twist")


def _translate(exc: ValueError) -> Exception:
    msg = str(exc)
    if any(word in msg for word in _CRYPTO_REJECTS):
        return InvalidElementError(msg)
    return SerializationError(msg)


# --------------------------------------------------------------------------
# scalars
# --------------------------------------------------------------------------


def scalar_to_bytes(s: int) -> bytes:
    s = int(s)
    if not 0 <= s < ORDER:
        raise SerializationError("scalar out of range")
    return s.to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise SerializationError("scalar encoding must be 32 bytes")
    s = int.from_bytes(data, "big")
    if s >= ORDER:
        raise SerializationError("scalar encoding out of range")
    return s


def rand_scalar(rng, nonzero: bool = True) -> int:
    lo = 1 if nonzero else 0
    return rng.randrange(lo, ORDER)


def hash_to_scalar(ident) -> int:
    """Map an identifier to a nonzero scalar.

    SHA-512 gives twice the modulus width, so the mod-ORDER bias is
    negligible.  The zero output (probability ~2**-512) is remapped by
    appending a counter byte and rehashing, keeping the function total.
    """
    if isinstance(ident, str):
        ident = ident.encode("utf-8")
    if not ident:
        raise ValueError("identifier must be non-empty")
    out = int.from_bytes(hashlib.sha512(ident).digest(), "big") % ORDER
    ctr = 0
    while out == 0:
        out = int.from_bytes(hashlib.sha512(ident + bytes([ctr])).digest(), "big") % ORDER
        ctr += 1
    return out


# --------------------------------------------------------------------------
# polynomials over the scalar field
# --------------------------------------------------------------------------


@dataclass
class Poly:
    """Coefficient list, index t holding the coefficient of X**t."""

    coeffs: list

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % ORDER
        return acc


def expand_linear_factors(roots, ctx: "PairingCtx | None" = None) -> Poly:
    """Coefficients of prod_i (X + roots[i]), ascending.

    Coefficient t is the (s-t)-th elementary symmetric polynomial of the
    roots; the leading coefficient is 1.  When a ctx is given, the exact
    schoolbook cost (s(s+1)/2 mults, s(s-1)/2 adds) is charged to its
    scalar counters in one bulk update.
    """
    roots = list(roots)
    coeffs = [1]
    for r in roots:
        r = int(r) % ORDER
        nxt = [coeffs[0] * r % ORDER]
        for i in range(1, len(coeffs)):
            nxt.append((coeffs[i] * r + coeffs[i - 1]) % ORDER)
        # the new leading coefficient is the old one shifted up, not a mult
        nxt.append(1)
        coeffs = nxt
    if ctx is not None:
        s = len(roots)
        ctx.count_scalar_ops(mults=s * (s + 1) // 2, adds=s * (s - 1) // 2)
    return Poly(coeffs)


# --------------------------------------------------------------------------
# group element wrappers
# --------------------------------------------------------------------------


class G1Elem:
    __slots__ = ("_pt",)

    def __init__(self, pt):
        self._pt = pt

    @classmethod
    def generator(cls) -> "G1Elem":
        return cls(_bn.G1_GEN)

    @classmethod
    def identity(cls) -> "G1Elem":
        return cls(_bn.G1_INF)

    def is_identity(self) -> bool:
        return _bn.g1_is_inf(self._pt)

    def add(self, other: "G1Elem") -> "G1Elem":
        return G1Elem(_bn.g1_add(self._pt, other._pt))

    def neg(self) -> "G1Elem":
        return G1Elem(_bn.g1_neg(self._pt))

    def __eq__(self, other) -> bool:
        if not isinstance(other, G1Elem):
            return NotImplemented
        return _bn.g1_eq(self._pt, other._pt)

    def __hash__(self) -> int:
        x, y, z = _bn.g1_normalize(self._pt)
        return hash((int(x), int(y), int(z)))

    def to_bytes(self) -> bytes:
        return _bn.g1_to_bytes(self._pt)

    @classmethod
    def from_bytes(cls, data: bytes) -> "G1Elem":
        try:
            return cls(_bn.g1_from_bytes(data))
        except ValueError as exc:
            raise _translate(exc) from None

    def __repr__(self) -> str:
        return f"G1Elem({self.to_bytes().hex()[:16]}...)"


class G2Elem:
    __slots__ = ("_pt",)

    def __init__(self, pt):
        self._pt = pt

    @classmethod
    def generator(cls) -> "G2Elem":
        return cls(_bn.G2_GEN)

    @classmethod
    def identity(cls) -> "G2Elem":
        return cls(_bn.G2_INF)

    def is_identity(self) -> bool:
        return _bn.g2_is_inf(self._pt)

    def add(self, other: "G2Elem") -> "G2Elem":
        return G2Elem(_bn.g2_add(self._pt, other._pt))

    def neg(self) -> "G2Elem":
        return G2Elem(_bn.g2_neg(self._pt))

    def __eq__(self, other) -> bool:
        if not isinstance(other, G2Elem):
            return NotImplemented
        return _bn.g2_eq(self._pt, other._pt)

    def __hash__(self) -> int:
        x, y, z = _bn.g2_normalize(self._pt)
        return hash((int(x[0]), int(x[1]), int(y[0]), int(y[1]), int(z[1])))

    def to_bytes(self) -> bytes:
        return _bn.g2_to_bytes(self._pt)

    @classmethod
    def from_bytes(cls, data: bytes) -> "G2Elem":
        try:
            return cls(_bn.g2_from_bytes(data))
        except ValueError as exc:
            raise _translate(exc) from None

    def __repr__(self) -> str:
        return f"G2Elem({self.to_bytes().hex()[:16]}...)"


class GTElem:
    """Multiplicative target-group element.

    Every GTElem in this library lies in the cyclotomic subgroup (pairing
    outputs, their powers, and validated deserializations), which is what
    lets inverse() use conjugation.
    """

    __slots__ = ("_el",)

    def __init__(self, el):
        self._el = el

    @classmethod
    def identity(cls) -> "GTElem":
        return cls(_bn.FP12_ONE)

    def is_identity(self) -> bool:
        return self._el == _bn.FP12_ONE

    def mul(self, other: "GTElem") -> "GTElem":
        return GTElem(_bn.fp12_mul(self._el, other._el))

    def inverse(self) -> "GTElem":
        return GTElem(_bn.fp12_conj(self._el))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GTElem):
            return NotImplemented
        return self._el == other._el

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def to_bytes(self) -> bytes:
        return _bn.gt_to_bytes(self._el)

    @classmethod
    def from_bytes(cls, data: bytes) -> "GTElem":
        try:
            return cls(_bn.gt_from_bytes(data))
        except ValueError as exc:
            raise _translate(exc) from None

    def __repr__(self) -> str:
        return f"GTElem({self.to_bytes().hex()[:16]}...)"


# --------------------------------------------------------------------------
# counted operations
# --------------------------------------------------------------------------


@dataclass
class OpCounts:
    exp_g1: int = 0
    exp_g2: int = 0
    exp_gt: int = 0
    pairings: int = 0
    scalar_mults: int = 0
    scalar_adds: int = 0
    scalar_invs: int = 0

    FIELDS = ("exp_g1", "exp_g2", "exp_gt", "pairings",
              "scalar_mults", "scalar_adds", "scalar_invs")

    def snapshot(self) -> "OpCounts":
        return OpCounts(**{f: getattr(self, f) for f in self.FIELDS})

    def __sub__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(**{f: getattr(self, f) - getattr(other, f) for f in self.FIELDS})

    def group_exps(self) -> int:
        """Source-group exponentiations (G1 + G2), the unit used by the
        constant-time-update and removal-complexity claims."""
        return self.exp_g1 + self.exp_g2

    def scalar_ops(self) -> int:
        return self.scalar_mults + self.scalar_adds + self.scalar_invs

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELDS}


def reference_pairing_product(pairs) -> tuple:
    """Product of reduced Tate pairings; an independent slow oracle suitable
    for injecting into PairingCtx in tests."""
    acc = _bn.FP12_ONE
    for a, b in pairs:
        acc = _bn.fp12_mul(acc, _bn.tate_pairing_reference(a, b))
    return acc


class PairingCtx:
    """Shared pairing context: generators, the group order, and counters.

    The context itself is immutable after construction apart from the
    counters, which are guarded by a lock and only ever increase.  A custom
    pairing backend may be injected for oracle testing; it must accept a
    list of (g1, g2) engine points and return their pairing product.
    """

    curve = "bn254 (alt_bn128)"

    def __init__(self, pairing_impl=None):
        self.g = G1Elem.generator()
        self.h = G2Elem.generator()
        self.order = ORDER
        self.counts = OpCounts()
        self._lock = threading.Lock()
        self._pair_impl = pairing_impl if pairing_impl is not None else _bn.multi_pairing

    def _bump(self, field_name: str, amount: int = 1) -> None:
        with self._lock:
            setattr(self.counts, field_name, getattr(self.counts, field_name) + amount)

    def snapshot(self) -> OpCounts:
        with self._lock:
            return self.counts.snapshot()

    # group exponentiations -------------------------------------------------

    def exp_g1(self, base: G1Elem, e: int) -> G1Elem:
        self._bump("exp_g1")
        return G1Elem(_bn.g1_mul(base._pt, int(e) % ORDER))

    def exp_g2(self, base: G2Elem, e: int) -> G2Elem:
        self._bump("exp_g2")
        return G2Elem(_bn.g2_mul(base._pt, int(e) % ORDER))

    def exp_gt(self, base: GTElem, e: int) -> GTElem:
        self._bump("exp_gt")
        return GTElem(_bn.gt_exp(base._el, int(e) % ORDER))

    def multi_exp_g2(self, bases, exps) -> G2Elem:
        if len(bases) != len(exps):
            raise ValueError("multi_exp_g2: bases and exponents differ in length")
        self._bump("exp_g2", len(bases))
        return G2Elem(_bn.g2_multi_exp([b._pt for b in bases],
                                       [int(e) % ORDER for e in exps]))

    # pairings ---------------------------------------------------------------

    def pairing(self, a: G1Elem, b: G2Elem) -> GTElem:
        self._bump("pairings")
        return GTElem(self._pair_impl([(a._pt, b._pt)]))

    def pairing_product(self, pairs) -> GTElem:
        pairs = list(pairs)
        self._bump("pairings", len(pairs))
        return GTElem(self._pair_impl([(a._pt, b._pt) for a, b in pairs]))

    # scalar field -----------------------------------------------------------

    def s_mul(self, a: int, b: int) -> int:
        self._bump("scalar_mults")
        return a * b % ORDER

    def s_add(self, a: int, b: int) -> int:
        self._bump("scalar_adds")
        return (a + b) % ORDER

    def s_inv(self, a: int) -> int:
        if a % ORDER == 0:
            raise ValueError("scalar has no inverse")
        self._bump("scalar_invs")
        return int(gmpy2.invert(a, ORDER))

    def count_scalar_ops(self, mults: int = 0, adds: int = 0, invs: int = 0) -> None:
        with self._lock:
            self.counts.scalar_mults += mults
            self.counts.scalar_adds += adds
            self.counts.scalar_invs += invs
