"""Engine-level checks: field towers, curve groups, and the pairing.

The reference points throughout are independent of the optimized code
paths: schoolbook formulas for field products, double-and-add ladders for
scalar multiplication, generic exponentiation for Frobenius and cyclotomic
shortcuts, and a Tate pairing built on a separate Miller loop for the
bilinearity cross-check.
"""

from __future__ import annotations

import random

import pytest
from gmpy2 import mpz

from groupcrypt import bn254 as bn


def rand_fp2(rng):
    return (mpz(rng.randrange(bn.P)), mpz(rng.randrange(bn.P)))


def rand_fp6(rng):
    return (rand_fp2(rng), rand_fp2(rng), rand_fp2(rng))


def rand_fp12(rng):
    return (rand_fp6(rng), rand_fp6(rng))


def fp2_mul_schoolbook(a, b):
    # (ai*i + ar)(bi*i + br) with i^2 = -1
    ai, ar = a
    bi, br = b
    return ((ai * br + ar * bi) % bn.P, (ar * br - ai * bi) % bn.P)


def test_fp2_mul_matches_schoolbook():
    rng = random.Random(1)
    for _ in range(200):
        a, b = rand_fp2(rng), rand_fp2(rng)
        assert bn.fp2_mul(a, b) == fp2_mul_schoolbook(a, b)
        assert bn.fp2_sqr(a) == fp2_mul_schoolbook(a, a)


def test_fp2_inv_and_exp():
    rng = random.Random(2)
    for _ in range(50):
        a = rand_fp2(rng)
        if bn.fp2_is_zero(a):
            continue
        assert bn.fp2_mul(a, bn.fp2_inv(a)) == bn.FP2_ONE
        # Fermat in GF(p^2)
        assert bn.fp2_exp(a, bn.P * bn.P - 1) == bn.FP2_ONE


def fp6_mul_schoolbook(a, b):
    # tau^3 = xi; coefficients (x, y, z) represent x*tau^2 + y*tau + z
    coeffs = [bn.FP2_ZERO] * 5
    for i, ca in enumerate(reversed(a)):
        for j, cb in enumerate(reversed(b)):
            term = bn.fp2_mul(ca, cb)
            coeffs[i + j] = bn.fp2_add(coeffs[i + j], term)
    for k in (3, 4):
        folded = bn.fp2_mul_xi(coeffs[k])
        coeffs[k - 3] = bn.fp2_add(coeffs[k - 3], folded)
    return (coeffs[2], coeffs[1], coeffs[0])


def test_fp6_mul_matches_schoolbook():
    rng = random.Random(3)
    for _ in range(50):
        a, b = rand_fp6(rng), rand_fp6(rng)
        assert bn.fp6_mul(a, b) == fp6_mul_schoolbook(a, b)
        assert bn.fp6_sqr(a) == fp6_mul_schoolbook(a, a)


def fp12_mul_schoolbook(a, b):
    # omega^2 = tau; (x, y) represents x*omega + y
    ax, ay = a
    bx, by = b
    hi = bn.fp6_add(bn.fp6_mul(ax, by), bn.fp6_mul(ay, bx))
    lo = bn.fp6_add(bn.fp6_mul(ay, by), bn.fp6_mul_tau(bn.fp6_mul(ax, bx)))
    return (hi, lo)


def test_fp12_mul_matches_schoolbook():
    rng = random.Random(4)
    for _ in range(30):
        a, b = rand_fp12(rng), rand_fp12(rng)
        assert bn.fp12_mul(a, b) == fp12_mul_schoolbook(a, b)
        assert bn.fp12_sqr(a) == fp12_mul_schoolbook(a, a)


def test_fp12_inv():
    rng = random.Random(5)
    for _ in range(20):
        a = rand_fp12(rng)
        assert bn.fp12_mul(a, bn.fp12_inv(a)) == bn.FP12_ONE


def test_fp12_frobenius_matches_generic_exp():
    rng = random.Random(6)
    for _ in range(10):
        a = rand_fp12(rng)
        assert bn.fp12_frobenius(a) == bn.fp12_exp(a, bn.P)
        assert bn.fp12_frobenius_p2(a) == bn.fp12_exp(a, bn.P * bn.P)


def test_cyclotomic_shortcuts_on_pairing_values():
    rng = random.Random(7)
    g = bn.pairing(bn.G1_GEN, bn.G2_GEN)
    assert bn.fp12_is_cyclotomic(g)
    for _ in range(5):
        e = rng.randrange(1, bn.ORDER)
        v = bn.gt_exp(g, e)
        assert bn.fp12_is_cyclotomic(v)
        assert bn.fp12_cyc_sqr(v) == bn.fp12_mul(v, v)
        k = rng.randrange(1, 2**64)
        assert bn.fp12_exp_cyc(v, k) == bn.fp12_exp(v, k)
        # conjugate inverts on the cyclotomic subgroup
        assert bn.fp12_mul(v, bn.fp12_conj(v)) == bn.FP12_ONE
    assert not bn.fp12_is_cyclotomic(rand_fp12(rng))


def test_g1_group_law_and_order():
    rng = random.Random(8)
    assert bn.g1_on_curve(bn.G1_GEN)
    assert bn.g1_is_inf(bn.g1_mul_plain(bn.G1_GEN, bn.ORDER))
    for _ in range(20):
        a = bn.g1_mul_plain(bn.G1_GEN, rng.randrange(1, bn.ORDER))
        b = bn.g1_mul_plain(bn.G1_GEN, rng.randrange(1, bn.ORDER))
        assert bn.g1_on_curve(a)
        assert bn.g1_eq(bn.g1_add(a, b), bn.g1_add(b, a))
        assert bn.g1_eq(bn.g1_add(a, a), bn.g1_double(a))
        assert bn.g1_is_inf(bn.g1_add(a, bn.g1_neg(a)))
        assert bn.g1_eq(bn.g1_add(a, bn.G1_INF), a)


def test_g2_group_law_and_order():
    rng = random.Random(9)
    assert bn.g2_on_curve(bn.G2_GEN)
    assert bn.g2_is_inf(bn.g2_mul_plain(bn.G2_GEN, bn.ORDER))
    for _ in range(10):
        a = bn.g2_mul_plain(bn.G2_GEN, rng.randrange(1, bn.ORDER))
        b = bn.g2_mul_plain(bn.G2_GEN, rng.randrange(1, bn.ORDER))
        assert bn.g2_on_curve(a)
        assert bn.g2_in_subgroup(a)
        assert bn.g2_eq(bn.g2_add(a, b), bn.g2_add(b, a))
        assert bn.g2_eq(bn.g2_add(a, a), bn.g2_double(a))
        assert bn.g2_is_inf(bn.g2_add(a, bn.g2_neg(a)))


def test_psi_acts_as_eigenvalue_on_subgroup():
    rng = random.Random(10)
    lam = (bn.TRACE - 1) % bn.ORDER
    for _ in range(5):
        a = bn.g2_mul_plain(bn.G2_GEN, rng.randrange(1, bn.ORDER))
        assert bn.g2_eq(bn.g2_psi(a), bn.g2_mul_plain(a, lam))


def test_glv_mul_matches_plain_ladder():
    rng = random.Random(11)
    scalars = [0, 1, 2, bn.ORDER - 1, bn.ORDER, bn.ORDER + 5]
    scalars += [rng.randrange(bn.ORDER) for _ in range(15)]
    for e in scalars:
        assert bn.g1_eq(bn.g1_mul(bn.G1_GEN, e), bn.g1_mul_plain(bn.G1_GEN, e))
        assert bn.g2_eq(bn.g2_mul(bn.G2_GEN, e), bn.g2_mul_plain(bn.G2_GEN, e))
    g = bn.pairing(bn.G1_GEN, bn.G2_GEN)
    for e in scalars[:8]:
        assert bn.gt_exp(g, e) == bn.fp12_exp(g, e % bn.ORDER)


def test_negative_scalars_do_not_reduce_silently():
    # the plain ladder must treat the scalar as an integer, not mod order,
    # otherwise order checks on untrusted points become vacuous
    a = bn.g2_mul_plain(bn.G2_GEN, 7)
    assert bn.g2_eq(bn.g2_mul_plain(a, -1), bn.g2_neg(a))
    assert bn.g2_eq(bn.g2_mul(bn.G2_GEN, -3), bn.g2_neg(bn.g2_mul_plain(bn.G2_GEN, 3)))


def test_g2_multi_exp_matches_fold():
    rng = random.Random(12)
    for count in (1, 2, 3, 7):
        bases = [
            bn.g2_mul_plain(bn.G2_GEN, rng.randrange(1, bn.ORDER))
            for _ in range(count)
        ]
        exps = [rng.randrange(bn.ORDER) for _ in range(count)]
        acc = bn.G2_INF
        for b, e in zip(bases, exps):
            acc = bn.g2_add(acc, bn.g2_mul_plain(b, e))
        assert bn.g2_eq(bn.g2_multi_exp(bases, exps), acc)


def test_pairing_bilinearity():
    rng = random.Random(13)
    g = bn.pairing(bn.G1_GEN, bn.G2_GEN)
    assert g != bn.FP12_ONE
    assert bn.fp12_exp(g, bn.ORDER) == bn.FP12_ONE
    for _ in range(4):
        a = rng.randrange(1, bn.ORDER)
        b = rng.randrange(1, bn.ORDER)
        lhs = bn.pairing(bn.g1_mul(bn.G1_GEN, a), bn.g2_mul(bn.G2_GEN, b))
        assert lhs == bn.gt_exp(g, (a * b) % bn.ORDER)
    # additivity in each slot
    p1 = bn.g1_mul(bn.G1_GEN, 11)
    p2 = bn.g1_mul(bn.G1_GEN, 23)
    q = bn.g2_mul(bn.G2_GEN, 5)
    assert bn.pairing(bn.g1_add(p1, p2), q) == bn.fp12_mul(
        bn.pairing(p1, q), bn.pairing(p2, q)
    )


def test_multi_pairing_equals_product():
    rng = random.Random(14)
    pairs = []
    prod = bn.FP12_ONE
    for _ in range(3):
        p = bn.g1_mul(bn.G1_GEN, rng.randrange(1, bn.ORDER))
        q = bn.g2_mul(bn.G2_GEN, rng.randrange(1, bn.ORDER))
        pairs.append((p, q))
        prod = bn.fp12_mul(prod, bn.pairing(p, q))
    assert bn.multi_pairing(pairs) == prod
    assert bn.multi_pairing([]) == bn.FP12_ONE


def test_tate_reference_is_an_independent_bilinear_map():
    rng = random.Random(15)
    t = bn.tate_pairing_reference(bn.G1_GEN, bn.G2_GEN)
    assert t != bn.FP12_ONE
    assert bn.fp12_exp(t, bn.ORDER) == bn.FP12_ONE
    a = rng.randrange(2, 2**32)
    b = rng.randrange(2, 2**32)
    lhs = bn.tate_pairing_reference(
        bn.g1_mul(bn.G1_GEN, a), bn.g2_mul(bn.G2_GEN, b)
    )
    assert lhs == bn.fp12_exp(t, a * b)


def test_g1_serialization_round_trip():
    rng = random.Random(16)
    for _ in range(20):
        a = bn.g1_mul(bn.G1_GEN, rng.randrange(bn.ORDER))
        assert bn.g1_eq(bn.g1_from_bytes(bn.g1_to_bytes(a)), a)
    inf = bn.g1_to_bytes(bn.G1_INF)
    assert bn.g1_is_inf(bn.g1_from_bytes(inf))


def test_g2_gt_serialization_round_trip():
    rng = random.Random(17)
    for _ in range(8):
        a = bn.g2_mul(bn.G2_GEN, rng.randrange(bn.ORDER))
        assert bn.g2_eq(bn.g2_from_bytes(bn.g2_to_bytes(a)), a)
    v = bn.gt_exp(bn.pairing(bn.G1_GEN, bn.G2_GEN), rng.randrange(1, bn.ORDER))
    assert bn.gt_from_bytes(bn.gt_to_bytes(v)) == v


def test_deserialization_rejects_garbage():
    good = bn.g1_to_bytes(bn.G1_GEN)
    with pytest.raises(ValueError):
        bn.g1_from_bytes(good[:-1])
    # infinity flag with a nonzero x is malformed
    with pytest.raises(ValueError):
        bn.g1_from_bytes(bytes([good[0] | 0x40]) + good[1:])
    # x coordinate >= p
    overflow = bytearray(bn.P.to_bytes(32, "big"))
    with pytest.raises(ValueError):
        bn.g1_from_bytes(bytes(overflow))
    # point not on curve: x with no matching y stays invalid
    for x in range(2, 40):
        blob = x.to_bytes(32, "big")
        try:
            bn.g1_from_bytes(blob)
        except ValueError:
            break
    else:
        pytest.fail("no invalid x found in range")


def _twist_point_outside_subgroup(rng):
    # scan for a twist-curve point, then check it falls outside the
    # order-r subgroup (the twist has huge cofactor, so almost all do)
    while True:
        x = (rand_fp2(rng)[0] % bn.P, rand_fp2(rng)[1] % bn.P)
        rhs = bn.fp2_add(bn.fp2_mul(bn.fp2_sqr(x), x), bn.TWIST_B)
        y = bn.sqrt_fp2(rhs)
        if y is None:
            continue
        point = (x, y, bn.FP2_ONE)
        assert bn.g2_on_curve(point)
        if not bn.g2_in_subgroup(point):
            return point


def test_g2_subgroup_check_rejects_twist_points():
    rng = random.Random(18)
    rogue = _twist_point_outside_subgroup(rng)
    blob = bn.g2_to_bytes(rogue)
    with pytest.raises(ValueError):
        bn.g2_from_bytes(blob)
    # skipping the check parses fine, proving the check is the gate
    parsed = bn.g2_from_bytes(blob, check_subgroup=False)
    assert bn.g2_eq(parsed, rogue)


def test_gt_deserialization_rejects_non_cyclotomic():
    rng = random.Random(19)
    junk = rand_fp12(rng)
    blob = bn.gt_to_bytes(junk)
    with pytest.raises(ValueError):
        bn.gt_from_bytes(blob)
    assert bn.gt_from_bytes(blob, check_subgroup=False) == junk


def test_sqrt_fp2_on_squares():
    rng = random.Random(20)
    for _ in range(20):
        a = rand_fp2(rng)
        sq = bn.fp2_sqr(a)
        root = bn.sqrt_fp2(sq)
        assert root is not None
        assert bn.fp2_sqr(root) == sq
