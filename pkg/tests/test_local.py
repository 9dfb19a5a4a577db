import random

import pytest

from fermat_hasse.arith import Residue, primes_in_progression, primes_up_to
from fermat_hasse.local import (
    DiagonalCurve,
    LocalError,
    LocalReport,
    count_points_fq,
    obstruction_report,
    replay_witness,
    solvable_classes,
    solvable_qq,
)
from oracles import count_points_brute, qq_solvable_brute


@pytest.mark.parametrize("p,q,coeffs,n", [(3, 2, (1, 1, 1), 3), (3, 5, (1, 1, 1), 6), (3, 7, (1, 1, 1), 9)])
def test_count_examples(p, q, coeffs, n):
    assert count_points_fq(p, q, coeffs) == n
    assert count_points_brute(p, q, coeffs) == n


def test_count_rejects_degenerate():
    with pytest.raises(LocalError, match="not a diagonal curve over F_q"):
        count_points_fq(3, 7, (1, 7, 1))


def test_count_matches_brute_force():
    rng = random.Random(3)
    for _ in range(300):
        p = rng.choice([3, 5, 7, 11])
        q = rng.choice([x for x in primes_up_to(120) if x != p])
        co = [rng.randrange(1, q) for _ in range(3)]
        assert count_points_fq(p, q, co) == count_points_brute(p, q, co), (p, q, co)


def test_selmer_and_trivial_points():
    selmer = DiagonalCurve(3, 3, 4, 5)
    assert solvable_qq(5, selmer).solvable
    for q in (2, 3, 7, 11):
        assert solvable_qq(q, DiagonalCurve(5, 1, 1, -1)).solvable


def test_known_obstruction():
    res = solvable_qq(5, DiagonalCurve(5, 1, 2, 19))
    assert not res.solvable
    assert res.depth is not None
    assert replay_witness(DiagonalCurve(5, 1, 2, 19), res)


def test_witnesses_replay():
    rng = random.Random(11)
    for _ in range(200):
        q = rng.choice([2, 3, 5, 7, 11, 13])
        p = rng.choice([3, 5, 7])
        co = [rng.choice([x for x in range(-30, 31) if x]) for _ in range(3)]
        curve = DiagonalCurve(p, *co)
        res = solvable_qq(q, curve)
        assert replay_witness(curve, res)
        if res.solvable:
            pt = res.point
            assert curve.evaluate(pt) % q ** (2 * res.deriv_val + 1) == 0


def test_tampered_witness_fails():
    curve = DiagonalCurve(3, 3, 4, 5)
    res = solvable_qq(5, curve)
    res.point = (res.point[0] + 1, res.point[1], res.point[2])
    assert not replay_witness(curve, res)


def test_agreement_with_lift_oracle_small():
    rng = random.Random(5)
    for _ in range(100):
        q = rng.choice([2, 3, 5, 7])
        p = rng.choice([3, 5, 7])
        co = [rng.choice([x for x in range(-40, 41) if x]) for _ in range(3)]
        want = qq_solvable_brute(q, p, co)
        if want is None:
            continue
        assert solvable_qq(q, DiagonalCurve(p, *co), witness=False).solvable == want, (q, p, co)


def test_scaling_invariance():
    rng = random.Random(7)
    for _ in range(100):
        q = rng.choice([2, 3, 5, 7])
        p = rng.choice([3, 5])
        co = [rng.choice([x for x in range(-12, 13) if x]) for _ in range(3)]
        k = rng.choice([2, 3, 5, 7, -1, 10])
        a = solvable_qq(q, DiagonalCurve(p, *co), witness=False).solvable
        b = solvable_qq(q, DiagonalCurve(p, *(k * x for x in co)), witness=False).solvable
        # dividing by k is the same test read backwards
        assert a == b


def test_class_invariance():
    rng = random.Random(9)
    for p, c, q in [(5, 19, 5), (5, 19, 11), (3, 921, 3), (3, 921, 307), (7, 13, 29)]:
        modulus = p * p if q == p else q
        pool = [ell for ell in primes_up_to(20000) if (p * q * c) % ell]
        by_class = {}
        for ell in pool:
            by_class.setdefault(ell % modulus, []).append(ell)
        for cls, members in list(by_class.items())[:25]:
            a, b = rng.sample(members, 2) if len(members) > 1 else (members[0], members[0])
            va = solvable_qq(q, DiagonalCurve(p, 1, a, c), witness=False).solvable
            vb = solvable_qq(q, DiagonalCurve(p, 1, b, c), witness=False).solvable
            assert va == vb, (p, c, q, a, b)


def test_solvable_class_examples():
    assert solvable_classes(3, 921, 3) == {Residue(t, 9) for t in (2, 5, 8)}
    assert solvable_classes(5, 19, 5) == {Residue(t, 25) for t in (7, 8, 9, 12, 13, 17, 18, 19, 24)}
    assert solvable_classes(5, 19, 11) == {Residue(t, 11) for t in (1, 2, 3, 4, 7, 8, 9, 10)}
    assert len(solvable_classes(3, 921, 307)) == 102


def test_solvable_classes_rejects_irrelevant_q():
    with pytest.raises(LocalError):
        solvable_classes(5, 19, 7)


def test_solvable_classes_against_oracle():
    for p, c, q in [(3, 921, 3), (5, 19, 5), (5, 19, 11), (3, 10, 5)]:
        if q not in (p,) and c % q:
            continue
        modulus = p * p if q == p else q
        got = {r.value for r in solvable_classes(p, c, q)}
        # sample one prime per class and ask the lift oracle
        for t in range(1, modulus):
            if t % q == 0 or (q == p and t % p == 1):
                continue
            ell = next(primes_in_progression(t, modulus, 2 * c + 100, 10**7))
            assert (t in got) == qq_solvable_brute(q, p, (1, ell, c)), (p, c, q, t)


def test_obstruction_report_examples():
    rep = obstruction_report(5, 7, 19, [11])
    assert rep.obstructed_at is None
    assert rep.checked_primes == [5, 19, 7, 11]
    bad = obstruction_report(5, 2, 19, [11])
    assert bad.obstructed_at == 5
    mod307 = {r.value for r in solvable_classes(3, 921, 307)}
    rep3 = obstruction_report(3, 2, 921, [])
    assert (rep3.obstructed_at is None) == (2 in mod307 and 2 % 9 in (2, 5, 8))
    with pytest.raises(LocalError, match="ell outside hunt domain"):
        obstruction_report(5, 11, 19, [11])


def test_report_json_roundtrip():
    rep = obstruction_report(5, 1657, 19, [11])
    again = LocalReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    assert all(replay_witness(again.curve, w) for w in again.witnesses.values())
