import json
import random

from fermat_hasse.arith import primes_in_progression, primitive_root
from fermat_hasse.exceptional import (
    ExceptionalSet,
    cached_exceptional_primes,
    exceptional_primes,
    is_exceptional,
    verify_set,
    weil_bound,
)
from fermat_hasse.local import count_points_fq
from oracles import count_points_brute


def test_weil_bound_values():
    assert weil_bound(5) == 144
    assert weil_bound(3) == 4
    assert weil_bound(19) == 93636


def test_is_exceptional_examples():
    hit, w = is_exceptional(11, 5)
    assert hit and w is not None
    assert not is_exceptional(31, 5)[0]
    assert is_exceptional(7, 5) == (False, None)


def test_is_exceptional_by_brute_force():
    # every class triple, directly counted
    for p in (3, 5, 7):
        for q in primes_in_progression(1, p, 2, min(weil_bound(p), 200)):
            brute = any(
                count_points_brute(p, q, (1, b, c)) == 0 for b in range(1, q) for c in range(1, q)
            ) if q < 60 else None
            got = is_exceptional(q, p)[0]
            if brute is not None:
                assert got == brute, (p, q)


def test_small_sets():
    assert exceptional_primes(3).primes == []
    assert exceptional_primes(5).primes == [11]
    assert exceptional_primes(7).primes == [29, 43, 71]
    assert exceptional_primes(13).primes == [53, 79, 131, 157, 313, 547]


def test_witnesses_and_class_function():
    es = exceptional_primes(7)
    assert verify_set(es)
    rng = random.Random(2)
    for q in es.primes:
        assert q % 7 == 1 and q < weil_bound(7)
        i, j = es.witnesses[q]
        g = primitive_root(q)
        base = (1, pow(g, i, q), pow(g, j, q))
        assert count_points_fq(7, q, base) == 0
        for _ in range(20):
            t = [rng.randrange(1, q) for _ in range(3)]
            scaled = [b * pow(x, 7, q) % q for b, x in zip(base, t)]
            perm = rng.sample(scaled, 3)
            assert count_points_fq(7, q, perm) == 0


def test_cache_roundtrip_and_tamper(tmp_path):
    es = cached_exceptional_primes(5, tmp_path)
    path = tmp_path / "exceptional_p5.json"
    assert json.loads(path.read_text()) == es.to_json()
    bad = es.to_json()
    bad["primes"] = [11, 31]
    bad["witnesses"]["31"] = [0, 0]
    path.write_text(json.dumps(bad))
    assert not verify_set(ExceptionalSet.from_json(bad))
    again = cached_exceptional_primes(5, tmp_path)  # regenerated after failed verification
    assert again.primes == [11]
