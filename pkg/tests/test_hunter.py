import copy
import json
from pathlib import Path

import pytest

from fermat_hasse.classgroup import BackendConfig, class_data, in_S0
from fermat_hasse.exceptional import cached_exceptional_primes
from fermat_hasse.field import field_data
from fermat_hasse.hunter import (
    CertificateError,
    CounterexampleCertificate,
    Hunt,
    HuntState,
    analyze,
    candidates_path,
    certificate_problems,
    in_S,
    make_certificate,
    run_hunt,
    verify_certificate,
)

DECLARED = BackendConfig("declared")
BUILTIN = BackendConfig("builtin")
REFERENCE = json.loads((Path(__file__).parent / "data" / "pari_reference.json").read_text())


def test_analyze_examples():
    rep = analyze(5, 19, DECLARED)
    assert rep.verdict and str(rep.density.d) == "9/25"
    rep7 = analyze(7, 13, DECLARED)
    assert rep7.verdict and str(rep7.density.d) == "500/2401"
    neg = analyze(3, 10, BUILTIN)
    assert not neg.verdict
    assert "p_divides_h" in neg.failed_conditions
    assert neg.class_data.h == 1
    assert json.loads(json.dumps(rep.to_json()))["verdict"] is True


def test_hunt_declared_only():
    h = Hunt(5, 19, 2, 100, None, DECLARED)
    recs = list(h.run())
    assert h.state.counters["confirmed_S0"] == 0
    assert h.state.counters["candidates_in_S"] >= 0
    assert all(r.kind != "confirmed" for r in recs)


def _reference_S0(p, c, bound):
    ref = REFERENCE[f"{p},{c}"]
    e = ref["cyc"][-1]
    fld = field_data(p, c)
    es = cached_exceptional_primes(p)
    return [int(l) for l in sorted(ref["orders"], key=int)
            if int(l) <= bound and (e // p) % ref["orders"][l] != 0 and in_S(int(l), fld, es)]


def test_first_confirmed_matches_reference():
    h = Hunt(3, 921, 2, 3000, None, BUILTIN)
    confirmed = [r.ell for r in h.run() if r.kind == "confirmed"]
    want = _reference_S0(3, 921, 3000)
    assert confirmed[0] == want[0]
    assert confirmed == want


def test_builtin_hunt_matches_reference_5_19():
    h = Hunt(5, 19, 2, 3000, None, BUILTIN)
    confirmed = [r.ell for r in h.run() if r.kind == "confirmed"]
    assert confirmed == _reference_S0(5, 19, 3000)


@pytest.fixture(scope="module")
def hunt_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("hunt")
    out = d / "certs.jsonl"
    st = run_hunt(5, 19, 2, 6000, None, BUILTIN, out=out, checkpoint=d / "ckpt.json", interval=1000)
    return out, st


def test_hunt_records_and_state(hunt_files):
    out, st = hunt_files
    lines = out.read_text().splitlines()
    assert len(lines) == st.counters["confirmed_S0"] > 0
    assert candidates_path(out).read_text() == ""
    assert st.counters["unknown"] == 0
    ref = _reference_S0(5, 19, 3000)
    assert st.extremes[0] == ref[0]
    assert st.confirmed[: len(ref)] == ref
    assert st.cursor == 6000
    fld = field_data(5, 19)
    for line in lines:
        d = json.loads(line)
        assert d["v"] == 1 and d["verification_level"] == "full"
        ell = d["ell"]
        assert ell % 5 != 1 and in_S(ell, fld, cached_exceptional_primes(5))


def test_roundtrip_verifies(hunt_files):
    out, _ = hunt_files
    for line in out.read_text().splitlines():
        d = json.loads(line)
        cert = CounterexampleCertificate.from_json(d)
        assert cert.to_json() == d
        assert verify_certificate(d)
        assert verify_certificate(d, BUILTIN)


TAMPERS = {
    "p": lambda d: d.update(p=7),
    "c": lambda d: d.update(c=23),
    "ell": lambda d: d.update(ell=d["ell"] + 2 if d["ell"] + 2 != 1659 else 1663),
    "root": lambda d: d.update(root=d["root"] + 1),
    "local.witness": lambda d: d["local"]["witnesses"]["5"].update(
        point=[str(int(x) + 1) for x in d["local"]["witnesses"]["5"]["point"]]),
    "local.primes": lambda d: d["local"].update(checked_primes=d["local"]["checked_primes"][:-1]),
    "local.curve": lambda d: d["local"]["curve"].update(b=d["local"]["curve"]["b"] + 1),
    "transcript": lambda d: d["not_index_divisor"].update(t=[1]),
    "class_data": lambda d: d["class_data"].update(invariants=[25], h=25, e=25),
    "evidence.order": lambda d: d["s0_evidence"].update(class_order=1),
    "evidence.exponent": lambda d: d["s0_evidence"].update(exponent=5),
    "evidence.flag": lambda d: d["s0_evidence"].update(in_s0=False),
    "conditions": lambda d: d["conditions"].update(wieferich_ok=False),
    "level": lambda d: d.update(verification_level="local_only"),
}


@pytest.mark.parametrize("name", sorted(TAMPERS))
def test_single_field_tampering_detected(hunt_files, name):
    out, _ = hunt_files
    d = json.loads(out.read_text().splitlines()[0])
    bad = copy.deepcopy(d)
    TAMPERS[name](bad)
    assert bad != d
    try:
        ok = verify_certificate(bad, BUILTIN)
    except CertificateError:
        ok = False
    assert not ok


def test_false_full_claim_for_13():
    fld = field_data(5, 19)
    cd = class_data(fld, BUILTIN)
    es = cached_exceptional_primes(5)
    ev = in_S0(13, fld, cd, BUILTIN)
    cert = make_certificate(fld, cd, es, 13, ev)
    assert cert.verification_level == "local_only" and verify_certificate(cert.to_json(), BUILTIN)
    forged = cert.to_json()
    forged["verification_level"] = "full"
    forged["s0_evidence"].update(in_s0=True, class_order=5)
    assert not verify_certificate(forged)  # the refutation search finds 2 - theta
    assert not verify_certificate(forged, BUILTIN)


def test_malformed_certificates():
    with pytest.raises(CertificateError) as info:
        CounterexampleCertificate.from_json({"v": 2})
    assert info.value.path == "v"
    with pytest.raises(CertificateError) as info:
        CounterexampleCertificate.from_json({"v": 1, "p": 5})
    assert info.value.path == "c"
    with pytest.raises(CertificateError):
        CounterexampleCertificate.from_json([1, 2])


def test_resume_gives_same_state(tmp_path, hunt_files):
    out_ref, st_ref = hunt_files
    out = tmp_path / "r.jsonl"
    ck = tmp_path / "r.ckpt"
    h = Hunt(5, 19, 2, 6000, None, BUILTIN, interval=1000)
    # stop after the third interval, as if killed right after its checkpoint
    it = h.run(on_interval=lambda st: ck.write_text(json.dumps(st.to_json())))
    while h.state.cursor < 3000:
        next(it)
    saved = HuntState.from_json(json.loads(ck.read_text()))
    assert saved.cursor <= h.state.cursor
    # a partial output file longer than the checkpoint must be cut back
    lines = out_ref.read_text().splitlines(keepends=True)
    out.write_text("".join(lines[: len(saved.confirmed) + 2]))
    st = run_hunt(5, 19, 2, 6000, None, BUILTIN, out=out, checkpoint=ck, interval=1000)
    assert st.to_json() == st_ref.to_json()
    assert out.read_text() == out_ref.read_text()


def test_parallel_matches_serial(hunt_files):
    _, st_ref = hunt_files
    h = Hunt(5, 19, 2, 6000, None, BUILTIN, jobs=2, interval=1000)
    list(h.run())
    assert h.state.to_json() == st_ref.to_json()


def test_checkpoint_mismatch(tmp_path, hunt_files):
    ck = tmp_path / "c.json"
    st = hunt_files[1]
    ck.write_text(json.dumps(st.to_json()))
    with pytest.raises(ValueError, match="different hunt"):
        run_hunt(5, 19, 2, 9000, None, BUILTIN, checkpoint=ck)


def test_negative_analysis_needs_force():
    with pytest.raises(ValueError, match="force"):
        Hunt(3, 10, 2, 100, None, BUILTIN)


def test_class_filter_5_19():
    h = Hunt(5, 19, 2, 3000, (7, 275), BUILTIN)
    confirmed = [r.ell for r in h.run() if r.kind == "confirmed"]
    assert confirmed == [l for l in _reference_S0(5, 19, 3000) if l % 275 == 7]
    assert confirmed[0] == 1657


def test_valid_certificate_has_no_problems(hunt_files):
    d = json.loads(hunt_files[0].read_text().splitlines()[-1])
    assert certificate_problems(CounterexampleCertificate.from_json(d), BUILTIN) == []
