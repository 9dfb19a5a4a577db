"""Pipeline: analyze a pair (p, c), hunt for primes ell, emit and verify certificates."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

from .arith import is_prime, primes_in_progression, primes_up_to, pth_root_mod
from .classgroup import (
    BackendConfig,
    BackendFailure,
    ClassGroupData,
    S0Evidence,
    Status,
    class_data,
    in_S0,
    is_principal,
)
from .density import DensityCertificate, density_certificate
from .exceptional import ExceptionalSet, _atomic_write_json, cached_exceptional_primes
from .field import (
    PureFieldParams,
    check_transcript,
    dedekind_transcript,
    field_data,
    ideal_pow,
    index_divisor,
    prime_above_deg1,
)
from .local import LocalReport, obstruction_report, replay_witness

log = logging.getLogger(__name__)

CERT_VERSION = 1
LEVELS = ("local_only", "full")

DOMAIN_NOTE = (
    "S excludes ell = p and ell | c in addition to ell = 1 mod p and ell | f; "
    "the broad definition of S does not list the first two exclusions"
)


# ------------------------------------------------------------------ analyze


@dataclass
class AnalysisReport:
    field: PureFieldParams
    class_data: ClassGroupData
    exceptionals: ExceptionalSet
    density: DensityCertificate | None
    failed_conditions: list[str]
    verdict: bool
    notes: list[str] = field(default_factory=list)

    @property
    def verdict_text(self) -> str:
        if self.verdict:
            return "S0 infinite by the theorem"
        return "criterion not applicable: " + ", ".join(self.failed_conditions)

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "class_data": self.class_data.to_json(),
            "exceptionals": self.exceptionals.to_json(),
            "density": None if self.density is None else self.density.to_json(),
            "conditions": {
                "wieferich_ok": self.field.wieferich_ok,
                "p_divides_h": self.class_data.h % self.field.p == 0,
            },
            "failed_conditions": self.failed_conditions,
            "verdict": self.verdict,
            "verdict_text": self.verdict_text,
            "notes": self.notes,
        }


def analyze(p: int, c: int, backend: BackendConfig | None = None, cache_dir=None) -> AnalysisReport:
    backend = backend or BackendConfig()
    fld = field_data(p, c)
    cd = class_data(fld, backend)
    es = cached_exceptional_primes(p, cache_dir)
    failed = []
    if not fld.wieferich_ok:
        failed.append("wieferich_ok")
    if cd.h % p:
        failed.append("p_divides_h")
    cert = None
    if not failed:
        cert = density_certificate(fld, cd, es)
        if not cert.passes:
            failed.append("density_exceeds_threshold")
    return AnalysisReport(fld, cd, es, cert, failed, not failed, [DOMAIN_NOTE])


# ------------------------------------------------------------------ certificates


class CertificateError(ValueError):
    """Malformed certificate: ``path`` names the offending field."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass
class CounterexampleCertificate:
    p: int
    c: int
    ell: int
    local: LocalReport
    not_index_divisor: dict
    root: int
    class_data: ClassGroupData
    s0_evidence: S0Evidence
    conditions: dict
    verification_level: str

    def to_json(self) -> dict:
        return {
            "v": CERT_VERSION,
            "p": self.p,
            "c": self.c,
            "ell": self.ell,
            "local": self.local.to_json(),
            "not_index_divisor": self.not_index_divisor,
            "root": self.root,
            "class_data": self.class_data.to_json(),
            "s0_evidence": self.s0_evidence.to_json(),
            "conditions": dict(self.conditions),
            "verification_level": self.verification_level,
        }

    @classmethod
    def from_json(cls, d) -> "CounterexampleCertificate":
        if not isinstance(d, dict):
            raise CertificateError("$", "certificate must be a JSON object")
        if d.get("v") != CERT_VERSION:
            raise CertificateError("v", f"unsupported version {d.get('v')!r}")
        required = ("p", "c", "ell", "local", "not_index_divisor", "root", "class_data",
                    "s0_evidence", "conditions", "verification_level")
        for k in required:
            if k not in d:
                raise CertificateError(k, "missing")
        for k in ("p", "c", "ell", "root"):
            if not isinstance(d[k], int) or isinstance(d[k], bool):
                raise CertificateError(k, "must be an integer")
        if d["verification_level"] not in LEVELS:
            raise CertificateError("verification_level", f"must be one of {LEVELS}")
        cond = d["conditions"]
        if not isinstance(cond, dict) or set(cond) != {"wieferich_ok", "p_divides_h"}:
            raise CertificateError("conditions", "expected keys wieferich_ok and p_divides_h")
        if not all(isinstance(v, bool) for v in cond.values()):
            raise CertificateError("conditions", "values must be booleans")
        if not isinstance(d["not_index_divisor"], dict):
            raise CertificateError("not_index_divisor", "must be a transcript object")
        try:
            local = LocalReport.from_json(d["local"])
        except Exception as exc:
            raise CertificateError("local", str(exc)) from exc
        try:
            cd = ClassGroupData.from_json(d["class_data"])
        except Exception as exc:
            raise CertificateError("class_data", str(exc)) from exc
        try:
            ev = S0Evidence.from_json(d["s0_evidence"])
        except Exception as exc:
            raise CertificateError("s0_evidence", str(exc)) from exc
        return cls(d["p"], d["c"], d["ell"], local, d["not_index_divisor"], d["root"], cd, ev,
                   dict(cond), d["verification_level"])


def make_certificate(fld: PureFieldParams, cd: ClassGroupData, es: ExceptionalSet, ell: int,
                     evidence: S0Evidence) -> CounterexampleCertificate:
    rep = obstruction_report(fld.p, ell, fld.c, es.primes, witness=True)
    if not rep.obstruction_free:
        raise ValueError(f"ell={ell} has a local obstruction at {rep.obstructed_at}")
    level = "full" if evidence.in_s0 is True else "local_only"
    return CounterexampleCertificate(
        fld.p, fld.c, ell, rep, dedekind_transcript(ell, fld), pth_root_mod(fld.c, fld.p, ell).value,
        cd, evidence, {"wieferich_ok": fld.wieferich_ok, "p_divides_h": cd.h % fld.p == 0}, level,
    )


def certificate_problems(cert: CounterexampleCertificate, backend: BackendConfig | None = None,
                         cache_dir=None) -> list[str]:
    """Replay every field of ``cert``; an empty list means it verifies."""
    bad: list[str] = []
    p, c, ell = cert.p, cert.c, cert.ell
    try:
        fld = field_data(p, c)
    except ValueError as exc:
        return [f"field: {exc}"]
    if not is_prime(ell) or ell % p == 1 or ell == p or c % ell == 0:
        return ["ell outside the hunt domain"]

    # ell does not divide the index
    tr = cert.not_index_divisor
    if tr.get("ell") != ell or not check_transcript(tr, fld) or tr.get("divides_index") is not False:
        bad.append("not_index_divisor: transcript does not replay")

    if cert.root % ell != cert.root or pow(cert.root, p, ell) != c % ell:
        bad.append("root: a^p != c mod ell")

    # local solvability: same primes, same verdicts, every witness replays
    es = cached_exceptional_primes(p, cache_dir)
    fresh = obstruction_report(p, ell, c, es.primes, witness=True)
    rep = cert.local
    if rep.curve.coeffs != (1, ell, c) or rep.curve.p != p:
        bad.append("local: wrong curve")
    elif rep.checked_primes != fresh.checked_primes or rep.obstructed_at is not None:
        bad.append("local: checked primes or verdict differ from a fresh run")
    elif set(rep.witnesses) != set(rep.checked_primes):
        bad.append("local: missing witnesses")
    elif not all(rep.witnesses[q].solvable and replay_witness(rep.curve, rep.witnesses[q]) for q in rep.checked_primes):
        bad.append("local: a witness does not replay")

    cd = cert.class_data
    try:
        cd.check()
    except ValueError as exc:
        bad.append(f"class_data: {exc}")
    if cd.field.key != (p, c):
        bad.append("class_data: different field")
    if cert.conditions != {"wieferich_ok": fld.wieferich_ok, "p_divides_h": cd.h % p == 0}:
        bad.append("conditions: flags do not match recomputation")
    if not (fld.wieferich_ok and cd.h % p == 0):
        bad.append("conditions: criterion hypotheses fail")

    ev = cert.s0_evidence
    q = prime_above_deg1(ell, fld)
    if ev.ell != ell or ev.root != q.root or ev.root != cert.root:
        bad.append("s0_evidence: refers to a different prime")
    k = cd.e // p if cd.e % p == 0 else None
    if ev.exponent != k:
        bad.append("s0_evidence: exponent is not e/p")
    level_full = cert.verification_level == "full"
    if level_full != (ev.in_s0 is True):
        bad.append("verification_level: does not match the evidence")
    if ev.in_s0 is True:
        m = ev.class_order
        if not isinstance(m, int) or m <= 1 or cd.e % m or (k is not None and k % m == 0):
            bad.append("s0_evidence: class order does not show q^(e/p) non-principal")
    if bad:
        return bad

    if level_full:
        if backend is None:
            # no backend: the only independent replay is a failed refutation
            v = is_principal(ideal_pow(q, k), fld, BackendConfig("declared"), cd)
            if v.status is Status.PRINCIPAL:
                bad.append("s0_evidence: q^(e/p) has a generator")
        else:
            fresh_cd = class_data(fld, backend)
            if list(fresh_cd.invariants) != list(cd.invariants):
                bad.append("class_data: backend disagrees")
            else:
                again = in_S0(ell, fld, fresh_cd, backend)
                if again.in_s0 is not True:
                    bad.append("s0_evidence: backend does not confirm non-principality")
                elif again.class_order is not None and again.class_order != ev.class_order:
                    bad.append("s0_evidence: backend reports a different class order")
    elif backend is not None:
        fresh_cd = class_data(fld, backend)
        if list(fresh_cd.invariants) != list(cd.invariants):
            bad.append("class_data: backend disagrees")
    return bad


def verify_certificate(cert, backend: BackendConfig | None = None, cache_dir=None) -> bool:
    if isinstance(cert, dict):
        cert = CounterexampleCertificate.from_json(cert)
    return not certificate_problems(cert, backend, cache_dir)


# ------------------------------------------------------------------ hunting


@dataclass
class HuntParams:
    p: int
    c: int
    lo: int
    hi: int
    class_filter: tuple[int, int] | None = None
    backend: str = "declared"

    def to_json(self) -> dict:
        d = asdict(self)
        d["class_filter"] = list(self.class_filter) if self.class_filter else None
        return d

    @classmethod
    def from_json(cls, d: dict) -> "HuntParams":
        cf = d.get("class_filter")
        return cls(int(d["p"]), int(d["c"]), int(d["lo"]), int(d["hi"]),
                   tuple(cf) if cf else None, d.get("backend", "declared"))


@dataclass
class HuntState:
    params: HuntParams
    cursor: int  # every ell <= cursor has been processed
    confirmed: list[int] = field(default_factory=list)
    unknown: list[int] = field(default_factory=list)
    principal: list[int] = field(default_factory=list)

    @property
    def counters(self) -> dict:
        return {
            "candidates_in_S": len(self.confirmed) + len(self.unknown) + len(self.principal),
            "confirmed_S0": len(self.confirmed),
            "unknown": len(self.unknown),
        }

    @property
    def extremes(self) -> tuple[int, int] | None:
        return (min(self.confirmed), max(self.confirmed)) if self.confirmed else None

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "cursor": self.cursor,
            "counters": self.counters,
            "extremes": list(self.extremes) if self.extremes else None,
            "confirmed": self.confirmed,
            "unknown": self.unknown,
            "principal": self.principal,
        }

    @classmethod
    def from_json(cls, d: dict) -> "HuntState":
        st = cls(HuntParams.from_json(d["params"]), int(d["cursor"]),
                 [int(x) for x in d["confirmed"]], [int(x) for x in d["unknown"]],
                 [int(x) for x in d["principal"]])
        if d.get("counters") != st.counters:
            raise ValueError("checkpoint counters disagree with its record lists")
        return st


@dataclass
class HuntRecord:
    ell: int
    kind: str  # confirmed | unknown | principal
    certificate: CounterexampleCertificate


def _candidates(params: HuntParams, lo: int, hi: int) -> Iterator[int]:
    if params.class_filter:
        a, M = params.class_filter
        yield from primes_in_progression(a, M, lo, hi)
    else:
        for ell in primes_up_to(hi):
            if ell >= lo:
                yield ell


def in_S(ell: int, fld: PureFieldParams, es: ExceptionalSet) -> bool:
    p, c = fld.p, fld.c
    if ell % p == 1 or ell == p or c % ell == 0 or index_divisor(ell, fld):
        return False
    return obstruction_report(p, ell, c, es.primes, witness=False).obstruction_free


def _interval_worker(args) -> list[HuntRecord]:
    params, backend, cache_dir, lo, hi, dcert_json = args
    fld = field_data(params.p, params.c)
    es = cached_exceptional_primes(params.p, cache_dir)
    cd = class_data(fld, backend)
    dcert = DensityCertificate.from_json(dcert_json) if dcert_json else None
    out = []
    for ell in _candidates(params, lo, hi):
        member = in_S(ell, fld, es)
        if dcert is not None and ell % fld.p != 1 and ell != fld.p and fld.c % ell:
            # two routes to local solvability must agree
            if member != dcert.admits(ell):
                raise AssertionError(f"local solver and density classes disagree at ell={ell}")
        if not member:
            continue
        ev = in_S0(ell, fld, cd, backend)
        kind = {True: "confirmed", False: "principal", None: "unknown"}[ev.in_s0]
        cert = make_certificate(fld, cd, es, ell, ev)
        assert ell % fld.p != 1 and cert.local.obstruction_free
        out.append(HuntRecord(ell, kind, cert))
    return out


class Hunt:
    """A resumable hunt.  ``run`` yields records in ascending ell."""

    def __init__(self, p: int, c: int, lo: int, hi: int, class_filter=None,
                 backend: BackendConfig | None = None, *, force: bool = False, jobs: int = 1,
                 interval: int = 20000, cache_dir=None, state: HuntState | None = None):
        self.backend = backend or BackendConfig()
        self.params = HuntParams(p, c, lo, hi, tuple(class_filter) if class_filter else None, self.backend.kind)
        if state is not None and state.params != self.params:
            raise ValueError("checkpoint belongs to a different hunt")
        self.state = state or HuntState(self.params, lo - 1)
        self.jobs = max(1, jobs)
        self.interval = max(1, interval)
        self.cache_dir = cache_dir
        self.fld = field_data(p, c)
        rep = analyze(p, c, self.backend, cache_dir)
        self.dcert = rep.density
        if not rep.verdict and not force:
            raise ValueError(f"analysis is not positive ({rep.verdict_text}); use force to hunt anyway")
        if rep.class_data.h % p:
            raise ValueError("S0 is undefined when p does not divide h")

    def _intervals(self):
        lo = self.state.cursor + 1
        while lo <= self.params.hi:
            hi = min(self.params.hi, lo + self.interval - 1)
            yield lo, hi
            lo = hi + 1

    def run(self, on_interval=None) -> Iterator[HuntRecord]:
        dj = self.dcert.to_json() if self.dcert else None
        jobs = [(self.params, self.backend, self.cache_dir, lo, hi, dj) for lo, hi in self._intervals()]
        if self.jobs == 1:
            results = map(_interval_worker, jobs)
            pool = None
        else:
            pool = ProcessPoolExecutor(self.jobs)
            results = pool.map(_interval_worker, jobs)
        try:
            for job, recs in zip(jobs, results):
                for r in recs:
                    getattr(self.state, r.kind).append(r.ell)
                    yield r
                self.state.cursor = job[4]
                if on_interval is not None:
                    on_interval(self.state)
        finally:
            if pool is not None:
                pool.shutdown(cancel_futures=True)


def _truncate_lines(path: Path, n: int) -> None:
    if not path.exists():
        return
    lines = path.read_text().splitlines(keepends=True)
    if len(lines) != n:
        path.write_text("".join(lines[:n]))


def candidates_path(out: Path) -> Path:
    return out.with_name(out.stem + ".candidates" + out.suffix)


def run_hunt(p: int, c: int, lo: int, hi: int, class_filter=None, backend: BackendConfig | None = None, *,
             out: Path | None = None, checkpoint: Path | None = None, force: bool = False,
             jobs: int = 1, interval: int = 20000, cache_dir=None) -> HuntState:
    """Hunt with file output: confirmed certificates to ``out``, Unknown ones to its candidates file.

    With a checkpoint file the hunt resumes where it stopped; output files are
    cut back to the checkpointed record counts first.
    """
    state = None
    if checkpoint is not None and Path(checkpoint).exists():
        state = HuntState.from_json(json.loads(Path(checkpoint).read_text()))
    h = Hunt(p, c, lo, hi, class_filter, backend, force=force, jobs=jobs, interval=interval,
             cache_dir=cache_dir, state=state)
    cand = None
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        cand = candidates_path(out)
        if state is None:
            for f in (out, cand):
                if f.exists():
                    f.unlink()
        else:
            _truncate_lines(out, len(state.confirmed))
            _truncate_lines(cand, len(state.unknown))

    files = {}

    def flush(st: HuntState):
        for fh in files.values():
            fh.flush()
            os.fsync(fh.fileno())
        if checkpoint is not None:
            _atomic_write_json(Path(checkpoint), st.to_json())

    try:
        if out is not None:
            files["confirmed"] = open(out, "a")
            files["unknown"] = open(cand, "a")
        for rec in h.run(on_interval=flush):
            fh = files.get(rec.kind)
            if fh is not None:
                fh.write(json.dumps(rec.certificate.to_json(), sort_keys=True) + "\n")
    except BackendFailure:
        log.error("backend failure; resume from checkpoint %s", checkpoint)
        raise
    finally:
        for fh in files.values():
            fh.close()
    return h.state


def load_certificates(path) -> Iterator[tuple[int, dict | None, str | None]]:
    """(line number, parsed object or None, parse error or None) for each non-empty line."""
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield i, json.loads(line), None
            except json.JSONDecodeError as exc:
                yield i, None, f"invalid JSON: {exc}"
