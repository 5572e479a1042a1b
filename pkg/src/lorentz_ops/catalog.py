"""Built-in catalog of worked instances with pinned outcomes.

Each entry bundles a complete instance config (as TOML text), a short
description, and the expected analysis results.  ``replicate`` re-runs
the analysis and reports every deviation: a stored expectation that no
longer holds, a certificate that fails to replay, or a cross-check row
where a criterion and the oracle disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from time import perf_counter

import tomli

from .config import InstanceConfig, parse_config
from .criteria import range_exclusion_witness
from .rational import as_fraction
from .report import AnalysisReport, analyze, set_display
from .sets import IntervalUnion


class CatalogError(KeyError):
    pass


@dataclass(frozen=True)
class Expectation:
    """One pinned fact about an entry's analysis.

    Exactly one of three shapes: a criterion row (checks outcome,
    verdict, certificate, witnesses...), an oracle row (``oracle_key``
    set), or a replay row (``replay`` set).
    """

    criterion: str = ""
    outcome: str | None = None
    verdict_kind: str | None = None
    verdict_value: int | None = None
    refused_flag: str | None = None
    certificate: str | None = None
    certificate_k: int | None = None
    witness: str | None = None
    witnesses: tuple = ()
    pairs: tuple = ()
    note_contains: str | None = None
    oracle_key: str | None = None
    oracle_kind: str | None = None
    oracle_value: int | None = None
    oracle_min: int | None = None
    replay: str | None = None
    target: tuple = ()
    power: int | None = None

    @staticmethod
    def from_table(row: dict) -> "Expectation":
        return Expectation(
            criterion=row.get("criterion", ""),
            outcome=row.get("outcome"),
            verdict_kind=row.get("verdict_kind"),
            verdict_value=row.get("verdict_value"),
            refused_flag=row.get("refused_flag"),
            certificate=row.get("certificate"),
            certificate_k=row.get("certificate_k"),
            witness=row.get("witness"),
            witnesses=tuple(tuple(w) for w in row.get("witnesses", ())),
            pairs=tuple(tuple(p) for p in row.get("pairs", ())),
            note_contains=row.get("note_contains"),
            oracle_key=row.get("oracle_key"),
            oracle_kind=row.get("oracle_kind"),
            oracle_value=row.get("oracle_value"),
            oracle_min=row.get("oracle_min"),
            replay=row.get("replay"),
            target=tuple(tuple(t) for t in row.get("target", ())),
            power=row.get("power"),
        )


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    summary: str
    config_text: str
    expected: tuple  # Expectation, ...

    @property
    def config(self) -> InstanceConfig:
        return parse_config(self.config_text)


def _load_entry(text: str) -> CatalogEntry:
    doc = tomli.loads(text)
    return CatalogEntry(
        id=doc["id"],
        title=doc["title"],
        summary=doc["summary"],
        config_text=doc["config"],
        expected=tuple(Expectation.from_table(r) for r in doc.get("expected", ())),
    )


_CACHE: dict = {}


def entries() -> tuple:
    if "all" not in _CACHE:
        folder = resources.files(__package__).joinpath("catalog")
        loaded = []
        for item in sorted(folder.iterdir(), key=lambda p: p.name):
            if item.name.endswith(".toml"):
                loaded.append(_load_entry(item.read_text()))
        _CACHE["all"] = tuple(sorted(loaded, key=lambda e: e.id))
    return _CACHE["all"]


def entry_ids() -> tuple:
    return tuple(e.id for e in entries())


def entry(entry_id: str) -> CatalogEntry:
    for e in entries():
        if e.id == entry_id:
            return e
    raise CatalogError(f"no catalog entry {entry_id!r}; known: {', '.join(entry_ids())}")


@dataclass(frozen=True)
class ReplicationResult:
    entry_id: str
    report: AnalysisReport
    mismatches: tuple
    elapsed_ms: float

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _all_reports(reps):
    for rep in reps:
        yield rep
        yield from _all_reports(rep.subreports)


def _certificate_kind(cert) -> str | None:
    if cert is None:
        return None
    return type(cert).__name__.removesuffix("Certificate")


def _check_expectation(cfg, report, exp) -> list:
    out: list = []
    if exp.replay == "range_exclusion":
        spec = cfg.spec()
        target = IntervalUnion.make(
            [(as_fraction(lo), as_fraction(hi)) for lo, hi in exp.target]
        )
        cert = range_exclusion_witness(spec, target, exp.power)
        if cert is None:
            out.append(
                f"no range-exclusion witness for {target} at power {exp.power}"
            )
        elif not cert.replay():
            out.append(f"range-exclusion witness for {target} does not replay")
        return out
    if exp.oracle_key is not None:
        v = report.oracle.get(exp.oracle_key)
        if v is None:
            return [f"oracle {exp.oracle_key}: missing"]
        if exp.oracle_kind is not None and v.kind != exp.oracle_kind:
            out.append(f"oracle {exp.oracle_key}: kind {v.kind!r}, expected {exp.oracle_kind!r}")
        if exp.oracle_value is not None and v.value != exp.oracle_value:
            out.append(f"oracle {exp.oracle_key}: value {v.value!r}, expected {exp.oracle_value}")
        if exp.oracle_min is not None and (v.value is None or v.value < exp.oracle_min):
            out.append(f"oracle {exp.oracle_key}: value {v.value!r} below {exp.oracle_min}")
        return out

    rep = None
    for cand in _all_reports(report.criteria):
        if cand.name == exp.criterion:
            rep = cand
            break
    if rep is None:
        return [f"{exp.criterion}: criterion did not run"]
    name = exp.criterion
    if exp.outcome is not None and rep.outcome != exp.outcome:
        out.append(f"{name}: outcome {rep.outcome!r}, expected {exp.outcome!r}")
    if exp.verdict_kind is not None and (
        rep.verdict is None or rep.verdict.kind != exp.verdict_kind
    ):
        got = rep.verdict.kind if rep.verdict else None
        out.append(f"{name}: verdict kind {got!r}, expected {exp.verdict_kind!r}")
    if exp.verdict_value is not None and (
        rep.verdict is None or rep.verdict.value != exp.verdict_value
    ):
        got = rep.verdict.value if rep.verdict else None
        out.append(f"{name}: verdict value {got!r}, expected {exp.verdict_value}")
    if exp.refused_flag is not None and rep.refused_flag != exp.refused_flag:
        out.append(
            f"{name}: refused flag {rep.refused_flag!r}, expected {exp.refused_flag!r}"
        )
    cert = rep.certificate
    if exp.certificate is not None and _certificate_kind(cert) != exp.certificate:
        out.append(
            f"{name}: certificate {_certificate_kind(cert)!r}, expected {exp.certificate!r}"
        )
    if exp.certificate_k is not None and (
        cert is None or getattr(cert, "k", None) != exp.certificate_k
    ):
        got = getattr(cert, "k", None) if cert else None
        out.append(f"{name}: certificate k {got!r}, expected {exp.certificate_k}")
    if exp.witness is not None:
        got = None
        if cert is not None and getattr(cert, "witness", None) is not None:
            got = set_display(cert.witness)
        if got != exp.witness:
            out.append(f"{name}: witness {got!r}, expected {exp.witness!r}")
    if exp.witnesses:
        have = (
            tuple((k, set_display(A)) for k, A in cert.witnesses)
            if cert is not None and hasattr(cert, "witnesses")
            else ()
        )
        for k, display in exp.witnesses:
            if (int(k), display) not in have:
                out.append(f"{name}: missing stage-{k} witness {display}")
    if exp.pairs:
        have = (
            tuple(
                (k, set_display(A1), set_display(A2))
                for k, A1, A2, *_rest in cert.entries
            )
            if cert is not None and hasattr(cert, "entries")
            else ()
        )
        for k, d1, d2 in exp.pairs:
            if (int(k), d1, d2) not in have:
                out.append(f"{name}: missing stage-{k} pair {d1}, {d2}")
    if exp.note_contains is not None:
        notes = list(rep.notes)
        for sub in _all_reports(rep.subreports):
            notes.extend(sub.notes)
        if not any(exp.note_contains in n for n in notes):
            out.append(f"{name}: no note contains {exp.note_contains!r}")
    return out


def replicate(entry_or_id) -> ReplicationResult:
    ent = entry(entry_or_id) if isinstance(entry_or_id, str) else entry_or_id
    t0 = perf_counter()
    cfg = ent.config
    report = analyze(cfg)
    problems: list = []
    for row in report.disagreements:
        problems.append(f"cross-check disagreement: {row}")
    for rep in _all_reports(report.criteria):
        for cert in (rep.certificate, *rep.extra_certificates):
            if cert is not None and not cert.replay():
                problems.append(f"{rep.name}: certificate does not replay")
    for exp in ent.expected:
        problems.extend(_check_expectation(cfg, report, exp))
    elapsed = (perf_counter() - t0) * 1000.0
    return ReplicationResult(ent.id, report, tuple(problems), elapsed)
