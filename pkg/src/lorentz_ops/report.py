"""Full analysis of one operator instance, with oracle cross-checks.

``analyze`` runs the boundedness test, the hypothesis checks and every
criterion that applies to the requested questions, then compares each
criterion's verdict against an independent oracle: exact rank chains of
the operator matrix on finite spaces, indicator-witness kernel probes
elsewhere.  The result renders as human-readable text or as JSON with a
stable schema (rationals as ``"a/b"`` strings, real numbers as decimal
strings next to a ``tolerance`` field).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from time import perf_counter

from .chains import OrderVerdict, finite_ascent_descent, horizon_chain
from .config import InstanceConfig
from .criteria import (
    CriterionReport,
    GeometricInclusionCertificate,
    HypothesisReport,
    InfiniteAscentWitnessesCertificate,
    InjectiveAEBoundCertificate,
    KernelIdentificationCertificate,
    MeasureEquivalenceCertificate,
    MultAscentCertificate,
    MultDescentZeroCertificate,
    PairedDescentWitnessesCertificate,
    RangeExclusionCertificate,
    SeparableDescentWitnessesCertificate,
    ascent_geometric,
    ascent_via_measures,
    descent_injectivity_bound,
    hat_operator_analysis,
    hypothesis_report,
    infinite_ascent_witnesses,
    infinite_descent_paired,
    infinite_descent_separable,
    kernel_identification,
    mult_ascent,
    mult_descent,
)
from .lorentz import NormResult, norm, quasi_norm
from .operators import BoundednessReport, boundedness_report
from .rational import QQi, is_inf
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import FiniteAtomicSpace

#: criteria whose verdict speaks about ascent / about descent
ASCENT_CRITERIA = frozenset(
    {
        "mult_ascent",
        "ascent_via_measures",
        "ascent_geometric",
        "infinite_ascent_witnesses",
        "hat_operator_analysis",
    }
)
DESCENT_CRITERIA = frozenset(
    {
        "mult_descent",
        "descent_injectivity_bound",
        "infinite_descent_separable",
        "infinite_descent_paired",
    }
)


@dataclass(frozen=True)
class CrossCheckRow:
    criterion: str
    claim: OrderVerdict | None
    oracle_name: str
    oracle: OrderVerdict | None
    status: str  # "agree" | "disagree" | "not-applicable"

    def __str__(self):
        claim = str(self.claim) if self.claim is not None else "-"
        oracle = str(self.oracle) if self.oracle is not None else "-"
        return f"{self.criterion}: {claim}  vs  {self.oracle_name}: {oracle}  -> {self.status}"


def verdicts_compatible(claim, oracle) -> bool | None:
    """Whether two order verdicts can describe the same quantity.

    ``None`` means the comparison is vacuous (either side missing,
    refused, or too weak to conflict).
    """
    if claim is None or oracle is None:
        return None
    if claim.kind in ("refused", "unknown") or oracle.kind in ("refused", "unknown"):
        return None
    if oracle.kind == "exact":
        if claim.kind in ("infinite", "symbolic_infinite"):
            return False
        return claim.agrees_with_exact(oracle.value)
    if oracle.kind == "at_least":
        if claim.kind == "exact":
            return claim.value >= oracle.value
        if claim.kind == "at_most":
            return oracle.value <= claim.value
        # lower bound vs lower bound / infinity: no conflict possible
        return True
    if oracle.kind == "at_most":
        if claim.kind == "exact":
            return claim.value <= oracle.value
        if claim.kind == "at_least":
            return claim.value <= oracle.value
        if claim.kind in ("infinite", "symbolic_infinite"):
            return False
        return True
    return None


@dataclass(frozen=True)
class AnalysisReport:
    config: InstanceConfig
    boundedness: BoundednessReport
    hypotheses: HypothesisReport
    criteria: tuple  # CriterionReport, in execution order
    oracle: dict  # {"ascent": v, "descent": v} or {"kernel_growth": v} or {}
    cross_checks: tuple  # CrossCheckRow
    norms: dict | None  # {"quasi_norm": NormResult, "norm": NormResult}
    tolerance: float
    timings_ms: tuple  # ((step, milliseconds), ...)

    @property
    def disagreements(self):
        return tuple(r for r in self.cross_checks if r.status == "disagree")

    def criterion(self, name: str) -> CriterionReport | None:
        for rep in self.criteria:
            if rep.name == name:
                return rep
        return None


def analyze(
    config: InstanceConfig,
    horizon: int | None = None,
    tolerance: float | None = None,
) -> AnalysisReport:
    """Run everything the config asks for and cross-check the answers."""
    spec = config.spec()
    K = horizon if horizon is not None else config.horizon
    tol = tolerance if tolerance is not None else (config.tolerance or 1e-12)
    timings: list = []

    def run(step, fn, *args, **kw):
        t0 = perf_counter()
        out = fn(*args, **kw)
        timings.append((step, (perf_counter() - t0) * 1000.0))
        return out

    bounded = run("boundedness", boundedness_report, spec)
    flags = run("hypotheses", hypothesis_report, spec)

    reports: list = []
    wants_orders = "ascent" in config.requests or "descent" in config.requests
    if "ascent" in config.requests:
        if config.kind == "mu":
            reports.append(run("mult_ascent", mult_ascent, spec))
        elif config.kind == "wut_hat":
            reports.append(
                run("hat_operator_analysis", hat_operator_analysis, spec, K)
            )
            reports.append(
                run("infinite_ascent_witnesses", infinite_ascent_witnesses, spec, K)
            )
        else:
            reports.append(
                run("kernel_identification", kernel_identification, spec, 1, K)
            )
            reports.append(run("ascent_via_measures", ascent_via_measures, spec, K))
            reports.append(run("ascent_geometric", ascent_geometric, spec, K))
            reports.append(
                run("infinite_ascent_witnesses", infinite_ascent_witnesses, spec, K)
            )
    if "descent" in config.requests:
        if config.kind == "mu":
            reports.append(run("mult_descent", mult_descent, spec))
        else:
            reports.append(
                run("descent_injectivity_bound", descent_injectivity_bound, spec, K)
            )
            reports.append(
                run("infinite_descent_separable", infinite_descent_separable, spec, K)
            )
            reports.append(
                run("infinite_descent_paired", infinite_descent_paired, spec, K)
            )

    oracle: dict = {}
    if wants_orders and isinstance(spec.space, FiniteAtomicSpace):
        asc, desc = run("rank_chain_oracle", finite_ascent_descent, spec)
        oracle = {"ascent": asc, "descent": desc}
    elif "ascent" in config.requests and spec.T is not None:
        chain = run("kernel_growth_probe", horizon_chain, spec, K)
        oracle = {"kernel_growth": chain.verdict}

    norms = None
    if "norms" in config.requests and config.norm_function is not None:
        f = config.norm_function
        qn = run("quasi_norm", quasi_norm, f, config.index)
        nn = run("norm", norm, f, config.index, rel_tol=tol)
        norms = {"quasi_norm": qn, "norm": nn}

    rows: list = []
    for rep in reports:
        if rep.name in ASCENT_CRITERIA:
            if "ascent" in oracle:
                oname, ov = "rank_chain", oracle["ascent"]
            elif "kernel_growth" in oracle:
                oname, ov = "kernel_growth", oracle["kernel_growth"]
            else:
                oname, ov = "none", None
        elif rep.name in DESCENT_CRITERIA:
            oname, ov = ("rank_chain", oracle["descent"]) if "descent" in oracle else ("none", None)
        else:
            continue  # kernel identification carries no order claim
        comp = verdicts_compatible(rep.verdict, ov)
        status = "not-applicable" if comp is None else ("agree" if comp else "disagree")
        rows.append(CrossCheckRow(rep.name, rep.verdict, oname, ov, status))

    return AnalysisReport(
        config=config,
        boundedness=bounded,
        hypotheses=flags,
        criteria=tuple(reports),
        oracle=oracle,
        cross_checks=tuple(rows),
        norms=norms,
        tolerance=tol,
        timings_ms=tuple(timings),
    )


# --------------------------------------------------------------------------
# JSON rendering


def _scalar_json(v):
    """Rationals as "a/b", infinities as "inf", everything else via str."""
    if v is None:
        return None
    if is_inf(v):
        return "inf"
    if isinstance(v, QQi):
        if v.im == 0:
            return str(v.re)
        return str(v)
    if isinstance(v, (Fraction, int)):
        return str(v)
    return str(v)


def _endpoint_json(v, side):
    if v is None:
        return "-inf" if side == "lo" else "inf"
    return _scalar_json(v)


def set_json(S):
    if S is None:
        return None
    if isinstance(S, AtomSet):
        names = sorted(str(a) for a in S.atoms)
        return {"engine": "atoms", "atoms": names, "display": set_display(S)}
    if isinstance(S, StructuredSet):
        return {
            "engine": "integers",
            "finite": sorted(S.finite),
            "threshold": S.threshold,
            "modulus": S.modulus,
            "residues": sorted(S.residues),
            "display": str(S),
        }
    if isinstance(S, IntervalUnion):
        return {
            "engine": "intervals",
            "pieces": [
                [_endpoint_json(lo, "lo"), _endpoint_json(hi, "hi")]
                for lo, hi in S.pieces
            ],
            "display": str(S),
        }
    raise TypeError(f"not a set: {S!r}")


def set_display(S) -> str:
    if isinstance(S, AtomSet):
        return "{" + ",".join(sorted(str(a) for a in S.atoms)) + "}"
    return str(S)


def verdict_json(v: OrderVerdict | None):
    if v is None:
        return None
    return {"kind": v.kind, "value": v.value, "note": v.note}


def certificate_json(cert):
    """Fixed field set per certificate kind."""
    if cert is None:
        return None
    kind = type(cert).__name__.removesuffix("Certificate")
    if isinstance(cert, MultAscentCertificate):
        body = {
            "zero_set": set_json(cert.zero_set),
            "zero_mass": _scalar_json(cert.zero_mass),
            "value": cert.value,
        }
    elif isinstance(cert, MultDescentZeroCertificate):
        body = {"inf_squared": _scalar_json(cert.inf_squared)}
    elif isinstance(cert, MeasureEquivalenceCertificate):
        body = {"k": cert.k, "zero_sets": [set_json(X) for X in cert.zero_sets]}
    elif isinstance(cert, GeometricInclusionCertificate):
        body = {
            "k": cert.k,
            "steps": [
                {"complement": set_json(Xc), "image": set_json(img)}
                for Xc, img in cert.steps
            ],
        }
    elif isinstance(cert, InfiniteAscentWitnessesCertificate):
        body = {
            "witnesses": [
                {"k": k, "set": set_json(A)} for k, A in cert.witnesses
            ]
        }
    elif isinstance(cert, InjectiveAEBoundCertificate):
        body = {
            "k": cert.k,
            "stages": [
                {"image": set_json(R), "noninjective_locus": set_json(F)}
                for R, F in cert.stages
            ],
        }
    elif isinstance(cert, RangeExclusionCertificate):
        body = {
            "k": cert.k,
            "target": set_json(cert.target),
            "mode": cert.mode,
            "obstruction": set_json(cert.obstruction),
        }
    elif isinstance(cert, SeparableDescentWitnessesCertificate):
        body = {
            "entries": [
                {
                    "k": k,
                    "image": _scalar_json(image),
                    "class": set_json(cls),
                    "B1": set_json(B1),
                    "B2": set_json(B2),
                }
                for k, image, cls, B1, B2 in cert.entries
            ],
            "periodicity": list(cert.periodicity) if cert.periodicity else None,
        }
    elif isinstance(cert, PairedDescentWitnessesCertificate):
        body = {
            "entries": [
                {
                    "k": k,
                    "A1": set_json(A1),
                    "A2": set_json(A2),
                    "image": set_json(image),
                }
                for k, A1, A2, image, _E1, _E2 in cert.entries
            ],
            "periodicity": list(cert.periodicity) if cert.periodicity else None,
        }
    elif isinstance(cert, KernelIdentificationCertificate):
        body = {
            "k": cert.k,
            "vanishing_set": set_json(cert.vanishing_set),
            "relation": cert.relation,
            "witness": set_json(cert.witness),
        }
    else:
        raise TypeError(f"unknown certificate: {cert!r}")
    return {"kind": kind, **body}


def criterion_json(rep: CriterionReport):
    return {
        "name": rep.name,
        "outcome": rep.outcome,
        "verdict": verdict_json(rep.verdict),
        "refused_flag": rep.refused_flag,
        "notes": list(rep.notes),
        "certificate": certificate_json(rep.certificate),
        "extra_certificates": [certificate_json(c) for c in rep.extra_certificates],
        "subreports": [criterion_json(s) for s in rep.subreports],
    }


def norm_json(result: NormResult, tolerance: float):
    return {
        "value": "inf" if result.diverges else repr(result.value),
        "exact_power": None if result.power is None else _scalar_json(result.power),
        "diverges": result.diverges,
        "tolerance": repr(tolerance),
    }


def report_json(report: AnalysisReport) -> dict:
    cfg = report.config
    p = "inf" if is_inf(cfg.index.p) else str(cfg.index.p)
    q = "inf" if is_inf(cfg.index.q) else str(cfg.index.q)
    out = {
        "instance": {
            "operator": cfg.kind,
            "engine": _engine_label(cfg),
            "p": p,
            "q": q,
            "requests": list(cfg.requests),
            "horizon": cfg.horizon,
        },
        "boundedness": {
            "verdict": report.boundedness.verdict,
            "u_essentially_bounded": report.boundedness.u_essentially_bounded,
            "density_essentially_bounded": report.boundedness.density_essentially_bounded,
            "reason": report.boundedness.reason,
        },
        "hypotheses": report.hypotheses.as_dict(),
        "criteria": [criterion_json(rep) for rep in report.criteria],
        "oracle": {key: verdict_json(v) for key, v in report.oracle.items()},
        "cross_checks": [
            {
                "criterion": row.criterion,
                "claim": verdict_json(row.claim),
                "oracle": row.oracle_name,
                "oracle_verdict": verdict_json(row.oracle),
                "status": row.status,
            }
            for row in report.cross_checks
        ],
        "timings_ms": {step: round(ms, 3) for step, ms in report.timings_ms},
    }
    if report.norms is not None:
        out["norms"] = {
            key: norm_json(value, report.tolerance)
            for key, value in report.norms.items()
        }
    return out


def render_json(report: AnalysisReport) -> str:
    return json.dumps(report_json(report), indent=2)


# --------------------------------------------------------------------------
# text rendering


def _engine_label(cfg: InstanceConfig) -> str:
    name = type(cfg.space).__name__
    return {
        "FiniteAtomicSpace": "finite",
        "CountableAtomicSpace": "countable",
        "IntervalSpace": "interval",
    }.get(name, name)


_FLAG_WORD = {True: "yes", False: "no", None: "undecided"}


def _criterion_lines(rep: CriterionReport, indent: str = "  ") -> list:
    head = f"{indent}{rep.name}: {rep.outcome}"
    if rep.verdict is not None:
        head += f"  [{rep.verdict}]"
    if rep.refused_flag:
        head += f"  (hypothesis {rep.refused_flag} fails)"
    lines = [head]
    for note in rep.notes:
        lines.append(f"{indent}    - {note}")
    if rep.certificate is not None:
        kind = type(rep.certificate).__name__.removesuffix("Certificate")
        lines.append(f"{indent}    certificate: {kind}")
    for extra in rep.extra_certificates:
        kind = type(extra).__name__.removesuffix("Certificate")
        lines.append(f"{indent}    certificate: {kind}")
    for sub in rep.subreports:
        lines.extend(_criterion_lines(sub, indent + "  "))
    return lines


def render_text(report: AnalysisReport) -> str:
    cfg = report.config
    p = "inf" if is_inf(cfg.index.p) else str(cfg.index.p)
    q = "inf" if is_inf(cfg.index.q) else str(cfg.index.q)
    lines = [
        f"operator {cfg.kind} on {_engine_label(cfg)} space, L({p},{q})",
        f"boundedness: {report.boundedness}",
        "hypotheses:",
    ]
    for flag, value in report.hypotheses.as_dict().items():
        lines.append(f"  {flag}: {_FLAG_WORD[value]}")
    if report.criteria:
        lines.append("criteria:")
        for rep in report.criteria:
            lines.extend(_criterion_lines(rep))
    if report.oracle:
        lines.append("oracle:")
        for key, v in report.oracle.items():
            lines.append(f"  {key}: {v}")
    if report.cross_checks:
        lines.append("cross-checks:")
        for row in report.cross_checks:
            lines.append(f"  {row}")
    if report.norms is not None:
        lines.append("norms:")
        for key, value in report.norms.items():
            shown = "inf" if value.diverges else repr(value.value)
            lines.append(f"  {key}: {shown}  (tolerance {report.tolerance!r})")
    total = sum(ms for _, ms in report.timings_ms)
    lines.append(f"elapsed: {total:.1f} ms")
    return "\n".join(lines)
