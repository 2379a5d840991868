"""Transport-independent request handlers: the FastAPI routes and the CLI
both call these, so every surface shares one code path."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import convert as convert_mod
from .. import verify as verify_mod
from ..dependence import dependence_report, survival_of_exchangeable
from ..errors import ValidationError
from ..exchangeable import (
    ExchangeableSeq,
    SeqRole,
    seq_from_json_dict,
    survival_exch_narrow,
    survival_exch_wide,
    to_general,
)
from ..extendibility import (
    classify_family,
    extend_one_narrow,
    extend_one_wide,
    laplace_moments,
    law_from_json_dict,
)
from ..sampling import (
    SampleBatch,
    mixing_from_json_dict,
    sample_bernoulli_sieve,
    sample_definetti,
    sample_narrow,
    sample_wide,
)
from ..sequences import classify_sequence
from ..shock import (
    NarrowParams,
    WideParams,
    params_from_json_dict,
    pmf,
    survival_narrow,
    survival_wide,
)
from . import schemas as sch


def handle_classify_seq(req: sch.ClassifySeqRequest) -> sch.SequenceReportModel:
    report = classify_sequence(req.values, tol=req.tolerance)
    return sch.SequenceReportModel(**report.to_dict())


def _seq(doc: sch.SequenceDoc) -> ExchangeableSeq:
    return seq_from_json_dict(doc.model_dump(exclude_none=True))


def handle_classify(req: sch.ClassifyRequest) -> sch.ClassifyResponse:
    seq = _seq(req.sequence)
    if seq.role not in (SeqRole.B_SEQ, SeqRole.BETA_SEQ):
        seq = convert_mod.convert_sequence(seq, SeqRole.BETA_SEQ)
    fam = classify_family(seq)
    return sch.ClassifyResponse(
        family=fam.family,
        degenerate=fam.degenerate,
        report=sch.SequenceReportModel(**fam.report.to_dict()),
    )


def _survival_callable(req) -> tuple[Callable, int]:
    if (req.params is None) == (req.sequence is None):
        raise ValidationError("invalid-document", "provide exactly one of 'params' or 'sequence'")
    if req.params is not None:
        params = params_from_json_dict(req.params.model_dump(), fill=req.fill)
        if isinstance(params, NarrowParams):
            return (lambda n: survival_narrow(params, n)), params.d
        return (lambda n: survival_wide(params, n)), params.d
    seq = _seq(req.sequence)
    if seq.role is SeqRole.P_NARROW:
        seq = convert_mod.convert_sequence(seq, SeqRole.B_SEQ)
    elif seq.role in (SeqRole.PTILDE_WIDE, SeqRole.A_SEQ):
        target = SeqRole.BETA_SEQ if seq.role is SeqRole.PTILDE_WIDE else SeqRole.B_SEQ
        seq = convert_mod.convert_sequence(seq, target)
    return survival_of_exchangeable(seq), seq.d


def handle_survival(req: sch.SurvivalRequest) -> sch.SurvivalResponse:
    surv, d = _survival_callable(req)
    if len(req.at) != d:
        raise ValidationError("shape-mismatch", f"point has {len(req.at)} entries, model dimension is {d}")
    return sch.SurvivalResponse(survival=float(surv(np.asarray(req.at, dtype=np.int64))))


def handle_pmf(req: sch.PmfRequest) -> sch.PmfResponse:
    surv, d = _survival_callable(req)
    if len(req.at) != d:
        raise ValidationError("shape-mismatch", f"point has {len(req.at)} entries, model dimension is {d}")
    return sch.PmfResponse(**pmf(surv, req.at).to_dict())


def handle_sample(req: sch.SampleRequest) -> SampleBatch:
    spec = dict(req.spec)
    if req.model in ("narrow", "wide"):
        if "role" in spec:
            params = to_general(seq_from_json_dict(spec))
        else:
            params = params_from_json_dict(spec, fill=bool(spec.get("fill", False)))
        if req.model == "narrow":
            if not isinstance(params, NarrowParams):
                raise ValidationError("invalid-document", "narrow sampling needs narrow parameters")
            return sample_narrow(params, req.n, req.seed, req.workers)
        if not isinstance(params, WideParams):
            raise ValidationError("invalid-document", "wide sampling needs wide parameters")
        return sample_wide(params, req.n, req.seed, req.workers)
    try:
        d = int(spec["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("invalid-document", "definetti/sieve sampling needs a 'd' field") from exc
    if req.model == "definetti":
        law = law_from_json_dict(spec.get("law", spec))
        return sample_definetti(law, d, req.n, req.seed, req.workers)
    mixing = mixing_from_json_dict(spec.get("mixing_doc", spec))
    return sample_bernoulli_sieve(mixing, d, req.n, req.seed, req.workers)


def handle_dependence(req: sch.DependenceRequest) -> sch.DependenceResponse:
    if (req.params is None) == (req.sequence is None):
        raise ValidationError("invalid-document", "provide exactly one of 'params' or 'sequence'")
    if req.params is not None:
        params = params_from_json_dict(req.params.model_dump(), fill=req.fill)
    else:
        seq = _seq(req.sequence)
        role = SeqRole.P_NARROW if seq.role in (SeqRole.P_NARROW, SeqRole.A_SEQ, SeqRole.B_SEQ) else SeqRole.PTILDE_WIDE
        params = to_general(convert_mod.convert_sequence(seq, role))
    return sch.DependenceResponse(**dependence_report(params, grid_max=req.grid_max).to_dict())


def handle_moments(req: sch.MomentsRequest) -> sch.MomentsResponse:
    law = law_from_json_dict(req.law)
    seq = laplace_moments(law, req.d)
    return sch.MomentsResponse(
        sequence=sch.SequenceDoc(**seq.to_json_dict()),
        infinitely_divisible=law.infinitely_divisible,
        law=law.to_json_dict(),
    )


def handle_extend(req: sch.ExtendRequest) -> sch.ExtendResponse:
    seq = _seq(req.sequence)
    if seq.role in (SeqRole.P_NARROW, SeqRole.A_SEQ, SeqRole.B_SEQ):
        row = convert_mod.convert_sequence(seq, SeqRole.P_NARROW)
        interval, route = extend_one_narrow(row), "narrow"
    else:
        row = convert_mod.convert_sequence(seq, SeqRole.PTILDE_WIDE)
        interval, route = extend_one_wide(row), "wide"
    return sch.ExtendResponse(route=route, **interval.to_dict())


def handle_convert(req: sch.ConvertRequest) -> sch.ConvertResponse:
    return sch.ConvertResponse(document=convert_mod.convert_document(req.document, req.to, fill=req.fill))


def handle_verify(req: sch.VerifyRequest) -> sch.VerifyResponse:
    return sch.VerifyResponse(**verify_mod.run_suite(req.suite))
