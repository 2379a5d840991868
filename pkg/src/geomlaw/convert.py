"""Conversions between parameter documents: the five exchangeable roles
(p, a, b, ptilde, beta) and the two general families (narrow, wide).

Within the narrow family (p, a, b) and within the wide family (ptilde,
beta) conversions are exact bijections. Narrow-to-wide is always possible
(a narrow model is a wide model with beta = b). Wide-to-narrow is exact in
dimension 2 and refused for d >= 3, where no general inversion exists;
in d = 2 it requires nonnegative correlation (narrow reach) and fails with
a structured error otherwise.
"""

from __future__ import annotations

from typing import Mapping

from .errors import ValidationError
from .exchangeable import (
    ExchangeableSeq,
    SeqRole,
    a_from_b,
    a_from_p,
    b_from_a,
    beta_from_ptilde,
    p_from_a,
    ptilde_from_beta,
    seq_from_json_dict,
)
from .sequences import check_LM
from .shock import (
    NarrowParams,
    WideParams,
    narrow_from_wide_2d,
    params_from_json_dict,
    wide_from_narrow,
)

_NARROW_ROLES = {SeqRole.P_NARROW, SeqRole.A_SEQ, SeqRole.B_SEQ}
_WIDE_ROLES = {SeqRole.PTILDE_WIDE, SeqRole.BETA_SEQ}


def _to_b(seq: ExchangeableSeq) -> ExchangeableSeq:
    if seq.role is SeqRole.P_NARROW:
        return b_from_a(a_from_p(seq))
    if seq.role is SeqRole.A_SEQ:
        return b_from_a(seq)
    return seq


def _to_beta(seq: ExchangeableSeq) -> ExchangeableSeq:
    if seq.role is SeqRole.PTILDE_WIDE:
        return beta_from_ptilde(seq)
    return seq


def _narrow_target(b: ExchangeableSeq, role: SeqRole) -> ExchangeableSeq:
    if role is SeqRole.B_SEQ:
        return b
    a = a_from_b(b)
    if role is SeqRole.A_SEQ:
        return a
    return p_from_a(a).seq()  # raises when the row is not narrow-admissible


def convert_sequence(seq: ExchangeableSeq, to_role: SeqRole) -> ExchangeableSeq:
    if seq.role is to_role:
        return seq
    if seq.role in _NARROW_ROLES:
        b = _to_b(seq)
        if to_role in _NARROW_ROLES:
            return _narrow_target(b, to_role)
        # a narrow model is a wide model with beta identical to b
        beta = ExchangeableSeq(SeqRole.BETA_SEQ, b.d, b.values)
        return beta if to_role is SeqRole.BETA_SEQ else ptilde_from_beta(beta).seq()
    beta = _to_beta(seq)
    if to_role is SeqRole.BETA_SEQ:
        return beta
    if to_role is SeqRole.PTILDE_WIDE:
        return ptilde_from_beta(beta).seq()
    if beta.d >= 3:
        raise ValidationError(
            "not-representable",
            "wide-to-narrow conversion is lossy for d >= 3 (no general inversion exists); only d = 2 is supported",
        )
    if not check_LM(beta.values).ok:
        raise ValidationError(
            "not-representable",
            "this wide parameter sequence is outside the narrow family (log-monotonicity fails)",
        )
    b = ExchangeableSeq(SeqRole.B_SEQ, beta.d, beta.values)
    return _narrow_target(b, to_role)


def convert_params(params: NarrowParams | WideParams, to_family: str):
    if to_family == "narrow":
        if isinstance(params, NarrowParams):
            return params
        if params.d >= 3:
            raise ValidationError(
                "not-representable",
                "wide-to-narrow conversion is lossy for d >= 3 (no general inversion exists); only d = 2 is supported",
            )
        return narrow_from_wide_2d(params)
    if to_family == "wide":
        return params if isinstance(params, WideParams) else wide_from_narrow(params)
    raise ValidationError("invalid-document", f"unknown target family {to_family!r}")


def convert_document(doc: Mapping, to: str, fill: bool = False) -> dict:
    """Dispatch on the document kind: sequence docs carry "role", parameter
    docs carry "family". The target may be any role or family name."""
    if "role" in doc:
        seq = seq_from_json_dict(doc)
        try:
            to_role = SeqRole(to)
        except ValueError as exc:
            raise ValidationError("invalid-document", f"cannot convert a sequence to {to!r}") from exc
        return convert_sequence(seq, to_role).to_json_dict()
    if "family" in doc:
        params = params_from_json_dict(doc, fill=fill)
        return convert_params(params, to).to_json_dict()
    raise ValidationError("invalid-document", "document has neither a 'role' nor a 'family' field")
