import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geomlaw import sequences as sq
from geomlaw.errors import ValidationError
from geomlaw.extendibility import InfDivLaw, laplace_moments


# --- membership examples ---------------------------------------------------


def test_one_half_one_fifth_is_3_monotone():
    assert sq.check_M((1.0, 0.5, 0.2)).ok


def test_non_monotone_with_witness():
    verdict = sq.check_M((1.0, 0.9, 0.95))
    assert not verdict.ok
    assert verdict.witness.value == pytest.approx(-0.05)
    assert (verdict.witness.k, verdict.witness.j) == (1, 1)


def test_geometric_powers_are_monotone():
    p = 0.6
    assert sq.check_M(tuple(p**k for k in range(6))).ok


def test_check_lm_examples():
    p = 0.35
    assert sq.check_LM((1.0, p, p**2, p**3)).ok
    assert sq.check_LM((1.0, p, p, p)).ok
    beta = [0.1 + 0.9 * math.exp(-k) for k in range(4)]
    verdict = sq.check_LM(beta)
    assert not verdict.ok
    # ln(beta_2^3 / (beta_1^3 beta_3)) at the head
    expected = math.log(beta[2] ** 3 / (beta[1] ** 3 * beta[3]))
    assert verdict.witness.value == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(-0.06, abs=5e-3)


def test_check_sm_examples():
    v = sq.check_SM((0.5, 0.4))
    assert not v.ok
    assert v.witness.value == pytest.approx(math.log(4.0 / 5.0), abs=1e-12)
    assert sq.check_SM((0.4, 0.5)).ok
    assert sq.check_SM((0.7, 0.7, 0.7, 0.7)).ok


def test_check_lm_rejects_nonpositive():
    with pytest.raises(ValidationError) as err:
        sq.check_LM((1.0, 0.0, 0.0))
    assert err.value.code == "nonpositive-entry"


# --- Hausdorff extendibility ------------------------------------------------


def test_hankel_examples():
    assert not sq.hankel_extendible((1.0, 0.5, 0.2)).ok
    assert sq.hankel_extendible((1.0, 0.5, 0.25)).ok  # point mass at 1/2
    for x1 in (0.0, 0.3, 0.999):
        assert sq.hankel_extendible((1.0, x1)).ok


def test_hankel_requires_leading_one():
    with pytest.raises(ValidationError):
        sq.hankel_extendible((0.9, 0.5))


def test_hankel_too_short():
    with pytest.raises(ValidationError) as err:
        sq.hankel_extendible((1.0,))
    assert err.value.code == "too-short"


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_hankel_accepts_moment_sequences(data):
    # oracle: moments of an explicit discrete measure on [0,1] must pass
    k = data.draw(st.integers(1, 5))
    atoms = data.draw(st.lists(st.floats(0, 1), min_size=k, max_size=k))
    weights = data.draw(st.lists(st.floats(0.01, 1), min_size=k, max_size=k))
    total = sum(weights)
    length = data.draw(st.integers(2, 9))
    moments = [sum(w / total * a**j for a, w in zip(atoms, weights)) for j in range(length)]
    moments[0] = 1.0
    assert sq.hankel_extendible(moments).ok


def test_hankel_implies_monotone():
    rng = np.random.default_rng(7)
    for _ in range(100):
        atoms = rng.random(3)
        w = rng.random(3)
        w /= w.sum()
        moments = [float((w * atoms**j).sum()) for j in range(6)]
        moments[0] = 1.0
        if moments[1] < 1.0 and sq.hankel_extendible(moments).ok:
            assert sq.check_M(moments).ok


# --- log-monotone extendibility battery --------------------------------------


def test_lm_extendible_length3_iff():
    # b1^2 <= b2 <= b1 < 1 characterizes the length-3 case
    assert sq.lm_extendible((1.0, 0.5, 0.3)).ok
    assert sq.lm_extendible((1.0, 0.5, 0.25)).ok
    assert not sq.lm_extendible((1.0, 0.5, 0.2)).ok
    verdict = sq.lm_extendible((1.0, 0.5, 0.2))
    assert verdict.exact and verdict.failing_power is not None


def test_lm_extendible_geometric_powers():
    p = 0.45
    verdict = sq.lm_extendible(tuple(p**k for k in range(5)))
    assert verdict.ok and not verdict.exact


@pytest.mark.parametrize(
    "law",
    [
        InfDivLaw.degenerate(0.8),
        InfDivLaw.gamma(2.0, 3.0),
        InfDivLaw.compound_poisson_exp(1.5, 2.0),
        InfDivLaw.geometric_killed(0.5, 0.8),
        InfDivLaw.geometric_killed(0.3, 1.0),
    ],
)
def test_divisible_laws_pass_lm_and_battery(law):
    for d in (3, 6, 10):
        seq = laplace_moments(law, d)
        assert sq.check_LM(seq.values).ok
        assert sq.lm_extendible(seq.values).ok


def test_bernoulli_law_monotone_but_not_log_monotone():
    law = InfDivLaw.bernoulli(0.9, 1.0)
    failed = False
    for d in (2, 3, 4):
        seq = laplace_moments(law, d)
        assert sq.check_M(seq.values).ok
        assert sq.hankel_extendible(seq.values).ok
        if not sq.check_LM(seq.values).ok:
            failed = True
    assert failed  # breaks log-monotonicity by dimension 4 at the latest


# --- structural properties ----------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.05, 0.98), min_size=2, max_size=8))
def test_lm_implies_m_on_random_narrow_rows(p_row):
    from geomlaw.exchangeable import ExchangeableSeq, SeqRole, a_from_p, b_from_a

    b = b_from_a(a_from_p(ExchangeableSeq(SeqRole.P_NARROW, len(p_row), tuple(p_row))))
    assert sq.check_LM(b.values).ok
    assert sq.check_M(b.values).ok


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.05, 0.98), min_size=2, max_size=8))
def test_sm_lm_duality_via_ratios(p_row):
    # b is log-monotone exactly when its ratio sequence is strong-monotone
    from geomlaw.exchangeable import ExchangeableSeq, SeqRole, a_from_b, a_from_p, b_from_a

    row = ExchangeableSeq(SeqRole.P_NARROW, len(p_row), tuple(p_row))
    b = b_from_a(a_from_p(row))
    a = a_from_b(b)
    assert sq.check_LM(b.values).ok == sq.check_SM(a.values).ok


def test_classify_sequence_report_shape():
    report = sq.classify_sequence((1.0, 0.5, 0.2))
    assert report.in_M and not report.hankel_extendible_M and not report.in_LM
    assert "hankel_extendible_M" in report.witnesses
    d = report.to_dict()
    assert set(d) >= {"checked", "in_M", "in_LM", "in_SM", "hankel_extendible_M", "witnesses"}


def test_classify_sequence_handles_nonpositive_entries():
    report = sq.classify_sequence((1.0, 0.4, 0.0))
    assert report.in_M and not report.in_LM
    assert report.witnesses["in_LM"].reason == "nonpositive-entry"
