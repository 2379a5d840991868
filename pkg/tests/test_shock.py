import itertools
import json
import math

import numpy as np
import pytest

from geomlaw import shock
from geomlaw.errors import NotRepresentableError, ValidationError
from geomlaw.verify import random_narrow_params, random_wide_params


# --- validation ---------------------------------------------------------------


def test_validate_narrow_independence_model():
    params = shock.validate_narrow({1: 0.4, 2: 0.5, 4: 0.6, 3: 0, 5: 0, 6: 0, 7: 0}, 3)
    assert params.value(1) == 0.4


def test_validate_narrow_degenerate_component():
    with pytest.raises(ValidationError) as err:
        shock.validate_narrow({1: 1.0, 2: 1.0, 3: 1.0}, 2)
    assert err.value.code == "degenerate-component"


def test_validate_narrow_range_violation():
    with pytest.raises(ValidationError) as err:
        shock.validate_narrow({1: 1.2, 2: 0.5, 3: 0.5}, 2)
    assert err.value.code == "range-violation"


def test_validate_narrow_missing_key_is_an_error():
    with pytest.raises(ValidationError) as err:
        shock.validate_narrow({1: 0.5, 2: 0.5}, 2)
    assert err.value.code == "missing-key"
    params = shock.validate_narrow({1: 0.5, 2: 0.5}, 2, fill_ones=True)
    assert params.value(3) == 1.0


def test_validate_wide_symmetric_quarters():
    params = shock.validate_wide({0: 0.25, 1: 0.25, 2: 0.25, 3: 0.25}, 2)
    assert params.value(0) == 0.25


def test_validate_wide_degenerate_and_sum_errors():
    with pytest.raises(ValidationError) as err:
        shock.validate_wide({0: 1.0, 1: 0.0, 2: 0.0, 3: 0.0}, 2)
    assert err.value.code == "degenerate-component"
    with pytest.raises(ValidationError) as err:
        shock.validate_wide({0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0}, 2)
    assert err.value.code == "sum-not-one"
    with pytest.raises(ValidationError) as err:
        shock.validate_wide({0: 0.25, 1: 0.25, 2: 0.25}, 2)
    assert err.value.code == "missing-key"
    assert shock.validate_wide({0: 0.25, 1: 0.25, 2: 0.25, 3: 0.25000000000001}, 2).ptilde.sum() == 1.0


# --- narrow survival ------------------------------------------------------------


def test_survival_narrow_independence():
    p1, p2, p3 = 0.4, 0.5, 0.6
    raw = {1: p1, 2: p2, 4: p3, 3: 0.0, 5: 0.0, 6: 0.0, 7: 0.0}
    # zero-parameter joint shocks with exponent 0 must not zero the product
    params = shock.validate_narrow(raw, 3)
    assert shock.survival_narrow(params, [1, 2, 0]) == pytest.approx(p1 * p2**2, rel=1e-14)


def test_survival_narrow_at_origin_is_one():
    params = random_narrow_params(3, np.random.default_rng(0))
    assert shock.survival_narrow(params, [0, 0, 0]) == 1.0


def test_survival_narrow_hand_value():
    params = shock.validate_narrow({1: 0.5, 2: 0.6, 3: 0.9}, 2)
    assert shock.survival_narrow(params, [1, 1]) == pytest.approx(0.27, abs=1e-15)


def test_survival_narrow_componentwise_nonincreasing():
    rng = np.random.default_rng(1)
    params = random_narrow_params(3, rng)
    for _ in range(50):
        n = rng.integers(0, 5, size=3)
        bumped = n.copy()
        k = rng.integers(0, 3)
        bumped[k] += 1
        assert shock.survival_narrow(params, bumped) <= shock.survival_narrow(params, n) + 1e-15


# --- wide survival ---------------------------------------------------------------


def _wide3_by_cases(pt, n1, n2, n3):
    """Literal three-variate case formula (independent oracle for the
    order-statistics product)."""
    e = pt[0]
    s1, s2, s3 = e + pt[1], e + pt[2], e + pt[4]
    s12 = e + pt[1] + pt[2] + pt[3]
    s13 = e + pt[1] + pt[4] + pt[5]
    s23 = e + pt[2] + pt[4] + pt[6]
    if n1 <= n2 <= n3:
        return e**n1 * s1 ** (n2 - n1) * s12 ** (n3 - n2)
    if n1 <= n3 < n2:
        return e**n1 * s1 ** (n3 - n1) * s13 ** (n2 - n3)
    if n2 < n1 <= n3:
        return e**n2 * s2 ** (n1 - n2) * s12 ** (n3 - n1)
    if n2 <= n3 < n1:
        return e**n2 * s2 ** (n3 - n2) * s23 ** (n1 - n3)
    if n3 < n1 <= n2:
        return e**n3 * s3 ** (n1 - n3) * s13 ** (n2 - n1)
    return e**n3 * s3 ** (n2 - n3) * s23 ** (n1 - n2)


def test_survival_wide_matches_case_formula():
    rng = np.random.default_rng(2)
    params = random_wide_params(3, rng)
    pt = params.as_map()
    for n in itertools.product(range(4), repeat=3):
        expected = _wide3_by_cases(pt, *n)
        assert shock.survival_wide(params, list(n)) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_survival_wide_hand_value():
    params = shock.validate_wide({0: 0.25, 1: 0.25, 2: 0.25, 3: 0.25}, 2)
    assert shock.survival_wide(params, [1, 2]) == pytest.approx(0.125, abs=1e-15)


def test_survival_wide_origin_is_one():
    params = random_wide_params(3, np.random.default_rng(3))
    assert shock.survival_wide(params, [0, 0, 0]) == 1.0


def test_survival_wide_tie_breaking_invariance():
    # evaluate with every tie-respecting permutation; all must agree
    rng = np.random.default_rng(4)
    params = random_wide_params(3, rng)
    for _ in range(25):
        n = rng.integers(0, 3, size=3)
        vals = []
        for perm in itertools.permutations(range(3)):
            arranged = n[list(perm)]
            if all(arranged[i] <= arranged[i + 1] for i in range(2)):
                vals.append(shock._wide_factors(params, n[None, :], np.array([perm]))[0])
        assert max(vals) - min(vals) <= 1e-15


# --- pmf --------------------------------------------------------------------------


def test_pmf_univariate_geometric():
    p = 0.5
    params = shock.validate_narrow({1: p}, 1)
    result = shock.pmf(lambda n: shock.survival_narrow(params, n), [5])
    assert result.value == pytest.approx(p**4 * (1 - p), rel=1e-13)
    assert not result.clamped and not result.violation


def test_pmf_independence_two_dim():
    params = shock.validate_narrow({1: 0.5, 2: 0.5, 3: 1.0}, 2)
    result = shock.pmf(lambda n: shock.survival_narrow(params, n), [1, 1])
    assert result.value == pytest.approx(0.25, rel=1e-13)


def test_pmf_comonotone_off_diagonal_is_zero():
    params = shock.validate_narrow({1: 1.0, 2: 1.0, 3: 0.5}, 2)
    result = shock.pmf(lambda n: shock.survival_narrow(params, n), [1, 2])
    # 0.5 - 0.5 - 0.25 + 0.25 by direct inclusion-exclusion on p**max
    assert result.value == pytest.approx(0.0, abs=1e-15)


def test_pmf_requires_support_point():
    with pytest.raises(ValidationError):
        shock.pmf(lambda n: 1.0, [0, 1])


def test_pmf_clamps_and_flags():
    tiny = shock.pmf(lambda n: float(1.0 - 2.5e-11 * n.max()) if hasattr(n, "max") else 1.0, [1, 1])
    # alternating sum of a nearly-flat survival: raw residue within the clamp window

    def fake_survival(pts):
        pts = np.atleast_2d(pts)
        base = 0.25 * np.ones(len(pts))
        corner = (pts == 1).all(axis=1)
        return base - np.where(corner, 5e-11, 0.0)

    res = shock.pmf(fake_survival, [1, 1])
    assert res.clamped and res.value == 0.0 and res.raw == pytest.approx(-5e-11)

    def bad_survival(pts):
        pts = np.atleast_2d(pts)
        base = 0.25 * np.ones(len(pts))
        corner = (pts == 1).all(axis=1)
        return base - np.where(corner, 1e-6, 0.0)

    res = shock.pmf(bad_survival, [1, 1])
    assert res.violation and res.value == pytest.approx(-1e-6)


def test_pmf_sums_to_box_probability():
    # sum over {1..N}^2 equals P(all components <= N), computable directly
    params = shock.validate_narrow({1: 0.5, 2: 0.6, 3: 0.9}, 2)
    surv = lambda n: shock.survival_narrow(params, n)
    N = 25
    total = sum(shock.pmf(surv, [i, j]).raw for i in range(1, N + 1) for j in range(1, N + 1))
    box = 1.0 - surv([N, 0]) - surv([0, N]) + surv([N, N])
    assert total == pytest.approx(box, abs=1e-12)


# --- memoryless identity --------------------------------------------------------


def test_lm_property_holds_for_both_families():
    rng = np.random.default_rng(5)
    npar = random_narrow_params(3, rng)
    wpar = random_wide_params(3, rng)
    rep = shock.check_lm_property(lambda v: shock.survival_narrow(npar, v), 3, 5000, 8, rng)
    assert rep.passed, rep.max_rel_violation
    rep = shock.check_lm_property(lambda v: shock.survival_wide(wpar, v), 3, 5000, 8, rng)
    assert rep.passed, rep.max_rel_violation


def test_lm_property_rejects_countermonotone_coupling():
    p = 0.5

    def lower_extremal(pts):
        pts = np.atleast_2d(np.asarray(pts))
        return np.maximum(0.0, p ** pts[:, 0] + p ** pts[:, 1] - 1.0)

    rep = shock.check_lm_property(lower_extremal, 2, 4000, 6, np.random.default_rng(6))
    assert not rep.passed
    assert rep.witness is not None


# --- family bridges ---------------------------------------------------------------


def test_wide_from_narrow_hand_value():
    params = shock.validate_narrow({1: 0.5, 2: 0.6, 3: 0.9}, 2)
    wide = shock.wide_from_narrow(params)
    assert wide.value(0) == pytest.approx(0.27, abs=1e-14)
    assert wide.value(1) == pytest.approx(0.27, abs=1e-14)
    assert wide.value(2) == pytest.approx(0.18, abs=1e-14)
    assert wide.value(3) == pytest.approx(0.28, abs=1e-14)


def test_wide_from_narrow_independence_formula():
    # d = 3 independent components: alternating-sum identification
    p = [0.4, 0.5, 0.6]
    raw = {1: p[0], 2: p[1], 4: p[2], 3: 0.0, 5: 0.0, 6: 0.0, 7: 0.0}
    params = shock.validate_narrow(raw, 3)
    wide = shock.wide_from_narrow(params)
    for mask in range(8):
        members = [i for i in range(3) if mask >> i & 1]
        expected = 0.0
        for r in range(len(members) + 1):
            for sub in itertools.combinations(members, r):
                prod = math.prod(p[j] for j in range(3) if j not in sub)
                expected += (-1) ** (len(members) + r) * prod
        assert wide.value(mask) == pytest.approx(expected, abs=1e-14)


def test_wide_from_narrow_comonotone():
    p = 0.3
    params = shock.validate_narrow({1: 1.0, 2: 1.0, 3: p}, 2)
    wide = shock.wide_from_narrow(params)
    assert wide.value(0) == pytest.approx(p, abs=1e-15)
    assert wide.value(3) == pytest.approx(1 - p, abs=1e-15)
    assert wide.value(1) == 0.0 and wide.value(2) == 0.0


def test_bridge_preserves_survival_on_grid():
    rng = np.random.default_rng(8)
    for d in (2, 3):
        params = random_narrow_params(d, rng)
        wide = shock.wide_from_narrow(params)
        pts = np.array(list(itertools.product(range(5), repeat=d)), dtype=np.int64)
        a = shock.survival_narrow(params, pts)
        b = shock.survival_wide(wide, pts)
        assert np.abs(a - b).max() <= 1e-12


def test_narrow_from_wide_round_trip():
    wide = shock.validate_wide({0: 0.27, 1: 0.27, 2: 0.18, 3: 0.28}, 2)
    back = shock.narrow_from_wide_2d(wide)
    assert back.value(1) == pytest.approx(0.5, abs=1e-12)
    assert back.value(2) == pytest.approx(0.6, abs=1e-12)
    assert back.value(3) == pytest.approx(0.9, abs=1e-12)


def test_narrow_from_wide_rejects_negative_correlation():
    # the quarter model has correlation -1/8 < 0
    from geomlaw.exchangeable import ExchangeableSeq, SeqRole, to_general

    row = ExchangeableSeq(SeqRole.PTILDE_WIDE, 2, (0.2, 0.3))
    wide = to_general(row)
    with pytest.raises(NotRepresentableError) as err:
        shock.narrow_from_wide_2d(wide)
    assert err.value.detail.get("correlation_sign") == -1


def test_narrow_from_wide_independence_has_unit_joint_shock():
    p = 0.5
    raw = {1: p, 2: p, 3: 1.0}
    wide = shock.wide_from_narrow(shock.validate_narrow(raw, 2))
    back = shock.narrow_from_wide_2d(wide)
    assert back.value(3) == pytest.approx(1.0, abs=1e-12)
    assert back.value(1) == pytest.approx(p, abs=1e-12)


def test_narrow_from_wide_requires_dimension_two():
    wide = random_wide_params(3, np.random.default_rng(9))
    with pytest.raises(ValidationError) as err:
        shock.narrow_from_wide_2d(wide)
    assert err.value.code == "dimension-mismatch"


# --- marginals ---------------------------------------------------------------------


def test_marginal_narrow_two_to_one():
    params = shock.validate_narrow({1: 0.5, 2: 0.6, 3: 0.9}, 2)
    margin = shock.marginal_params(params, 0b01)
    assert margin.d == 1
    assert margin.value(1) == pytest.approx(0.45, abs=1e-15)  # 0.5 * 0.9


def test_marginal_wide_two_to_one():
    params = shock.validate_wide({0: 0.27, 1: 0.27, 2: 0.18, 3: 0.28}, 2)
    margin = shock.marginal_params(params, 0b01)
    assert margin.value(0) == pytest.approx(0.45, abs=1e-15)  # pt_empty + pt_{other}


def test_marginal_keep_all_is_identity():
    params = random_narrow_params(2, np.random.default_rng(10))
    margin = shock.marginal_params(params, 0b11)
    assert np.allclose(margin.p, params.p)


def test_marginal_matches_joint_with_zeros():
    rng = np.random.default_rng(11)
    npar = random_narrow_params(3, rng)
    wpar = random_wide_params(3, rng)
    keep = 0b101  # components 0 and 2
    nm = shock.marginal_params(npar, keep)
    wm = shock.marginal_params(wpar, keep)
    for n0, n2 in itertools.product(range(4), repeat=2):
        assert shock.survival_narrow(nm, [n0, n2]) == pytest.approx(
            shock.survival_narrow(npar, [n0, 0, n2]), rel=1e-12
        )
        assert shock.survival_wide(wm, [n0, n2]) == pytest.approx(
            shock.survival_wide(wpar, [n0, 0, n2]), rel=1e-12
        )


def test_marginal_empty_keep_rejected():
    params = random_narrow_params(2, np.random.default_rng(12))
    with pytest.raises(ValidationError) as err:
        shock.marginal_params(params, 0)
    assert err.value.code == "empty-keep"


# --- JSON round trip ------------------------------------------------------------------


def test_params_json_round_trip_exact():
    rng = np.random.default_rng(13)
    npar = random_narrow_params(3, rng)
    doc = json.loads(json.dumps(npar.to_json_dict()))
    back = shock.params_from_json_dict(doc)
    assert np.array_equal(back.p, npar.p)
    wpar = random_wide_params(2, rng)
    doc = json.loads(json.dumps(wpar.to_json_dict()))
    back = shock.params_from_json_dict(doc)
    assert np.array_equal(back.ptilde, wpar.ptilde)
