import math

import numpy as np
import pytest

from smoothorbit import verify
from smoothorbit.verify import (Constraints, HypothesisViolated, InstanceSpec, MissingParam,
                                Unsatisfiable, discrepancy, envelope, random_instance, run_check)


def test_envelope_examples():
    p = 10**4 + 7
    assert envelope("cor22", N=10**4, p=p, eps=0.5) == pytest.approx(10**4 * p ** -0.25)
    assert envelope("lemma21", s=1, M=1, N=777, t=777, p=p) == pytest.approx(2 * p**0.5 * math.log(p))
    assert envelope("thm11", N=10**6, Q=50, eps=0.5, B=2) == pytest.approx(10 ** (6 * (1 - 1 / 32)) * 50)
    K, M, t = 400, 60, 5000
    base = K * M * (M**-0.5 + K**-0.5 * M**0.5 * p**0.25 + M**0.5 * p**0.25 / t**0.5) * math.log(p) ** 0.5
    assert envelope("lemma23", K=K, M=M, p=p, t=t) == pytest.approx(base)
    assert envelope("lemma24", K=K, M=M, p=p, t=t) == pytest.approx(base * math.log(K))
    hyp = K * (3**-0.5 + M * K**-0.5 * p**0.25 + M**0.5 * p**0.25 / t**0.5) * math.log(p) ** 0.5 * math.log(K)
    assert envelope("lemma25", K=K, M=M, H=3, p=p, t=t) == pytest.approx(hyp)
    with pytest.raises(MissingParam):
        envelope("thm11", N=10, Q=2, eps=0.5)


def test_envelope_monotonicity():
    Ns = np.geomspace(10**3, 10**9, 30)
    Qs = np.geomspace(2, 10**4, 30)
    vals = [[envelope("thm11", N=N, Q=Q, eps=0.5, B=2) for Q in Qs] for N in Ns]
    assert all(np.all(np.diff(row) > 0) for row in vals)
    assert all(np.all(np.diff(col) > 0) for col in zip(*vals))
    eps = np.linspace(0.01, 1, 50)
    cor = [envelope("cor22", N=10**5, p=10007, eps=x) for x in eps]
    assert np.all(np.diff(cor) < 0)


def test_random_instance_constraints_and_determinism():
    c = Constraints(kind="lemma21", t_exponent=0.75)
    a = random_instance(42, c)
    assert a == random_instance(42, c)
    assert a.t >= a.p ** 0.75
    assert a.cls in ("split", "inert")
    assert 10**4 <= a.p <= 10**5


def test_random_instance_unsatisfiable():
    # the convention period never exceeds p
    c = Constraints(kind="lemma21", t_exponent=math.log(10**5 + 2) / math.log(10**4), max_tries=300)
    with pytest.raises(Unsatisfiable):
        random_instance(1, c)


def test_run_check_empty_and_gating():
    assert run_check([], "cor22") == []
    inst = random_instance(3, Constraints(kind="lemma21", t_exponent=0.5, p_min=10**4, p_max=2 * 10**4))
    bad = InstanceSpec(**{**inst.__dict__, "t": 10})
    with pytest.raises(HypothesisViolated, match=r"t >= p\^\{1/2\+eps\}"):
        run_check([bad], "cor22")


def test_run_check_cor22_pipeline():
    c = Constraints(kind="cor22", eps=0.25, t_exponent=0.75)
    insts = verify.instance_family(10, 4, c)
    reports = run_check(insts, "cor22")
    assert len(reports) == 4
    assert [r.ratio for r in reports] == sorted((r.ratio for r in reports), reverse=True)
    for r in reports:
        assert r.envelope > 0 and r.ratio >= 0 and math.isfinite(r.ratio)
        assert r.envelope == pytest.approx(r.N * r.p ** -0.125)


def test_reports_reproducible():
    c = Constraints(kind="lemma23", K=50, M=20, p_min=1000, p_max=5000)
    insts = verify.instance_family(7, 5, c)
    a = verify.reports_csv(run_check(insts, "lemma23", timing=False))
    b = verify.reports_csv(run_check(verify.instance_family(7, 5, c), "lemma23", workers=3, timing=False))
    assert a == b
    assert a.splitlines()[0] == ",".join(verify.REPORT_COLUMNS)


@pytest.mark.parametrize("kind,extra", [("lemma24", dict(K=80, M=15)), ("lemma25", dict(K=2000, M=40, H=2)),
                                        ("lemma21", {})])
def test_other_kinds_run(kind, extra):
    c = Constraints(kind=kind, p_min=1000, p_max=5000, **extra)
    reports = run_check(verify.instance_family(1, 3, c), kind)
    assert all(math.isfinite(r.ratio) for r in reports)


def test_discrepancy():
    assert discrepancy([5] * 100, 101, 10) == pytest.approx(1 - 1 / 10)
    p = 1009
    for bins in (1, 7, 10, 64):
        assert discrepancy(range(p), p, bins) <= 1 / bins + 1 / p
    with pytest.raises(verify.EmptyInput):
        discrepancy([], 7, 3)


def test_discrepancy_of_long_orbit():
    from smoothorbit.expsums import orbit_range
    inst = random_instance(5, Constraints(kind="lemma21", t_exponent=0.9))
    d = discrepancy(orbit_range(inst.orbit, 0, 10**5), inst.p, 100)
    assert 0 <= d < 0.05


def test_vaughan_L():
    assert verify.vaughan_L(10, 10**4, 0.5) == pytest.approx(10 * 10**0.5)
