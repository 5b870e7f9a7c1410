import json
import math

import numpy as np
import pytest

from innerbounds import verify
from innerbounds.exponents import HolderParams
from innerbounds.formulas import Source
from innerbounds.serialize import dumps_json
from innerbounds.verify import (Distribution, FuzzConfig, audit_printed_forms, check_chain, fuzz, random_instance,
                                replay_counterexample, sample_params)

from conftest import identity_instance, orthonormal_instance


def test_random_instance_deterministic():
    cfg = FuzzConfig(seed=1)
    a, b = random_instance(cfg, 0), random_instance(cfg, 0)
    assert np.array_equal(a.gram.g, b.gram.g) and np.array_equal(a.c, b.c) and np.array_equal(a.x, b.x)
    assert not np.array_equal(random_instance(cfg, 1).c, a.c) or a.n != random_instance(cfg, 1).n


def test_unit_disk_support():
    cfg = FuzzConfig(seed=9)
    for i in range(200):
        inst = random_instance(cfg, i)
        assert np.all(np.abs(inst.family.vectors) <= 1) and np.all(np.abs(inst.c) <= 1) and np.all(np.abs(inst.x) <= 1)


def test_sparse_density():
    cfg = FuzzConfig(seed=4, distribution=Distribution.SPARSE, d_range=(8, 8))
    nz = total = 0
    for i in range(10_000):
        inst = random_instance(cfg, i)
        nz += int(np.count_nonzero(inst.family.vectors))
        total += inst.family.vectors.size
    assert 0.25 <= nz / total <= 0.35


def test_gaussian_and_gram_direct_streams():
    cfg = FuzzConfig(seed=2, distribution=Distribution.GAUSSIAN, include_gram_direct=True)
    kinds = {random_instance(cfg, i).from_coordinates for i in range(40)}
    assert kinds == {True, False}


def test_params_always_start_at_two():
    cfg = FuzzConfig(seed=8)
    for i in range(20):
        ps = sample_params(cfg, i)
        assert len(ps) == 5 and ps[0].pq.p == 2.0
        for prm in ps:
            assert 1.01 <= prm.pq.p <= 101 and prm.ab is not None and prm.gd is not None


def test_orthonormal_chain_has_equalities(rng):
    inst = orthonormal_instance(rng, 3, 3, c=np.ones(3))
    rep = check_chain(inst, HolderParams.make(2, 2, 2))
    assert rep.passed
    exact = [c for c in rep.checks if abs(c.slack) <= 1e-12 * max(1.0, abs(c.rhs_value))]
    assert len(exact) >= 3
    names = {c.name for c in rep.checks}
    assert "bessel_14: lhs <= |x|^2" in names


def test_zero_c_chain_passes():
    inst = identity_instance(np.zeros(3))
    rep = check_chain(inst, HolderParams.make(3, 2, 2))
    assert rep.passed


def test_fuzz_empty():
    s = fuzz(FuzzConfig(instances=0))
    assert s.total_checks == 0 and s.violations == 0 and s.param_sets == 0


def test_fuzz_small_run_clean_and_deterministic():
    cfg = FuzzConfig(seed=11, instances=60, include_gram_direct=True)
    a, b = fuzz(cfg), fuzz(cfg)
    assert a.violations == 0 and a.total_checks > 0
    assert dumps_json(a.as_dict()) == dumps_json(b.as_dict())


def test_fuzz_tightness_ordering():
    cfg = FuzzConfig(seed=12, instances=50)
    for i in range(cfg.instances):
        inst = random_instance(cfg, i)
        for prm in sample_params(cfg, i):
            from innerbounds.bounds import evaluate_ladder
            v = evaluate_ladder(inst, prm).as_dict()
            if v["lemma21_lhs"] > 1e-12:
                assert v["lemma21_branch1"] / v["lemma21_lhs"] >= v["lemma21_first"] / v["lemma21_lhs"] * (1 - 1e-9)


def test_fuzz_reports_fault(monkeypatch):
    real = verify.evaluate_ladder

    def broken(inst, params, printed=False):
        lad = real(inst, params, printed)
        for b in lad.bounds:
            if b.name == "thm31_branch9":
                object.__setattr__(b, "value", b.value * 0.5)
        return lad

    monkeypatch.setattr(verify, "evaluate_ladder", broken)
    s = fuzz(FuzzConfig(seed=0, instances=5))
    assert s.violations > 0
    assert s.violation_samples[0]["check"].startswith("thm31")


def test_audit_rows_and_replay():
    rep = audit_printed_forms(FuzzConfig(seed=3, instances=100))
    for row in rep.rows:
        assert row.evaluated == 100 * 5
        if row.symbolic_match:
            assert row.violations == 0 and row.bitwise_equal == row.evaluated
    for src, k in ((Source.LEMMA21, 4), (Source.THM41, 4), (Source.THM41, 6)):
        row = rep.row(src, k)
        assert not row.symbolic_match
        assert row.worst is not None
        doc = json.loads(dumps_json(row.worst))
        replay = replay_counterexample(doc)
        for key in ("printed", "derived", "middle"):
            assert math.isclose(replay[key], doc["audit"][key], rel_tol=1e-12)
        assert doc["audit"]["replay_verified"]


def test_audit_deterministic():
    cfg = FuzzConfig(seed=21, instances=40)
    assert dumps_json(audit_printed_forms(cfg).as_dict()) == dumps_json(audit_printed_forms(cfg).as_dict())


def test_config_validation():
    with pytest.raises(ValueError):
        FuzzConfig(seed=-1)
    with pytest.raises(ValueError):
        FuzzConfig(n_range=(3, 2))
    with pytest.raises(ValueError):
        FuzzConfig(pq_samples=0)
