import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hllab import (
    INF,
    AscentConfig,
    Method,
    MultilinearForm,
    XExp,
    closed_form_norm,
    dual_step,
    estimate_norm,
    exact_norm_linf,
    weak_norm,
    witness,
)
from hllab.errors import DomainError, TooLarge
from hllab.exponents import conj
from hllab.optnorm import escalate, ordered_map
from hllab.tensor import lp_norm


def brute_linf(a):
    """Exact l_inf norm by enumerating all sign vectors of every slot."""
    best = 0.0
    for signs in itertools.product(*[list(itertools.product((1.0, -1.0), repeat=n)) for n in a.shape]):
        cur = a
        for s in signs:
            cur = np.tensordot(np.array(s), cur, axes=(0, 0))
        best = max(best, abs(float(cur)))
    return best


# ---------------------------------------------------------------- dual_step

@pytest.mark.parametrize("p,expected", [(2, [0.6, 0.8]), (INF, [1, 1]), (1, [0, 1])])
def test_dual_step_goldens(p, expected):
    assert dual_step([3, 4], p) == pytest.approx(expected, rel=1e-15)


def test_dual_step_ties():
    assert dual_step([0, 0, 0], 3).tolist() == [1, 0, 0]
    assert dual_step([0, -2, 1], INF).tolist() == [1, -1, 1]
    assert dual_step([2, -2, 1], 1).tolist() == [1, 0, 0]
    assert dual_step([-1, 2, -2], 1).tolist() == [0, 1, 0]


def test_dual_step_domain():
    with pytest.raises(DomainError):
        dual_step([1.0], "1/2")
    with pytest.raises(DomainError):
        dual_step([], 2)


vecs = hnp.arrays(np.float64, st.integers(1, 12), elements=st.floats(-1e3, 1e3, allow_nan=False))
pexps = st.sampled_from([XExp(1), XExp("5/4"), XExp(2), XExp(3), XExp(10), INF])


@given(vecs, pexps)
def test_dual_step_attains_dual_norm(c, p):
    x = dual_step(c, p)
    assert float(lp_norm(x, p)) <= 1 + 1e-12
    assert float(c @ x) == pytest.approx(float(lp_norm(c, conj(p))), rel=1e-10, abs=1e-12)


@given(vecs, pexps, st.data())
def test_dual_step_beats_random_feasible(c, p, data):
    x = dual_step(c, p)
    y = data.draw(hnp.arrays(np.float64, c.shape, elements=st.floats(-1, 1, allow_nan=False)))
    ny = float(lp_norm(y, p))
    if ny > 0:
        assert float(c @ (y / ny)) <= float(c @ x) * (1 + 1e-10) + 1e-10


# ---------------------------------------------------------------- estimate / enumerate

def test_estimate_goldens():
    cert = estimate_norm(witness("U", 2, 2, domain_exps=(4, 4)))
    assert cert.value == pytest.approx(2**0.75, rel=1e-6)
    assert estimate_norm(MultilinearForm([[-3.5]], [2, 7])).value == pytest.approx(3.5)
    assert estimate_norm(MultilinearForm([[1, 1], [1, -1]], [INF, INF])).value == pytest.approx(2.0)


def test_exact_goldens():
    assert exact_norm_linf(MultilinearForm([[1, 1], [1, -1]], [INF, INF])).value == 2.0
    cert = exact_norm_linf(MultilinearForm(np.ones((2, 2)), [INF, INF]))
    assert cert.value == 4.0 and cert.method is Method.ENUMERATION and cert.converged
    assert exact_norm_linf(MultilinearForm([1, -2, 3], [INF])).value == 6.0


def test_exact_guard_and_domain():
    with pytest.raises(TooLarge):
        exact_norm_linf(witness("KSZ", 2, 25))
    with pytest.raises(DomainError):
        exact_norm_linf(witness("V", 2, 3, domain_exps=(2, 2)))


@pytest.mark.parametrize("shape", [(5, 6), (3, 3, 3), (2, 3, 2, 3), (7, 1), (1, 4)])
def test_exact_matches_brute_force(shape, rng):
    for _ in range(5):
        a = rng.standard_normal(shape)
        f = MultilinearForm(a, [INF] * len(shape))
        cert = exact_norm_linf(f)
        assert cert.value == pytest.approx(brute_linf(a), rel=1e-12)
        assert cert.check(f)


@pytest.mark.parametrize("kind,p,q", [("U", 4, 4), ("V", 4, 4), ("U", 2, 4), ("V", "8/3", 8), ("V", 3, 3), ("U", INF, INF)])
def test_estimate_matches_closed_forms(kind, p, q):
    for n in (2, 5, 9):
        cert = estimate_norm(witness(kind, 2, n, domain_exps=(p, q)), AscentConfig(multistarts=32))
        assert cert.value == pytest.approx(closed_form_norm(kind, p, q, n), rel=1e-6)


def test_estimate_trilinear_linf_against_enumeration(rng):
    for _ in range(5):
        f = MultilinearForm(rng.standard_normal((3, 4, 3)), [INF] * 3)
        est = estimate_norm(f, AscentConfig(multistarts=32))
        assert est.value <= exact_norm_linf(f).value * (1 + 1e-12)
        assert est.check(f)


def test_zero_form():
    cert = estimate_norm(MultilinearForm(np.zeros((3, 2)), [2, 2]))
    assert cert.value == 0.0 and cert.check(MultilinearForm(np.zeros((3, 2)), [2, 2]))


forms = st.integers(2, 3).flatmap(
    lambda m: st.tuples(
        hnp.arrays(np.float64, st.tuples(*[st.integers(1, 4)] * m), elements=st.floats(-5, 5, allow_nan=False)),
        st.lists(pexps, min_size=m, max_size=m),
    )
)


@given(forms)
def test_certificate_self_check(fp):
    a, exps = fp
    f = MultilinearForm(a, exps)
    cert = estimate_norm(f, AscentConfig(multistarts=4))
    assert cert.check(f, rtol=1e-12)


@given(forms, st.floats(0.01, 100))
def test_scale_equivariance(fp, lam):
    a, exps = fp
    f = MultilinearForm(a, exps)
    cfg = AscentConfig(multistarts=4)
    assert estimate_norm(f.scaled(lam), cfg).value == pytest.approx(lam * estimate_norm(f, cfg).value, rel=1e-8, abs=1e-12)


@given(forms)
def test_lower_bounded_by_entries(fp):
    a, exps = fp
    f = MultilinearForm(a, exps)
    # the stopping rule leaves up to ~rel_tol/(1 - rate) on slowly contracting iterations
    assert estimate_norm(f, AscentConfig(multistarts=2)).value >= np.abs(a).max() * (1 - 1e-9)


def test_multistart_monotone_and_deterministic(rng):
    f = MultilinearForm(rng.standard_normal((6, 7)), [3, "5/2"])
    vals = [estimate_norm(f, AscentConfig(multistarts=k, seed=3)).value for k in (1, 2, 4, 8, 16)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert estimate_norm(f, AscentConfig(multistarts=8, seed=3)).value == vals[3]


def test_threads_do_not_change_results(monkeypatch, rng):
    f = MultilinearForm(rng.standard_normal((5, 5, 5)), [3, 4, INF])
    cfg = AscentConfig(multistarts=8)
    serial = estimate_norm(f, cfg)
    monkeypatch.setenv("HLLAB_THREADS", "4")
    threaded = estimate_norm(f, cfg)
    assert serial.value == threaded.value
    assert all(np.array_equal(x, y) for x, y in zip(serial.witnesses, threaded.witnesses))
    assert ordered_map(lambda k: k * k, range(10)) == [k * k for k in range(10)]


def test_config_validation():
    with pytest.raises(DomainError):
        AscentConfig(multistarts=0)
    with pytest.raises(DomainError):
        AscentConfig(rel_tol=0)
    assert escalate(AscentConfig(multistarts=16)).multistarts == 64


def test_certificate_dict():
    d = estimate_norm(witness("V", 2, 3, domain_exps=(2, 2))).to_dict()
    assert d["method"] == "ASCENT" and len(d["witnesses"]) == 2 and d["multistarts_used"] == 16


# ---------------------------------------------------------------- weak norms

@pytest.mark.parametrize("s,p", [(2, 2), (3, "3/2"), (INF, 1), (1, 4)])
def test_weak_norm_single_vector(s, p, rng):
    x = rng.standard_normal((1, 6))
    assert weak_norm(x, s, p).value == pytest.approx(float(lp_norm(x[0], s)), rel=1e-8)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_weak_norm_basis_closed_forms(n):
    assert weak_norm(np.eye(n), 4, "4/3").value == pytest.approx(1.0)
    cert = weak_norm(np.eye(n), 2, 1)
    assert cert.value == pytest.approx(n**0.5) and cert.method is Method.CLOSED_FORM


@pytest.mark.parametrize("s,p", [(2, 1), (4, "4/3"), (3, 2), (INF, 1), ("3/2", 5)])
def test_weak_norm_basis_matches_ascent(s, p):
    n = 5
    closed = weak_norm(np.eye(n), s, p).value
    # a perturbed copy avoids the closed-form path and runs the ascent
    a = np.eye(n)
    a[0, 1] = 1e-13
    assert weak_norm(a, s, p, AscentConfig(multistarts=32)).value == pytest.approx(closed, rel=1e-6)


# ---------------------------------------------------------------- backends

def _run_backend(flag):
    code = (
        "import numpy as np, json;"
        "from hllab import kernels;"
        "r = np.random.default_rng(5);"
        "A = r.standard_normal((9, 7));"
        "s = kernels.KERNELS.linf_enum2(A);"
        "v = kernels.KERNELS.ascent2(A, 3.0, 1.5, np.ones(9)/9**(1/3), np.ones(7)/7**(1/1.5), 200, 1e-12);"
        "d = kernels.KERNELS.dual_step(A[0], 2.5);"
        "print(json.dumps([kernels.backend(), s.tolist(), v[0], d.tolist()]))"
    )
    env = dict(os.environ)
    env.pop("HLLAB_DISABLE_NUMBA", None)
    if flag:
        env["HLLAB_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    import json

    return json.loads(out.stdout)


def test_numba_and_numpy_backends_agree():
    fast = _run_backend(False)
    slow = _run_backend(True)
    assert slow[0] == "numpy"
    assert fast[1] == slow[1]
    assert fast[2] == pytest.approx(slow[2], rel=1e-12)
    assert fast[3] == pytest.approx(slow[3], rel=1e-12)


def test_backends_break_ties_identically():
    from hllab import kernels

    rng = np.random.default_rng(9)
    for n in (3, 6, 13):
        a = rng.choice([-1.0, 1.0], size=(n, n))
        s1 = kernels.NUMBA_KERNELS.linf_enum2(a)
        s2 = kernels.NUMPY_KERNELS.linf_enum2(a)
        assert np.array_equal(s1, s2)
        if n <= 6:
            assert np.abs(s1 @ a).sum() == brute_linf(a)
