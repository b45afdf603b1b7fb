import math

import numpy as np
import pytest

from inviscid_damping import flow_profile as fp


def test_eval_flow_at_origin():
    s = fp.eval_flow(0.0)
    assert (s.u, s.du, s.d2u, s.d3u) == (0.0, 1.0, 0.0, -2.0)


def test_eval_flow_at_one_matches_tanh_identities():
    s = fp.eval_flow(1.0)
    t = math.tanh(1.0)
    assert s.u == pytest.approx(0.7615942, abs=5e-8)
    assert s.du == pytest.approx(0.4199743, abs=5e-8)
    assert s.d2u == pytest.approx(-0.6397000, abs=5e-8)
    # closed form; the tabulated 0.6217076 is off by 8e-5 (see ledger)
    sech2 = 1 / math.cosh(1.0) ** 2
    assert s.d3u == pytest.approx(0.6216267, abs=5e-8)
    assert s.d3u == pytest.approx(-2 * sech2 * (sech2 - 2 * t * t), rel=1e-14)


def test_eval_flow_parity():
    a, b = fp.eval_flow(1.0), fp.eval_flow(-1.0)
    assert b.u == -a.u and b.du == a.du and b.d2u == -a.d2u and b.d3u == a.d3u


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_eval_flow_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        fp.eval_flow(bad)


def test_critical_point_examples():
    assert fp.critical_point(0.0) == 0.0
    assert fp.critical_point(0.5) == pytest.approx(0.5493061, abs=5e-8)
    assert fp.critical_point(-0.5) == -fp.critical_point(0.5)
    # bisection cross-check
    lo, hi = 0.0, 5.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if math.tanh(mid) < 0.5 else (lo, mid)
    assert fp.critical_point(0.5) == pytest.approx(lo, abs=1e-14)


@pytest.mark.parametrize("c", [1.0, -1.0, 1.5, math.nan])
def test_critical_point_rejects_outside(c):
    with pytest.raises(ValueError):
        fp.critical_point(c)


def test_critical_point_round_trip():
    for c in np.linspace(-0.999, 0.999, 201):
        assert abs(math.tanh(fp.critical_point(c)) - c) < 1e-14


def test_in_domain_examples():
    assert fp.in_domain_O(0.5 + 0.01j, 1, eps0=0.25, C_o=8)
    assert not fp.in_domain_O(0.99 + 0.1j, 1, eps0=0.25, C_o=8)
    assert fp.in_domain_O(0.3, 1, inclusive=True)
    assert not fp.in_domain_O(0.3, 1, inclusive=False)
    assert not fp.in_domain_O(1.2 + 0.01j, 1)


def test_spectral_point_validation():
    p = fp.spectral_point(0.5 + 0.01j, 2)
    assert p.in_domain and p.in_closure and not p.is_real
    assert math.tanh(p.y_c) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        fp.spectral_point(0.99 + 0.1j, 1)
    with pytest.raises(ValueError):
        fp.spectral_point(0.1, 0)


@pytest.mark.property
def test_derivative_identities_random(rng):
    y = rng.uniform(-30, 30, 10_000)
    u, du, d2u = fp.u(y), fp.du(y), fp.d2u(y)
    assert np.max(np.abs(du - (1 - u * u))) < 1e-13
    assert np.max(np.abs(d2u + 2 * u * du)) < 1e-13
    assert np.array_equal(fp.u(-y), -u) and np.array_equal(fp.du(-y), du)
    assert np.max(np.abs(fp.d3u(y) + 2 * (du * du + u * d2u))) < 1e-13


@pytest.mark.property
def test_critical_layer_identities_random(rng):
    y = rng.uniform(-10, 10, 2000)
    c = rng.uniform(-0.99, 0.99, 2000)
    yc = np.array([fp.critical_point(x) for x in c])
    u = fp.u(y)
    assert np.max(np.abs(fp.du(yc) - fp.du(y) - (u + c) * (u - c))) < 1e-12
    ref = np.sinh(np.abs(y - yc)) / (np.cosh(y) * np.cosh(yc))
    assert np.max(np.abs(np.abs(u - c) - ref)) < 1e-12
    v = np.array([fp.u_minus_c(yi, ci) for yi, ci in zip(y[:50], c[:50])])
    assert np.max(np.abs(v - (u[:50] - c[:50]))) < 1e-12


@pytest.mark.property
def test_domain_membership_random(rng):
    for _ in range(200):
        x = rng.uniform(-0.99, 0.99)
        bound = min((1 - x * x) / fp.DEFAULT_CO, fp.DEFAULT_EPS0)
        inside = complex(x, bound * rng.uniform(0.01, 0.99) * rng.choice([-1, 1]))
        outside = complex(x, bound * rng.uniform(1.01, 3.0))
        assert fp.in_domain_O(inside) and not fp.in_domain_O(outside)
