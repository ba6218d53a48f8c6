import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from henonlab import _kernels
from henonlab.radial import symmetric_grid

NP = _kernels.get_backend("numpy")
NB = _kernels.get_backend("numba")
G = symmetric_grid(1e3, 129).nodes


def profile(s1, s2, zeros_at):
    f = G**s1 / (1 + G) ** (s1 - s2)
    f[zeros_at:] = 0.0 if zeros_at < len(G) else f[zeros_at:]
    return f


@settings(max_examples=30, deadline=None)
@given(st.floats(-2.5, 2), st.floats(-6, -2.5), st.integers(60, 200), st.floats(0, 4))
def test_kernels_agree(s1, s2, cut, k):
    f = profile(s1, s2, cut)
    a = NP.potential_nodes(G, f, 3.0, s1, s2, True, True)
    b = NB.potential_nodes(G, f, 3.0, s1, s2, True, True)
    assert np.allclose(a, b, rtol=1e-13, atol=0)
    x = np.geomspace(G[0] / 3, G[-1] * 3, 500)
    assert np.allclose(NP.evaluate(G, f, s1, s2, x), NB.evaluate(G, f, s1, s2, x), rtol=1e-13, atol=0)
    lo = np.ldexp(1.0, np.arange(-9, 10)) / 2
    a = NP.annulus_moments(G, f, s1, s2, lo, 2 * lo, k)
    b = NB.annulus_moments(G, f, s1, s2, lo, 2 * lo, k)
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    assert np.allclose(NP.annulus_max(G, f, s1, s2, lo, 2 * lo), NB.annulus_max(G, f, s1, s2, lo, 2 * lo), rtol=1e-13, atol=0)
    assert np.allclose(NP.segment_moments(G, f, k), NB.segment_moments(G, f, k), rtol=1e-13, atol=0)


def test_degenerate_exponent_piece():
    # s^k f with k + 1 + sigma = 0 is the logarithmic case
    xa, xb = np.array([1.0]), np.array([np.e])
    fa, fb = np.array([1.0]), np.array([np.e**-3])
    for be in (NP, NB):
        assert be.pieces(xa, xb, fa, fb, 2.0)[0] == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("name", ["numpy", "numba"])
def test_env_flag_selects_backend(name):
    env = dict(os.environ, HENONLAB_BACKEND=name)
    out = subprocess.run([sys.executable, "-c", "from henonlab import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == name


def test_solve_same_on_both_backends(ref, grid, monkeypatch):
    from henonlab.picard import solve_minimal

    reps = []
    for be in (NP, NB):
        monkeypatch.setattr(_kernels, "backend", be)
        reps.append(solve_minimal(ref, 5.0, grid))
    assert reps[0].iterations == reps[1].iterations
    assert np.allclose(reps[0].u.values, reps[1].u.values, rtol=1e-12, atol=0)
