"""Loop construction and eta quadrature on embedded configurations."""

import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from k2reg import surface as sf
from k2reg._kernels import track_roots, track_roots_pure
from k2reg.config import LineConfiguration
from k2reg.exact import ExactScalar
from k2reg.symbols import (
    K2Symbol,
    RationalMonomial,
    generator_list,
    registry_for,
)

from conftest import cfg_a as cfg_a_, cfg_b as cfg_b_, cfg_c as cfg_c_


def embed(cfg, t=1e-4, **kw):
    return sf.EmbeddedConfig(cfg, t=t, **kw)


# -- kernels -------------------------------------------------------------


def test_trackers_agree():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    u0 = 2.0 + 0.5j
    roots0 = emb.fiber_roots(u0)
    n = 128
    path = u0 + 0.3 * np.exp(-2j * np.pi * np.arange(n + 1) / n)
    path[0] = u0
    got_a, ok_a, _ = track_roots(emb.grid, path, roots0)
    got_b, ok_b, _ = track_roots_pure(emb.grid, path, roots0)
    assert ok_a and ok_b
    assert np.abs(got_a - got_b).max() < 1e-12


def test_tracker_collision_contract_fails_on_coarse_jump():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    bad = emb.branch_points_u()[np.argmin(np.abs(emb.branch_points_u()))]
    path = np.array([bad - 0.1, bad, bad + 0.1], dtype=complex)
    roots0 = emb.fiber_roots(path[0])
    _, ok, idx = track_roots(emb.grid, path, roots0)
    assert not ok
    assert idx >= 0


# -- embedded fibers -------------------------------------------------------


def test_degenerate_slice_quadratic():
    cfg_a = cfg_a_()
    emb = sf.EmbeddedConfig(cfg_a, t=1e-4, theta=0)
    assert not emb.projection_valid
    roots = np.sort_complex(sf.fiber_roots(emb, 1.0))
    assert np.allclose(roots, [-0.01, 0.01], atol=1e-12)


def test_fiber_vieta():
    cfg_c = cfg_c_()
    emb = embed(cfg_c)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = complex(*rng.normal(size=2))
        coeffs = emb.fiber_coeffs(u)
        roots = emb.fiber_roots(u)
        assert len(roots) == cfg_c.d
        assert abs(roots.sum() + coeffs[-2] / coeffs[-1]) < 1e-8 * (
            1 + abs(coeffs[-2] / coeffs[-1]))


def test_fiber_small_t_approaches_lines():
    cfg_b = cfg_b_()
    t = 1e-8
    emb = embed(cfg_b, t=t)
    u = 0.7 + 0.2j
    roots = np.sort_complex(emb.fiber_roots(u))
    targets = []
    for fid, (A, B, C) in emb._sheared.items():
        targets.append(-(A * u + C) / B)
    targets = np.sort_complex(np.array(targets))
    assert np.abs(roots - targets).max() < 10 * np.sqrt(t)


@pytest.mark.parametrize("factory,count", [(cfg_a_, 6), (cfg_b_, 8),
                                            (cfg_c_, 16)])
def test_branch_point_count(factory, count):
    cfg = factory()
    emb = embed(cfg)
    bps = emb.branch_points_u()
    # finite branch points over u number 2g - 2 + 2d for these fixtures
    assert len(bps) == count
    assert 2 * cfg.genus() - 2 + 2 * cfg.d == count


def test_safe_radius_frozen():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    pts = {p.key: p for p in cfg_a.all_intersections()}
    assert emb.safe_radius(pts[(2, 1, 3, 1)]) == pytest.approx(0.25)


def test_safe_parameter_scales_with_radius_squared():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    p = cfg_a.special_set_S()[0]
    s1 = emb.safe_parameter(p, 0.1)
    s2 = emb.safe_parameter(p, 0.2)
    assert s2 == pytest.approx(4 * s1)
    assert 1e-4 < s1


# -- gamma loops ----------------------------------------------------------


def test_gamma_loop_closes():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    assert loop.closed
    assert loop.closure_residual < 1e-8
    assert loop.on_surface_residual < 1e-10
    assert loop.orientation == 1
    assert len(loop.samples()) == loop.density + 1


def test_gamma_loop_all_nodes_all_fixtures():
    for cfg in (cfg_a_(), cfg_b_(), cfg_c_()):
        emb = embed(cfg)
        for p in cfg.all_intersections():
            loop = sf.build_gamma_loop(emb, p)
            assert loop.closure_residual < sf.CLOSURE_TOL
            assert loop.on_surface_residual < sf.SURFACE_TOL


def test_gamma_loop_dense_oracle():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    p = cfg_a.special_set_S()[0]
    coarse = sf.build_gamma_loop(emb, p, density=64)
    dense = sf.build_gamma_loop(emb, p, density=2048)
    elem = generator_list(cfg_a)[0]
    a = sf.pairing(coarse, elem)
    b = sf.pairing(dense, elem)
    assert abs(a - b) < 1e-7
    # same start branch at both densities
    assert abs(coarse.ys[0] - dense.ys[0]) < 1e-10


def test_gamma_loop_rejects_large_t():
    cfg_a = cfg_a_()
    p = cfg_a.special_set_S()[0]
    emb = embed(cfg_a, t=0.25 * 0.25)
    with pytest.raises(sf.LoopBuildError):
        sf.build_gamma_loop(emb, p, radius=0.25)


def test_gamma_loop_rejects_radius_above_safe():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    p = cfg_a.special_set_S()[0]
    with pytest.raises(sf.LoopBuildError):
        sf.build_gamma_loop(emb, p, radius=0.3)


def test_gamma_loop_requires_valid_projection():
    cfg_a = cfg_a_()
    emb = sf.EmbeddedConfig(cfg_a, t=1e-4, theta=0)
    with pytest.raises(sf.LoopBuildError):
        sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])


def test_reversed_loop_reverses_samples():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    rev = loop.reversed()
    assert rev.orientation == -1
    assert np.array_equal(rev.xs, loop.xs[::-1])
    refined = rev.refine()
    assert refined.orientation == -1
    assert refined.density == 2 * loop.density


def test_loop_csv_rows():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0], density=64)
    rows = loop.csv_rows()
    assert len(rows) == loop.density + 1
    assert rows[0][0] == 0
    assert rows[0][1] == pytest.approx(loop.xs[0].real)
    assert all(len(r) == 5 for r in rows)


# -- lift_path -------------------------------------------------------------


def test_lift_constant_path():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    u = 2.0 + 1.0j
    root = emb.fiber_roots(u)[0]
    seg = sf.lift_path(emb, np.full(9, u), root)
    assert np.abs(seg.ys - root).max() < 1e-12


def test_lift_circle_without_branch_points_closes():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    n = 256
    path = 5.0 + 1.0 * np.exp(-2j * np.pi * np.arange(n + 1) / n)
    path[-1] = path[0]
    for root in emb.fiber_roots(path[0]):
        seg = sf.lift_path(emb, path, root)
        assert seg.closed
        assert seg.closure_residual < sf.CLOSURE_TOL


def test_lift_detects_monodromy_around_single_branch_point():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    bps = emb.branch_points_u()
    b0 = bps[np.argmin(np.abs(bps))]
    n = 256
    path = b0 + 0.01 * np.exp(-2j * np.pi * np.arange(n + 1) / n)
    path[-1] = path[0]
    roots = emb.fiber_roots(path[0])
    outcomes = []
    for root in roots:
        seg = sf.lift_path(emb, path, root)
        outcomes.append(seg.closed)
    # exactly the two colliding sheets swap; the third closes
    assert sorted(outcomes) == [False, False, True]


def test_lift_rejects_non_root_start():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    with pytest.raises(sf.EvaluationError):
        sf.lift_path(emb, np.array([2.0, 2.1]), 123.0)


# -- eta quadrature ---------------------------------------------------------


def xy_model_loop(t, r=0.3, density=64):
    def sampler(n):
        xs = r * np.exp(-2j * np.pi * np.arange(n + 1) / n)
        xs[-1] = xs[0]
        return xs, t / xs

    return sf.loop_from_parametrization(sampler, density, label="xy=t")


@pytest.mark.parametrize("t", [1e-2, 1e-4, 1e-6])
def test_eta_local_model(t):
    loop = xy_model_loop(t)
    val = sf.integrate_eta(loop, lambda x, y: x, lambda x, y: y)
    assert abs(val - 2 * np.pi * np.log(t)) < sf.QUAD_TOL * (
        1 + abs(2 * np.pi * np.log(t)))


def test_eta_same_function_is_zero():
    loop = xy_model_loop(1e-4)
    assert sf.integrate_eta(loop, lambda x, y: x, lambda x, y: x) == 0.0


def test_eta_reversed_negates():
    loop = xy_model_loop(1e-4)
    v = sf.integrate_eta(loop, lambda x, y: x, lambda x, y: y)
    w = sf.integrate_eta(loop.reversed(), lambda x, y: x, lambda x, y: y)
    assert abs(v + w) < 1e-12


def test_eta_vanishing_function_rejected():
    loop = xy_model_loop(1e-4)
    with pytest.raises(sf.EvaluationError):
        sf.integrate_eta(loop, lambda x, y: x - 0.3, lambda x, y: y)


def test_eta_unrefinable_loop_raises():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    n = 8
    path = 5.0 + 1.0 * np.exp(-2j * np.pi * np.arange(n + 1) / n)
    seg = sf.lift_path(emb, path, emb.fiber_roots(path[0])[0])
    with pytest.raises(sf.QuadratureError):
        sf.integrate_eta(seg, lambda x, y: x - 5.0, lambda x, y: y)


# -- pairing ----------------------------------------------------------------


def test_pairing_generator_tracks_log_t():
    cfg_a = cfg_a_()
    t = 1e-4
    emb = embed(cfg_a, t=t)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    val = sf.pairing(loop, generator_list(cfg_a)[0])
    assert abs(abs(val / np.log(t)) - 1) < 0.25


def test_pairing_linearity():
    cfg_c = cfg_c_()
    emb = embed(cfg_c)
    loop = sf.build_gamma_loop(emb, cfg_c.special_set_S()[0])
    a, b = generator_list(cfg_c)[:2]
    va = sf.pairing(loop, a)
    vb = sf.pairing(loop, b)
    vab = sf.pairing(loop, a + b)
    assert abs(vab - va - vb) < 2 * sf.QUAD_TOL * (1 + abs(vab))


def test_pairing_empty_symbol():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    assert sf.pairing(loop, K2Symbol.zero()) == 0.0


def test_pairing_reversed_negates():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    elem = generator_list(cfg_a)[0]
    assert sf.pairing(loop, elem) == pytest.approx(
        -sf.pairing(loop.reversed(), elem), abs=1e-10)


def test_pairing_requires_embedding():
    loop = xy_model_loop(1e-4)
    sym = K2Symbol.pair(RationalMonomial(ExactScalar.from_any(1), {"1,1": 1}),
                        RationalMonomial(ExactScalar.from_any(1), {"2,1": 1}))
    with pytest.raises(sf.EvaluationError):
        sf.pairing(loop, sym)


def _random_steinberg_sym(cfg, loop, rng):
    reg = registry_for(cfg)
    ids = [f"{i},{j}" for (i, j) in cfg.line_ids()]
    for _ in range(50):
        fa, fb = rng.choice(len(ids), size=2, replace=False)
        fa, fb = ids[fa], ids[fb]
        c = ExactScalar.from_any(int(rng.integers(2, 6)))
        la = reg.form(fa)
        lb = reg.form(fb)
        nid = reg.register(lb.a - c * la.a, lb.b - c * la.b, lb.c - c * la.c)
        vals = loop.emb.form_values(nid, loop.xs, loop.ys)
        if np.abs(vals).min() > 1e-6:
            f = RationalMonomial(c, {fa: 1, fb: -1})
            one_minus = RationalMonomial(ExactScalar.from_any(1),
                                         {nid: 1, fb: -1})
            return K2Symbol.pair(f, one_minus)
    raise AssertionError("no admissible Steinberg witness found")


@pytest.mark.parametrize("factory", [cfg_a_, cfg_b_])
def test_pairing_steinberg_vanishes(factory):
    cfg = factory()
    emb = embed(cfg)
    loop = sf.build_gamma_loop(emb, cfg.special_set_S()[0])
    rng = np.random.default_rng(11)
    for _ in range(10):
        sym = _random_steinberg_sym(cfg, loop, rng)
        assert abs(sf.pairing(loop, sym)) < 10 * sf.QUAD_TOL


# -- backend flag -----------------------------------------------------------


def test_pure_numpy_env_flag_selects_fallback():
    cfg_a = cfg_a_()
    emb = embed(cfg_a)
    loop = sf.build_gamma_loop(emb, cfg_a.special_set_S()[0])
    here = sf.pairing(loop, generator_list(cfg_a)[0])
    code = textwrap.dedent("""
        import numpy as np
        from k2reg._kernels import active_backend
        from k2reg.config import LineConfiguration
        from k2reg.symbols import generator_list
        from k2reg import surface as sf
        cfg = LineConfiguration([(1, 0, (0,)), (0, 1, (0,)), (-1, 1, (1,))],
                                lam=1)
        emb = sf.EmbeddedConfig(cfg, t=1e-4)
        loop = sf.build_gamma_loop(emb, cfg.special_set_S()[0])
        val = sf.pairing(loop, generator_list(cfg)[0])
        print(active_backend(), repr(val))
    """)
    env = dict(os.environ, K2REG_PURE_NUMPY="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    backend, val = out.stdout.split()
    assert backend == "pure-numpy"
    assert abs(float(val) - here) < 1e-9
