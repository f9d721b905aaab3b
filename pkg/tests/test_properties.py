"""Seeded property suites (100 examples each)."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from soergel_bases.bsmod import HomSolver
from soergel_bases.catbases import compose_tuple, preserves_one_from_left, rex_path
from soergel_bases.cores import Braid, MoveTuple
from soergel_bases.coxeter import alternating

from .test_bsmod import direct_localization

SEEDED = settings(max_examples=100, derandomize=True, deadline=None,
                  suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])

letters = st.integers(0, 1)
bonds = st.sampled_from([4, 5])


@st.composite
def polys(draw, ring, max_half=4):
    half = draw(st.integers(0, max_half))
    mons = ring.monomials(half)
    coeffs = draw(st.lists(st.integers(-5, 5), min_size=len(mons), max_size=len(mons)))
    p = ring.zero
    for c, mono in zip(coeffs, mons):
        if c:
            p = p + ring.const(c) * mono
    return p


def pick(m, ws4, ws5):
    return ws4 if m == 4 else ws5


@SEEDED
@given(data=st.data(), m=bonds, s=letters)
def test_demazure_braid_and_leibniz(data, m, s, ws4, ws5):
    ring = pick(m, ws4, ws5).ring
    f = data.draw(polys(ring))
    g = data.draw(polys(ring))
    r = 1 - s
    assert ring.demazure_word(alternating(s, r, m), f) == ring.demazure_word(alternating(r, s, m), f)
    assert ring.demazure(s, ring.demazure(s, f)).is_zero()
    lhs = ring.demazure(s, ring.mul(f, g))
    rhs = ring.mul(ring.demazure(s, f), g) + ring.mul(ring.reflect(s, f), ring.demazure(s, g))
    assert lhs == rhs


@SEEDED
@given(data=st.data(), m=bonds, word=st.lists(letters, max_size=3))
def test_normal_form_reassembly(data, m, word, ws4, ws5):
    ring, ctx = pick(m, ws4, ws5).ring, pick(m, ws4, ws5).ctx
    M = ctx.module(tuple(word))
    slots = [data.draw(polys(ring, 2)) for _ in range(len(word) + 1)]
    nf = M.normal_form(slots)
    assert M.localize(nf) == direct_localization(ring, M, slots)
    assert all(ring.is_homogeneous(p) for p in nf.values())


def random_step(draw, ctx, word):
    """One generator morphism, tensored with identities, out of ``word``."""
    W = ctx.ring.system
    options = [("alpha", i, s) for i in range(len(word) + 1) for s in (0, 1)] if len(word) <= 2 else []
    options += [("m", i, None) for i in range(len(word))]
    options += [("j", i, None) for i in range(len(word) - 1) if word[i] == word[i + 1]]
    options += [("f", i, m) for i, m, _ in W.braid_windows(word)]
    kind, i, extra = draw(st.sampled_from(options))
    if kind == "alpha":
        g, k = ctx.alpha_gen(extra), 0
    elif kind == "m":
        g, k = ctx.m_gen(word[i]), 1
    elif kind == "j":
        g, k = ctx.j_gen(word[i]), 2
    else:
        g, k = ctx.f_sr(word[i], word[i + 1]), extra
    return ctx.tensor_expand(word[:i], g, word[i + k:])


@SEEDED
@given(data=st.data(), m=bonds, word=st.lists(letters, max_size=3), steps=st.integers(1, 3))
def test_random_composites_are_bimodule_maps(data, m, word, steps, ws4, ws5):
    ctx = pick(m, ws4, ws5).ctx
    g = ctx.identity(tuple(word))
    for _ in range(steps):
        g = random_step(data.draw, ctx, g.tgt.word).compose(g)
    assert ctx.verify_bimodule(g)


@SEEDED
@given(data=st.data(), m=bonds, length=st.integers(1, 5), walk=st.integers(0, 4))
def test_f_composites_preserve_one_from_left(data, m, length, walk, ws4, ws5):
    ws = pick(m, ws4, ws5)
    W = ws.system
    start = tuple(data.draw(st.lists(letters, min_size=length, max_size=length)))
    if not W.is_reduced(start):
        start = alternating(start[0], 1 - start[0], length)
    graph = W.rex_graph(W.element(start))
    moves, cur = [], start
    for _ in range(walk):
        edges = graph.neighbours(cur)
        if not edges:
            break
        e = data.draw(st.sampled_from(edges))
        moves.append(Braid(e.pos, e.window))
        cur = e.target
    moves += rex_path(W, cur, start)
    g = compose_tuple(ws, MoveTuple(start, moves))
    assert preserves_one_from_left(ws, g)


@SEEDED
@given(m=bonds, M=st.lists(letters, max_size=2), N=st.lists(letters, max_size=2), s=letters,
       d=st.integers(-3, 1))
def test_adjunction_dimensions(m, M, N, s, d, ws4, ws5):
    ctx = pick(m, ws4, ws5).ctx
    M, N = tuple(M), tuple(N)
    left = HomSolver(ctx, M + (s,), ctx.module(N))
    right = HomSolver(ctx, M, ctx.module(N + (s,)))
    assert left.dimension(2 * d) == right.dimension(2 * d + 2)
