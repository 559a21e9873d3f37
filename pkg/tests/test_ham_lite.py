import math
import random
from fractions import Fraction

import pytest

from dyckstream.gf2e import field_for
from dyckstream.ham_lite import (
    RANDOMNESS_CONST, HamLite, InnerConfig, OuterConfig, OuterState, XorUpdate, ham_lite_decide,
    ham_lite_run, inner_absorb, inner_begin, inner_bucketize, inner_decide, inner_push,
    logical_index, outer_begin, outer_decide, outer_push, parity_probability,
)
from dyckstream.meter import BitSource
from dyckstream.prg import BiasedSeed, YaoSampleSeed, hash_eval, hash_family_new, yao_sample_bit
from dyckstream.testkit import exact_ham


def src(seed=0, label="t"):
    return BitSource.from_seed(seed, label)


def test_inner_config_defaults():
    cfg = InnerConfig(2**14, 8)
    assert cfg.K1 == 8192 and cfg.K2 == 32
    assert cfg.delta == pytest.approx(0.45)
    # u = ceil((2/delta) * (2 + ln(8/gamma) / ln k))
    assert cfg.u == math.ceil((2 / 0.45) * (2 + math.log(64) / math.log(8)))
    assert cfg.ell2 == field_for(math.ceil(cfg.u * math.log2(64))).ell
    for v in (cfg.K1, cfg.K2):
        assert v & (v - 1) == 0
    with pytest.raises(ValueError):
        InnerConfig(100, 4, epsilon=0.5, delta=0.6)


def test_logical_index():
    n = 5
    assert [logical_index(n, i) for i in range(10)] == [0, 1, 2, 3, 4, 4, 3, 2, 1, 0]


def test_bucketize_and_absorb():
    cfg = InnerConfig(64, 4)
    st = inner_begin(cfg, src(1))
    assert inner_bucketize(cfg, st, 3, 0).u == 0
    before = list(st.bucket_acc)
    inner_absorb(cfg, st, XorUpdate(7, 0))
    assert st.bucket_acc == before
    inner_absorb(cfg, st, XorUpdate(7, 1))
    g = hash_eval(st.h2, 7)
    assert st.bucket_acc[g] == cfg.ctx.pow(st.alpha, 7)
    inner_absorb(cfg, st, XorUpdate(7, 1))
    assert st.bucket_acc == before


def test_equal_strings_cancel():
    cfg = InnerConfig(100, 4)
    st = inner_begin(cfg, src(2))
    r = random.Random(2)
    x = [r.getrandbits(1) for _ in range(100)]
    for i, b in enumerate(x + x[::-1]):
        inner_push(cfg, st, i, b)
    assert not any(st.bucket_acc)
    d = inner_decide(cfg, st)
    assert d.accepted and d.F == 0


def test_first_stage_collisions():
    n, k, gamma = 2**10, 2, 1 / 8
    K1 = InnerConfig(n, k, gamma).K1
    assert K1 == 512
    r = random.Random(3)
    s = src(3, "h1")
    bad = 0
    trials = 10_000
    for _ in range(trials):
        h = hash_family_new(2, n, K1, s)
        pts = r.sample(range(n), 4)
        bad += len({hash_eval(h, p) for p in pts}) < 4
    assert bad / trials <= gamma / 4
    assert bad / trials <= 2 * 6 / 512  # union bound, with slack for sampling


def _plant(cfg, st, idx):
    for i in idx:
        inner_absorb(cfg, st, XorUpdate(hash_eval(st.h1, i), 1))


def _spread(cfg, st, n, count, r):
    """Indices with distinct first-stage buckets and distinct groups."""
    out, used_b, used_g = [], set(), set()
    while len(out) < count:
        i = r.randrange(n)
        b = hash_eval(st.h1, i)
        g = hash_eval(st.h2, b)
        if b not in used_b and g not in used_g:
            out.append(i)
            used_b.add(b)
            used_g.add(g)
    return out


def test_inner_decide_examples():
    cfg = InnerConfig(4096, 4, u=3)
    assert cfg.K2 >= 6
    st = inner_begin(cfg, src(4))
    assert inner_decide(cfg, st).F == 0
    r = random.Random(4)
    one = _spread(cfg, st, 4096, 1, r)
    _plant(cfg, st, one)
    d = inner_decide(cfg, st)
    assert d.accepted and d.F == 1
    st = inner_begin(cfg, src(5))
    _plant(cfg, st, _spread(cfg, st, 4096, 6, r))
    d = inner_decide(cfg, st, exact=True)
    assert not d.accepted and d.F == 6
    assert not inner_decide(cfg, st).accepted


def test_inner_exact_on_good_hashes():
    n, k = 2**10, 8
    cfg = InnerConfig(n, k)
    r = random.Random(6)
    s = src(6, "exact")
    checked = 0
    while checked < 1000:
        st = inner_begin(cfg, s)
        d = r.randint(0, k)
        idx = r.sample(range(n), d)
        buckets = [hash_eval(st.h1, i) for i in idx]
        loads = {}
        for b in buckets:
            g = hash_eval(st.h2, b)
            loads[g] = loads.get(g, 0) + 1
        if len(set(buckets)) < d or any(v > cfg.u for v in loads.values()):
            continue
        _plant(cfg, st, idx)
        dec = inner_decide(cfg, st, exact=True)
        assert dec.F == d and dec.accepted
        checked += 1


def test_parity_probability_exact():
    for k in (1, 2, 4, 8, 16):
        for d in (0, 1, k, 2 * k, 3 * k):
            want = (1 - (1 - Fraction(1, 2 * k)) ** d) / 2
            assert parity_probability(k, d) == pytest.approx(float(want), abs=1e-15)


def test_outer_thresholds():
    cfg = OuterConfig(2**14, 8)
    assert cfg.reps == 144
    p1 = (1 - (1 - Fraction(1, 16)) ** 8) / 2
    p2 = (1 - (1 - Fraction(1, 16)) ** 16) / 2
    assert cfg.p1 == pytest.approx(float(p1), abs=1e-12)
    assert cfg.p2 == pytest.approx(float(p2), abs=1e-12)
    assert cfg.tau / cfg.reps == pytest.approx(float(p1 + p2) / 2, abs=1e-12)
    assert cfg.p1 < cfg.tau / cfg.reps < cfg.p2
    # published three-decimal figures, which drift by about 0.003
    assert cfg.p1 == pytest.approx(0.2040, abs=0.005)
    assert cfg.p2 == pytest.approx(0.3248, abs=0.005)
    assert cfg.tau / cfg.reps == pytest.approx(0.2644, abs=0.005)
    # asymptotic limits
    assert abs(cfg.p1 - (1 - math.exp(-0.5)) / 2) < 0.01
    assert abs(cfg.p2 - (1 - math.exp(-1)) / 2) < 0.01


def test_outer_examples():
    n = 64
    cfg = OuterConfig(n, 4, reps=16)
    st = outer_begin(cfg, src(7))
    x = [random.Random(7).getrandbits(1) for _ in range(n)]
    for i, b in enumerate(x + x[::-1]):
        outer_push(cfg, st, i, b)
    assert st.parity == 0
    assert outer_decide(cfg, st).accepted
    # planted single difference: parity_r = z_r(i)
    st = outer_begin(cfg, src(8))
    stream = [0] * (2 * n)
    stream[2 * n - 1 - 10] = 1
    for i, b in enumerate(stream):
        outer_push(cfg, st, i, b)
    want = sum(yao_sample_bit(sd, 10) << r for r, sd in enumerate(st.seeds))
    assert st.parity == want
    # all-zero samples
    zero = BiasedSeed(n, 0.1, 8, 0, 1)
    zs = YaoSampleSeed(n, 4, 4, 0.1, 0.1, 1, zero, zero)
    st = OuterState([zs] * 16)
    for i in range(2 * n):
        outer_push(cfg, st, i, 1)
    assert st.parity == 0
    st.parity = (1 << 16) - 1
    assert not outer_decide(cfg, st).accepted


def test_combiner():
    assert ham_lite_decide(True, True)
    assert not ham_lite_decide(True, False)
    assert not ham_lite_decide(False, True)
    assert not ham_lite_decide(False, False)


def test_fallback_small_k():
    v = ham_lite_run(50, 3, [0] * 50, [0] * 50, src(9))
    assert v.accepted and v.details["fallback"] == "fingerprint"


def test_sparse_feed_matches_dense():
    n, k = 300, 6
    r = random.Random(10)
    x = [r.getrandbits(1) for _ in range(n)]
    y = list(x)
    for i in r.sample(range(n), 5):
        y[i] ^= 1
    stream = x + y[::-1]
    dense = HamLite(n, k, src(10)).feed(stream)
    sparse = HamLite(n, k, src(10))
    sparse.feed_sparse([i for i, b in enumerate(stream[:n]) if b], n)
    sparse.feed_sparse([i for i, b in enumerate(stream[n:]) if b], n)
    assert dense.inner.bucket_acc == sparse.inner.bucket_acc
    assert dense.outer.parity == sparse.outer.parity
    assert dense.decide().to_dict() == sparse.decide().to_dict()


def test_state_depends_only_on_difference():
    # x enters both halves, so (x, x ^ D) sketches exactly like (0, D)
    n, k = 400, 8
    r = random.Random(13)
    for _ in range(5):
        x = [r.getrandbits(1) for _ in range(n)]
        diff = set(r.sample(range(n), r.randint(0, 20)))
        y = [b ^ (i in diff) for i, b in enumerate(x)]
        full = HamLite(n, k, src(13)).feed(x + y[::-1])
        zero = HamLite(n, k, src(13))
        zero.feed_sparse([], n)
        zero.feed_sparse([n - 1 - i for i in diff], n)
        assert full.inner.bucket_acc == zero.inner.bucket_acc
        assert full.outer.parity == zero.outer.parity
        assert full.decide().accepted == zero.decide().accepted


def test_small_end_to_end():
    n, k = 2**10, 6
    r = random.Random(11)
    s = src(11, "e2e")
    for d, want in ((0, True), (3, True), (40, False)):
        x = [r.getrandbits(1) for _ in range(n)]
        y = list(x)
        for i in r.sample(range(n), d):
            y[i] ^= 1
        assert exact_ham(x, y) == d
        assert ham_lite_run(n, k, x, y, s).accepted == want


def test_space_ratio():
    n = 2**16
    small = HamLite(n, 4, src(12)).meter().max_live_bytes
    large = HamLite(n, 16, src(12)).meter().max_live_bytes
    mid = HamLite(n, 8, src(12)).meter().max_live_bytes
    assert small <= mid <= large
    assert large / small <= (16 / 4) ** 1.5 * 1.5


@pytest.mark.parametrize("log_n", [10, 14, 17, 20])
@pytest.mark.parametrize("k", [4, 16])
def test_randomness_logarithmic(log_n, k):
    bits = HamLite(2**log_n, k, src(13)).meter().randomness_bits
    assert bits <= RANDOMNESS_CONST * log_n
