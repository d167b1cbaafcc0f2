import pytest
from hypothesis import given, settings, strategies as st

from vtsim.fleet import HelloMessage, Registry, id_key
from vtsim.geometry import build_tiling
from vtsim.trust import (
    BlockchainMock, CloudMock, CredibilityUnavailable, RankingError, RankingList, Rankings,
    StaticTable, dump_credibility_table, load_credibility_table, ranking_insert, ranking_remove,
    sync_rankings,
)

from . import mobility


def test_insert_examples():
    rl = RankingList(0, [("v1", 0.95), ("v2", 0.5)])
    assert ranking_insert(rl, "v7", 0.9).entries == [("v1", 0.95), ("v7", 0.9), ("v2", 0.5)]
    assert ranking_insert(RankingList(1), "a", 0.3).entries == [("a", 0.3)]
    rl = RankingList(0, [("v2", 0.5)])
    assert ranking_insert(rl, "v9", 0.5).ids == ["v2", "v9"]


def test_insert_errors():
    rl = RankingList(0, [("v2", 0.5)])
    with pytest.raises(RankingError):
        rl.insert("v2", 0.1)
    with pytest.raises(ValueError):
        rl.insert("v3", 1.5)


def test_remove_examples():
    rl = RankingList(0, [("a", 0.9), ("v7", 0.8), ("b", 0.1)])
    assert ranking_remove(rl, "v7").entries == [("a", 0.9), ("b", 0.1)]
    assert ranking_remove(RankingList(0), "x").entries == []


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 15), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))))
def test_replay_matches_sort(ops):
    rl, alive = RankingList(0), {}
    for add, vid, c in ops:
        if add and vid not in alive:
            rl.insert(vid, c)
            alive[vid] = c
        elif not add:
            rl.remove(vid)
            alive.pop(vid, None)
        creds = [e[1] for e in rl.entries]
        assert creds == sorted(creds, reverse=True)
        assert len(set(rl.ids)) == len(rl)
    assert rl.entries == sorted(alive.items(), key=lambda e: (-e[1], id_key(e[0])))


def test_sync_moved_and_refreshed():
    tiling = build_tiling(500, 100, "disc")
    reg, rk = Registry(), Rankings(StaticTable({1: 0.9, 2: 0.4}))
    deltas = [reg.apply(HelloMessage(v, (0, 0, 0), 0, 0.0), tiling) for v in (1, 2)]
    assert sync_rankings(rk, deltas, 0.0, reg) == {0}
    before = rk.snapshot()
    d = reg.apply(HelloMessage(1, (1, 0, 0), 0, 0.1), tiling)
    assert sync_rankings(rk, [d], 0.1, reg) == set()
    assert rk.snapshot() == before
    d = reg.apply(HelloMessage(1, (tiling.side, 0, 0), 0, 0.2), tiling)
    assert sync_rankings(rk, [d], 0.2, reg) == {0, 1}
    assert rk[0].ids == [2] and rk[1].ids == [1]
    assert reg[1].credibility == 0.9


def test_static_and_blockchain_oracles():
    st_ = StaticTable({1: 0.5})
    assert st_.get(1) == st_.get(1) == 0.5
    with pytest.raises(CredibilityUnavailable):
        st_.get(2)
    chain = []
    a, b = BlockchainMock({1: 0.5}, chain=chain), BlockchainMock(chain=chain)
    assert b.get(1) == 0.5
    b.update(1, 0.8, 1.0)
    assert a.get(1) == 0.8


def test_cloud_latency_defers_ranking():
    tiling = build_tiling(500, 100, "disc")
    cloud = CloudMock({1: 0.7}, latency=0.25)
    reg, rk = Registry(), Rankings(cloud)
    d = reg.apply(HelloMessage(1, (0, 0, 0), 0, 0.0), tiling)
    rk.sync([d], 0.0, reg)
    assert 1 in rk.pending and rk.snapshot() == {}
    rk.sync([], 0.2, reg)
    assert rk.snapshot() == {}
    assert rk.sync([], 0.3, reg) == {0}
    assert rk.snapshot() == {0: [(1, 0.7)]}


def test_credibility_table_roundtrip(tmp_path):
    p = tmp_path / "c.csv"
    dump_credibility_table({2: 0.1, "x": 1.0, 1: 0.3333333333333333}, p)
    assert load_credibility_table(p) == {1: 0.3333333333333333, 2: 0.1, "x": 1.0}


@pytest.mark.parametrize("oracle_kind", ["static", "blockchain"])
@pytest.mark.parametrize("seed", [1, 2])
def test_rankings_match_recomputation(seed, oracle_kind):
    v = mobility.run(seed, duration=20.0, oracle_kind=oracle_kind)
    assert v.checks == 21
    assert not v.ranking and not v.expiry and not v.zone
