import pytest
from hypothesis import given, strategies as st

from helpers import multilist_model_check
from regbg.idpool import NIL, IdentifiersExhausted, MultiList, OneList, PoolUsageError, TwoLists


def test_add_prepends_and_refuses_members():
    ml = MultiList(2, 10)
    assert ml.add(0, 5)
    assert ml.to_list(0) == [5]
    assert not ml.add(1, 5)
    assert ml.to_list(0) == [5] and ml.to_list(1) == []
    assert ml.add(0, 3)
    assert ml.to_list(0) == [3, 5]


def test_remove():
    ml = MultiList(1, 10)
    for v in (7, 5, 3):
        ml.add(0, v)
    assert ml.remove(5)
    assert ml.to_list(0) == [3, 7]
    assert ml.succ[3] == 7 and ml.pred[7] == 3
    assert ml.remove(3)
    assert ml.to_list(0) == [7]
    assert not ml.remove(3)
    assert (ml.pred[3], ml.succ[3]) == (0, 0)


def test_contains_value_zero():
    ml = MultiList(1, 4)
    assert not ml.contains(0)
    ml.add(0, 0)
    assert ml.contains(0)
    assert ml.to_list(0) == [0]
    ml.remove(0)
    assert not ml.contains(0)


def test_contains():
    ml = MultiList(2, 10)
    assert not ml.contains(4)
    ml.add(0, 5)
    assert ml.contains(5)
    ml.remove(5)
    assert not ml.contains(5)


def test_iter_survives_removal_of_current():
    ml = MultiList(1, 10)
    for v in (7, 5, 3):
        ml.add(0, v)
    seen = []
    for v in ml.iter(0):
        seen.append(v)
        if v == 5:
            ml.remove(5)
            ml.add(0, 9)   # prepended, not visited by this walk
    assert seen == [3, 5, 7]
    assert ml.to_list(0) == [9, 3, 7]
    assert list(MultiList(3, 3).iter(2)) == []


def test_range_errors():
    ml = MultiList(2, 10)
    with pytest.raises(PoolUsageError):
        ml.add(2, 0)
    with pytest.raises(PoolUsageError):
        ml.add(0, 10)
    with pytest.raises(PoolUsageError):
        ml.remove(-1)
    with pytest.raises(PoolUsageError):
        MultiList(0, 5)


def test_head_and_has_two():
    ml = MultiList(1, 5)
    assert ml.head(0) == NIL and ml.is_empty(0)
    ml.add(0, 1)
    assert not ml.has_two(0)
    ml.add(0, 2)
    assert ml.has_two(0) and ml.head(0) == 2


def test_one_list():
    ol = OneList(6)
    assert ol.is_empty()
    ol.add(4)
    ol.add(1)
    assert ol.to_list() == [1, 4]
    assert ol.head() == 1


def test_two_lists_acquire_release():
    tl = TwoLists(4)
    v = tl.acquire()
    assert 0 <= v < 4 and tl.in_use(v)
    assert tl.acquire(2) == 2
    with pytest.raises(PoolUsageError):
        tl.acquire(2)
    tl.release(2)
    assert not tl.in_use(2)
    with pytest.raises(PoolUsageError):
        tl.release(2)


def test_two_lists_exhaustion_and_reuse():
    tl = TwoLists(4)
    for _ in range(4):
        tl.acquire()
    with pytest.raises(IdentifiersExhausted):
        tl.acquire()
    tl.release(1)
    assert tl.acquire() == 1
    assert tl.count_in_use() == 4


def test_two_lists_start_all_free():
    tl = TwoLists(5)
    assert tl.to_list(1) == [0, 1, 2, 3, 4]
    assert tl.to_list(0) == []
    assert [tl.acquire() for _ in range(3)] == [0, 1, 2]
    assert sorted(tl.in_use_ids()) == [0, 1, 2]


def test_model_check_small():
    assert multilist_model_check(20_000, seed=1) == 0


@given(st.lists(st.tuples(st.sampled_from("ar"), st.integers(0, 3), st.integers(0, 15)), max_size=200))
def test_lists_partition_values(ops):
    ml = MultiList(4, 16)
    for op, i, v in ops:
        if op == "a":
            ml.add(i, v)
        else:
            ml.remove(v)
    members = [v for i in range(4) for v in ml.to_list(i)]
    assert len(members) == len(set(members))
    assert set(members) == {v for v in range(16) if ml.contains(v)}
    for i in range(4):
        chain = ml.to_list(i)
        for a, b in zip(chain, chain[1:]):
            assert ml.succ[a] == b and ml.pred[b] == a
