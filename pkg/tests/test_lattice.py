import pytest
from hypothesis import given, strategies as st

from lulu_dpt.lattice import DOMAIN_ONLY, FACET, FULL, OUTSIDE, ResourceGuardError, ZERO_PADDED, Lattice


def test_facet_interior_neighbors():
    lat = Lattice((3, 3))
    cells, outside = lat.neighbors((1, 1))
    assert set(cells) == {(0, 1), (2, 1), (1, 0), (1, 2)}
    assert not outside


def test_1d_border_cell_touches_outside():
    lat = Lattice((3,), boundary=ZERO_PADDED)
    assert lat.neighbors((0,)) == (((1,),), True)


def test_full_corner():
    lat = Lattice((2, 2), FULL)
    cells, outside = lat.neighbors((0, 0))
    assert set(cells) == {(0, 1), (1, 0), (1, 1)}
    assert outside


def test_domain_only_never_touches_outside():
    lat = Lattice((3,), boundary=DOMAIN_ONLY)
    assert lat.neighbors((0,)) == (((1,),), False)


def test_out_of_window_cell():
    with pytest.raises(ValueError):
        Lattice((3,)).neighbors((3,))


def test_full_only_in_2d():
    with pytest.raises(ValueError):
        Lattice((3,), FULL)
    with pytest.raises(ValueError):
        Lattice((2, 2, 2), FULL)


def test_adjacency_set_examples():
    assert Lattice((5,)).adjacency_set([(2,)]) == (((1,), (3,)), False)
    assert Lattice((3,)).adjacency_set([(0,), (1,), (2,)]) == ((), True)
    adj, outside = Lattice((3, 3)).adjacency_set([(0, 0), (0, 1)])
    # members' neighbors: (0,0)->(1,0),(0,1); (0,1)->(0,0),(0,2),(1,1); minus V
    assert adj == ((0, 2), (1, 0), (1, 1))
    assert outside


def test_adjacency_set_empty():
    with pytest.raises(ValueError):
        Lattice((3,)).adjacency_set([])


def test_is_connected():
    assert Lattice((2, 2)).is_connected([(0, 0), (0, 1)])
    assert not Lattice((2, 2)).is_connected([(0, 0), (1, 1)])
    assert Lattice((2, 2), FULL).is_connected([(0, 0), (1, 1)])
    assert not Lattice((2, 2)).is_connected([])


def test_connected_supersets_examples():
    lat = Lattice((3,), boundary=DOMAIN_ONLY)
    assert lat.connected_supersets((1,), 2) == [((0,), (1,)), ((1,), (2,))]
    assert lat.connected_supersets((1,), 1) == [((1,),)]
    lat = Lattice((2, 2), boundary=DOMAIN_ONLY)
    assert lat.connected_supersets((0, 0), 2) == [((0, 0), (0, 1)), ((0, 0), (1, 0))]


def test_connected_supersets_halo_depth():
    # the 3-set {-2,-1,0} lies two cells deep in the halo
    sets = Lattice((3,)).connected_supersets((0,), 3)
    assert ((-2,), (-1,), (0,)) in sets
    assert len(sets) == 3


def test_resource_guard():
    with pytest.raises(ResourceGuardError):
        Lattice((3,)).connected_supersets((0,), 9)
    with pytest.raises(ResourceGuardError):
        Lattice((10, 10)).connected_supersets((0, 0), 2)


def test_linear_index_round_trip():
    lat = Lattice((2, 3, 4))
    assert [lat.index(lat.cell(i)) for i in range(lat.size)] == list(range(lat.size))
    assert lat.index((1, 2, 3)) == 23


lattices = st.builds(
    lambda shape, b: Lattice(shape, FACET, b),
    st.one_of(
        st.tuples(st.integers(1, 6)),
        st.tuples(st.integers(1, 4), st.integers(1, 4)),
        st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)),
    ),
    st.sampled_from([ZERO_PADDED, DOMAIN_ONLY]),
) | st.builds(
    lambda r, c, b: Lattice((r, c), FULL, b),
    st.integers(1, 4), st.integers(1, 4), st.sampled_from([ZERO_PADDED, DOMAIN_ONLY]),
)


@given(lattices, st.data())
def test_adjacency_properties(lat, data):
    cells = [lat.cell(i) for i in range(lat.size)]
    members = data.draw(st.lists(st.sampled_from(cells), min_size=1, unique=True))
    adj, _ = lat.adjacency_set(members)
    assert not set(adj) & set(members)
    x, y = data.draw(st.sampled_from(cells)), data.draw(st.sampled_from(cells))
    assert (x in lat.adjacency_set([y])[0]) == (y in lat.adjacency_set([x])[0])
    assert x not in lat.neighbors(x)[0]


@given(lattices, st.data())
def test_supersets_are_connected_and_exact(lat, data):
    c = lat.cell(data.draw(st.integers(0, lat.size - 1)))
    size = data.draw(st.integers(1, 3))
    for s in lat.connected_supersets(c, size, halo=False):
        assert len(set(s)) == size and c in s
        assert lat.is_connected(s)


@pytest.mark.parametrize("shape", [(5,), (4, 4), (3, 3, 3)])
def test_interior_facet_degree(shape):
    lat = Lattice(shape)
    centre = tuple(e // 2 for e in shape)
    assert len(lat.neighbors(centre)[0]) == 2 * len(shape)


def test_outside_is_singleton():
    import pickle

    assert pickle.loads(pickle.dumps(OUTSIDE)) is OUTSIDE
