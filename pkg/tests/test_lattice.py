import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfsim.lattice import build_code, commutes, dump_layout, syndrome


@pytest.mark.parametrize("d", range(2, 8))
def test_counts(d):
    lay = build_code(d)
    assert lay.n_data == d * d + (d - 1) ** 2
    assert len(lay.x_stabilizers) == len(lay.z_stabilizers) == d * (d - 1)
    assert lay.n_qubits == (2 * d - 1) ** 2
    assert len(lay.logical_x_support) == len(lay.logical_z_support) == d


@pytest.mark.parametrize("d", [2, 3, 5])
def test_stabilizers_commute(d):
    lay = build_code(d)
    hx, hz = lay.check_matrix("X"), lay.check_matrix("Z")
    assert not ((hx.astype(int) @ hz.T) % 2).any()


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_logicals(d):
    lay = build_code(d)
    lx, lz = lay.logical_mask("X"), lay.logical_mask("Z")
    # each logical commutes with the opposite-type stabilizers but not with its partner
    assert not ((lay.check_matrix("Z") @ lx) % 2).any()
    assert not ((lay.check_matrix("X") @ lz) % 2).any()
    assert int(lx @ lz) % 2 == 1
    # and is not itself a product of stabilizers
    hx = lay.check_matrix("X")
    assert _rank2(np.vstack([hx, lx])) == _rank2(hx) + 1


def _rank2(m):
    m = m.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        piv = [r for r in range(rank, m.shape[0]) if m[r, col]]
        if not piv:
            continue
        m[[rank, piv[0]]] = m[[piv[0], rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def test_stabilizer_weights():
    lay = build_code(5)
    size = lay.size
    for s in lay.x_stabilizers + lay.z_stabilizers:
        r, c = s.coord
        edge = r in (0, size - 1) or c in (0, size - 1)
        assert len(s.support) == (3 if edge else 4)


def test_bad_distance():
    for bad in (1, 0, -3, 2.5, "3"):
        with pytest.raises(ValueError):
            build_code(bad)


def test_layout_cached():
    assert build_code(4) is build_code(4)


def test_commutes():
    assert commutes([0, 1], "X", [1, 2], "Z") is False
    assert commutes([0, 1], "X", [0, 1], "Z") is True
    assert commutes([0], "X", [0], "X") is True
    with pytest.raises(ValueError):
        commutes([0], "Y", [0], "X")


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 5), st.data())
def test_syndrome_linear(d, data):
    lay = build_code(d)
    bits = st.lists(st.integers(0, 1), min_size=lay.n_data, max_size=lay.n_data)
    a = np.array(data.draw(bits), dtype=np.uint8)
    b = np.array(data.draw(bits), dtype=np.uint8)
    for kind in "XZ":
        assert np.array_equal(syndrome(lay, kind, a ^ b), syndrome(lay, kind, a) ^ syndrome(lay, kind, b))


# d=2 worked out by hand on the 3x3 grid
GOLDEN_D2 = """distance 2
data 0 (0,0)
data 1 (0,2)
data 2 (1,1)
data 3 (2,0)
data 4 (2,2)
stabX 0 anc=6 (1,0) N=0 E=2 S=3
stabX 1 anc=7 (1,2) N=1 W=2 S=4
stabZ 0 anc=5 (0,1) W=0 E=1 S=2
stabZ 1 anc=8 (2,1) N=2 W=3 E=4
logicalX 0,1
logicalZ 0,3
"""


def test_dump_golden():
    assert dump_layout(build_code(2)) == GOLDEN_D2
