import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lpboltz.snapshot import read_snapshot, write_snapshot
from lpboltz.state import VelocityGrid


@pytest.mark.parametrize("fmt", ["csv", "bin"])
@given(vals=arrays(float, (8, 8), elements=st.floats(-1e6, 1e6)))
def test_roundtrip(tmp_path_factory, fmt, vals):
    g = VelocityGrid(2, 8, 3.5)
    path = tmp_path_factory.mktemp("s") / f"f.{fmt}"
    write_snapshot(path, g, vals, fmt)
    g2, v2 = read_snapshot(path)
    assert g2 == g
    assert np.array_equal(v2, vals)


def test_size_mismatch(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("N,n,R\n2,8,1.0\n1.0\n2.0\n")
    with pytest.raises(ValueError):
        read_snapshot(p)
