import numpy as np
import pytest

from qsix import io as qio
from qsix.dimension import make_params
from qsix.transforms import spherical_profile


def test_fmt_round_trip():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-300, 300, 200):
        assert float(qio.fmt(x)) == x
    assert qio.fmt(7) == "7" and qio.fmt(np.int64(3)) == "3"
    assert qio.fmt(0.1) == "0.10000000000000001"


def test_profile_round_trip(tmp_path):
    p = make_params(7)
    prof = spherical_profile(np.geomspace(0.1, 10, 25), p, order=4)
    path = qio.write_profile(tmp_path / "p.csv", prof)
    assert path.read_text().splitlines()[0] == "r,u,u1,u2,u3,u4"
    back = qio.read_profile(path, 7)
    np.testing.assert_array_equal(back.grid, prof.grid)
    np.testing.assert_array_equal(back.derivatives(4), prof.derivatives(4))


def test_values_only_profile():
    prof = qio.parse_profile("r,u\n0.5,2\n1,1\n", 7)
    assert prof.order == 0 and prof.jets is None


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("x,u\n1,1\n", 1),
    ("r,u,u2\n1,1,1\n", 1),
    ("r,u\n1,1\n2\n", 3),
    ("r,u\n1,abc\n", 2),
    ("r,u\n1,nan\n", 2),
    ("r,u\n1,-1\n", 2),
    ("r,u\n2,1\n1,1\n", 3),
    ("r,u\n", 2),
])
def test_profile_errors(text, line):
    with pytest.raises(qio.ProfileFormatError) as info:
        qio.parse_profile(text, 7)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_append_csv(tmp_path):
    path = tmp_path / "t.csv"
    qio.append_csv(path, qio.ORBIT_HEADER, [[7, 0.5, 0.1, -0.1, 5.0, -3.0, 1e-10]])
    qio.append_csv(path, qio.ORBIT_HEADER, [[7, 0.4, 0.2, -0.2, 6.0, -2.0, 2e-10]])
    header, data = qio.read_csv(path)
    assert tuple(header) == qio.ORBIT_HEADER and data.shape == (2, 7)
    with pytest.raises(ValueError):
        qio.append_csv(path, qio.POHOZAEV_HEADER, [[7, 0.5, -1, -2, 5]])


def test_render_line_endings():
    text = qio.render(("a", "b"), [[1, 0.5]])
    assert text == "a,b\n1,0.5\n"
