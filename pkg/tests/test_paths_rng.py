import numpy as np
import pytest

from orderflow.paths import PathGrid, uniform_grid
from orderflow.rng import child_seed, generator, map_paths, path_seeds, seed_sequence


def _draw(seed, size=3):
    return generator(seed).random(size)


def test_uniform_grid():
    g = uniform_grid(2.0, 4)
    assert np.allclose(g, [0, 0.5, 1, 1.5, 2])
    with pytest.raises(ValueError):
        uniform_grid(1.0, 0)
    with pytest.raises(ValueError):
        uniform_grid(0.0, 3)


def test_pathgrid_validation():
    with pytest.raises(ValueError):
        PathGrid([0.0, 1.0, 3.0])
    with pytest.raises(ValueError):
        PathGrid([0.0, 1.0, 2.0], {"x": np.zeros(4)})
    p = PathGrid([0.0, 1.0, 2.0], {"x": np.zeros((5, 3))})
    assert p.dt == 1.0 and p.horizon == 2.0
    q = p.with_series(y=np.ones(3))
    assert q.names() == ["x", "y"] and "y" not in p
    assert p.same_grid(q)


def test_pathgrid_csv_roundtrip(tmp_path):
    t = uniform_grid(1.0, 10)
    p = PathGrid(t, {"a": np.sin(t), "b": np.vstack([t, 2 * t])})
    f = tmp_path / "p.csv"
    p.to_csv(f, path_index=1)
    q = PathGrid.from_csv(f)
    assert q.names() == ["a", "b"]
    assert np.allclose(q["a"], np.sin(t)) and np.allclose(q["b"], 2 * t)
    assert open(f).readline().strip() == "t,a,b"


def test_seed_validation():
    with pytest.raises(ValueError):
        seed_sequence(None)
    with pytest.raises(ValueError):
        seed_sequence(-1)
    with pytest.raises(TypeError):
        seed_sequence("7")


def test_streams_reproducible_and_distinct():
    assert np.array_equal(_draw(5), _draw(5))
    assert not np.array_equal(_draw(5), _draw(6))
    s = path_seeds(5, 3)
    draws = [_draw(x) for x in s]
    assert not np.array_equal(draws[0], draws[1])
    assert np.array_equal(draws[2], _draw(path_seeds(5, 10)[2]))
    c = child_seed(5, 0)
    assert not np.array_equal(_draw(c), draws[0])
    assert np.array_equal(_draw(c), _draw(child_seed(5, 0)))


def test_map_paths_independent_of_workers():
    one = map_paths(_draw, 6, 11, threads=1)
    many = map_paths(_draw, 6, 11, threads=3)
    assert all(np.array_equal(a, b) for a, b in zip(one, many))
