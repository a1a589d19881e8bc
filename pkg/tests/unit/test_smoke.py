def test_version_import():
    import hodgelab

    assert isinstance(hodgelab.__version__, str)
    assert len(hodgelab.__version__) > 0


def test_subpackages_import():
    from hodgelab import grid, linalg, models

    assert grid.build_grid
    assert linalg.GaussianRational
    assert models.builtin_model
