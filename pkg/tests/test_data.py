import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from comic.data import (
    GeneratorSpec,
    PairDataset,
    X_CAUSES_Y,
    Y_CAUSES_X,
    generate_dataset,
    generate_pair,
    load_pair_file,
    load_tuebingen,
    parse_pairmeta,
    standardize,
    swap_pair,
    write_dataset,
    write_pair_file,
)
from comic.errors import ArgumentError, ParseError

finite_vectors = st.lists(
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
    min_size=2, max_size=40,
).filter(lambda v: max(v) > min(v))


# ---------------------------------------------------------------- standardize


def test_standardize_two_points():
    z, mean, std = standardize(np.array([1.0, 3.0]))
    assert np.array_equal(z, np.array([-1.0, 1.0]))
    assert mean == 2.0
    assert std == 1.0


def test_standardize_three_points():
    z, mean, std = standardize(np.array([2.0, 4.0, 6.0]))
    assert z == approx([-math.sqrt(1.5), 0.0, math.sqrt(1.5)], abs=1e-12)
    assert mean == 4.0
    assert std == approx(math.sqrt(8.0 / 3.0), rel=1e-15)


def test_standardize_idempotent():
    v = np.random.default_rng(0).standard_normal(64)
    z1, _, _ = standardize(v)
    z2, _, _ = standardize(z1)
    assert z2 == approx(z1, abs=1e-12)


def test_standardize_output_moments():
    v = np.random.default_rng(1).uniform(-50, 3, size=333)
    z, _, _ = standardize(v)
    assert abs(z.mean()) < 1e-9
    assert abs(math.sqrt((z * z).mean()) - 1.0) < 1e-9


def test_standardize_degenerate():
    with pytest.raises(ArgumentError, match="degenerate variable"):
        standardize(np.full(10, 3.25))


def test_standardize_rejects_short_or_nonfinite():
    with pytest.raises(ArgumentError):
        standardize(np.array([1.0]))
    with pytest.raises(ArgumentError):
        standardize(np.array([1.0, np.nan]))


@settings(max_examples=60)
@given(finite_vectors, st.integers(-6, 6))
def test_standardize_power_of_two_scale_bit_exact(values, k):
    v = np.asarray(values)
    a = 2.0 ** k
    z1, _, _ = standardize(v)
    z2, _, _ = standardize(a * v)
    assert np.array_equal(z1, z2)


@settings(max_examples=60)
@given(
    st.lists(st.integers(-(2 ** 20), 2 ** 20), min_size=2, max_size=30)
    .filter(lambda v: max(v) > min(v)),
    st.integers(-(2 ** 20), 2 ** 20),
    st.integers(-4, 4),
)
def test_standardize_exact_affine_maps_bit_exact(grid, shift, k):
    # values on a dyadic grid shifted by a dyadic offset: a*v + b incurs no
    # per-element rounding, so the standardized output must be bit-identical
    v = np.asarray(grid, dtype=float) / 1024.0
    b = float(shift) / 1024.0
    a = 2.0 ** k
    z1, _, _ = standardize(v)
    z2, _, _ = standardize(a * v + a * b)
    assert np.array_equal(z1, z2)


well_conditioned = st.lists(
    st.floats(-100, 100, allow_nan=False, allow_infinity=False),
    min_size=2, max_size=40,
).filter(lambda v: max(v) - min(v) >= 0.1)


@settings(max_examples=40)
@given(well_conditioned, st.floats(0.1, 10.0), st.floats(-100, 100))
def test_standardize_general_affine_close(values, a, b):
    # a*v + b rounds elementwise, so only closeness is achievable here; the
    # spread/magnitude bounds keep that rounding from swamping the data
    v = np.asarray(values)
    z1, _, _ = standardize(v)
    z2, _, _ = standardize(a * v + b)
    assert z2 == approx(z1, abs=1e-9)


# ---------------------------------------------------------------- generators


def test_generate_pair_deterministic():
    spec = GeneratorSpec("AN", 3, 50, seed=5)
    p1 = generate_pair(spec, 1)
    p2 = generate_pair(spec, 1)
    assert np.array_equal(p1.x, p2.x)
    assert np.array_equal(p1.y, p2.y)
    assert p1.label == X_CAUSES_Y


def regenerate_f(pair, spec, pair_index=0, which="f"):
    from comic.data import _gp_draw, _sigmoid_draw
    from comic.rng import RngStream

    stream = RngStream(spec.seed).child("generate", spec.family, pair_index)
    if spec.family in ("AN", "LS"):
        return _gp_draw(pair.x, stream.child(which))
    return _sigmoid_draw(stream.child(which))(pair.x)


@pytest.mark.parametrize("family", ["AN", "AN-s"])
def test_additive_residuals_independent_of_cause(family):
    spec = GeneratorSpec(family, 1, 1000, seed=9)
    pair = generate_pair(spec, 0)
    resid = pair.y - regenerate_f(pair, spec)
    rho = np.corrcoef(pair.x, resid)[0, 1]
    assert abs(rho) < 0.1


@pytest.mark.parametrize("family", ["LS", "LS-s"])
def test_location_scale_normalized_residuals_independent(family):
    spec = GeneratorSpec(family, 1, 1000, seed=17)
    pair = generate_pair(spec, 0)
    f = regenerate_f(pair, spec)
    g = np.abs(regenerate_f(pair, spec, which="g")) + 0.3
    resid = (pair.y - f) / g
    rho = np.corrcoef(pair.x, resid)[0, 1]
    assert abs(rho) < 0.1


def test_multiplicative_noise_support():
    spec = GeneratorSpec("MN-U", 1, 1000, seed=13)
    pair = generate_pair(spec, 0)
    ratio = pair.y / regenerate_f(pair, spec)
    assert ratio.min() >= 0.5 - 1e-9
    assert ratio.max() <= 1.5 + 1e-9


def test_location_scale_families_have_positive_scale():
    for family in ("LS", "LS-s"):
        spec = GeneratorSpec(family, 1, 500, seed=3)
        pair = generate_pair(spec, 0)
        assert np.isfinite(pair.y).all()


def test_all_families_pass_self_checks():
    for family in ("AN", "AN-s", "LS", "LS-s", "MN-U"):
        pair = generate_pair(GeneratorSpec(family, 1, 200, seed=21), 0)
        assert pair.label == X_CAUSES_Y
        assert pair.n == 200
        assert np.isfinite(pair.x).all() and np.isfinite(pair.y).all()


def test_gp_jitter_escalation(monkeypatch):
    from comic.data import _gp_draw
    from comic.errors import NumericError
    from comic.rng import RngStream

    real_cholesky = np.linalg.cholesky
    jitters = []

    def flaky(matrix):
        jitters.append(matrix[0, 0] - 1.0)  # kernel diagonal is 1 + jitter
        if len(jitters) < 3:
            raise np.linalg.LinAlgError("not positive definite")
        return real_cholesky(matrix)

    monkeypatch.setattr(np.linalg, "cholesky", flaky)
    x = np.zeros(4)  # identical inputs: kernel is all ones
    draw = _gp_draw(x, RngStream(0).child("gp"))
    assert draw.shape == (4,)
    # escalation multiplies the diagonal jitter by 10 per retry
    assert jitters[1] / jitters[0] == pytest.approx(10.0, rel=1e-6)

    monkeypatch.setattr(
        np.linalg, "cholesky",
        lambda m: (_ for _ in ()).throw(np.linalg.LinAlgError("no"))
    )
    with pytest.raises(NumericError):
        _gp_draw(x, RngStream(0).child("gp"))


def test_generate_dataset_alternates_orientation():
    pairs = generate_dataset(GeneratorSpec("AN-s", 6, 20, seed=1))
    labels = [p.label for p in pairs]
    assert labels == [X_CAUSES_Y, Y_CAUSES_X] * 3


def test_family_name_normalization():
    assert GeneratorSpec("an_s", 1, 10, 0).family == "AN-s"
    assert GeneratorSpec("mn-u", 1, 10, 0).family == "MN-U"
    with pytest.raises(ArgumentError):
        GeneratorSpec("XYZ", 1, 10, 0)


def test_swap_pair_mirrors_label():
    pair = PairDataset(np.array([0.0, 1.0]), np.array([2.0, 3.0]), label=X_CAUSES_Y)
    swapped = swap_pair(pair)
    assert swapped.label == Y_CAUSES_X
    assert np.array_equal(swapped.x, pair.y)
    assert np.array_equal(swapped.y, pair.x)


# ---------------------------------------------------------------- pair files


def test_load_pair_file_basic(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("0 1\n2 3\n")
    pair = load_pair_file(path)
    assert np.array_equal(pair.x, [0.0, 2.0])
    assert np.array_equal(pair.y, [1.0, 3.0])


def test_load_pair_file_header_errors(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("x y\n1 2\n3 4\n")
    with pytest.raises(ParseError, match="line 1"):
        load_pair_file(path)
    pair = load_pair_file(path, skip_header=True)
    assert np.array_equal(pair.x, [1.0, 3.0])


def test_load_pair_file_malformed_row_line_number(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("1 2\n3 oops\n5 6\n")
    with pytest.raises(ParseError, match="line 2"):
        load_pair_file(path)


def test_load_pair_file_multidimensional_rejected(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("1 2 3 4\n5 6 7 8\n")
    with pytest.raises(ArgumentError, match="multidimensional"):
        load_pair_file(path)
    # with explicit 1-wide columns from a meta entry the file is usable
    pair = load_pair_file(path, cause_col=1, effect_col=2)
    assert np.array_equal(pair.x, [1.0, 5.0])
    assert np.array_equal(pair.y, [2.0, 6.0])


def test_load_pair_file_too_short(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("1 2\n")
    with pytest.raises(ParseError):
        load_pair_file(path)


def test_roundtrip_through_text(tmp_path):
    rng = np.random.default_rng(8)
    pair = PairDataset(rng.standard_normal(37), rng.standard_normal(37) * 1e-7)
    path = tmp_path / "pair.txt"
    write_pair_file(path, pair)
    loaded = load_pair_file(path)
    assert np.array_equal(loaded.x, pair.x)
    assert np.array_equal(loaded.y, pair.y)


@settings(max_examples=25)
@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=20))
def test_roundtrip_arbitrary_floats(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "pair.txt"
    pair = PairDataset(np.asarray(values), np.asarray(values[::-1]))
    write_pair_file(path, pair)
    loaded = load_pair_file(path)
    assert np.array_equal(loaded.x, pair.x)
    assert np.array_equal(loaded.y, pair.y)


# ---------------------------------------------------------------- meta + corpus


def test_parse_pairmeta_row(tmp_path):
    meta = tmp_path / "pairmeta.txt"
    meta.write_text("0001 1 1 2 2 1.0\n0002  2 2  1 1  2\n")
    rows = parse_pairmeta(meta)
    assert rows[0].univariate and rows[0].weight == 1.0
    assert rows[1].cause_first == 2 and rows[1].weight == 2.0


def test_parse_pairmeta_malformed(tmp_path):
    meta = tmp_path / "pairmeta.txt"
    meta.write_text("0001 1 1 2\n")
    with pytest.raises(ParseError):
        parse_pairmeta(meta)


def make_corpus(tmp_path):
    (tmp_path / "pair0001.txt").write_text("1 2\n3 4\n5 6\n")
    (tmp_path / "pair0002.txt").write_text("1 2\n3 4\n5 6\n")
    (tmp_path / "pair0003.txt").write_text("1 2 3\n4 5 6\n7 8 9\n")
    (tmp_path / "pairmeta.txt").write_text(
        "0001 1 1 2 2 1.0\n"
        "0002 2 2 1 1 0.5\n"
        "0003 1 2 3 3 1.0\n"  # cause spans two columns: excluded
    )
    return tmp_path


def test_load_tuebingen_convention(tmp_path):
    pairs = load_tuebingen(make_corpus(tmp_path))
    assert [p.id for p in pairs] == ["pair0001", "pair0002"]
    assert pairs[0].label == X_CAUSES_Y and pairs[0].weight == 1.0
    assert pairs[1].label == Y_CAUSES_X and pairs[1].weight == 0.5
    # column order of the file is preserved
    assert np.array_equal(pairs[1].x, [1.0, 3.0, 5.0])


def test_load_tuebingen_missing_meta(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_tuebingen(tmp_path)


def test_load_tuebingen_column_mismatch(tmp_path):
    (tmp_path / "pair0001.txt").write_text("1\n2\n3\n")
    (tmp_path / "pairmeta.txt").write_text("0001 1 1 2 2 1.0\n")
    with pytest.raises(ParseError, match="0001"):
        load_tuebingen(tmp_path)


def test_write_dataset_roundtrip(tmp_path):
    pairs = generate_dataset(GeneratorSpec("LS-s", 4, 25, seed=2))
    names = write_dataset(tmp_path, pairs)
    assert len(names) == 4
    loaded = load_tuebingen(tmp_path)
    assert [p.label for p in loaded] == [p.label for p in pairs]
    for orig, back in zip(pairs, loaded):
        assert np.array_equal(back.x, orig.x)
        assert np.array_equal(back.y, orig.y)
    labels = (tmp_path / "labels.csv").read_text().splitlines()
    assert labels[0] == "id,direction"
    assert labels[1] == f"pair0001,{X_CAUSES_Y}"
    assert labels[2] == f"pair0002,{Y_CAUSES_X}"
