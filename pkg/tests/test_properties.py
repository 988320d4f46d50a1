"""Property-based invariants for the number and belief layers."""

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from nestcast.belief import BeliefXi, _normalize, _predict, xi_init, xi_update
from nestcast.model import build_special_case
from nestcast.numbers import RATIONAL, canonical_key, format_number, parse_number

fractions = st.fractions(min_value=0, max_value=1000, max_denominator=997)


@given(fractions)
def test_format_parse_is_identity(x):
    assert parse_number(format_number(x)) == x


@given(st.lists(fractions, min_size=1, max_size=6))
def test_canonical_key_ignores_representation(ws):
    doubled = [Fraction(2 * w.numerator, 2 * w.denominator) for w in ws]
    assert canonical_key(ws, RATIONAL) == canonical_key(doubled, RATIONAL)


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=2, max_size=8).filter(sum))
def test_normalize_yields_distribution(ws):
    out = _normalize([Fraction(w) for w in ws])
    assert sum(out) == 1
    assert all(w >= 0 for w in out)


@settings(max_examples=50)
@given(
    st.lists(st.integers(min_value=0, max_value=20), min_size=4, max_size=4).filter(sum),
    st.lists(st.integers(min_value=0, max_value=3), min_size=4, max_size=4),
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=3),
)
def test_xi_update_preserves_simplex(weights, c_hat, y, z):
    # noiseless identity channels over the joint alphabet: the update is
    # defined whenever the conditioned event has positive probability
    model = build_special_case(2, 2, 2, nx=4)
    total = sum(weights)
    xi = BeliefXi(weights=tuple(Fraction(w, total) for w in weights))
    pred = _predict(xi.weights, model, 2)
    mass = sum(
        pred[s] * model.channel.inner[c_hat[s]][y] * model.channel.outer[y][z]
        for s in range(4)
    )
    if mass == 0:
        return
    out = xi_update(xi, y, z, c_hat, model, 2)
    assert sum(out.weights) == 1
    assert all(w >= 0 for w in out.weights)


def test_xi_init_is_prior():
    model = build_special_case(2, 3, 1)
    assert xi_init(model).weights == tuple(model.source.initial)
