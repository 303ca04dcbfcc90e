"""Hypothesis strategies for Schur sequences."""

import math

from hypothesis import strategies as st

from cmvzeros.schur import validate


def parameter(lo=0.0, hi=0.95):
    return st.builds(
        lambda r, t: r * complex(math.cos(t), math.sin(t)),
        st.floats(lo, hi), st.floats(0, 2 * math.pi),
    )


def quasi_parameter():
    return st.one_of(parameter(0.05, 0.95), parameter(1.05, 2.0))


def sequences(min_size=1, max_size=10, quasi=False):
    elem = quasi_parameter() if quasi else parameter()
    return st.lists(elem, min_size=min_size, max_size=max_size).map(validate)


def points(max_abs=2.0):
    return st.builds(complex, st.floats(-max_abs, max_abs), st.floats(-max_abs, max_abs))
