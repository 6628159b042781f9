"""Hypothesis strategies shared by the test modules."""
import numpy as np
from hypothesis import strategies as st

seeds = st.integers(0, 2 ** 32 - 1)
angles = st.floats(0.01, np.pi / 2, allow_nan=False)


@st.composite
def unit3(draw):
    v = np.array(draw(st.lists(st.floats(-1, 1), min_size=3, max_size=3)))
    if np.linalg.norm(v) < 1e-3:
        v = np.array([1.0, 0.0, 0.0])
    return v / np.linalg.norm(v)
