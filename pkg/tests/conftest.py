import os
import sys

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from voa_fusion.lattice import LatticeError, validate_lattice  # noqa: E402


SMALL_GRAMS = [
    [[2]], [[4]], [[6]], [[2, -1], [-1, 2]], [[2, 0], [0, 2]], [[2, 1], [1, 4]], [[4, 2], [2, 4]],
    [[4, 0], [0, 6]], [[2, -1, 0], [-1, 2, -1], [0, -1, 2]], [[4, 2, 0], [2, 4, 2], [0, 2, 4]],
]


@st.composite
def even_lattices(draw, max_rank=3, max_det=60):
    """Random even positive-definite Gram matrices of small determinant."""
    d = draw(st.integers(1, max_rank))
    rows = [[0] * d for _ in range(d)]
    for i in range(d):
        rows[i][i] = draw(st.sampled_from([2, 4, 6]))
        for j in range(i + 1, d):
            rows[i][j] = rows[j][i] = draw(st.integers(-2, 2))
    try:
        L = validate_lattice(rows)
    except LatticeError:
        from hypothesis import assume
        assume(False)
    from hypothesis import assume
    assume(L.det <= max_det)
    return L
