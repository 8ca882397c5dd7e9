"""Parameter sets shared by several test modules."""

from cibeam import AT_INFINITY, ModeIndices, make_params


# (label, params, modes) covering every admissible case.
def beam_sweep():
    q0_z0, q0_d0 = 1.7, 0.4
    mk = lambda q1: make_params(0.8, q0_z0, q0_d0, q1)
    return [
        ("I a", mk(AT_INFINITY), ModeIndices(-2.5, 2)),
        ("I b", mk(AT_INFINITY), ModeIndices(1.3 + 0.7j, 0)),
        ("I c", mk(AT_INFINITY), ModeIndices(0.5 - 2j, -1)),
        ("II lg", mk(complex(-q0_d0, -q0_z0)), ModeIndices(4, 2)),
        ("II a", mk(0.4 - 0.8j), ModeIndices(2, 1)),
        ("II b", mk(-1.0 - 0.3j), ModeIndices(6, -2)),
        ("III xi=1", mk(complex(-q0_d0, 0)), ModeIndices(-1, 1)),
        ("III a", mk(0.7 + 0j), ModeIndices(0.5 + 1j, 2)),
        ("III b", mk(-0.5 + 0j), ModeIndices(3, 0)),
        ("IV a", mk(0.5 + 3j), ModeIndices(1.3 + 0.4j, 2)),
        ("IV b", mk(2j), ModeIndices(-3.7 + 5j, 1)),
        ("IV c", mk(-0.2 + 0.5j), ModeIndices(-5, -2)),
    ]
