# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for square-free polynomial products.

The state vector is indexed by bitmasks over the operator slots; entry T
holds the coefficient of the monomial using exactly the markers in T.  Each
atom contributes one factor polynomial; multiplying it in drops any monomial
that would repeat a marker, which is how operator nilpotency ((s+-)^2 = 0)
and the classical slot bookkeeping are enforced structurally.
"""


def accumulate_product(double complex[::1] state, double complex[:, ::1] factors):
    """Multiply every factor row into ``state`` in place.

    ``state`` has length 2**n_slots; ``factors`` is (n_atoms, 2**n_slots) with
    constant term at index 0.  Masks are visited in descending order so that
    the strict-submask reads see pre-update values only.
    """
    cdef Py_ssize_t n_atoms = factors.shape[0]
    cdef Py_ssize_t size = factors.shape[1]
    cdef Py_ssize_t mu, t, a
    cdef double complex acc, v
    if size != state.shape[0]:
        raise ValueError("state and factor widths disagree")
    with nogil:
        for mu in range(n_atoms):
            for t in range(size - 1, 0, -1):
                acc = 0
                a = t
                while a != 0:
                    v = factors[mu, a]
                    if v != 0:
                        acc = acc + v * state[t ^ a]
                    a = (a - 1) & t
                state[t] = state[t] + acc
