"""Galois-ring arithmetic over Z4 and Kerdock-type code generators.

The quaternary route to low-coherence bipolar dictionaries: build the
Galois ring GR(4, d) = Z4[x]/(h) for odd d, take traces of multiples of
Teichmuller representatives, and Gray-map the resulting Z4 words to bits.
Only what the dictionary builders need is implemented.
"""

from __future__ import annotations

import numpy as np

# Primitive binary polynomials, low-order coefficients first, one per odd
# degree we support (degree d serves the bipolar length 2^(d+1) family).
_PRIMITIVE = {
    3: (1, 1, 0, 1),            # x^3 + x + 1
    5: (1, 0, 1, 0, 0, 1),      # x^5 + x^2 + 1
    7: (1, 1, 0, 0, 0, 0, 0, 1),            # x^7 + x + 1
    9: (1, 0, 0, 0, 1, 0, 0, 0, 0, 1),      # x^9 + x^4 + 1
    11: (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),  # x^11 + x^2 + 1
}


def hensel_lift(f_bits) -> np.ndarray:
    """Graeffe lift of a binary polynomial to Z4: h(x^2) = (-1)^d f(x) f(-x)."""
    d = len(f_bits) - 1
    f = np.asarray(f_bits, dtype=np.int64)
    fneg = f.copy()
    fneg[1::2] = (-fneg[1::2]) % 4
    prod = np.zeros(2 * d + 1, dtype=np.int64)
    for i, a in enumerate(f):
        if a:
            prod[i:i + d + 1] = (prod[i:i + d + 1] + a * fneg) % 4
    h = prod[::2] % 4
    if d % 2 == 1:
        h = (-h) % 4
    if h[-1] != 1:
        raise ValueError("lift is not monic; input polynomial not monic?")
    return h


class GaloisRing4:
    """GR(4, degree): polynomials over Z4 modulo a Hensel-lifted primitive."""

    def __init__(self, degree: int):
        if degree not in _PRIMITIVE:
            raise ValueError(f"no primitive polynomial on file for degree {degree}")
        self.degree = degree
        self.modulus = hensel_lift(_PRIMITIVE[degree])

    def mul(self, a, b):
        d = self.degree
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % 4
        for k in range(len(prod) - 1, d - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for j in range(d):
                    prod[k - d + j] = (prod[k - d + j] - c * self.modulus[j]) % 4
        return tuple(prod[:d])

    def teichmuller(self):
        """{0} followed by the powers of the root of the modulus."""
        d = self.degree
        zero = (0,) * d
        one = (1,) + (0,) * (d - 1)
        xi = (0, 1) + (0,) * (d - 2)
        reps = [zero, one]
        cur = one
        for _ in range(2 ** d - 2):
            cur = self.mul(cur, xi)
            reps.append(cur)
        if self.mul(cur, xi) != one:
            raise RuntimeError("root does not have order 2^d - 1")
        return reps

    def trace(self, z, _cache={}):
        """Trace down to Z4 via the Frobenius a + 2b -> a^2 + 2b^2."""
        key = (self.degree, z)
        if key in _cache:
            return _cache[key]
        d = self.degree
        if not hasattr(self, "_teich_by_residue"):
            self._teich_by_residue = {
                tuple(c % 2 for c in t): t for t in self.teichmuller()
            }
        def frobenius(w):
            a = self._teich_by_residue[tuple(c % 2 for c in w)]
            diff = tuple((x - y) % 4 for x, y in zip(w, a))
            b = self._teich_by_residue[tuple((c // 2) % 2 for c in diff)]
            a2 = self.mul(a, a)
            b2 = self.mul(b, b)
            return tuple((x + 2 * y) % 4 for x, y in zip(a2, b2))
        total = (0,) * d
        w = z
        for _ in range(d):
            total = tuple((x + y) % 4 for x, y in zip(total, w))
            w = frobenius(w)
        if any(total[1:]):
            raise RuntimeError("trace did not land in Z4")
        _cache[key] = total[0]
        return total[0]


def kerdock_generator_rows(degree: int) -> np.ndarray:
    """Z4 generator rows of the trace code: row j holds trace(xi^j * x) over
    the Teichmuller set (zero included), j = 0..degree-1. Shape (degree, 2^degree)."""
    gr = GaloisRing4(degree)
    teich = gr.teichmuller()
    xi_pow = (1,) + (0,) * (degree - 1)
    xi = (0, 1) + (0,) * (degree - 2)
    rows = np.empty((degree, len(teich)), dtype=np.int64)
    for j in range(degree):
        for col, x in enumerate(teich):
            rows[j, col] = gr.trace(gr.mul(xi_pow, x))
        xi_pow = gr.mul(xi_pow, xi)
    return rows


def gray_map(words4: np.ndarray) -> np.ndarray:
    """Gray image of Z4 words: 0->00, 1->01, 2->11, 3->10, bit pairs adjacent."""
    w = np.asarray(words4)
    first = ((w == 2) | (w == 3)).astype(np.uint8)
    second = ((w == 1) | (w == 2)).astype(np.uint8)
    out = np.empty((w.shape[0], 2 * w.shape[1]), dtype=np.uint8)
    out[:, 0::2] = first
    out[:, 1::2] = second
    return out


def kerdock_binary_words(degree: int, antipode_free: bool = True) -> np.ndarray:
    """Binary Kerdock-type words of length 2^(degree+1).

    With ``antipode_free`` the constant offset runs over {0,1} only, which
    picks one word out of each complementary pair; the full code (offset in
    Z4) contains every word together with its complement.
    """
    rows = kerdock_generator_rows(degree)
    n4 = rows.shape[1]
    eps = (0, 1) if antipode_free else (0, 1, 2, 3)
    coeffs = np.indices((4,) * degree).reshape(degree, -1).T  # all Z4 tuples
    base = (coeffs @ rows) % 4                                # (4^degree, n4)
    words4 = (base[:, None, :] + np.asarray(eps)[None, :, None]) % 4
    words4 = words4.reshape(-1, n4)
    return gray_map(words4)


def kerdock_difference_distances(degree: int, antipode_free: bool = True):
    """Distinct pairwise Hamming distances of the binary code, cheaply.

    The Gray map is an isometry from Lee distance, and differences of
    (coefficients, offset) pairs sweep offsets {0, +-1} (all of Z4 when the
    full code is kept), so the distance multiset equals the Lee weights of
    those difference words: no N^2 pair enumeration needed. Returns
    (distinct nonzero distances, count of duplicate codewords).
    """
    rows = kerdock_generator_rows(degree)
    coeffs = np.indices((4,) * degree).reshape(degree, -1).T
    base = (coeffs @ rows) % 4
    offsets = (0, 1, 3) if antipode_free else (0, 1, 2, 3)
    words4 = (base[:, None, :] + np.asarray(offsets)[None, :, None]) % 4
    words4 = words4.reshape(-1, rows.shape[1])
    lee = np.minimum(words4, 4 - words4).sum(axis=1)
    lee = lee[1:]     # the (0, 0) difference is the zero word; drop it
    return np.unique(lee[lee > 0]), int((lee == 0).sum())
