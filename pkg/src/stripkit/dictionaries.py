"""Sampling-dictionary constructions: random and deterministic families.

Every builder returns a column-normalized ``Dictionary``; constructions are
pure functions of (parameters, seed), so identical inputs give bit-identical
matrices.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .galoisring import kerdock_binary_words, kerdock_difference_distances

UNIT_COLUMN_TOL = 1e-10

_MAGIC = "SDICT"
_FORMAT_VERSION = 1


class FamilyError(ValueError):
    """Unsupported or invalid construction parameters."""


class DictionaryFormatError(ValueError):
    """Malformed dictionary file."""


@dataclass
class Dictionary:
    """An m x N sampling matrix with unit-norm columns plus build metadata."""

    name: str
    field: str                      # "real" | "complex"
    m: int
    N: int
    entries: np.ndarray             # shape (m, N)
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        self.entries = np.ascontiguousarray(self.entries)
        if self.field not in ("real", "complex"):
            raise FamilyError(f"unknown field {self.field!r}")
        if self.m < 1 or self.N < 1:
            raise FamilyError("m and N must be positive")
        if self.entries.shape != (self.m, self.N):
            raise FamilyError(
                f"entries shape {self.entries.shape} != ({self.m}, {self.N})"
            )
        expected = np.complex128 if self.field == "complex" else np.float64
        if self.entries.dtype != expected:
            self.entries = self.entries.astype(expected)
        dev = self.column_norm_deviation()
        if dev > UNIT_COLUMN_TOL:
            raise FamilyError(f"columns deviate from unit norm by {dev:.3e}")
        self.entries.flags.writeable = False

    def column_norm_deviation(self) -> float:
        return float(np.abs(np.linalg.norm(self.entries, axis=0) - 1.0).max())

    def gram(self) -> np.ndarray:
        return self.entries.conj().T @ self.entries


@dataclass
class BinaryCode:
    """A set of N distinct binary words of length m (rows of ``words``)."""

    m: int
    N: int
    words: np.ndarray                       # (N, m) uint8 in {0,1}
    generator: Optional[np.ndarray] = None  # (m, l) uint8; code = {G u : u in F2^l}

    def __post_init__(self):
        self.words = np.ascontiguousarray(self.words, dtype=np.uint8)
        if self.words.shape != (self.N, self.m):
            raise FamilyError(f"words shape {self.words.shape} != ({self.N}, {self.m})")
        if self.words.size and self.words.max() > 1:
            raise FamilyError("words must be 0/1")
        if len(np.unique(self.words, axis=0)) != self.N:
            raise FamilyError("codewords are not distinct")
        if self.generator is not None:
            self.generator = np.ascontiguousarray(self.generator, dtype=np.uint8)
            span = span_of_generator(self.generator)
            if not _same_word_set(span, self.words):
                raise FamilyError("words do not match the span of the generator")


def span_of_generator(generator: np.ndarray) -> np.ndarray:
    """All 2^l combinations G @ u mod 2 of the generator columns, as rows."""
    g = np.asarray(generator, dtype=np.uint8)
    m, l = g.shape
    coeffs = np.indices((2,) * l).reshape(l, -1).T.astype(np.uint8)
    return (coeffs @ g.T) % 2


def _same_word_set(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape:
        return False
    aa = np.unique(a, axis=0)
    bb = np.unique(b, axis=0)
    return aa.shape == bb.shape and bool(np.all(aa == bb))


def _normalize_columns(entries: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(entries, axis=0)
    if np.any(norms == 0):
        raise FamilyError("zero column cannot be normalized")
    return entries / norms


def build_gaussian(m: int, N: int, seed: int) -> Dictionary:
    """I.i.d. standard-normal entries, each column rescaled to unit norm."""
    if m < 1 or N < 1:
        raise FamilyError("m and N must be positive")
    rng = np.random.default_rng(seed)
    entries = _normalize_columns(rng.standard_normal((m, N)))
    return Dictionary(
        name=f"gaussian(m={m},N={N},seed={seed})",
        field="real", m=m, N=N, entries=entries,
        params={"family": "gaussian"}, seed=seed,
    )


def build_random_harmonic(m: int, N: int, seed: int, max_retries: int = 64) -> Dictionary:
    """Bernoulli(m/N) row subsample of the N x N DFT, columns renormalized.

    The realized row count |M| is recorded in params and drives the
    closed-form mean-square coherence (N-|M|)/((N-1)|M|).
    """
    if not (1 <= m <= N):
        raise FamilyError("need 1 <= m <= N")
    rng = np.random.default_rng(seed)
    rows = np.array([], dtype=np.int64)
    for _ in range(max_retries):
        mask = rng.random(N) < (m / N)
        if mask.any():
            rows = np.flatnonzero(mask)
            break
    else:
        raise FamilyError(f"empty row set after {max_retries} retries")
    j = np.arange(N)
    # row r of the DFT evaluated at all columns, then unit-column scaling
    phases = np.exp(2j * np.pi * np.outer(rows, j) / N)
    entries = phases / np.sqrt(len(rows))
    return Dictionary(
        name=f"harmonic(N={N},target_m={m},seed={seed})",
        field="complex", m=len(rows), N=N, entries=entries,
        params={"family": "harmonic", "target_m": m, "rows_selected": len(rows)},
        seed=seed,
    )


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, int(n ** 0.5) + 1):
        if n % p == 0:
            return False
    return True


def build_chirp(m: int) -> Dictionary:
    """m x m^2 chirp dictionary, entries exp(2 pi i (b t^2 + a t)/m)/sqrt(m).

    Column index a*m + b carries linear rate a and quadratic rate b; for
    prime m > 2 every cross-rate pair has coherence exactly 1/sqrt(m).
    """
    if not _is_prime(m):
        raise FamilyError(f"chirp needs prime m, got {m}")
    t = np.arange(m)
    a = np.arange(m)
    b = np.arange(m)
    # exponent[t, a, b] = b t^2 + a t
    expo = (np.multiply.outer(t ** 2, b)[:, None, :] + np.multiply.outer(t, a)[:, :, None]) % m
    entries = np.exp(2j * np.pi * expo / m).reshape(m, m * m) / np.sqrt(m)
    return Dictionary(
        name=f"chirp(m={m})", field="complex", m=m, N=m * m,
        entries=entries, params={"family": "chirp"},
    )


def build_etf_paley(q: int) -> Dictionary:
    """Real equiangular tight frame of size ((q+1)/2) x (q+1) from the Paley
    conference matrix, q prime with q = 1 mod 4."""
    if not _is_prime(q) or q % 4 != 1:
        raise FamilyError(f"need prime q = 1 mod 4, got {q}")
    residues = np.zeros(q, dtype=np.int64)
    residues[np.unique((np.arange(1, q) ** 2) % q)] = 1
    chi = np.where(residues == 1, 1.0, -1.0)
    chi[0] = 0.0
    n = q + 1
    conf = np.zeros((n, n))
    conf[0, 1:] = 1.0
    conf[1:, 0] = 1.0
    diff = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
    conf[1:, 1:] = chi[diff]
    gram = np.eye(n) + conf / np.sqrt(q)
    vals, vecs = np.linalg.eigh(gram)
    m = n // 2
    top = vals[-m:]
    if top.min() < 1e-8:
        raise FamilyError("conference-matrix Gram factorization failed")
    entries = (vecs[:, -m:] * np.sqrt(top)).T
    entries = _normalize_columns(entries)  # absorb float roundoff
    return Dictionary(
        name=f"etf_paley(q={q})", field="real", m=m, N=n,
        entries=entries, params={"family": "etf_paley", "q": q},
    )


def from_binary_code(code: BinaryCode, name: str = "code") -> Dictionary:
    """Bipolar image of a binary code: bit 0 -> +1/sqrt(m), bit 1 -> -1/sqrt(m)."""
    if code.N < 1:
        raise FamilyError("empty code")
    entries = (1.0 - 2.0 * code.words.astype(np.float64)).T / np.sqrt(code.m)
    return Dictionary(
        name=name, field="real", m=code.m, N=code.N, entries=entries,
        params={"family": "binary_code"},
    )


def delsarte_goethals_code(s: int, r: int = 0) -> BinaryCode:
    """Kerdock-type binary code behind the DG(s, r=0) dictionary.

    Length 2^(2s+2), one representative per complementary pair (the offset
    coordinate runs over {0,1} instead of Z4), so N = 2^(4s+3) and all
    pairwise distances sit in the band m/2 +- sqrt(m)/2.
    """
    if s < 1:
        raise FamilyError("need s >= 1")
    if r != 0:
        raise FamilyError(
            f"(s={s}, r={r}) unsupported: only r=0 is constructed; supply a "
            "precomputed code for larger r"
        )
    words = kerdock_binary_words(2 * s + 1, antipode_free=True)
    m = words.shape[1]
    return BinaryCode(m=m, N=words.shape[0], words=words)


def build_delsarte_goethals(s: int, r: int = 0,
                            code: Optional[BinaryCode] = None) -> Dictionary:
    """Bipolar Kerdock-family dictionary: m = 2^(2s+2), coherence 2^r/sqrt(m).

    Only r = 0 is constructed here. Larger r is contract-only: pass a
    precomputed ``code`` and it is validated against the family contract
    (length 2^(2s+2), coherence at most 2^r/sqrt(m)).
    """
    if s < 1:
        raise FamilyError("need s >= 1")
    if not (0 <= r <= s - 1) and r != 0:
        raise FamilyError(f"(s={s}, r={r}) outside the family range")
    m = 2 ** (2 * s + 2)
    mu_bound = 2 ** r / np.sqrt(m) + 1e-12
    if code is None:
        code = delsarte_goethals_code(s, r)
        # exact contract check through the group structure: distances are the
        # Lee weights of difference words, cheap at any size
        distances, dupes = kerdock_difference_distances(2 * s + 1)
        if dupes:
            raise FamilyError("construction produced duplicate codewords")
        mu = np.abs(1.0 - 2.0 * distances / m).max()
    else:
        if code.N > 4096:
            raise FamilyError(
                "supplied code too large for pairwise contract validation")
        bits = code.words.astype(np.int16)
        mu = 0.0
        for i in range(code.N - 1):
            dist = (bits[i + 1:] != bits[i]).sum(axis=1)
            mu = max(mu, float(np.abs(1.0 - 2.0 * dist / code.m).max()))
    if code.m != m:
        raise FamilyError(f"code length {code.m} != 2^(2s+2) = {m}")
    if mu > mu_bound:
        raise FamilyError(f"code violates the coherence contract: mu={mu:.4f}")
    d = from_binary_code(code, name=f"delsarte_goethals(s={s},r={r})")
    d.params.update({"family": "delsarte_goethals", "s": s, "r": r,
                     "antipode_free": True})
    return d


def realify(d: Dictionary) -> Dictionary:
    """Stack real and imaginary parts: complex m x N -> real 2m x N.

    Column norms are preserved exactly and the new Gram is the real part of
    the old one, so coherence never increases.
    """
    if d.field != "complex":
        raise FamilyError("realify expects a complex dictionary")
    entries = np.vstack([d.entries.real, d.entries.imag])
    return Dictionary(
        name=f"realified({d.name})", field="real", m=2 * d.m, N=d.N,
        entries=entries, params=dict(d.params, realified=True), seed=d.seed,
    )


# ---------------------------------------------------------------------------
# serialization

def save_dictionary(d: Dictionary, path) -> None:
    """Write the line-oriented header plus raw little-endian float64 payload."""
    lines = [f"{_MAGIC} {_FORMAT_VERSION}", f"field={d.field}", f"m={d.m}",
             f"N={d.N}", f"name={d.name}"]
    if d.seed is not None:
        lines.append(f"seed={d.seed}")
    for key in sorted(d.params):
        lines.append(f"param.{key}={json.dumps(d.params[key])}")
    lines.append("data")
    header = ("\n".join(lines) + "\n").encode("utf-8")
    if d.field == "complex":
        flat = np.empty(2 * d.m * d.N)
        flat[0::2] = d.entries.real.ravel()
        flat[1::2] = d.entries.imag.ravel()
    else:
        flat = d.entries.ravel()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def load_dictionary(path) -> Dictionary:
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        # anchored at a line start so a name ending in "data" cannot match
        head_end = blob.index(b"\ndata\n") + len(b"\ndata\n")
    except ValueError:
        raise DictionaryFormatError("missing data marker")
    header = blob[:head_end].decode("utf-8").splitlines()
    if not header or not header[0].startswith(_MAGIC):
        raise DictionaryFormatError("bad magic string")
    version = int(header[0].split()[1])
    if version != _FORMAT_VERSION:
        raise DictionaryFormatError(f"unsupported format version {version}")
    fields: dict = {"params": {}}
    for line in header[1:-1]:
        key, _, value = line.partition("=")
        if key.startswith("param."):
            fields["params"][key[len("param."):]] = json.loads(value)
        else:
            fields[key] = value
    try:
        fld = fields["field"]
        m = int(fields["m"])
        N = int(fields["N"])
    except KeyError as exc:
        raise DictionaryFormatError(f"missing header key {exc}")
    payload = np.frombuffer(blob[head_end:], dtype="<f8")
    expect = m * N * (2 if fld == "complex" else 1)
    if payload.size != expect:
        raise DictionaryFormatError(
            f"payload holds {payload.size} doubles, expected {expect}"
        )
    if fld == "complex":
        entries = (payload[0::2] + 1j * payload[1::2]).reshape(m, N)
    else:
        entries = payload.reshape(m, N).copy()
    dev = float(np.abs(np.linalg.norm(entries, axis=0) - 1.0).max())
    if dev > UNIT_COLUMN_TOL:
        warnings.warn(
            f"loaded columns deviate from unit norm by {dev:.3e}; renormalizing",
            stacklevel=2,
        )
        entries = _normalize_columns(entries)
    seed = int(fields["seed"]) if "seed" in fields else None
    return Dictionary(name=fields.get("name", "loaded"), field=fld, m=m, N=N,
                      entries=entries, params=fields["params"], seed=seed)


def export_csv(d: Dictionary, path) -> None:
    """One CSV row per matrix row; complex entries rendered as a+bi."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in d.entries:
            if d.field == "complex":
                cells = [f"{z.real:.17g}{z.imag:+.17g}i" for z in row]
            else:
                cells = [f"{x:.17g}" for x in row]
            fh.write(",".join(cells) + "\n")


_FACTORIES = {
    "gaussian": lambda args: build_gaussian(args["m"], args["N"], args.get("seed", 0)),
    "harmonic": lambda args: build_random_harmonic(args["m"], args["N"], args.get("seed", 0)),
    "chirp": lambda args: build_chirp(args["m"]),
    "etf": lambda args: build_etf_paley(args["q"]),
    "dg": lambda args: build_delsarte_goethals(args["s"], args.get("r", 0)),
}


def build_family(family: str, **args) -> Dictionary:
    """Dispatch table used by the command line."""
    if family not in _FACTORIES:
        raise FamilyError(f"unknown family {family!r}; pick from {sorted(_FACTORIES)}")
    try:
        return _FACTORIES[family](args)
    except KeyError as exc:
        raise FamilyError(f"family {family!r} is missing parameter {exc}")
