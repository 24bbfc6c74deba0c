"""Channel models: DMCs and finite-state channels over finite alphabets.

A DMC is a stochastic matrix ``w[x, y]``.  A finite-state channel (FSC) is a
kernel ``p(y, s | x, s_prev)`` stored as ``kernel[s_prev, x, y, s]``; the
multi-letter output law follows from the forward recursion over the state.

All channel objects are immutable after construction and safe to share
read-only across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, ConfigError, DomainError

STOCHASTIC_TOL = 1e-12


def _normalize_rows(arr, axis, what):
    """Normalize along `axis` when row sums are within tolerance, else reject."""
    sums = arr.sum(axis=axis, keepdims=True)
    if np.any(arr < 0):
        raise DomainError(f"{what}: negative probability entry")
    if np.any(np.abs(sums - 1.0) > STOCHASTIC_TOL * np.maximum(1.0, np.abs(sums))):
        raise DomainError(f"{what}: rows do not sum to 1 within {STOCHASTIC_TOL}")
    return arr / sums


def as_prob_vector(q, size=None):
    """Validate and normalize a probability vector.

    Accepts array-likes or :class:`InputDistribution`; returns a read-only
    float64 array.
    """
    q = np.asarray(getattr(q, "q", q), dtype=float)
    if q.ndim != 1:
        raise DomainError("probability vector must be one-dimensional")
    if size is not None and q.shape[0] != size:
        raise DomainError(f"probability vector has length {q.shape[0]}, expected {size}")
    if np.any(q < 0):
        raise DomainError("probability vector has a negative entry")
    s = q.sum()
    if abs(s - 1.0) > STOCHASTIC_TOL * max(1.0, abs(s)):
        raise DomainError(f"probability vector sums to {s}, not 1")
    out = q / s
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class InputDistribution:
    """Probability vector Q over the input alphabet."""

    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", as_prob_vector(self.q))

    @property
    def size(self):
        return self.q.shape[0]


@dataclass(frozen=True)
class Dmc:
    """Single-letter stochastic matrix W(y|x), shape (input_size, output_size)."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 2:
            raise DomainError("DMC matrix must be two-dimensional")
        if w.shape[0] < 2 or w.shape[1] < 2:
            raise DomainError("DMC needs input_size >= 2 and output_size >= 2")
        w = _normalize_rows(w, axis=1, what="DMC")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def input_size(self):
        return self.w.shape[0]

    @property
    def output_size(self):
        return self.w.shape[1]


@dataclass(frozen=True)
class Fsc:
    """Finite-state channel kernel p(y, s | x, s_prev).

    ``kernel[s_prev, x, y, s]`` with shape (A, input_size, output_size, A).
    For every (s_prev, x) the slice over (y, s) sums to one.
    """

    kernel: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.ndim != 4 or k.shape[0] != k.shape[3]:
            raise DomainError("FSC kernel must have shape (A, X, Y, A)")
        if np.any(k < 0):
            raise DomainError("FSC kernel has a negative entry")
        flat = k.reshape(k.shape[0], k.shape[1], -1)
        flat = _normalize_rows(flat, axis=2, what="FSC kernel")
        k = flat.reshape(k.shape)
        k.flags.writeable = False
        object.__setattr__(self, "kernel", k)

    @property
    def num_states(self):
        return self.kernel.shape[0]

    @property
    def input_size(self):
        return self.kernel.shape[1]

    @property
    def output_size(self):
        return self.kernel.shape[2]

    @cached_property
    def state_revealing(self) -> bool:
        """True when every output symbol pins down the new state.

        Equivalently the per-state output sets are disjoint, so the receiver
        can reconstruct the state sequence from (y, s0).
        """
        support = self.kernel.sum(axis=(0, 1)) > 0.0  # (y, s)
        return bool(np.all(support.sum(axis=1) <= 1))


def make_bsc(p: float) -> Dmc:
    """Binary symmetric channel with crossover probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"BSC crossover probability must be in [0, 1], got {p}")
    return Dmc(np.array([[1.0 - p, p], [p, 1.0 - p]]))


def make_two_state_bsc_fsc(q: float, p0: float, p1: float, state_revealing: bool = False) -> Fsc:
    """Two-state channel: a BSC whose crossover is set by the previous state.

    The state flips with probability ``q`` independently of input and output;
    the output at time t is a BSC with crossover ``p0`` or ``p1`` according to
    the state at t-1.  With ``state_revealing`` the per-step output carries the
    new state (output symbol ``y = 2*s + bit``), giving disjoint output sets
    per state so the receiver can track the state sequence from (y, s0).
    """
    for name, v in (("q", q), ("p0", p0), ("p1", p1)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name} must be in [0, 1], got {v}")
    trans = np.array([[1.0 - q, q], [q, 1.0 - q]])
    cross = [p0, p1]
    ny = 4 if state_revealing else 2
    kernel = np.zeros((2, 2, ny, 2))
    for sp in range(2):
        bsc = np.array([[1.0 - cross[sp], cross[sp]], [cross[sp], 1.0 - cross[sp]]])
        for x in range(2):
            for b in range(2):
                for s in range(2):
                    y = 2 * s + b if state_revealing else b
                    kernel[sp, x, y, s] += trans[sp, s] * bsc[x, b]
    return Fsc(kernel)


def bhattacharyya(dmc: Dmc, x: int, x2: int) -> float:
    """Bhattacharyya coefficient Z(x, x') = sum_y sqrt(W(y|x) W(y|x'))."""
    if not (0 <= x < dmc.input_size and 0 <= x2 < dmc.input_size):
        raise DomainError("symbol index out of range")
    return float(np.sqrt(dmc.w[x] * dmc.w[x2]).sum())


def bhattacharyya_matrix(dmc: Dmc) -> np.ndarray:
    """All pairwise Bhattacharyya coefficients as an (X, X) matrix."""
    sq = np.sqrt(dmc.w)
    return sq @ sq.T


def _check_sequence(fsc, x, name="input"):
    x = np.asarray(x, dtype=int)
    if x.ndim != 1 or x.shape[0] < 1:
        raise DomainError(f"{name} sequence must be non-empty and one-dimensional")
    if np.any(x < 0) or np.any(x >= (fsc.input_size if name == "input" else fsc.output_size)):
        raise DomainError(f"{name} symbol out of range")
    return x


def fsc_joint_output(fsc: Fsc, x, s0: int, max_outputs: int = 4096) -> np.ndarray:
    """Joint table p_n(y, s_n | x, s0) from the forward state recursion.

    Returns an array of shape (output_size**n, A); the y axis indexes output
    sequences big-endian (first symbol most significant).  Summing over the
    state axis gives W^n(y | x, s0).
    """
    x = _check_sequence(fsc, x)
    n = x.shape[0]
    if fsc.output_size**n > max_outputs:
        raise CapacityError(
            f"output enumeration {fsc.output_size}^{n} exceeds budget {max_outputs}"
        )
    if not 0 <= s0 < fsc.num_states:
        raise DomainError("initial state out of range")
    a = fsc.num_states
    table = np.zeros((1, a))
    table[0, s0] = 1.0
    for xt in x:
        # table[y_prefix, s_prev] -> (y_prefix, y_t, s)
        table = np.einsum("ps,sut->put", table, fsc.kernel[:, xt, :, :]).reshape(-1, a)
    return table


def fsc_avg_likelihood(fsc: Fsc, x, y, max_outputs: int = 4096) -> float:
    """Initial-state-averaged likelihood (1/A) sum_s0 W^n(y | x, s0)."""
    x = _check_sequence(fsc, x)
    y = _check_sequence(fsc, y, name="output")
    if x.shape[0] != y.shape[0]:
        raise DomainError("input and output sequences must have equal length")
    # forward recursion over the single y sequence; no enumeration needed
    a = fsc.num_states
    alpha = np.full(a, 1.0 / a)  # mass over s_prev, summed over s0 weights
    for xt, yt in zip(x, y):
        alpha = alpha @ fsc.kernel[:, xt, yt, :]
    return float(alpha.sum())


# ---------------------------------------------------------------------------
# channel spec files
# ---------------------------------------------------------------------------
#
# Structured text, one `key: value` pair per line; `matrix:`/`kernel:` start a
# block of whitespace-separated probabilities read row-major.  DMC entries are
# W(y|x) rows; FSC entries are indexed (s_prev, x, y, s) row-major.


def _parse_blocks(text):
    fields = {}
    block_key = None
    values = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, _, rest = line.partition(":")
            key = key.strip().lower()
            rest = rest.strip()
            if key in ("matrix", "kernel"):
                block_key = key
                values = fields.setdefault(key, [])
                rest_tokens = rest.split()
            else:
                block_key = None
                fields[key] = rest
                continue
        elif block_key is not None:
            rest_tokens = line.split()
        else:
            raise ConfigError(f"unexpected line in channel file: {raw!r}")
        for tok in rest_tokens:
            try:
                values.append(float(tok))
            except ValueError as exc:
                raise ConfigError(f"bad probability entry {tok!r}") from exc
    return fields


def loads_channel(text: str):
    """Parse a channel spec from text; returns a Dmc or Fsc."""
    fields = _parse_blocks(text)
    kind = fields.get("type")
    if kind not in ("dmc", "fsc"):
        raise ConfigError("channel file must declare 'type: dmc' or 'type: fsc'")
    try:
        nx = int(fields["inputs"])
        ny = int(fields["outputs"])
    except (KeyError, ValueError) as exc:
        raise ConfigError("channel file needs integer 'inputs' and 'outputs'") from exc
    try:
        if kind == "dmc":
            entries = np.asarray(fields.get("matrix", []), dtype=float)
            if entries.size != nx * ny:
                raise ConfigError(f"expected {nx * ny} matrix entries, got {entries.size}")
            return Dmc(entries.reshape(nx, ny))
        num_states = int(fields.get("states", "0"))
        if num_states < 1:
            raise ConfigError("FSC channel file needs positive 'states'")
        entries = np.asarray(fields.get("kernel", []), dtype=float)
        want = num_states * nx * ny * num_states
        if entries.size != want:
            raise ConfigError(f"expected {want} kernel entries, got {entries.size}")
        return Fsc(entries.reshape(num_states, nx, ny, num_states))
    except DomainError as exc:
        raise ConfigError(f"invalid channel file: {exc}") from exc


def load_channel(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_channel(fh.read())


def dumps_channel(channel) -> str:
    """Serialize a channel in the spec-file format."""
    lines = []
    if isinstance(channel, Dmc):
        lines.append("type: dmc")
        lines.append(f"inputs: {channel.input_size}")
        lines.append(f"outputs: {channel.output_size}")
        lines.append("matrix:")
        for row in channel.w:
            lines.append(" ".join(repr(v) for v in row))
    elif isinstance(channel, Fsc):
        lines.append("type: fsc")
        lines.append(f"states: {channel.num_states}")
        lines.append(f"inputs: {channel.input_size}")
        lines.append(f"outputs: {channel.output_size}")
        lines.append("kernel:")
        for sp in range(channel.num_states):
            for x in range(channel.input_size):
                lines.append(" ".join(repr(v) for v in channel.kernel[sp, x].ravel()))
    else:
        raise DomainError(f"not a channel object: {type(channel)!r}")
    return "\n".join(lines) + "\n"
