"""Variable-length prefix coding with common side information and an error allowance.

For each ``y`` the encoder either sends ``"0"`` followed by a canonical prefix
codeword of ``x`` or declines with the single escape bit ``"1"``. Symbol ``x``
is sent with probability ``gamma[x, y] = Q(x|y) / P(x|y)`` where ``Q`` is the
optimal smooth-entropy truncation; payload lengths are Shannon lengths of the
tilted distribution ``Q^(1/(1+rho)) / sum Q^(1/(1+rho))`` or, on request, the
integer lengths minimizing ``sum Q 2^(rho l)`` exactly.
"""
import heapq
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence

import numpy as np

from ._validation import alpha_from_rho, check_epsilon, check_rho
from .distributions import DEFAULT_MAX_CELLS, MixtureSource, mixture_block, validate_joint
from .entropy import optimize_allocation
from .exceptions import AlphabetMismatch, MalformedBitstring, ValidationError
from .guessing import optimal_cost, single_letter_target

LENGTH_RULES = ("shannon", "optimal")
ESCAPE_WORD = "1"
PAYLOAD_PREFIX = "0"
#: Slack when rounding ``-log2`` up; a subsequent exact Kraft check repairs any overshoot.
_CEIL_SLACK = 1e-12


class _EscapeType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Escape"


#: Returned by :func:`decode` when the encoder declined to send the symbol.
Escape = _EscapeType()


def kraft_holds(lengths: Sequence[int]) -> bool:
    """Exact check of ``sum 2^-l <= 1`` using integer arithmetic."""
    lengths = [int(v) for v in lengths]
    if not lengths:
        return True
    top = max(lengths)
    return sum(1 << (top - v) for v in lengths) <= (1 << top)


def canonical_codewords(lengths: Dict[int, int]) -> Dict[int, str]:
    """Canonical prefix code: symbols sorted by (length, symbol), codes counted upward."""
    code, prev, out = 0, 0, {}
    for sym, ln in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= ln - prev
        out[sym] = format(code, f"0{ln}b") if ln else ""
        code += 1
        prev = ln
    return out


def _shannon_lengths(tilted: np.ndarray) -> np.ndarray:
    raw = -np.log2(tilted)
    lengths = np.maximum(np.ceil(raw - _CEIL_SLACK), 0).astype(int)
    while not kraft_holds(lengths):
        # rounding undershoot: lengthen the symbols closest to the boundary
        slack = lengths - raw
        lengths[slack == slack.min()] += 1
    return lengths


def _exponential_huffman(weights: np.ndarray, base: float) -> np.ndarray:
    """Integer lengths minimizing ``sum w base^l`` subject to Kraft.

    Huffman merging with the merged weight scaled by ``base``; optimal for ``base >= 1``.
    Ties break on insertion order so the result is deterministic.
    """
    lengths = np.zeros(weights.size, dtype=int)
    if weights.size == 1:
        return lengths
    tick = itertools.count()
    heap = [(float(w), next(tick), [i]) for i, w in enumerate(weights)]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, _, a = heapq.heappop(heap)
        w2, _, b = heapq.heappop(heap)
        lengths[a + b] += 1
        heapq.heappush(heap, (base * (w1 + w2), next(tick), a + b))
    return lengths


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Code tables for every ``y``.

    ``lengths[x, y]`` is the payload length in bits, ``-1`` when ``x`` is not
    encodable under ``y``; ``gamma[x, y]`` is the probability of sending
    ``x`` rather than escaping.
    """

    lengths: np.ndarray
    gamma: np.ndarray
    rho: float
    epsilon: float

    def __post_init__(self):
        self.lengths.setflags(write=False)
        self.gamma.setflags(write=False)

    @property
    def x_size(self) -> int:
        return self.lengths.shape[0]

    @property
    def y_size(self) -> int:
        return self.lengths.shape[1]

    def support(self, y: int) -> np.ndarray:
        return np.flatnonzero(self.lengths[:, y] >= 0)

    @cached_property
    def codewords(self) -> List[Dict[int, str]]:
        """Payload codeword of each encodable symbol, one dict per ``y``."""
        return [
            canonical_codewords({int(x): int(self.lengths[x, y]) for x in self.support(y)})
            for y in range(self.y_size)
        ]

    @cached_property
    def _decoders(self) -> List[Dict[str, int]]:
        return [{cw: x for x, cw in table.items()} for table in self.codewords]

    def codebook(self) -> List[List[dict]]:
        """Per-``y`` list of ``{symbol, length_bits, codeword}`` with the full transmitted word."""
        book = []
        for table in self.codewords:
            entries = sorted(table.items(), key=lambda kv: (len(kv[1]), kv[0]))
            book.append([
                {"symbol": x, "length_bits": len(cw) + 1, "codeword": PAYLOAD_PREFIX + cw}
                for x, cw in entries
            ])
        return book


def build_code(joint, rho: float, epsilon: float, lengths: str = "shannon") -> CodeSpec:
    """Code over the optimal truncation at ``alpha = 1/(1+rho)``.

    ``lengths="shannon"`` rounds the tilted self-information up;
    ``lengths="optimal"`` uses the least-moment integer lengths for the same
    retained mass, never worse than the Shannon lengths.
    """
    joint = validate_joint(joint)
    rho = check_rho(rho)
    epsilon = check_epsilon(epsilon)
    _check_rule(lengths)
    result = optimize_allocation(joint, alpha_from_rho(rho), epsilon)
    return _code_from_truncation(joint, rho, epsilon, result, lengths)


def _check_rule(rule):
    if rule not in LENGTH_RULES:
        raise ValidationError(f"length rule must be one of {LENGTH_RULES}, got {rule!r}")


def _code_from_truncation(joint, rho, epsilon, result, rule="shannon") -> CodeSpec:
    alpha = alpha_from_rho(rho)
    q = result.q_conditional
    lengths = np.full(joint.probs.shape, -1, dtype=int)
    gamma = np.zeros(joint.probs.shape)
    p_y = joint.p_y
    for y in joint.support_y:
        keep = np.flatnonzero(q[:, y] > 0)
        if keep.size == 0:
            continue
        if rule == "optimal":
            lengths[keep, y] = _exponential_huffman(q[keep, y], 2.0 ** rho)
        else:
            tilted = q[keep, y] ** alpha
            lengths[keep, y] = _shannon_lengths(tilted / tilted.sum())
        cond = joint.probs[keep, y] / p_y[y]
        gamma[keep, y] = np.clip(q[keep, y] / cond, 0.0, 1.0)
    return CodeSpec(lengths=lengths, gamma=gamma, rho=rho, epsilon=epsilon)


def encode(spec: CodeSpec, x: int, y: int, seed) -> str:
    """Send ``x`` under side information ``y``; ``seed`` may also be a ``numpy`` Generator."""
    rng = np.random.default_rng(seed)
    _check_symbol(spec, x, y)
    if spec.lengths[x, y] >= 0 and rng.random() < spec.gamma[x, y]:
        return PAYLOAD_PREFIX + spec.codewords[y][x]
    return ESCAPE_WORD


def decode(spec: CodeSpec, bits: str, y: int):
    """Inverse of :func:`encode` for a fixed ``y``; returns ``Escape`` on the escape word."""
    if not 0 <= y < spec.y_size:
        raise AlphabetMismatch(f"side symbol {y} outside 0..{spec.y_size - 1}")
    if not bits or set(bits) - {"0", "1"}:
        raise MalformedBitstring(f"not a bitstring: {bits!r}")
    if bits == ESCAPE_WORD:
        return Escape
    if bits[0] != PAYLOAD_PREFIX or bits[1:] not in spec._decoders[y]:
        raise MalformedBitstring(f"{bits!r} is not a codeword for y={y}")
    return spec._decoders[y][bits[1:]]


def _check_symbol(spec, x, y):
    if not (0 <= x < spec.x_size and 0 <= y < spec.y_size):
        raise AlphabetMismatch(f"pair ({x}, {y}) outside the code alphabets")


def _check_match(spec, joint):
    if spec.lengths.shape != joint.probs.shape:
        raise AlphabetMismatch(f"code is {spec.lengths.shape}, joint is {joint.probs.shape}")


def code_error_probability(spec: CodeSpec, joint) -> float:
    joint = validate_joint(joint)
    _check_match(spec, joint)
    return float(min(max(1.0 - np.sum(spec.gamma * joint.probs), 0.0), 1.0))


def code_moment(spec: CodeSpec, joint, rho: float) -> float:
    """``E[exp(rho * length)]`` with lengths in nats, escape path included."""
    joint = validate_joint(joint)
    rho = check_rho(rho)
    _check_match(spec, joint)
    sent = np.where(spec.lengths >= 0, 2.0 ** (rho * (spec.lengths + 1)), 0.0)
    per_cell = spec.gamma * sent + (1.0 - spec.gamma) * 2.0 ** rho
    return float(np.sum(joint.probs * per_cell))


@dataclass(frozen=True, eq=False)
class LengthProfile:
    """Real-valued lengths in nats minimizing the moment over the retained mass ``q_joint``."""

    lengths: np.ndarray
    q_joint: np.ndarray
    rho: float

    def kraft_sums(self) -> np.ndarray:
        return np.sum(np.exp(-self.lengths), axis=0)

    def moment(self) -> float:
        mask = self.q_joint > 0
        return float(np.sum(self.q_joint[mask] * np.exp(self.rho * self.lengths[mask])))


def converse_length_profile(joint, rho: float, epsilon: float) -> LengthProfile:
    """``l(x|y) = -log`` of the tilted truncation; ``inf`` outside its support."""
    joint = validate_joint(joint)
    rho = check_rho(rho)
    alpha = alpha_from_rho(rho)
    result = optimize_allocation(joint, alpha, epsilon)
    q = result.q_conditional
    lengths = np.full(q.shape, np.inf)
    for y in joint.support_y:
        keep = q[:, y] > 0
        if not keep.any():
            continue
        tilted = q[keep, y] ** alpha
        lengths[keep, y] = 0.0 - np.log(tilted / tilted.sum())
    return LengthProfile(lengths=lengths, q_joint=result.q_joint(joint), rho=rho)


@dataclass(frozen=True)
class CodingExponentPoint:
    """Per-letter exponents at block length ``n`` (nats).

    ``exponent`` uses the least-moment code; ``shannon_exponent`` the default
    Shannon-length code over the same truncation.
    """

    n: int
    exponent: float
    shannon_exponent: float
    target: float
    p_e: float
    moment: float
    guess_exponent: float
    entropy_exponent: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def coding_exponent_curve(mix: MixtureSource, rho: float, epsilon: float, n_list: Sequence[int],
                          max_cells=DEFAULT_MAX_CELLS):
    """Per-letter ``log M`` of the block codes next to the least guessing cost exponent."""
    rho = check_rho(rho)
    epsilon = check_epsilon(epsilon)
    target = single_letter_target(mix, rho, epsilon)
    rows = []
    for n in n_list:
        block = mixture_block(mix, n, max_cells)
        result = optimize_allocation(block, alpha_from_rho(rho), epsilon)
        spec = _code_from_truncation(block, rho, epsilon, result, "optimal")
        moment = code_moment(spec, block, rho)
        shannon = code_moment(_code_from_truncation(block, rho, epsilon, result), block, rho)
        rows.append(CodingExponentPoint(
            n=int(n),
            exponent=float(np.log(moment) / n),
            shannon_exponent=float(np.log(shannon) / n),
            target=target,
            p_e=code_error_probability(spec, block),
            moment=moment,
            guess_exponent=float(np.log(optimal_cost(block, rho, epsilon)) / n),
            entropy_exponent=float(np.log(result.objective) / n),
        ))
    return rows


def encode_records(spec: CodeSpec, pairs, seed) -> List[str]:
    """Encode ``(x, y)`` pairs with one generator shared across records."""
    rng = np.random.default_rng(seed)
    return [encode(spec, int(x), int(y), rng) for x, y in pairs]


def bits_to_hex(bits: str) -> str:
    if not bits:
        return ""
    padded = bits + "0" * (-len(bits) % 8)
    return int(padded, 2).to_bytes(len(padded) // 8, "big").hex()


def hex_to_bits(hexstr: str, nbits: int) -> str:
    if nbits < 0:
        raise MalformedBitstring("bit length must be nonnegative")
    try:
        raw = bytes.fromhex(hexstr)
    except ValueError as exc:
        raise MalformedBitstring(f"bad hex payload {hexstr!r}") from exc
    if len(raw) != (nbits + 7) // 8:
        raise MalformedBitstring(f"{len(raw)} bytes cannot hold exactly {nbits} bits")
    bits = "".join(format(b, "08b") for b in raw)
    if set(bits[nbits:]) - {"0"}:
        raise MalformedBitstring("nonzero padding bits")
    return bits[:nbits]

