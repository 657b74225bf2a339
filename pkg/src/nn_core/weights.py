import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterator, Mapping, Tuple

import numpy as np

from src.errors import InvalidArgumentError, ShapeError

GATES = ("f", "i", "o", "C")

LSTM_PARAMS = tuple(f"{kind}_{g}" for g in GATES for kind in ("W", "U", "b")) + ("W_y", "b_y")
RNN_PARAMS = ("W_h", "U_h", "b_h", "W_y", "b_y")

_MAGIC = b"NPVW"
_CODEC_VERSION = 1


class Variant(str, Enum):
    RNN = "rnn"
    LSTM = "lstm"

    @property
    def param_names(self) -> Tuple[str, ...]:
        return LSTM_PARAMS if self is Variant.LSTM else RNN_PARAMS

    @property
    def tag(self) -> int:
        return 1 if self is Variant.LSTM else 0


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


def expected_shape(name: str, d: int, h: int, o: int) -> Tuple[int, ...]:
    if name == "W_y":
        return (o, h)
    if name == "b_y":
        return (o,)
    if name.startswith("W_"):
        return (h, d)
    if name.startswith("U_"):
        return (h, h)
    return (h,)


@dataclass(frozen=True, eq=False)
class WeightSet:
    """All weights and biases of one recurrent network plus its output projection.

    Arrays are copied on construction and made read-only, so a WeightSet can be
    handed between threads without further care.
    """

    variant: Variant
    params: Mapping[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        names = variant.param_names
        if set(self.params) != set(names):
            raise ShapeError(f"{variant.value} weights need exactly {names}, got {sorted(self.params)}")
        params = {name: _frozen(self.params[name]) for name in names}
        W0 = params["W_h" if variant is Variant.RNN else "W_f"]
        if W0.ndim != 2 or min(W0.shape) < 1:
            raise ShapeError(f"input weight must be a non-empty matrix, got shape {W0.shape}")
        h, d = W0.shape
        o = params["W_y"].shape[0] if params["W_y"].ndim == 2 else 0
        if o < 1:
            raise ShapeError("output projection W_y must be a non-empty matrix")
        for name, value in params.items():
            want = expected_shape(name, d, h, o)
            if value.shape != want:
                raise ShapeError(f"{name} has shape {value.shape}, expected {want}")
            if not np.all(np.isfinite(value)):
                raise InvalidArgumentError(f"{name} contains non-finite entries")
        object.__setattr__(self, "params", params)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.variant.param_names)

    @property
    def input_dim(self) -> int:
        return self.params["W_h" if self.variant is Variant.RNN else "W_f"].shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.params["U_h" if self.variant is Variant.RNN else "U_f"].shape[0]

    @property
    def output_dim(self) -> int:
        return self.params["W_y"].shape[0]

    def items(self):
        return ((name, self.params[name]) for name in self.variant.param_names)

    def map(self, fn: Callable[[str, np.ndarray], np.ndarray]) -> "WeightSet":
        return WeightSet(self.variant, {name: fn(name, value) for name, value in self.items()})

    def zeros_like(self) -> "WeightSet":
        return self.map(lambda _, value: np.zeros_like(value))

    def same_shape(self, other: "WeightSet") -> bool:
        return self.variant is other.variant and all(
            self.params[n].shape == other.params[n].shape for n in self
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([value.ravel() for _, value in self.items()])

    # ----- binary codec -----

    def to_bytes(self) -> bytes:
        """Magic, version byte, variant byte, (d, h, o) as uint32, then float64 row-major values."""
        header = _MAGIC + struct.pack(
            ">BBIII", _CODEC_VERSION, self.variant.tag, self.input_dim, self.hidden_dim, self.output_dim
        )
        body = b"".join(value.astype(">f8").tobytes(order="C") for _, value in self.items())
        return header + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> "WeightSet":
        if blob[:4] != _MAGIC:
            raise InvalidArgumentError("not a weight record")
        version, tag, d, h, o = struct.unpack(">BBIII", blob[4:18])
        if version != _CODEC_VERSION:
            raise InvalidArgumentError(f"unsupported weight record version {version}")
        variant = Variant.LSTM if tag == 1 else Variant.RNN
        offset = 18
        params: Dict[str, np.ndarray] = {}
        for name in variant.param_names:
            shape = expected_shape(name, d, h, o)
            count = int(np.prod(shape))
            chunk = blob[offset: offset + 8 * count]
            if len(chunk) != 8 * count:
                raise ShapeError(f"weight record truncated at {name}")
            params[name] = np.frombuffer(chunk, dtype=">f8").astype(np.float64).reshape(shape)
            offset += 8 * count
        if offset != len(blob):
            raise ShapeError("trailing bytes after weight record")
        return cls(variant, params)


def init_weights(
    variant: Variant,
    input_dim: int,
    hidden_dim: int,
    rng: np.random.Generator,
    output_dim: int = None,
) -> WeightSet:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; forget-gate bias starts at 1."""
    variant = Variant(variant)
    d, h = int(input_dim), int(hidden_dim)
    o = int(output_dim or input_dim)
    if min(d, h, o) < 1:
        raise InvalidArgumentError("network dimensions must be positive")
    params = {}
    for name in variant.param_names:
        shape = expected_shape(name, d, h, o)
        fan_in = d if (name.startswith("W_") and name != "W_y") else h
        bound = 1.0 / np.sqrt(fan_in)
        params[name] = rng.uniform(-bound, bound, size=shape)
    if variant is Variant.LSTM:
        params["b_f"] = np.ones(h)
    return WeightSet(variant, params)


def zero_weights(variant: Variant, input_dim: int, hidden_dim: int, output_dim: int = None) -> WeightSet:
    o = output_dim or input_dim
    return WeightSet(
        Variant(variant),
        {n: np.zeros(expected_shape(n, input_dim, hidden_dim, o)) for n in Variant(variant).param_names},
    )


@dataclass(frozen=True, eq=False)
class AdamState:
    """Adam moment accumulators, shaped like the weights they track."""

    m: WeightSet
    v: WeightSet
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, weights: WeightSet, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        zeros = weights.zeros_like()
        return cls(m=zeros, v=zeros, t=0, beta1=beta1, beta2=beta2, eps=eps)
