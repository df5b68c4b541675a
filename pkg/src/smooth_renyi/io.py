"""JSON loading for joints and mixtures, and the line formats used for batch coding."""
import json
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .coding import Escape, bits_to_hex, hex_to_bits
from .distributions import JointDistribution, MixtureSource, make_mixture, validate_joint
from .exceptions import ValidationError


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc


def joint_from_dict(obj) -> JointDistribution:
    """Parse ``{"x_size", "y_size", "pxy"}``; ``pxy`` rows index ``x``."""
    if not isinstance(obj, dict) or "pxy" not in obj:
        raise ValidationError("a joint needs a 'pxy' matrix")
    try:
        pxy = np.array(obj["pxy"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("'pxy' must be a rectangular numeric matrix") from exc
    if pxy.ndim != 2:
        raise ValidationError("'pxy' must be a matrix")
    declared = (obj.get("x_size", pxy.shape[0]), obj.get("y_size", pxy.shape[1]))
    if tuple(declared) != pxy.shape:
        raise ValidationError(f"declared shape {tuple(declared)} does not match 'pxy' {pxy.shape}")
    return validate_joint(pxy)


def mixture_from_dict(obj) -> MixtureSource:
    if not isinstance(obj, dict) or "weights" not in obj or "components" not in obj:
        raise ValidationError("a mixture needs 'weights' and 'components'")
    return make_mixture([joint_from_dict(c) for c in obj["components"]], obj["weights"])


def load_joint(path) -> JointDistribution:
    return joint_from_dict(_read_json(path))


def load_mixture(path) -> MixtureSource:
    return mixture_from_dict(_read_json(path))


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_int_fields(line, line_no, count):
    fields = [f.strip() for f in line.replace(",", " ").split()]
    if len(fields) != count:
        raise ValidationError(f"line {line_no}: expected {count} fields, got {len(fields)}")
    return fields


def read_pairs(path) -> List[Tuple[int, int]]:
    """Newline-delimited ``x,y`` integer pairs; blank lines are skipped."""
    pairs = []
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        x, y = _parse_int_fields(line, no, 2)
        try:
            pairs.append((int(x), int(y)))
        except ValueError as exc:
            raise ValidationError(f"line {no}: symbols must be integers") from exc
    return pairs


def format_encoded(y: int, bits: str) -> str:
    """One encoded record: ``y,bit_length,hex`` (hex right-padded to whole bytes)."""
    return f"{y},{len(bits)},{bits_to_hex(bits)}"


def read_encoded(path) -> List[Tuple[int, str]]:
    records = []
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = [f.strip() for f in line.split(",")]
        if len(parts) != 3:
            raise ValidationError(f"line {no}: expected 'y,bit_length,hex'")
        try:
            y, nbits = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValidationError(f"line {no}: y and bit length must be integers") from exc
        records.append((y, hex_to_bits(parts[2], nbits)))
    return records


def format_decoded(x, y: int) -> str:
    return f"escape,{y}" if x is Escape else f"{x},{y}"
