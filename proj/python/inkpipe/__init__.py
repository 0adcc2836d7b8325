"""Online ink rendering, segmentation target codec and evaluation helpers."""

import json

from ._inkpipe import (
    IoError,
    ValidationError,
    cer,
    decode_target,
    edit_distance,
    encode_target,
    placement,
    render_ink,
)
from ._inkpipe import sample_stream as _sample_stream


def sample_stream(spec_path, n):
    """First n records of the mixture stream described by spec_path, as dicts."""
    return [json.loads(line) for line in _sample_stream(str(spec_path), n)]


__all__ = [
    "IoError",
    "ValidationError",
    "cer",
    "decode_target",
    "edit_distance",
    "encode_target",
    "placement",
    "render_ink",
    "sample_stream",
]
