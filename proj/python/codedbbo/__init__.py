"""Coded black-box gradient estimation with Hadamard-structured directions."""

from ._codedbbo import (
    CODEC_CONVENTION,
    TRACE_HEADER,
    CodeConfig,
    ConfigError,
    NotDecodableError,
    bec_channel_reliabilities,
    build_config,
    check_decodability,
    coded_gradient,
    decode,
    directions,
    echo_config,
    encode,
    es_gradient,
    finite_difference_from_outputs,
    read_config_file,
    run,
)

__all__ = [name for name in dir() if not name.startswith("_")]
