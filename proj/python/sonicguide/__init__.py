"""Psychoacoustic sonification for target guidance."""

from ._core import (
    AmbiguityError,
    DisplacementVector,
    EarconEvent,
    EarconKind,
    FeatureFrame,
    IoError,
    MappingConfig,
    Mode,
    ModulationBand,
    NoSignalError,
    ParseError,
    SonificationParams,
    SynthConfig,
    ValidationError,
    decode_position,
    extract_features,
    in_target_zone,
    invert_params,
    map_position,
    read_wav,
    render_steady,
    render_stream,
    run_simulated_operator,
    write_wav,
)

__all__ = [name for name in dir() if not name.startswith("_")]
