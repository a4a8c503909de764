"""Controller synthesis for probabilistic hyperproperties on MDPs."""

from ._hypersynth import (
    CapExceededError,
    Model,
    ModelError,
    Outcome,
    ParseError,
    Problem,
    Spec,
    SpecError,
    enumerate,
    generate,
    generator_ids,
    parse_model,
    parse_spec,
    synthesize,
    write_model,
    write_spec,
)

__all__ = [
    "CapExceededError",
    "Model",
    "ModelError",
    "Outcome",
    "ParseError",
    "Problem",
    "Spec",
    "SpecError",
    "enumerate",
    "generate",
    "generator_ids",
    "parse_model",
    "parse_spec",
    "synthesize",
    "write_model",
    "write_spec",
]
