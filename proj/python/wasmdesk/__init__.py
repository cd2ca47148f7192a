"""WebAssembly MVP runtime: decoder, validator, tree interpreter, WASI subset
and the benchmark harness."""

import json

from ._wasmdesk import (
    NEVER_OPTIMIZE,
    ConfigError,
    CorrectnessError,
    Instance,
    InvocationError,
    LinkError,
    MalformedError,
    Module,
    ProcExit,
    Trap,
    ValidationError,
    WasmError,
    __version__,
    build_case,
    case_names,
    decode,
    gen_random_program,
    oracle,
    reduction_percent,
    summarize,
    validate,
)
from ._wasmdesk import run_bench_json as _run_bench_json


def run_bench(cases=None, *, iterations=350, warmup=50, compare=True, opt_threshold=1000, seed=42,
              scales=None, fold_microbench=True):
    """Runs the benchmark suite and returns the JSON report as a dict."""
    text = _run_bench_json(list(cases or []), iterations, warmup, compare, opt_threshold, seed,
                           dict(scales or {}), fold_microbench)
    return json.loads(text)


__all__ = [
    "NEVER_OPTIMIZE", "ConfigError", "CorrectnessError", "Instance", "InvocationError", "LinkError",
    "MalformedError", "Module", "ProcExit", "Trap", "ValidationError", "WasmError", "__version__",
    "build_case", "case_names", "decode", "gen_random_program", "oracle", "reduction_percent",
    "run_bench", "summarize", "validate",
]
