import pytest

import wasmdesk


def fib_case(n=10):
    return wasmdesk.build_case("fibonacci", {"n": n})


def test_version_and_cases():
    assert wasmdesk.__version__
    assert wasmdesk.case_names() == [
        "fibonacci", "collision", "multiply-int-vec", "quicksort-int",
        "image-threshold", "video-convolute", "trial-division",
    ]


def test_round_trip_and_validate():
    case = fib_case()
    data = case["module"].encode()
    assert data[:4] == b"\0asm"
    assert wasmdesk.decode(data) == case["module"]
    wasmdesk.validate(data)
    assert ("fib", "func", 0) in case["module"].exports


def test_invoke_fibonacci_matches_oracle():
    case = fib_case(20)
    inst = wasmdesk.Instance(case["module"])
    assert inst.invoke(case["entry"], *case["args"]) == [6765]
    assert case["expected"] == wasmdesk.oracle("fibonacci", {"n": 20}) == 6765


def test_optimized_and_unoptimized_agree():
    case = wasmdesk.build_case("quicksort-int", {"L": 200}, seed=7)
    hot = wasmdesk.Instance(case["module"], opt_threshold=1)
    cold = wasmdesk.Instance(case["module"], opt_threshold=wasmdesk.NEVER_OPTIMIZE)
    for _ in range(3):
        assert hot.invoke("main") == cold.invoke("main") == [case["expected"]]
    assert hot.reoptimizations > 0
    assert cold.reoptimizations == 0


def test_errors_are_typed():
    with pytest.raises(wasmdesk.MalformedError) as e:
        wasmdesk.decode(b"\0asm\2\0\0\0")
    assert e.value.kind == "bad-version"
    assert issubclass(wasmdesk.Trap, wasmdesk.WasmError)

    inst = wasmdesk.Instance(fib_case()["module"])
    with pytest.raises(wasmdesk.InvocationError):
        inst.invoke("nope")
    with pytest.raises(wasmdesk.InvocationError):
        inst.invoke("fib")
    with pytest.raises(wasmdesk.ConfigError):
        wasmdesk.build_case("fibonacci", {"n": 99})


def test_fuel_trap_and_call_depth():
    case = fib_case(25)
    inst = wasmdesk.Instance(case["module"], fuel=1000)
    with pytest.raises(wasmdesk.Trap) as e:
        inst.invoke("fib", 25)
    assert e.value.kind == "fuel-exhausted"
    shallow = wasmdesk.Instance(case["module"], max_call_depth=5)
    with pytest.raises(wasmdesk.Trap) as e:
        shallow.invoke("fib", 10)
    assert e.value.kind == "call-depth-exceeded"


def test_generated_programs_and_wasi_output():
    printed = 0
    for seed in range(1, 40):
        m = wasmdesk.gen_random_program(seed, 100)
        outcomes = []
        for threshold in (1, wasmdesk.NEVER_OPTIMIZE):
            inst = wasmdesk.Instance(m, opt_threshold=threshold, fuel=50_000_000)
            try:
                outcomes.append(("ok", inst.invoke("main"), inst.stdout))
            except wasmdesk.Trap as t:
                outcomes.append(("trap", t.kind, inst.stdout))
        assert outcomes[0] == outcomes[1], seed
        printed += bool(outcomes[0][2])
    assert printed > 0


def test_statistics_and_report():
    s = wasmdesk.summarize([float(x) for x in range(1, 11)], 0)
    assert s["mean"] == 5.5 and s["median"] == 5.5 and s["min"] == 1 and s["max"] == 10
    assert abs(wasmdesk.reduction_percent(100, 37.03) - 62.97) < 1e-9
    report = wasmdesk.run_bench(["fibonacci"], iterations=5, warmup=1, scales={"fibonacci": {"n": 8}},
                                fold_microbench=False)
    assert report["schema"] == 1
    modes = report["cases"][0]["modes"]
    assert [m["mode"] for m in modes] == ["unoptimized", "optimized"]
    assert all(m["samples"] == 4 and len(m["raw_ms"]) == 5 for m in modes)
    assert report["cases"][0]["expected"] == 21
