import numpy as np
import pytest

from iqpool.bench import BenchConfig, run_bench
from iqpool.synth import generate_synthetic_dataset


@pytest.fixture(scope="session")
def synth_manifest(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthds")
    return generate_synthetic_dataset(out, seed=7)


@pytest.fixture(scope="session")
def bench_report(synth_manifest):
    """Full-grid benchmark over the synthetic dataset, with wall time."""
    import time

    config = BenchConfig(manifests=[str(synth_manifest)])
    start = time.perf_counter()
    report = run_bench(config)
    elapsed = time.perf_counter() - start
    return report, elapsed


@pytest.fixture()
def rng():
    return np.random.default_rng(20151207)
