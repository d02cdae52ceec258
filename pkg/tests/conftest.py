import numpy as np
import pytest

from semspeech import codec, data


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory):
    return data.write_toy_corpus(tmp_path_factory.mktemp("toy"))


@pytest.fixture(scope="session")
def toy_dataset(toy_manifest):
    return data.load_dataset(toy_manifest)


@pytest.fixture
def tiny_model():
    """Two conv modules, one bidirectional GRU of 4 units, one hidden dense of 8."""
    return codec.ModelConfig(n_bins=9, conv_filters=(2, 2), gru_layers=1, gru_units=4, encoder_dense=(8,))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record (passed, detail) for a numbered acceptance criterion."""
    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
