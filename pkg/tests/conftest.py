from pathlib import Path

import numpy as np
import pytest

ACCEPTANCE_REPORT = Path(__file__).resolve().parent.parent / "acceptance_report.txt"


def pytest_sessionstart(session):
    if ACCEPTANCE_REPORT.exists():
        ACCEPTANCE_REPORT.unlink()


def pytest_terminal_summary(terminalreporter):
    """Echo the per-criterion acceptance lines after capture has ended."""
    if ACCEPTANCE_REPORT.exists():
        lines = ACCEPTANCE_REPORT.read_text(encoding="utf-8").strip().splitlines()
        if lines:
            terminalreporter.section("acceptance criteria")
            for line in lines:
                terminalreporter.write_line(line)


def decode_qr_matrix(modules: np.ndarray, scale: int = 0, quiet: int = 4) -> str:
    """Independent decode oracle: rasterize the module matrix and run OpenCV.

    Returns the decoded text, or "" when the symbol cannot be read. With
    scale=0 a few raster scales are tried; the detector is sensitive to
    absolute pixel size, not symbol validity.
    """
    import cv2

    detector = cv2.QRCodeDetectorAruco()
    side = modules.shape[0]
    base = np.full((side + 2 * quiet, side + 2 * quiet), 255, dtype=np.uint8)
    base[quiet : quiet + side, quiet : quiet + side] = np.where(modules, 0, 255)
    scales = (scale,) if scale else (10, 6, 16)
    for s in scales:
        img = np.kron(base, np.ones((s, s), dtype=np.uint8))
        data, points, _ = detector.detectAndDecode(img)
        if data:
            return data
    return ""


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240901)
