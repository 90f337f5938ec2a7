from __future__ import annotations

import json

import pytest

from thermostereo.config import rig_from_dict
from thermostereo.synth import HeatElement, SceneConfig, scene_to_dict

RIG = rig_from_dict()

# Layout of the synthetic sweep: the target moves along the optical axis,
# distractors stay put.  Non-collinear on purpose: a vertex close to the
# polygon centroid has an unstable angle and breaks the angular ordering.
TARGET_XY = (0.05, 0.04)
DISTRACTORS = (
    HeatElement((-0.45, -0.35, 2.8), 0.15, 200.0),
    HeatElement((0.45, -0.3, 3.3), 0.15, 220.0),
)


def sweep_scene(distance, n_elements=2, noise=0.0, jitter=0.0, seed=11, duration=20.0):
    target = HeatElement((TARGET_XY[0], TARGET_XY[1], distance), 0.15, 170.0)
    elements = (target,) + DISTRACTORS[: n_elements - 1]
    return SceneConfig(
        RIG,
        elements,
        ambient=20.0,
        frame_rate=8.0,
        phase_offset=1 / 16,
        temperature_noise_std=noise,
        centroid_jitter_std=jitter,
        duration=duration,
        rng_seed=seed,
    )


@pytest.fixture
def scene_file(tmp_path):
    def write(scene, name="scene.json"):
        path = tmp_path / name
        path.write_text(json.dumps(scene_to_dict(scene)))
        return path

    return write


_ACCEPTANCE = []


def record_acceptance(number, title, ok, detail=""):
    _ACCEPTANCE.append((number, title, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
