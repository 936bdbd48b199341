import numpy as np
import pytest

from alarmsift.records import (AlarmType, CHANNEL_ORDER, Record, SynthSpec,
                               synth_dataset)


def make_record(record_id="rec-0", n=1000, fs=250.0, channels=CHANNEL_ORDER,
                alarm_type=AlarmType.ASYSTOLE, label=False, rng=None,
                samples=None):
    if samples is None:
        rng = rng or np.random.default_rng(0)
        samples = rng.standard_normal((len(channels), n))
    return Record(record_id=record_id, alarm_type=alarm_type, label=label,
                  fs=fs, channels=channels, samples=samples)


@pytest.fixture(scope="session")
def small_synth():
    """24 records, 0.5 true ratio; shared across tests to amortize generation."""
    return synth_dataset(SynthSpec(n=24, true_ratio=0.5), seed=42)
