import numpy as np
import pytest

from actstream.core import FeatureVector, Instance, StreamDay


def fv(dim, *indices):
    return FeatureVector(dim, np.array(sorted(indices), dtype=np.int32))


def make_instance(app_id, dim, indices, label, release_day, label_day=None):
    return Instance(
        app_id,
        fv(dim, *indices),
        label,
        release_day,
        release_day if label_day is None else label_day,
    )


def make_days(instances):
    """Group instances into StreamDays the way the loader would."""
    by_day = {}
    for inst in instances:
        by_day.setdefault(inst.release_day, []).append(inst)
    return [
        StreamDay(day, sorted(group, key=lambda i: i.id))
        for day, group in sorted(by_day.items())
    ]


@pytest.fixture
def separable_stream():
    """Feature 0 marks malware, feature 1 marks benign; trivially separable.

    Ten days, one benign and one malware release per day, zero label delay.
    """
    instances = []
    for day in range(10):
        instances.append(make_instance(f"d{day}b", 4, [1], 0, day))
        instances.append(make_instance(f"d{day}m", 4, [0], 1, day))
    return make_days(instances)
