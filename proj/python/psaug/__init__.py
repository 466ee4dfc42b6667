"""Sample-adaptive spectrogram augmentation engine."""

import json

from . import _core

__version__ = _core.__version__


def default_config():
    """Engine configuration with every key at its default value."""
    return json.loads(_core.default_config())


def _config_json(config):
    return json.dumps(config if config is not None else {})


def augment_batch(features, losses, epoch, config=None, batch_index=0):
    """Augment a batch of (frames, bins) float32 arrays.

    Returns the augmented arrays and the batch report as a list of records
    (the batch header first, then one record per sample).
    """
    out, report = _core.augment_batch(
        list(features), [float(x) for x in losses], int(epoch), _config_json(config), int(batch_index)
    )
    return out, [json.loads(line) for line in report.splitlines()]


def replay_report(features, report):
    """Re-apply the plans of a report returned by augment_batch."""
    text = "".join(json.dumps(record) + "\n" for record in report)
    return _core.replay_report(list(features), text)


def hybrid_normalize(losses, config=None):
    return json.loads(_core.hybrid_normalize([float(x) for x in losses], _config_json(config)))


def schedule_at(epoch, config=None):
    return json.loads(_core.schedule_at(int(epoch), _config_json(config)))


regularized_ibf = _core.regularized_ibf

__all__ = [
    "augment_batch",
    "default_config",
    "hybrid_normalize",
    "regularized_ibf",
    "replay_report",
    "schedule_at",
]
