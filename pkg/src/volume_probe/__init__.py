"""
Volume Probe Module

Monte-Carlo Bowen-ball volumes and the volume-lemma boundedness check.
"""

from .volume import (
    VolumeEstimate,
    ball_volume,
    bowen_ball_volume,
    linearised_box,
    volume_lemma_check,
    write_volume_csv,
)

__all__ = [
    "VolumeEstimate",
    "ball_volume",
    "bowen_ball_volume",
    "linearised_box",
    "volume_lemma_check",
    "write_volume_csv",
]
