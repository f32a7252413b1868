from app.algorithms.perturb.gan import (
    ambiguity,
    gan_augment,
    select_borderline,
    surrogate_label,
    train_gan,
)
from app.algorithms.perturb.injection import inject, sba_augment
from app.algorithms.perturb.mc import run_mc
from app.algorithms.perturb.robustness import RobustnessResult, robustness_rankings

__all__ = [
    "RobustnessResult",
    "ambiguity",
    "gan_augment",
    "inject",
    "robustness_rankings",
    "run_mc",
    "sba_augment",
    "select_borderline",
    "surrogate_label",
    "train_gan",
]
