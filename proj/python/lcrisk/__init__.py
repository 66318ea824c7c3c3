"""Latent competing-risk survival models for loan default and recovery times."""

from ._core import *  # noqa: F401,F403
from ._core import ModelKind, ModelSpec, fit_mle, simulate_cohort

ZT = ModelKind.ZeroTruncated
PTM = ModelKind.PromotionTime


def fit(records, kind=None, **options):
    """Fit a model to a list of EventRecord; kind defaults to detect_kind(records)."""
    from ._core import FitOptions, detect_kind

    if kind is None:
        kind = detect_kind(records)
    elif isinstance(kind, str):
        kind = {"zt": ZT, "ptm": PTM}[kind]
    opts = FitOptions()
    for key, value in options.items():
        if not hasattr(opts, key):
            raise TypeError(f"unknown fit option {key!r}")
        setattr(opts, key, value)
    return fit_mle(records, kind, opts)


__all__ = [name for name in dir() if not name.startswith("_")]
