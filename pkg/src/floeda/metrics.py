"""Field-recovery skill scores."""

import numpy as np

from floeda.fields import FieldGrid

__all__ = ["nrmse", "pcc"]


def _values(field) -> np.ndarray:
    return field.values if isinstance(field, FieldGrid) else np.asarray(field, dtype=float)


def nrmse(est, truth) -> float:
    """||est - truth|| / ||truth||, Frobenius norms over all nodes and components."""
    e, t = _values(est), _values(truth)
    if e.shape != t.shape:
        raise ValueError(f"grid shapes differ: {e.shape} vs {t.shape}")
    denom = np.linalg.norm(t)
    if denom == 0:
        raise ValueError("truth field has zero norm")
    return float(np.linalg.norm(e - t) / denom)


def pcc(est, truth) -> float:
    """Pearson pattern correlation of the flattened two-component fields."""
    e, t = _values(est).ravel(), _values(truth).ravel()
    if e.shape != t.shape:
        raise ValueError("grid shapes differ")
    e = e - e.mean()
    t = t - t.mean()
    se, st_ = np.linalg.norm(e), np.linalg.norm(t)
    if se == 0 or st_ == 0:
        raise ValueError("pattern correlation undefined for a constant field")
    return float(np.dot(e, t) / (se * st_))
