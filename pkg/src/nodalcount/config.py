"""Default numerical tolerances."""

from dataclasses import asdict, dataclass
from typing import Optional

TOL_GAP = 1e-8
TOL_ZERO = 1e-9
TOL_HESS = 1e-11
TOL_DET = 1e-12
FD_STEP = None  # chosen from the spectral gap


@dataclass(frozen=True)
class Tolerances:
    """Tolerance set; all values are relative to ``1 + ||A||`` where applicable."""

    tol_gap: float = TOL_GAP
    tol_zero: float = TOL_ZERO
    tol_hess: float = TOL_HESS
    tol_det: float = TOL_DET
    fd_step: Optional[float] = FD_STEP

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is None and name == "fd_step":
                continue
            if value is None or not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")

    def to_dict(self) -> dict:
        return asdict(self)
