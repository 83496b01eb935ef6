import logging

import numpy as np

from core.errors import DomainError
from core.models import FAIL, PASS, VerificationReport
from growth.base import GrowthFunction, eval_f
from services.rng_service import derive_key, uniform_block

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12
MAX_COUNTEREXAMPLES = 10


def check_monotone(
    fn: GrowthFunction, n: int, trials: int, seed: int
) -> VerificationReport:
    """Samples ordered pairs (a, b) <= (c, d) in the generation-n box and checks
    f(a, b) <= f(c, d)."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")

    lo, hi = fn.domain(n)
    u = uniform_block(derive_key(seed, "monotone", n), 0, 4 * trials).reshape(-1, 4)
    pts = lo + (hi - lo) * u
    a = np.minimum(pts[:, 0], pts[:, 2])
    c = np.maximum(pts[:, 0], pts[:, 2])
    b = np.minimum(pts[:, 1], pts[:, 3])
    d = np.maximum(pts[:, 1], pts[:, 3])

    low, high = eval_f(fn, a, b), eval_f(fn, c, d)
    excess = low - high
    bad = np.flatnonzero(excess > MONOTONE_SLACK)

    report = VerificationReport(
        check="monotone",
        fn=fn.id,
        params={"n": n, "trials": trials, "seed": seed, "slack": MONOTONE_SLACK},
        verdict=PASS if bad.size == 0 else FAIL,
        measurements={
            "max_excess": float(excess.max()),
            "violations": int(bad.size),
            "numeric_derivatives": fn.numeric_derivatives,
        },
        threshold_provenance={"slack": "calibrated"},
    )
    for i in bad[:MAX_COUNTEREXAMPLES]:
        report.counterexamples.append(
            {
                "a": float(a[i]),
                "b": float(b[i]),
                "c": float(c[i]),
                "d": float(d[i]),
                "n": n,
                "seed": seed,
                "index": int(i),
            }
        )
    if bad.size:
        logger.warning(
            "%s is not monotone on generation %d: %d violations", fn.id, n, bad.size
        )
    return report
