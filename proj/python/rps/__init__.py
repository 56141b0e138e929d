"""Riemannian proximal sampling on the circle, spheres, and SPD matrices.

The compiled extension carries the full API; this package re-exports it.
Quick start::

    import rps

    cfg = rps.preset_config("circle")
    csv_text = rps.run_experiment(cfg)

or drive the sampler directly::

    rng = rps.CounterRng(7)
    target = rps.TargetSpec.circle_cosine(2.0)
    config = rps.SamplerConfig()
    config.eta = 0.2
    sampler = rps.ProximalSampler(target, config)
    trace = sampler.run_chain(rps.Point.circle(0.0), 10, rng)
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = (__doc__ or "") + "\n" + (_core_doc or "")
