"""Stochastic second-order optimization testbed.

Implements, at desk scale and with exact bookkeeping:

* a stochastic oracle with per-channel query accounting and controlled
  gradient/Hessian noise (`sosplab.core`);
* a recursively variance-reduced gradient estimator built from
  Hessian-vector products along the iterate path (`sosplab.hvp_rvr`);
* cubic-regularized trust-region steps and negative-curvature search
  (`sosplab.subproblems`);
* first- and second-order stochastic solvers wired to those pieces
  (`sosplab.solvers`);
* chain-structured hard instances with resisting stochastic oracles and
  zero-respecting run simulation (`sosplab.hard_instances`);
* a CLI + reporting harness for sweeps and property verification
  (`sosplab.harness`).
"""

from __future__ import annotations

from ._kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
