"""Joint-space force control for series-elastic linear actuators.

Subpackages follow the control stack layer by layer:

- ``lti``: transfer functions, bilinear (Tustin/Horner) discretization,
  IIR execution, frequency responses.
- ``control``: PID+feedforward force controller, disturbance observer with
  gamma blend, virtual impedance, leaky integration.
- ``kinematics``: joint-to-actuator maps (forward, Jacobian,
  inverse-transpose effort mapping).
- ``plant``: deterministic simulator of the elastic actuator testbed and
  the weighted pendulum, with injectable stiction/backlash/coefficient
  perturbations.
- ``sysid``: chirp excitation, empirical frequency responses (H1), and
  rational transfer-function fitting.
- ``cli``: named desk-scale experiments and CSV/report emission.
"""

from .lti import (
    ContinuousTransferFunction,
    DiscreteIirFilter,
    FrequencyResponse,
    bilinear_discretize,
    freq_response,
    log_grid,
    taylor_shift,
)

__version__ = "0.1.0"
