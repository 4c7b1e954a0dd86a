"""Explainable DDPG for vehicular network slicing.

Subpackages:

* :mod:`vslice_xrl.env` - road-grid vehicular environment with URLLC/eMBB slices
* :mod:`vslice_xrl.nn` - small dense network engine (forward, backward, Adam)
* :mod:`vslice_xrl.agent` - attention-augmented DDPG with Shapley supervision
* :mod:`vslice_xrl.explain` - Shapley value estimation by masked-policy rollouts
* :mod:`vslice_xrl.evalkit` - QoS satisfaction and explanation fidelity evaluation
"""

__version__ = "0.1.0"
