"""Leader-follower arm teleoperation sandbox.

A simulated "virtual leader" arm is steered by an operator (scripted or a
browser console), solved through iterative Jacobian pseudo-inverse IK,
streamed at 50Hz over a framed JSON wire protocol, and tracked by a
rate-decoupled 1000Hz follower behind a low-pass filter and joint PD loop.
A divergence/heartbeat safety gate sits between the two arms.
"""

__version__ = "0.1.0"
