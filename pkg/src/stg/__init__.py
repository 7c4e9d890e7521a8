"""Two-stage learning from visual observation.

Stage one pretrains a latent-transition transformer, a clipped Wasserstein
critic, and a temporal-distance regressor on observation-only expert
trajectories. Stage two trains a PPO policy driven purely by intrinsic
rewards computed from the frozen stage-one bundle.
"""

__version__ = "0.1.0"
